//! Pauli error-rate estimation from random Pauli-basis probes.
//!
//! A Pauli channel applies `σ_C` with probability `p(C)`. Probing it with a
//! random product of Pauli eigenstates `A ∈ {1,2,3}ⁿ` and measuring in the
//! same bases yields `R = A ⋆ C`: each non-identity coordinate of `C` is seen
//! through a Z-channel with crossover 1/3. The learners invert that channel
//! locally to recover every large `p(C)`.
//!
//! - [`pauli`]: packed Pauli strings and their F₂ algebra.
//! - [`channel`]: channel specs, probe simulation, batches.
//! - [`learner`]: additive-precision Individual and Population Recovery.
//! - [`mult`]: multiplicative precision relative to `η = 1 − p(0ⁿ)`.
//! - [`fourier`]: channel eigenvalues and the Fourier-coefficient learner.
//! - [`dense`]: density-matrix ground truth for general (Kraus) channels.

pub mod channel;
pub mod dense;
pub mod error;
pub mod fixtures;
pub mod fourier;
pub mod learner;
pub mod mult;
pub mod pauli;
pub mod rng;
pub mod stats;

pub use channel::{
    collect_batch, probe, probe_batch, reinterpret, sample_outcome, ChannelSpec, NoiseConfig, PauliChannel,
    ProbeBatch, ProbeChannel, ProbeFamily, ProbeRecord,
};
pub use error::{Error, Result};
pub use learner::{
    individual_estimate, marginal_estimate, population_recover, population_recover_fast, required_samples,
    Hypothesis, LearnerParams, Recovery,
};
pub use pauli::{BitString, PauliString};
