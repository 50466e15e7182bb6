//! Additive-precision learning: Individual Recovery of single rates, marginal
//! estimation, and branch-and-prune Population Recovery.

mod engine;
mod estimator;
mod hypothesis;

pub(crate) use engine::{run_fast, run_naive, EngineConfig};
pub use estimator::{
    erasure_factor, estimator_term, hamming_weights, individual_estimate, marginal_estimate,
    prefix_weight_histogram,
};
pub use hypothesis::{Hypothesis, Recovery};

use crate::channel::{NoiseConfig, ProbeBatch};
use crate::error::{Error, Result};

/// Hoeffding count for the mean of `[−1, 1]` variables: `⌈(2/ε₀²)·ln(2/δ₀)⌉`.
pub fn required_samples(epsilon0: f64, delta0: f64) -> Result<usize> {
    check_open_unit("epsilon0", epsilon0)?;
    check_open_unit("delta0", delta0)?;
    Ok(((2.0 / (epsilon0 * epsilon0)) * (2.0 / delta0).ln()).ceil() as usize)
}

pub(crate) fn check_open_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} = {x} must lie in (0, 1)"
        )))
    }
}

/// Smallest and largest crossover probability the estimators accept.
pub const MIN_CROSSOVER: f64 = 1.0 / 3.0;
pub const MAX_CROSSOVER: f64 = 0.5;

pub(crate) fn check_crossover(r: f64) -> Result<()> {
    if (MIN_CROSSOVER - 1e-12..=MAX_CROSSOVER + 1e-12).contains(&r) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "crossover r = {r} outside [1/3, 1/2]"
        )))
    }
}

/// Target precision `ε`, confidence `δ`, and the crossover `r` of the
/// effective Z-channel (1/3 without measurement failures).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerParams {
    pub epsilon: f64,
    pub delta: f64,
    pub r: f64,
    /// Replaces the minimum batch size derived from `ε` and `δ`.
    pub sample_count_override: Option<usize>,
}

impl LearnerParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        let params = LearnerParams {
            epsilon,
            delta,
            r: MIN_CROSSOVER,
            sample_count_override: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_noise(self, noise: NoiseConfig) -> Self {
        LearnerParams {
            r: noise.erasure_r(),
            ..self
        }
    }

    pub fn with_r(self, r: f64) -> Result<Self> {
        check_crossover(r)?;
        Ok(LearnerParams { r, ..self })
    }

    pub fn with_sample_count(self, m: usize) -> Self {
        LearnerParams {
            sample_count_override: Some(m),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("epsilon", self.epsilon)?;
        check_open_unit("delta", self.delta)?;
        check_crossover(self.r)?;
        if self.sample_count_override == Some(0) {
            return Err(Error::InvalidParameter(
                "sample count override must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// `ε₀ = ε/4`.
    pub fn epsilon0(&self) -> f64 {
        self.epsilon / 4.0
    }

    /// `δ₀ = 4εδ/(9n)`.
    pub fn delta0(&self, n: usize) -> f64 {
        4.0 * self.epsilon * self.delta / (9.0 * n as f64)
    }

    /// Prune threshold `2ε₀ = ε/2`.
    pub fn threshold(&self) -> f64 {
        self.epsilon / 2.0
    }

    /// Largest admissible `|Ω_j|`: `⌊4/ε⌋`.
    pub fn capacity(&self) -> usize {
        (4.0 / self.epsilon + 1e-9).floor() as usize
    }

    pub fn factor(&self) -> f64 {
        erasure_factor(self.r)
    }

    /// Minimum batch size for `n` qubits.
    pub fn sample_count(&self, n: usize) -> Result<usize> {
        match self.sample_count_override {
            Some(m) => Ok(m),
            None => required_samples(self.epsilon0(), self.delta0(n)),
        }
    }
}

fn check_batch(batch: &ProbeBatch, params: &LearnerParams) -> Result<()> {
    params.validate()?;
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let need = params.sample_count(batch.num_qubits())?;
    if batch.len() < need {
        return Err(Error::BatchTooSmall {
            have: batch.len(),
            need,
        });
    }
    Ok(())
}

fn additive_config(params: &LearnerParams, factor: f64) -> EngineConfig {
    EngineConfig {
        factor,
        threshold: params.threshold(),
        capacity: params.capacity(),
        centered: false,
    }
}

/// Branch-and-prune Population Recovery, re-estimating every candidate prefix
/// from the whole batch.
pub fn population_recover(batch: &ProbeBatch, params: &LearnerParams) -> Result<Recovery> {
    check_batch(batch, params)?;
    let out = run_naive(batch, &additive_config(params, params.factor()))?;
    Ok(Recovery::new(out, params.epsilon, batch.len()))
}

/// Same output as [`population_recover`], bit for bit, but each surviving
/// prefix carries its per-record Hamming-weight vector so a child costs O(m).
pub fn population_recover_fast(batch: &ProbeBatch, params: &LearnerParams) -> Result<Recovery> {
    check_batch(batch, params)?;
    let out = run_fast(batch, &additive_config(params, params.factor()))?;
    Ok(Recovery::new(out, params.epsilon, batch.len()))
}

pub(crate) fn recover_with_factor(
    batch: &ProbeBatch,
    params: &LearnerParams,
    factor: f64,
) -> Result<Recovery> {
    check_batch(batch, params)?;
    let out = run_fast(batch, &additive_config(params, factor))?;
    Ok(Recovery::new(out, params.epsilon, batch.len()))
}
