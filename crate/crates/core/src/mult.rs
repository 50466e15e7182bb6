//! Multiplicative precision: errors measured relative to the nontrivial rate
//! `η = 1 − p(0ⁿ)`.
//!
//! Stage 1 finds `η` up to a factor of 5 (or certifies `η ≤ η₀`) with an
//! adaptive geometric experiment. Stage 2 draws one batch sized by a
//! Bernstein bound that scales as `1/(ε²η)` and runs branch-and-prune with
//! the centered estimator `H′ = H − f^{|A⋆B|}`, whose second moment is
//! `O(η)` because `H′ = 0` whenever the channel does nothing.

use rand::Rng;
use serde::Serialize;

use crate::channel::{collect_batch, ProbeBatch, ProbeChannel, ProbeFamily, ProbeRecord};
use crate::error::{check_len, Error, Result};
use crate::learner::{
    check_crossover, check_open_unit, erasure_factor, individual_estimate, run_fast, EngineConfig,
    LearnerParams, Recovery,
};
use crate::pauli::{pauli_words, PauliString};

/// Flip cap per geometric trial is `⌈C_CAP/η₀⌉`.
pub const C_CAP: f64 = 8.0;
/// Number of geometric trials is `⌈C_MED·ln(1/δ₀)⌉`.
pub const C_MED: f64 = 48.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaKind {
    BelowFloor,
    Estimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EtaEstimate {
    pub kind: EtaKind,
    /// `η_est` when `kind` is `Estimate`, otherwise 0.
    pub value: f64,
    pub probes_used: u64,
}

impl EtaEstimate {
    pub fn is_below_floor(&self) -> bool {
        self.kind == EtaKind::BelowFloor
    }
}

pub fn rough_eta_trials(delta0: f64) -> usize {
    ((C_MED * (1.0 / delta0).ln()).ceil() as usize).max(1)
}

pub fn rough_eta_flip_cap(eta0: f64) -> u64 {
    (C_CAP / eta0).ceil() as u64
}

/// Upper bound on the probes [`rough_eta`] can spend.
pub fn rough_eta_probe_cap(eta0: f64, delta0: f64) -> u64 {
    rough_eta_trials(delta0) as u64 * rough_eta_flip_cap(eta0)
}

/// Rough estimate of `η` within a factor of 5, or the verdict `η ≤ η₀`.
///
/// Each trial probes with fresh uniform nontrivial strings until the readout
/// has a 1 ("heads", probability `η′ ∈ [2η/3, η]`), giving up after the flip
/// cap. If at least half the trials give up the verdict is below-floor.
/// Otherwise the upper median of the `1/G` values (0 for capped trials) is
/// about `η′/ln 2`; it is rescaled by `(5/4)·ln 2` to land in `[0.83η, 1.25η]`.
pub fn rough_eta<C: ProbeChannel, R: Rng + ?Sized>(
    channel: &C,
    eta0: f64,
    delta0: f64,
    rng: &mut R,
) -> Result<EtaEstimate> {
    check_open_unit("eta0", eta0)?;
    check_open_unit("delta0", delta0)?;
    let n = channel.num_qubits();
    let trials = rough_eta_trials(delta0);
    let cap = rough_eta_flip_cap(eta0);
    let words = pauli_words(n);
    let mut a = PauliString::identity(n);
    let mut readout = vec![0u64; words];
    let mut failed = vec![0u64; words];
    let mut probes_used = 0u64;
    let mut capped = 0usize;
    let mut values = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut heads_at = None;
        for g in 1..=cap {
            a.fill_random_nontrivial(rng);
            channel.measure_into(&a, rng, &mut readout, &mut failed)?;
            probes_used += 1;
            if readout.iter().any(|&w| w != 0) {
                heads_at = Some(g);
                break;
            }
        }
        match heads_at {
            Some(g) => values.push(1.0 / g as f64),
            None => {
                capped += 1;
                values.push(0.0);
                if 2 * capped >= trials {
                    return Ok(EtaEstimate {
                        kind: EtaKind::BelowFloor,
                        value: 0.0,
                        probes_used,
                    });
                }
            }
        }
    }
    values.sort_by(f64::total_cmp);
    let median = values[trials / 2];
    let value = (1.25 * std::f64::consts::LN_2 * median).clamp(f64::MIN_POSITIVE, 1.0);
    Ok(EtaEstimate {
        kind: EtaKind::Estimate,
        value,
        probes_used,
    })
}

/// Bernstein count for additive error `γ = ε·η` on a variable with second
/// moment at most `s = 4η`: `⌈((s + 2γ/3)/γ²)·ln(2/δ₀)⌉`.
pub fn mult_sample_count(epsilon: f64, delta0: f64, eta: f64) -> Result<usize> {
    check_open_unit("epsilon", epsilon)?;
    check_open_unit("delta0", delta0)?;
    if !(eta > 0.0 && eta <= 5.0) {
        return Err(Error::InvalidParameter(format!("eta scale {eta} outside (0, 5]")));
    }
    let gamma = epsilon * eta;
    let s = 4.0 * eta;
    Ok((((s + 2.0 * gamma / 3.0) / (gamma * gamma)) * (2.0 / delta0).ln()).ceil() as usize)
}

/// `η̂`: the empirical mean of `H̄ = 1 − H` at `B = 0ⁿ`.
pub fn mult_individual_identity(batch: &ProbeBatch, r: f64) -> Result<f64> {
    let h = individual_estimate(batch, &PauliString::identity(batch.num_qubits()), r)?;
    Ok(1.0 - h)
}

/// One sample of `H′ = H − f^{|A⋆B|}`, failed coordinates skipped in both terms.
pub fn centered_term(record: &ProbeRecord, b: &PauliString, r: f64) -> Result<f64> {
    check_crossover(r)?;
    let star = record.probe.star(b)?.and_not(&record.failed)?;
    let y = star.xor(&record.readout)?.and_not(&record.failed)?;
    let f = erasure_factor(r);
    Ok(f.powi(y.count_ones() as i32) - f.powi(star.count_ones() as i32))
}

/// Empirical mean of `H′`; unbiased for `p(B)` when `B ≠ 0ⁿ`.
pub fn mult_individual(batch: &ProbeBatch, b: &PauliString, r: f64) -> Result<f64> {
    check_crossover(r)?;
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    check_len(b.len(), batch.num_qubits())?;
    if b.is_identity() {
        return Err(Error::IdentityTarget);
    }
    let sum: f64 = batch
        .records()
        .map(|rec| centered_term(&rec, b, r).expect("lengths checked"))
        .sum();
    Ok(sum / batch.len() as f64)
}

/// Stage-2 details of a multiplicative run.
#[derive(Clone, Debug, PartialEq)]
pub struct Stage2 {
    /// `5·η_est`, the stand-in for `η` in the sample count.
    pub eta_scale: f64,
    pub eta_hat: f64,
    pub samples: usize,
    pub threshold: f64,
    pub capacity: usize,
    pub recovery: Recovery,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultRecovery {
    pub eta: EtaEstimate,
    pub stage1_delta: f64,
    /// Absent when stage 1 returned the below-floor verdict.
    pub stage2: Option<Stage2>,
}

/// Stage-2 batch size for a given `η_est`.
pub fn stage2_sample_count(params: &LearnerParams, n: usize, eta_est: f64) -> Result<usize> {
    match params.sample_count_override {
        Some(m) => Ok(m),
        None => mult_sample_count(params.epsilon0(), params.delta0(n), 5.0 * eta_est),
    }
}

/// Runs both stages. The hypothesis always lists `0ⁿ` with estimate `1 − η̂`;
/// other strings are kept when their centered estimate reaches
/// `(ε/2)·max(η̂, η_est/5)`.
pub fn mult_population_recover<C: ProbeChannel, R: Rng + ?Sized>(
    channel: &C,
    eta0: f64,
    params: &LearnerParams,
    rng: &mut R,
) -> Result<MultRecovery> {
    params.validate()?;
    let stage1_delta = params.delta / 2.0;
    let eta = rough_eta(channel, eta0, stage1_delta, rng)?;
    if eta.is_below_floor() {
        return Ok(MultRecovery {
            eta,
            stage1_delta,
            stage2: None,
        });
    }
    let n = channel.num_qubits();
    let samples = stage2_sample_count(params, n, eta.value)?;
    let batch = collect_batch(channel, samples, ProbeFamily::Nontrivial, rng)?;
    let stage2 = mult_recover_batch(&batch, eta.value, params)?;
    Ok(MultRecovery {
        eta,
        stage1_delta,
        stage2: Some(stage2),
    })
}

/// Stage 2 on an already collected batch.
pub fn mult_recover_batch(batch: &ProbeBatch, eta_est: f64, params: &LearnerParams) -> Result<Stage2> {
    params.validate()?;
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if batch.family() != ProbeFamily::Nontrivial {
        return Err(Error::WrongProbeFamily {
            expected: ProbeFamily::Nontrivial.name(),
            found: batch.family().name(),
        });
    }
    let eta_hat = mult_individual_identity(batch, params.r)?;
    let threshold = params.threshold() * eta_hat.max(eta_est / 5.0);
    let capacity = params.capacity() + 1;
    let cfg = EngineConfig {
        factor: params.factor(),
        threshold,
        capacity,
        centered: true,
    };
    let out = run_fast(batch, &cfg)?;
    Ok(Stage2 {
        eta_scale: 5.0 * eta_est,
        eta_hat,
        samples: batch.len(),
        threshold,
        capacity,
        recovery: Recovery::new(out, params.epsilon, batch.len()),
    })
}
