//! Channel eigenvalues and learning from non-squared Fourier coefficients.
//!
//! With `f(A) = E_{C∼p}[(−1)^{A·C}]`, the eigenvalue of the channel at `σ_Ā`,
//! the rates are the Fourier coefficients `p(B) = E_A[f(A)(−1)^{A·B}]` over
//! uniform `A ∈ F₂²ⁿ`. Probing with `Ā` and taking the readout parity samples
//! `f(A)`, so a batch of extended probes (identity coordinates allowed) yields
//! unbiased estimates of every `p(B)`. The per-record estimator equals the
//! additive one with crossover 1/2, i.e. factor −1.

use std::fmt::Write as _;

use rand::Rng;

use crate::channel::{
    collect_batch, ChannelSpec, PauliChannel, ProbeBatch, ProbeChannel, ProbeFamily, ProbeRecord,
};
use crate::error::{check_len, Error, Result};
use crate::learner::{recover_with_factor, required_samples, LearnerParams, Recovery};
use crate::pauli::{bar_word, pauli_words, spread_prefix_mask, PauliString};

/// Largest `n` for the full `4ⁿ` transform.
pub const MAX_TABLE_QUBITS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenvalueEstimate {
    pub index: PauliString,
    pub value: f64,
    pub samples: usize,
}

/// Probe that may leave coordinates idle (`A_j = 0` reads 0).
pub fn probe_extended<R: Rng + ?Sized>(
    spec: &ChannelSpec,
    a: &PauliString,
    rng: &mut R,
) -> Result<ProbeRecord> {
    PauliChannel::noiseless(spec.clone()).measure(a, rng)
}

/// Samples for precision `ε` at confidence `δ` on a ±1 average.
pub fn eigenvalue_samples(epsilon: f64, delta: f64) -> Result<usize> {
    required_samples(epsilon, delta)
}

/// Probes `m` times with `Ā` and averages `(−1)^{parity(R)}`.
pub fn estimate_eigenvalue_with<C: ProbeChannel, R: Rng + ?Sized>(
    channel: &C,
    a: &PauliString,
    m: usize,
    rng: &mut R,
) -> Result<EigenvalueEstimate> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "eigenvalue estimation needs m >= 1".into(),
        ));
    }
    let n = channel.num_qubits();
    check_len(a.len(), n)?;
    let sent = a.bar();
    let words = pauli_words(n);
    let mut readout = vec![0u64; words];
    let mut failed = vec![0u64; words];
    let mut sum: i64 = 0;
    for _ in 0..m {
        channel.measure_into(&sent, rng, &mut readout, &mut failed)?;
        if failed.iter().any(|&w| w != 0) {
            return Err(Error::NoisyBatch);
        }
        let parity = readout.iter().map(|w| w.count_ones()).sum::<u32>() & 1;
        sum += 1 - 2 * parity as i64;
    }
    Ok(EigenvalueEstimate {
        index: a.clone(),
        value: (sum as f64 / m as f64).clamp(-1.0, 1.0),
        samples: m,
    })
}

pub fn estimate_eigenvalue<R: Rng + ?Sized>(
    spec: &ChannelSpec,
    a: &PauliString,
    m: usize,
    rng: &mut R,
) -> Result<EigenvalueEstimate> {
    estimate_eigenvalue_with(&PauliChannel::noiseless(spec.clone()), a, m, rng)
}

/// `f(A) = Σ_C p(C)(−1)^{A·C}`, i.e. `Σ_C p(C)(−1)^{⟨Ā,C⟩}`.
pub fn exact_eigenvalue(spec: &ChannelSpec, a: &PauliString) -> Result<f64> {
    check_len(a.len(), spec.num_qubits())?;
    Ok(spec
        .atoms()
        .iter()
        .map(|(c, p)| {
            if a.dot(c).expect("lengths checked") == 0 {
                *p
            } else {
                -*p
            }
        })
        .sum())
}

/// Lines `<A> <f(A)> <m>`.
pub fn eigenvalue_table_text(estimates: &[EigenvalueEstimate]) -> String {
    let mut out = String::new();
    for e in estimates {
        let _ = writeln!(out, "{} {} {}", e.index, e.value, e.samples);
    }
    out
}

/// `m` probes sent with uniform strings over `{0,1,2,3}ⁿ`. The stored probe
/// is the string sent, `Ā`; since bar is a bijection it is uniform too.
pub fn collect_extended_batch<C: ProbeChannel, R: Rng + ?Sized>(
    channel: &C,
    m: usize,
    rng: &mut R,
) -> Result<ProbeBatch> {
    collect_batch(channel, m, ProbeFamily::Extended, rng)
}

fn check_gl_batch(batch: &ProbeBatch) -> Result<()> {
    if batch.family() != ProbeFamily::Extended {
        return Err(Error::WrongProbeFamily {
            expected: ProbeFamily::Extended.name(),
            found: batch.family().name(),
        });
    }
    if batch.has_failures() {
        return Err(Error::NoisyBatch);
    }
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    Ok(())
}

/// `(−1)^{parity(R) + A·B}` for one record, with `A` recovered as the bar of
/// the string sent.
pub fn gl_term(record: &ProbeRecord, b: &PauliString) -> Result<f64> {
    let a = record.probe.bar();
    let bit = record.readout.parity() ^ a.dot(b)?;
    Ok(if bit == 0 { 1.0 } else { -1.0 })
}

/// Empirical Fourier coefficient `f̃(B)`; unbiased for `p(B)`.
pub fn gl_coefficient(batch: &ProbeBatch, b: &PauliString) -> Result<f64> {
    check_gl_batch(batch)?;
    check_len(b.len(), batch.num_qubits())?;
    gl_marginal(batch, b)
}

/// Fourier estimate of the prefix marginal, using only the first `ℓ`
/// coordinates of every record.
pub fn gl_marginal(batch: &ProbeBatch, prefix: &PauliString) -> Result<f64> {
    check_gl_batch(batch)?;
    let len = prefix.len();
    if len == 0 || len > batch.num_qubits() {
        return Err(Error::LengthMismatch {
            left: len,
            right: batch.num_qubits(),
        });
    }
    let (probes, readouts, _) = batch.raw();
    let stride = batch.stride();
    let mut sum: i64 = 0;
    for t in 0..batch.len() {
        let mut ones = 0u32;
        for (w, &b) in prefix.words().iter().enumerate() {
            let mask = spread_prefix_mask(len, w);
            let sent = probes[t * stride + w];
            let a = bar_word(sent);
            ones += (readouts[t * stride + w] & mask).count_ones();
            ones += (a & b & (mask | (mask << 1))).count_ones();
        }
        sum += 1 - 2 * (ones & 1) as i64;
    }
    Ok(sum as f64 / batch.len() as f64)
}

/// Branch-and-prune on Fourier-coefficient marginals, drawing its own batch.
pub fn gl_recover<C: ProbeChannel, R: Rng + ?Sized>(
    channel: &C,
    params: &LearnerParams,
    rng: &mut R,
) -> Result<Recovery> {
    params.validate()?;
    let m = params.sample_count(channel.num_qubits())?;
    let batch = collect_extended_batch(channel, m, rng)?;
    gl_recover_batch(&batch, params)
}

/// Branch-and-prune on a noiseless extended batch with the same threshold
/// and capacity as the additive learner.
pub fn gl_recover_batch(batch: &ProbeBatch, params: &LearnerParams) -> Result<Recovery> {
    check_gl_batch(batch)?;
    recover_with_factor(batch, params, -1.0)
}

fn check_table_size(n: usize) -> Result<()> {
    if n > MAX_TABLE_QUBITS {
        Err(Error::TooManyQubits {
            n,
            max: MAX_TABLE_QUBITS,
        })
    } else {
        Ok(())
    }
}

/// In-place unnormalized Walsh–Hadamard transform over `log2(len)` bits.
fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for chunk in v.chunks_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        h *= 2;
    }
}

/// `f(A)` for all `4ⁿ` strings, indexed by [`PauliString::to_index`].
pub fn fourier_table(spec: &ChannelSpec) -> Result<Vec<f64>> {
    let n = spec.num_qubits();
    check_table_size(n)?;
    let mut v = vec![0.0; 1 << (2 * n)];
    for (c, p) in spec.atoms() {
        v[c.to_index() as usize] += p;
    }
    walsh_hadamard(&mut v);
    Ok(v)
}

/// Inverse of [`fourier_table`]: `p(B) = 4⁻ⁿ Σ_A f(A)(−1)^{A·B}`.
pub fn rates_from_fourier(table: &[f64]) -> Result<Vec<f64>> {
    let len = table.len();
    if !len.is_power_of_two() || !len.trailing_zeros().is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "table length {len} is not a power of 4"
        )));
    }
    check_table_size(len.trailing_zeros() as usize / 2)?;
    let mut v = table.to_vec();
    walsh_hadamard(&mut v);
    for x in &mut v {
        *x /= len as f64;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn identity_eigenvalue_is_one() {
        let spec = ChannelSpec::new(2, vec![(p("12"), 0.5), (p("33"), 0.5)]).unwrap();
        let est = estimate_eigenvalue(&spec, &p("00"), 100, &mut seeded(1)).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(exact_eigenvalue(&spec, &p("00")).unwrap(), 1.0);
    }

    #[test]
    fn depolarizing_closed_form() {
        let eta = 0.3;
        let spec = ChannelSpec::new(
            1,
            vec![
                (p("0"), 1.0 - eta),
                (p("1"), eta / 3.0),
                (p("2"), eta / 3.0),
                (p("3"), eta / 3.0),
            ],
        )
        .unwrap();
        for a in ["1", "2", "3"] {
            assert!((exact_eigenvalue(&spec, &p(a)).unwrap() - 0.6).abs() < 1e-12);
        }
    }

    #[test]
    fn extended_probe_examples() {
        let spec = ChannelSpec::point_mass(p("13"));
        let rec = probe_extended(&spec, &p("10"), &mut seeded(2)).unwrap();
        assert!(rec.readout.is_zero());
        let rec = probe_extended(&spec, &p("00"), &mut seeded(2)).unwrap();
        assert!(rec.readout.is_zero());
    }

    #[test]
    fn transform_round_trip() {
        let spec =
            ChannelSpec::normalized(3, vec![(p("012"), 0.3), (p("330"), 0.5), (p("000"), 0.2)]).unwrap();
        let table = fourier_table(&spec).unwrap();
        for idx in [0u64, 5, 17, 63] {
            let a = PauliString::from_index(3, idx);
            assert!((table[idx as usize] - exact_eigenvalue(&spec, &a).unwrap()).abs() < 1e-12);
        }
        let back = rates_from_fourier(&table).unwrap();
        for (idx, &v) in back.iter().enumerate() {
            let c = PauliString::from_index(3, idx as u64);
            assert!((v - spec.probability(&c)).abs() < 1e-12);
        }
        assert!(rates_from_fourier(&[0.0; 8]).is_err());
    }

    #[test]
    fn gl_rejects_wrong_batches() {
        let spec = ChannelSpec::point_mass(p("12"));
        let nontrivial = crate::channel::probe_batch(&spec, 10, Default::default(), &mut seeded(3)).unwrap();
        assert!(matches!(
            gl_coefficient(&nontrivial, &p("12")),
            Err(Error::WrongProbeFamily { .. })
        ));
        let noisy_channel = PauliChannel::new(spec, crate::channel::NoiseConfig::new(0.25).unwrap());
        let noisy = collect_extended_batch(&noisy_channel, 200, &mut seeded(4)).unwrap();
        assert_eq!(gl_coefficient(&noisy, &p("12")), Err(Error::NoisyBatch));
    }

    #[test]
    fn gl_marginal_matches_terms() {
        let spec = ChannelSpec::normalized(40, vec![(p(&"1230".repeat(10)), 0.6), (p(&"3".repeat(40)), 0.4)])
            .unwrap();
        let batch = collect_extended_batch(&PauliChannel::noiseless(spec), 100, &mut seeded(5)).unwrap();
        let b = p(&"1230".repeat(10));
        let direct: f64 = batch.records().map(|r| gl_term(&r, &b).unwrap()).sum::<f64>() / 100.0;
        assert!((gl_coefficient(&batch, &b).unwrap() - direct).abs() < 1e-12);
    }
}
