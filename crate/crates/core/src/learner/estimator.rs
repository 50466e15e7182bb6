use crate::channel::{ProbeBatch, ProbeRecord, RecordView};
use crate::error::{check_len, Error, Result};
use crate::pauli::{spread_prefix_mask, star_word, PauliString};

use super::check_crossover;

/// Local inverse of the Z-channel with crossover `r`: `−r/(1−r)`.
pub fn erasure_factor(r: f64) -> f64 {
    -r / (1.0 - r)
}

/// `[1, f, f², …, f^max]` by repeated multiplication, so every caller sees
/// the same rounding.
pub(crate) fn powers(factor: f64, max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut x = 1.0;
    for _ in 0..=max {
        out.push(x);
        x *= factor;
    }
    out
}

/// `Σ_k hist[k]·pow[k]`, summed in increasing `k`.
#[inline]
pub(crate) fn weighted_sum(hist: &[u64], pow: &[f64]) -> f64 {
    hist.iter().zip(pow).map(|(&c, &p)| c as f64 * p).sum()
}

/// Weight of `(A ⋆ β) +₂ R` over the first `len` non-failed coordinates.
#[inline]
pub(crate) fn y_weight(v: RecordView<'_>, beta: &[u64], len: usize) -> usize {
    let mut h = 0;
    for (w, &b) in beta.iter().enumerate() {
        let mask = spread_prefix_mask(len, w) & !v.failed[w];
        h += ((star_word(v.probe[w], b) ^ v.readout[w]) & mask).count_ones();
    }
    h as usize
}

/// Weight of `A ⋆ β` over the first `len` non-failed coordinates.
#[inline]
pub(crate) fn star_weight(v: RecordView<'_>, beta: &[u64], len: usize) -> usize {
    let mut g = 0;
    for (w, &b) in beta.iter().enumerate() {
        let mask = spread_prefix_mask(len, w) & !v.failed[w];
        g += (star_word(v.probe[w], b) & mask).count_ones();
    }
    g as usize
}

fn check_prefix(batch: &ProbeBatch, prefix: &PauliString) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if prefix.is_empty() {
        return Err(Error::InvalidParameter(
            "prefix must have length at least 1".into(),
        ));
    }
    if prefix.len() > batch.num_qubits() {
        return Err(Error::LengthMismatch {
            left: prefix.len(),
            right: batch.num_qubits(),
        });
    }
    Ok(())
}

/// The vector `h^(β)`: per record, the Hamming weight of `(A ⋆ β) +₂ R`
/// restricted to the prefix and to non-failed coordinates.
pub fn hamming_weights(batch: &ProbeBatch, prefix: &PauliString) -> Result<Vec<usize>> {
    check_prefix(batch, prefix)?;
    Ok(batch
        .views()
        .map(|v| y_weight(v, prefix.words(), prefix.len()))
        .collect())
}

/// Number of records with each value of `h^(β)`, indexed `0..=ℓ`.
pub fn prefix_weight_histogram(batch: &ProbeBatch, prefix: &PauliString) -> Result<Vec<u64>> {
    check_prefix(batch, prefix)?;
    let mut hist = vec![0u64; prefix.len() + 1];
    for v in batch.views() {
        hist[y_weight(v, prefix.words(), prefix.len())] += 1;
    }
    Ok(hist)
}

/// One sample of the estimator `H = ∏_{t not failed} (−r/(1−r))^{y_t}` with
/// `y = (A ⋆ B) +₂ R`.
pub fn estimator_term(record: &ProbeRecord, b: &PauliString, r: f64) -> Result<f64> {
    check_crossover(r)?;
    let y = record
        .probe
        .star(b)?
        .xor(&record.readout)?
        .and_not(&record.failed)?;
    Ok(erasure_factor(r).powi(y.count_ones() as i32))
}

/// Empirical mean of `H`; estimates `p(B)`.
pub fn individual_estimate(batch: &ProbeBatch, b: &PauliString, r: f64) -> Result<f64> {
    if !batch.is_empty() {
        check_len(b.len(), batch.num_qubits())?;
    }
    marginal_estimate(batch, b, r)
}

/// Individual Recovery on the first `ℓ` coordinates only; estimates
/// `Pr_{C∼p}[C_1..C_ℓ = prefix]`.
pub fn marginal_estimate(batch: &ProbeBatch, prefix: &PauliString, r: f64) -> Result<f64> {
    check_crossover(r)?;
    let hist = prefix_weight_histogram(batch, prefix)?;
    let pow = powers(erasure_factor(r), prefix.len());
    Ok(weighted_sum(&hist, &pow) / batch.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{probe_batch, ChannelSpec, NoiseConfig, ProbeFamily};
    use crate::pauli::BitString;
    use crate::rng::seeded;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn forced_outcome_equal_to_target_gives_one() {
        let b = p("2130");
        let spec = ChannelSpec::point_mass(b.clone());
        let batch = probe_batch(&spec, 200, NoiseConfig::noiseless(), &mut seeded(1)).unwrap();
        assert_eq!(individual_estimate(&batch, &b, 1.0 / 3.0).unwrap(), 1.0);
    }

    #[test]
    fn single_coordinate_enumeration() {
        // p(0) = p(1) = 1/2, B = 1: every (A, C) pair weighted 1/6.
        let b = p("1");
        let mut total = 0.0;
        for a in 1..=3u8 {
            for c in ["0", "1"] {
                let probe = PauliString::from_symbols(&[a]).unwrap();
                let readout = probe.star(&p(c)).unwrap();
                let rec = ProbeRecord {
                    probe,
                    readout,
                    failed: BitString::zeros(1),
                };
                total += estimator_term(&rec, &b, 1.0 / 3.0).unwrap() / 6.0;
            }
        }
        assert!((total - 0.5).abs() < 1e-15);
    }

    #[test]
    fn histogram_matches_terms() {
        let spec = ChannelSpec::normalized(
            6,
            vec![(p("012301"), 0.4), (p("333000"), 0.35), (p("000000"), 0.25)],
        )
        .unwrap();
        let noise = NoiseConfig::new(0.1).unwrap();
        let batch = probe_batch(&spec, 300, noise, &mut seeded(2)).unwrap();
        let r = noise.erasure_r();
        let b = p("012301");
        let direct: f64 = batch
            .records()
            .map(|rec| estimator_term(&rec, &b, r).unwrap())
            .sum::<f64>()
            / 300.0;
        let via_hist = individual_estimate(&batch, &b, r).unwrap();
        assert!((direct - via_hist).abs() < 1e-12);
    }

    #[test]
    fn marginal_rejects_bad_prefixes() {
        let spec = ChannelSpec::point_mass(p("12"));
        let batch = probe_batch(&spec, 5, NoiseConfig::noiseless(), &mut seeded(3)).unwrap();
        assert!(marginal_estimate(&batch, &p("123"), 1.0 / 3.0).is_err());
        assert!(marginal_estimate(&batch, &PauliString::identity(0), 1.0 / 3.0).is_err());
        assert!(individual_estimate(&batch, &p("1"), 1.0 / 3.0).is_err());
        let empty = ProbeBatch::new(2, ProbeFamily::Nontrivial);
        assert_eq!(
            individual_estimate(&empty, &p("12"), 1.0 / 3.0),
            Err(Error::EmptyBatch)
        );
    }

    #[test]
    fn terms_stay_in_unit_interval() {
        let spec = ChannelSpec::point_mass(p("3333"));
        let batch = probe_batch(&spec, 100, NoiseConfig::new(0.25).unwrap(), &mut seeded(4)).unwrap();
        for r in [1.0 / 3.0, 0.4, 0.5] {
            for rec in batch.records() {
                let h = estimator_term(&rec, &p("1200"), r).unwrap();
                assert!((-1.0..=1.0).contains(&h));
            }
        }
    }
}
