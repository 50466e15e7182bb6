#![allow(dead_code)]

use std::collections::BTreeSet;

use pauli_est::channel::{ChannelSpec, ProbeBatch, ProbeFamily, ProbeRecord};
use pauli_est::pauli::{BitString, PauliString};
use rand::Rng;

/// `k` distinct random strings with rates `min + (1 − k·min)·u_i/Σu`.
pub fn random_sparse_spec<R: Rng>(n: usize, k: usize, min: f64, rng: &mut R) -> ChannelSpec {
    let k = if n < 4 { k.min(1 << (2 * n)) } else { k };
    let mut strings = BTreeSet::new();
    while strings.len() < k {
        strings.insert(PauliString::random(n, rng));
    }
    let u: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = u.iter().sum();
    let atoms = strings
        .into_iter()
        .zip(&u)
        .map(|(c, &ui)| (c, min + (1.0 - k as f64 * min) * ui / total))
        .collect();
    ChannelSpec::normalized(n, atoms).unwrap()
}

/// Atoms with rational rates `k_i / D`.
pub fn random_rational_spec<R: Rng>(n: usize, atoms: usize, rng: &mut R) -> (ChannelSpec, Vec<u32>) {
    let mut strings = BTreeSet::new();
    let atoms = atoms.min(1 << (2 * n));
    while strings.len() < atoms {
        strings.insert(PauliString::random(n, rng));
    }
    let weights: Vec<u32> = (0..atoms).map(|_| rng.random_range(1..=5)).collect();
    let d: u32 = weights.iter().sum();
    let spec = ChannelSpec::normalized(
        n,
        strings
            .into_iter()
            .zip(&weights)
            .map(|(c, &w)| (c, w as f64 / d as f64))
            .collect(),
    )
    .unwrap();
    (spec, weights)
}

/// `a ⋆ b` for single symbols from the digit formula `a1·b2 + a2·b1`.
pub fn star_symbol(a: u8, b: u8) -> u8 {
    let (a1, a2) = (a >> 1, a & 1);
    let (b1, b2) = (b >> 1, b & 1);
    (a1 * b2 + a2 * b1) % 2
}

/// All strings of `{1,2,3}ⁿ`.
pub fn all_nontrivial(n: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (1..=3u8).map(move |s| {
                    let mut w = v.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    out
}

/// All strings of `{0,1,2,3}ⁿ`.
pub fn all_strings(n: usize) -> Vec<Vec<u8>> {
    (0..1u64 << (2 * n))
        .map(|i| PauliString::from_index(n, i).symbols().collect())
        .collect()
}

/// Exact expectation of the Individual Recovery estimator for target `b`,
/// enumerating uniform nontrivial probes, the channel's atoms and every
/// failure pattern, computed directly from symbols.
pub fn exact_estimator_mean(spec: &ChannelSpec, b: &PauliString, nu: f64, r: f64) -> f64 {
    let n = spec.num_qubits();
    let factor = -r / (1.0 - r);
    let bsym: Vec<u8> = b.symbols().collect();
    let probes = all_nontrivial(n);
    let mut total = 0.0;
    for (c, pc) in spec.atoms() {
        let csym: Vec<u8> = c.symbols().collect();
        for a in &probes {
            for pattern in 0..(1u32 << n) {
                let nfail = pattern.count_ones() as i32;
                let w = nu.powi(nfail) * (1.0 - nu).powi(n as i32 - nfail);
                if w == 0.0 {
                    continue;
                }
                let mut h = 1.0;
                for j in 0..n {
                    if (pattern >> j) & 1 == 1 {
                        continue;
                    }
                    let y = star_symbol(a[j], bsym[j]) ^ star_symbol(a[j], csym[j]);
                    if y == 1 {
                        h *= factor;
                    }
                }
                total += pc * w * h / probes.len() as f64;
            }
        }
    }
    total
}

/// Every nontrivial probe paired with every atom, atom `i` repeated `w_i`
/// times. Empirical means over this batch are exact expectations.
pub fn complete_batch(atoms: &[(PauliString, u32)]) -> ProbeBatch {
    let n = atoms[0].0.len();
    let mut batch = ProbeBatch::new(n, ProbeFamily::Nontrivial);
    for a in all_nontrivial(n) {
        let a = PauliString::from_symbols(&a).unwrap();
        for (c, w) in atoms {
            let rec = ProbeRecord {
                readout: a.star(c).unwrap(),
                probe: a.clone(),
                failed: BitString::zeros(n),
            };
            for _ in 0..*w {
                batch.push(&rec).unwrap();
            }
        }
    }
    batch
}
