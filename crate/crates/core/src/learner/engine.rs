//! Branch-and-prune over prefixes.
//!
//! Round `ℓ` extends every surviving prefix of length `ℓ` by each symbol and
//! keeps a child when its marginal estimate reaches the threshold. Every
//! estimate is computed from a per-record weight histogram, so the naive path
//! (recount each child from scratch) and the fast path (extend cached weight
//! vectors by one coordinate) produce identical floating-point results.
//!
//! In centered mode the estimator is `H − f^{|A⋆β|}` for `β ≠ 0^ℓ` and plain
//! `H` for the all-zero prefix, which always survives.

use crate::channel::ProbeBatch;
use crate::error::{Error, Result};
use crate::pauli::{PauliString, SYMBOLS_PER_WORD};

use super::estimator::{powers, star_weight, weighted_sum, y_weight};

#[derive(Clone, Copy, Debug)]
pub(crate) struct EngineConfig {
    pub factor: f64,
    pub threshold: f64,
    pub capacity: usize,
    pub centered: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct EngineOutput {
    pub entries: Vec<(PauliString, f64)>,
    pub survivors: Vec<usize>,
}

/// Bit `b` is set iff symbol `a` anticommutes with symbol `b`.
const STAR_NIBBLE: [u8; 4] = [0b0000, 0b1100, 0b1010, 0b0110];

impl EngineConfig {
    fn keeps(&self, level: usize, n: usize, child: &PauliString, estimate: f64) -> bool {
        if level == 0 && n > 1 {
            return true;
        }
        if self.centered && child.is_identity() {
            return true;
        }
        estimate >= self.threshold
    }

    fn estimate(&self, child: &PauliString, hist_h: &[u64], hist_g: &[u64], pow: &[f64], m: usize) -> f64 {
        let mut sum = weighted_sum(hist_h, pow);
        if self.centered && !child.is_identity() {
            sum -= weighted_sum(hist_g, pow);
        }
        sum / m as f64
    }

    fn check_capacity(&self, level: usize, size: usize) -> Result<()> {
        if size > self.capacity {
            Err(Error::CapacityExceeded {
                round: level + 1,
                size,
                capacity: self.capacity,
            })
        } else {
            Ok(())
        }
    }
}

fn finish(n: usize, mut survivors: Vec<usize>, entries: Vec<(PauliString, f64)>) -> EngineOutput {
    survivors.resize(n, 0);
    EngineOutput { entries, survivors }
}

pub(crate) fn run_naive(batch: &ProbeBatch, cfg: &EngineConfig) -> Result<EngineOutput> {
    let n = batch.num_qubits();
    let m = batch.len();
    let pow = powers(cfg.factor, n);
    let mut omega = vec![(PauliString::identity(0), 0.0)];
    let mut survivors = Vec::with_capacity(n);
    for level in 0..n {
        let len = level + 1;
        let mut hist_h = vec![0u64; len + 1];
        let mut hist_g = vec![0u64; len + 1];
        let mut next = Vec::new();
        for (parent, _) in &omega {
            for b in 0..4 {
                let child = parent.extended(b);
                let centered = cfg.centered && !child.is_identity();
                hist_h.fill(0);
                hist_g.fill(0);
                for v in batch.views() {
                    hist_h[y_weight(v, child.words(), len)] += 1;
                    if centered {
                        hist_g[star_weight(v, child.words(), len)] += 1;
                    }
                }
                let est = cfg.estimate(&child, &hist_h, &hist_g, &pow, m);
                if cfg.keeps(level, n, &child, est) {
                    next.push((child, est));
                }
            }
        }
        cfg.check_capacity(level, next.len())?;
        survivors.push(next.len());
        omega = next;
        if omega.is_empty() {
            break;
        }
    }
    Ok(finish(n, survivors, omega))
}

struct Node {
    prefix: PauliString,
    estimate: f64,
    h: Vec<u16>,
    g: Vec<u16>,
}

/// Per record, for coordinate `j`: low nibble bit `b` is `(A_j ⋆ b) +₂ R_j`,
/// high nibble bit `b` is `A_j ⋆ b`; both zero when the coordinate failed.
fn load_column(batch: &ProbeBatch, j: usize, col: &mut [u8]) {
    let (probes, readouts, failed) = batch.raw();
    let stride = batch.stride();
    let w = j / SYMBOLS_PER_WORD;
    let shift = 2 * (j % SYMBOLS_PER_WORD);
    for (t, out) in col.iter_mut().enumerate() {
        let i = t * stride + w;
        let a = ((probes[i] >> shift) & 3) as usize;
        let r = ((readouts[i] >> shift) & 1) as u8;
        let ok = ((failed[i] >> shift) & 1) as u8 ^ 1;
        let star = STAR_NIBBLE[a];
        let y = star ^ (r * 0xF);
        *out = (y | (star << 4)) * ok;
    }
}

/// Counts `(weight, nibble)` pairs and splits them into the four child histograms.
fn child_histograms(
    weights: &[u16],
    col: &[u8],
    high: bool,
    len: usize,
    joint: &mut Vec<u64>,
    out: &mut [Vec<u64>; 4],
) {
    joint.clear();
    joint.resize(len * 16, 0);
    if high {
        for (&h, &c) in weights.iter().zip(col) {
            joint[h as usize * 16 + (c >> 4) as usize] += 1;
        }
    } else {
        for (&h, &c) in weights.iter().zip(col) {
            joint[h as usize * 16 + (c & 15) as usize] += 1;
        }
    }
    for hist in out.iter_mut() {
        hist.clear();
        hist.resize(len + 1, 0);
    }
    for k in 0..len {
        for nib in 0..16 {
            let c = joint[k * 16 + nib];
            if c == 0 {
                continue;
            }
            for (b, hist) in out.iter_mut().enumerate() {
                hist[k + ((nib >> b) & 1)] += c;
            }
        }
    }
}

pub(crate) fn run_fast(batch: &ProbeBatch, cfg: &EngineConfig) -> Result<EngineOutput> {
    let n = batch.num_qubits();
    let m = batch.len();
    if n > u16::MAX as usize {
        return Err(Error::InvalidParameter(format!(
            "{n} qubits exceeds the weight-vector width"
        )));
    }
    let pow = powers(cfg.factor, n);
    let mut omega = vec![Node {
        prefix: PauliString::identity(0),
        estimate: 0.0,
        h: vec![0; m],
        g: if cfg.centered { vec![0; m] } else { Vec::new() },
    }];
    let mut survivors = Vec::with_capacity(n);
    let mut col = vec![0u8; m];
    let mut joint = Vec::new();
    let mut hist_h: [Vec<u64>; 4] = Default::default();
    let mut hist_g: [Vec<u64>; 4] = Default::default();
    for level in 0..n {
        let len = level + 1;
        load_column(batch, level, &mut col);
        let mut kept: Vec<(usize, u8, PauliString, f64)> = Vec::new();
        for (pi, parent) in omega.iter().enumerate() {
            child_histograms(&parent.h, &col, false, len, &mut joint, &mut hist_h);
            if cfg.centered {
                child_histograms(&parent.g, &col, true, len, &mut joint, &mut hist_g);
            }
            for b in 0..4u8 {
                let child = parent.prefix.extended(b);
                let est = cfg.estimate(&child, &hist_h[b as usize], &hist_g[b as usize], &pow, m);
                if cfg.keeps(level, n, &child, est) {
                    kept.push((pi, b, child, est));
                }
            }
        }
        cfg.check_capacity(level, kept.len())?;
        survivors.push(kept.len());
        let last = len == n;
        omega = kept
            .into_iter()
            .map(|(pi, b, prefix, estimate)| {
                let parent = &omega[pi];
                let (h, g) = if last {
                    (Vec::new(), Vec::new())
                } else {
                    let h = extend_weights(&parent.h, &col, b);
                    let g = if cfg.centered {
                        extend_weights(&parent.g, &col, b + 4)
                    } else {
                        Vec::new()
                    };
                    (h, g)
                };
                Node {
                    prefix,
                    estimate,
                    h,
                    g,
                }
            })
            .collect();
        if omega.is_empty() {
            break;
        }
    }
    let entries = omega
        .into_iter()
        .map(|node| (node.prefix, node.estimate))
        .collect();
    Ok(finish(n, survivors, entries))
}

/// `h^(βb)_t = h^(β)_t + bit`, the bit taken from the column nibble.
fn extend_weights(parent: &[u16], col: &[u8], bit: u8) -> Vec<u16> {
    parent
        .iter()
        .zip(col)
        .map(|(&h, &c)| h + ((c >> bit) & 1) as u16)
        .collect()
}
