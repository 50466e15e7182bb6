//! Chi-square tests used to compare sampled readout laws.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Cells whose expected count falls below this are pooled together.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn finish(statistic: f64, dof: usize) -> Result<ChiSquare> {
    if dof == 0 {
        return Ok(ChiSquare {
            statistic,
            dof,
            p_value: if statistic > 0.0 { 0.0 } else { 1.0 },
        });
    }
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

/// Merges the cells (by index order) whose expected count is small into one.
fn pool(cells: Vec<(f64, Vec<f64>)>) -> Vec<(f64, Vec<f64>)> {
    let mut out = Vec::new();
    let mut rest: Option<(f64, Vec<f64>)> = None;
    for (expected, observed) in cells {
        if expected >= MIN_EXPECTED {
            out.push((expected, observed));
        } else {
            match &mut rest {
                Some((e, o)) => {
                    *e += expected;
                    for (x, y) in o.iter_mut().zip(&observed) {
                        *x += y;
                    }
                }
                None => rest = Some((expected, observed)),
            }
        }
    }
    if let Some((e, o)) = rest {
        if e >= MIN_EXPECTED || out.is_empty() {
            out.push((e, o));
        } else {
            let last = out.last_mut().expect("nonempty");
            last.0 += e;
            for (x, y) in last.1.iter_mut().zip(&o) {
                *x += y;
            }
        }
    }
    out
}

/// Goodness of fit of `observed` counts to the probabilities `expected`.
/// A count in a cell of zero probability yields p-value 0.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquare> {
    if observed.len() != expected.len() {
        return Err(Error::LengthMismatch {
            left: observed.len(),
            right: expected.len(),
        });
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::EmptyBatch);
    }
    let mass: f64 = expected.iter().sum();
    let mut cells = Vec::new();
    for (&o, &p) in observed.iter().zip(expected) {
        if p <= 0.0 {
            if o > 0 {
                return Ok(ChiSquare {
                    statistic: f64::INFINITY,
                    dof: 0,
                    p_value: 0.0,
                });
            }
            continue;
        }
        cells.push((p / mass * total as f64, vec![o as f64]));
    }
    let cells = pool(cells);
    let statistic = cells.iter().map(|(e, o)| (o[0] - e) * (o[0] - e) / e).sum();
    finish(statistic, cells.len().saturating_sub(1))
}

/// Independence test on an `r × c` contingency table (rows of equal length).
pub fn chi_square_independence(table: &[Vec<u64>]) -> Result<ChiSquare> {
    let rows = table.len();
    let cols = table.first().map(Vec::len).unwrap_or(0);
    if rows < 2 || cols < 2 || table.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidParameter(
            "contingency table must be at least 2x2 and rectangular".into(),
        ));
    }
    let total: f64 = table.iter().flatten().map(|&x| x as f64).sum();
    if total == 0.0 {
        return Err(Error::EmptyBatch);
    }
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().map(|&x| x as f64).sum()).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j] as f64).sum())
        .collect();
    let live_rows = row_sums.iter().filter(|&&s| s > 0.0).count();
    let live_cols = col_sums.iter().filter(|&&s| s > 0.0).count();
    let mut statistic = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = row_sums[i] * col_sums[j] / total;
            if e > 0.0 {
                statistic += (o as f64 - e) * (o as f64 - e) / e;
            }
        }
    }
    finish(
        statistic,
        (live_rows.saturating_sub(1)) * (live_cols.saturating_sub(1)),
    )
}

/// Two-sample homogeneity test: were `a` and `b` drawn from the same
/// categorical law? Sparse categories are pooled by combined count.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let na: f64 = a.iter().map(|&x| x as f64).sum();
    let nb: f64 = b.iter().map(|&x| x as f64).sum();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::EmptyBatch);
    }
    let share = na.min(nb) / (na + nb);
    let cells: Vec<(f64, Vec<f64>)> = a
        .iter()
        .zip(b)
        .filter(|(&x, &y)| x + y > 0)
        .map(|(&x, &y)| ((x + y) as f64 * share, vec![x as f64, y as f64]))
        .collect();
    let cells = pool(cells);
    let table: Vec<Vec<u64>> = vec![
        cells.iter().map(|(_, o)| o[0] as u64).collect(),
        cells.iter().map(|(_, o)| o[1] as u64).collect(),
    ];
    if cells.len() < 2 {
        return finish(0.0, 0);
    }
    chi_square_independence(&table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gof_reference_value() {
        // 3 cells, statistic (10²/100 + 10²/100 + 0) = 2, dof 2 → p = e^{-1}.
        let r = chi_square_gof(&[110, 90, 100], &[1.0, 1.0, 1.0]).unwrap();
        assert!((r.statistic - 2.0).abs() < 1e-12);
        assert_eq!(r.dof, 2);
        assert!((r.p_value - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn gof_impossible_cell() {
        let r = chi_square_gof(&[5, 1], &[1.0, 0.0]).unwrap();
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn independence_reference_value() {
        // Textbook 2x2: [[10, 20], [30, 40]] has statistic 0.7937.
        let r = chi_square_independence(&[vec![10, 20], vec![30, 40]]).unwrap();
        assert!((r.statistic - 0.793_650_793_650_793_6).abs() < 1e-9);
        assert_eq!(r.dof, 1);
    }

    #[test]
    fn two_sample_identical_counts() {
        let r = chi_square_two_sample(&[50, 30, 20, 1], &[50, 30, 20, 1]).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }
}
