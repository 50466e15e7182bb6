use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::pauli::PauliString;

use super::engine::EngineOutput;

/// Estimated rates for a short list of strings; every other string is
/// implicitly estimated as 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    entries: Vec<(PauliString, f64)>,
    epsilon: f64,
}

impl Hypothesis {
    /// Sorts by estimate descending, then lexicographically.
    pub fn new(mut entries: Vec<(PauliString, f64)>, epsilon: f64) -> Result<Self> {
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let distinct: BTreeSet<&PauliString> = entries.iter().map(|(c, _)| c).collect();
        if distinct.len() != entries.len() {
            return Err(Error::InvalidParameter("hypothesis lists a string twice".into()));
        }
        Ok(Hypothesis { entries, epsilon })
    }

    pub fn entries(&self) -> &[(PauliString, f64)] {
        &self.entries
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The estimate for `c`, 0 when unlisted.
    pub fn get(&self, c: &PauliString) -> f64 {
        self.entries
            .iter()
            .find(|(s, _)| s == c)
            .map(|(_, p)| *p)
            .unwrap_or(0.0)
    }

    pub fn contains(&self, c: &PauliString) -> bool {
        self.entries.iter().any(|(s, _)| s == c)
    }

    /// `‖p̂ − p‖_∞` over all strings.
    pub fn max_error(&self, truth: &ChannelSpec) -> f64 {
        let listed = self.entries.iter().map(|(c, p)| (p - truth.probability(c)).abs());
        let missed = truth
            .atoms()
            .iter()
            .filter(|(c, _)| !self.contains(c))
            .map(|(_, p)| *p);
        listed.chain(missed).fold(0.0, f64::max)
    }

    /// `|p̂(C) − p(C)|` for every string that is listed or carries mass.
    pub fn errors(&self, truth: &ChannelSpec) -> Vec<(PauliString, f64, f64)> {
        let strings: BTreeSet<&PauliString> = self
            .entries
            .iter()
            .map(|(c, _)| c)
            .chain(truth.atoms().iter().map(|(c, _)| c))
            .collect();
        strings
            .into_iter()
            .map(|c| (c.clone(), self.get(c), truth.probability(c)))
            .collect()
    }

    /// One `<string> <estimate>` line per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, p) in &self.entries {
            let _ = writeln!(out, "{c} {p}");
        }
        out
    }
}

/// Output of a branch-and-prune run.
#[derive(Clone, Debug, PartialEq)]
pub struct Recovery {
    pub hypothesis: Hypothesis,
    /// `|Ω_j|` for `j = 1..=n`.
    pub survivors: Vec<usize>,
    /// Records consumed.
    pub samples: usize,
}

impl Recovery {
    pub(crate) fn new(out: EngineOutput, epsilon: f64, samples: usize) -> Self {
        Recovery {
            hypothesis: Hypothesis::new(out.entries, epsilon).expect("survivors are distinct"),
            survivors: out.survivors,
            samples,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn ordering_and_errors() {
        let h = Hypothesis::new(vec![(p("01"), 0.2), (p("30"), 0.5), (p("00"), 0.2)], 0.1).unwrap();
        let order: Vec<String> = h.entries().iter().map(|(c, _)| c.to_string()).collect();
        assert_eq!(order, ["30", "00", "01"]);
        let truth = ChannelSpec::new(2, vec![(p("30"), 0.45), (p("01"), 0.25), (p("22"), 0.3)]).unwrap();
        assert!((h.max_error(&truth) - 0.3).abs() < 1e-15);
        assert_eq!(h.get(&p("22")), 0.0);
        assert_eq!(h.errors(&truth).len(), 4);
        assert!(Hypothesis::new(vec![(p("01"), 0.2), (p("01"), 0.3)], 0.1).is_err());
        assert_eq!(h.to_text().lines().next(), Some("30 0.5"));
    }
}
