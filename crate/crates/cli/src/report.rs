//! Report assembly. Everything is rendered in memory and written only after
//! the run finished, so a failed run leaves no partial output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use pauli_est::{ChannelSpec, Hypothesis};
use serde::Serialize;
use serde_json::Value;

use crate::config::{ExperimentConfig, Mode, Source};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    CapacityExceeded,
    BelowFloor,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::CapacityExceeded => "capacity_exceeded",
            Status::BelowFloor => "below_floor",
        }
    }
}

/// Exit status of a whole run: an abort in any trial wins over a
/// below-floor verdict.
pub fn exit_code(statuses: impl IntoIterator<Item = Status>) -> i32 {
    let mut code = 0;
    for s in statuses {
        match s {
            Status::CapacityExceeded => return 2,
            Status::BelowFloor => code = 3,
            Status::Ok => {}
        }
    }
    code
}

#[derive(Debug, Serialize)]
pub struct Parameters {
    pub mode: Mode,
    pub channel: String,
    pub channel_kind: &'static str,
    pub num_qubits: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub nu: f64,
    pub r: f64,
    pub eta0: f64,
    pub seed: u64,
    pub trials: usize,
    pub sample_count_override: Option<usize>,
}

impl Parameters {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Parameters {
            mode: cfg.mode,
            channel: cfg.source.name().to_string(),
            channel_kind: match cfg.source {
                Source::Spec { .. } => "pauli-spec",
                Source::Kraus { .. } => "kraus",
            },
            num_qubits: cfg.source.num_qubits(),
            epsilon: cfg.params.epsilon,
            delta: cfg.params.delta,
            nu: cfg.noise.nu(),
            r: cfg.params.r,
            eta0: cfg.eta0,
            seed: cfg.seed,
            trials: cfg.trials,
            sample_count_override: cfg.params.sample_count_override,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct AtomError {
    pub string: String,
    pub estimate: f64,
    pub truth: f64,
    pub error: f64,
}

#[derive(Debug, Serialize)]
pub struct Accuracy {
    pub max_error: f64,
    pub atoms: Vec<AtomError>,
}

pub fn accuracy(h: &Hypothesis, truth: &ChannelSpec) -> Accuracy {
    let atoms: Vec<AtomError> = h
        .errors(truth)
        .into_iter()
        .map(|(c, estimate, truth)| AtomError {
            string: c.to_string(),
            estimate,
            truth,
            error: (estimate - truth).abs(),
        })
        .collect();
    Accuracy {
        max_error: h.max_error(truth),
        atoms,
    }
}

pub fn entries(h: &Hypothesis) -> Vec<(String, f64)> {
    h.entries().iter().map(|(c, v)| (c.to_string(), *v)).collect()
}

/// The deterministic report plus the volatile timings and any extra files.
pub struct Output {
    pub report: Value,
    pub timings: Value,
    pub files: Vec<(&'static str, String)>,
}

impl Output {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut all = vec![
            ("report.json", pretty(&self.report)?),
            ("timings.json", pretty(&self.timings)?),
        ];
        all.extend(self.files.iter().cloned());
        for (name, body) in all {
            let path = dir.join(name);
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

fn pretty(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Rows `trial,status,samples,hypothesis_size,max_error`.
pub fn trials_csv(rows: &[(Status, usize, usize, Option<f64>)]) -> String {
    let mut out = String::from("trial,status,samples,hypothesis_size,max_error\n");
    for (t, (status, samples, size, err)) in rows.iter().enumerate() {
        let err = err.map(|e| e.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{t},{},{samples},{size},{err}", status.name());
    }
    out
}
