//! Timing grid for probe generation and the two recovery paths.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use anyhow::Result;
use pauli_est::learner::{population_recover, population_recover_fast};
use pauli_est::rng::substream;
use pauli_est::{probe_batch, ChannelSpec, PauliString};
use rand::Rng;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::report::{Output, Parameters};

pub const DEFAULT_SAMPLES: usize = 100_000;

/// Five distinct random strings, each with rate at least 0.1.
fn bench_spec<R: Rng>(n: usize, rng: &mut R) -> Result<ChannelSpec> {
    let k = if n < 2 { 4 } else { 5 };
    let mut strings = BTreeSet::new();
    while strings.len() < k {
        strings.insert(PauliString::random(n, rng));
    }
    let u: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = u.iter().sum();
    let floor = 0.1;
    let atoms = strings
        .into_iter()
        .zip(&u)
        .map(|(c, &x)| (c, floor + (1.0 - k as f64 * floor) * x / total))
        .collect();
    Ok(ChannelSpec::normalized(n, atoms)?)
}

pub fn bench(cfg: &ExperimentConfig) -> Result<(Output, i32)> {
    let start = Instant::now();
    let m = cfg.params.sample_count_override.unwrap_or(DEFAULT_SAMPLES);
    let params = cfg.params.with_sample_count(m);
    let mut csv = String::from("n,m,epsilon,path,seconds\n");
    let mut points = Vec::new();
    let mut timing_rows = Vec::new();
    let mut fast_times = Vec::new();
    for &n in &cfg.grid {
        let mut rng = substream(cfg.seed, n as u64);
        let spec = bench_spec(n, &mut rng)?;
        let t = Instant::now();
        let batch = probe_batch(&spec, m, cfg.noise, &mut rng)?;
        let gen = t.elapsed().as_secs_f64();
        let mut fast_best = f64::INFINITY;
        let mut fast_out = None;
        for _ in 0..cfg.reps {
            let t = Instant::now();
            let out = population_recover_fast(&batch, &params);
            fast_best = fast_best.min(t.elapsed().as_secs_f64());
            fast_out = Some(out);
        }
        let fast_out = fast_out.expect("reps >= 1");
        let naive = if cfg.naive {
            let t = Instant::now();
            let out = population_recover(&batch, &params);
            Some((t.elapsed().as_secs_f64(), out))
        } else {
            None
        };
        let _ = writeln!(csv, "{n},{m},{},generate,{gen}", params.epsilon);
        let _ = writeln!(csv, "{n},{m},{},fast,{fast_best}", params.epsilon);
        if let Some((secs, _)) = &naive {
            let _ = writeln!(csv, "{n},{m},{},naive,{secs}", params.epsilon);
        }
        let identical = naive
            .as_ref()
            .map(|(_, out)| format!("{out:?}") == format!("{fast_out:?}"));
        let (size, max_error, aborted) = match &fast_out {
            Ok(rec) => (rec.hypothesis.len(), Some(rec.hypothesis.max_error(&spec)), false),
            Err(_) => (0, None, true),
        };
        points.push(json!({
            "n": n,
            "m": m,
            "epsilon": params.epsilon,
            "aborted": aborted,
            "hypothesis_size": size,
            "max_error": max_error,
            "naive_identical": identical,
        }));
        timing_rows.push(json!({
            "n": n,
            "generate_seconds": gen,
            "records_per_second": m as f64 / gen,
            "fast_seconds": fast_best,
            "naive_seconds": naive.as_ref().map(|(s, _)| *s),
            "naive_over_fast": naive.as_ref().map(|(s, _)| s / fast_best),
        }));
        fast_times.push(fast_best);
    }
    let ratios: Vec<f64> = fast_times.windows(2).map(|w| w[1] / w[0]).collect();
    let report = json!({
        "parameters": Parameters::new(cfg),
        "sample_sizes": {"m": m, "reps": cfg.reps},
        "summary": {"exit_code": 0, "grid_points": cfg.grid.len()},
        "grid": points,
    });
    let timings = json!({
        "total_seconds": start.elapsed().as_secs_f64(),
        "points": timing_rows,
        "fast_ratio_between_grid_points": ratios,
    });
    Ok((
        Output {
            report,
            timings,
            files: vec![("bench.csv", csv)],
        },
        0,
    ))
}
