//! The learning modes: additive, multiplicative, Fourier and the dense
//! oracle cross-check.

use std::collections::BTreeSet;
use std::thread;
use std::time::Instant;

use anyhow::{bail, Result};
use pauli_est::channel::{collect_batch, probe_batch, PauliChannel, ProbeFamily};
use pauli_est::dense::{pauli_error_rates, KrausChannel, TwirledChannel};
use pauli_est::fourier::{
    eigenvalue_samples, eigenvalue_table_text, estimate_eigenvalue_with, exact_eigenvalue, gl_recover,
};
use pauli_est::learner::{population_recover_fast, required_samples, LearnerParams};
use pauli_est::mult::{mult_population_recover, rough_eta_flip_cap, rough_eta_probe_cap, rough_eta_trials};
use pauli_est::rng::substream;
use pauli_est::stats::chi_square_two_sample;
use pauli_est::{ChannelSpec, Error, NoiseConfig, PauliString, ProbeBatch, ProbeChannel, ProbeRecord};
use rand::Rng;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Source};
use crate::report::{accuracy, entries, exit_code, trials_csv, Output, Parameters, Status};

/// A probe channel with independent per-coordinate measurement failures
/// layered on top; failed coordinates read 0.
pub struct WithFailures<C> {
    pub inner: C,
    pub noise: NoiseConfig,
}

impl<C: ProbeChannel> ProbeChannel for WithFailures<C> {
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    fn measure_into<R: Rng + ?Sized>(
        &self,
        probe: &PauliString,
        rng: &mut R,
        readout: &mut [u64],
        failed: &mut [u64],
    ) -> pauli_est::Result<()> {
        self.inner.measure_into(probe, rng, readout, failed)?;
        self.noise.sample_failures(self.num_qubits(), rng, failed);
        for (r, f) in readout.iter_mut().zip(failed.iter()) {
            *r &= !f;
        }
        Ok(())
    }
}

/// Runs `f(0..trials)` on worker threads; results come back in trial order.
pub fn run_trials<T: Send>(trials: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(trials)
        .max(1);
    if workers == 1 {
        return (0..trials).map(&f).collect();
    }
    let f = &f;
    let mut slots: Vec<Option<T>> = (0..trials).map(|_| None).collect();
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    (w..trials)
                        .step_by(workers)
                        .map(|t| (t, f(t)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (t, v) in h.join().expect("trial thread panicked") {
                slots[t] = Some(v);
            }
        }
    });
    slots.into_iter().map(|v| v.expect("every trial ran")).collect()
}

fn truth(cfg: &ExperimentConfig) -> Result<ChannelSpec> {
    Ok(match &cfg.source {
        Source::Spec { spec, .. } => spec.clone(),
        Source::Kraus { kraus, .. } => pauli_error_rates(kraus)?,
    })
}

/// Calls `spec_fn` or `kraus_fn` with the configured channel; the two
/// closures are usually identical bodies instantiated at different types.
fn with_channel<T, R>(
    cfg: &ExperimentConfig,
    rng: &mut R,
    spec_fn: impl FnOnce(&PauliChannel, &mut R) -> Result<T>,
    kraus_fn: impl FnOnce(&WithFailures<TwirledChannel>, &mut R) -> Result<T>,
) -> Result<T> {
    match &cfg.source {
        Source::Spec { spec, .. } => spec_fn(&PauliChannel::new(spec.clone(), cfg.noise), rng),
        Source::Kraus { kraus, .. } => kraus_fn(
            &WithFailures {
                inner: TwirledChannel::new(kraus.clone()),
                noise: cfg.noise,
            },
            rng,
        ),
    }
}

fn additive_sizes(params: &LearnerParams, n: usize) -> Result<Value> {
    Ok(json!({
        "formula": "m = ceil((2 / eps0^2) * ln(2 / delta0)), eps0 = eps/4, delta0 = 4*eps*delta/(9n)",
        "epsilon0": params.epsilon0(),
        "delta0": params.delta0(n),
        "formula_m": required_samples(params.epsilon0(), params.delta0(n))?,
        "m": params.sample_count(n)?,
        "threshold": params.threshold(),
        "capacity": params.capacity(),
        "factor": params.factor(),
    }))
}

struct Trial {
    status: Status,
    samples: usize,
    size: usize,
    max_error: Option<f64>,
    report: Value,
    hypothesis_text: String,
    batch: Option<ProbeBatch>,
    seconds: f64,
}

fn finish(
    cfg: &ExperimentConfig,
    sizes: Value,
    trials: Vec<Trial>,
    extra: Value,
    mut files: Vec<(&'static str, String)>,
    start: Instant,
) -> Result<(Output, i32)> {
    let code = exit_code(trials.iter().map(|t| t.status));
    let failures = trials
        .iter()
        .filter(|t| {
            t.status == Status::CapacityExceeded || t.max_error.is_some_and(|e| e > cfg.params.epsilon)
        })
        .count();
    let worst = trials
        .iter()
        .filter_map(|t| t.max_error)
        .fold(None, |a: Option<f64>, e| Some(a.map_or(e, |a| a.max(e))));
    let rows: Vec<_> = trials
        .iter()
        .map(|t| (t.status, t.samples, t.size, t.max_error))
        .collect();
    files.push(("trials.csv", trials_csv(&rows)));
    files.push(("hypothesis.txt", trials[0].hypothesis_text.clone()));
    if let Some(b) = &trials[0].batch {
        files.push(("batch.dump", b.to_dump()));
    }
    let report = json!({
        "parameters": Parameters::new(cfg),
        "sample_sizes": sizes,
        "summary": {
            "exit_code": code,
            "aborted_trials": trials.iter().filter(|t| t.status == Status::CapacityExceeded).count(),
            "below_floor_trials": trials.iter().filter(|t| t.status == Status::BelowFloor).count(),
            "failures_above_epsilon_or_aborted": failures,
            "worst_max_error": worst,
        },
        "details": extra,
        "trials": trials.iter().map(|t| t.report.clone()).collect::<Vec<_>>(),
    });
    let timings = json!({
        "total_seconds": start.elapsed().as_secs_f64(),
        "trial_seconds": trials.iter().map(|t| t.seconds).collect::<Vec<_>>(),
    });
    Ok((
        Output {
            report,
            timings,
            files,
        },
        code,
    ))
}

pub fn additive(cfg: &ExperimentConfig) -> Result<(Output, i32)> {
    let start = Instant::now();
    let n = cfg.source.num_qubits();
    let truth = truth(cfg)?;
    let sizes = additive_sizes(&cfg.params, n)?;
    let trial = |t: usize| -> Result<Trial> {
        let clock = Instant::now();
        let batch = match &cfg.batch {
            Some(b) => b.clone(),
            None => {
                let m = cfg.params.sample_count(n)?;
                let mut rng = substream(cfg.seed, t as u64);
                with_channel(
                    cfg,
                    &mut rng,
                    |c, rng| Ok(collect_batch(c, m, ProbeFamily::Nontrivial, rng)?),
                    |c, rng| Ok(collect_batch(c, m, ProbeFamily::Nontrivial, rng)?),
                )?
            }
        };
        let keep = (cfg.dump_batch && t == 0).then(|| batch.clone());
        let samples = batch.len();
        Ok(match population_recover_fast(&batch, &cfg.params) {
            Ok(rec) => {
                let acc = accuracy(&rec.hypothesis, &truth);
                Trial {
                    status: Status::Ok,
                    samples,
                    size: rec.hypothesis.len(),
                    max_error: Some(acc.max_error),
                    report: json!({
                        "trial": t,
                        "status": Status::Ok,
                        "samples": samples,
                        "survivors": rec.survivors,
                        "hypothesis": entries(&rec.hypothesis),
                        "accuracy": acc,
                    }),
                    hypothesis_text: rec.hypothesis.to_text(),
                    batch: keep,
                    seconds: clock.elapsed().as_secs_f64(),
                }
            }
            Err(Error::CapacityExceeded {
                round,
                size,
                capacity,
            }) => Trial {
                status: Status::CapacityExceeded,
                samples,
                size: 0,
                max_error: None,
                report: json!({
                    "trial": t,
                    "status": Status::CapacityExceeded,
                    "samples": samples,
                    "abort": {"round": round, "size": size, "capacity": capacity},
                }),
                hypothesis_text: String::new(),
                batch: keep,
                seconds: clock.elapsed().as_secs_f64(),
            },
            Err(e) => return Err(e.into()),
        })
    };
    let trials = run_trials(cfg.trials, trial)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    finish(
        cfg,
        sizes,
        trials,
        json!({"ground_truth_atoms": truth.atoms().len()}),
        Vec::new(),
        start,
    )
}

pub fn multiplicative(cfg: &ExperimentConfig) -> Result<(Output, i32)> {
    let start = Instant::now();
    let n = cfg.source.num_qubits();
    let truth = truth(cfg)?;
    let stage1_delta = cfg.params.delta / 2.0;
    let sizes = json!({
        "stage1": {
            "rule": "K = ceil(48 * ln(1/delta1)) geometric trials, each capped at T = ceil(8/eta0) probes",
            "delta1": stage1_delta,
            "trials_k": rough_eta_trials(stage1_delta),
            "flip_cap_t": rough_eta_flip_cap(cfg.eta0),
            "probe_cap": rough_eta_probe_cap(cfg.eta0, stage1_delta),
        },
        "stage2": {
            "formula": "m = ceil(((4s + 2g/3) / g^2) * ln(2/delta0)), s = 5*eta_est, g = eps0*s",
            "epsilon0": cfg.params.epsilon0(),
            "delta0": cfg.params.delta0(n),
            "capacity": cfg.params.capacity() + 1,
        },
    });
    let eta = truth.eta();
    let trial = |t: usize| -> Result<Trial> {
        let clock = Instant::now();
        let mut rng = substream(cfg.seed, t as u64);
        let run = with_channel(
            cfg,
            &mut rng,
            |c, rng| Ok(mult_population_recover(c, cfg.eta0, &cfg.params, rng)),
            |c, rng| Ok(mult_population_recover(c, cfg.eta0, &cfg.params, rng)),
        )?;
        let seconds = clock.elapsed().as_secs_f64();
        let run = match run {
            Ok(run) => run,
            Err(Error::CapacityExceeded {
                round,
                size,
                capacity,
            }) => {
                return Ok(Trial {
                    status: Status::CapacityExceeded,
                    samples: 0,
                    size: 0,
                    max_error: None,
                    report: json!({
                        "trial": t,
                        "status": Status::CapacityExceeded,
                        "abort": {"round": round, "size": size, "capacity": capacity},
                    }),
                    hypothesis_text: String::new(),
                    batch: None,
                    seconds,
                })
            }
            Err(e) => return Err(e.into()),
        };
        let stage1 = json!({
            "kind": run.eta.kind,
            "eta_est": run.eta.value,
            "probes_used": run.eta.probes_used,
        });
        Ok(match run.stage2 {
            None => Trial {
                status: Status::BelowFloor,
                samples: run.eta.probes_used as usize,
                size: 0,
                max_error: None,
                report: json!({"trial": t, "status": Status::BelowFloor, "stage1": stage1}),
                hypothesis_text: String::new(),
                batch: None,
                seconds,
            },
            Some(s2) => {
                let acc = accuracy(&s2.recovery.hypothesis, &truth);
                let relative = if eta > 0.0 {
                    Some(acc.max_error / eta)
                } else {
                    None
                };
                Trial {
                    status: Status::Ok,
                    samples: s2.samples,
                    size: s2.recovery.hypothesis.len(),
                    max_error: Some(acc.max_error),
                    report: json!({
                        "trial": t,
                        "status": Status::Ok,
                        "stage1": stage1,
                        "stage2": {
                            "eta_scale": s2.eta_scale,
                            "eta_hat": s2.eta_hat,
                            "samples": s2.samples,
                            "threshold": s2.threshold,
                            "capacity": s2.capacity,
                            "survivors": s2.recovery.survivors,
                            "hypothesis": entries(&s2.recovery.hypothesis),
                        },
                        "accuracy": acc,
                        "error_over_eta": relative,
                    }),
                    hypothesis_text: s2.recovery.hypothesis.to_text(),
                    batch: None,
                    seconds,
                }
            }
        })
    };
    let trials = run_trials(cfg.trials, trial)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    // Multiplicative success means error at most eps * eta.
    let within = trials
        .iter()
        .filter(|t| t.max_error.is_some_and(|e| e <= cfg.params.epsilon * eta))
        .count();
    let extra =
        json!({"true_eta": eta, "target_error": cfg.params.epsilon * eta, "trials_within_target": within});
    finish(cfg, sizes, trials, extra, Vec::new(), start)
}

pub fn fourier(cfg: &ExperimentConfig) -> Result<(Output, i32)> {
    let start = Instant::now();
    let Source::Spec { spec, .. } = &cfg.source else {
        bail!("fourier mode needs a Pauli channel spec");
    };
    let n = spec.num_qubits();
    let channel = PauliChannel::noiseless(spec.clone());
    let mut sizes = additive_sizes(&cfg.params, n)?;
    let eig_m = eigenvalue_samples(cfg.params.epsilon0(), cfg.params.delta)?;
    sizes["eigenvalue_m"] = json!(eig_m);
    let trial = |t: usize| -> Result<Trial> {
        let clock = Instant::now();
        let mut rng = substream(cfg.seed, t as u64);
        let gl = gl_recover(&channel, &cfg.params, &mut rng);
        let m = cfg.params.sample_count(n)?;
        let add = population_recover_fast(
            &probe_batch(spec, m, NoiseConfig::noiseless(), &mut rng)?,
            &cfg.params,
        );
        let seconds = clock.elapsed().as_secs_f64();
        let (gl, add) = match (gl, add) {
            (Ok(g), Ok(a)) => (g, a),
            (
                Err(Error::CapacityExceeded {
                    round,
                    size,
                    capacity,
                }),
                _,
            )
            | (
                _,
                Err(Error::CapacityExceeded {
                    round,
                    size,
                    capacity,
                }),
            ) => {
                return Ok(Trial {
                    status: Status::CapacityExceeded,
                    samples: m,
                    size: 0,
                    max_error: None,
                    report: json!({
                        "trial": t,
                        "status": Status::CapacityExceeded,
                        "abort": {"round": round, "size": size, "capacity": capacity},
                    }),
                    hypothesis_text: String::new(),
                    batch: None,
                    seconds,
                });
            }
            (Err(e), _) | (_, Err(e)) => return Err(e.into()),
        };
        let gl_set: BTreeSet<String> = gl
            .hypothesis
            .entries()
            .iter()
            .map(|(c, _)| c.to_string())
            .collect();
        let add_set: BTreeSet<String> = add
            .hypothesis
            .entries()
            .iter()
            .map(|(c, _)| c.to_string())
            .collect();
        let shared_diff = gl
            .hypothesis
            .entries()
            .iter()
            .filter(|(c, _)| add.hypothesis.contains(c))
            .map(|(c, v)| (v - add.hypothesis.get(c)).abs())
            .fold(0.0, f64::max);
        let acc = accuracy(&gl.hypothesis, spec);
        Ok(Trial {
            status: Status::Ok,
            samples: m,
            size: gl.hypothesis.len(),
            max_error: Some(acc.max_error),
            report: json!({
                "trial": t,
                "status": Status::Ok,
                "samples": m,
                "fourier": {"survivors": gl.survivors, "hypothesis": entries(&gl.hypothesis)},
                "additive": {"survivors": add.survivors, "hypothesis": entries(&add.hypothesis)},
                "cross_check": {
                    "only_fourier": gl_set.difference(&add_set).collect::<Vec<_>>(),
                    "only_additive": add_set.difference(&gl_set).collect::<Vec<_>>(),
                    "max_shared_difference": shared_diff,
                },
                "accuracy": acc,
                "additive_max_error": add.hypothesis.max_error(spec),
            }),
            hypothesis_text: gl.hypothesis.to_text(),
            batch: None,
            seconds,
        })
    };
    let trials = run_trials(cfg.trials, trial)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    // Eigenvalues at the bars of the recovered strings plus the identity.
    let mut rng = substream(cfg.seed, u64::MAX);
    let mut indices = vec![PauliString::identity(n)];
    if let Some(h) = trials[0].report["fourier"]["hypothesis"].as_array() {
        for e in h {
            let c: PauliString = e[0].as_str().unwrap_or_default().parse()?;
            if !indices.contains(&c) {
                indices.push(c);
            }
        }
    }
    let mut estimates = Vec::new();
    let mut rows = Vec::new();
    for a in &indices {
        let est = estimate_eigenvalue_with(&channel, a, eig_m, &mut rng)?;
        rows.push(
            json!({"index": a.to_string(), "estimate": est.value, "exact": exact_eigenvalue(spec, a)?}),
        );
        estimates.push(est);
    }
    let files = vec![("eigenvalues.txt", eigenvalue_table_text(&estimates))];
    finish(cfg, sizes, trials, json!({"eigenvalues": rows}), files, start)
}

/// Category index of `(A, R)` for a nontrivial probe.
fn category(rec: &ProbeRecord, n: usize) -> usize {
    let a = rec
        .probe
        .symbols()
        .fold(0usize, |acc, s| acc * 3 + (s as usize - 1));
    let r = rec.readout.bits().fold(0usize, |acc, b| (acc << 1) | b as usize);
    (a << n) | r
}

fn counts(batch: &ProbeBatch, n: usize) -> Vec<u64> {
    let mut out = vec![0u64; 3usize.pow(n as u32) << n];
    for rec in batch.records() {
        out[category(&rec, n)] += 1;
    }
    out
}

/// Twirled general channel versus the Pauli channel of its extracted rates.
pub fn oracle_check(cfg: &ExperimentConfig, samples: usize) -> Result<(Output, i32)> {
    let start = Instant::now();
    let Source::Kraus { kraus, .. } = &cfg.source else {
        bail!("oracle-check needs a general channel: pass --kraus");
    };
    let n = kraus.num_qubits();
    let rates = pauli_error_rates(kraus)?;
    let back = pauli_error_rates(&KrausChannel::from_pauli_spec(&rates)?)?;
    let round_trip = rates
        .atoms()
        .iter()
        .map(|(c, p)| (back.probability(c) - p).abs())
        .chain(back.atoms().iter().map(|(c, p)| (rates.probability(c) - p).abs()))
        .fold(0.0, f64::max);
    let twirled = TwirledChannel::new(kraus.clone());
    let tw = collect_batch(
        &twirled,
        samples,
        ProbeFamily::Nontrivial,
        &mut substream(cfg.seed, 0),
    )?;
    let sim = probe_batch(
        &rates,
        samples,
        NoiseConfig::noiseless(),
        &mut substream(cfg.seed, 1),
    )?;
    let chi = chi_square_two_sample(&counts(&tw, n), &counts(&sim, n))?;
    let m = cfg.params.sample_count(n)?;
    let batch = collect_batch(&twirled, m, ProbeFamily::Nontrivial, &mut substream(cfg.seed, 2))?;
    let learned = population_recover_fast(&batch, &cfg.params);
    let (status, learner) = match &learned {
        Ok(rec) => (
            Status::Ok,
            json!({"hypothesis": entries(&rec.hypothesis), "accuracy": accuracy(&rec.hypothesis, &rates)}),
        ),
        Err(Error::CapacityExceeded {
            round,
            size,
            capacity,
        }) => (
            Status::CapacityExceeded,
            json!({"abort": {"round": round, "size": size, "capacity": capacity}}),
        ),
        Err(e) => bail!("{e}"),
    };
    let max_error = learned.as_ref().ok().map(|r| r.hypothesis.max_error(&rates));
    let pass =
        chi.p_value > 0.01 && round_trip <= 1e-10 && max_error.is_some_and(|e| e <= cfg.params.epsilon);
    let report = json!({
        "parameters": Parameters::new(cfg),
        "sample_sizes": {"comparison_samples_each": samples, "learner": additive_sizes(&cfg.params, n)?},
        "pauli_error_rates": entries_of(&rates),
        "round_trip_max_error": round_trip,
        "twirl_equivalence": {"statistic": chi.statistic, "dof": chi.dof, "p_value": chi.p_value, "pass": chi.p_value > 0.01},
        "learner": learner,
        "summary": {"pass": pass, "exit_code": exit_code([status])},
    });
    let timings = json!({"total_seconds": start.elapsed().as_secs_f64()});
    let hyp = learned.map(|r| r.hypothesis.to_text()).unwrap_or_default();
    let files = vec![("rates.spec", rates.to_text()), ("hypothesis.txt", hyp)];
    Ok((
        Output {
            report,
            timings,
            files,
        },
        exit_code([status]),
    ))
}

fn entries_of(spec: &ChannelSpec) -> Vec<(String, f64)> {
    spec.atoms().iter().map(|(c, p)| (c.to_string(), *p)).collect()
}
