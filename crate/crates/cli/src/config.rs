//! Command-line flags and their validation into an [`ExperimentConfig`].

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use pauli_est::channel::ProbeBatch;
use pauli_est::dense::KrausChannel;
use pauli_est::fixtures;
use pauli_est::learner::LearnerParams;
use pauli_est::{ChannelSpec, NoiseConfig};
use serde::Serialize;

/// Directory searched for `--channel` / `--kraus` names that are not paths.
pub const FIXTURE_DIR_ENV: &str = "PAULI_EST_FIXTURES";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Additive,
    Multiplicative,
    Fourier,
    OracleCheck,
    Bench,
}

#[derive(Debug, Parser)]
#[command(
    name = "pauli-est",
    version,
    about = "Estimate Pauli error rates from simulated probes"
)]
pub struct Args {
    #[arg(long, value_enum, default_value = "additive")]
    pub mode: Mode,
    /// Pauli channel spec: a file path or a fixture name (default: example).
    #[arg(long, conflicts_with = "kraus")]
    pub channel: Option<String>,
    /// General channel as Kraus operators: a file path or a fixture name.
    #[arg(long)]
    pub kraus: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Floor below which the multiplicative mode reports "eta <= eta0".
    #[arg(long, default_value_t = 1e-4)]
    pub eta0: f64,
    /// Per-coordinate measurement failure probability.
    #[arg(long, default_value_t = 0.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Output directory.
    #[arg(long, default_value = "pauli-est-out")]
    pub out: PathBuf,
    /// Overrides the batch size derived from epsilon and delta.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Learn from an existing batch dump instead of sampling (additive mode).
    #[arg(long)]
    pub batch: Option<PathBuf>,
    /// Also write the first trial's batch as batch.dump (additive mode).
    #[arg(long)]
    pub dump_batch: bool,
    /// Qubit counts for the benchmark grid.
    #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
    pub grid: Vec<usize>,
    /// Timed repetitions of the fast path per grid point (minimum reported).
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Skip the naive path in the benchmark.
    #[arg(long)]
    pub no_naive: bool,
}

#[derive(Clone, Debug)]
pub enum Source {
    Spec { name: String, spec: ChannelSpec },
    Kraus { name: String, kraus: KrausChannel },
}

impl Source {
    pub fn name(&self) -> &str {
        match self {
            Source::Spec { name, .. } | Source::Kraus { name, .. } => name,
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            Source::Spec { spec, .. } => spec.num_qubits(),
            Source::Kraus { kraus, .. } => kraus.num_qubits(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub source: Source,
    pub params: LearnerParams,
    pub noise: NoiseConfig,
    pub eta0: f64,
    pub seed: u64,
    pub trials: usize,
    pub out: PathBuf,
    pub batch: Option<ProbeBatch>,
    pub dump_batch: bool,
    pub grid: Vec<usize>,
    pub reps: usize,
    pub naive: bool,
}

fn fixture_dir() -> Option<PathBuf> {
    std::env::var_os(FIXTURE_DIR_ENV).map(PathBuf::from)
}

/// Reads `value` as a path, then as a name in the fixture directory (with or
/// without `ext`), and finally hands it to `builtin`.
fn resolve<T>(
    value: &str,
    ext: &str,
    parse: impl Fn(&str) -> pauli_est::Result<T>,
    builtin: impl Fn(&str) -> Option<pauli_est::Result<T>>,
) -> Result<T> {
    let mut candidates = vec![PathBuf::from(value)];
    if let Some(dir) = fixture_dir() {
        candidates.push(dir.join(value));
        candidates.push(dir.join(format!("{value}.{ext}")));
        candidates.push(dir.join(format!("{}.{ext}", value.replace('-', "_"))));
    }
    for path in candidates {
        if path.is_file() {
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            return parse(&text).with_context(|| format!("parsing {}", path.display()));
        }
    }
    match builtin(value) {
        Some(r) => Ok(r?),
        None => bail!("no file or fixture named {value:?}"),
    }
}

fn load_source(args: &Args) -> Result<Source> {
    if let Some(k) = &args.kraus {
        let kraus = resolve(k, "kraus", KrausChannel::parse, fixtures::named_kraus)?;
        return Ok(Source::Kraus {
            name: k.clone(),
            kraus,
        });
    }
    let name = match (&args.channel, args.mode) {
        (Some(c), _) => c.clone(),
        (None, Mode::OracleCheck) => {
            let kraus = fixtures::amplitude_damping();
            return Ok(Source::Kraus {
                name: "amplitude-damping".into(),
                kraus,
            });
        }
        (None, _) => "example".into(),
    };
    let spec = resolve(&name, "spec", ChannelSpec::parse, fixtures::named_spec)?;
    Ok(Source::Spec { name, spec })
}

fn read_batch(path: &Path) -> Result<ProbeBatch> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ProbeBatch::parse_dump(&text).with_context(|| format!("parsing {}", path.display()))
}

impl ExperimentConfig {
    pub fn from_args(args: &Args) -> Result<Self> {
        let noise = NoiseConfig::new(args.nu)?;
        let mut params = LearnerParams::new(args.epsilon, args.delta)?.with_noise(noise);
        if let (Some(m), false) = (args.samples, args.mode == Mode::OracleCheck) {
            params = params.with_sample_count(m);
            params.validate()?;
        }
        if !(args.eta0 > 0.0 && args.eta0 < 1.0) {
            bail!("eta0 = {} must lie in (0, 1)", args.eta0);
        }
        if args.trials == 0 {
            bail!("trials must be at least 1");
        }
        if args.mode == Mode::Fourier && args.nu > 0.0 {
            bail!(
                "fourier mode does not tolerate measurement failures (nu = {})",
                args.nu
            );
        }
        if args.mode == Mode::OracleCheck && args.channel.is_some() {
            bail!("oracle-check needs a general channel: pass --kraus");
        }
        if args.mode == Mode::OracleCheck && args.nu > 0.0 {
            bail!("oracle-check compares noiseless probes; drop --nu");
        }
        if args.mode == Mode::Fourier && args.kraus.is_some() {
            bail!("fourier mode needs a Pauli channel spec: twirled probes cannot idle a coordinate");
        }
        if args.batch.is_some() && args.mode != Mode::Additive {
            bail!("--batch is only supported in additive mode");
        }
        if args.batch.is_some() && args.trials != 1 {
            bail!("--batch runs a single trial");
        }
        if args.mode == Mode::Bench && (args.grid.is_empty() || args.grid.contains(&0)) {
            bail!("bench grid must list positive qubit counts");
        }
        if args.reps == 0 {
            bail!("reps must be at least 1");
        }
        let source = load_source(args)?;
        let batch = args.batch.as_deref().map(read_batch).transpose()?;
        if let Some(b) = &batch {
            if b.num_qubits() != source.num_qubits() {
                bail!(
                    "batch has {} qubits but the channel has {}",
                    b.num_qubits(),
                    source.num_qubits()
                );
            }
            let need = params.sample_count(b.num_qubits())?;
            if b.len() < need {
                bail!("batch has {} records but {need} are required", b.len());
            }
            if b.has_failures() && args.nu == 0.0 {
                bail!("batch contains measurement failures; pass the matching --nu");
            }
        }
        Ok(ExperimentConfig {
            mode: args.mode,
            source,
            params,
            noise,
            eta0: args.eta0,
            seed: args.seed,
            trials: args.trials,
            out: args.out.clone(),
            batch,
            dump_batch: args.dump_batch,
            grid: args.grid.clone(),
            reps: args.reps,
            naive: !args.no_naive,
        })
    }
}
