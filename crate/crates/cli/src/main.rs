mod bench;
mod config;
mod report;
mod run;

use std::process::ExitCode;

use clap::Parser;

use config::{Args, ExperimentConfig, Mode};

const ORACLE_SAMPLES: usize = 100_000;

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match ExperimentConfig::from_args(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let result = match cfg.mode {
        Mode::Additive => run::additive(&cfg),
        Mode::Multiplicative => run::multiplicative(&cfg),
        Mode::Fourier => run::fourier(&cfg),
        Mode::OracleCheck => run::oracle_check(&cfg, args.samples.unwrap_or(ORACLE_SAMPLES)),
        Mode::Bench => bench::bench(&cfg),
    };
    let (output, code) = match result {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = output.write(&cfg.out) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let summary = &output.report["summary"];
    eprintln!("wrote {} ({})", cfg.out.display(), summary);
    ExitCode::from(code as u8)
}
