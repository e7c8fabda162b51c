use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use quench::config::{ExperimentConfig, Mode};
use quench::experiment::{compare_prediction, read_sweep_csv, run};

#[derive(Parser)]
#[command(name = "quench", version, about = "Contact-angle experiments for directional quenching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quenched fronts, traveling wave and c_n'(0).
    Profile(Common),
    /// The symmetric solution at alpha = 0.
    Theta(Common),
    /// One pinned steady run and its measured angle.
    Simulate(Common),
    /// M_psi, M_alpha and the predicted dphi/dalpha.
    Melnikov(Common),
    /// Pinned runs over sweep.alphas against the prediction.
    Sweep(Common),
    /// Largest eigenvalue of the 1D quenched-front linearization.
    Spectrum(Common),
    /// Farfield-core solve for (w, psi).
    Bordered(Common),
    /// Measured vs predicted slope from a sweep table.
    Compare {
        /// sweep.csv written by `quench sweep`.
        sweep: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Config file with `section.key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override any key, e.g. `--set grid.h=0.5`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    c_x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Ascending coefficients, e.g. `0,0,0.5`.
    #[arg(long, allow_hyphen_values = true)]
    g_left: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g_right: Option<String>,
    /// Comma-separated sweep values.
    #[arg(long, allow_hyphen_values = true)]
    alphas: Option<String>,
    #[arg(long)]
    threads: Option<String>,
}

impl Common {
    fn into_config(self, mode: Mode) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        cfg.mode = mode;
        let flags = [
            ("run.output", self.output),
            ("model.c_x", self.c_x),
            ("model.alpha", self.alpha),
            ("model.g_left", self.g_left),
            ("model.g_right", self.g_right),
            ("sweep.alphas", self.alphas),
            ("run.threads", self.threads),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        for s in &self.sets {
            let (k, v) = s
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got {s:?}"))?;
            cfg.set(k.trim(), v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    let (mode, common) = match cli.command {
        Command::Compare { sweep, report } => {
            let rows = read_sweep_csv(&sweep).with_context(|| format!("reading {}", sweep.display()))?;
            let text = compare_prediction(&rows)?.to_text();
            match report {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            return Ok(());
        }
        Command::Profile(c) => (Mode::Profile, c),
        Command::Theta(c) => (Mode::Theta, c),
        Command::Simulate(c) => (Mode::Simulate, c),
        Command::Melnikov(c) => (Mode::Melnikov, c),
        Command::Sweep(c) => (Mode::Sweep, c),
        Command::Spectrum(c) => (Mode::Spectrum, c),
        Command::Bordered(c) => (Mode::Bordered, c),
    };
    let cfg = common.into_config(mode)?;
    let summary = run(&cfg)?;
    for a in &summary.artifacts {
        println!("{}", a.display());
    }
    Ok(())
}
