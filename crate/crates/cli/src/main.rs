mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use config::{GridSpec, RunConfig};
use tripod_core::{Error, LoopFamily};

const THREADS_VAR: &str = "HOLONOMY_THREADS";

#[derive(Parser, Debug)]
#[command(name = "tripod", version, about = "Holonomic NOT gates on a tripod system: sweeps, optimal points, fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Noiseless mean fidelity against Ωτ.
    IdealSweep(Overrides),
    /// Mean fidelity against Ωτ, one CSV per λ².
    NoisySweep(Overrides),
    /// Location and height of the first revival for each λ².
    Optimal(Overrides),
    /// Noise-response fits of the optimal points.
    Fit(Overrides),
    /// Gain of the optimal point over the third revival.
    Robustness(Overrides),
    /// Holonomy and exact propagator of one loop, JSON on stdout.
    Holonomy(Overrides),
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// JSON run configuration; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `standard` or `wedge:N`.
    #[arg(long = "loop")]
    loop_family: Option<LoopFamily>,
    #[arg(long)]
    omega: Option<f64>,
    /// Comma-separated λ² list.
    #[arg(long, value_delimiter = ',')]
    lambda_sq: Option<Vec<f64>>,
    /// Ωτ grid as START:STOP:POINTS.
    #[arg(long)]
    grid: Option<GridSpec>,
    /// Single Ωτ.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    states: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Calibrate γ₀ to this small-coupling F2 before running.
    #[arg(long)]
    calibrate_f2: Option<f64>,
    #[arg(long)]
    gamma0: Option<f64>,
    /// Noise model JSON.
    #[arg(long = "noise")]
    noise_file: Option<PathBuf>,
    #[arg(long)]
    free_intercept: bool,
    /// Optimal-point table for `fit`.
    #[arg(long)]
    table: Option<PathBuf>,
}

impl Overrides {
    fn resolve(self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            )*};
        }
        set!(out, loop_family, omega, grid, states, steps, gamma0);
        macro_rules! set_opt {
            ($($field:ident),*) => {$(
                if self.$field.is_some() {
                    cfg.$field = self.$field;
                }
            )*};
        }
        set_opt!(lambda_sq, tau, calibrate_f2, noise_file, table);
        cfg.free_intercept |= self.free_intercept;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_VAR} must be a positive integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("building the worker pool")
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    let (command, overrides) = match cli.command {
        Command::IdealSweep(o) => ("ideal-sweep", o),
        Command::NoisySweep(o) => ("noisy-sweep", o),
        Command::Optimal(o) => ("optimal", o),
        Command::Fit(o) => ("fit", o),
        Command::Robustness(o) => ("robustness", o),
        Command::Holonomy(o) => ("holonomy", o),
    };
    let mut cfg = overrides.resolve()?;
    if command != "holonomy" {
        // Fail on a bad noise file before any calibration or sweep.
        cfg.base_noise()?;
    }
    let calibration = commands::apply_calibration(&mut cfg)?;
    if let Some(c) = &calibration {
        eprintln!("calibrated gamma0 = {} (F2 = {})", c.gamma0, c.fitted_f2);
    }
    match command {
        "ideal-sweep" => print_paths(&commands::ideal_sweep(&cfg)?),
        "noisy-sweep" => print_paths(&commands::noisy_sweep(&cfg)?),
        "optimal" => {
            commands::optimal(&cfg, calibration)?;
            print_paths(&[cfg.out.join(commands::OPTIMAL_FILE)]);
        }
        "fit" => {
            commands::fit(&cfg, calibration)?;
            print_paths(&[cfg.out.join(commands::FIT_FILE)]);
        }
        "robustness" => {
            commands::robustness_table(&cfg)?;
            print_paths(&[cfg.out.join(commands::ROBUSTNESS_FILE)]);
        }
        _ => println!("{}", serde_json::to_string_pretty(&commands::holonomy(&cfg)?)?),
    }
    Ok(())
}

/// 3 for numerical failures inside the core, 2 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<Error>(),
            Some(
                Error::StepCountTooSmall { .. }
                    | Error::NoPeakInWindow { .. }
                    | Error::NonHermitianInput { .. }
                    | Error::InvalidDensity(_)
            )
        )
    });
    if numerical {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
