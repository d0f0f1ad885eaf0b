use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use squeezelab::commands::{
    cmd_analyze, cmd_calibrate, cmd_jsa, cmd_simulate, cmd_theory, AnalysisMode, SimulateOptions, SimulationKind,
};
use squeezelab::montecarlo::{CorrelationKind, TesInput};

#[derive(Parser)]
#[command(
    name = "squeezelab",
    version,
    about = "Simulate and analyze pulsed two-mode squeezed light"
)]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Joint spectral amplitude, Schmidt modes and K/K_ABS report.
    Jsa {
        /// TOML experiment config; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a dispersion model to calibration points (wavelength_nm, delay_ps).
    Calibrate {
        /// CSV with wavelength_nm and delay_ps columns.
        #[arg(long)]
        points: PathBuf,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthetic run: time tags, HOM scan, correlation tags or TES records.
    Simulate {
        #[arg(value_enum)]
        kind: Kind,
        /// TOML experiment config; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run seed; overrides run.seed, one of the two is required.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Overrides run.pulses.
        #[arg(long)]
        pulses: Option<u64>,
        /// Overrides run.correlation.
        #[arg(long, value_enum)]
        correlation: Option<Correlation>,
        /// Overrides run.tes_input.
        #[arg(long, value_enum)]
        tes_input: Option<Tes>,
    },
    /// Analyze a run directory written by `simulate`.
    Analyze {
        /// Run directory.
        run: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Config for histogram settings; defaults to the run's config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Bootstrap seed; defaults to the run's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Bootstrap resamples; defaults to analysis.resamples.
        #[arg(long)]
        resamples: Option<usize>,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Single-mode g² theory curves over a range of mean photon numbers.
    Theory {
        /// Smallest mean photon number.
        #[arg(long, default_value_t = 0.01)]
        min: f64,
        /// Largest mean photon number.
        #[arg(long, default_value_t = 2.0)]
        max: f64,
        /// Number of log-spaced points.
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Tof,
    Hom,
    Correlation,
    Tes,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Joint,
    Hom,
    G2,
    Singles,
}

#[derive(Clone, Copy, ValueEnum)]
enum Correlation {
    Cross,
    Auto,
    Smsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tes {
    TwoMode,
    Smsv,
}

fn run(cli: Cli) -> squeezelab::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| squeezelab::Error::InvalidArgument(e.to_string()))?;
    }
    match cli.command {
        Command::Jsa { config, out } => cmd_jsa(config.as_deref(), &out),
        Command::Calibrate { points, out } => cmd_calibrate(&points, &out),
        Command::Simulate {
            kind,
            config,
            seed,
            out,
            pulses,
            correlation,
            tes_input,
        } => {
            let kind = match kind {
                Kind::Tof => SimulationKind::Tof,
                Kind::Hom => SimulationKind::Hom,
                Kind::Correlation => SimulationKind::Correlation,
                Kind::Tes => SimulationKind::Tes,
            };
            let opts = SimulateOptions {
                pulses,
                correlation: correlation.map(|c| match c {
                    Correlation::Cross => CorrelationKind::Cross,
                    Correlation::Auto => CorrelationKind::Auto,
                    Correlation::Smsv => CorrelationKind::Smsv,
                }),
                tes_input: tes_input.map(|t| match t {
                    Tes::TwoMode => TesInput::TwoMode,
                    Tes::Smsv => TesInput::Smsv,
                }),
            };
            cmd_simulate(kind, config.as_deref(), seed, opts, &out)
        }
        Command::Analyze {
            run,
            mode,
            config,
            seed,
            resamples,
            out,
        } => {
            let mode = match mode {
                Mode::Joint => AnalysisMode::Joint,
                Mode::Hom => AnalysisMode::Hom,
                Mode::G2 => AnalysisMode::G2,
                Mode::Singles => AnalysisMode::Singles,
            };
            cmd_analyze(&run, mode, config.as_deref(), seed, resamples, &out)
        }
        Command::Theory { min, max, points, out } => cmd_theory(min, max, points, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
