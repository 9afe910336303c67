use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand as ClapSubcommand, ValueEnum};

use su11sim_cli::config::{LoadedConfig, RunConfig};
use su11sim_cli::error::CliError;
use su11sim_cli::output::{write_atomically, OutputFile};
use su11sim_cli::presets;
use su11sim_cli::runners::{run, RunContext, Subcommand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

/// SU(1,1) and Mach-Zehnder interferometer simulator.
#[derive(Debug, Parser)]
#[command(name = "su11sim", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration: fig2, fig3 or fig4.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Master seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// `svg` writes plots next to the CSV tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, ClapSubcommand)]
enum Command {
    /// Output intensity and noise against phase.
    Fringe,
    /// Vacuum, single-amplifier, blocked and phase-scanned noise spectra.
    NoiseSpectrum,
    /// Signal-to-noise of a phase modulation at fixed depths.
    Snr,
    /// Minimum detectable phase against phase-sensing photon number.
    Sensitivity,
    /// Dark-fringe lock under a phase disturbance.
    Lock,
    /// Compare the covariance engine against the number-basis engine.
    OracleCheck {
        #[arg(long)]
        max_gain: Option<f64>,
        #[arg(long)]
        cutoff: Option<usize>,
    },
}

fn load(cli: &Cli) -> Result<LoadedConfig, CliError> {
    let mut loaded = match (&cli.config, &cli.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            LoadedConfig::from_text(&text, &path.display().to_string())?
        }
        (None, Some(name)) => LoadedConfig::from_config(presets::preset(name)?)?,
        (None, None) => LoadedConfig::from_config(RunConfig::default())?,
    };
    if let Command::OracleCheck { max_gain, cutoff } = &cli.command {
        if max_gain.is_some() || cutoff.is_some() {
            let mut c = loaded.config.clone();
            if let Some(g) = max_gain {
                c.oracle.max_gain = *g;
            }
            if let Some(n) = cutoff {
                c.oracle.cutoff = *n;
            }
            loaded = LoadedConfig::from_config(c)?;
        }
    }
    Ok(loaded)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let config = load(&cli)?;
    let subcommand = match cli.command {
        Command::Fringe => Subcommand::Fringe,
        Command::NoiseSpectrum => Subcommand::NoiseSpectrum,
        Command::Snr => Subcommand::Snr,
        Command::Sensitivity => Subcommand::Sensitivity,
        Command::Lock => Subcommand::Lock,
        Command::OracleCheck { .. } => Subcommand::OracleCheck,
    };
    let snapshot = OutputFile::new("config.toml", config.text.clone());
    let ctx = RunContext {
        subcommand,
        config,
        seed: cli.seed,
        svg: cli.format == Format::Svg,
    };
    let mut output = run(&ctx)?;
    if let Some(report) = output.report() {
        print!("{report}");
    }
    output.files.push(snapshot);
    let written = write_atomically(&cli.out, &output.files)?;
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    match output.failure {
        Some(msg) => Err(CliError::Numerical(su11sim::Error::OutOfRange(msg))),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("su11sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
