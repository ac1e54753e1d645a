use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dcf_cli::commands::{self, PhyAxis};
use dcf_cli::{CliError, Result, ScenarioFile};
use dcf_core::phy::{Fading, RateClass};

#[derive(Parser)]
#[command(name = "dcf", version, about = "Throughput model and simulator for 802.11b DCF networks")]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in scenario: scenario1, scenario2 or scenario3.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the selected scenario (or the defaults) as a complete scenario file.
    #[arg(long)]
    dump_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveAxis {
    Snr,
    Distance,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the operating point of the scenario.
    Solve {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Solve the model along a parameter axis.
    Sweep {
        /// lambda:all, lambda:<station> or distance:<station> (stations count from 0).
        #[arg(long)]
        axis: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Geometric spacing.
        #[arg(long)]
        log: bool,
    },
    /// Simulate the scenario and compare with the model.
    Sim {
        /// Single seed; overrides the file's seed list.
        #[arg(long, conflicts_with = "seeds")]
        seed: Option<u64>,
        /// Comma-separated seed list; overrides the file's seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        duration_s: Option<f64>,
    },
    /// Critical packet rate of every rate class.
    CriticalRates {
        /// Defaults to the scenario's network payload.
        #[arg(long)]
        payload_bytes: Option<u32>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// BER and FER of one rate class along SNR or distance.
    PhyCurves {
        /// Rate class 1..4.
        #[arg(long)]
        class: u8,
        /// awgn or rayleigh; defaults to the scenario's setting.
        #[arg(long)]
        fading: Option<String>,
        #[arg(long, value_enum, default_value = "snr")]
        axis: CurveAxis,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long)]
        payload_bytes: Option<u32>,
    },
}

fn load(cli: &Cli) -> Result<ScenarioFile> {
    match (&cli.scenario, &cli.preset) {
        (Some(path), _) => ScenarioFile::load(path),
        (None, Some(name)) => ScenarioFile::preset(name),
        (None, None) => Ok(ScenarioFile::default()),
    }
}

fn execute(cli: &Cli) -> Result<String> {
    let file = load(cli)?;
    if cli.dump_defaults {
        return Ok(file.to_toml());
    }
    let Some(command) = &cli.command else {
        return Err(CliError::Invalid("no command given (try --help)".into()));
    };
    let scn = file.to_scenario()?;
    let solver = file.solver.options()?;
    match command {
        Command::Solve { format: Format::Text } => commands::solve_text(&scn, &solver),
        Command::Solve { format: Format::Csv } => commands::solve_csv(&scn, &solver),
        Command::Sweep { axis, from, to, steps, log } => {
            let xs = commands::grid(*from, *to, *steps, *log)?;
            commands::sweep_csv(&scn, commands::parse_axis(axis)?, &xs, &solver)
        }
        Command::Sim { seed, seeds, duration_s } => {
            let mut opts = file.sim.options();
            if let Some(d) = duration_s {
                opts.duration_s = *d;
            }
            let seeds = match (seed, seeds) {
                (Some(s), _) => vec![*s],
                (None, Some(list)) => list.clone(),
                (None, None) => file.sim.seeds.clone(),
            };
            commands::sim_csv(&scn, &solver, &opts, &seeds)
        }
        Command::CriticalRates { payload_bytes, format } => {
            let pl = payload_bytes.unwrap_or(file.network.payload_bytes);
            match format {
                Format::Text => Ok(commands::critical_rates_text(&scn.params, pl)),
                Format::Csv => commands::critical_rates_csv(&scn.params, pl),
            }
        }
        Command::PhyCurves { class, fading, axis, from, to, steps, payload_bytes } => {
            let class = RateClass::from_id(*class).map_err(|_| CliError::Invalid(format!("rate class {class}: expected 1..4")))?;
            let fading = match fading {
                Some(name) => name.parse::<Fading>()?,
                None => scn.params.phy.fading,
            };
            let axis = match axis {
                CurveAxis::Snr => PhyAxis::SnrDb,
                CurveAxis::Distance => PhyAxis::DistanceM,
            };
            let xs = commands::grid(*from, *to, *steps, false)?;
            let pl = payload_bytes.unwrap_or(file.network.payload_bytes);
            commands::phy_curves_csv(&scn.params, class, fading, axis, &xs, pl)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli).and_then(|text| emit(&cli.out, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
