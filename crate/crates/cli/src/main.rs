mod angle;
mod commands;
mod config;
mod error;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cohwit_core::expsim::ExperimentConfig;
use cohwit_core::game::Strategy;
use cohwit_core::measure::Axis;
use cohwit_core::tomo::TOMO_BOOTSTRAP_REPLICATES;

use crate::commands::{GameOpts, Mode, ParadoxOpts, StateSelection, TomoOpts, VisibilityOpts};
use crate::error::{CliError, CliResult};
use crate::output::{RunDir, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "cohwit", version, about = "Coherence witnesses: paradox tables, XOR game, tomography and fringe scans")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output directory [default: cohwit-out/<command>]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key = value experiment config [default: $COHWIT_CONFIG]
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed, overriding the config file
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Werner visibility of the simulated sources, overriding the config file
    #[arg(long, global = true)]
    visibility: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PauliArg {
    #[value(alias = "x")]
    X,
    #[value(alias = "y")]
    Y,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    X,
    Z,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Five-row coherence paradox table with LHV verdict (and p-value bound when simulated)
    Paradox {
        #[arg(long, value_parser = angle::parse_angle, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, value_enum, default_value = "X", ignore_case = true)]
        axis: PauliArg,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        /// Residual tolerance of the LHV mixture test
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Winning probability and coherence terms of the XOR game over a theta grid
    Game {
        /// Comma list (pi/12,pi/8) or inclusive range start:stop:count
        #[arg(long)]
        theta_grid: String,
        #[arg(long, value_enum, ignore_case = true)]
        strategy: StrategyArg,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
    },
    /// Simulated two-qubit tomography with fidelities and density-matrix dumps
    Tomo {
        /// `all` for the six reference sources, or a comma list of angles for psi_00(theta)
        #[arg(long, default_value = "all")]
        states: String,
        #[arg(long, default_value_t = TOMO_BOOTSTRAP_REPLICATES)]
        replicates: usize,
    },
    /// Multi-slit paradox specs on the one-excitation Dicke state
    Dicke {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Coincidence fringe with one polarizer fixed
    Visibility {
        #[arg(long, value_parser = angle::parse_angle, allow_hyphen_values = true)]
        fixed: f64,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long, default_value_t = 72)]
        points: usize,
    },
    /// All tables, curves, scans and tomography under one manifest
    Report {
        #[arg(long, default_value_t = TOMO_BOOTSTRAP_REPLICATES)]
        replicates: usize,
    },
    /// Re-run the command recorded in a manifest with its recorded config
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Paradox { .. } => "paradox",
            Command::Game { .. } => "game",
            Command::Tomo { .. } => "tomo",
            Command::Dicke { .. } => "dicke",
            Command::Visibility { .. } => "visibility",
            Command::Report { .. } => "report",
            Command::Replay { .. } => "replay",
        }
    }
}

fn resolve_config(common: &Common) -> CliResult<ExperimentConfig> {
    let (mut cfg, _) = config::load(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(v) = common.visibility {
        cfg.visibility_v = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: &Command, common: &Common, cfg: &ExperimentConfig, args: Vec<String>) -> CliResult<PathBuf> {
    let out = common.out.clone().unwrap_or_else(|| Path::new("cohwit-out").join(command.name()));
    // validate everything that can fail on user input before creating the run directory
    let grid = match command {
        Command::Game { theta_grid, .. } => Some(angle::parse_grid(theta_grid).map_err(CliError::Usage)?),
        _ => None,
    };
    let states = match command {
        Command::Tomo { states, .. } if states.trim().eq_ignore_ascii_case("all") => Some(StateSelection::All),
        Command::Tomo { states, .. } => {
            Some(StateSelection::Angles(angle::parse_grid(states).map_err(CliError::Usage)?))
        }
        _ => None,
    };

    let mut run = RunDir::create(&out, command.name(), args, *cfg)?;
    match command {
        Command::Paradox { theta, axis, mode, tol } => {
            let axis = match axis {
                PauliArg::X => Axis::X,
                PauliArg::Y => Axis::Y,
            };
            commands::paradox(&mut run, "", &ParadoxOpts { theta: *theta, axis, mode: *mode, tol: *tol }, cfg)?
        }
        Command::Game { strategy, mode, .. } => {
            let strategy = match strategy {
                StrategyArg::X => Strategy::SigmaX,
                StrategyArg::Z => Strategy::SigmaZ,
            };
            let grid = grid.unwrap_or_default();
            commands::game(&mut run, "", &GameOpts { grid, strategy, mode: *mode }, cfg)?
        }
        Command::Tomo { replicates, .. } => {
            let o = TomoOpts { states: states.unwrap_or(StateSelection::All), visibility: common.visibility, replicates: *replicates };
            commands::tomo(&mut run, "", &o, cfg)?
        }
        Command::Dicke { n, tol } => commands::dicke(&mut run, "", *n, *tol)?,
        Command::Visibility { fixed, mode, points } => {
            commands::visibility(&mut run, "", &VisibilityOpts { fixed: *fixed, mode: *mode, points: *points }, cfg)?
        }
        Command::Report { replicates } => commands::report(&mut run, cfg, *replicates)?,
        Command::Replay { .. } => unreachable!("replay is resolved before execution"),
    }
    let root = run.root().to_path_buf();
    let manifest = run.finish()?;
    eprintln!("{}: {} files in {}", manifest.command, manifest.outputs.len(), root.display());
    Ok(root)
}

fn run(argv: Vec<OsString>) -> CliResult<()> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();

    if let Command::Replay { manifest } = &cli.command {
        let recorded = RunManifest::read(manifest)?;
        let mut full = vec!["cohwit".to_string()];
        full.extend(recorded.args.iter().cloned());
        let original = Cli::try_parse_from(&full)
            .map_err(|e| CliError::Usage(format!("manifest arguments do not parse: {e}")))?;
        if matches!(original.command, Command::Replay { .. }) {
            return Err(CliError::Usage("cannot replay a replay".into()));
        }
        let mut common = original.common.clone();
        common.out = cli.common.out.clone();
        execute(&original.command, &common, &recorded.config, recorded.args)?;
        return Ok(());
    }

    let cfg = resolve_config(&cli.common)?;
    execute(&cli.command, &cli.common, &cfg, args)?;
    Ok(())
}

fn main() {
    if let Err(e) = run(std::env::args_os().collect()) {
        eprintln!("cohwit: {e}");
        std::process::exit(e.exit_code());
    }
}
