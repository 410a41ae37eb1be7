use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qspeed_cli::{cmd_detect, cmd_figure, cmd_regions, cmd_speed, emit, CliError, RunConfig, Settings, Table};

#[derive(Parser)]
#[command(name = "qspeed", version, about = "Speed of quantum evolution: curves, figures, memory regions, speedup detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Speed curve S(t) of a model
    Speed(#[command(flatten)] Settings),
    /// Data for a preset figure (fig1a, fig1b, fig2a-d, fig3a, fig3b, fig4a, fig4b)
    Figure {
        id: String,
        #[command(flatten)]
        settings: Settings,
    },
    /// Memory and longitudinal-speedup intervals of an open model
    Regions(#[command(flatten)] Settings),
    /// Speedup detector dS/dxi over a parameter sweep
    Detect(#[command(flatten)] Settings),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (settings, action): (Settings, Action) = match cli.command {
        Command::Speed(s) => (s, Action::Run(cmd_speed)),
        Command::Regions(s) => (s, Action::Run(cmd_regions)),
        Command::Detect(s) => (s, Action::Run(cmd_detect)),
        Command::Figure { id, settings } => (settings, Action::Figure(id)),
    };
    let settings = settings.resolve()?;
    let run = match action {
        Action::Run(f) => f,
        Action::Figure(id) => return run_figure(&id, settings),
    };
    let cfg = RunConfig::from_settings(&settings)?;
    let table = run(&cfg)?;
    emit(&table.render(cfg.format)?, cfg.out.as_deref())
}

enum Action {
    Run(fn(&RunConfig) -> Result<Table, CliError>),
    Figure(String),
}

fn run_figure(id: &str, settings: Settings) -> Result<(), CliError> {
    let fixed = [
        ("model", settings.model.is_some()),
        ("alpha", settings.alpha.is_some()),
        ("omega", settings.omega.is_some()),
        ("gamma-ratio", settings.gamma_ratio.is_some()),
        ("markovian-limit", settings.markovian_limit.is_some()),
        ("tmin", settings.tmin.is_some()),
        ("tmax", settings.tmax.is_some()),
        ("time", settings.time.is_some()),
        ("sweep", settings.sweep.is_some()),
    ];
    if let Some((name, _)) = fixed.iter().find(|(_, set)| *set) {
        return Err(CliError::usage(format!("--{name} is fixed by the figure and cannot be set")));
    }
    let cfg = RunConfig::from_settings(&settings)?;
    let table = cmd_figure(id, cfg.metric, settings.points)?;
    emit(&table.render(cfg.format)?, cfg.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qspeed: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
