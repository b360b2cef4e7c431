mod bench;
mod config;
mod error;
mod output;
mod price;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, ExerciseKind, Format, PayoffKind, RunConfig, SolverChoice, SpaceGridKind, Table, TimeGridKind};
use error::CliError;

/// American option pricing with exact tridiagonal LCP solvers.
#[derive(Debug, Parser)]
#[command(name = "amlcp", version, about)]
struct Cli {
    /// JSON run configuration; command-line flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Print the merged configuration as JSON and exit.
    #[arg(long, global = true)]
    dump_config: bool,

    #[command(flatten)]
    flags: Flags,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Price one option.
    Price,
    /// Recompute a published table next to the printed values.
    Reproduce {
        #[arg(value_enum)]
        table: Option<Table>,
    },
    /// Time LUUL, fused LUUL, classic BS and PI on one configuration.
    Bench,
}

#[derive(Debug, Args)]
struct Flags {
    #[arg(long, global = true, value_enum)]
    payoff: Option<PayoffKind>,
    /// Strike (lower strike of a butterfly).
    #[arg(long, global = true, allow_hyphen_values = true)]
    strike: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    upper_strike: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    spot: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    rate: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    drift: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    vol: Option<f64>,
    /// Time to expiry in years.
    #[arg(long, global = true, allow_hyphen_values = true)]
    expiry: Option<f64>,
    #[arg(long, global = true, value_enum)]
    exercise: Option<ExerciseKind>,
    #[arg(long, global = true, value_enum)]
    solver: Option<SolverChoice>,
    /// Number of time steps.
    #[arg(short = 'n', long = "time-steps", global = true)]
    time_steps: Option<usize>,
    /// Number of space steps.
    #[arg(short = 'm', long = "space-steps", global = true)]
    space_steps: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    x_max: Option<f64>,
    #[arg(long, global = true, value_enum)]
    space_grid: Option<SpaceGridKind>,
    /// Hyperbolic grid concentration around the strike.
    #[arg(long, global = true, allow_hyphen_values = true)]
    stretch: Option<f64>,
    #[arg(long, global = true, value_enum)]
    time_grid: Option<TimeGridKind>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, short = 'o', global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Include wall-clock timings in price output.
    #[arg(long, global = true)]
    timings: bool,
    /// Bench repetitions (median reported).
    #[arg(long, global = true)]
    repeats: Option<usize>,
}

impl Flags {
    fn apply(self, c: &mut RunConfig) {
        fn set<T>(slot: &mut T, v: Option<T>) {
            if let Some(v) = v {
                *slot = v;
            }
        }
        set(&mut c.option.payoff, self.payoff);
        set(&mut c.option.strike, self.strike);
        set(&mut c.option.upper_strike, self.upper_strike.map(Some));
        set(&mut c.spot, self.spot);
        set(&mut c.model.rate, self.rate);
        set(&mut c.model.drift, self.drift);
        set(&mut c.model.vol, self.vol);
        set(&mut c.option.expiry, self.expiry);
        set(&mut c.option.exercise, self.exercise);
        set(&mut c.solver, self.solver);
        set(&mut c.grid.time_steps, self.time_steps);
        set(&mut c.grid.space_steps, self.space_steps);
        set(&mut c.grid.x_min, self.x_min);
        set(&mut c.grid.x_max, self.x_max.map(Some));
        set(&mut c.grid.space_grid, self.space_grid);
        set(&mut c.grid.stretch, self.stretch);
        set(&mut c.grid.time_grid, self.time_grid);
        set(&mut c.output.format, self.format);
        set(&mut c.output.path, self.output.map(Some));
        c.output.timings |= self.timings;
        set(&mut c.repeats, self.repeats);
    }
}

fn merged_config(cli: Cli) -> Result<(RunConfig, bool), CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Some(Cmd::Price) => config.command = Command::Price,
        Some(Cmd::Reproduce { table }) => {
            config.command = Command::Reproduce;
            if table.is_some() {
                config.table = table;
            }
        }
        Some(Cmd::Bench) => config.command = Command::Bench,
        None => {}
    }
    cli.flags.apply(&mut config);
    Ok((config, cli.dump_config))
}

/// The report plus whether every check in it passed.
struct Report {
    text: String,
    ok: bool,
}

fn run(config: &RunConfig) -> Result<Report, CliError> {
    let format = config.output.format;
    match config.command {
        Command::Price => {
            let table = price::run(config)?;
            Ok(Report { text: output::render(&[table], format)?, ok: true })
        }
        Command::Reproduce => {
            let table = config
                .table
                .ok_or_else(|| CliError::Config { field: "table".into(), reason: "reproduce needs a table".into() })?;
            let r = reproduce::reproduce(table)?;
            for f in &r.failures {
                eprintln!("FAIL {f}");
            }
            Ok(Report { text: output::render(&r.tables, format)?, ok: r.failures.is_empty() })
        }
        Command::Bench => {
            let tables = bench::run(config)?;
            Ok(Report { text: output::render(&tables, format)?, ok: true })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = merged_config(cli).and_then(|(config, dump)| {
        if dump {
            println!("{}", config.to_json());
            return Ok(true);
        }
        let report = run(&config)?;
        match &config.output.path {
            Some(path) => std::fs::write(path, &report.text).map_err(|e| CliError::Io { path: path.clone(), source: e })?,
            None => print!("{}", report.text),
        }
        Ok(report.ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
