use std::path::{Path, PathBuf};

use amlcp::discretization::{ModelParams, SchemeParams};
use amlcp::grid::{SpaceGrid, TimeGrid, DEFAULT_STRETCH};
use amlcp::pricer::{default_upper_bound, Exercise, OptionSpec, Payoff};
use amlcp::solvers::{Direction, SolverKind};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Price,
    Reproduce,
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Table {
    Table1,
    Table2,
    Table3,
    #[value(name = "appendixA", alias = "appendixa")]
    #[serde(rename = "appendixA")]
    AppendixA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PayoffKind {
    Put,
    Call,
    Butterfly,
    Straddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ExerciseKind {
    American,
    European,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SpaceGridKind {
    Uniform,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TimeGridKind {
    Constant,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    Luul,
    LuulFast,
    /// Classic single sweep in the payoff's natural direction.
    Bs,
    BsDown,
    BsUp,
    Pi,
    Psor,
    ExplicitMax,
}

impl SolverChoice {
    pub fn kind(self, payoff: &Payoff) -> SolverKind {
        match self {
            SolverChoice::Luul => SolverKind::Luul,
            SolverChoice::LuulFast => SolverKind::LuulFast,
            SolverChoice::Bs => SolverKind::BrennanSchwartz(payoff.classic_direction()),
            SolverChoice::BsDown => SolverKind::BrennanSchwartz(Direction::Downward),
            SolverChoice::BsUp => SolverKind::BrennanSchwartz(Direction::Upward),
            SolverChoice::Pi => SolverKind::PolicyIteration,
            SolverChoice::Psor => SolverKind::Psor,
            SolverChoice::ExplicitMax => SolverKind::ExplicitMax,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Markdown,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptionConfig {
    pub payoff: PayoffKind,
    pub strike: f64,
    /// Upper strike of a butterfly.
    pub upper_strike: Option<f64>,
    pub expiry: f64,
    pub exercise: ExerciseKind,
}

impl Default for OptionConfig {
    fn default() -> Self {
        OptionConfig {
            payoff: PayoffKind::Put,
            strike: 100.0,
            upper_strike: None,
            expiry: 1.0,
            exercise: ExerciseKind::American,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub rate: f64,
    pub drift: f64,
    pub vol: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { rate: 0.0, drift: 0.0, vol: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Time steps `n`.
    pub time_steps: usize,
    /// Space steps `m`.
    pub space_steps: usize,
    pub x_min: f64,
    /// Defaults to `max(S, K)·exp(4σ√T + |μ|T)`.
    pub x_max: Option<f64>,
    pub space_grid: SpaceGridKind,
    pub stretch: f64,
    pub time_grid: TimeGridKind,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            time_steps: 100,
            space_steps: 2000,
            x_min: 0.0,
            x_max: None,
            space_grid: SpaceGridKind::Hyperbolic,
            stretch: DEFAULT_STRETCH,
            time_grid: TimeGridKind::Constant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Format,
    pub path: Option<PathBuf>,
    /// Include wall-clock timings in `price` output (makes it
    /// non-reproducible byte for byte).
    pub timings: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { format: Format::Markdown, path: None, timings: false }
    }
}

/// Everything a run needs; loadable from JSON with `--config`, then
/// overridden by command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub table: Option<Table>,
    pub option: OptionConfig,
    pub model: ModelConfig,
    pub spot: f64,
    pub grid: GridConfig,
    pub solver: SolverChoice,
    /// Bench repetitions; the median is reported.
    pub repeats: usize,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Price,
            table: None,
            option: OptionConfig::default(),
            model: ModelConfig::default(),
            spot: 100.0,
            grid: GridConfig::default(),
            solver: SolverChoice::Luul,
            repeats: 9,
            output: OutputConfig::default(),
        }
    }
}

/// Validated pricing inputs built from a [`RunConfig`].
pub struct PricingSetup {
    pub spec: OptionSpec,
    pub params: ModelParams,
    pub space: SpaceGrid,
    pub time: TimeGrid,
    pub scheme: SchemeParams,
    pub solver: SolverKind,
    pub spot: f64,
}

fn invalid(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Config { field: field.to_string(), reason: reason.into() }
}

fn finite(field: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(field, format!("{x} is not a finite number")))
    }
}

fn positive(field: &str, x: f64) -> Result<f64, CliError> {
    if finite(field, x)? > 0.0 {
        Ok(x)
    } else {
        Err(invalid(field, format!("{x} must be > 0")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        serde_json::from_str(&text).map_err(|e| CliError::ConfigFile { path: path.to_path_buf(), source: e })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn payoff(&self) -> Result<Payoff, CliError> {
        let k = positive("option.strike", self.option.strike)?;
        Ok(match self.option.payoff {
            PayoffKind::Put => Payoff::Put { strike: k },
            PayoffKind::Call => Payoff::Call { strike: k },
            PayoffKind::Straddle => Payoff::Straddle { strike: k },
            PayoffKind::Butterfly => {
                let k2 = self
                    .option
                    .upper_strike
                    .ok_or_else(|| invalid("option.upper_strike", "required for a butterfly"))?;
                if positive("option.upper_strike", k2)? <= k {
                    return Err(invalid("option.upper_strike", format!("{k2} must exceed the strike {k}")));
                }
                Payoff::Butterfly { lower_strike: k, upper_strike: k2 }
            }
        })
    }

    pub fn setup(&self) -> Result<PricingSetup, CliError> {
        let payoff = self.payoff()?;
        let expiry = positive("option.expiry", self.option.expiry)?;
        let exercise = match self.option.exercise {
            ExerciseKind::American => Exercise::American,
            ExerciseKind::European => Exercise::European,
        };
        let spec = OptionSpec::new(payoff, expiry, exercise).map_err(|e| invalid("option", e.to_string()))?;

        let rate = finite("model.rate", self.model.rate)?;
        let drift = finite("model.drift", self.model.drift)?;
        let vol = finite("model.vol", self.model.vol)?;
        if vol < 0.0 {
            return Err(invalid("model.vol", format!("{vol} must be ≥ 0")));
        }
        let spot = finite("spot", self.spot)?;
        if spot < 0.0 {
            return Err(invalid("spot", format!("{spot} must be ≥ 0")));
        }

        let g = &self.grid;
        if g.time_steps == 0 {
            return Err(invalid("grid.time_steps", "need at least one time step"));
        }
        if g.space_steps < 2 {
            return Err(invalid("grid.space_steps", "need at least two space steps"));
        }
        let x_min = finite("grid.x_min", g.x_min)?;
        let x_max = match g.x_max {
            Some(x) => finite("grid.x_max", x)?,
            None => default_upper_bound(spot, payoff.max_strike(), vol, drift, expiry),
        };
        if !(x_min >= 0.0 && x_min < x_max) {
            return Err(invalid("grid.x_min", format!("need 0 ≤ x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if !(spot >= x_min && spot <= x_max) {
            return Err(invalid("spot", format!("{spot} lies outside the grid [{x_min}, {x_max}]")));
        }
        let space = match g.space_grid {
            SpaceGridKind::Uniform => SpaceGrid::uniform(x_min, x_max, g.space_steps),
            SpaceGridKind::Hyperbolic => {
                let stretch = positive("grid.stretch", g.stretch)?;
                let center = payoff.center().clamp(x_min, x_max);
                SpaceGrid::hyperbolic(x_min, x_max, g.space_steps, center, stretch)
            }
        }
        .map_err(|e| invalid("grid", e.to_string()))?;
        let time = match g.time_grid {
            TimeGridKind::Constant => TimeGrid::constant(expiry, g.time_steps),
            TimeGridKind::Sqrt => TimeGrid::sqrt_law(expiry, g.time_steps),
        }
        .map_err(|e| invalid("grid", e.to_string()))?;

        Ok(PricingSetup {
            spec,
            params: ModelParams::constant(rate, drift, vol),
            space,
            time,
            scheme: SchemeParams::default(),
            solver: self.solver.kind(&payoff),
            spot,
        })
    }
}
