use amlcp::pricer::{price_american, price_european, Exercise, Payoff, PriceResult};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, Table};

fn strikes(p: &Payoff) -> (f64, Option<f64>) {
    match *p {
        Payoff::Call { strike } | Payoff::Put { strike } | Payoff::Straddle { strike } => (strike, None),
        Payoff::Butterfly { lower_strike, upper_strike } => (lower_strike, Some(upper_strike)),
    }
}

pub fn price(config: &RunConfig) -> Result<PriceResult, CliError> {
    let s = config.setup()?;
    Ok(match s.spec.exercise {
        Exercise::American => price_american(&s.spec, &s.params, &s.space, &s.time, &s.scheme, s.solver, s.spot)?,
        Exercise::European => price_european(&s.spec, &s.params, &s.space, &s.time, &s.scheme, s.spot)?,
    })
}

/// One-row report. Wall time always goes to stderr; it only enters the
/// report with `timings`, so the report itself is reproducible.
pub fn run(config: &RunConfig) -> Result<Table, CliError> {
    let s = config.setup()?;
    let r = price(config)?;
    let wall_ms = r.wall_time.as_secs_f64() * 1e3;
    eprintln!("wall time: {wall_ms:.3} ms");

    let mut headers = vec![
        "payoff", "exercise", "strike", "upper_strike", "spot", "expiry", "rate", "drift", "vol", "solver",
        "time_steps", "space_steps", "x_min", "x_max", "price", "stages", "iterations", "assemblies",
    ];
    if config.output.timings {
        headers.push("wall_ms");
    }
    let (k, k2) = strikes(&s.spec.payoff);
    let mut row = vec![
        format!("{:?}", config.option.payoff).to_lowercase(),
        format!("{:?}", config.option.exercise).to_lowercase(),
        num(k),
        k2.map(num).unwrap_or_default(),
        num(s.spot),
        num(s.spec.maturity),
        num(config.model.rate),
        num(config.model.drift),
        num(config.model.vol),
        r.solver.map_or("linear", |k| k.label()).to_string(),
        s.time.steps().to_string(),
        s.space.intervals().to_string(),
        num(s.space.lower()),
        num(s.space.upper()),
        num(r.price),
        r.stats.stages.to_string(),
        r.stats.total_iterations.to_string(),
        r.stats.assemblies.to_string(),
    ];
    if config.output.timings {
        row.push(format!("{wall_ms:.3}"));
    }
    let mut table = Table::new("price", &headers);
    table.push(row);
    Ok(table)
}
