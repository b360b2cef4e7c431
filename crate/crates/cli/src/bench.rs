use std::time::Duration;

use amlcp::pricer::price_american;
use amlcp::solvers::SolverKind;

use crate::config::{RunConfig, SolverChoice, TimeGridKind};
use crate::error::CliError;
use crate::output::{num, Table};

const WARMUP: usize = 2;
pub const MIN_REPEATS: usize = 9;

struct Timing {
    price: f64,
    median: Duration,
    min: Duration,
    max: Duration,
}

fn time_solver(config: &RunConfig, solver: SolverChoice) -> Result<(SolverKind, Timing), CliError> {
    let mut config = config.clone();
    config.solver = solver;
    let s = config.setup()?;
    let once = || price_american(&s.spec, &s.params, &s.space, &s.time, &s.scheme, s.solver, s.spot);
    for _ in 0..WARMUP {
        once()?;
    }
    let mut walls = Vec::with_capacity(config.repeats);
    let mut price = f64::NAN;
    for _ in 0..config.repeats {
        let r = once()?;
        price = r.price;
        walls.push(r.wall_time);
    }
    walls.sort();
    let timing = Timing { price, median: walls[walls.len() / 2], min: walls[0], max: walls[walls.len() - 1] };
    Ok((s.solver, timing))
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Median wall time per solver on both time grids, plus the headline ratios.
pub fn run(config: &RunConfig) -> Result<Vec<Table>, CliError> {
    if config.repeats < MIN_REPEATS {
        return Err(CliError::Config {
            field: "repeats".into(),
            reason: format!("{} is below the minimum of {MIN_REPEATS}", config.repeats),
        });
    }
    let solvers = [SolverChoice::Luul, SolverChoice::LuulFast, SolverChoice::Bs, SolverChoice::Pi];
    let mut timings = Table::new(
        format!("bench: median of {} runs after {WARMUP} warm-ups", config.repeats),
        &["time_grid", "solver", "price", "median_ms", "min_ms", "max_ms"],
    );
    let mut ratios = Table::new("bench ratios", &["time_grid", "luul_over_bs", "pi_over_luul", "fast_over_luul"]);
    for grid in [TimeGridKind::Constant, TimeGridKind::Sqrt] {
        let mut config = config.clone();
        config.grid.time_grid = grid;
        let mut medians = Vec::new();
        for solver in solvers {
            let (kind, t) = time_solver(&config, solver)?;
            let name = format!("{grid:?}").to_lowercase();
            timings.push(vec![
                name,
                kind.label().to_string(),
                num(t.price),
                format!("{:.3}", ms(t.median)),
                format!("{:.3}", ms(t.min)),
                format!("{:.3}", ms(t.max)),
            ]);
            medians.push(ms(t.median));
        }
        let [luul, fast, bs, pi] = medians[..] else { unreachable!() };
        ratios.push(vec![
            format!("{grid:?}").to_lowercase(),
            format!("{:.3}", luul / bs),
            format!("{:.3}", pi / luul),
            format!("{:.3}", fast / luul),
        ]);
    }
    Ok(vec![timings, ratios])
}
