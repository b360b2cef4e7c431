//! Side-by-side reproduction of the published tables against the golden
//! data in `golden/paper_tables.json`.

use std::time::Duration;

use amlcp::discretization::{assemble_matrix, trapezoidal_rhs, transform_to_standard, ModelParams, SchemeParams};
use amlcp::grid::{SpaceGrid, TimeGrid, DEFAULT_STRETCH};
use amlcp::pricer::{default_upper_bound, payoff_values, price_american_with, OptionSpec, Payoff, PricingOptions};
use amlcp::solvers::{
    luul_decompose, solve_classic_bs, solve_double_sweep, solve_fast_double_sweep, solve_policy_iteration,
    solve_psor, Direction, PsorSettings, SolverKind,
};
use serde::Deserialize;

use crate::config::Table as TableId;
use crate::error::CliError;
use crate::output::{num, pass, sci, Table};

const GOLDEN: &str = include_str!("../../../golden/paper_tables.json");

#[derive(Debug, Deserialize)]
pub struct Golden {
    pub table1: Table1,
    pub table2: Table2,
    pub table3: Table3,
    pub appendix_a: AppendixA,
}

#[derive(Debug, Deserialize)]
pub struct Table1 {
    pub strike: f64,
    pub spot: f64,
    pub rate: f64,
    pub drift: f64,
    pub vol: f64,
    pub time_steps: usize,
    pub space_steps: usize,
    pub rows: Vec<Table1Row>,
}

#[derive(Debug, Deserialize)]
pub struct Table1Row {
    pub days: u32,
    pub reference: f64,
    pub varying: Table1Cells,
    pub constant: Table1Cells,
}

#[derive(Debug, Deserialize)]
pub struct Table1Cells {
    pub pi: f64,
    pub luul: f64,
    pub bs: f64,
    pub ms: SolverTimes,
}

#[derive(Debug, Deserialize)]
pub struct SolverTimes {
    pub pi: f64,
    pub luul: f64,
    pub bs: f64,
}

#[derive(Debug, Deserialize)]
pub struct Table2 {
    pub spot: f64,
    pub strike: f64,
    pub rate: f64,
    pub drift: f64,
    pub vol: f64,
    pub time_steps: usize,
    pub space_steps: usize,
    pub call: Table2Cells,
    pub put: Table2Cells,
}

#[derive(Debug, Deserialize)]
pub struct Table2Cells {
    pub pi: f64,
    pub luul: f64,
    pub difference: f64,
}

#[derive(Debug, Deserialize)]
pub struct Table3 {
    pub lower_strike: f64,
    pub upper_strike: f64,
    pub maturity: f64,
    pub spot: f64,
    pub rate: f64,
    pub drift: f64,
    pub vol: f64,
    pub x_max: f64,
    pub space_steps: usize,
    pub rows: Vec<Table3Row>,
}

#[derive(Debug, Deserialize)]
pub struct Table3Row {
    /// Number of time points; the run uses `n − 1` steps.
    pub n: usize,
    pub bs: Table3Cell,
    pub luul: Table3Cell,
    pub pi: Table3Cell,
}

#[derive(Debug, Deserialize)]
pub struct Table3Cell {
    pub price: f64,
    pub difference: f64,
    pub us: f64,
}

#[derive(Debug, Deserialize)]
pub struct AppendixA {
    pub lower_strike: f64,
    pub upper_strike: f64,
    pub maturity: f64,
    pub rate: f64,
    pub drift: f64,
    pub vol: f64,
    pub x_max: f64,
    pub space_steps: usize,
    pub time_steps: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub g: Vec<f64>,
    pub payoff: Vec<f64>,
    pub f_star: Vec<f64>,
    pub luul_error: Vec<f64>,
}

pub fn golden() -> Golden {
    serde_json::from_str(GOLDEN).expect("embedded golden data is valid")
}

/// Tables to print plus every cell that missed its tolerance.
#[derive(Debug, Default)]
pub struct Reproduction {
    pub tables: Vec<Table>,
    pub failures: Vec<String>,
}

impl Reproduction {
    fn check(&mut self, ok: bool, cell: impl FnOnce() -> String) -> bool {
        if !ok {
            self.failures.push(cell());
        }
        ok
    }
}

pub fn reproduce(table: TableId) -> Result<Reproduction, CliError> {
    let golden = golden();
    match table {
        TableId::Table1 => table1(&golden.table1),
        TableId::Table2 => table2(&golden.table2),
        TableId::Table3 => table3(&golden.table3),
        TableId::AppendixA => appendix_a(&golden.appendix_a),
    }
}

fn ms(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1e3)
}

struct Priced {
    price: f64,
    wall: Duration,
}

#[allow(clippy::too_many_arguments)]
fn price(
    spec: &OptionSpec,
    params: &ModelParams,
    space: &SpaceGrid,
    time: &TimeGrid,
    solver: SolverKind,
    spot: f64,
    options: &PricingOptions,
) -> Result<Priced, CliError> {
    let r = price_american_with(spec, params, space, time, &SchemeParams::default(), solver, spot, options)?;
    Ok(Priced { price: r.price, wall: r.wall_time })
}

const BS_PUT: SolverKind = SolverKind::BrennanSchwartz(Direction::Downward);

fn table1(g: &Table1) -> Result<Reproduction, CliError> {
    let params = ModelParams::constant(g.rate, g.drift, g.vol);
    let solvers = [SolverKind::PolicyIteration, SolverKind::Luul, BS_PUT];

    // sequential, so the reported timings are not distorted by contention
    let results = g.rows.iter().map(|row| -> Result<Vec<[Priced; 3]>, CliError> {
        let t = row.days as f64 / 365.0;
        let spec = OptionSpec::american(Payoff::Put { strike: g.strike }, t)?;
        let hi = default_upper_bound(g.spot, g.strike, g.vol, g.drift, t);
        let space = SpaceGrid::hyperbolic(0.0, hi, g.space_steps, g.strike, DEFAULT_STRETCH)?;
        let grids = [TimeGrid::sqrt_law(t, g.time_steps)?, TimeGrid::constant(t, g.time_steps)?];
        grids
            .iter()
            .map(|time| {
                let p = |s| price(&spec, &params, &space, time, s, g.spot, &PricingOptions::default());
                Ok([p(solvers[0])?, p(solvers[1])?, p(solvers[2])?])
            })
            .collect()
    });

    let mut out = Reproduction::default();
    let mut table = Table::new(
        "Table 1: negative-rate American put (error = price − reference; BS is the downward sweep)",
        &["T", "reference", "time_steps", "solver", "price", "error", "published_error", "ms", "published_ms", "check"],
    );
    for (row, priced) in g.rows.iter().zip(results) {
        let priced = priced?;
        for (kind, cells, p) in [("varying", &row.varying, &priced[0]), ("constant", &row.constant, &priced[1])] {
            let [pi, luul, bs] = p;
            let err = |x: &Priced| x.price - row.reference;
            let label = format!("{}/365", row.days);
            let assessed = kind == "constant";
            let checks = [
                // PI: agrees with LUUL
                (luul.price - pi.price).abs() <= 1e-10 * luul.price,
                err(luul).abs() <= 5e-3,
                err(bs).abs() >= 20.0 * err(luul).abs(),
            ];
            let names = ["|LUUL − PI| ≤ 1e-10·price", "|LUUL − reference| ≤ 5e-3", "|BS error| ≥ 20·|LUUL error|"];
            for (i, ((solver, x), (published_err, published_ms))) in [("PI", pi), ("LUUL", luul), ("BS", bs)]
                .into_iter()
                .zip([(cells.pi, cells.ms.pi), (cells.luul, cells.ms.luul), (cells.bs, cells.ms.bs)])
                .enumerate()
            {
                let check = if assessed {
                    pass(out.check(checks[i], || format!("table1 T={label} {solver}: {}", names[i])))
                } else {
                    "-".to_string()
                };
                table.push(vec![
                    label.clone(),
                    num(row.reference),
                    kind.to_string(),
                    solver.to_string(),
                    format!("{:.9}", x.price),
                    sci(err(x)),
                    sci(published_err),
                    ms(x.wall),
                    num(published_ms),
                    check,
                ]);
            }
        }
    }
    out.tables.push(table);
    Ok(out)
}

fn table2(g: &Table2) -> Result<Reproduction, CliError> {
    // unstated in the source: uniform [0, 4K] and T = 1
    let maturity = 1.0;
    let params = ModelParams::constant(g.rate, g.drift, g.vol);
    let space = SpaceGrid::uniform(0.0, 4.0 * g.strike, g.space_steps)?;
    let time = TimeGrid::constant(maturity, g.time_steps)?;
    let mut out = Reproduction::default();
    let mut table = Table::new(
        "Table 2: small grid, PI vs LUUL (absolute prices depend on the unstated grid bounds)",
        &["option", "pi", "luul", "difference", "published_pi", "published_luul", "published_difference", "check"],
    );
    for (name, payoff, cells) in [
        ("call", Payoff::Call { strike: g.strike }, &g.call),
        ("put", Payoff::Put { strike: g.strike }, &g.put),
    ] {
        let spec = OptionSpec::american(payoff, maturity)?;
        let opts = PricingOptions::default();
        let pi = price(&spec, &params, &space, &time, SolverKind::PolicyIteration, g.spot, &opts)?.price;
        let luul = price(&spec, &params, &space, &time, SolverKind::Luul, g.spot, &opts)?.price;
        let ok = (pi - luul).abs() <= 5e-15 * pi;
        let ok = out.check(ok, || format!("table2 {name}: |PI − LUUL| = {:e} > 5e-15·price", pi - luul));
        table.push(vec![
            name.to_string(),
            num(pi),
            num(luul),
            sci(pi - luul),
            num(cells.pi),
            num(cells.luul),
            sci(cells.difference),
            pass(ok),
        ]);
    }
    out.tables.push(table);
    Ok(out)
}

fn table3(g: &Table3) -> Result<Reproduction, CliError> {
    let params = ModelParams::constant(g.rate, g.drift, g.vol);
    let space = SpaceGrid::uniform(0.0, g.x_max, g.space_steps)?;
    let spec = OptionSpec::american(
        Payoff::Butterfly { lower_strike: g.lower_strike, upper_strike: g.upper_strike },
        g.maturity,
    )?;
    let psor_opts = PricingOptions {
        psor: PsorSettings { omega: 1.2, tol: 1e-15, max_iters: 200_000 },
        ..Default::default()
    };
    let mut out = Reproduction::default();
    let mut table = Table::new(
        "Table 3: American butterfly (difference = solver − PSOR; n counts time points; BS is the upward sweep)",
        &["n", "steps", "solver", "price", "difference", "published_price", "published_difference", "us", "published_us", "check"],
    );
    for row in &g.rows {
        let steps = row.n - 1;
        let time = TimeGrid::constant(g.maturity, steps)?;
        let run = |s, o: &PricingOptions| price(&spec, &params, &space, &time, s, g.spot, o);
        let psor = run(SolverKind::Psor, &psor_opts)?;
        let bs = run(SolverKind::BrennanSchwartz(Direction::Upward), &PricingOptions::default())?;
        let luul = run(SolverKind::Luul, &PricingOptions::default())?;
        let pi = run(SolverKind::PolicyIteration, &PricingOptions::default())?;
        let n = row.n;

        let bs_ok = out.check((bs.price - psor.price).abs() >= 0.5, || format!("table3 n={n} BS: |BS − PSOR| < 0.5"));
        let luul_tol = if n == 64 { 1e-7 } else { 1e-5 };
        let luul_ok = out.check((luul.price - row.luul.price).abs() <= 1e-4, || {
            format!("table3 n={n} LUUL: price {:.6} vs {}", luul.price, row.luul.price)
        }) & out.check((luul.price - psor.price).abs() <= luul_tol, || {
            format!("table3 n={n} LUUL: |LUUL − PSOR| > {luul_tol:e}")
        });
        let pi_ok = out.check((pi.price - psor.price).abs() <= 1e-9, || format!("table3 n={n} PI: |PI − PSOR| > 1e-9"));

        let us = |p: &Priced| format!("{:.0}", p.wall.as_secs_f64() * 1e6);
        for (solver, p, published, ok) in [
            ("BS", &bs, Some(&row.bs), bs_ok),
            ("LUUL", &luul, Some(&row.luul), luul_ok),
            ("PI", &pi, Some(&row.pi), pi_ok),
            ("PSOR", &psor, None, true),
        ] {
            table.push(vec![
                n.to_string(),
                steps.to_string(),
                solver.to_string(),
                format!("{:.6}", p.price),
                sci(p.price - psor.price),
                published.map_or(String::new(), |c| format!("{:.6}", c.price)),
                published.map_or(String::new(), |c| sci(c.difference)),
                us(p),
                published.map_or(String::new(), |c| num(c.us)),
                if published.is_some() { pass(ok) } else { "-".to_string() },
            ]);
        }
    }
    out.tables.push(table);
    Ok(out)
}

/// Rounds to `digits` significant figures.
fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let p = digits - 1 - x.abs().log10().floor() as i32;
    let s = 10f64.powi(p);
    (x * s).round() / s
}

fn appendix_a(g: &AppendixA) -> Result<Reproduction, CliError> {
    let space = SpaceGrid::uniform(0.0, g.x_max, g.space_steps)?;
    let time = TimeGrid::constant(g.maturity, g.time_steps)?;
    let params = ModelParams::constant(g.rate, g.drift, g.vol);
    let spec = OptionSpec::american(
        Payoff::Butterfly { lower_strike: g.lower_strike, upper_strike: g.upper_strike },
        g.maturity,
    )?;
    let m = assemble_matrix(&space, &params, time.step(time.steps()), 0.0, &SchemeParams::default())?;
    let payoff = payoff_values(&spec, &space);
    let rhs = trapezoidal_rhs(&m, &payoff)?;
    let problem = transform_to_standard(&m, &rhs, &payoff)?;
    let (mt, v) = (problem.matrix(), problem.rhs());

    let factors = luul_decompose(mt)?;
    let pi = solve_policy_iteration(mt, v, 100)?.z;
    let luul = solve_double_sweep(&factors, v)?.z;
    let fast = solve_fast_double_sweep(mt, v)?.z;
    let down = solve_classic_bs(&factors, v, Direction::Downward)?.z;
    let up = solve_classic_bs(&factors, v, Direction::Upward)?.z;
    let psor = solve_psor(mt, v, 1.2, 1e-15, 200_000)?.z;

    let mut out = Reproduction::default();
    let mut matrix = Table::new(
        "Appendix A: assembled system (deviation = max over a, b, c, g, F)",
        &["i", "a", "b", "c", "g", "F", "deviation", "check"],
    );
    for i in 0..m.size() {
        let ours = [m.lower()[i], m.diag()[i], m.upper()[i], rhs[i], payoff[i]];
        let printed = [g.a[i], g.b[i], g.c[i], g.g[i], g.payoff[i]];
        let dev = ours.iter().zip(&printed).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let ok = out.check(dev <= 1e-12, || format!("appendixA row {i}: matrix/rhs deviation {dev:e}"));
        let mut cells = vec![i.to_string()];
        cells.extend(ours.iter().map(|x| num(*x)));
        cells.extend([sci(dev), pass(ok)]);
        matrix.push(cells);
    }

    let mut solutions = Table::new(
        "Appendix A: stage solutions (f = z + F; differences against PI)",
        &[
            "i", "f_pi", "published_f", "luul_minus_pi", "published_error", "fast_minus_pi", "bs_down_minus_pi",
            "bs_up_minus_pi", "psor_minus_pi", "check",
        ],
    );
    for i in 0..m.size() {
        let f_pi = pi[i] + payoff[i];
        let err = luul[i] - pi[i];
        let pi_ok = out.check((f_pi - g.f_star[i]).abs() <= 1e-12, || format!("appendixA row {i}: PI solution"));
        // printed as magnitudes to three significant figures
        let err_ok = out.check((round_sig(err.abs(), 3) - g.luul_error[i]).abs() <= 1e-9, || {
            format!("appendixA row {i}: LUUL error {err:e} vs {:e}", g.luul_error[i])
        });
        solutions.push(vec![
            i.to_string(),
            num(f_pi),
            num(g.f_star[i]),
            sci(err),
            sci(g.luul_error[i]),
            sci(fast[i] - pi[i]),
            sci(down[i] - pi[i]),
            sci(up[i] - pi[i]),
            sci(psor[i] - pi[i]),
            pass(pi_ok && err_ok),
        ]);
    }
    out.tables.push(matrix);
    out.tables.push(solutions);
    Ok(out)
}
