//! Backward TR-BDF2 time stepping of the American (or European) pricing
//! problem.
//!
//! Each step `j = n..1` solves two complementarity problems with the same
//! matrix: the trapezoidal stage `M f* ≥ g`, then the BDF2 stage
//! `M f^{j−1} ≥ h`, both with `f ≥ F`. The matrix and its factors are built
//! once per step, and reused across steps when the coefficients do not
//! depend on time and the step length repeats.

mod analytic;
mod interp;

use std::ops::RangeInclusive;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::discretization::{assemble_weighted, ModelParams, SchemeParams, TridiagonalMatrix};
use crate::error::{Error, Result};
use crate::grid::{SpaceGrid, TimeGrid};
use crate::solvers::{
    default_region_tol, double_sweep_into, exercise_region, fast_double_sweep_into,
    planned_sweep_into, policy_iteration_into, psor_into, single_sweep_into, Direction,
    LuFactors, LuulFactors, PolicyWorkspace, PsorSettings, SolverKind, SweepWorkspace,
    UlFactors, DEFAULT_MAX_ITERS,
};

pub use analytic::black_scholes;
pub use interp::interpolate_at;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Payoff {
    Call { strike: f64 },
    Put { strike: f64 },
    /// `max(x−K₁,0) − 2·max(x−(K₁+K₂)/2,0) + max(x−K₂,0)`.
    Butterfly { lower_strike: f64, upper_strike: f64 },
    /// `|x − K|`.
    Straddle { strike: f64 },
}

impl Payoff {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Payoff::Call { strike } => (x - strike).max(0.0),
            Payoff::Put { strike } => (strike - x).max(0.0),
            Payoff::Butterfly { lower_strike: k1, upper_strike: k2 } => {
                (x - k1).max(0.0) - 2.0 * (x - 0.5 * (k1 + k2)).max(0.0) + (x - k2).max(0.0)
            }
            Payoff::Straddle { strike } => (x - strike).abs(),
        }
    }

    /// Where the payoff has its most important kink; the natural center of
    /// a stretched grid.
    pub fn center(&self) -> f64 {
        match *self {
            Payoff::Call { strike } | Payoff::Put { strike } | Payoff::Straddle { strike } => strike,
            Payoff::Butterfly { lower_strike, upper_strike } => 0.5 * (lower_strike + upper_strike),
        }
    }

    /// Largest strike, used to size the grid.
    pub fn max_strike(&self) -> f64 {
        match *self {
            Payoff::Call { strike } | Payoff::Put { strike } | Payoff::Straddle { strike } => strike,
            Payoff::Butterfly { upper_strike, .. } => upper_strike,
        }
    }

    /// Sweep orientation of the classic Brennan–Schwartz algorithm for this
    /// payoff: downward for puts and straddles, upward for calls and
    /// butterflies.
    pub fn classic_direction(&self) -> Direction {
        match self {
            Payoff::Call { .. } | Payoff::Butterfly { .. } => Direction::Upward,
            Payoff::Put { .. } | Payoff::Straddle { .. } => Direction::Downward,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |k: f64, field| {
            if k > 0.0 && k.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("strike {k} must be > 0")))
            }
        };
        match *self {
            Payoff::Call { strike } | Payoff::Put { strike } | Payoff::Straddle { strike } => {
                positive(strike, "strike")
            }
            Payoff::Butterfly { lower_strike, upper_strike } => {
                positive(lower_strike, "lower_strike")?;
                positive(upper_strike, "upper_strike")?;
                if lower_strike < upper_strike {
                    Ok(())
                } else {
                    Err(Error::invalid(
                        "upper_strike",
                        format!("butterfly needs {lower_strike} < {upper_strike}"),
                    ))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exercise {
    American,
    European,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOptionSpec")]
pub struct OptionSpec {
    pub payoff: Payoff,
    pub maturity: f64,
    pub exercise: Exercise,
}

#[derive(Deserialize)]
struct RawOptionSpec {
    payoff: Payoff,
    maturity: f64,
    exercise: Exercise,
}

impl TryFrom<RawOptionSpec> for OptionSpec {
    type Error = Error;

    fn try_from(raw: RawOptionSpec) -> Result<Self> {
        OptionSpec::new(raw.payoff, raw.maturity, raw.exercise)
    }
}

impl OptionSpec {
    pub fn new(payoff: Payoff, maturity: f64, exercise: Exercise) -> Result<Self> {
        payoff.validate()?;
        if !(maturity > 0.0 && maturity.is_finite()) {
            return Err(Error::invalid("maturity", format!("{maturity} must be > 0")));
        }
        Ok(OptionSpec { payoff, maturity, exercise })
    }

    pub fn american(payoff: Payoff, maturity: f64) -> Result<Self> {
        OptionSpec::new(payoff, maturity, Exercise::American)
    }
}

/// Payoff sampled at every grid node.
pub fn payoff_values(spec: &OptionSpec, grid: &SpaceGrid) -> Vec<f64> {
    grid.nodes().iter().map(|&x| spec.payoff.value(x)).collect()
}

/// Upper grid bound `max(S, K)·exp(4σ√T + |μ|T)`.
pub fn default_upper_bound(spot: f64, strike: f64, vol: f64, drift: f64, maturity: f64) -> f64 {
    spot.max(strike) * (4.0 * vol * maturity.sqrt() + drift.abs() * maturity).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricingOptions {
    /// Keep `f^j` for every time index.
    pub retain_surface: bool,
    /// Record the exercise bands after every step.
    pub record_bands: bool,
    /// Let the double sweep skip a sweep when the sign pattern allows.
    pub plan_sweeps: bool,
    pub psor: PsorSettings,
    pub max_policy_iters: usize,
}

impl Default for PricingOptions {
    fn default() -> Self {
        PricingOptions {
            retain_surface: false,
            record_bands: false,
            plan_sweeps: false,
            psor: PsorSettings::default(),
            max_policy_iters: DEFAULT_MAX_ITERS,
        }
    }
}

/// Exercise bands of the solution `f^{j−1}` produced by step `j`: maximal
/// runs of in-the-money nodes where the value sits on the payoff.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepBands {
    pub step: usize,
    pub time: f64,
    pub bands: Vec<RangeInclusive<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolverStats {
    pub stages: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
    /// Number of matrix assemblies (and factorizations).
    pub assemblies: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceResult {
    pub price: f64,
    pub solver: Option<SolverKind>,
    /// Values `f^0` at the grid nodes.
    pub values: Vec<f64>,
    /// `surface[j] = f^j` when retained.
    pub surface: Option<Vec<Vec<f64>>>,
    pub exercise_bands: Option<Vec<StepBands>>,
    pub stats: SolverStats,
    pub wall_time: Duration,
}

/// Prices an American option with the given LCP solver.
#[allow(clippy::too_many_arguments)]
pub fn price_american(
    spec: &OptionSpec,
    params: &ModelParams,
    space: &SpaceGrid,
    time: &TimeGrid,
    scheme: &SchemeParams,
    solver: SolverKind,
    spot: f64,
) -> Result<PriceResult> {
    price_american_with(spec, params, space, time, scheme, solver, spot, &PricingOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn price_american_with(
    spec: &OptionSpec,
    params: &ModelParams,
    space: &SpaceGrid,
    time: &TimeGrid,
    scheme: &SchemeParams,
    solver: SolverKind,
    spot: f64,
    options: &PricingOptions,
) -> Result<PriceResult> {
    step_backward(spec, params, space, time, scheme, StageMode::American(solver), spot, options)
}

/// Same stepping with plain linear solves and no early-exercise constraint.
pub fn price_european(
    spec: &OptionSpec,
    params: &ModelParams,
    space: &SpaceGrid,
    time: &TimeGrid,
    scheme: &SchemeParams,
    spot: f64,
) -> Result<PriceResult> {
    step_backward(spec, params, space, time, scheme, StageMode::European, spot, &PricingOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum StageMode {
    American(SolverKind),
    European,
}

/// Matrix and factors for one stage weight.
struct StageSystem {
    matrix: TridiagonalMatrix,
    /// `M·F`, subtracted from every stage right-hand side.
    m_payoff: Vec<f64>,
    /// Only the halves the solver reads are computed; the others are empty.
    factors: LuulFactors,
}

impl StageSystem {
    fn new(matrix: TridiagonalMatrix, payoff: &[f64], mode: StageMode) -> Result<Self> {
        let m_payoff = matrix.mul_vec(payoff)?;
        let (need_lu, need_ul) = match mode {
            StageMode::European | StageMode::American(SolverKind::ExplicitMax) => (true, false),
            StageMode::American(SolverKind::Luul) => (true, true),
            StageMode::American(SolverKind::BrennanSchwartz(Direction::Upward)) => (true, false),
            StageMode::American(SolverKind::BrennanSchwartz(Direction::Downward)) => (false, true),
            StageMode::American(_) => (false, false),
        };
        let lu = if need_lu {
            LuFactors::new(&matrix)?
        } else {
            LuFactors { l_diag: Vec::new(), l_sub: Vec::new(), u_super: Vec::new() }
        };
        let ul = if need_ul {
            UlFactors::new(&matrix)?
        } else {
            UlFactors { u_diag: Vec::new(), u_super: Vec::new(), l_sub: Vec::new() }
        };
        Ok(StageSystem { matrix, m_payoff, factors: LuulFactors { lu, ul } })
    }
}

struct StepSystem {
    k: f64,
    trapezoidal: StageSystem,
    /// Present only when the BDF2 weight differs from the trapezoidal one.
    bdf2: Option<StageSystem>,
}

impl StepSystem {
    fn bdf2(&self) -> &StageSystem {
        self.bdf2.as_ref().unwrap_or(&self.trapezoidal)
    }
}

#[derive(Default)]
struct Buffers {
    rhs: Vec<f64>,
    v: Vec<f64>,
    z: Vec<f64>,
    zbar: Vec<f64>,
    y: Vec<f64>,
    sweep: SweepWorkspace,
    policy: PolicyWorkspace,
}

#[allow(clippy::too_many_arguments)]
fn step_backward(
    spec: &OptionSpec,
    params: &ModelParams,
    space: &SpaceGrid,
    time: &TimeGrid,
    scheme: &SchemeParams,
    mode: StageMode,
    spot: f64,
    options: &PricingOptions,
) -> Result<PriceResult> {
    let start = Instant::now();
    if (time.maturity() - spec.maturity).abs() > 1e-12 * spec.maturity {
        return Err(Error::invalid(
            "maturity",
            format!("time grid ends at {} but the option expires at {}", time.maturity(), spec.maturity),
        ));
    }
    if !(spot >= space.lower() && spot <= space.upper()) {
        return Err(Error::SpotOutOfRange {
            spot,
            lo: space.lower(),
            hi: space.upper(),
        });
    }

    let n_nodes = space.len();
    let payoff = payoff_values(spec, space);
    let mut f = payoff.clone();
    let mut f_star = vec![0.0; n_nodes];
    let mut buf = Buffers {
        rhs: vec![0.0; n_nodes],
        v: vec![0.0; n_nodes],
        z: vec![0.0; n_nodes],
        zbar: vec![0.0; n_nodes],
        y: vec![0.0; n_nodes],
        ..Buffers::default()
    };
    let mut stats = SolverStats::default();
    let n = time.steps();
    let mut surface = options.retain_surface.then(|| {
        let mut s = vec![Vec::new(); n + 1];
        s[n] = f.clone();
        s
    });
    let mut bands = options.record_bands.then(Vec::new);
    let reusable = params.is_time_homogeneous();
    let mut system: Option<StepSystem> = None;

    for j in (1..=n).rev() {
        let k = time.step(j);
        let t_mid = 0.5 * (time.times()[j] + time.times()[j - 1]);
        let fresh = match &system {
            Some(s) => !(reusable && (s.k - k).abs() <= 1e-12 * k),
            None => true,
        };
        if fresh {
            let build = |w: f64| -> Result<StageSystem> {
                let matrix = assemble_weighted(space, params, w, t_mid)?;
                StageSystem::new(matrix, &payoff, mode)
            };
            let w_tr = scheme.trapezoidal_weight(k);
            let w_bdf = scheme.bdf2_weight(k);
            let trapezoidal = build(w_tr).map_err(|e| e.at_step(j))?;
            let bdf2 = if (w_tr - w_bdf).abs() > 1e-14 * w_tr {
                Some(build(w_bdf).map_err(|e| e.at_step(j))?)
            } else {
                None
            };
            stats.assemblies += 1;
            system = Some(StepSystem { k, trapezoidal, bdf2 });
        }
        let sys = system.as_ref().expect("assembled above");

        // trapezoidal stage: g = (2I − M) f^j
        {
            let m = &sys.trapezoidal.matrix;
            for i in 0..n_nodes {
                buf.rhs[i] = 2.0 * f[i] - m.row_dot(i, &f);
            }
        }
        let it = solve_stage(&sys.trapezoidal, mode, &payoff, &mut buf, &mut f_star, options)
            .map_err(|e| e.at_step(j))?;
        stats.record(it);

        // BDF2 stage
        let a = scheme.alpha;
        let w_star = 1.0 / (a * (2.0 - a));
        let w_cur = (1.0 - a) * (1.0 - a) / (a * (2.0 - a));
        for i in 0..n_nodes {
            buf.rhs[i] = w_star * f_star[i] - w_cur * f[i];
        }
        let it = solve_stage(sys.bdf2(), mode, &payoff, &mut buf, &mut f, options)
            .map_err(|e| e.at_step(j))?;
        stats.record(it);

        if let Some(s) = surface.as_mut() {
            s[j - 1] = f.clone();
        }
        if let Some(b) = bands.as_mut() {
            b.push(StepBands {
                step: j,
                time: time.times()[j - 1],
                bands: exercise_bands(&buf.z, &payoff),
            });
        }
    }

    let price = interpolate_at(&f, space, spot)?;
    Ok(PriceResult {
        price,
        solver: match mode {
            StageMode::American(s) => Some(s),
            StageMode::European => None,
        },
        values: f,
        surface,
        exercise_bands: bands,
        stats,
        wall_time: start.elapsed(),
    })
}

/// Bands of `z ≈ 0` restricted to nodes with a positive payoff; deep
/// out-of-the-money values can underflow to zero without being exercised.
pub fn exercise_bands(z: &[f64], payoff: &[f64]) -> Vec<RangeInclusive<usize>> {
    let tol = default_region_tol(z);
    let masked: Vec<f64> = z
        .iter()
        .zip(payoff)
        .map(|(&zi, &fi)| if fi > 0.0 { zi } else { f64::INFINITY })
        .collect();
    exercise_region(&masked, tol)
}

impl SolverStats {
    fn record(&mut self, iterations: usize) {
        self.stages += 1;
        self.total_iterations += iterations;
        self.max_iterations = self.max_iterations.max(iterations);
    }
}

/// Solves one stage with right-hand side `buf.rhs`, writing the new values
/// into `out`. Leaves `z = out − F` in `buf.z`. Returns the iteration count.
fn solve_stage(
    sys: &StageSystem,
    mode: StageMode,
    payoff: &[f64],
    buf: &mut Buffers,
    out: &mut [f64],
    options: &PricingOptions,
) -> Result<usize> {
    let n = payoff.len();
    let solver = match mode {
        StageMode::European => {
            linear_solve(sys, buf, out)?;
            for i in 0..n {
                buf.z[i] = out[i] - payoff[i];
            }
            return Ok(1);
        }
        StageMode::American(SolverKind::ExplicitMax) => {
            linear_solve(sys, buf, out)?;
            for i in 0..n {
                out[i] = out[i].max(payoff[i]);
                buf.z[i] = out[i] - payoff[i];
            }
            return Ok(1);
        }
        StageMode::American(s) => s,
    };

    for i in 0..n {
        buf.v[i] = buf.rhs[i] - sys.m_payoff[i];
    }
    let iterations = match solver {
        SolverKind::Luul => {
            let factors = &sys.factors;
            if options.plan_sweeps {
                planned_sweep_into(factors, &buf.v, &mut buf.z, &mut buf.sweep)?;
            } else {
                double_sweep_into(factors, &buf.v, &mut buf.z, &mut buf.sweep)?;
            }
            1
        }
        SolverKind::LuulFast => {
            fast_double_sweep_into(&sys.matrix, &buf.v, &mut buf.z, &mut buf.zbar, &mut buf.y)?;
            1
        }
        SolverKind::BrennanSchwartz(direction) => {
            let factors = &sys.factors;
            single_sweep_into(factors, &buf.v, direction, &mut buf.z, &mut buf.sweep)?;
            1
        }
        SolverKind::PolicyIteration => {
            policy_iteration_into(&sys.matrix, &buf.v, options.max_policy_iters, &mut buf.z, &mut buf.policy)?
        }
        SolverKind::Psor => {
            // warm start from the previous stage, already non-negative
            psor_into(&sys.matrix, &buf.v, &options.psor, &mut buf.z)?
        }
        SolverKind::ExplicitMax => unreachable!("handled above"),
    };
    for i in 0..n {
        out[i] = buf.z[i] + payoff[i];
    }
    Ok(iterations)
}

fn linear_solve(sys: &StageSystem, buf: &mut Buffers, out: &mut [f64]) -> Result<()> {
    let lu = &sys.factors.lu;
    lu.forward(&buf.rhs, &mut buf.y)?;
    lu.backward(&buf.y, out);
    Ok(())
}
