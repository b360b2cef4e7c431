//! Python bindings: grids, the stage matrix, every LCP solver and the
//! American pricer. Build with `maturin develop` (module name `amlcp`).

use amlcp::discretization::{self as disc, ModelParams, SchemeParams};
use amlcp::grid;
use amlcp::pricer::{self, Exercise, OptionSpec, Payoff, PricingOptions};
use amlcp::solvers::{self, Direction, SolverKind, SweepPlan};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: amlcp::Error) -> PyErr {
    match e {
        amlcp::Error::NotConverged { .. } | amlcp::Error::NoFeasibleActiveSet { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn direction(name: &str) -> PyResult<Direction> {
    match name {
        "down" | "downward" => Ok(Direction::Downward),
        "up" | "upward" => Ok(Direction::Upward),
        _ => Err(PyValueError::new_err(format!("direction must be 'down' or 'up', got {name:?}"))),
    }
}

#[pyclass(name = "SpaceGrid", module = "amlcp", frozen, from_py_object)]
#[derive(Clone)]
pub struct PySpaceGrid(pub grid::SpaceGrid);

#[pymethods]
impl PySpaceGrid {
    #[new]
    fn new(nodes: Vec<f64>) -> PyResult<Self> {
        grid::SpaceGrid::from_nodes(nodes).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn uniform(x_min: f64, x_max: f64, m: usize) -> PyResult<Self> {
        grid::SpaceGrid::uniform(x_min, x_max, m).map(Self).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (x_min, x_max, m, center, stretch = grid::DEFAULT_STRETCH))]
    fn hyperbolic(x_min: f64, x_max: f64, m: usize, center: f64, stretch: f64) -> PyResult<Self> {
        grid::SpaceGrid::hyperbolic(x_min, x_max, m, center, stretch).map(Self).map_err(py_err)
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.0.nodes().to_vec()
    }

    #[getter]
    fn intervals(&self) -> usize {
        self.0.intervals()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("SpaceGrid([{}, {}], m={})", self.0.lower(), self.0.upper(), self.0.intervals())
    }
}

#[pyclass(name = "TimeGrid", module = "amlcp", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyTimeGrid(pub grid::TimeGrid);

#[pymethods]
impl PyTimeGrid {
    #[new]
    fn new(times: Vec<f64>) -> PyResult<Self> {
        grid::TimeGrid::from_times(times).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn constant(maturity: f64, n: usize) -> PyResult<Self> {
        grid::TimeGrid::constant(maturity, n).map(Self).map_err(py_err)
    }

    /// Steps that shrink towards expiry, `t_j = T − (n−j)²T/n²`.
    #[staticmethod]
    fn sqrt_law(maturity: f64, n: usize) -> PyResult<Self> {
        grid::TimeGrid::sqrt_law(maturity, n).map(Self).map_err(py_err)
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times().to_vec()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.0.steps()
    }

    /// Length of step `j`, 1-based.
    fn step(&self, j: usize) -> PyResult<f64> {
        if j == 0 || j > self.0.steps() {
            return Err(PyValueError::new_err(format!("step index {j} outside 1..={}", self.0.steps())));
        }
        Ok(self.0.step(j))
    }

    fn __repr__(&self) -> String {
        format!("TimeGrid(T={}, n={})", self.0.maturity(), self.0.steps())
    }
}

#[pyclass(name = "TridiagonalMatrix", module = "amlcp", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyMatrix(pub disc::TridiagonalMatrix);

#[pymethods]
impl PyMatrix {
    /// Bands `a` (sub), `b` (main), `c` (super), all of length `n`;
    /// `a[0]` and `c[n−1]` are ignored.
    #[new]
    fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> PyResult<Self> {
        disc::TridiagonalMatrix::new(lower, diag, upper).map(Self).map_err(py_err)
    }

    #[getter]
    fn lower(&self) -> Vec<f64> {
        self.0.lower().to_vec()
    }

    #[getter]
    fn diag(&self) -> Vec<f64> {
        self.0.diag().to_vec()
    }

    #[getter]
    fn upper(&self) -> Vec<f64> {
        self.0.upper().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.size()
    }

    fn __matmul__(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.mul_vec(&x).map_err(py_err)
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        self.0.to_dense()
    }
}

/// Stage matrix `I + (αk/2)·L_h` for constant coefficients.
#[pyfunction]
#[pyo3(signature = (grid, rate, drift, vol, k, alpha = None))]
fn assemble_matrix(grid: &PySpaceGrid, rate: f64, drift: f64, vol: f64, k: f64, alpha: Option<f64>) -> PyResult<PyMatrix> {
    let scheme = alpha.map_or_else(SchemeParams::default, |alpha| SchemeParams { alpha });
    disc::assemble_matrix(&grid.0, &ModelParams::constant(rate, drift, vol), k, 0.0, &scheme)
        .map(PyMatrix)
        .map_err(py_err)
}

/// Right-hand side `v = (2I − M)F − M·F` of the first stage started from `F`.
#[pyfunction]
fn first_stage_rhs(matrix: &PyMatrix, payoff: Vec<f64>) -> PyResult<Vec<f64>> {
    let g = disc::trapezoidal_rhs(&matrix.0, &payoff).map_err(py_err)?;
    let problem = disc::transform_to_standard(&matrix.0, &g, &payoff).map_err(py_err)?;
    Ok(problem.rhs().to_vec())
}

/// Solves `Mz ≥ v, z ≥ 0, zᵀ(Mz − v) = 0` with the LU/ŪL̄ double sweep.
#[pyfunction]
fn solve_double_sweep(matrix: &PyMatrix, v: Vec<f64>) -> PyResult<Vec<f64>> {
    let f = solvers::luul_decompose(&matrix.0).map_err(py_err)?;
    solvers::solve_double_sweep(&f, &v).map(|r| r.z).map_err(py_err)
}

/// Fused double sweep; same result, one pass fewer.
#[pyfunction]
fn solve_fast_double_sweep(matrix: &PyMatrix, v: Vec<f64>) -> PyResult<Vec<f64>> {
    solvers::solve_fast_double_sweep(&matrix.0, &v).map(|r| r.z).map_err(py_err)
}

/// Single Brennan–Schwartz sweep, `direction` is `"down"` or `"up"`.
#[pyfunction]
fn solve_classic_bs(matrix: &PyMatrix, v: Vec<f64>, direction: &str) -> PyResult<Vec<f64>> {
    let d = self::direction(direction)?;
    let f = solvers::luul_decompose(&matrix.0).map_err(py_err)?;
    solvers::solve_classic_bs(&f, &v, d).map(|r| r.z).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (matrix, v, max_iters = solvers::DEFAULT_MAX_ITERS))]
fn solve_policy_iteration(matrix: &PyMatrix, v: Vec<f64>, max_iters: usize) -> PyResult<Vec<f64>> {
    solvers::solve_policy_iteration(&matrix.0, &v, max_iters).map(|r| r.z).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (matrix, v, omega = 1.2, tol = 1e-12, max_iters = 100_000))]
fn solve_psor(matrix: &PyMatrix, v: Vec<f64>, omega: f64, tol: f64, max_iters: usize) -> PyResult<Vec<f64>> {
    solvers::solve_psor(&matrix.0, &v, omega, tol, max_iters).map(|r| r.z).map_err(py_err)
}

/// Exhaustive active-set enumeration for small problems.
#[pyfunction]
fn brute_force_lcp(matrix: &PyMatrix, v: Vec<f64>) -> PyResult<Vec<f64>> {
    solvers::brute_force_lcp(&matrix.0, &v).map_err(py_err)
}

/// Which sweeps the sign pattern of `v` requires: `"both"`, `"lu-only"`
/// or `"ul-only"`.
#[pyfunction]
fn plan_sweeps(v: Vec<f64>) -> &'static str {
    match solvers::plan_sweeps(&v) {
        SweepPlan::Both => "both",
        SweepPlan::LuOnly => "lu-only",
        SweepPlan::UlOnly => "ul-only",
    }
}

/// Maximal index runs `(first, last)` where `z ≤ tol`.
#[pyfunction]
#[pyo3(signature = (z, tol = None))]
fn exercise_region(z: Vec<f64>, tol: Option<f64>) -> Vec<(usize, usize)> {
    let tol = tol.unwrap_or_else(|| solvers::default_region_tol(&z));
    solvers::exercise_region(&z, tol).into_iter().map(|r| (*r.start(), *r.end())).collect()
}

#[pyclass(name = "PriceResult", module = "amlcp", frozen, get_all)]
pub struct PyPriceResult {
    price: f64,
    solver: String,
    nodes: Vec<f64>,
    values: Vec<f64>,
    stages: usize,
    iterations: usize,
    assemblies: usize,
    wall_time: f64,
}

#[pymethods]
impl PyPriceResult {
    fn __repr__(&self) -> String {
        format!("PriceResult(price={}, solver={:?})", self.price, self.solver)
    }
}

fn solver_kind(name: &str, payoff: &Payoff) -> PyResult<SolverKind> {
    Ok(match name {
        "luul" => SolverKind::Luul,
        "luul-fast" => SolverKind::LuulFast,
        "bs" => SolverKind::BrennanSchwartz(payoff.classic_direction()),
        "bs-down" => SolverKind::BrennanSchwartz(Direction::Downward),
        "bs-up" => SolverKind::BrennanSchwartz(Direction::Upward),
        "pi" => SolverKind::PolicyIteration,
        "psor" => SolverKind::Psor,
        "explicit-max" => SolverKind::ExplicitMax,
        _ => return Err(PyValueError::new_err(format!("unknown solver {name:?}"))),
    })
}

fn make_payoff(kind: &str, strike: f64, upper_strike: Option<f64>) -> PyResult<Payoff> {
    Ok(match (kind, upper_strike) {
        ("put", _) => Payoff::Put { strike },
        ("call", _) => Payoff::Call { strike },
        ("straddle", _) => Payoff::Straddle { strike },
        ("butterfly", Some(upper_strike)) => Payoff::Butterfly { lower_strike: strike, upper_strike },
        ("butterfly", None) => return Err(PyValueError::new_err("a butterfly needs upper_strike")),
        _ => return Err(PyValueError::new_err(format!("unknown payoff {kind:?}"))),
    })
}

/// Payoff values at the grid nodes.
#[pyfunction]
#[pyo3(signature = (grid, payoff = "put", strike = 100.0, upper_strike = None))]
fn payoff_values(grid: &PySpaceGrid, payoff: &str, strike: f64, upper_strike: Option<f64>) -> PyResult<Vec<f64>> {
    let p = make_payoff(payoff, strike, upper_strike)?;
    Ok(grid.0.nodes().iter().map(|&x| p.value(x)).collect())
}

/// Prices an option by TR-BDF2 time stepping. `space` and `time` override
/// the default hyperbolic grid and constant steps.
#[pyfunction]
#[pyo3(signature = (
    payoff = "put", strike = 100.0, spot = 100.0, rate = 0.0, drift = 0.0, vol = 0.2, expiry = 1.0,
    solver = "luul", n = 100, m = 2000, upper_strike = None, exercise = "american",
    space = None, time = None,
))]
#[allow(clippy::too_many_arguments)]
fn price(
    py: Python<'_>,
    payoff: &str,
    strike: f64,
    spot: f64,
    rate: f64,
    drift: f64,
    vol: f64,
    expiry: f64,
    solver: &str,
    n: usize,
    m: usize,
    upper_strike: Option<f64>,
    exercise: &str,
    space: Option<PySpaceGrid>,
    time: Option<PyTimeGrid>,
) -> PyResult<PyPriceResult> {
    if !(vol >= 0.0 && vol.is_finite()) {
        return Err(PyValueError::new_err(format!("vol {vol} must be finite and >= 0")));
    }
    let payoff = make_payoff(payoff, strike, upper_strike)?;
    let exercise = match exercise {
        "american" => Exercise::American,
        "european" => Exercise::European,
        _ => return Err(PyValueError::new_err(format!("unknown exercise {exercise:?}"))),
    };
    let spec = OptionSpec::new(payoff, expiry, exercise).map_err(py_err)?;
    let kind = solver_kind(solver, &payoff)?;
    let space = match space {
        Some(g) => g.0,
        None => {
            let hi = pricer::default_upper_bound(spot, payoff.max_strike(), vol, drift, expiry);
            grid::SpaceGrid::hyperbolic(0.0, hi, m, payoff.center().min(hi), grid::DEFAULT_STRETCH).map_err(py_err)?
        }
    };
    let time = match time {
        Some(t) => t.0,
        None => grid::TimeGrid::constant(expiry, n).map_err(py_err)?,
    };
    let params = ModelParams::constant(rate, drift, vol);
    let scheme = SchemeParams::default();
    let r = py
        .detach(|| match exercise {
            Exercise::American => {
                pricer::price_american_with(&spec, &params, &space, &time, &scheme, kind, spot, &PricingOptions::default())
            }
            Exercise::European => pricer::price_european(&spec, &params, &space, &time, &scheme, spot),
        })
        .map_err(py_err)?;
    Ok(PyPriceResult {
        price: r.price,
        solver: r.solver.map_or("linear", |k| k.label()).to_string(),
        nodes: space.nodes().to_vec(),
        values: r.values,
        stages: r.stats.stages,
        iterations: r.stats.total_iterations,
        assemblies: r.stats.assemblies,
        wall_time: r.wall_time.as_secs_f64(),
    })
}

/// Closed-form European price with continuous yield `rate − drift`.
#[pyfunction]
fn black_scholes(is_call: bool, spot: f64, strike: f64, rate: f64, drift: f64, vol: f64, maturity: f64) -> f64 {
    pricer::black_scholes(is_call, spot, strike, rate, drift, vol, maturity)
}

#[pymodule(name = "amlcp")]
pub fn amlcp_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpaceGrid>()?;
    m.add_class::<PyTimeGrid>()?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyPriceResult>()?;
    m.add_function(wrap_pyfunction!(assemble_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(first_stage_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(solve_double_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(solve_fast_double_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(solve_classic_bs, m)?)?;
    m.add_function(wrap_pyfunction!(solve_policy_iteration, m)?)?;
    m.add_function(wrap_pyfunction!(solve_psor, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_lcp, m)?)?;
    m.add_function(wrap_pyfunction!(plan_sweeps, m)?)?;
    m.add_function(wrap_pyfunction!(exercise_region, m)?)?;
    m.add_function(wrap_pyfunction!(payoff_values, m)?)?;
    m.add_function(wrap_pyfunction!(price, m)?)?;
    m.add_function(wrap_pyfunction!(black_scholes, m)?)?;
    m.add("DEFAULT_STRETCH", grid::DEFAULT_STRETCH)?;
    Ok(())
}
