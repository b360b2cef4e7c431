//! Direct projected sweeps: the two-phase LU/ŪL̄ double sweep, its fused
//! single-pass form, the one-sided Brennan–Schwartz sweeps and the sign
//! pattern shortcut that selects between them.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::factors::{check_finite, LuulFactors};
use super::{Direction, SolveReport, SolverKind};
use crate::discretization::TridiagonalMatrix;
use crate::error::{check_len, Error, Result};

/// Which projected sweeps a direct solve runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepPlan {
    Both,
    LuOnly,
    UlOnly,
}

/// Scratch space for allocation-free repeated solves.
#[derive(Debug, Clone, Default)]
pub(crate) struct SweepWorkspace {
    y: Vec<f64>,
}

impl SweepWorkspace {
    fn buffer(&mut self, n: usize) -> &mut [f64] {
        self.y.resize(n, 0.0);
        &mut self.y
    }
}

/// LU sweep into `z` followed by the ŪL̄ sweep against the running maximum.
pub(crate) fn double_sweep_into(
    factors: &LuulFactors,
    v: &[f64],
    z: &mut [f64],
    ws: &mut SweepWorkspace,
) -> Result<()> {
    let y = ws.buffer(v.len());
    factors.lu.forward(v, y)?;
    factors.lu.projected_backward(y, z);
    factors.ul.backward(v, y)?;
    factors.ul.projected_forward_max(y, z);
    Ok(())
}

pub(crate) fn single_sweep_into(
    factors: &LuulFactors,
    v: &[f64],
    direction: Direction,
    z: &mut [f64],
    ws: &mut SweepWorkspace,
) -> Result<()> {
    let y = ws.buffer(v.len());
    match direction {
        Direction::Upward => {
            factors.lu.forward(v, y)?;
            factors.lu.projected_backward(y, z);
        }
        Direction::Downward => {
            factors.ul.backward(v, y)?;
            z.fill(0.0);
            factors.ul.projected_forward_max(y, z);
        }
    }
    Ok(())
}

pub(crate) fn planned_sweep_into(
    factors: &LuulFactors,
    v: &[f64],
    z: &mut [f64],
    ws: &mut SweepWorkspace,
) -> Result<SweepPlan> {
    let plan = plan_sweeps(v);
    match plan {
        SweepPlan::Both => double_sweep_into(factors, v, z, ws)?,
        SweepPlan::LuOnly => single_sweep_into(factors, v, Direction::Upward, z, ws)?,
        SweepPlan::UlOnly => single_sweep_into(factors, v, Direction::Downward, z, ws)?,
    }
    Ok(plan)
}

/// Double-sweep Brennan–Schwartz solve with precomputed LU/ŪL̄ factors.
///
/// Exact whenever the zero set of the solution is a single contiguous band
/// of indices (possibly touching either end, possibly empty); otherwise a
/// close approximation.
pub fn solve_double_sweep(factors: &LuulFactors, v: &[f64]) -> Result<SolveReport> {
    check_len(factors.size(), v.len())?;
    let start = Instant::now();
    let mut z = vec![0.0; v.len()];
    double_sweep_into(factors, v, &mut z, &mut SweepWorkspace::default())?;
    Ok(SolveReport::direct(z, SolverKind::Luul, SweepPlan::Both, start))
}

/// Same as [`solve_double_sweep`] but skips one of the sweeps when
/// [`plan_sweeps`] shows `v` has at most one sign change.
pub fn solve_double_sweep_planned(factors: &LuulFactors, v: &[f64]) -> Result<SolveReport> {
    check_len(factors.size(), v.len())?;
    let start = Instant::now();
    let mut z = vec![0.0; v.len()];
    let plan = planned_sweep_into(factors, v, &mut z, &mut SweepWorkspace::default())?;
    Ok(SolveReport::direct(z, SolverKind::Luul, plan, start))
}

/// Classic single-sweep Brennan–Schwartz. `Downward` runs the ŪL̄ sweep
/// (exercise region at the low end, the put case), `Upward` the LU sweep
/// (exercise region at the high end, the call case).
pub fn solve_classic_bs(factors: &LuulFactors, v: &[f64], direction: Direction) -> Result<SolveReport> {
    check_len(factors.size(), v.len())?;
    let start = Instant::now();
    let mut z = vec![0.0; v.len()];
    single_sweep_into(factors, v, direction, &mut z, &mut SweepWorkspace::default())?;
    let plan = match direction {
        Direction::Upward => SweepPlan::LuOnly,
        Direction::Downward => SweepPlan::UlOnly,
    };
    Ok(SolveReport::direct(z, SolverKind::BrennanSchwartz(direction), plan, start))
}

/// Fused decomposition and double sweep, without storing the factors.
pub fn solve_fast_double_sweep(m: &TridiagonalMatrix, v: &[f64]) -> Result<SolveReport> {
    check_len(m.size(), v.len())?;
    let start = Instant::now();
    let n = v.len();
    let mut z = vec![0.0; n];
    let mut zbar = vec![0.0; n];
    let mut y = vec![0.0; n];
    fast_double_sweep_into(m, v, &mut z, &mut zbar, &mut y)?;
    Ok(SolveReport::direct(z, SolverKind::LuulFast, SweepPlan::Both, start))
}

pub(crate) fn fast_double_sweep_into(
    m: &TridiagonalMatrix,
    v: &[f64],
    z: &mut [f64],
    zbar: &mut [f64],
    y: &mut [f64],
) -> Result<()> {
    let (a, b, c) = (m.lower(), m.diag(), m.upper());
    let n = v.len();
    let last = n - 1;
    let nonzero = |p: f64, row: usize| {
        if p != 0.0 && p.is_finite() {
            Ok(())
        } else {
            Err(Error::ZeroPivot { row })
        }
    };

    y[0] = b[0];
    nonzero(y[0], 0)?;
    z[0] = v[0];
    for i in 1..n {
        y[i] = b[i] - a[i] * c[i - 1] / y[i - 1];
        nonzero(y[i], i)?;
        z[i] = v[i] - a[i] * z[i - 1] / y[i - 1];
    }
    check_finite(z)?;
    z[last] = (z[last] / y[last]).max(0.0);
    for i in (0..last).rev() {
        z[i] = ((z[i] - c[i] * z[i + 1]) / y[i]).max(0.0);
    }

    y[last] = b[last];
    nonzero(y[last], last)?;
    zbar[last] = v[last];
    for i in (0..last).rev() {
        y[i] = b[i] - c[i] * a[i + 1] / y[i + 1];
        nonzero(y[i], i)?;
        zbar[i] = v[i] - c[i] * zbar[i + 1] / y[i + 1];
    }
    check_finite(zbar)?;
    zbar[0] /= y[0];
    z[0] = z[0].max(zbar[0]);
    for i in 1..n {
        zbar[i] = (zbar[i] - a[i] * z[i - 1]) / y[i];
        z[i] = z[i].max(zbar[i]);
    }
    Ok(())
}

/// Picks the sweeps needed for `v` from its sign pattern. Zeros carry the
/// previous sign. With at most one strict sign change the zero set of the
/// solution touches one end of the index range: a negative start puts it at
/// the bottom, which the ŪL̄ sweep resolves alone, and a positive start puts
/// it at the top, which the LU sweep resolves alone. An all-zero `v` has
/// `z = 0` and maps to the ŪL̄ sweep.
pub fn plan_sweeps(v: &[f64]) -> SweepPlan {
    let mut first = 0.0;
    let mut current = 0.0;
    let mut changes = 0usize;
    for &x in v {
        if x == 0.0 || x.is_nan() {
            continue;
        }
        let s = x.signum();
        if first == 0.0 {
            first = s;
        } else if s != current {
            changes += 1;
            if changes > 1 {
                return SweepPlan::Both;
            }
        }
        current = s;
    }
    if first > 0.0 {
        SweepPlan::LuOnly
    } else {
        SweepPlan::UlOnly
    }
}
