//! Solvers for the tridiagonal linear complementarity problem
//!
//! ```text
//! M z ≥ v,   z ≥ 0,   zᵀ(M z − v) = 0
//! ```
//!
//! The direct solvers ([`solve_double_sweep`], [`solve_fast_double_sweep`],
//! [`solve_classic_bs`]) run projected LU and/or ŪL̄ substitution sweeps.
//! [`solve_policy_iteration`] and [`solve_psor`] are iterative references and
//! [`brute_force_lcp`] enumerates active sets on small problems.

mod brute;
mod factors;
mod policy;
mod psor;
mod sweep;

use std::ops::RangeInclusive;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::discretization::TridiagonalMatrix;
use crate::error::{check_len, Error, Result};

pub use brute::{brute_force_lcp, MAX_ENUMERATION_SIZE};
pub use factors::{luul_decompose, LuFactors, LuulFactors, UlFactors};
pub use policy::{solve_policy_iteration, DEFAULT_MAX_ITERS};
pub use psor::{solve_psor, solve_psor_from, PsorSettings};
pub use sweep::{
    plan_sweeps, solve_classic_bs, solve_double_sweep, solve_double_sweep_planned,
    solve_fast_double_sweep, SweepPlan,
};

pub(crate) use policy::{policy_iteration_into, PolicyWorkspace};
pub(crate) use psor::psor_into;
pub(crate) use sweep::{
    double_sweep_into, fast_double_sweep_into, planned_sweep_into, single_sweep_into,
    SweepWorkspace,
};

/// Orientation of a single Brennan–Schwartz sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// ŪL̄ factorization, projected substitution from the first row up.
    /// Exact when the zero set starts at index 0 (American put).
    Downward,
    /// LU factorization, projected substitution from the last row down.
    /// Exact when the zero set ends at the last index (American call).
    Upward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Two-phase LU/ŪL̄ double sweep.
    Luul,
    /// Fused double sweep.
    LuulFast,
    /// Single-sweep Brennan–Schwartz.
    BrennanSchwartz(Direction),
    PolicyIteration,
    Psor,
    /// Unconstrained solve followed by `max(f, F)`; only meaningful for
    /// time stepping, never used as an LCP solver.
    ExplicitMax,
}

impl SolverKind {
    pub fn label(&self) -> &'static str {
        match self {
            SolverKind::Luul => "LUUL",
            SolverKind::LuulFast => "LUUL-fast",
            SolverKind::BrennanSchwartz(Direction::Downward) => "BS-down",
            SolverKind::BrennanSchwartz(Direction::Upward) => "BS-up",
            SolverKind::PolicyIteration => "PI",
            SolverKind::Psor => "PSOR",
            SolverKind::ExplicitMax => "explicit-max",
        }
    }
}

/// `M z ≥ v, z ≥ 0, zᵀ(Mz − v) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LcpProblem {
    matrix: TridiagonalMatrix,
    rhs: Vec<f64>,
}

impl LcpProblem {
    pub fn new(matrix: TridiagonalMatrix, rhs: Vec<f64>) -> Result<Self> {
        check_len(matrix.size(), rhs.len())?;
        let finite = |xs: &[f64]| xs.iter().position(|x| !x.is_finite());
        if let Some(row) = finite(&rhs)
            .or_else(|| finite(matrix.lower()))
            .or_else(|| finite(matrix.diag()))
            .or_else(|| finite(matrix.upper()))
        {
            return Err(Error::NonFinite { row });
        }
        Ok(LcpProblem { matrix, rhs })
    }

    pub fn matrix(&self) -> &TridiagonalMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// `min(z_i, (Mz − v)_i)` for each row; zero at an exact solution.
    pub fn complementarity_residual(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rhs.len(), z.len())?;
        Ok((0..z.len())
            .map(|i| z[i].min(self.matrix.row_dot(i, z) - self.rhs[i]))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub z: Vec<f64>,
    pub solver: SolverKind,
    /// 1 for direct solvers.
    pub iterations: usize,
    /// Sweeps run by a direct solver; `None` for iterative ones.
    pub plan: Option<SweepPlan>,
    pub wall_time: Duration,
}

impl SolveReport {
    fn direct(z: Vec<f64>, solver: SolverKind, plan: SweepPlan, start: Instant) -> Self {
        SolveReport {
            z,
            solver,
            iterations: 1,
            plan: Some(plan),
            wall_time: start.elapsed(),
        }
    }
}

/// Default band tolerance for [`exercise_region`]: `1e-13·max(1, ‖z‖∞)`.
pub fn default_region_tol(z: &[f64]) -> f64 {
    1e-13 * z.iter().fold(1.0f64, |s, x| s.max(x.abs()))
}

/// Maximal runs of consecutive indices with `z_i ≤ tol`.
pub fn exercise_region(z: &[f64], tol: f64) -> Vec<RangeInclusive<usize>> {
    let mut bands = Vec::new();
    let mut start = None;
    for (i, &x) in z.iter().enumerate() {
        match (x <= tol, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                bands.push(s..=i - 1);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        bands.push(s..=z.len() - 1);
    }
    bands
}

/// JSON debug dump of a problem and its solution, laid out as
/// `{"a", "b", "c", "v", "F", "solution"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LcpDump {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub v: Vec<f64>,
    #[serde(rename = "F", skip_serializing_if = "Option::is_none", default)]
    pub payoff: Option<Vec<f64>>,
    pub solution: Vec<f64>,
}

impl LcpDump {
    pub fn new(problem: &LcpProblem, payoff: Option<&[f64]>, solution: &[f64]) -> Self {
        let m = problem.matrix();
        LcpDump {
            a: m.lower().to_vec(),
            b: m.diag().to_vec(),
            c: m.upper().to_vec(),
            v: problem.rhs().to_vec(),
            payoff: payoff.map(<[f64]>::to_vec),
            solution: solution.to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dump contains only finite numbers")
    }
}
