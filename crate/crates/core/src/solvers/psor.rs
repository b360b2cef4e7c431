use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{SolveReport, SolverKind};
use crate::discretization::TridiagonalMatrix;
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsorSettings {
    pub omega: f64,
    /// Stop once the largest update of a sweep falls below this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for PsorSettings {
    fn default() -> Self {
        PsorSettings {
            omega: 1.2,
            tol: 1e-12,
            max_iters: 20_000,
        }
    }
}

/// Projected SOR started from `z = 0`.
pub fn solve_psor(
    m: &TridiagonalMatrix,
    v: &[f64],
    omega: f64,
    tol: f64,
    max_iters: usize,
) -> Result<SolveReport> {
    let mut z = vec![0.0; v.len()];
    solve_psor_from(m, v, &PsorSettings { omega, tol, max_iters }, &mut z)
}

/// Projected SOR started from the contents of `z`, which must already be
/// non-negative. The solution replaces `z` and is also returned.
pub fn solve_psor_from(
    m: &TridiagonalMatrix,
    v: &[f64],
    settings: &PsorSettings,
    z: &mut [f64],
) -> Result<SolveReport> {
    check_len(m.size(), v.len())?;
    check_len(m.size(), z.len())?;
    let start = Instant::now();
    let iterations = psor_into(m, v, settings, z)?;
    Ok(SolveReport {
        z: z.to_vec(),
        solver: SolverKind::Psor,
        iterations,
        plan: None,
        wall_time: start.elapsed(),
    })
}

pub(crate) fn psor_into(
    m: &TridiagonalMatrix,
    v: &[f64],
    settings: &PsorSettings,
    z: &mut [f64],
) -> Result<usize> {
    let PsorSettings { omega, tol, max_iters } = *settings;
    if !(omega > 0.0 && omega < 2.0) {
        return Err(Error::invalid("omega", format!("{omega} is not in (0, 2)")));
    }
    let (a, b, c) = (m.lower(), m.diag(), m.upper());
    if let Some(row) = b.iter().position(|&d| d == 0.0 || !d.is_finite()) {
        return Err(Error::ZeroPivot { row });
    }
    let n = v.len();
    let last = n - 1;
    let mut update = f64::INFINITY;
    for iter in 1..=max_iters {
        update = 0.0;
        for i in 0..n {
            let mut r = v[i];
            if i > 0 {
                r -= a[i] * z[i - 1];
            }
            if i < last {
                r -= c[i] * z[i + 1];
            }
            let gs = r / b[i];
            let next = (z[i] + omega * (gs - z[i])).max(0.0);
            update = update.max((next - z[i]).abs());
            z[i] = next;
        }
        if !update.is_finite() {
            return Err(Error::NonFinite { row: 0 });
        }
        if update < tol {
            return Ok(iter);
        }
    }
    Err(Error::NotConverged {
        iterations: max_iters,
        residual: update,
    })
}
