use std::time::Instant;

use super::{SolveReport, SolverKind};
use crate::discretization::TridiagonalMatrix;
use crate::error::{check_len, Error, Result};

pub const DEFAULT_MAX_ITERS: usize = 100;

/// Reusable buffers for [`policy_iteration_into`].
#[derive(Debug, Clone, Default)]
pub(crate) struct PolicyWorkspace {
    active: Vec<bool>,
    next: Vec<bool>,
    scratch: Vec<f64>,
}

/// Policy iteration (Howard's algorithm) on `min(Mz − v, z) = 0`.
///
/// Each node either follows its matrix row or is pinned to `z_i = 0`.
/// Starting with every node free, the tridiagonal system under the current
/// policy is solved, then a free node with `z_i < 0` is pinned and a pinned
/// node with `(Mz − v)_i < 0` is freed. Stops when the policy repeats.
pub fn solve_policy_iteration(m: &TridiagonalMatrix, v: &[f64], max_iters: usize) -> Result<SolveReport> {
    check_len(m.size(), v.len())?;
    let start = Instant::now();
    let mut z = vec![0.0; v.len()];
    let iterations = policy_iteration_into(m, v, max_iters, &mut z, &mut PolicyWorkspace::default())?;
    Ok(SolveReport {
        z,
        solver: SolverKind::PolicyIteration,
        iterations,
        plan: None,
        wall_time: start.elapsed(),
    })
}

pub(crate) fn policy_iteration_into(
    m: &TridiagonalMatrix,
    v: &[f64],
    max_iters: usize,
    z: &mut [f64],
    ws: &mut PolicyWorkspace,
) -> Result<usize> {
    let n = v.len();
    ws.active.clear();
    ws.active.resize(n, false);
    ws.next.resize(n, false);
    ws.scratch.resize(n, 0.0);

    for iter in 1..=max_iters {
        solve_with_policy(m, v, &ws.active, z, &mut ws.scratch)?;
        let mut changed = false;
        for i in 0..n {
            let pinned = if ws.active[i] {
                m.row_dot(i, z) - v[i] >= 0.0
            } else {
                z[i] < 0.0
            };
            changed |= pinned != ws.active[i];
            ws.next[i] = pinned;
        }
        if !changed {
            return Ok(iter);
        }
        std::mem::swap(&mut ws.active, &mut ws.next);
    }

    let residual = (0..n)
        .map(|i| z[i].min(m.row_dot(i, z) - v[i]).abs())
        .fold(0.0, f64::max);
    Err(Error::NotConverged {
        iterations: max_iters,
        residual,
    })
}

/// Thomas algorithm on `M` with pinned rows replaced by `z_i = 0`.
fn solve_with_policy(
    m: &TridiagonalMatrix,
    v: &[f64],
    pinned: &[bool],
    z: &mut [f64],
    upper: &mut [f64],
) -> Result<()> {
    let n = v.len();
    let row = |i: usize| {
        if pinned[i] {
            (0.0, 1.0, 0.0, 0.0)
        } else {
            let (a, b, c) = m.row(i);
            (a, b, c, v[i])
        }
    };

    let (_, b, c, r) = row(0);
    if b == 0.0 || !b.is_finite() {
        return Err(Error::ZeroPivot { row: 0 });
    }
    upper[0] = c / b;
    z[0] = r / b;
    for i in 1..n {
        let (a, b, c, r) = row(i);
        let p = b - a * upper[i - 1];
        if p == 0.0 || !p.is_finite() {
            return Err(Error::ZeroPivot { row: i });
        }
        upper[i] = c / p;
        z[i] = (r - a * z[i - 1]) / p;
    }
    for i in (0..n - 1).rev() {
        z[i] -= upper[i] * z[i + 1];
    }
    if let Some(row) = z.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row });
    }
    Ok(())
}
