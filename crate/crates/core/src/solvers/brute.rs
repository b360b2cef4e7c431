use crate::discretization::TridiagonalMatrix;
use crate::error::{check_len, Error, Result};

/// Largest problem [`brute_force_lcp`] will enumerate.
pub const MAX_ENUMERATION_SIZE: usize = 16;

/// Finds the LCP solution by trying every active set.
///
/// For each subset of pinned indices the reduced system is solved with
/// `z = 0` on the subset; the first candidate with `z ≥ 0` off the subset
/// and `Mz − v ≥ 0` on it (both to `1e-10·max(1, ‖v‖∞)`) is returned. For an
/// M-matrix that candidate is the unique solution.
pub fn brute_force_lcp(m: &TridiagonalMatrix, v: &[f64]) -> Result<Vec<f64>> {
    let n = m.size();
    check_len(n, v.len())?;
    if n > MAX_ENUMERATION_SIZE {
        return Err(Error::TooLarge {
            size: n,
            max: MAX_ENUMERATION_SIZE,
        });
    }
    let scale = v.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    let tol = 1e-10 * scale;
    let mut z = vec![0.0; n];
    let mut upper = vec![0.0; n];

    'masks: for mask in 0u32..(1u32 << n) {
        let pinned = |i: usize| mask & (1 << i) != 0;
        if !solve_masked(m, v, &pinned, &mut z, &mut upper) {
            continue;
        }
        for i in 0..n {
            let ok = if pinned(i) {
                m.row_dot(i, &z) - v[i] >= -tol
            } else {
                z[i] >= -tol
            };
            if !ok {
                continue 'masks;
            }
        }
        for x in z.iter_mut() {
            *x = x.max(0.0);
        }
        return Ok(z);
    }
    Err(Error::NoFeasibleActiveSet { size: n })
}

/// Gaussian elimination on the tridiagonal system with pinned rows set to
/// `z_i = 0`. Returns false on a singular reduced system.
fn solve_masked(
    m: &TridiagonalMatrix,
    v: &[f64],
    pinned: &dyn Fn(usize) -> bool,
    z: &mut [f64],
    upper: &mut [f64],
) -> bool {
    let n = v.len();
    let mut prev_upper = 0.0;
    let mut prev_z = 0.0;
    for i in 0..n {
        let (a, b, c, r) = if pinned(i) {
            (0.0, 1.0, 0.0, 0.0)
        } else {
            let (a, b, c) = m.row(i);
            (a, b, c, v[i])
        };
        let p = b - a * prev_upper;
        if p == 0.0 || !p.is_finite() {
            return false;
        }
        upper[i] = c / p;
        z[i] = (r - a * prev_z) / p;
        prev_upper = upper[i];
        prev_z = z[i];
    }
    for i in (0..n.saturating_sub(1)).rev() {
        z[i] -= upper[i] * z[i + 1];
    }
    z.iter().all(|x| x.is_finite())
}
