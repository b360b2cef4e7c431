use crate::error::{check_len, Error, Result};
use crate::grid::SpaceGrid;

/// Value at `spot` by a monotonicity-limited cubic Hermite through the
/// nodes bracketing it.
///
/// Node slopes come from the parabola through each node and its two
/// neighbours (one-sided at the ends), so quadratics are reproduced
/// exactly on monotone stretches. Slopes are clipped to `[0, 3·min(|secant|)]`
/// and zeroed at local extrema and next to flat segments, which keeps the
/// interpolant monotone wherever the data is. Returns the node
/// value exactly when `spot` is a node.
pub fn interpolate_at(values: &[f64], grid: &SpaceGrid, spot: f64) -> Result<f64> {
    let x = grid.nodes();
    check_len(x.len(), values.len())?;
    let (lo, hi) = (grid.lower(), grid.upper());
    if !(spot >= lo && spot <= hi) {
        return Err(Error::SpotOutOfRange { spot, lo, hi });
    }
    let last = x.len() - 1;
    let i = x.partition_point(|&xi| xi <= spot).saturating_sub(1).min(last - 1);
    if spot == x[i] {
        return Ok(values[i]);
    }
    if spot == x[i + 1] {
        return Ok(values[i + 1]);
    }

    let d0 = limited_slope(x, values, i);
    let d1 = limited_slope(x, values, i + 1);
    let h = x[i + 1] - x[i];
    let t = (spot - x[i]) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    Ok(h00 * values[i] + h10 * h * d0 + h01 * values[i + 1] + h11 * h * d1)
}

fn secant(x: &[f64], f: &[f64], i: usize) -> f64 {
    (f[i + 1] - f[i]) / (x[i + 1] - x[i])
}

/// Derivative at `x[j]` of the parabola through three consecutive nodes
/// containing `j`.
fn parabolic_slope(x: &[f64], f: &[f64], j: usize) -> f64 {
    let last = x.len() - 1;
    let c = j.clamp(1, last - 1);
    let (x0, x1, x2) = (x[c - 1], x[c], x[c + 1]);
    let (f0, f1, f2) = (f[c - 1], f[c], f[c + 1]);
    let xs = x[j];
    // derivative of the Lagrange basis polynomials at xs
    let l0 = ((xs - x1) + (xs - x2)) / ((x0 - x1) * (x0 - x2));
    let l1 = ((xs - x0) + (xs - x2)) / ((x1 - x0) * (x1 - x2));
    let l2 = ((xs - x0) + (xs - x1)) / ((x2 - x0) * (x2 - x1));
    f0 * l0 + f1 * l1 + f2 * l2
}

fn limited_slope(x: &[f64], f: &[f64], j: usize) -> f64 {
    let last = x.len() - 1;
    let d = parabolic_slope(x, f, j);
    let left = (j > 0).then(|| secant(x, f, j - 1));
    let right = (j < last).then(|| secant(x, f, j));
    let (s, m) = match (left, right) {
        // local extremum or flat neighbour
        (Some(l), Some(r)) if l * r <= 0.0 => return 0.0,
        (Some(l), Some(r)) => (l, l.abs().min(r.abs())),
        (Some(s), None) | (None, Some(s)) => (s, s.abs()),
        (None, None) => return d,
    };
    if d * s <= 0.0 {
        0.0
    } else if d.abs() > 3.0 * m {
        3.0 * m * d.signum()
    } else {
        d
    }
}
