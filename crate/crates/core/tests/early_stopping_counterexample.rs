//! The double sweep has to run both projected loops to the end. Stopping
//! each loop at the first projected zero, in the spirit of single-boundary
//! free-boundary sweeps, breaks on a right-hand side that is positive,
//! negative, positive, then zero.

mod common;

use amlcp::discretization::TridiagonalMatrix;
use amlcp::solvers::{luul_decompose, plan_sweeps, solve_double_sweep, LuulFactors, SweepPlan};
use common::*;

/// Double sweep whose loops stop at the first index where the projected
/// value is non-positive, assuming everything beyond it is zero.
fn early_stopping_double_sweep(f: &LuulFactors, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let (lu, ul) = (&f.lu, &f.ul);

    let mut y = vec![0.0; n];
    y[0] = v[0] / lu.l_diag[0];
    for i in 1..n {
        y[i] = (v[i] - lu.l_sub[i] * y[i - 1]) / lu.l_diag[i];
    }
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let next = if i + 1 < n { z[i + 1] } else { 0.0 };
        let zi = y[i] - lu.u_super[i] * next;
        if zi <= 0.0 {
            break;
        }
        z[i] = zi;
    }

    let mut yb = vec![0.0; n];
    yb[n - 1] = v[n - 1] / ul.u_diag[n - 1];
    for i in (0..n - 1).rev() {
        yb[i] = (v[i] - ul.u_super[i] * yb[i + 1]) / ul.u_diag[i];
    }
    let mut prev = 0.0;
    for i in 0..n {
        let zb = yb[i] - if i > 0 { ul.l_sub[i] * prev } else { 0.0 };
        if zb <= 0.0 {
            break;
        }
        z[i] = z[i].max(zb);
        prev = z[i];
    }
    z
}

fn early_stopping_problem() -> (TridiagonalMatrix, Vec<f64>) {
    let n = 16;
    let a: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { -1.0 }).collect();
    let c: Vec<f64> = (0..n).map(|i| if i + 1 == n { 0.0 } else { -1.0 }).collect();
    let b = vec![2.5; n];
    // + + + | − − − − | + + + + | 0 0 0 0 0
    let mut v = vec![1.0; 3];
    v.extend([-2.0; 4]);
    v.extend([1.5; 4]);
    v.extend([0.0; 5]);
    (TridiagonalMatrix::new(a, b, c).unwrap(), v)
}

#[test]
fn early_stopping_fails_where_full_double_sweep_is_exact() {
    let (m, v) = early_stopping_problem();
    assert_eq!(sign_transitions(&v), 2);
    assert_eq!(plan_sweeps(&v), SweepPlan::Both);

    let oracle = enumerate_lcp(&m, &v);
    let tol = 1e-12 * scale(&v);
    // the oracle has positive blocks on both sides of one zero band
    assert!(single_zero_band(&oracle, tol));
    assert!(oracle[0] > tol && oracle[v.len() - 1] > tol);

    let f = luul_decompose(&m).unwrap();
    let full = solve_double_sweep(&f, &v).unwrap().z;
    assert!(max_abs_diff(&full, &oracle) <= 1e-12);

    let early = early_stopping_double_sweep(&f, &v);
    println!("oracle {oracle:?}\nearly  {early:?}");
    assert!(max_abs_diff(&early, &oracle) > 1e-3);
}
