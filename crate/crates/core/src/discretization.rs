//! TR-BDF2 assembly of the tridiagonal system matrix and stage right-hand
//! sides, plus the M-matrix diagnostics that decide whether the projected
//! sweeps are valid.
//!
//! Rows follow the backward-in-time convention `M = I + w·L_h` where `L_h`
//! discretizes `−½σ²x²∂²/∂x² − μx∂/∂x + r` with central differences in the
//! interior and first-order one-sided convection at both ends (the second
//! derivative vanishes there). For the trapezoidal stage `w = αk/2`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::grid::SpaceGrid;
use crate::solvers::LcpProblem;

/// Tridiagonal matrix stored as three equal-length arrays. `lower[0]` and
/// `upper[n−1]` are outside the matrix and always hold 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTridiagonal")]
pub struct TridiagonalMatrix {
    #[serde(rename = "a")]
    lower: Vec<f64>,
    #[serde(rename = "b")]
    diag: Vec<f64>,
    #[serde(rename = "c")]
    upper: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTridiagonal {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl TryFrom<RawTridiagonal> for TridiagonalMatrix {
    type Error = Error;

    fn try_from(raw: RawTridiagonal) -> Result<Self> {
        TridiagonalMatrix::new(raw.a, raw.b, raw.c)
    }
}

impl TridiagonalMatrix {
    /// Builds a matrix from full-length coefficient arrays. The corner
    /// entries `lower[0]` and `upper[n−1]` are reset to 0.
    pub fn new(mut lower: Vec<f64>, diag: Vec<f64>, mut upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::invalid("b", "matrix must have at least one row"));
        }
        check_len(n, lower.len())?;
        check_len(n, upper.len())?;
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        Ok(TridiagonalMatrix { lower, diag, upper })
    }

    pub fn identity(n: usize) -> Self {
        TridiagonalMatrix {
            lower: vec![0.0; n],
            diag: vec![1.0; n],
            upper: vec![0.0; n],
        }
    }

    /// Number of rows (`m + 1`).
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// `(a_i, b_i, c_i)` of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (f64, f64, f64) {
        (self.lower[i], self.diag[i], self.upper[i])
    }

    /// Entry `(i, i)` of `Mx` for row `i`.
    #[inline]
    pub(crate) fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let n = self.diag.len();
        let mut s = self.diag[i] * x[i];
        if i > 0 {
            s += self.lower[i] * x[i - 1];
        }
        if i + 1 < n {
            s += self.upper[i] * x[i + 1];
        }
        s
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.size(), x.len())?;
        Ok((0..self.size()).map(|i| self.row_dot(i, x)).collect())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        let mut dense = vec![vec![0.0; n]; n];
        for (i, row) in dense.iter_mut().enumerate() {
            row[i] = self.diag[i];
            if i > 0 {
                row[i - 1] = self.lower[i];
            }
            if i + 1 < n {
                row[i + 1] = self.upper[i];
            }
        }
        dense
    }
}

/// A model coefficient sampled at `(x, t)`.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// Depends on the asset price only.
    Local(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Depends on asset price and time.
    Surface(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Coefficient {
    #[inline]
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            Coefficient::Local(f) => f(x),
            Coefficient::Surface(f) => f(x, t),
        }
    }

    pub fn is_time_homogeneous(&self) -> bool {
        !matches!(self, Coefficient::Surface(_))
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(v) => write!(f, "Constant({v})"),
            Coefficient::Local(_) => f.write_str("Local(<fn>)"),
            Coefficient::Surface(_) => f.write_str("Surface(<fn>)"),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(v: f64) -> Self {
        Coefficient::Constant(v)
    }
}

/// Rate `r`, drift `μ` and volatility `σ` of the pricing operator. Negative
/// rates are allowed.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub rate: Coefficient,
    pub drift: Coefficient,
    pub vol: Coefficient,
}

impl ModelParams {
    pub fn constant(rate: f64, drift: f64, vol: f64) -> Self {
        ModelParams {
            rate: rate.into(),
            drift: drift.into(),
            vol: vol.into(),
        }
    }

    /// True when no coefficient depends on time, so a matrix assembled for
    /// one step is valid for any other step of the same length.
    pub fn is_time_homogeneous(&self) -> bool {
        self.rate.is_time_homogeneous()
            && self.drift.is_time_homogeneous()
            && self.vol.is_time_homogeneous()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub alpha: f64,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            alpha: 2.0 - std::f64::consts::SQRT_2,
        }
    }
}

impl SchemeParams {
    /// Implicit weight of the trapezoidal stage, `αk/2`.
    pub fn trapezoidal_weight(&self, k: f64) -> f64 {
        self.alpha * k / 2.0
    }

    /// Implicit weight of the BDF2 stage, `(1−α)k/(2−α)`. Equal to the
    /// trapezoidal weight for `α = 2 − √2`.
    pub fn bdf2_weight(&self, k: f64) -> f64 {
        (1.0 - self.alpha) * k / (2.0 - self.alpha)
    }
}

/// Trapezoidal-stage matrix for a step of length `k`, with coefficients
/// sampled at `(x_i, t_eval)`.
pub fn assemble_matrix(
    grid: &SpaceGrid,
    params: &ModelParams,
    k: f64,
    t_eval: f64,
    scheme: &SchemeParams,
) -> Result<TridiagonalMatrix> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::invalid("k", format!("time step {k} must be > 0")));
    }
    assemble_weighted(grid, params, scheme.trapezoidal_weight(k), t_eval)
}

/// `I + w·L_h` for an arbitrary implicit weight `w`.
pub(crate) fn assemble_weighted(
    grid: &SpaceGrid,
    params: &ModelParams,
    w: f64,
    t_eval: f64,
) -> Result<TridiagonalMatrix> {
    let x = grid.nodes();
    let n = x.len();
    let m = n - 1;
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];

    let sample = |i: usize| -> Result<(f64, f64, f64)> {
        let r = params.rate.eval(x[i], t_eval);
        let mu = params.drift.eval(x[i], t_eval);
        let sigma = params.vol.eval(x[i], t_eval);
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(
                "vol",
                format!("volatility {sigma} at x = {} must be finite and >= 0", x[i]),
            ));
        }
        if !(r.is_finite() && mu.is_finite()) {
            return Err(Error::NonFinite { row: i });
        }
        Ok((r, mu, sigma))
    };

    let (r, mu, _) = sample(0)?;
    let drift_term = mu * x[0] / (x[1] - x[0]);
    diag[0] = 1.0 + w * (r + drift_term);
    upper[0] = -w * drift_term;

    for i in 1..m {
        let (r, mu, sigma) = sample(i)?;
        let dm = x[i] - x[i - 1];
        let dp = x[i + 1] - x[i];
        let mux = mu * x[i];
        let diffusion = sigma * sigma * x[i] * x[i];
        lower[i] = w / (dm * (dm + dp)) * (mux * dp - diffusion);
        diag[i] = 1.0 + w * (r + (mux * (dm - dp) + diffusion) / (dp * dm));
        upper[i] = -w / (dp * (dm + dp)) * (mux * dm + diffusion);
    }

    let (r, mu, _) = sample(m)?;
    let drift_term = mu * x[m] / (x[m] - x[m - 1]);
    lower[m] = w * drift_term;
    diag[m] = 1.0 + w * (r - drift_term);

    Ok(TridiagonalMatrix { lower, diag, upper })
}

/// Trapezoidal right-hand side `g = (2I − M)f`.
pub fn trapezoidal_rhs(matrix: &TridiagonalMatrix, f: &[f64]) -> Result<Vec<f64>> {
    check_len(matrix.size(), f.len())?;
    Ok((0..f.len())
        .map(|i| 2.0 * f[i] - matrix.row_dot(i, f))
        .collect())
}

/// BDF2 right-hand side `h = (f*/α − (1−α)²/α·f)/(2−α)`.
pub fn bdf2_rhs(f_star: &[f64], f_current: &[f64], scheme: &SchemeParams) -> Result<Vec<f64>> {
    check_len(f_current.len(), f_star.len())?;
    let a = scheme.alpha;
    let w_star = 1.0 / (a * (2.0 - a));
    let w_cur = (1.0 - a) * (1.0 - a) / (a * (2.0 - a));
    Ok(f_star
        .iter()
        .zip(f_current)
        .map(|(&s, &c)| w_star * s - w_cur * c)
        .collect())
}

/// Rewrites the stage problem `M f ≥ rhs, f ≥ F` as `M z ≥ v, z ≥ 0` with
/// `z = f − F` and `v = rhs − M·F`.
pub fn transform_to_standard(
    matrix: &TridiagonalMatrix,
    rhs: &[f64],
    payoff: &[f64],
) -> Result<LcpProblem> {
    let v = transformed_rhs(matrix, rhs, payoff)?;
    LcpProblem::new(matrix.clone(), v)
}

pub(crate) fn transformed_rhs(
    matrix: &TridiagonalMatrix,
    rhs: &[f64],
    payoff: &[f64],
) -> Result<Vec<f64>> {
    check_len(matrix.size(), rhs.len())?;
    check_len(matrix.size(), payoff.len())?;
    Ok((0..rhs.len())
        .map(|i| rhs[i] - matrix.row_dot(i, payoff))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MMatrixCondition {
    /// `−σ²x_i/Δx_{i−1} ≤ μ ≤ σ²x_i/Δx_i` on interior rows.
    DriftBound,
    /// `0 ≤ 1 + (αk/2)·r_i`.
    RateBound,
    /// `μx_0 ≥ 0` on the first row, `μx_m ≤ 0` on the last.
    BoundarySign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub row: usize,
    pub condition: MMatrixCondition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MMatrixReport {
    pub is_m_matrix: bool,
    pub violations: Vec<Violation>,
}

impl MMatrixReport {
    pub fn first_violation(&self, condition: MMatrixCondition) -> Option<usize> {
        self.violations
            .iter()
            .find(|v| v.condition == condition)
            .map(|v| v.row)
    }
}

/// Checks the sufficient conditions for the trapezoidal-stage matrix to be
/// an M-matrix. Violations are reported, never raised: the solvers tolerate
/// sign-violating boundary rows.
pub fn check_m_matrix(
    grid: &SpaceGrid,
    params: &ModelParams,
    k: f64,
    t_eval: f64,
    scheme: &SchemeParams,
) -> Result<MMatrixReport> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::invalid("k", format!("time step {k} must be > 0")));
    }
    let w = scheme.trapezoidal_weight(k);
    let x = grid.nodes();
    let m = x.len() - 1;
    let mut violations = Vec::new();
    let mut push = |row, condition| violations.push(Violation { row, condition });

    for (i, &xi) in x.iter().enumerate() {
        let r = params.rate.eval(xi, t_eval);
        let mu = params.drift.eval(xi, t_eval);
        let sigma = params.vol.eval(xi, t_eval);
        if i == 0 && mu * xi < 0.0 {
            push(i, MMatrixCondition::BoundarySign);
        }
        if i == m && mu * xi > 0.0 {
            push(i, MMatrixCondition::BoundarySign);
        }
        if i > 0 && i < m {
            let s2x = sigma * sigma * xi;
            let lo = -s2x / (xi - x[i - 1]);
            let hi = s2x / (x[i + 1] - xi);
            if mu < lo || mu > hi {
                push(i, MMatrixCondition::DriftBound);
            }
        }
        if 1.0 + w * r < 0.0 {
            push(i, MMatrixCondition::RateBound);
        }
    }

    Ok(MMatrixReport {
        is_m_matrix: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn appendix_grid() -> SpaceGrid {
        SpaceGrid::uniform(0.0, 300.0, 15).unwrap()
    }

    #[test]
    fn zero_operator_gives_identity() {
        let g = SpaceGrid::uniform(0.0, 10.0, 5).unwrap();
        let m = assemble_matrix(&g, &ModelParams::constant(0.0, 0.0, 0.0), 0.1, 0.0, &SchemeParams::default()).unwrap();
        assert_eq!(m, TridiagonalMatrix::identity(6));
    }

    #[test]
    fn rejects_non_positive_step() {
        let g = appendix_grid();
        let p = ModelParams::constant(0.01, 0.01, 1.0);
        assert!(assemble_matrix(&g, &p, 0.0, 0.0, &SchemeParams::default()).is_err());
        assert!(assemble_matrix(&g, &p, -1.0, 0.0, &SchemeParams::default()).is_err());
    }

    #[test]
    fn rejects_negative_vol() {
        let g = appendix_grid();
        let p = ModelParams::constant(0.01, 0.01, -0.2);
        assert!(matches!(
            assemble_matrix(&g, &p, 0.1, 0.0, &SchemeParams::default()),
            Err(Error::InvalidArgument { field: "vol", .. })
        ));
    }

    #[test]
    fn appendix_matrix_entries() {
        let g = appendix_grid();
        let p = ModelParams::constant(0.01, 0.01, 1.0);
        let m = assemble_matrix(&g, &p, 0.25 / 3.0, 0.0, &SchemeParams::default()).unwrap();
        assert!((m.diag()[1] - 1.024651845916799).abs() < 1e-12);
        assert!((m.upper()[1] + 0.012325922958399462).abs() < 1e-12);
        assert!((m.lower()[15] - 0.0036611652351682144).abs() < 1e-12);
        assert_eq!(m.lower()[0], 0.0);
        assert_eq!(m.upper()[15], 0.0);
    }

    /// Finite-difference weights for the first and second derivative at the
    /// middle of three nodes, from a direct Vandermonde solve.
    fn taylor_weights(xm: f64, x0: f64, xp: f64) -> ([f64; 3], [f64; 3]) {
        // rows: sum w_j = 0 / sum w_j h_j = d1 / sum w_j h_j^2 / 2 = d2
        let h = [xm - x0, 0.0, xp - x0];
        let solve = |rhs: [f64; 3]| {
            let mut a = [
                [1.0, 1.0, 1.0, rhs[0]],
                [h[0], h[1], h[2], rhs[1]],
                [h[0] * h[0] / 2.0, h[1] * h[1] / 2.0, h[2] * h[2] / 2.0, rhs[2]],
            ];
            for c in 0..3 {
                let p = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
                a.swap(c, p);
                for r in 0..3 {
                    if r != c {
                        let f = a[r][c] / a[c][c];
                        for k in c..4 {
                            a[r][k] -= f * a[c][k];
                        }
                    }
                }
            }
            [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]]
        };
        (solve([0.0, 1.0, 0.0]), solve([0.0, 0.0, 1.0]))
    }

    #[test]
    fn interior_stencil_matches_taylor_fit() {
        let scheme = SchemeParams::default();
        let (r, mu, sigma, k) = (0.03, 0.02, 0.3, 0.01);
        let p = ModelParams::constant(r, mu, sigma);
        for g in [
            SpaceGrid::uniform(0.0, 200.0, 40).unwrap(),
            SpaceGrid::hyperbolic(0.0, 200.0, 40, 100.0, 0.1).unwrap(),
        ] {
            let mat = assemble_matrix(&g, &p, k, 0.0, &scheme).unwrap();
            let w = scheme.trapezoidal_weight(k);
            let x = g.nodes();
            for i in 1..g.intervals() {
                let (d1, d2) = taylor_weights(x[i - 1], x[i], x[i + 1]);
                let op = |j: usize| {
                    -0.5 * sigma * sigma * x[i] * x[i] * d2[j] - mu * x[i] * d1[j]
                        + if j == 1 { r } else { 0.0 }
                };
                let expect = [w * op(0), 1.0 + w * op(1), w * op(2)];
                let got = mat.row(i);
                for (e, v) in expect.iter().zip([got.0, got.1, got.2]) {
                    assert!((e - v).abs() <= 1e-10 * e.abs().max(1.0), "row {i}: {e} vs {v}");
                }
            }
        }
    }

    #[test]
    fn dense_product_agrees() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.gen_range(1..30);
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let m = TridiagonalMatrix::new(a, b, c).unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let dense = m.to_dense();
            let prod = m.mul_vec(&x).unwrap();
            for i in 0..n {
                let d: f64 = (0..n).map(|j| dense[i][j] * x[j]).sum();
                assert!((d - prod[i]).abs() <= 1e-13 * d.abs().max(1.0));
            }
            // g = (2I − M) f, and g + M f = 2 f
            let g = trapezoidal_rhs(&m, &x).unwrap();
            for i in 0..n {
                let d: f64 = (0..n)
                    .map(|j| (if i == j { 2.0 } else { 0.0 } - dense[i][j]) * x[j])
                    .sum();
                assert!((d - g[i]).abs() <= 1e-12 * d.abs().max(1.0));
                assert!((g[i] + prod[i] - 2.0 * x[i]).abs() <= 1e-12 * x[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn trapezoidal_rhs_identity_and_mismatch() {
        let m = TridiagonalMatrix::identity(3);
        assert_eq!(trapezoidal_rhs(&m, &[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
        assert!(matches!(
            trapezoidal_rhs(&m, &[1.0]),
            Err(Error::LengthMismatch { expected: 3, found: 1 })
        ));
    }

    #[test]
    fn bdf2_rhs_examples() {
        let s = SchemeParams::default();
        let f = vec![1.0, -2.5, 7.0];
        let h = bdf2_rhs(&f, &f, &s).unwrap();
        for (a, b) in h.iter().zip(&f) {
            assert!((a - b).abs() < 1e-14);
        }
        let a = s.alpha;
        let h = bdf2_rhs(&[0.0; 3], &f, &s).unwrap();
        for (hi, fi) in h.iter().zip(&f) {
            let expect = -(1.0 - a) * (1.0 - a) / (a * (2.0 - a)) * fi;
            assert!((hi - expect).abs() < 1e-14);
        }
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let fs: Vec<f64> = (0..10).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let fc: Vec<f64> = (0..10).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let h = bdf2_rhs(&fs, &fc, &s).unwrap();
        for i in 0..10 {
            let e = (fs[i] / a - (1.0 - a).powi(2) / a * fc[i]) / (2.0 - a);
            assert!((h[i] - e).abs() < 1e-13);
        }
        assert!(bdf2_rhs(&[1.0], &[1.0, 2.0], &s).is_err());
    }

    #[test]
    fn stage_weights_coincide_for_default_alpha() {
        let s = SchemeParams::default();
        assert!((s.trapezoidal_weight(0.3) - s.bdf2_weight(0.3)).abs() < 1e-16);
    }

    #[test]
    fn transform_examples() {
        let g = appendix_grid();
        let p = ModelParams::constant(0.01, 0.01, 1.0);
        let m = assemble_matrix(&g, &p, 0.25 / 3.0, 0.0, &SchemeParams::default()).unwrap();
        let rhs: Vec<f64> = (0..16).map(|i| i as f64 * 0.3 - 1.0).collect();

        let lcp = transform_to_standard(&m, &rhs, &[0.0; 16]).unwrap();
        assert_eq!(lcp.rhs(), rhs.as_slice());

        let f: Vec<f64> = (0..16).map(|i| (i as f64 - 5.0).abs()).collect();
        let mf = m.mul_vec(&f).unwrap();
        let lcp = transform_to_standard(&m, &mf, &f).unwrap();
        assert!(lcp.rhs().iter().all(|&v| v == 0.0));

        let mut payoff = vec![0.0; 16];
        payoff[5] = 10.0;
        let lcp = transform_to_standard(&m, &rhs, &payoff).unwrap();
        let (a, b, c) = m.row(5);
        let expect = rhs[5] - (a * payoff[4] + b * payoff[5] + c * payoff[6]);
        assert_eq!(lcp.rhs()[5], expect);
        assert!(transform_to_standard(&m, &rhs[..3], &payoff).is_err());
    }

    #[test]
    fn m_matrix_diagnostics() {
        let s = SchemeParams::default();
        // fine grid, small positive drift: only the top row is flagged
        let g = SpaceGrid::uniform(0.0, 400.0, 2000).unwrap();
        let p = ModelParams::constant(0.01, 0.004, 0.10);
        let rep = check_m_matrix(&g, &p, 0.01, 0.0, &s).unwrap();
        assert!(!rep.is_m_matrix);
        assert_eq!(
            rep.violations,
            vec![Violation { row: 2000, condition: MMatrixCondition::BoundarySign }]
        );

        let p = ModelParams::constant(0.02, 0.0, 0.3);
        for g in [appendix_grid(), SpaceGrid::hyperbolic(0.0, 300.0, 77, 40.0, 0.02).unwrap()] {
            let rep = check_m_matrix(&g, &p, 0.5, 0.0, &s).unwrap();
            assert!(rep.is_m_matrix);
            assert!(rep.violations.is_empty());
        }

        // coarse grid, large drift: compare against a direct scan
        let g = SpaceGrid::uniform(0.0, 100.0, 10).unwrap();
        let (mu, sigma) = (0.5, 0.2);
        let p = ModelParams::constant(0.0, mu, sigma);
        let rep = check_m_matrix(&g, &p, 0.1, 0.0, &s).unwrap();
        let x = g.nodes();
        let scan = (1..10).find(|&i| {
            !(-sigma * sigma * x[i] / (x[i] - x[i - 1]) <= mu
                && mu <= sigma * sigma * x[i] / (x[i + 1] - x[i]))
        });
        assert_eq!(rep.first_violation(MMatrixCondition::DriftBound), scan);
        assert!(scan.is_some());

        // strongly negative rate with a long step breaks the rate bound
        let p = ModelParams::constant(-50.0, 0.0, 0.2);
        let rep = check_m_matrix(&appendix_grid(), &p, 1.0, 0.0, &s).unwrap();
        assert_eq!(rep.first_violation(MMatrixCondition::RateBound), Some(0));
    }

    #[test]
    fn structural_m_matrix_when_report_passes() {
        let s = SchemeParams::default();
        let g = SpaceGrid::uniform(0.0, 200.0, 100).unwrap();
        let p = ModelParams::constant(0.03, 0.0, 0.25);
        assert!(check_m_matrix(&g, &p, 0.05, 0.0, &s).unwrap().is_m_matrix);
        let m = assemble_matrix(&g, &p, 0.05, 0.0, &s).unwrap();
        for i in 0..m.size() {
            let (a, b, c) = m.row(i);
            assert!(a <= 0.0 && c <= 0.0 && b > 0.0 && a + b + c >= 0.0);
        }
    }

    #[test]
    fn assembly_is_deterministic() {
        let g = SpaceGrid::hyperbolic(0.0, 300.0, 500, 100.0, 0.05).unwrap();
        let p = ModelParams::constant(-0.012, 0.004, 0.1);
        let s = SchemeParams::default();
        let a = assemble_matrix(&g, &p, 0.01, 0.5, &s).unwrap();
        let b = assemble_matrix(&g, &p, 0.01, 0.5, &s).unwrap();
        assert!(a.diag().iter().zip(b.diag()).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(a, b);
    }

    #[test]
    fn variable_coefficients_are_sampled() {
        let g = SpaceGrid::uniform(0.0, 10.0, 5).unwrap();
        let p = ModelParams {
            rate: Coefficient::Surface(Arc::new(|_, t| t)),
            drift: 0.0.into(),
            vol: 0.0.into(),
        };
        assert!(!p.is_time_homogeneous());
        let s = SchemeParams::default();
        let m = assemble_matrix(&g, &p, 0.2, 0.5, &s).unwrap();
        assert!((m.diag()[3] - (1.0 + s.trapezoidal_weight(0.2) * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn matrix_json_layout() {
        let m = TridiagonalMatrix::new(vec![9.0, -1.0], vec![2.0, 3.0], vec![-0.5, 9.0]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"a":[0.0,-1.0],"b":[2.0,3.0],"c":[-0.5,0.0]}"#);
        let back: TridiagonalMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<TridiagonalMatrix>(r#"{"a":[0],"b":[1,2],"c":[0,0]}"#).is_err());
    }
}
