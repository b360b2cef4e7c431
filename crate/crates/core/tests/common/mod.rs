//! Shared helpers for the integration tests: an independent LCP oracle,
//! random problem generators and the golden data.
#![allow(dead_code)]

use amlcp::discretization::TridiagonalMatrix;
use rand::Rng;
use serde_json::Value;

pub fn golden() -> Value {
    serde_json::from_str(include_str!("../../../../golden/paper_tables.json")).expect("golden data parses")
}

pub fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .expect("array")
        .iter()
        .map(|x| x.as_f64().expect("number"))
        .collect()
}

pub fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

/// Dense copy of a tridiagonal matrix, built from the raw bands.
pub fn dense(m: &TridiagonalMatrix) -> Vec<Vec<f64>> {
    let n = m.size();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        d[i][i] = m.diag()[i];
        if i > 0 {
            d[i][i - 1] = m.lower()[i];
        }
        if i + 1 < n {
            d[i][i + 1] = m.upper()[i];
        }
    }
    d
}

pub fn dense_mul(d: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    d.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            if factor != 0.0 {
                for c in col..n {
                    a[r][c] -= factor * a[col][c];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Exact LCP solution by enumerating every active set: for each subset of
/// rows forced to `z = 0`, solve the remaining rows of `Mz = v` densely and
/// accept the first candidate that is feasible to `tol·scale`.
pub fn enumerate_lcp(m: &TridiagonalMatrix, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    assert!(n <= 16);
    let d = dense(m);
    let scale = v.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    let tol = 1e-11 * scale;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << n) {
        let free: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let mut z = vec![0.0; n];
        if !free.is_empty() {
            let a: Vec<Vec<f64>> = free.iter().map(|&i| free.iter().map(|&j| d[i][j]).collect()).collect();
            let b: Vec<f64> = free.iter().map(|&i| v[i]).collect();
            let Some(x) = dense_solve(a, b) else { continue };
            for (k, &i) in free.iter().enumerate() {
                z[i] = x[k];
            }
        }
        let w: Vec<f64> = dense_mul(&d, &z).iter().zip(v).map(|(a, b)| a - b).collect();
        let violation = z.iter().chain(&w).fold(0.0f64, |s, &x| s.max(-x));
        if violation <= tol {
            return z;
        }
        if best.as_ref().map_or(true, |(b, _)| violation < *b) {
            best = Some((violation, z));
        }
    }
    panic!("no feasible active set (best violation {:e})", best.map_or(f64::NAN, |b| b.0));
}

/// `max_i |min(z_i, (Mz − v)_i)|`: covers `z ≥ 0`, `Mz ≥ v` and
/// complementarity at once.
pub fn lcp_residual(m: &TridiagonalMatrix, v: &[f64], z: &[f64]) -> f64 {
    let w: Vec<f64> = dense_mul(&dense(m), z).iter().zip(v).map(|(a, b)| a - b).collect();
    z.iter().zip(&w).map(|(&zi, &wi)| zi.min(wi).abs()).fold(0.0, f64::max)
}

pub fn scale(v: &[f64]) -> f64 {
    v.iter().fold(1.0f64, |s, x| s.max(x.abs()))
}

/// Random strictly diagonally dominant tridiagonal matrix with
/// non-positive off-diagonals; occasionally with zero couplings.
pub fn m_matrix(rng: &mut impl Rng, n: usize) -> TridiagonalMatrix {
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut c = vec![0.0; n];
    fn off(rng: &mut impl Rng) -> f64 {
        if rng.gen_bool(0.05) {
            0.0
        } else {
            -rng.gen_range(0.01..3.0)
        }
    }
    for i in 0..n {
        if i > 0 {
            a[i] = off(rng);
        }
        if i + 1 < n {
            c[i] = off(rng);
        }
        b[i] = a[i].abs() + c[i].abs() + rng.gen_range(0.001f64..1.5);
    }
    TridiagonalMatrix::new(a, b, c).expect("valid bands")
}

/// Right-hand side with exactly `transitions` strict sign changes.
pub fn rhs_with_transitions(rng: &mut impl Rng, n: usize, transitions: usize) -> Vec<f64> {
    assert!(transitions < n);
    let mut cuts: Vec<usize> = Vec::new();
    while cuts.len() < transitions {
        let c = rng.gen_range(1..n);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let mut sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        if cuts.contains(&i) {
            sign = -sign;
        }
        v.push(sign * rng.gen_range(0.01..5.0));
    }
    v
}

pub fn sign_transitions(v: &[f64]) -> usize {
    let signs: Vec<f64> = v.iter().filter(|x| **x != 0.0).map(|x| x.signum()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Whether the indices with `z_i ≤ tol` form one contiguous run (or none).
pub fn single_zero_band(z: &[f64], tol: f64) -> bool {
    let zeros: Vec<usize> = (0..z.len()).filter(|&i| z[i] <= tol).collect();
    zeros.windows(2).all(|w| w[1] == w[0] + 1)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Worst-case deviations over a randomized campaign against the oracle.
#[derive(Debug, Default)]
pub struct OracleStats {
    pub instances: usize,
    pub by_transitions: [usize; 4],
    pub single_band: usize,
    /// `max |PI − oracle|`.
    pub policy: f64,
    /// `max |LUUL − oracle|` over instances with a single zero band.
    pub luul_single_band: f64,
    /// `max |fused − two-phase|`.
    pub fused: f64,
    /// Worst residual divided by `scale(v)` for the exact solvers (oracle,
    /// PI, PSOR) everywhere and LUUL on single-band instances.
    pub residual: f64,
    pub psor: f64,
}

pub fn oracle_campaign(seed: u64, instances: usize) -> OracleStats {
    use amlcp::solvers::{
        luul_decompose, solve_double_sweep, solve_fast_double_sweep, solve_policy_iteration, solve_psor,
    };
    use rand::SeedableRng;

    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut s = OracleStats::default();
    for k in 0..instances {
        let t = k % 4;
        let n = rng.gen_range((t + 1).max(3)..=13);
        let m = m_matrix(&mut rng, n);
        let v = rhs_with_transitions(&mut rng, n, t);
        assert_eq!(sign_transitions(&v), t);
        let sc = scale(&v);
        let oracle = enumerate_lcp(&m, &v);
        let pi = solve_policy_iteration(&m, &v, 100).expect("PI converges").z;
        let two_phase = solve_double_sweep(&luul_decompose(&m).expect("M-matrix factors"), &v).unwrap().z;
        let fused = solve_fast_double_sweep(&m, &v).unwrap().z;
        let psor = solve_psor(&m, &v, 1.2, 1e-14, 1_000_000).expect("PSOR converges").z;

        s.instances += 1;
        s.by_transitions[t] += 1;
        s.policy = s.policy.max(max_abs_diff(&pi, &oracle));
        s.fused = s.fused.max(max_abs_diff(&fused, &two_phase));
        s.psor = s.psor.max(max_abs_diff(&psor, &oracle));
        for z in [&oracle, &pi, &psor] {
            s.residual = s.residual.max(lcp_residual(&m, &v, z) / sc);
        }
        if single_zero_band(&oracle, 1e-12 * sc) {
            s.single_band += 1;
            s.luul_single_band = s.luul_single_band.max(max_abs_diff(&two_phase, &oracle));
            s.residual = s.residual.max(lcp_residual(&m, &v, &two_phase) / sc);
        }
    }
    s
}

pub use amlcp::discretization::{ModelParams, SchemeParams};
pub use amlcp::grid::{SpaceGrid, TimeGrid, DEFAULT_STRETCH};
pub use amlcp::pricer::{default_upper_bound, OptionSpec, Payoff};

pub struct Case {
    pub spec: OptionSpec,
    pub params: ModelParams,
    pub space: SpaceGrid,
    pub time: TimeGrid,
    pub spot: f64,
}

/// Negative-rate put: hyperbolic grid centered on the strike, n=100, m=2000.
pub fn table1_case(days: f64, sqrt_steps: bool) -> Case {
    let t = days / 365.0;
    let (k, s, r, mu, vol) = (100.0, 100.0, -0.012, 0.004, 0.10);
    let hi = default_upper_bound(s, k, vol, mu, t);
    Case {
        spec: OptionSpec::american(Payoff::Put { strike: k }, t).unwrap(),
        params: ModelParams::constant(r, mu, vol),
        space: SpaceGrid::hyperbolic(0.0, hi, 2000, k, DEFAULT_STRETCH).unwrap(),
        time: if sqrt_steps { TimeGrid::sqrt_law(t, 100).unwrap() } else { TimeGrid::constant(t, 100).unwrap() },
        spot: s,
    }
}

pub const TABLE1_DAYS: [f64; 5] = [45.0, 90.0, 180.0, 360.0, 3600.0];

/// Small grid: 20 uniform steps on [0, 4K], 20 constant time steps, T = 1.
pub fn table2_case(call: bool) -> Case {
    let k = 100.0;
    let payoff = if call { Payoff::Call { strike: k } } else { Payoff::Put { strike: k } };
    Case {
        spec: OptionSpec::american(payoff, 1.0).unwrap(),
        params: ModelParams::constant(0.01, 0.005, 0.08),
        space: SpaceGrid::uniform(0.0, 4.0 * k, 20).unwrap(),
        time: TimeGrid::constant(1.0, 20).unwrap(),
        spot: 90.0,
    }
}

/// Butterfly 90/110; `steps` constant time steps (the printed row label is
/// the number of time points, `steps + 1`).
pub fn table3_case(steps: usize) -> Case {
    Case {
        spec: OptionSpec::american(Payoff::Butterfly { lower_strike: 90.0, upper_strike: 110.0 }, 0.25).unwrap(),
        params: ModelParams::constant(0.01, 0.01, 1.0),
        space: SpaceGrid::uniform(0.0, 300.0, 300).unwrap(),
        time: TimeGrid::constant(0.25, steps).unwrap(),
        spot: 110.0,
    }
}

impl Case {
    pub fn price(&self, solver: amlcp::solvers::SolverKind) -> f64 {
        self.run(solver, &Default::default()).price
    }

    pub fn run(
        &self,
        solver: amlcp::solvers::SolverKind,
        options: &amlcp::pricer::PricingOptions,
    ) -> amlcp::pricer::PriceResult {
        amlcp::pricer::price_american_with(
            &self.spec,
            &self.params,
            &self.space,
            &self.time,
            &SchemeParams::default(),
            solver,
            self.spot,
            options,
        )
        .expect("pricing succeeds")
    }
}
