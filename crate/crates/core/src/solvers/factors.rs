use serde::Serialize;

use crate::discretization::TridiagonalMatrix;
use crate::error::{Error, Result};

#[inline]
fn pivot(value: f64, row: usize) -> Result<f64> {
    if value != 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::ZeroPivot { row })
    }
}

/// `M = LU` with `L` lower bidiagonal (diagonal `l_ii`, sub-diagonal `a_i`)
/// and `U` unit upper bidiagonal (super-diagonal `u_{i,i+1} = c_i / l_ii`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LuFactors {
    pub l_diag: Vec<f64>,
    pub l_sub: Vec<f64>,
    pub u_super: Vec<f64>,
}

impl LuFactors {
    pub fn new(m: &TridiagonalMatrix) -> Result<Self> {
        let (a, b, c) = (m.lower(), m.diag(), m.upper());
        let n = b.len();
        let mut l_diag = vec![0.0; n];
        let mut u_super = vec![0.0; n];
        l_diag[0] = pivot(b[0], 0)?;
        for i in 1..n {
            u_super[i - 1] = c[i - 1] / l_diag[i - 1];
            l_diag[i] = pivot(b[i] - a[i] * u_super[i - 1], i)?;
        }
        Ok(LuFactors {
            l_diag,
            l_sub: a.to_vec(),
            u_super,
        })
    }

    pub fn size(&self) -> usize {
        self.l_diag.len()
    }

    /// Solves `Ly = v` top-down into `y`.
    pub(crate) fn forward(&self, v: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.size();
        y[0] = v[0] / self.l_diag[0];
        for i in 1..n {
            y[i] = (v[i] - self.l_sub[i] * y[i - 1]) / self.l_diag[i];
        }
        check_finite(y)
    }

    /// Projected back-substitution `z_i = max(y_i − u_{i,i+1} z_{i+1}, 0)`
    /// from the last row up. Overwrites `z`.
    pub(crate) fn projected_backward(&self, y: &[f64], z: &mut [f64]) {
        let n = self.size();
        z[n - 1] = y[n - 1].max(0.0);
        for i in (0..n - 1).rev() {
            z[i] = (y[i] - self.u_super[i] * z[i + 1]).max(0.0);
        }
    }

    /// Plain back-substitution, no projection.
    pub(crate) fn backward(&self, y: &[f64], z: &mut [f64]) {
        let n = self.size();
        z[n - 1] = y[n - 1];
        for i in (0..n - 1).rev() {
            z[i] = y[i] - self.u_super[i] * z[i + 1];
        }
    }

    /// Linear solve `Mz = v` without the complementarity constraint.
    pub fn solve_linear(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.size()];
        let mut z = vec![0.0; self.size()];
        self.forward(v, &mut y)?;
        self.backward(&y, &mut z);
        Ok(z)
    }
}

/// `M = ŪL̄` with `Ū` upper bidiagonal (diagonal `ū_ii`, super-diagonal
/// `c_i`) and `L̄` unit lower bidiagonal (sub-diagonal `l̄_{i,i−1} = a_i / ū_ii`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UlFactors {
    pub u_diag: Vec<f64>,
    pub u_super: Vec<f64>,
    pub l_sub: Vec<f64>,
}

impl UlFactors {
    pub fn new(m: &TridiagonalMatrix) -> Result<Self> {
        let (a, b, c) = (m.lower(), m.diag(), m.upper());
        let n = b.len();
        let mut u_diag = vec![0.0; n];
        let mut l_sub = vec![0.0; n];
        u_diag[n - 1] = pivot(b[n - 1], n - 1)?;
        for i in (0..n - 1).rev() {
            l_sub[i + 1] = a[i + 1] / u_diag[i + 1];
            u_diag[i] = pivot(b[i] - c[i] * l_sub[i + 1], i)?;
        }
        Ok(UlFactors {
            u_diag,
            u_super: c.to_vec(),
            l_sub,
        })
    }

    pub fn size(&self) -> usize {
        self.u_diag.len()
    }

    /// Solves `Ūy = v` bottom-up into `y`.
    pub(crate) fn backward(&self, v: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.size();
        y[n - 1] = v[n - 1] / self.u_diag[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = (v[i] - self.u_super[i] * y[i + 1]) / self.u_diag[i];
        }
        check_finite(y)
    }

    /// Projected forward substitution against the running maximum held in
    /// `z`: `z_i = max(z_i, y_i − l̄_{i,i−1} z_{i−1})`. With `z = 0` on entry
    /// this is the plain projection onto `z ≥ 0`.
    pub(crate) fn projected_forward_max(&self, y: &[f64], z: &mut [f64]) {
        let n = self.size();
        z[0] = z[0].max(y[0]);
        for i in 1..n {
            z[i] = z[i].max(y[i] - self.l_sub[i] * z[i - 1]);
        }
    }
}

/// Both factorizations of the same matrix, computed once and shared by the
/// two TR-BDF2 stages of a time step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LuulFactors {
    pub lu: LuFactors,
    pub ul: UlFactors,
}

impl LuulFactors {
    pub fn size(&self) -> usize {
        self.lu.size()
    }
}

/// LU and ŪL̄ decompositions of `m`. Fails with the offending row on a zero
/// or non-finite pivot.
pub fn luul_decompose(m: &TridiagonalMatrix) -> Result<LuulFactors> {
    Ok(LuulFactors {
        lu: LuFactors::new(m)?,
        ul: UlFactors::new(m)?,
    })
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(row) => Err(Error::NonFinite { row }),
        None => Ok(()),
    }
}
