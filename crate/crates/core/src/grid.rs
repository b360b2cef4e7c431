//! Spatial and temporal meshes.
//!
//! Both grids serialize to `{"nodes": [...]}` and are validated again on
//! deserialization, so a grid read back from disk obeys the same
//! invariants as one built by the constructors here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default stretch for [`SpaceGrid::hyperbolic`], as a fraction of the
/// domain width.
pub const DEFAULT_STRETCH: f64 = 0.05;

#[derive(Deserialize)]
struct RawNodes {
    nodes: Vec<f64>,
}

/// Strictly increasing asset-price nodes `x_0 < x_1 < ... < x_m` with
/// `x_0 >= 0` and `m >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNodes")]
pub struct SpaceGrid {
    nodes: Vec<f64>,
}

impl TryFrom<RawNodes> for SpaceGrid {
    type Error = Error;

    fn try_from(raw: RawNodes) -> Result<Self> {
        SpaceGrid::from_nodes(raw.nodes)
    }
}

impl SpaceGrid {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "space grid needs at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if let Some(i) = nodes.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid(format!("node {i} is not finite")));
        }
        if nodes[0] < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "first node {} is negative",
                nodes[0]
            )));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "nodes not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(SpaceGrid { nodes })
    }

    /// `m` equal intervals on `[x_min, x_max]`.
    pub fn uniform(x_min: f64, x_max: f64, m: usize) -> Result<Self> {
        check_bounds(x_min, x_max, m)?;
        let width = x_max - x_min;
        let mut nodes: Vec<f64> = (0..=m)
            .map(|i| x_min + i as f64 * width / m as f64)
            .collect();
        nodes[m] = x_max;
        SpaceGrid::from_nodes(nodes)
    }

    /// Hyperbolic-sine stretched grid, densest around `center`.
    ///
    /// Nodes are `center + α·sinh(c₂ξ + c₁(1−ξ))` for `ξ = i/m`, with
    /// `α = stretch·(x_max − x_min)`, `c₁ = asinh((x_min − center)/α)` and
    /// `c₂ = asinh((x_max − center)/α)`. Small stretch concentrates nodes
    /// near the center; large stretch tends to a uniform grid.
    pub fn hyperbolic(x_min: f64, x_max: f64, m: usize, center: f64, stretch: f64) -> Result<Self> {
        check_bounds(x_min, x_max, m)?;
        if !(center > x_min && center < x_max) {
            return Err(Error::invalid(
                "center",
                format!("{center} is not inside ({x_min}, {x_max})"),
            ));
        }
        if !(stretch > 0.0 && stretch.is_finite()) {
            return Err(Error::invalid("stretch", format!("{stretch} must be > 0")));
        }
        let alpha = stretch * (x_max - x_min);
        let c1 = ((x_min - center) / alpha).asinh();
        let c2 = ((x_max - center) / alpha).asinh();
        let mut nodes: Vec<f64> = (0..=m)
            .map(|i| {
                let xi = i as f64 / m as f64;
                center + alpha * (c2 * xi + c1 * (1.0 - xi)).sinh()
            })
            .collect();
        nodes[0] = x_min;
        nodes[m] = x_max;
        SpaceGrid::from_nodes(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of intervals `m` (there are `m + 1` nodes).
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lower(&self) -> f64 {
        self.nodes[0]
    }

    pub fn upper(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// `Δx_i = x_{i+1} − x_i` for `i = 0..m−1`.
    pub fn spacing(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

fn check_bounds(x_min: f64, x_max: f64, m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::invalid("m", format!("need at least 2 intervals, got {m}")));
    }
    if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
        return Err(Error::InvalidGrid(format!(
            "bounds [{x_min}, {x_max}] are not increasing"
        )));
    }
    Ok(())
}

/// Times `0 = t_0 < t_1 < ... < t_n = T`, stepped backwards from expiry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNodes")]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TryFrom<RawNodes> for TimeGrid {
    type Error = Error;

    fn try_from(raw: RawNodes) -> Result<Self> {
        TimeGrid::from_times(raw.nodes)
    }
}

impl TimeGrid {
    pub fn from_times(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid("time grid needs at least 2 times".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "time grid must start at 0, starts at {}",
                nodes[0]
            )));
        }
        if let Some(i) = nodes.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid(format!("time {i} is not finite")));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "times not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(TimeGrid { nodes })
    }

    /// `n` equal steps: `t_j = j·T/n`.
    pub fn constant(maturity: f64, n: usize) -> Result<Self> {
        check_time(maturity, n)?;
        let mut nodes: Vec<f64> = (0..=n).map(|j| j as f64 * maturity / n as f64).collect();
        nodes[n] = maturity;
        TimeGrid::from_times(nodes)
    }

    /// Square-root law `t_j = T − (n−j)²/n²·T`. Steps `k_j = (2(n−j)+1)T/n²`
    /// shrink with `j`, so the finest steps sit at expiry where the backward
    /// march starts.
    pub fn sqrt_law(maturity: f64, n: usize) -> Result<Self> {
        check_time(maturity, n)?;
        let nf = n as f64;
        let nodes: Vec<f64> = (0..=n)
            .map(|j| {
                let r = (n - j) as f64;
                maturity - r * r / (nf * nf) * maturity
            })
            .collect();
        TimeGrid::from_times(nodes)
    }

    pub fn times(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of steps `n`.
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn maturity(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// `k_j = t_j − t_{j−1}` for `j = 1..=n`.
    pub fn step(&self, j: usize) -> f64 {
        self.nodes[j] - self.nodes[j - 1]
    }
}

fn check_time(maturity: f64, n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid("n", "need at least one time step"));
    }
    if !(maturity > 0.0 && maturity.is_finite()) {
        return Err(Error::invalid("maturity", format!("{maturity} must be > 0")));
    }
    Ok(())
}
