use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{AnalyticField, Grid1x1, Jet};

/// Largest phase-velocity order supported on sampled data.
pub const SAMPLED_MAX_PV_ORDER: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FdAccuracy {
    #[default]
    Second,
    Fourth,
}

impl FdAccuracy {
    fn order(self) -> usize {
        match self {
            FdAccuracy::Second => 2,
            FdAccuracy::Fourth => 4,
        }
    }
}

/// Finite-difference configuration for derivatives of sampled data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FdOptions {
    pub accuracy: FdAccuracy,
    /// Near the boundary, shift to a one-sided stencil of the same accuracy
    /// instead of failing with `StencilClipped`.
    pub one_sided_fallback: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions { accuracy: FdAccuracy::Second, one_sided_fallback: true }
    }
}

/// A wave field known only on the nodes of a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    grid: Grid1x1,
    values: Vec<f64>,
    fd: FdOptions,
}

impl SampledField {
    /// `values` are stored row-per-time: node `(i, j)` at `j * nx + i`.
    pub fn new(grid: Grid1x1, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values for a {}x{} grid, got {}",
                grid.len(),
                grid.nx(),
                grid.nt(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sample at node ({}, {}) is not finite",
                k % grid.nx(),
                k / grid.nx()
            )));
        }
        Ok(SampledField { grid, values, fd: FdOptions::default() })
    }

    pub fn with_fd(mut self, fd: FdOptions) -> Self {
        self.fd = fd;
        self
    }

    pub fn grid(&self) -> &Grid1x1 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn fd(&self) -> FdOptions {
        self.fd
    }

    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Finite-difference estimate of `d^{p+q} psi / dt^p dx^q` at node `(i, j)`.
    pub fn nodal_partial(&self, i: usize, j: usize, p_t: usize, q_x: usize) -> Result<f64> {
        let clipped = || Error::StencilClipped { i, j, p_t, q_x };
        let st = stencil(p_t, j, self.grid.nt(), self.grid.dt(), self.fd).ok_or_else(clipped)?;
        let sx = stencil(q_x, i, self.grid.nx(), self.grid.dx(), self.fd).ok_or_else(clipped)?;
        let mut acc = 0.0;
        for &(oj, wt) in &st {
            let jj = (j as isize + oj) as usize;
            let mut row = 0.0;
            for &(oi, wx) in &sx {
                row += wx * self.node((i as isize + oi) as usize, jj);
            }
            acc += wt * row;
        }
        Ok(acc)
    }

    /// Bicubic (Keys) interpolation of the nodal quantity `f(i, j)`.
    fn interpolate(
        &self,
        x: f64,
        t: f64,
        f: impl Fn(usize, usize) -> Result<f64>,
    ) -> Result<f64> {
        let (u, w) = self.grid.locate(x, t).ok_or(Error::OutOfDomain { x, t })?;
        let wx = keys_weights(u, self.grid.nx());
        let wt = keys_weights(w, self.grid.nt());
        let mut acc = 0.0;
        for &(j, a) in &wt {
            for &(i, b) in &wx {
                acc += a * b * f(i, j)?;
            }
        }
        Ok(acc)
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        self.interpolate(x, t, |i, j| Ok(self.node(i, j)))
    }

    /// Interpolated finite-difference partial at an arbitrary point.
    pub fn partial(&self, x: f64, t: f64, p_t: usize, q_x: usize) -> Result<f64> {
        if p_t + q_x == 0 {
            return self.eval(x, t);
        }
        self.interpolate(x, t, |i, j| self.nodal_partial(i, j, p_t, q_x))
    }

    pub fn jet(&self, x: f64, t: f64, order: usize) -> Result<Jet> {
        let max = SAMPLED_MAX_PV_ORDER + 1;
        if order > max {
            return Err(Error::OrderTooHigh { order, max });
        }
        let mut jet = Jet::zeros(x, t, order);
        for p in 0..=order {
            for q in 0..=order - p {
                jet.set(p, q, self.partial(x, t, p, q)?);
            }
        }
        Ok(jet)
    }
}

/// Evaluates `field` at every node of `grid`.
pub fn sample(field: &AnalyticField, grid: &Grid1x1) -> SampledField {
    let values: Vec<f64> = (0..grid.nt())
        .into_par_iter()
        .flat_map_iter(|j| {
            let t = grid.t(j);
            (0..grid.nx()).map(move |i| field.eval(grid.x(i), t))
        })
        .collect();
    SampledField { grid: *grid, values, fd: FdOptions::default() }
}

/// Cubic convolution weights (a = -1/2) at fractional node position `u`.
///
/// Positions within 1e-9 of a node collapse to that node, so on-grid queries
/// reproduce nodal values exactly. Neighbour indices are clamped at the edges.
fn keys_weights(u: f64, n: usize) -> Vec<(usize, f64)> {
    let nearest = u.round();
    if (u - nearest).abs() < 1e-9 {
        return vec![(nearest as usize, 1.0)];
    }
    let base = (u.floor() as usize).min(n - 2);
    let s = u - base as f64;
    let s2 = s * s;
    let s3 = s2 * s;
    let w = [
        0.5 * (-s3 + 2.0 * s2 - s),
        0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
        0.5 * (-3.0 * s3 + 4.0 * s2 + s),
        0.5 * (s3 - s2),
    ];
    let clamp = |k: isize| k.clamp(0, n as isize - 1) as usize;
    (0..4)
        .map(|m| (clamp(base as isize - 1 + m as isize), w[m]))
        .collect()
}

/// Offsets and scaled weights for the `m`-th derivative at node `k` of `n`.
///
/// Central stencil when it fits, otherwise (if allowed) a shifted window of
/// `m + accuracy` points, which keeps the same order of accuracy.
pub(crate) fn stencil(m: usize, k: usize, n: usize, h: f64, fd: FdOptions) -> Option<Vec<(isize, f64)>> {
    if m == 0 {
        return Some(vec![(0, 1.0)]);
    }
    let acc = fd.accuracy.order();
    let central = 2 * m.div_ceil(2) - 1 + acc;
    let r = central / 2;
    let offsets: Vec<isize> = if k >= r && k + r < n {
        (-(r as isize)..=r as isize).collect()
    } else if fd.one_sided_fallback {
        let size = m + acc;
        if size > n {
            return None;
        }
        let start = k.saturating_sub(size / 2).min(n - size);
        (start..start + size).map(|s| s as isize - k as isize).collect()
    } else {
        return None;
    };
    let nodes: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
    let scale = h.powi(m as i32);
    let w = fornberg_weights(0.0, &nodes, m);
    Some(offsets.into_iter().zip(w).map(|(o, c)| (o, c / scale)).collect())
}

/// Finite-difference weights for the `m`-th derivative at `z` on arbitrary
/// distinct `nodes` (Fornberg's recursion).
pub fn fornberg_weights(z: f64, nodes: &[f64], m: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}
