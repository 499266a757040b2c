use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Uniform tensor grid over the `(x, t)` plane.
///
/// Node `(i, j)` sits at `(x0 + i*dx, t0 + j*dt)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1x1 {
    x0: f64,
    dx: f64,
    nx: usize,
    t0: f64,
    dt: f64,
    nt: usize,
}

impl Grid1x1 {
    pub fn new(x0: f64, dx: f64, nx: usize, t0: f64, dt: f64, nt: usize) -> Result<Self> {
        if !(x0.is_finite() && t0.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        if !(dx.is_finite() && dx > 0.0 && dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("spacings must be positive (dx={dx}, dt={dt})")));
        }
        if nx < 2 || nt < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points per axis (nx={nx}, nt={nt})")));
        }
        Ok(Grid1x1 { x0, dx, nx, t0, dt, nt })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.nt - 1)
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-per-time linear index of node `(i, j)`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Fractional node coordinates of `(x, t)`; `None` outside the grid.
    pub(crate) fn locate(&self, x: f64, t: f64) -> Option<(f64, f64)> {
        const SLACK: f64 = 1e-9;
        let u = (x - self.x0) / self.dx;
        let w = (t - self.t0) / self.dt;
        let inside = |v: f64, n: usize| v >= -SLACK && v <= (n - 1) as f64 + SLACK;
        if !(u.is_finite() && w.is_finite()) || !inside(u, self.nx) || !inside(w, self.nt) {
            return None;
        }
        Some((u.clamp(0.0, (self.nx - 1) as f64), w.clamp(0.0, (self.nt - 1) as f64)))
    }

    pub fn contains(&self, x: f64, t: f64) -> bool {
        self.locate(x, t).is_some()
    }
}

impl fmt::Display for Grid1x1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}x{},{},{}", self.x0, self.dx, self.nx, self.t0, self.dt, self.nt)
    }
}

/// Parses `x0,dx,nx x t0,dt,nt` (whitespace around the `x` optional).
impl FromStr for Grid1x1 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let halves: Vec<&str> = s.split('x').collect();
        if halves.len() != 2 {
            return Err(Error::Parse(format!("grid '{s}' must read x0,dx,nx x t0,dt,nt")));
        }
        let axis = |part: &str| -> Result<(f64, f64, usize)> {
            let f: Vec<&str> = part.split(',').map(str::trim).collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("grid axis '{part}' must read origin,spacing,count")));
            }
            let bad = |what: &str| Error::Parse(format!("bad {what} in grid axis '{part}'"));
            Ok((
                f[0].parse().map_err(|_| bad("origin"))?,
                f[1].parse().map_err(|_| bad("spacing"))?,
                f[2].parse().map_err(|_| bad("count"))?,
            ))
        };
        let (x0, dx, nx) = axis(halves[0])?;
        let (t0, dt, nt) = axis(halves[1])?;
        Grid1x1::new(x0, dx, nx, t0, dt, nt)
    }
}
