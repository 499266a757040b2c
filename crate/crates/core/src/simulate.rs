//! Explicit leapfrog solution of
//! `psi_tt = a(x)^2 psi_xx - 2 gamma psi_t` on a uniform grid.
//!
//! The damping term is centred in time, so one step reads
//!
//! ```text
//! (1 + g dt) psi^{n+1} = 2 psi^n - (1 - g dt) psi^{n-1} + dt^2 a^2 L psi^n
//! ```
//!
//! with `L` the three-point Laplacian. The first step uses the Taylor start
//! `psi^1 = psi^0 + dt psi_t + dt^2/2 (a^2 L psi^0 - 2 g psi_t)`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{AnalyticField, Grid1x1, SampledField};
use crate::profile::Profile;

/// Magnitude beyond which a run is declared blown up.
pub const BLOWUP_LIMIT: f64 = 1e12;

/// Rows shorter than this are updated serially.
const PAR_THRESHOLD: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Node `nx` is identified with node 0.
    #[default]
    Periodic,
    /// Mirror ghost nodes: zero slope at both ends.
    Reflecting,
}

impl FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "periodic" => Ok(Boundary::Periodic),
            "reflecting" | "reflect" => Ok(Boundary::Reflecting),
            other => Err(Error::Parse(format!("unknown boundary '{other}'"))),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Reflecting => "reflecting",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    /// `psi` and `psi_t` taken from a closed-form field at `t0`.
    Analytic(AnalyticField),
    Arrays { psi: Vec<f64>, psi_t: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimSpec {
    pub grid: Grid1x1,
    /// Propagation speed `a(x) > 0`.
    pub speed: Profile,
    /// Damping rate; negative values amplify.
    pub gamma: f64,
    pub initial: InitialCondition,
    pub boundary: Boundary,
}

impl SimSpec {
    /// `max a(x_i) dt / dx` over the grid nodes.
    pub fn cfl_number(&self) -> f64 {
        let g = &self.grid;
        (0..g.nx()).map(|i| self.speed.eval(g.x(i))).fold(0.0f64, f64::max) * g.dt() / g.dx()
    }
}

/// Two time levels of the leapfrog scheme.
#[derive(Clone, Debug)]
pub struct Leapfrog {
    prev: Vec<f64>,
    curr: Vec<f64>,
    a2: Vec<f64>,
    gamma: f64,
    dt: f64,
    dx: f64,
    boundary: Boundary,
}

impl Leapfrog {
    /// Validates `spec` and takes the start-up step; `previous()` then holds
    /// `psi^0` and `current()` holds `psi^1`.
    pub fn new(spec: &SimSpec) -> Result<Self> {
        let g = &spec.grid;
        let nx = g.nx();
        let a: Vec<f64> = (0..nx).map(|i| spec.speed.eval(g.x(i))).collect();
        if let Some(bad) = a.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!("propagation speed must be positive, got {bad}")));
        }
        let ratio = spec.cfl_number();
        if ratio > 1.0 {
            return Err(Error::CflViolation { ratio });
        }
        if !spec.gamma.is_finite() || spec.gamma.abs() * g.dt() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "|gamma| dt must be below 1, got gamma = {}",
                spec.gamma
            )));
        }
        let (psi, psi_t) = match &spec.initial {
            InitialCondition::Analytic(f) => {
                let t0 = g.t0();
                let pairs: Vec<(f64, f64)> = (0..nx)
                    .map(|i| f.jet(g.x(i), t0, 1).map(|j| (j.value(), j.d(1, 0))))
                    .collect::<Result<_>>()?;
                pairs.into_iter().unzip()
            }
            InitialCondition::Arrays { psi, psi_t } => {
                if psi.len() != nx || psi_t.len() != nx {
                    return Err(Error::InvalidGrid(format!(
                        "initial arrays have lengths {} and {}, grid has nx = {nx}",
                        psi.len(),
                        psi_t.len()
                    )));
                }
                (psi.clone(), psi_t.clone())
            }
        };
        if psi.iter().chain(&psi_t).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("initial profile is not finite".into()));
        }
        let a2: Vec<f64> = a.iter().map(|v| v * v).collect();
        let mut lf = Leapfrog {
            prev: psi.clone(),
            curr: psi,
            a2,
            gamma: spec.gamma,
            dt: g.dt(),
            dx: g.dx(),
            boundary: spec.boundary,
        };
        let dt = lf.dt;
        let lap = lf.laplacian(&lf.prev);
        lf.curr = (0..nx)
            .map(|i| lf.prev[i] + dt * psi_t[i] + 0.5 * dt * dt * (lf.a2[i] * lap[i] - 2.0 * lf.gamma * psi_t[i]))
            .collect();
        Ok(lf)
    }

    pub fn previous(&self) -> &[f64] {
        &self.prev
    }

    pub fn current(&self) -> &[f64] {
        &self.curr
    }

    fn neighbours(&self, i: usize) -> (usize, usize) {
        let n = self.curr.len();
        match self.boundary {
            Boundary::Periodic => ((i + n - 1) % n, (i + 1) % n),
            Boundary::Reflecting => {
                let l = if i == 0 { 1 } else { i - 1 };
                let r = if i == n - 1 { n - 2 } else { i + 1 };
                (l, r)
            }
        }
    }

    fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let h2 = self.dx * self.dx;
        (0..u.len())
            .map(|i| {
                let (l, r) = self.neighbours(i);
                (u[l] - 2.0 * u[i] + u[r]) / h2
            })
            .collect()
    }

    /// Advances one time level.
    pub fn step(&mut self) {
        let (dt, g) = (self.dt, self.gamma);
        let h2 = self.dx * self.dx;
        let (c_prev, c_den) = (1.0 - g * dt, 1.0 / (1.0 + g * dt));
        let update = |i: usize| {
            let (l, r) = self.neighbours(i);
            let u = &self.curr;
            let lap = (u[l] - 2.0 * u[i] + u[r]) / h2;
            (2.0 * u[i] - c_prev * self.prev[i] + dt * dt * self.a2[i] * lap) * c_den
        };
        let n = self.curr.len();
        let next: Vec<f64> = if n >= PAR_THRESHOLD {
            (0..n).into_par_iter().map(update).collect()
        } else {
            (0..n).map(update).collect()
        };
        self.prev = std::mem::replace(&mut self.curr, next);
    }

    /// Swaps the two stored levels, so that further steps run backwards in
    /// time. Exact for `gamma = 0`.
    pub fn reverse(&mut self) {
        std::mem::swap(&mut self.prev, &mut self.curr);
    }

    /// Discrete energy between the two stored levels,
    /// `sum w (1/a^2) ((u1 - u0)/dt)^2 dx + sum (D+ u1)(D+ u0) dx`, with
    /// half weights at reflecting ends. Conserved exactly by undamped steps.
    pub fn energy(&self) -> f64 {
        let n = self.curr.len();
        let (u0, u1) = (&self.prev, &self.curr);
        let mut kinetic = 0.0;
        for i in 0..n {
            let w = match self.boundary {
                Boundary::Reflecting if i == 0 || i == n - 1 => 0.5,
                _ => 1.0,
            };
            let v = (u1[i] - u0[i]) / self.dt;
            kinetic += w * v * v / self.a2[i];
        }
        let edges = match self.boundary {
            Boundary::Periodic => n,
            Boundary::Reflecting => n - 1,
        };
        let mut strain = 0.0;
        for i in 0..edges {
            let r = (i + 1) % n;
            strain += (u1[r] - u1[i]) * (u0[r] - u0[i]) / (self.dx * self.dx);
        }
        (kinetic + strain) * self.dx
    }
}

/// Solves the spec over its whole grid and returns the space-time field.
pub fn run(spec: &SimSpec) -> Result<SampledField> {
    let g = &spec.grid;
    let mut lf = Leapfrog::new(spec)?;
    let mut values = Vec::with_capacity(g.len());
    values.extend_from_slice(lf.previous());
    values.extend_from_slice(lf.current());
    let check = |row: &[f64], step: usize| -> Result<()> {
        if row.iter().any(|v| !(v.abs() <= BLOWUP_LIMIT)) {
            return Err(Error::NonfiniteBlowup { step, limit: BLOWUP_LIMIT });
        }
        Ok(())
    };
    check(lf.current(), 1)?;
    for step in 2..g.nt() {
        lf.step();
        check(lf.current(), step)?;
        values.extend_from_slice(lf.current());
    }
    SampledField::new(*g, values)
}
