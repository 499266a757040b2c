//! Wave fields `psi(x, t)`: closed-form families and sampled grids, with
//! evaluation of the mixed partial derivatives the velocity formulas need.

mod analytic;
mod grid;
pub mod io;
mod sampled;

pub use analytic::{AnalyticField, Envelope, Family, ANALYTIC_MAX_PV_ORDER};
pub use grid::Grid1x1;
pub use sampled::{fornberg_weights, sample, FdAccuracy, FdOptions, SampledField, SAMPLED_MAX_PV_ORDER};

use crate::error::Result;
use crate::taylor::MAX_DEGREE;

const DIM: usize = MAX_DEGREE + 1;

/// Mixed partial derivatives of a field at one point, up to a total order.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub x: f64,
    pub t: f64,
    order: usize,
    d: [[f64; DIM]; DIM],
}

impl Jet {
    pub(crate) fn zeros(x: f64, t: f64, order: usize) -> Self {
        Jet { x, t, order, d: [[0.0; DIM]; DIM] }
    }

    pub(crate) fn set(&mut self, p_t: usize, q_x: usize, v: f64) {
        self.d[p_t][q_x] = v;
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `d^{p+q} psi / dt^p dx^q`.
    ///
    /// # Panics
    /// If `p_t + q_x` exceeds the jet order.
    pub fn d(&self, p_t: usize, q_x: usize) -> f64 {
        assert!(
            p_t + q_x <= self.order,
            "derivative of order {} requested from a jet of order {}",
            p_t + q_x,
            self.order
        );
        self.d[p_t][q_x]
    }

    pub fn value(&self) -> f64 {
        self.d[0][0]
    }
}

/// Either kind of field.
#[derive(Clone, Debug, PartialEq)]
pub enum WaveField {
    Analytic(AnalyticField),
    Sampled(SampledField),
}

impl WaveField {
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        match self {
            WaveField::Analytic(f) => Ok(f.eval(x, t)),
            WaveField::Sampled(f) => f.eval(x, t),
        }
    }

    pub fn jet(&self, x: f64, t: f64, order: usize) -> Result<Jet> {
        match self {
            WaveField::Analytic(f) => f.jet(x, t, order),
            WaveField::Sampled(f) => f.jet(x, t, order),
        }
    }

    /// `d^{p+q} psi / dt^p dx^q` at `(x, t)`.
    pub fn partial(&self, x: f64, t: f64, p_t: usize, q_x: usize) -> Result<f64> {
        match self {
            WaveField::Analytic(f) => Ok(f.jet(x, t, p_t + q_x)?.d(p_t, q_x)),
            WaveField::Sampled(f) => f.partial(x, t, p_t, q_x),
        }
    }

    /// Highest phase-velocity order `N` available for this field.
    pub fn max_pv_order(&self) -> usize {
        match self {
            WaveField::Analytic(_) => ANALYTIC_MAX_PV_ORDER,
            WaveField::Sampled(_) => SAMPLED_MAX_PV_ORDER,
        }
    }

    pub fn contains(&self, x: f64, t: f64) -> bool {
        match self {
            WaveField::Analytic(_) => x.is_finite() && t.is_finite(),
            WaveField::Sampled(f) => f.grid().contains(x, t),
        }
    }

    pub fn as_analytic(&self) -> Option<&AnalyticField> {
        match self {
            WaveField::Analytic(f) => Some(f),
            WaveField::Sampled(_) => None,
        }
    }
}

impl From<AnalyticField> for WaveField {
    fn from(f: AnalyticField) -> Self {
        WaveField::Analytic(f)
    }
}

impl From<SampledField> for WaveField {
    fn from(f: SampledField) -> Self {
        WaveField::Sampled(f)
    }
}
