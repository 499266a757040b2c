//! Lorentz boosts of events and fields, and the transformation rules of the
//! zero- and first-order phase velocities between inertial frames.
//!
//! Conventions: [`boost_event`] maps `(x, t)` to
//! `(gamma (x - V t), gamma (t - V x / c^2))`. A field `psi'` given in the
//! boosted coordinates is seen in the original frame as
//! `psi(x, t) = psi'(boost_event(x, t))` (see [`AnalyticField::boosted`]);
//! its zero-order velocity at `(x, t)` is then [`add_v0`] of the velocity of
//! `psi'` at the boosted event.
//!
//! [`AnalyticField::boosted`]: crate::field::AnalyticField::boosted

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Jet;
use crate::taylor::Real;

/// Relative frame velocity `V` and light speed `c`, with `|V| < c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoostFrame {
    v: f64,
    c: f64,
}

impl BoostFrame {
    pub fn new(v: f64, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("light speed must be positive, got {c}")));
        }
        if !(v.is_finite() && v.abs() < c) {
            return Err(Error::InvalidParameter(format!("frame speed |{v}| must be below c = {c}")));
        }
        Ok(BoostFrame { v, c })
    }

    pub fn velocity(&self) -> f64 {
        self.v
    }

    pub fn light_speed(&self) -> f64 {
        self.c
    }

    pub fn beta(&self) -> f64 {
        self.v / self.c
    }

    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - self.beta() * self.beta()).sqrt()
    }

    pub fn inverse(&self) -> BoostFrame {
        BoostFrame { v: -self.v, c: self.c }
    }

    pub(crate) fn apply<R: Real>(&self, x: R, t: R) -> (R, R) {
        let g = self.gamma();
        let xb = (x - t * self.v) * g;
        let tb = (t - x * (self.v / (self.c * self.c))) * g;
        (xb, tb)
    }
}

pub fn boost_event(frame: &BoostFrame, x: f64, t: f64) -> (f64, f64) {
    frame.apply(x, t)
}

/// Relativistic addition `(v0 + V) / (1 + v0 V / c^2)`.
pub fn add_v0(frame: &BoostFrame, v0: f64) -> Result<f64> {
    let den = 1.0 + v0 * frame.v / (frame.c * frame.c);
    if den.abs() <= 4.0 * f64::EPSILON {
        return Err(Error::DegenerateDenominator(format!("1 + v0 V / c^2 = {den:e}")));
    }
    Ok((v0 + frame.v) / den)
}

/// Overall sign of the first-order addition rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// Leading minus sign kept, so that `V = 0` maps `v_I` to `-v_I`.
    #[default]
    AsPrinted,
    /// Leading minus dropped; `V = 0` is the identity and the rule agrees
    /// with [`boost_vi_general`] on free-wave fields.
    Corrected,
}

/// First-order velocity addition for fields obeying the free wave equation
/// with propagation speed `c`:
/// `-((1 + b^2) v_I + 2V) / ((1 + b^2) + 2 V v_I / c^2)`, `b = V/c`,
/// with the leading sign controlled by `convention`.
pub fn add_vi_freewave(frame: &BoostFrame, vi: f64, convention: SignConvention) -> Result<f64> {
    let c2 = frame.c * frame.c;
    let k = 1.0 + frame.v * frame.v / c2;
    let num = k * vi + 2.0 * frame.v;
    let den = k + 2.0 * frame.v * vi / c2;
    if den.abs() <= 4.0 * f64::EPSILON * k {
        return Err(Error::DegenerateDenominator(format!("first-order addition denominator {den:e}")));
    }
    let sign = match convention {
        SignConvention::AsPrinted => -1.0,
        SignConvention::Corrected => 1.0,
    };
    Ok(sign * num / den)
}

/// First-order velocity of the boosted field, from the second derivatives of
/// the unboosted field held in `jet`:
///
/// ```text
///          (1 + V^2/c^2) psi_xt - V (psi_tt / c^2 + psi_xx)
/// v'_I = - -------------------------------------------------
///           V^2/c^4 psi_tt + psi_xx - 2 V/c^2 psi_xt
/// ```
///
/// `None` when the denominator is below `1e-9` of the largest term in it.
pub fn boost_vi_general(frame: &BoostFrame, jet: &Jet) -> Option<f64> {
    assert!(jet.order() >= 2, "boost_vi_general needs a jet of order >= 2");
    let (v, c2) = (frame.v, frame.c * frame.c);
    let (tt, xx, xt) = (jet.d(2, 0), jet.d(0, 2), jet.d(1, 1));
    let num = (1.0 + v * v / c2) * xt - v * (tt / c2 + xx);
    let terms = [v * v / (c2 * c2) * tt, xx, -2.0 * v / c2 * xt];
    let den: f64 = terms.iter().sum();
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if den.abs() < (1e-9 * scale).max(1e-300) {
        return None;
    }
    Some(-num / den)
}

/// Which addition rule a subluminality sweep exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdditionRule {
    Order0,
    Order1,
}

impl std::str::FromStr for AdditionRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "order0" => Ok(AdditionRule::Order0),
            "order1" => Ok(AdditionRule::Order1),
            other => Err(Error::Parse(format!("unknown addition rule '{other}'"))),
        }
    }
}

/// Outcome of a subluminality sweep; velocities are in units of `c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub rule: AdditionRule,
    pub resolution: usize,
    pub max_abs_vprime_over_c: f64,
    /// `(v / c, V / c)` pairs whose transformed speed exceeds `c`.
    pub violations: Vec<(f64, f64)>,
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("audit report serializes")
    }
}

/// Relative slack on `|v'| <= c` before a pair counts as a violation.
pub const SUBLUMINAL_SLACK: f64 = 1e-12;

/// Sweeps `v` and `V` over `resolution` cell-centred values each in `(-c, c)`
/// and records the largest transformed speed.
pub fn subluminality_audit(
    rule: AdditionRule,
    resolution: usize,
    convention: SignConvention,
) -> Result<AuditReport> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!("resolution must be >= 2, got {resolution}")));
    }
    let node = |k: usize| -1.0 + (2 * k + 1) as f64 / resolution as f64;
    let rows: Vec<(f64, Vec<(f64, f64)>)> = (0..resolution)
        .into_par_iter()
        .map(|a| {
            let frame = BoostFrame::new(node(a), 1.0).expect("cell centres lie inside (-1, 1)");
            let mut worst = 0.0f64;
            let mut bad = Vec::new();
            for b in 0..resolution {
                let v = node(b);
                let vp = match rule {
                    AdditionRule::Order0 => add_v0(&frame, v),
                    AdditionRule::Order1 => add_vi_freewave(&frame, v, convention),
                };
                let r = match vp {
                    Ok(vp) => vp.abs(),
                    Err(_) => f64::INFINITY,
                };
                worst = worst.max(r);
                if r > 1.0 + SUBLUMINAL_SLACK {
                    bad.push((v, frame.v));
                }
            }
            (worst, bad)
        })
        .collect();
    let max = rows.iter().fold(0.0f64, |m, r| m.max(r.0));
    let violations = rows.into_iter().flat_map(|r| r.1).collect();
    Ok(AuditReport { rule, resolution, max_abs_vprime_over_c: max, violations })
}
