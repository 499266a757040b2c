//! Modes `psi(xi t - k(x) x)`, `k(x) = xi n(x) / c`, travelling through a
//! medium with refractive index `n(x)`.
//!
//! Everything here is phrased through the optical path `g(x) = x n(x)`:
//! the zero-order velocity is `c / g'(x)` and the transit time between two
//! points is `(g(x1) - g(x0)) / c`.
//!
//! Two versions of the first-order velocity are provided. The `vi_local` /
//! `vi_global` pair evaluates the closed forms
//!
//! ```text
//! c / v_I        = (c / xi) g''/g' - g'
//! c / v_I(dx)    = n(dx) - c / (xi dx) ln(n'(dx) dx + n(dx))
//! ```
//!
//! exactly as stated. The `*_rederived` pair applies `-psi_xt / psi_xx` to the
//! actual mode by jet arithmetic and integrates `dt/dx = 1 / v_I` from the
//! origin. For the exponential envelope the local rederived value is
//! `c / v_I = g' - (c / xi) g''/g'`, the negative of the closed form, while
//! the global one agrees with it whenever `n(0) = 1`. [`sign_audit`] reports
//! both side by side.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::io::format_float;
use crate::field::{AnalyticField, Envelope};
use crate::profile::Profile;

/// Refractive index `n(x)` and vacuum light speed `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct MediumProfile {
    pub index: Profile,
    pub c: f64,
}

impl MediumProfile {
    pub fn new(index: Profile, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("light speed must be positive, got {c}")));
        }
        Ok(MediumProfile { index, c })
    }

    pub fn n(&self, x: f64) -> f64 {
        self.index.eval(x)
    }

    pub fn n_prime(&self, x: f64) -> f64 {
        self.index.derivative(x)
    }

    /// `(g, g', g'')` for `g = x n(x)`.
    pub fn optical_path(&self, x: f64) -> (f64, f64, f64) {
        let (n, d1, d2) = self.index.derivatives(x);
        (x * n, n + x * d1, 2.0 * d1 + x * d2)
    }

    /// Checks `n > 0` and that `n'` agrees with a central difference of `n`
    /// (to `1e-8` relative) at 100 points spread over `[x0, x1]`.
    pub fn check(&self, x0: f64, x1: f64) -> Result<()> {
        if !(x0.is_finite() && x1.is_finite() && x1 > x0) {
            return Err(Error::InvalidParameter(format!("bad working domain [{x0}, {x1}]")));
        }
        let span = x1 - x0;
        let h = 1e-5 * span.max(1e-3);
        for k in 0..100 {
            let x = x0 + span * (k as f64 + 0.5) / 100.0;
            let n = self.n(x);
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::InvalidParameter(format!("n({x}) = {n} is not positive")));
            }
            let fd = (self.n(x + h) - self.n(x - h)) / (2.0 * h);
            let d = self.n_prime(x);
            let scale = d.abs().max(n.abs() / span);
            if (fd - d).abs() > 1e-8 * scale {
                return Err(Error::InvalidParameter(format!(
                    "n'({x}) = {d} disagrees with the difference quotient {fd}"
                )));
            }
        }
        Ok(())
    }
}

/// Parameters of the mode `psi(xi (t - x n(x) / c))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSpec {
    pub xi: f64,
    pub envelope: Envelope,
    pub medium: MediumProfile,
}

impl ModeSpec {
    pub fn new(xi: f64, envelope: Envelope, medium: MediumProfile) -> Result<Self> {
        if !xi.is_finite() || xi == 0.0 {
            return Err(Error::InvalidParameter(format!("xi must be finite and nonzero, got {xi}")));
        }
        Ok(ModeSpec { xi, envelope, medium })
    }

    pub fn field(&self) -> AnalyticField {
        AnalyticField::inhomogeneous(self.clone())
    }
}

fn nonzero(v: f64, scale: f64, what: &str) -> Result<f64> {
    if !v.is_finite() || v.abs() <= 1e-12 * scale {
        return Err(Error::DegenerateDenominator(format!("{what} = {v:e}")));
    }
    Ok(v)
}

/// `c / (n'(x) x + n(x))`.
pub fn v0_local(medium: &MediumProfile, x: f64) -> Result<f64> {
    let (n, d1, _) = medium.index.derivatives(x);
    let g1 = nonzero(n + x * d1, n.abs() + (x * d1).abs(), "n'x + n")?;
    Ok(medium.c / g1)
}

/// `(x1 n(x1) - x0 n(x0)) / c`, refusing paths across a zero of `(x n)'`.
pub fn transit_time(medium: &MediumProfile, x0: f64, x1: f64) -> Result<f64> {
    if x1 == x0 {
        return Err(Error::DegenerateInterval);
    }
    const PROBES: usize = 1000;
    let slope = |x: f64| medium.optical_path(x).1;
    let mut prev = (x0, slope(x0));
    for k in 0..=PROBES {
        let x = x0 + (x1 - x0) * k as f64 / PROBES as f64;
        let s = slope(x);
        if s == 0.0 || !s.is_finite() {
            return Err(Error::PoleOnPath { x });
        }
        if s.signum() != prev.1.signum() {
            return Err(Error::PoleOnPath { x: 0.5 * (prev.0 + x) });
        }
        prev = (x, s);
    }
    Ok((medium.optical_path(x1).0 - medium.optical_path(x0).0) / medium.c)
}

/// `c / n(dx)`: average velocity from the origin to `dx`.
pub fn v0_global(medium: &MediumProfile, dx: f64) -> f64 {
    medium.c / medium.n(dx)
}

/// `v_I` from `c / v_I = (c / xi) (xn)''/(xn)' - (xn)'`.
pub fn vi_local(mode: &ModeSpec, x: f64) -> Result<f64> {
    let c = mode.medium.c;
    let (_, g1, g2) = mode.medium.optical_path(x);
    let g1 = nonzero(g1, 1.0, "(x n)'")?;
    let log_term = c / mode.xi * g2 / g1;
    let rhs = nonzero(log_term - g1, log_term.abs() + g1.abs(), "c / v_I")?;
    Ok(c / rhs)
}

/// `v_I` from `c / v_I = n(dx) - c / (xi dx) ln(n'(dx) dx + n(dx))`.
pub fn vi_global(mode: &ModeSpec, dx: f64) -> Result<f64> {
    if dx == 0.0 || !dx.is_finite() {
        return Err(Error::DegenerateInterval);
    }
    let c = mode.medium.c;
    let (n, d1, _) = mode.medium.index.derivatives(dx);
    let arg = d1 * dx + n;
    if !(arg > 0.0) {
        return Err(Error::NonpositiveLogArgument(arg));
    }
    let corr = c / (mode.xi * dx) * arg.ln();
    let rhs = nonzero(n - corr, n.abs() + corr.abs(), "c / v_I")?;
    Ok(c / rhs)
}

/// `-psi_xt / psi_xx` of the mode at `(x, t)`, by jet arithmetic.
pub fn vi_local_rederived(mode: &ModeSpec, x: f64, t: f64) -> Result<f64> {
    let jet = mode.field().jet(x, t, 2)?;
    let (num, den) = (jet.d(1, 1), jet.d(0, 2));
    let den = nonzero(den, num.abs(), "psi_xx")?;
    Ok(-num / den)
}

/// Average first-order velocity from `(0, 0)` to `x = dx`, obtained by
/// integrating `dt/dx = 1 / v_I(x, t)` with classical RK4 in `x`.
pub fn vi_global_rederived(mode: &ModeSpec, dx: f64) -> Result<f64> {
    if dx == 0.0 || !dx.is_finite() {
        return Err(Error::DegenerateInterval);
    }
    const STEPS: usize = 2000;
    let h = dx / STEPS as f64;
    let slowness = |x: f64, t: f64| -> Result<f64> { Ok(1.0 / vi_local_rederived(mode, x, t)?) };
    let (mut x, mut t) = (0.0, 0.0);
    for k in 0..STEPS {
        let k1 = slowness(x, t)?;
        let k2 = slowness(x + 0.5 * h, t + 0.5 * h * k1)?;
        let k3 = slowness(x + 0.5 * h, t + 0.5 * h * k2)?;
        let k4 = slowness(x + h, t + h * k3)?;
        t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        x = (k + 1) as f64 * h;
    }
    let t = nonzero(t, dx.abs() / mode.medium.c, "transit time")?;
    Ok(x / t)
}

/// One row of [`dynamic_separation`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub xi: f64,
    pub v0_global: f64,
    pub vi_global: f64,
    pub vi_rederived: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub dx: f64,
    pub rows: Vec<SeparationRow>,
    /// `max - min` of each column over the rows.
    pub v0_spread: f64,
    pub vi_spread: f64,
    pub vi_rederived_spread: f64,
}

fn spread(v: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    hi - lo
}

impl SeparationReport {
    /// CSV with columns `xi,v0_global,vI_global,vI_rederived`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "xi,v0_global,vI_global,vI_rederived")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                format_float(r.xi),
                format_float(r.v0_global),
                format_float(r.vi_global),
                format_float(r.vi_rederived)
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Global velocities from the origin to `dx` for each `xi`. The rederived
/// column uses the exponential envelope, for which the closed forms were
/// obtained.
pub fn dynamic_separation(medium: &MediumProfile, dx: f64, xi_list: &[f64]) -> Result<SeparationReport> {
    if xi_list.is_empty() {
        return Err(Error::InvalidParameter("xi list is empty".into()));
    }
    if let Some(bad) = xi_list.iter().find(|xi| **xi == 0.0 || !xi.is_finite()) {
        return Err(Error::InvalidParameter(format!("xi must be finite and nonzero, got {bad}")));
    }
    let rows = xi_list
        .par_iter()
        .map(|&xi| {
            let mode = ModeSpec::new(xi, Envelope::Exponential, medium.clone())?;
            Ok(SeparationRow {
                xi,
                v0_global: v0_global(medium, dx),
                vi_global: vi_global(&mode, dx)?,
                vi_rederived: vi_global_rederived(&mode, dx)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeparationReport {
        dx,
        v0_spread: spread(rows.iter().map(|r| r.v0_global)),
        vi_spread: spread(rows.iter().map(|r| r.vi_global)),
        vi_rederived_spread: spread(rows.iter().map(|r| r.vi_rederived)),
        rows,
    })
}

/// How a closed-form value relates to its rederived counterpart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Agree,
    /// Equal magnitude, opposite sign.
    Negated,
    Differ,
}

/// Relative tolerance used to classify [`Relation`].
pub const AUDIT_TOLERANCE: f64 = 1e-8;

fn relate(printed: f64, rederived: f64) -> Relation {
    let tol = AUDIT_TOLERANCE * printed.abs().max(rederived.abs()).max(1e-300);
    if (printed - rederived).abs() <= tol {
        Relation::Agree
    } else if (printed + rederived).abs() <= tol {
        Relation::Negated
    } else {
        Relation::Differ
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    /// `"vI_local"` (at position `x`) or `"vI_global"` (from 0 to `x`).
    pub quantity: String,
    pub xi: f64,
    pub x: f64,
    pub printed: f64,
    pub rederived: f64,
    pub relation: Relation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignAuditReport {
    pub medium: String,
    pub c: f64,
    pub entries: Vec<AuditEntry>,
    /// Entries whose two values differ beyond [`AUDIT_TOLERANCE`].
    pub discrepancies: usize,
}

impl SignAuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("audit report serializes")
    }
}

/// Compares the closed-form first-order velocities with the rederived ones
/// (exponential envelope, local values at `t = 0`) for every `xi` and every
/// probe position.
pub fn sign_audit(medium: &MediumProfile, xi_list: &[f64], probes: &[f64]) -> Result<SignAuditReport> {
    let mut entries = Vec::new();
    for &xi in xi_list {
        let mode = ModeSpec::new(xi, Envelope::Exponential, medium.clone())?;
        for &x in probes {
            entries.push(AuditEntry {
                quantity: "vI_local".into(),
                xi,
                x,
                printed: vi_local(&mode, x)?,
                rederived: vi_local_rederived(&mode, x, 0.0)?,
                relation: Relation::Agree,
            });
            if x != 0.0 {
                entries.push(AuditEntry {
                    quantity: "vI_global".into(),
                    xi,
                    x,
                    printed: vi_global(&mode, x)?,
                    rederived: vi_global_rederived(&mode, x)?,
                    relation: Relation::Agree,
                });
            }
        }
    }
    for e in &mut entries {
        e.relation = relate(e.printed, e.rederived);
    }
    let discrepancies = entries.iter().filter(|e| e.relation != Relation::Agree).count();
    Ok(SignAuditReport { medium: medium.index.to_string(), c: medium.c, entries, discrepancies })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(a: f64, b: f64) -> MediumProfile {
        MediumProfile::new(Profile::Linear { intercept: a, slope: b }, 1.0).unwrap()
    }

    #[test]
    fn zero_order_examples() {
        let m = MediumProfile::new(Profile::Constant(1.5), 3.0).unwrap();
        assert_eq!(v0_local(&m, 7.0).unwrap(), 2.0);
        let m = linear(1.0, 0.1);
        assert!((v0_local(&m, 2.0).unwrap() - 1.0 / 1.4).abs() < 1e-15);
        assert!((transit_time(&m, 0.0, 2.0).unwrap() - 2.4).abs() < 1e-15);
        assert!((v0_global(&m, 2.0) - 1.0 / 1.2).abs() < 1e-15);
        assert_eq!(transit_time(&m, 1.0, 1.0), Err(Error::DegenerateInterval));
        let inv = MediumProfile::new(Profile::parse("expr:1/x").unwrap(), 1.0).unwrap();
        assert!(matches!(v0_local(&inv, 2.0), Err(Error::DegenerateDenominator(_))));
        // (x n)' = 1 - 2x vanishes at x = 1/2
        let dip = linear(1.0, -1.0);
        assert!(matches!(transit_time(&dip, 0.0, 1.0), Err(Error::PoleOnPath { .. })));
    }

    #[test]
    fn first_order_examples() {
        let m = linear(1.0, 0.1);
        let mode = ModeSpec::new(10.0, Envelope::Exponential, m.clone()).unwrap();
        let inv = 1.0 / vi_local(&mode, 1.0).unwrap();
        assert!((inv - (0.1 * 0.2 / 1.2 - 1.2)).abs() < 1e-14);
        let inv = 1.0 / vi_global(&mode, 2.0).unwrap();
        assert!((inv - (1.2 - 1.4f64.ln() / 20.0)).abs() < 1e-14);
        assert!((inv - 1.1831764).abs() < 1e-7);
        let vac = ModeSpec::new(3.0, Envelope::Exponential, linear(1.0, 0.0)).unwrap();
        assert_eq!(vi_global(&vac, 0.7).unwrap(), 1.0);
        assert_eq!(vi_local(&vac, 0.7).unwrap(), -1.0);
        assert_eq!(vi_global(&vac, 0.0), Err(Error::DegenerateInterval));
        let neg = ModeSpec::new(3.0, Envelope::Exponential, linear(1.0, -1.0)).unwrap();
        assert!(matches!(vi_global(&neg, 1.0), Err(Error::NonpositiveLogArgument(_))));
        assert!(ModeSpec::new(0.0, Envelope::Exponential, m).is_err());
    }

    #[test]
    fn rederived_local_is_negated_closed_form() {
        let mode = ModeSpec::new(10.0, Envelope::Exponential, linear(1.0, 0.1)).unwrap();
        for x in [0.0, 0.5, 1.0, 3.0] {
            let p = vi_local(&mode, x).unwrap();
            let r = vi_local_rederived(&mode, x, 0.3).unwrap();
            assert!((p + r).abs() < 1e-12 * p.abs(), "{x}: {p} vs {r}");
        }
    }

    #[test]
    fn rederived_global_matches_closed_form_when_n0_is_one() {
        let mode = ModeSpec::new(10.0, Envelope::Exponential, linear(1.0, 0.1)).unwrap();
        let p = vi_global(&mode, 2.0).unwrap();
        let r = vi_global_rederived(&mode, 2.0).unwrap();
        assert!((p - r).abs() < 1e-10, "{p} vs {r}");
        let shifted = ModeSpec::new(10.0, Envelope::Exponential, linear(1.5, 0.1)).unwrap();
        let p = vi_global(&shifted, 2.0).unwrap();
        let r = vi_global_rederived(&shifted, 2.0).unwrap();
        assert!((p - r).abs() > 1e-3);
    }

    #[test]
    fn separation_examples() {
        let rep = dynamic_separation(&linear(1.0, 0.1), 2.0, &[1.0, 10.0, 100.0]).unwrap();
        assert_eq!(rep.v0_spread, 0.0);
        assert!(rep.vi_spread > 0.0);
        let vi: Vec<f64> = rep.rows.iter().map(|r| r.vi_global).collect();
        assert!(vi[0] > vi[1] && vi[1] > vi[2]);
        let flat = dynamic_separation(&linear(1.0, 0.0), 2.0, &[1.0, 10.0]).unwrap();
        assert_eq!(flat.v0_spread, 0.0);
        assert_eq!(flat.vi_spread, 0.0);
        assert!(dynamic_separation(&linear(1.0, 0.1), 2.0, &[1.0, 0.0]).is_err());
        assert!(dynamic_separation(&linear(1.0, 0.1), 2.0, &[]).is_err());
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("xi,v0_global,vI_global,vI_rederived\n"));
    }

    #[test]
    fn audit_flags_the_local_sign() {
        let rep = sign_audit(&linear(1.0, 0.1), &[10.0], &[1.0, 2.0]).unwrap();
        let local: Vec<_> = rep.entries.iter().filter(|e| e.quantity == "vI_local").collect();
        assert!(local.iter().all(|e| e.relation == Relation::Negated));
        let global: Vec<_> = rep.entries.iter().filter(|e| e.quantity == "vI_global").collect();
        assert!(global.iter().all(|e| e.relation == Relation::Agree));
        assert_eq!(rep.discrepancies, 2);
        assert!(rep.to_json().contains("\"relation\": \"negated\""));
    }

    #[test]
    fn profile_check() {
        assert!(linear(1.0, 0.1).check(0.0, 5.0).is_ok());
        assert!(linear(1.0, -1.0).check(0.0, 5.0).is_err());
        let ramp = MediumProfile::new(Profile::parse("tanh:1,2,0,0.5").unwrap(), 1.0).unwrap();
        assert!(ramp.check(-3.0, 3.0).is_ok());
        assert!(MediumProfile::new(Profile::Constant(1.0), 0.0).is_err());
    }
}
