use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::Jet;
use crate::media::{MediumProfile, ModeSpec};
use crate::profile::Profile;
use crate::relativity::BoostFrame;
use crate::taylor::{Real, Taylor2, MAX_DEGREE};

/// Base pulse shape `psi(phi)` shared by the translational families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Envelope {
    /// `exp(-phi^2)`
    Gaussian,
    /// `atan(phi)`
    Arctan,
    /// `sin(phi)`
    Sine,
    /// `exp(phi)`
    Exponential,
    /// `1 / cosh(phi)`
    Sech,
}

impl Envelope {
    pub fn apply<R: Real>(self, phi: R) -> R {
        match self {
            Envelope::Gaussian => (-(phi * phi)).exp(),
            Envelope::Arctan => phi.atan(),
            Envelope::Sine => phi.sin(),
            Envelope::Exponential => phi.exp(),
            Envelope::Sech => phi.cosh().recip(),
        }
    }

    /// `[psi(phi), psi'(phi), ..., psi^(n)(phi)]`.
    pub fn derivatives(self, phi: f64, n: usize) -> Vec<f64> {
        assert!(n <= MAX_DEGREE);
        let j = self.apply(Taylor2::var_t(phi, n));
        (0..=n).map(|k| j.partial(k, 0)).collect()
    }

    pub fn parse(name: &str) -> Result<Envelope> {
        Ok(match name.trim() {
            "gauss" | "gaussian" => Envelope::Gaussian,
            "arctan" | "atan" | "kink" => Envelope::Arctan,
            "sin" | "sine" | "sinusoid" => Envelope::Sine,
            "exp" | "exponential" => Envelope::Exponential,
            "sech" => Envelope::Sech,
            other => return Err(Error::Parse(format!("unknown envelope '{other}'"))),
        })
    }
}

impl fmt::Display for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Envelope::Gaussian => "gauss",
            Envelope::Arctan => "arctan",
            Envelope::Sine => "sin",
            Envelope::Exponential => "exp",
            Envelope::Sech => "sech",
        };
        f.write_str(s)
    }
}

/// Closed-form field families.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `psi(t - x/a)`
    Translational { a: f64, envelope: Envelope },
    /// `psi(t - x/a) exp(-lambda t)`
    DampedTranslational { a: f64, lambda: f64, envelope: Envelope },
    /// `atan(t - x/a) exp(+lambda t)`: a kink that grows for positive `lambda`.
    KinkDamped { a: f64, lambda: f64 },
    /// `psi(xi t - k(x) x)` with `k(x) = xi n(x) / c`.
    InhomogeneousMode(ModeSpec),
    /// `sin(omega t - k x)`
    Harmonic { omega: f64, k: f64 },
    /// User expression in `x` and `t`.
    Custom { source: String, expr: Expr },
    /// `inner` observed through a Lorentz boost: the value at `(x, t)` is the
    /// inner field at the boosted event.
    Boosted { inner: Box<AnalyticField>, frame: BoostFrame },
}

/// A wave field given in closed form; derivatives come from jet arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticField {
    family: Family,
}

/// Largest jet order an analytic field will produce.
pub const ANALYTIC_MAX_PV_ORDER: usize = 4;

fn check_velocity(a: f64) -> Result<()> {
    if !a.is_finite() || a == 0.0 {
        return Err(Error::InvalidParameter(format!("propagation constant a must be finite and nonzero, got {a}")));
    }
    Ok(())
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}

impl AnalyticField {
    pub fn translational(a: f64, envelope: Envelope) -> Result<Self> {
        check_velocity(a)?;
        Ok(AnalyticField { family: Family::Translational { a, envelope } })
    }

    pub fn damped(a: f64, lambda: f64, envelope: Envelope) -> Result<Self> {
        check_velocity(a)?;
        check_finite("lambda", lambda)?;
        Ok(AnalyticField { family: Family::DampedTranslational { a, lambda, envelope } })
    }

    pub fn kink(a: f64, lambda: f64) -> Result<Self> {
        check_velocity(a)?;
        check_finite("lambda", lambda)?;
        Ok(AnalyticField { family: Family::KinkDamped { a, lambda } })
    }

    pub fn harmonic(omega: f64, k: f64) -> Result<Self> {
        check_finite("omega", omega)?;
        check_finite("k", k)?;
        Ok(AnalyticField { family: Family::Harmonic { omega, k } })
    }

    pub fn inhomogeneous(mode: ModeSpec) -> Self {
        AnalyticField { family: Family::InhomogeneousMode(mode) }
    }

    pub fn custom(source: &str, params: &HashMap<String, f64>) -> Result<Self> {
        let expr = Expr::parse(source, params)?;
        Ok(AnalyticField { family: Family::Custom { source: source.to_string(), expr } })
    }

    pub fn boosted(inner: AnalyticField, frame: BoostFrame) -> Self {
        AnalyticField { family: Family::Boosted { inner: Box::new(inner), frame } }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn value<R: Real>(&self, x: R, t: R) -> R {
        match &self.family {
            Family::Translational { a, envelope } => envelope.apply(t - x / *a),
            Family::DampedTranslational { a, lambda, envelope } => {
                envelope.apply(t - x / *a) * (t * -*lambda).exp()
            }
            Family::KinkDamped { a, lambda } => (t - x / *a).atan() * (t * *lambda).exp(),
            Family::InhomogeneousMode(mode) => {
                let n = mode.medium.index.value(x);
                let phi = (t - x * n / mode.medium.c) * mode.xi;
                mode.envelope.apply(phi)
            }
            Family::Harmonic { omega, k } => (t * *omega - x * *k).sin(),
            Family::Custom { expr, .. } => expr.eval(x, t),
            Family::Boosted { inner, frame } => {
                let (xb, tb) = frame.apply(x, t);
                inner.value(xb, tb)
            }
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.value(x, t)
    }

    /// All mixed partials of total order `<= order` at `(x, t)`.
    pub fn jet(&self, x: f64, t: f64, order: usize) -> Result<Jet> {
        let max = ANALYTIC_MAX_PV_ORDER + 1;
        if order > max {
            return Err(Error::OrderTooHigh { order, max });
        }
        let v = self.value(Taylor2::var_x(x, order), Taylor2::var_t(t, order));
        let mut jet = Jet::zeros(x, t, order);
        for p in 0..=order {
            for q in 0..=order - p {
                jet.set(p, q, v.partial(p, q));
            }
        }
        Ok(jet)
    }

    /// `omega / k` for the harmonic family.
    pub fn omega_over_k(&self) -> Option<f64> {
        match self.family {
            Family::Harmonic { omega, k } if k != 0.0 => Some(omega / k),
            _ => None,
        }
    }

    /// Parses the inline grammar `family:envelope,key=value,...`.
    ///
    /// | family | keys |
    /// |---|---|
    /// | `translational:<env>` | `a` |
    /// | `damped:<env>` | `a`, `lambda` |
    /// | `kink` | `a`, `lambda` |
    /// | `harmonic` | `omega`, `k` |
    /// | `inhomogeneous:<env>` | `xi`, `c` (default 1), `n` (profile, `;` for `,`) |
    /// | `custom:<expr>` | any names used by the expression |
    pub fn parse(spec: &str) -> Result<Self> {
        // families without an envelope may be written `kink,a=1`
        let (family, rest) = match spec.find([':', ',']) {
            Some(k) => (spec[..k].trim(), &spec[k + 1..]),
            None => (spec.trim(), ""),
        };
        let mut items: Vec<&str> = rest.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if family == "custom" {
            if items.is_empty() {
                return Err(Error::Parse("custom field needs an expression".into()));
            }
            let source = items.remove(0);
            let mut params = HashMap::new();
            for item in items {
                let (k, v) = split_kv(item)?;
                params.insert(k.to_string(), parse_num(k, v)?);
            }
            return AnalyticField::custom(source, &params);
        }

        let mut envelope = None;
        let mut keys: HashMap<&str, &str> = HashMap::new();
        for item in items {
            if item.contains('=') {
                let (k, v) = split_kv(item)?;
                if keys.insert(k, v).is_some() {
                    return Err(Error::Parse(format!("duplicate key '{k}'")));
                }
            } else if envelope.replace(Envelope::parse(item)?).is_some() {
                return Err(Error::Parse("more than one envelope given".into()));
            }
        }
        let mut take = |k: &str, default: Option<f64>| -> Result<f64> {
            match keys.remove(k) {
                Some(v) => parse_num(k, v),
                None => default.ok_or_else(|| Error::Parse(format!("family '{family}' needs '{k}='"))),
            }
        };
        let field = match family {
            "translational" | "trans" => {
                let a = take("a", None)?;
                AnalyticField::translational(a, envelope.unwrap_or(Envelope::Gaussian))?
            }
            "damped" => {
                let a = take("a", None)?;
                let lambda = take("lambda", None)?;
                AnalyticField::damped(a, lambda, envelope.unwrap_or(Envelope::Gaussian))?
            }
            "kink" => {
                if envelope.is_some_and(|e| e != Envelope::Arctan) {
                    return Err(Error::Parse("kink family uses the arctan envelope only".into()));
                }
                let a = take("a", None)?;
                let lambda = take("lambda", Some(0.0))?;
                AnalyticField::kink(a, lambda)?
            }
            "harmonic" => {
                if envelope.is_some_and(|e| e != Envelope::Sine) {
                    return Err(Error::Parse("harmonic family uses the sine envelope only".into()));
                }
                let omega = take("omega", None)?;
                let k = take("k", None)?;
                AnalyticField::harmonic(omega, k)?
            }
            "inhomogeneous" | "mode" => {
                let xi = take("xi", None)?;
                let c = take("c", Some(1.0))?;
                let n_spec = keys
                    .remove("n")
                    .ok_or_else(|| Error::Parse("inhomogeneous family needs 'n=<profile>'".into()))?
                    .replace(';', ",");
                let medium = MediumProfile::new(Profile::parse(&n_spec)?, c)?;
                AnalyticField::inhomogeneous(ModeSpec::new(xi, envelope.unwrap_or(Envelope::Exponential), medium)?)
            }
            other => return Err(Error::Parse(format!("unknown field family '{other}'"))),
        };
        if let Some(k) = keys.keys().next() {
            return Err(Error::Parse(format!("unknown key '{k}' for family '{family}'")));
        }
        Ok(field)
    }
}

fn split_kv(item: &str) -> Result<(&str, &str)> {
    item.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::Parse(format!("expected key=value, got '{item}'")))
}

fn parse_num(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad number '{v}' for '{key}'")))
}
