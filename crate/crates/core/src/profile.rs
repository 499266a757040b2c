//! Scalar functions of position: refractive index `n(x)` and wave speed `a(x)`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::taylor::{Real, Taylor2};

/// A smooth (or piecewise-cubic) function of `x`.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `intercept + slope * x`
    Linear { intercept: f64, slope: f64 },
    /// `low + (high - low) * (1 + tanh((x - center) / width)) / 2`
    TanhRamp { low: f64, high: f64, center: f64, width: f64 },
    Tabulated(MonotoneCubic),
    Expr { source: String, expr: Expr },
}

impl Profile {
    pub fn value<R: Real>(&self, x: R) -> R {
        match self {
            Profile::Constant(v) => R::constant(*v),
            Profile::Linear { intercept, slope } => x * *slope + *intercept,
            Profile::TanhRamp { low, high, center, width } => {
                let s = ((x - *center) / *width).tanh();
                (s + 1.0) * ((high - low) * 0.5) + *low
            }
            Profile::Tabulated(table) => table.value(x),
            Profile::Expr { expr, .. } => expr.eval(x, R::constant(0.0)),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.value(x)
    }

    /// First and second derivative at `x`.
    pub fn derivatives(&self, x: f64) -> (f64, f64, f64) {
        let j = self.value(Taylor2::var_x(x, 2));
        (j.partial(0, 0), j.partial(0, 1), j.partial(0, 2))
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.derivatives(x).1
    }

    /// Parses `const:<v>`, `linear:<intercept>,<slope>`,
    /// `tanh:<low>,<high>,<center>,<width>`, `expr:<expression in x>` or
    /// `table:<path>` (two comma-separated columns `x,value`).
    pub fn parse(spec: &str) -> Result<Profile> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("profile '{spec}' lacks a '<kind>:' prefix")))?;
        let nums = || -> Result<Vec<f64>> {
            rest.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad number '{s}' in profile '{spec}'")))
                })
                .collect()
        };
        let arity = |v: &[f64], n: usize| -> Result<()> {
            if v.len() != n {
                return Err(Error::Parse(format!(
                    "profile '{kind}' takes {n} values, got {}",
                    v.len()
                )));
            }
            Ok(())
        };
        match kind.trim() {
            "const" | "constant" => {
                let v = nums()?;
                arity(&v, 1)?;
                Ok(Profile::Constant(v[0]))
            }
            "linear" => {
                let v = nums()?;
                arity(&v, 2)?;
                Ok(Profile::Linear { intercept: v[0], slope: v[1] })
            }
            "tanh" => {
                let v = nums()?;
                arity(&v, 4)?;
                if v[3] == 0.0 {
                    return Err(Error::InvalidParameter("tanh ramp width must be nonzero".into()));
                }
                Ok(Profile::TanhRamp { low: v[0], high: v[1], center: v[2], width: v[3] })
            }
            "expr" => Ok(Profile::Expr {
                source: rest.to_string(),
                expr: Expr::parse(rest, &HashMap::new())?,
            }),
            "table" => {
                let text = std::fs::read_to_string(Path::new(rest.trim()))?;
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for line in text.lines().map(str::trim) {
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let mut cols = line.split(',').map(str::trim);
                    let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                        return Err(Error::Parse(format!("table row '{line}' needs two columns")));
                    };
                    match (a.parse::<f64>(), b.parse::<f64>()) {
                        (Ok(a), Ok(b)) => {
                            xs.push(a);
                            ys.push(b);
                        }
                        // header row
                        _ if xs.is_empty() => continue,
                        _ => return Err(Error::Parse(format!("bad table row '{line}'"))),
                    }
                }
                Ok(Profile::Tabulated(MonotoneCubic::new(xs, ys)?))
            }
            other => Err(Error::Parse(format!("unknown profile kind '{other}'"))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(v) => write!(f, "const:{v}"),
            Profile::Linear { intercept, slope } => write!(f, "linear:{intercept},{slope}"),
            Profile::TanhRamp { low, high, center, width } => {
                write!(f, "tanh:{low},{high},{center},{width}")
            }
            Profile::Tabulated(t) => write!(f, "table[{} knots]", t.xs.len()),
            Profile::Expr { source, .. } => write!(f, "expr:{source}"),
        }
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
///
/// Outside the knot range the end segments are extended linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidParameter(
                "tabulated profile needs at least two (x, value) pairs".into(),
            ));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("tabulated profile has non-finite entries".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("table abscissae must increase strictly".into()));
        }
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|k| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]))
            .collect();
        let mut m = vec![0.0; n];
        m[0] = secants[0];
        m[n - 1] = secants[n - 2];
        for k in 1..n - 1 {
            m[k] = if secants[k - 1] * secants[k] <= 0.0 {
                0.0
            } else {
                (secants[k - 1] + secants[k]) * 0.5
            };
        }
        for k in 0..n - 1 {
            if secants[k] == 0.0 {
                m[k] = 0.0;
                m[k + 1] = 0.0;
                continue;
            }
            let a = m[k] / secants[k];
            let b = m[k + 1] / secants[k];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m[k] = tau * a * secants[k];
                m[k + 1] = tau * b * secants[k];
            }
        }
        Ok(MonotoneCubic { xs, ys, slopes: m })
    }

    pub fn value<R: Real>(&self, x: R) -> R {
        let n = self.xs.len();
        let xv = x.value();
        if xv <= self.xs[0] {
            return (x - self.xs[0]) * self.slopes[0] + self.ys[0];
        }
        if xv >= self.xs[n - 1] {
            return (x - self.xs[n - 1]) * self.slopes[n - 1] + self.ys[n - 1];
        }
        let k = self.xs.partition_point(|&xk| xk <= xv) - 1;
        let h = self.xs[k + 1] - self.xs[k];
        let s = (x - self.xs[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = s3 * 2.0 - s2 * 3.0 + 1.0;
        let h10 = s3 - s2 * 2.0 + s;
        let h01 = s3 * -2.0 + s2 * 3.0;
        let h11 = s3 - s2;
        h00 * self.ys[k] + h10 * (h * self.slopes[k]) + h01 * self.ys[k + 1] + h11 * (h * self.slopes[k + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        assert_eq!(Profile::parse("const:1.5").unwrap().eval(3.0), 1.5);
        let lin = Profile::parse("linear:1,0.1").unwrap();
        assert!((lin.eval(2.0) - 1.2).abs() < 1e-15);
        assert!((lin.derivative(7.0) - 0.1).abs() < 1e-15);
        let ramp = Profile::parse("tanh:1,2,0,1").unwrap();
        assert!((ramp.eval(0.0) - 1.5).abs() < 1e-15);
        let e = Profile::parse("expr:1/x").unwrap();
        let (v, d1, d2) = e.derivatives(2.0);
        assert!((v - 0.5).abs() < 1e-15 && (d1 + 0.25).abs() < 1e-15 && (d2 - 0.25).abs() < 1e-15);
        assert!(Profile::parse("linear:1").is_err());
        assert!(Profile::parse("wobbly:1").is_err());
        assert!(Profile::parse("1.5").is_err());
    }

    #[test]
    fn monotone_cubic_interpolates_and_stays_monotone() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = vec![1.0, 1.0, 1.5, 3.0, 3.1];
        let m = MonotoneCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((m.value(*x) - y).abs() < 1e-14);
        }
        let mut prev = m.value(0.0);
        for k in 1..=400 {
            let v = m.value(k as f64 * 0.01);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
        // derivative through the generic path matches a central difference
        let p = Profile::Tabulated(m);
        let (_, d, _) = p.derivatives(2.3);
        let fd = (p.eval(2.3 + 1e-6) - p.eval(2.3 - 1e-6)) / 2e-6;
        assert!((d - fd).abs() < 1e-7);
    }

    #[test]
    fn table_validation() {
        assert!(MonotoneCubic::new(vec![0.0], vec![1.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
    }
}
