//! Truncated Taylor arithmetic in two variables.
//!
//! A [`Taylor2`] holds the normalized coefficients of a polynomial in the
//! displacements `(dt, dx)` around an expansion point, truncated at a total
//! degree. Evaluating a field expression with `Taylor2` inputs yields every
//! mixed partial derivative up to that degree, exact to rounding.
//!
//! Expressions are written once against the [`Real`] trait and evaluated
//! either on plain `f64` or on `Taylor2`.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Largest total derivative order a [`Taylor2`] can carry.
pub const MAX_DEGREE: usize = 6;
const DIM: usize = MAX_DEGREE + 1;

/// Scalar operations shared by `f64` and [`Taylor2`].
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn constant(v: f64) -> Self;
    /// Value at the expansion point.
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self {
        self.sin() / self.cos()
    }
    fn atan(self) -> Self;
    fn tanh(self) -> Self;
    fn sinh(self) -> Self {
        (self.exp() - (-self).exp()) * 0.5
    }
    fn cosh(self) -> Self {
        (self.exp() + (-self).exp()) * 0.5
    }
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: f64) -> Self;
    fn recip(self) -> Self {
        Self::constant(1.0) / self
    }
}

impl Real for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn recip(self) -> Self {
        f64::recip(self)
    }
}

/// Bivariate truncated Taylor polynomial.
///
/// `c[p][q]` is the coefficient of `dt^p dx^q`, i.e. the mixed partial
/// `d^{p+q} f / dt^p dx^q` divided by `p! q!`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor2 {
    degree: usize,
    c: [[f64; DIM]; DIM],
}

impl Taylor2 {
    pub fn constant_with_degree(v: f64, degree: usize) -> Self {
        assert!(degree <= MAX_DEGREE, "Taylor2 degree {degree} > {MAX_DEGREE}");
        let mut c = [[0.0; DIM]; DIM];
        c[0][0] = v;
        Taylor2 { degree, c }
    }

    /// The coordinate `t` expanded around `t0`.
    pub fn var_t(t0: f64, degree: usize) -> Self {
        let mut s = Self::constant_with_degree(t0, degree);
        if degree > 0 {
            s.c[1][0] = 1.0;
        }
        s
    }

    /// The coordinate `x` expanded around `x0`.
    pub fn var_x(x0: f64, degree: usize) -> Self {
        let mut s = Self::constant_with_degree(x0, degree);
        if degree > 0 {
            s.c[0][1] = 1.0;
        }
        s
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Normalized coefficient of `dt^p dx^q`.
    pub fn coeff(&self, p_t: usize, q_x: usize) -> f64 {
        if p_t + q_x > self.degree {
            return 0.0;
        }
        self.c[p_t][q_x]
    }

    /// Mixed partial `d^{p+q} / dt^p dx^q` at the expansion point.
    pub fn partial(&self, p_t: usize, q_x: usize) -> f64 {
        self.coeff(p_t, q_x) * factorial(p_t) * factorial(q_x)
    }

    fn zero(degree: usize) -> Self {
        Self::constant_with_degree(0.0, degree)
    }

    fn map(mut self, f: impl Fn(f64) -> f64) -> Self {
        for p in 0..=self.degree {
            for q in 0..=self.degree - p {
                self.c[p][q] = f(self.c[p][q]);
            }
        }
        self
    }

    /// Evaluates `sum_k coeffs[k] (self - self(0))^k` by Horner's rule.
    ///
    /// `coeffs` are the normalized univariate Taylor coefficients of an
    /// outer function at the current value.
    fn compose(&self, coeffs: &[f64]) -> Self {
        let deg = self.degree;
        let mut shift = *self;
        shift.c[0][0] = 0.0;
        let mut r = Self::constant_with_degree(coeffs[deg], deg);
        for k in (0..deg).rev() {
            r = r * shift;
            r.c[0][0] += coeffs[k];
        }
        r
    }
}

impl Add for Taylor2 {
    type Output = Taylor2;
    fn add(self, rhs: Taylor2) -> Taylor2 {
        let degree = self.degree.max(rhs.degree);
        let mut r = Taylor2::zero(degree);
        for p in 0..=degree {
            for q in 0..=degree - p {
                r.c[p][q] = self.c[p][q] + rhs.c[p][q];
            }
        }
        r
    }
}

impl Sub for Taylor2 {
    type Output = Taylor2;
    fn sub(self, rhs: Taylor2) -> Taylor2 {
        self + (-rhs)
    }
}

impl Neg for Taylor2 {
    type Output = Taylor2;
    fn neg(self) -> Taylor2 {
        self.map(|v| -v)
    }
}

impl Mul for Taylor2 {
    type Output = Taylor2;
    fn mul(self, rhs: Taylor2) -> Taylor2 {
        let degree = self.degree.max(rhs.degree);
        let mut r = Taylor2::zero(degree);
        for p in 0..=degree {
            for q in 0..=degree - p {
                let mut acc = 0.0;
                for i in 0..=p {
                    for j in 0..=q {
                        acc += self.c[i][j] * rhs.c[p - i][q - j];
                    }
                }
                r.c[p][q] = acc;
            }
        }
        r
    }
}

impl Div for Taylor2 {
    type Output = Taylor2;
    fn div(self, rhs: Taylor2) -> Taylor2 {
        self * rhs.recip()
    }
}

impl Add<f64> for Taylor2 {
    type Output = Taylor2;
    fn add(mut self, rhs: f64) -> Taylor2 {
        self.c[0][0] += rhs;
        self
    }
}

impl Sub<f64> for Taylor2 {
    type Output = Taylor2;
    fn sub(mut self, rhs: f64) -> Taylor2 {
        self.c[0][0] -= rhs;
        self
    }
}

impl Mul<f64> for Taylor2 {
    type Output = Taylor2;
    fn mul(self, rhs: f64) -> Taylor2 {
        self.map(|v| v * rhs)
    }
}

impl Div<f64> for Taylor2 {
    type Output = Taylor2;
    fn div(self, rhs: f64) -> Taylor2 {
        self.map(|v| v / rhs)
    }
}

impl Real for Taylor2 {
    fn constant(v: f64) -> Self {
        Taylor2::constant_with_degree(v, 0)
    }

    fn value(&self) -> f64 {
        self.c[0][0]
    }

    fn exp(self) -> Self {
        let e = self.value().exp();
        let coeffs: Vec<f64> = (0..=self.degree).map(|k| e / factorial(k)).collect();
        self.compose(&coeffs)
    }

    fn ln(self) -> Self {
        let u = self.value();
        let coeffs: Vec<f64> = (0..=self.degree)
            .map(|k| match k {
                0 => u.ln(),
                _ => {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign / (k as f64 * u.powi(k as i32))
                }
            })
            .collect();
        self.compose(&coeffs)
    }

    fn sin(self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let coeffs: Vec<f64> = (0..=self.degree)
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose(&coeffs)
    }

    fn cos(self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let coeffs: Vec<f64> = (0..=self.degree)
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose(&coeffs)
    }

    fn atan(self) -> Self {
        let u = self.value();
        // atan' = 1 / (1 + u^2); integrate the series of the derivative
        let n = self.degree;
        let base = [1.0 + u * u, 2.0 * u, 1.0];
        let deriv = series_recip(&base, n);
        let mut coeffs = vec![u.atan(); n + 1];
        for k in 1..=n {
            coeffs[k] = deriv[k - 1] / k as f64;
        }
        self.compose(&coeffs)
    }

    fn tanh(self) -> Self {
        let n = self.degree;
        let mut t = vec![0.0; n + 1];
        t[0] = self.value().tanh();
        // t' = 1 - t^2
        for k in 1..=n {
            let m = k - 1;
            let sq: f64 = (0..=m).map(|i| t[i] * t[m - i]).sum();
            let one = if m == 0 { 1.0 } else { 0.0 };
            t[k] = (one - sq) / k as f64;
        }
        self.compose(&t)
    }

    fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    fn powi(self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Taylor2::constant_with_degree(1.0, self.degree);
        let mut base = self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    fn powf(self, p: f64) -> Self {
        let u = self.value();
        let mut coeffs = vec![0.0; self.degree + 1];
        let mut binom = 1.0;
        for (k, slot) in coeffs.iter_mut().enumerate() {
            *slot = binom * u.powf(p - k as f64);
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&coeffs)
    }

    fn recip(self) -> Self {
        let u = self.value();
        let coeffs: Vec<f64> = (0..=self.degree)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / u.powi(k as i32 + 1)
            })
            .collect();
        self.compose(&coeffs)
    }
}

/// Coefficients of `1 / a(h)` up to `h^n` for a univariate series `a`.
fn series_recip(a: &[f64], n: usize) -> Vec<f64> {
    let coef = |k: usize| a.get(k).copied().unwrap_or(0.0);
    let mut r = vec![0.0; n + 1];
    r[0] = 1.0 / coef(0);
    for k in 1..=n {
        let s: f64 = (1..=k).map(|j| coef(j) * r[k - j]).sum();
        r[k] = -s / coef(0);
    }
    r
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
