//! Local phase velocities `v_N = -(d^{N+1} psi / dt dx^N) / (d^{N+1} psi / dx^{N+1})`,
//! their closed forms for the damped families, and the wavelength-based
//! comparison quantities.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::io::write_grid;
use crate::field::{Envelope, Family, Grid1x1, WaveField};

/// Relative threshold below which a denominator counts as zero.
pub const DEFAULT_EPS_REL: f64 = 1e-9;
const EPS_ABS: f64 = 1e-300;

/// `-num / den`, or `None` when `|den| < max(eps_rel |num|, 1e-300)`.
fn ratio(num: f64, den: f64, eps_rel: f64) -> Option<f64> {
    if !(num.is_finite() && den.is_finite()) || den.abs() < (eps_rel * num.abs()).max(EPS_ABS) {
        None
    } else {
        Some(-num / den)
    }
}

/// Numerator and denominator of `v_N` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PvSample {
    pub order: usize,
    /// `d^{N+1} psi / dt dx^N`
    pub num: f64,
    /// `d^{N+1} psi / dx^{N+1}`
    pub den: f64,
    /// `d^2 psi / dx^2`; its sign tells a maximum (negative) from a minimum.
    pub psi_xx: f64,
    pub velocity: Option<f64>,
}

pub(crate) fn check_order(field: &WaveField, order: usize) -> Result<()> {
    let max = field.max_pv_order();
    if order > max {
        return Err(Error::OrderTooHigh { order, max });
    }
    Ok(())
}

/// Numerator, denominator and velocity of `v_N` at `(x, t)`.
pub fn pv_sample(field: &WaveField, x: f64, t: f64, order: usize) -> Result<PvSample> {
    check_order(field, order)?;
    let jet = field.jet(x, t, (order + 1).max(2))?;
    let (num, den) = (jet.d(1, order), jet.d(0, order + 1));
    Ok(PvSample { order, num, den, psi_xx: jet.d(0, 2), velocity: ratio(num, den, DEFAULT_EPS_REL) })
}

/// `(d^{N+1} psi / dt dx^N, d^{N+1} psi / dx^{N+1})` at `(x, t)`.
pub(crate) fn num_den(field: &WaveField, x: f64, t: f64, order: usize) -> Result<(f64, f64)> {
    match field {
        WaveField::Analytic(f) => {
            let jet = f.jet(x, t, order + 1)?;
            Ok((jet.d(1, order), jet.d(0, order + 1)))
        }
        WaveField::Sampled(f) => Ok((f.partial(x, t, 1, order)?, f.partial(x, t, 0, order + 1)?)),
    }
}

/// `v_N` at `(x, t)`; `Ok(None)` where it is undefined.
pub fn pv_point(field: &WaveField, x: f64, t: f64, order: usize) -> Result<Option<f64>> {
    check_order(field, order)?;
    let (num, den) = num_den(field, x, t, order)?;
    Ok(ratio(num, den, DEFAULT_EPS_REL))
}

/// Masking policy for [`pv_field_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PvFieldOptions {
    /// Mask threshold relative to the largest denominator on the grid.
    pub eps_rel: f64,
}

impl Default for PvFieldOptions {
    fn default() -> Self {
        PvFieldOptions { eps_rel: DEFAULT_EPS_REL }
    }
}

/// `v_N` over a grid, with a validity mask.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVelocityField {
    order: usize,
    grid: Grid1x1,
    values: Vec<f64>,
    mask: Vec<bool>,
    denominators: Vec<f64>,
    eps_den: f64,
}

impl PhaseVelocityField {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> &Grid1x1 {
        &self.grid
    }

    /// Row-per-time values; `NaN` where masked.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// `d^{N+1} psi / dx^{N+1}` per node; `NaN` where the stencil was unavailable.
    pub fn denominators(&self) -> &[f64] {
        &self.denominators
    }

    pub fn eps_den(&self) -> f64 {
        self.eps_den
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let k = self.grid.index(i, j);
        self.mask[k].then_some(self.values[k])
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| !**m).count()
    }

    /// Grid CSV with header `# field=v<N>`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_grid(w, &self.grid, &format!("v{}", self.order), |i, j| self.get(i, j))
    }
}

pub fn pv_field(field: &WaveField, grid: &Grid1x1, order: usize) -> Result<PhaseVelocityField> {
    pv_field_with(field, grid, order, PvFieldOptions::default())
}

/// Evaluates `v_N` at every node of `grid`. Points whose derivatives cannot
/// be formed (outside the field, clipped stencil) are masked rather than
/// reported as errors.
pub fn pv_field_with(
    field: &WaveField,
    grid: &Grid1x1,
    order: usize,
    opts: PvFieldOptions,
) -> Result<PhaseVelocityField> {
    check_order(field, order)?;
    if !(opts.eps_rel >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps_rel must be non-negative, got {}", opts.eps_rel)));
    }
    let pairs: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (x, t) = (grid.x(k % grid.nx()), grid.t(k / grid.nx()));
            num_den(field, x, t, order).unwrap_or((f64::NAN, f64::NAN))
        })
        .collect();
    let max_den = pairs
        .iter()
        .filter(|p| p.1.is_finite())
        .fold(0.0f64, |m, p| m.max(p.1.abs()));
    let eps_den = (opts.eps_rel * max_den).max(EPS_ABS);
    let mut values = Vec::with_capacity(pairs.len());
    let mut mask = Vec::with_capacity(pairs.len());
    for &(num, den) in &pairs {
        let v = -num / den;
        let ok = num.is_finite() && den.is_finite() && den.abs() >= eps_den && v.is_finite();
        mask.push(ok);
        values.push(if ok { v } else { f64::NAN });
    }
    Ok(PhaseVelocityField {
        order,
        grid: *grid,
        values,
        mask,
        denominators: pairs.into_iter().map(|p| p.1).collect(),
        eps_den,
    })
}

/// `(v_0, v_I, v_II)` of the kink `atan(phi) exp(lambda t)`, `phi = t - x/a`:
///
/// ```text
/// v_0  = a (1 + lambda (1 + phi^2) atan(phi))
/// v_I  = a (1 - lambda (1 + phi^2) / (2 phi))
/// v_II = a (1 - lambda (phi^3 + phi) / (3 phi^2 - 1))
/// ```
pub fn kink_spectrum(a: f64, lambda: f64, phi: f64) -> (Option<f64>, Option<f64>, Option<f64>) {
    if lambda == 0.0 {
        return (Some(a), Some(a), Some(a));
    }
    let q = 1.0 + phi * phi;
    let corr = |num: f64, den: f64| ratio(-num, den, DEFAULT_EPS_REL).map(|r| a * (1.0 - lambda * r));
    (
        Some(a * (1.0 + lambda * q * phi.atan())),
        corr(q, 2.0 * phi),
        corr(phi * q, 3.0 * phi * phi - 1.0),
    )
}

/// `v_N = a (1 - lambda psi^(N)(phi) / psi^(N+1)(phi))` for the damped pulse
/// `psi(t - x/a) exp(-lambda t)`.
pub fn damped_spectrum(a: f64, lambda: f64, envelope: Envelope, phi: f64, order: usize) -> Option<f64> {
    if lambda == 0.0 {
        return Some(a);
    }
    let d = envelope.derivatives(phi, order + 1);
    ratio(-d[order], d[order + 1], DEFAULT_EPS_REL).map(|r| a * (1.0 - lambda * r))
}

/// Wavelength-based comparison quantities on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalDiagnostics {
    pub grid: Grid1x1,
    /// `omega / k`, for harmonic fields only.
    pub omega_over_k: Option<f64>,
    /// Local wavelength per node, row-per-time; `NaN` outside the span of
    /// the half-period midpoints.
    pub local_wavelength: Vec<f64>,
    /// `U = -(d lambda_w / dt) / (d lambda_w / dx)`; `NaN` where undefined.
    pub classical_group_velocity: Vec<f64>,
}

/// Below this `|d lambda_w / dx|` the group velocity is masked.
pub const WAVELENGTH_SLOPE_FLOOR: f64 = 1e-8;

impl ClassicalDiagnostics {
    pub fn wavelength(&self, i: usize, j: usize) -> Option<f64> {
        let v = self.local_wavelength[self.grid.index(i, j)];
        v.is_finite().then_some(v)
    }

    pub fn group_velocity(&self, i: usize, j: usize) -> Option<f64> {
        let v = self.classical_group_velocity[self.grid.index(i, j)];
        v.is_finite().then_some(v)
    }

    pub fn write_wavelength_csv<W: Write>(&self, w: W) -> Result<()> {
        write_grid(w, &self.grid, "lambda_w", |i, j| self.wavelength(i, j))
    }

    pub fn write_group_velocity_csv<W: Write>(&self, w: W) -> Result<()> {
        write_grid(w, &self.grid, "U", |i, j| self.group_velocity(i, j))
    }
}

/// Zero crossings of `x -> field(x, t)` on the grid nodes, each located by
/// linear interpolation and then polished by bisection.
fn zero_crossings(field: &WaveField, grid: &Grid1x1, t: f64) -> Result<Vec<f64>> {
    let vals: Vec<f64> = (0..grid.nx()).map(|i| field.eval(grid.x(i), t)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..grid.nx() - 1 {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            out.push(grid.x(i));
            continue;
        }
        if a * b >= 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (grid.x(i), grid.x(i + 1));
        let (mut flo, _) = (a, b);
        let guess = lo + (hi - lo) * a / (a - b);
        let fg = field.eval(guess, t)?;
        if fg == 0.0 {
            out.push(guess);
            continue;
        }
        if fg * flo < 0.0 {
            hi = guess;
        } else {
            lo = guess;
            flo = fg;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = field.eval(mid, t)?;
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm * flo < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    if vals[grid.nx() - 1] == 0.0 {
        out.push(grid.x(grid.nx() - 1));
    }
    Ok(out)
}

/// Local wavelength on one time slice: `2 (z_{k+1} - z_k)` placed at the
/// midpoint of each pair of adjacent crossings, linearly interpolated in
/// between.
fn wavelength_slice(field: &WaveField, grid: &Grid1x1, j: usize) -> Result<Vec<f64>> {
    let t = grid.t(j);
    let z = zero_crossings(field, grid, t)?;
    if z.len() < 3 {
        return Err(Error::NotOscillatory { t, found: z.len() });
    }
    let mids: Vec<(f64, f64)> = z.windows(2).map(|w| (0.5 * (w[0] + w[1]), 2.0 * (w[1] - w[0]))).collect();
    Ok((0..grid.nx())
        .map(|i| {
            let x = grid.x(i);
            let k = mids.partition_point(|m| m.0 <= x);
            if k == 0 || k == mids.len() {
                if mids.last().is_some_and(|m| m.0 == x) {
                    return mids[mids.len() - 1].1;
                }
                return f64::NAN;
            }
            let (m0, m1) = (mids[k - 1], mids[k]);
            m0.1 + (m1.1 - m0.1) * (x - m0.0) / (m1.0 - m0.0)
        })
        .collect())
}

/// Local wavelength from zero crossings on each time slice and the
/// wavelength-transport velocity `U` from central differences of it.
pub fn classical_diagnostics(field: &WaveField, grid: &Grid1x1) -> Result<ClassicalDiagnostics> {
    let slices: Vec<Vec<f64>> = (0..grid.nt())
        .into_par_iter()
        .map(|j| wavelength_slice(field, grid, j))
        .collect::<Result<_>>()?;
    let (nx, nt) = (grid.nx(), grid.nt());
    let lam: Vec<f64> = slices.into_iter().flatten().collect();
    let at = |i: usize, j: usize| lam[j * nx + i];
    let mut u = vec![f64::NAN; lam.len()];
    for j in 0..nt {
        for i in 0..nx {
            let (il, ir) = (i.saturating_sub(1), (i + 1).min(nx - 1));
            let (jl, jr) = (j.saturating_sub(1), (j + 1).min(nt - 1));
            let lx = (at(ir, j) - at(il, j)) / (grid.x(ir) - grid.x(il));
            let lt = (at(i, jr) - at(i, jl)) / (grid.t(jr) - grid.t(jl));
            if lx.is_finite() && lt.is_finite() && lx.abs() >= WAVELENGTH_SLOPE_FLOOR {
                u[j * nx + i] = -lt / lx;
            }
        }
    }
    let omega_over_k = field.as_analytic().and_then(|f| match f.family() {
        Family::Harmonic { .. } => f.omega_over_k(),
        _ => None,
    });
    Ok(ClassicalDiagnostics { grid: *grid, omega_over_k, local_wavelength: lam, classical_group_velocity: u })
}
