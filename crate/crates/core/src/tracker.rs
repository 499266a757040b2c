//! Following a labelled attribute (a level of `d^N psi / dx^N`) through
//! space-time by integrating `dx/dt = v_N(x, t)`.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::field::io::format_float;
use crate::field::WaveField;
use crate::phasevel::{check_order, pv_point};

/// The set `d^N psi / dx^N (x, t) = target`, entered at `seed`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Attribute {
    pub order: usize,
    pub target: f64,
    /// `(x0, t0)`
    pub seed: (f64, f64),
}

/// `d^N psi / dx^N - target` at `(x, t)`, together with its `x`-derivative.
fn residual(field: &WaveField, order: usize, target: f64, x: f64, t: f64) -> Result<(f64, f64)> {
    match field {
        WaveField::Analytic(f) => {
            let jet = f.jet(x, t, order + 1)?;
            Ok((jet.d(0, order) - target, jet.d(0, order + 1)))
        }
        WaveField::Sampled(f) => Ok((f.partial(x, t, 0, order)? - target, f.partial(x, t, 0, order + 1)?)),
    }
}

impl Attribute {
    /// `d^N psi / dx^N - target` at `(x, t)`.
    pub fn residual(&self, field: &WaveField, x: f64, t: f64) -> Result<f64> {
        let v = match field {
            WaveField::Analytic(f) => f.jet(x, t, self.order)?.d(0, self.order),
            WaveField::Sampled(f) => f.partial(x, t, 0, self.order)?,
        };
        Ok(v - self.target)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    TimeLimit,
    DomainExit,
    SingularityHit,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::TimeLimit => "TimeLimit",
            Termination::DomainExit => "DomainExit",
            Termination::SingularityHit => "SingularityHit",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackSample {
    pub t: f64,
    pub x: f64,
    pub v_local: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackedTrajectory {
    pub attribute: Attribute,
    pub samples: Vec<TrackSample>,
    pub terminated_by: Termination,
    /// `None` for a trajectory that never left its seed.
    pub global_velocity: Option<f64>,
}

impl TrackedTrajectory {
    pub fn first(&self) -> &TrackSample {
        &self.samples[0]
    }

    pub fn last(&self) -> &TrackSample {
        &self.samples[self.samples.len() - 1]
    }

    /// CSV `t,x,v_local` with `# terminated_by=` and `# global_velocity=` footers.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,x,v_local")?;
        for s in &self.samples {
            writeln!(w, "{},{},{}", format_float(s.t), format_float(s.x), format_float(s.v_local))?;
        }
        writeln!(w, "# terminated_by={}", self.terminated_by)?;
        writeln!(w, "# global_velocity={}", format_float(self.global_velocity.unwrap_or(f64::NAN)))?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackOptions {
    /// Fixed RK4 step; `None` picks the default for the field kind.
    pub step: Option<f64>,
    /// Newton correction of `x` back onto the attribute after every step.
    pub reproject: bool,
    /// Largest admissible `|residual|` at the seed.
    pub seed_tolerance: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions { step: None, reproject: true, seed_tolerance: 1e-6 }
    }
}

/// `(t_end - t0) / 10^4` for analytic fields, `min(dt, (t_end - t0) / 1000)`
/// for sampled ones.
pub fn default_step(field: &WaveField, t0: f64, t_end: f64) -> f64 {
    let span = t_end - t0;
    match field {
        WaveField::Analytic(_) => span / 1e4,
        WaveField::Sampled(f) => f.grid().dt().min(span / 1000.0),
    }
}

pub fn track(field: &WaveField, attr: Attribute, t_end: f64, step: f64) -> Result<TrackedTrajectory> {
    track_with(field, attr, t_end, TrackOptions { step: Some(step), ..Default::default() })
}

/// Why a tracking step could not be completed.
enum Stop {
    End(Termination),
    Fail(Error),
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        Stop::Fail(e)
    }
}

fn velocity(field: &WaveField, order: usize, x: f64, t: f64) -> std::result::Result<f64, Stop> {
    if !field.contains(x, t) {
        return Err(Stop::End(Termination::DomainExit));
    }
    match pv_point(field, x, t, order) {
        Ok(Some(v)) => Ok(v),
        Ok(None) => Err(Stop::End(Termination::SingularityHit)),
        Err(Error::OutOfDomain { .. }) | Err(Error::StencilClipped { .. }) => Err(Stop::End(Termination::DomainExit)),
        Err(e) => Err(Stop::Fail(e)),
    }
}

fn rk4_step(field: &WaveField, order: usize, x: f64, t: f64, v: f64, h: f64) -> std::result::Result<f64, Stop> {
    let k2 = velocity(field, order, x + 0.5 * h * v, t + 0.5 * h)?;
    let k3 = velocity(field, order, x + 0.5 * h * k2, t + 0.5 * h)?;
    let k4 = velocity(field, order, x + h * k3, t + h)?;
    Ok(x + h / 6.0 * (v + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Integrates `dx/dt = v_N` from the seed to `t_end` with fixed-step RK4.
pub fn track_with(field: &WaveField, attr: Attribute, t_end: f64, opts: TrackOptions) -> Result<TrackedTrajectory> {
    check_order(field, attr.order)?;
    let (x0, t0) = attr.seed;
    if !(t_end > t0) {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} must exceed the seed time {t0}")));
    }
    let step = opts.step.unwrap_or_else(|| default_step(field, t0, t_end));
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    if !field.contains(x0, t0) {
        return Err(Error::OutOfDomain { x: x0, t: t0 });
    }
    let r = attr.residual(field, x0, t0)?;
    if !(r.abs() <= opts.seed_tolerance) {
        return Err(Error::SeedOffAttribute { residual: r.abs(), tolerance: opts.seed_tolerance });
    }
    let v0 = match velocity(field, attr.order, x0, t0) {
        Ok(v) => v,
        Err(Stop::End(Termination::SingularityHit)) => return Err(Error::SingularSeed { x: x0, t: t0 }),
        Err(Stop::End(_)) => return Err(Error::OutOfDomain { x: x0, t: t0 }),
        Err(Stop::Fail(e)) => return Err(e),
    };

    let n_steps = ((t_end - t0) / step).ceil() as usize;
    let mut samples = Vec::with_capacity(n_steps + 1);
    samples.push(TrackSample { t: t0, x: x0, v_local: v0 });
    let (mut x, mut t, mut v) = (x0, t0, v0);
    // sign of d^{N+1} psi / dx^{N+1}; a flip means the step jumped over the pole line
    let mut den = residual(field, attr.order, attr.target, x0, t0)?.1;
    let mut terminated_by = Termination::TimeLimit;
    for k in 0..n_steps {
        let t_next = if k + 1 == n_steps { t_end } else { t0 + (k + 1) as f64 * step };
        let h = t_next - t;
        let next = rk4_step(field, attr.order, x, t, v, h).and_then(|mut xn| {
            if opts.reproject {
                xn = reproject(field, &attr, xn, t_next, (xn - x).abs());
            }
            if (xn - x).abs() < 1e-14 && h.abs() < 1e-14 {
                return Err(Stop::End(Termination::SingularityHit));
            }
            let vn = velocity(field, attr.order, xn, t_next)?;
            let (r, dn) = residual(field, attr.order, attr.target, xn, t_next)?;
            // a flipped denominator means the step jumped the pole line; a residual the
            // Newton pass could not remove means the level curve folded back in time
            if dn.signum() != den.signum() || (opts.reproject && !(r.abs() <= opts.seed_tolerance)) {
                return Err(Stop::End(Termination::SingularityHit));
            }
            Ok((xn, vn, dn))
        });
        match next {
            Ok((xn, vn, dn)) => {
                (x, t, v, den) = (xn, t_next, vn, dn);
                samples.push(TrackSample { t, x, v_local: v });
            }
            Err(Stop::End(term)) => {
                terminated_by = term;
                break;
            }
            Err(Stop::Fail(e)) => return Err(e),
        }
    }
    let global_velocity = global_velocity_of(&samples).ok();
    Ok(TrackedTrajectory { attribute: attr, samples, terminated_by, global_velocity })
}

/// Newton iterations on `x -> d^N psi / dx^N (x, t) - target`. A correction
/// larger than ten RK steps' worth of motion is rejected and the unprojected
/// point kept.
fn reproject(field: &WaveField, attr: &Attribute, x: f64, t: f64, moved: f64) -> f64 {
    let limit = 10.0 * moved + 1e-10;
    let mut xn = x;
    for _ in 0..8 {
        let Ok((r, d)) = residual(field, attr.order, attr.target, xn, t) else {
            return x;
        };
        if d == 0.0 || !d.is_finite() || !r.is_finite() {
            return if (xn - x).abs() <= limit { xn } else { x };
        }
        let dx = r / d;
        xn -= dx;
        if (xn - x).abs() > limit || !field.contains(xn, t) {
            return x;
        }
        if dx.abs() <= 4.0 * f64::EPSILON * xn.abs().max(1.0) {
            break;
        }
    }
    xn
}

fn global_velocity_of(samples: &[TrackSample]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::DegenerateTrajectory);
    }
    let (a, b) = (&samples[0], &samples[samples.len() - 1]);
    if b.t == a.t {
        return Err(Error::DegenerateTrajectory);
    }
    Ok((b.x - a.x) / (b.t - a.t))
}

/// `(x_end - x0) / (t_end - t0)`.
pub fn global_velocity(traj: &TrackedTrajectory) -> Result<f64> {
    global_velocity_of(&traj.samples)
}

/// Finds `x` with `d^N psi / dx^N (x, t) = target` at the fixed time of `near`,
/// scanning outward from `near.0` alternately to the right and left until the
/// residual changes sign, then bisecting to full precision.
///
/// Analytic fields are scanned over `near.0 +- 10` in steps of `0.01`;
/// sampled fields over the whole grid in steps of `dx`.
pub fn find_seed(field: &WaveField, order: usize, target: f64, near: (f64, f64)) -> Result<(f64, f64)> {
    check_order(field, order)?;
    let (xc, t) = near;
    let (h, reach) = match field {
        WaveField::Analytic(_) => (0.01, 10.0),
        WaveField::Sampled(f) => {
            let g = f.grid();
            if !g.contains(xc, t) {
                return Err(Error::OutOfDomain { x: xc, t });
            }
            (g.dx(), (xc - g.x0()).max(g.x_end() - xc))
        }
    };
    let g = |x: f64| -> Option<f64> {
        if !field.contains(x, t) {
            return None;
        }
        match field {
            WaveField::Analytic(f) => f.jet(x, t, order).ok().map(|j| j.d(0, order) - target),
            WaveField::Sampled(f) => f.partial(x, t, 0, order).ok().map(|v| v - target),
        }
        .filter(|v| v.is_finite())
    };
    let gc = g(xc).ok_or(Error::OutOfDomain { x: xc, t })?;
    if gc == 0.0 {
        return Ok((xc, t));
    }
    let steps = (reach / h).ceil() as usize;
    // (direction, last point scanned on that side)
    let mut sides = [(1.0, Some((xc, gc))), (-1.0, Some((xc, gc)))];
    for k in 1..=steps {
        for (dir, side) in sides.iter_mut() {
            let Some((xa, ga)) = *side else { continue };
            let xb = xc + *dir * k as f64 * h;
            match g(xb) {
                None => *side = None,
                Some(0.0) => return Ok((xb, t)),
                Some(gb) if ga * gb < 0.0 => return Ok((bisect(&g, xa, ga, xb), t)),
                Some(gb) => *side = Some((xb, gb)),
            }
        }
        if sides.iter().all(|s| s.1.is_none()) {
            break;
        }
    }
    Err(Error::NoBracket { lo: xc - reach, hi: xc + reach })
}

fn bisect(g: &impl Fn(f64) -> Option<f64>, mut a: f64, mut ga: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let Some(gm) = g(m) else { break };
        if gm == 0.0 {
            return m;
        }
        if ga * gm < 0.0 {
            b = m;
        } else {
            a = m;
            ga = gm;
        }
    }
    0.5 * (a + b)
}
