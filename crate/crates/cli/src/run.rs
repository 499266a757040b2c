use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use serde_json::json;

use locpv::field::{AnalyticField, SampledField, WaveField};
use locpv::media::{dynamic_separation, sign_audit};
use locpv::phasevel::{classical_diagnostics, pv_field_with, pv_point, PvFieldOptions};
use locpv::relativity::{add_v0, add_vi_freewave, boost_event, boost_vi_general, subluminality_audit, SignConvention};
use locpv::simulate::run;
use locpv::tracker::{find_seed, track_with, Attribute, TrackOptions};

use crate::args::{BoostMode, Command, FieldSource, RunConfig};
use crate::CliError;

fn load(source: &FieldSource) -> Result<WaveField, CliError> {
    match source {
        FieldSource::Analytic(f) => Ok(WaveField::Analytic(f.clone())),
        FieldSource::File(path) => {
            let file = File::open(path).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => CliError::FileNotFound(path.display().to_string()),
                _ => CliError::Io(format!("{}: {e}", path.display())),
            })?;
            Ok(WaveField::Sampled(SampledField::read_csv(BufReader::new(file))?))
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn buffer(f: impl FnOnce(&mut Vec<u8>) -> locpv::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn json_bytes(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("plain JSON values serialize");
    s.push('\n');
    s.into_bytes()
}

/// Velocities of `field` at `(x, t)` and of the boosted field at the image event.
fn boost_field(
    frame: &locpv::relativity::BoostFrame,
    field: &AnalyticField,
    (x, t): (f64, f64),
    sign: SignConvention,
) -> Result<serde_json::Value, CliError> {
    let rest = WaveField::Analytic(field.clone());
    let v0 = pv_point(&rest, x, t, 0)?;
    let vi = pv_point(&rest, x, t, 1)?;
    let jet = field.jet(x, t, 2)?;
    let (xb, tb) = boost_event(&frame.inverse(), x, t);
    let moving = WaveField::Analytic(AnalyticField::boosted(field.clone(), *frame));
    Ok(json!({
        "V": frame.velocity(),
        "c": frame.light_speed(),
        "event": [x, t],
        "boosted_event": [xb, tb],
        "v0": v0,
        "vI": vi,
        "v0_boosted_field": pv_point(&moving, xb, tb, 0)?,
        "vI_boosted_field": pv_point(&moving, xb, tb, 1)?,
        "v0_addition": v0.map(|v| add_v0(frame, v)).transpose()?,
        "vI_general": boost_vi_general(frame, &jet),
        "vI_freewave": vi.map(|v| add_vi_freewave(frame, v, sign)).transpose()?,
    }))
}

/// Executes a validated invocation, writing its artifacts.
pub fn run_command(cfg: &RunConfig) -> Result<(), CliError> {
    let out = cfg.out.as_deref();
    let bytes = match &cfg.command {
        Command::Pv { source, order, grid, eps_rel } => {
            let field = load(source)?;
            let grid = match (grid, &field) {
                (Some(g), _) => *g,
                (None, WaveField::Sampled(s)) => *s.grid(),
                (None, WaveField::Analytic(_)) => return Err(CliError::Usage("--grid is required".into())),
            };
            let v = pv_field_with(&field, &grid, *order, PvFieldOptions { eps_rel: *eps_rel })?;
            buffer(|b| v.write_csv(b))?
        }
        Command::Track { source, order, level, seed_near, t_end, step, reproject } => {
            let field = load(source)?;
            let seed = find_seed(&field, *order, *level, *seed_near)?;
            let attr = Attribute { order: *order, target: *level, seed };
            let opts = TrackOptions { step: *step, reproject: *reproject, ..Default::default() };
            let traj = track_with(&field, attr, *t_end, opts)?;
            buffer(|b| traj.write_csv(b))?
        }
        Command::Boost { mode, sign } => match mode {
            BoostMode::Audit { rule, resolution } => {
                let mut s = subluminality_audit(*rule, *resolution, *sign)?.to_json();
                s.push('\n');
                s.into_bytes()
            }
            BoostMode::Values { frame, v0, vi } => {
                let v0p = v0.map(|v| add_v0(frame, v)).transpose()?;
                let vip = vi.map(|v| add_vi_freewave(frame, v, *sign)).transpose()?;
                json_bytes(&json!({
                    "V": frame.velocity(),
                    "c": frame.light_speed(),
                    "v0": v0,
                    "v0_prime": v0p,
                    "vI": vi,
                    "vI_prime": vip,
                }))
            }
            BoostMode::Field { frame, field, at } => json_bytes(&boost_field(frame, field, *at, *sign)?),
        },
        Command::Medium { medium, dx, xi, sign_audit: audit_path } => {
            let rep = dynamic_separation(medium, *dx, xi)?;
            if let Some(p) = audit_path {
                let probes = [0.25 * dx, 0.5 * dx, *dx];
                let mut s = sign_audit(medium, xi, &probes)?.to_json();
                s.push('\n');
                emit(Some(p), s.as_bytes())?;
            }
            buffer(|b| rep.write_csv(b))?
        }
        Command::Simulate { spec } => {
            let field = run(spec)?;
            buffer(|b| field.write_csv(b))?
        }
        Command::Wavelength { source, grid, group_velocity } => {
            let field = load(source)?;
            let grid = match (grid, &field) {
                (Some(g), _) => *g,
                (None, WaveField::Sampled(s)) => *s.grid(),
                (None, WaveField::Analytic(_)) => return Err(CliError::Usage("--grid is required".into())),
            };
            let diag = classical_diagnostics(&field, &grid)?;
            if let Some(p) = group_velocity {
                emit(Some(p), &buffer(|b| diag.write_group_velocity_csv(b))?)?;
            }
            buffer(|b| diag.write_wavelength_csv(b))?
        }
    };
    emit(out, &bytes)
}
