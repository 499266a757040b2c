use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use locpv::field::{AnalyticField, Grid1x1, ANALYTIC_MAX_PV_ORDER, SAMPLED_MAX_PV_ORDER};
use locpv::media::MediumProfile;
use locpv::profile::Profile;
use locpv::relativity::{AdditionRule, BoostFrame, SignConvention};
use locpv::simulate::{Boundary, InitialCondition, SimSpec};

use crate::config::read_config;
use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "locpv", version, about = "Local phase velocities of 1+1 dimensional wave fields")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// N-th order local phase velocity over a grid
    Pv(PvArgs),
    /// Follow a level of d^N psi/dx^N through space-time
    Track(TrackArgs),
    /// Lorentz velocity addition: subluminality audit or single values
    Boost(BoostArgs),
    /// Global velocities in a medium with refractive index n(x)
    Medium(MediumArgs),
    /// Leapfrog solution of the damped wave equation
    Simulate(SimulateArgs),
    /// Local wavelength and classical group velocity
    Wavelength(WavelengthArgs),
}

#[derive(Args, Debug)]
#[group(multiple = false)]
struct SourceArgs {
    /// Inline analytic field, e.g. `damped:gauss,a=1,lambda=0.1`
    #[arg(long, value_name = "SPEC")]
    analytic: Option<String>,
    /// Sampled field CSV
    #[arg(long = "in", value_name = "PATH")]
    input: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PvArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    order: usize,
    /// `x0,dx,nx x t0,dt,nt`; defaults to the grid of `--in`
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Mask threshold relative to the largest denominator on the grid
    #[arg(long, default_value_t = locpv::phasevel::DEFAULT_EPS_REL)]
    eps_rel: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrackArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    order: usize,
    /// Target value of d^N psi/dx^N
    #[arg(long, allow_hyphen_values = true)]
    level: f64,
    /// `x,t` to start the seed search from
    #[arg(long, allow_hyphen_values = true)]
    seed_near: String,
    #[arg(long, allow_hyphen_values = true)]
    t_end: f64,
    #[arg(long)]
    step: Option<f64>,
    /// Skip the Newton correction after each step
    #[arg(long)]
    no_reproject: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoostArgs {
    /// Sweep `order0` or `order1` addition over (v, V)
    #[arg(long, conflicts_with_all = ["velocity", "v0", "vi", "analytic", "at"])]
    audit: Option<String>,
    #[arg(long, default_value_t = 200, requires = "audit")]
    resolution: usize,
    /// Frame velocity V
    #[arg(long, allow_hyphen_values = true)]
    velocity: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    vi: Option<f64>,
    /// Analytic field whose velocities are transformed at `--at`
    #[arg(long, requires = "at")]
    analytic: Option<String>,
    /// `x,t`
    #[arg(long, allow_hyphen_values = true, requires = "analytic")]
    at: Option<String>,
    /// `as-printed` (default) or `corrected` overall sign of the first-order rule
    #[arg(long, default_value = "as-printed")]
    sign: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MediumArgs {
    /// Refractive index profile: `const:v`, `linear:a,b`, `tanh:lo,hi,x0,w`, `expr:...`, `table:path`
    #[arg(long)]
    n: String,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, allow_hyphen_values = true)]
    dx: f64,
    /// Comma-separated list of xi values
    #[arg(long, allow_hyphen_values = true)]
    xi: String,
    /// Also write the printed-vs-rederived sign audit as JSON
    #[arg(long, value_name = "PATH")]
    sign_audit: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Flat `key = value` file; its entries override the flags
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Propagation speed profile a(x)
    #[arg(long)]
    speed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Analytic field supplying psi and psi_t at t0
    #[arg(long)]
    initial: Option<String>,
    /// `periodic` or `reflecting`
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WavelengthArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Also write the classical group velocity field
    #[arg(long, value_name = "PATH")]
    group_velocity: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldSource {
    Analytic(AnalyticField),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoostMode {
    Audit { rule: AdditionRule, resolution: usize },
    /// Addition rules applied to bare velocities.
    Values { frame: BoostFrame, v0: Option<f64>, vi: Option<f64> },
    /// Velocities of an analytic field at an event, before and after the boost.
    Field { frame: BoostFrame, field: AnalyticField, at: (f64, f64) },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Pv { source: FieldSource, order: usize, grid: Option<Grid1x1>, eps_rel: f64 },
    Track { source: FieldSource, order: usize, level: f64, seed_near: (f64, f64), t_end: f64, step: Option<f64>, reproject: bool },
    Boost { mode: BoostMode, sign: SignConvention },
    Medium { medium: MediumProfile, dx: f64, xi: Vec<f64>, sign_audit: Option<PathBuf> },
    Simulate { spec: SimSpec },
    Wavelength { source: FieldSource, grid: Option<Grid1x1>, group_velocity: Option<PathBuf> },
}

/// A validated invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// `None` writes to stdout.
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self.command {
            Command::Pv { .. } => "pv",
            Command::Track { .. } => "track",
            Command::Boost { .. } => "boost",
            Command::Medium { .. } => "medium",
            Command::Simulate { .. } => "simulate",
            Command::Wavelength { .. } => "wavelength",
        }
    }
}

fn usage(e: locpv::Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// Profiles backed by a missing table file are an I/O failure, not a usage error.
fn profile(spec: &str) -> Result<Profile, CliError> {
    Profile::parse(spec).map_err(|e| match e {
        locpv::Error::Io(m) => CliError::FileNotFound(format!("{spec}: {m}")),
        other => usage(other),
    })
}

fn existing(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::FileNotFound(path.display().to_string()))
    }
}

fn writable(path: &Option<PathBuf>) -> Result<(), CliError> {
    if let Some(p) = path {
        let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !dir.is_dir() {
            return Err(CliError::FileNotFound(format!("output directory {} does not exist", dir.display())));
        }
    }
    Ok(())
}

fn source(s: SourceArgs) -> Result<FieldSource, CliError> {
    match (s.analytic, s.input) {
        (Some(spec), None) => Ok(FieldSource::Analytic(AnalyticField::parse(&spec).map_err(usage)?)),
        (None, Some(path)) => {
            existing(&path)?;
            Ok(FieldSource::File(path))
        }
        _ => Err(CliError::Usage("exactly one of --analytic and --in is required".into())),
    }
}

fn check_order(source: &FieldSource, order: usize) -> Result<(), CliError> {
    let max = match source {
        FieldSource::Analytic(_) => ANALYTIC_MAX_PV_ORDER,
        FieldSource::File(_) => SAMPLED_MAX_PV_ORDER,
    };
    if order > max {
        return Err(CliError::Usage(format!("--order {order} exceeds the maximum {max} for this field")));
    }
    Ok(())
}

fn check_order_bound(order: usize) -> Result<(), CliError> {
    if order > ANALYTIC_MAX_PV_ORDER {
        return Err(CliError::Usage(format!("--order {order} exceeds the maximum {ANALYTIC_MAX_PV_ORDER}")));
    }
    Ok(())
}

fn number(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Usage(format!("bad number '{s}' in {what}")))
}

fn numbers(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|p| number(p, what)).collect()
}

fn pair(s: &str, what: &str) -> Result<(f64, f64), CliError> {
    match numbers(s, what)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(CliError::Usage(format!("{what} expects 'x,t', got '{s}'"))),
    }
}

/// Parses `x0,dx,nx x t0,dt,nt`.
pub fn parse_grid(s: &str) -> Result<Grid1x1, CliError> {
    s.parse::<Grid1x1>().map_err(usage)
}

fn sign(s: &str) -> Result<SignConvention, CliError> {
    match s {
        "as-printed" | "as_printed" => Ok(SignConvention::AsPrinted),
        "corrected" => Ok(SignConvention::Corrected),
        other => Err(CliError::Usage(format!("--sign must be as-printed or corrected, got '{other}'"))),
    }
}

/// Parses and validates `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Help(e.to_string()),
        _ => {
            let text = e.to_string();
            let msg: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            CliError::Usage(msg.join(" ").trim_start_matches("error:").trim().to_string())
        }
    })?;
    match cli.command {
        Cmd::Pv(a) => {
            check_order_bound(a.order)?;
            let src = source(a.source)?;
            check_order(&src, a.order)?;
            let grid = a.grid.as_deref().map(parse_grid).transpose()?;
            if grid.is_none() && matches!(src, FieldSource::Analytic(_)) {
                return Err(CliError::Usage("--grid is required with --analytic".into()));
            }
            if !(a.eps_rel >= 0.0 && a.eps_rel.is_finite()) {
                return Err(CliError::Usage(format!("--eps-rel must be non-negative, got {}", a.eps_rel)));
            }
            writable(&a.out)?;
            Ok(RunConfig { command: Command::Pv { source: src, order: a.order, grid, eps_rel: a.eps_rel }, out: a.out })
        }
        Cmd::Track(a) => {
            check_order_bound(a.order)?;
            let src = source(a.source)?;
            check_order(&src, a.order)?;
            if let Some(h) = a.step {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(CliError::Usage(format!("--step must be positive, got {h}")));
                }
            }
            writable(&a.out)?;
            Ok(RunConfig {
                command: Command::Track {
                    source: src,
                    order: a.order,
                    level: a.level,
                    seed_near: pair(&a.seed_near, "--seed-near")?,
                    t_end: a.t_end,
                    step: a.step,
                    reproject: !a.no_reproject,
                },
                out: a.out,
            })
        }
        Cmd::Boost(a) => {
            let conv = sign(&a.sign)?;
            let mode = if let Some(rule) = a.audit {
                let rule = rule.parse::<AdditionRule>().map_err(usage)?;
                if a.resolution < 2 {
                    return Err(CliError::Usage("--resolution must be at least 2".into()));
                }
                BoostMode::Audit { rule, resolution: a.resolution }
            } else {
                let v = a.velocity.ok_or_else(|| CliError::Usage("boost needs --audit or --velocity".into()))?;
                let frame = BoostFrame::new(v, a.c).map_err(usage)?;
                match (a.analytic, a.at) {
                    (Some(spec), Some(at)) => {
                        if a.v0.is_some() || a.vi.is_some() {
                            return Err(CliError::Usage("--v0/--vi cannot be combined with --analytic".into()));
                        }
                        BoostMode::Field {
                            frame,
                            field: AnalyticField::parse(&spec).map_err(usage)?,
                            at: pair(&at, "--at")?,
                        }
                    }
                    _ => {
                        if a.v0.is_none() && a.vi.is_none() {
                            return Err(CliError::Usage("boost needs --v0, --vi or --analytic with --at".into()));
                        }
                        BoostMode::Values { frame, v0: a.v0, vi: a.vi }
                    }
                }
            };
            writable(&a.out)?;
            Ok(RunConfig { command: Command::Boost { mode, sign: conv }, out: a.out })
        }
        Cmd::Medium(a) => {
            let index = profile(&a.n)?;
            let medium = MediumProfile::new(index, a.c).map_err(usage)?;
            let xi = numbers(&a.xi, "--xi")?;
            writable(&a.out)?;
            writable(&a.sign_audit)?;
            Ok(RunConfig { command: Command::Medium { medium, dx: a.dx, xi, sign_audit: a.sign_audit }, out: a.out })
        }
        Cmd::Simulate(a) => simulate_config(a),
        Cmd::Wavelength(a) => {
            let src = source(a.source)?;
            let grid = a.grid.as_deref().map(parse_grid).transpose()?;
            if grid.is_none() && matches!(src, FieldSource::Analytic(_)) {
                return Err(CliError::Usage("--grid is required with --analytic".into()));
            }
            writable(&a.out)?;
            writable(&a.group_velocity)?;
            Ok(RunConfig { command: Command::Wavelength { source: src, grid, group_velocity: a.group_velocity }, out: a.out })
        }
    }
}

fn simulate_config(a: SimulateArgs) -> Result<RunConfig, CliError> {
    let mut grid = a.grid;
    let mut speed = a.speed;
    let mut gamma = a.gamma.map(|g| g.to_string());
    let mut initial = a.initial;
    let mut boundary = a.boundary;
    let mut out = a.out;
    if let Some(path) = &a.config {
        existing(path)?;
        for (key, value) in read_config(path)? {
            match key.as_str() {
                "grid" => grid = Some(value),
                "speed" => speed = Some(value),
                "gamma" => gamma = Some(value),
                "initial" => initial = Some(value),
                "boundary" => boundary = Some(value),
                "out" => out = Some(PathBuf::from(value)),
                other => return Err(CliError::Usage(format!("unknown config key '{other}' in {}", path.display()))),
            }
        }
    }
    let grid = parse_grid(&grid.ok_or_else(|| CliError::Usage("simulate needs a grid".into()))?)?;
    let initial = initial.ok_or_else(|| CliError::Usage("simulate needs an initial field".into()))?;
    let spec = SimSpec {
        grid,
        speed: profile(speed.as_deref().unwrap_or("const:1"))?,
        gamma: gamma.as_deref().map(|g| number(g, "gamma")).transpose()?.unwrap_or(0.0),
        initial: InitialCondition::Analytic(AnalyticField::parse(&initial).map_err(usage)?),
        boundary: boundary.as_deref().unwrap_or("periodic").parse::<Boundary>().map_err(usage)?,
    };
    writable(&out)?;
    Ok(RunConfig { command: Command::Simulate { spec }, out })
}
