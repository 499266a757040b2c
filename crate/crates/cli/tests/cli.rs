use std::path::Path;
use std::process::{Command as Proc, Output};

use locpv::field::{AnalyticField, Envelope, SampledField};
use locpv::media::{dynamic_separation, MediumProfile};
use locpv::profile::Profile;
use locpv_cli::{parse_args, CliError, Command, FieldSource};

fn locpv(args: &[&str], dir: &Path) -> Output {
    Proc::new(env!("CARGO_BIN_EXE_locpv")).args(args).current_dir(dir).output().unwrap()
}

fn locpv_env(args: &[&str], dir: &Path, threads: &str) -> Output {
    Proc::new(env!("CARGO_BIN_EXE_locpv"))
        .args(args)
        .current_dir(dir)
        .env("LOCPV_THREADS", threads)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn argv(s: &str) -> Vec<String> {
    std::iter::once("locpv").chain(s.split_whitespace()).map(String::from).collect()
}

#[test]
fn parses_grammar_examples() {
    let cfg = parse_args(argv(
        "pv --analytic damped:gauss,a=1,lambda=0.1 --order 1 --grid 0,0.01,200x0,0.01,200 --out v1.csv",
    ))
    .unwrap();
    match cfg.command {
        Command::Pv { order, source: FieldSource::Analytic(f), grid, .. } => {
            assert_eq!(order, 1);
            assert_eq!(f, AnalyticField::damped(1.0, 0.1, Envelope::Gaussian).unwrap());
            assert_eq!(grid.unwrap().nx(), 200);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(cfg.out.as_deref(), Some(Path::new("v1.csv")));

    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("field.csv");
    std::fs::write(&field, "# x0=0 dx=1 nx=2\n# t0=0 dt=1 nt=2\n0,1\n1,0\n").unwrap();
    let line = format!("track --in {} --order 0 --level 0.5 --seed-near 1.0,0.0 --t-end 3 --out traj.csv", field.display());
    let cfg = parse_args(argv(&line)).unwrap();
    assert!(matches!(cfg.command, Command::Track { order: 0, level, seed_near: (1.0, 0.0), .. } if level == 0.5));
}

#[test]
fn usage_errors() {
    let e = parse_args(argv("pv --order 9")).unwrap_err();
    assert!(matches!(e, CliError::Usage(_)), "{e}");
    assert_eq!(e.exit_code(), 2);
    for line in [
        "pv --analytic trans:gauss,a=1 --order 5 --grid 0,1,3x0,1,3",
        "pv --analytic trans:gauss,a=1 --order 1",
        "pv --analytic trans:gauss,a=1 --order 1 --grid 0,1,3",
        "pv --analytic nosuch:gauss --order 1 --grid 0,1,3x0,1,3",
        "boost --velocity 1.5 --v0 0.1",
        "boost --audit order7",
        "medium --n linear:1,0.1 --dx 2 --xi 1,zero",
        "simulate --initial trans:gauss,a=1",
        "frobnicate",
    ] {
        let e = parse_args(argv(line)).unwrap_err();
        assert_eq!(e.exit_code(), 2, "{line}: {e}");
        assert!(e.to_string().starts_with("error: UsageError: "), "{e}");
    }
    let e = parse_args(argv("pv --in /no/such/file.csv --order 0")).unwrap_err();
    assert!(matches!(e, CliError::FileNotFound(_)));
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn exit_codes_from_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let o = locpv(&["pv", "--order", "9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: UsageError:"));

    let o = locpv(&["pv", "--bogus-flag"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = locpv(&["pv", "--in", "missing.csv", "--order", "0"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error: FileNotFound:"));

    let o = locpv(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("simulate"));
}

#[test]
fn medium_separation_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = locpv(
        &["medium", "--n", "linear:1,0.1", "--c", "1", "--dx", "2", "--xi", "1,10,100", "--out", "sep.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("sep.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1] == rows[0][1]));
    let m = MediumProfile::new(Profile::Linear { intercept: 1.0, slope: 0.1 }, 1.0).unwrap();
    let rep = dynamic_separation(&m, 2.0, &[1.0, 10.0, 100.0]).unwrap();
    for (r, want) in rows.iter().zip(&rep.rows) {
        assert_eq!(r[2], want.vi_global);
    }
    assert!((rows[0][1] - 1.0 / 1.2).abs() < 1e-15);
}

#[test]
fn medium_sign_audit_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = locpv(
        &["medium", "--n", "linear:1,0.1", "--dx", "2", "--xi", "2,20", "--sign-audit", "audit.json", "--out", "s.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("audit.json")).unwrap()).unwrap();
    assert_eq!(v["discrepancies"], 6);
}

#[test]
fn boost_audit_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    for rule in ["order0", "order1"] {
        let o = locpv(&["boost", "--audit", rule, "--resolution", "200", "--out", "audit.json"], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("audit.json")).unwrap()).unwrap();
        assert_eq!(v["violations"].as_array().unwrap().len(), 0);
        assert!(v["max_abs_vprime_over_c"].as_f64().unwrap() <= 1.0 + 1e-12);
    }
}

#[test]
fn boost_point_modes() {
    let dir = tempfile::tempdir().unwrap();
    let o = locpv(&["boost", "--velocity", "0.5", "--v0", "0.3", "--vi", "0"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["v0_prime"].as_f64().unwrap() - 0.8 / 1.15).abs() < 1e-14);
    // V = 0.5, vI = 0: -(2V) / (1 + V^2) under the printed sign
    assert!((v["vI_prime"].as_f64().unwrap() + 1.0 / 1.25).abs() < 1e-14);

    let o = locpv(
        &["boost", "--velocity", "-0.4", "--analytic", "custom:exp(-(t-x)^2)+0.5*exp(-(t+x-1)^2)", "--at", "0.3,0.1", "--sign", "corrected"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let f = |k: &str| v[k].as_f64().unwrap();
    assert!((f("v0_boosted_field") - f("v0_addition")).abs() < 1e-9);
    assert!((f("vI_boosted_field") - f("vI_general")).abs() < 1e-9);
    assert!((f("vI_freewave") - f("vI_general")).abs() < 1e-9);
}

#[test]
fn cfl_violation_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = locpv(
        &["simulate", "--grid", "0,0.1,50x0,0.15,10", "--initial", "trans:gauss,a=1", "--out", "x.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: CFLViolation"));
    assert_eq!(stderr(&o).lines().count(), 1);
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn singular_seed_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    // the peak of a Gaussian is a fold of psi = 1
    let o = locpv(
        &["track", "--analytic", "trans:gauss,a=1", "--order", "0", "--level", "1", "--seed-near", "0,0", "--t-end", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let err = stderr(&o);
    let token = err.trim_start_matches("error: ").split(':').next().unwrap();
    assert!(["SingularSeed", "NoBracket", "SeedOffAttribute"].contains(&token), "{err}");
}

#[test]
fn simulate_then_analyse() {
    let dir = tempfile::tempdir().unwrap();
    let o = locpv(
        &["simulate", "--grid", "-5,0.05,400x0,0.025,400", "--initial", "trans:gauss,a=1", "--out", "sim.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let sim = SampledField::read_csv(std::fs::read(dir.path().join("sim.csv")).unwrap().as_slice()).unwrap();

    let o = locpv(&["pv", "--in", "sim.csv", "--order", "0", "--out", "v0.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v0 = std::fs::read_to_string(dir.path().join("v0.csv")).unwrap();
    let sim_text = std::fs::read_to_string(dir.path().join("sim.csv")).unwrap();
    // grid header lines carried over verbatim
    assert_eq!(v0.lines().take(2).collect::<Vec<_>>(), sim_text.lines().take(2).collect::<Vec<_>>());
    assert_eq!(v0.lines().count(), sim_text.lines().count());
    assert_eq!(sim.grid().nx(), 400);

    let o = locpv(
        &["track", "--in", "sim.csv", "--order", "0", "--level", "0.5", "--seed-near", "1.0,0.0", "--t-end", "3", "--out", "traj.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let traj = std::fs::read_to_string(dir.path().join("traj.csv")).unwrap();
    let g: f64 = traj
        .lines()
        .find_map(|l| l.strip_prefix("# global_velocity="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((g - 1.0).abs() < 2e-2, "{g}");
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sim.cfg"),
        "# rigid pulse\ngrid = -5,0.05,200 x 0,0.025,40\ninitial = trans:gauss,a=1\nboundary = reflecting\nout = cfg.csv\n",
    )
    .unwrap();
    let o = locpv(
        &["simulate", "--config", "sim.cfg", "--grid", "0,0.1,50x0,0.15,10", "--initial", "nosuch"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let f = SampledField::read_csv(std::fs::read(dir.path().join("cfg.csv")).unwrap().as_slice()).unwrap();
    assert_eq!((f.grid().nx(), f.grid().nt()), (200, 40));

    std::fs::write(dir.path().join("bad.cfg"), "speed = const:1\ncolour = blue\n").unwrap();
    let o = locpv(&["simulate", "--config", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = locpv(&["simulate", "--config", "absent.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["pv", "--analytic", "kink,a=1,lambda=0.3", "--order", "2", "--grid", "-2,0.01,300x0,0.05,20"],
        &["wavelength", "--analytic", "custom:sin(3*(t-x)+0.1*(t-x)^2)", "--grid", "-12,0.02,600x0,0.1,11"],
        &["boost", "--audit", "order1", "--resolution", "64"],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for threads in ["1", "3", "0"] {
            let mut a = args.to_vec();
            a.extend(["--out", "o.txt"]);
            let o = locpv_env(&a, dir.path(), threads);
            assert!(o.status.success(), "{}", stderr(&o));
            outputs.push(std::fs::read(dir.path().join("o.txt")).unwrap());
        }
        assert!(outputs.windows(2).all(|w| w[0] == w[1]), "{args:?}");
    }
    let o = locpv_env(&["boost", "--audit", "order0"], dir.path(), "many");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn wavelength_of_a_harmonic() {
    let dir = tempfile::tempdir().unwrap();
    let o = locpv(
        &["wavelength", "--analytic", "harmonic,omega=2,k=1", "--grid", "-10,0.05,400x0,0.1,5", "--out", "wl.csv", "--group-velocity", "u.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("wl.csv")).unwrap();
    let vals: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .filter(|v| v.is_finite())
        .collect();
    assert!(!vals.is_empty());
    assert!(vals.iter().all(|v| (v - std::f64::consts::TAU).abs() < 1e-6));
    assert!(dir.path().join("u.csv").exists());
}
