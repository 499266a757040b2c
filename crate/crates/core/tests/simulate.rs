use proptest::prelude::*;

use locpv::field::{AnalyticField, Envelope, Grid1x1, SampledField, WaveField};
use locpv::phasevel::pv_field;
use locpv::profile::Profile;
use locpv::simulate::{run, Boundary, InitialCondition, Leapfrog, SimSpec};
use locpv::Error;

fn gauss_spec(grid: Grid1x1, a: f64, gamma: f64, boundary: Boundary) -> SimSpec {
    SimSpec {
        grid,
        speed: Profile::Constant(a),
        gamma,
        initial: InitialCondition::Analytic(AnalyticField::translational(a, Envelope::Gaussian).unwrap()),
        boundary,
    }
}

#[test]
fn rigid_translation_velocity() {
    let a = 1.0;
    let grid = Grid1x1::new(-5.0, 0.05, 400, 0.0, 0.025, 400).unwrap();
    let out: WaveField = run(&gauss_spec(grid, a, 0.0, Boundary::Periodic)).unwrap().into();
    let v = pv_field(&out, &grid, 0).unwrap();
    let s = match &out {
        WaveField::Sampled(s) => s,
        _ => unreachable!(),
    };
    let mut checked = 0;
    for j in 1..grid.nt() - 1 {
        for i in 1..grid.nx() - 1 {
            let phi = grid.t(j) - grid.x(i) / a;
            // flanks of the pulse, clear of the peak where v0 has its pole
            if s.node(i, j).abs() < 0.05 || phi.abs() < 0.3 {
                continue;
            }
            let val = v.get(i, j).expect("flank nodes are unmasked");
            assert!((val - a).abs() < 2e-2, "v0 = {val} at phi = {phi}");
            checked += 1;
        }
    }
    assert!(checked > 10_000, "{checked}");
}

#[test]
fn damping_follows_exponential_decay() {
    let gamma = 0.1;
    // the peak crosses x = 0..10 (gamma t = 1); the domain is wide enough that the
    // left-moving wake never wraps onto it
    let grid = Grid1x1::new(-12.0, 0.02, 1200, 0.0, 0.01, 1001).unwrap();
    let mut spec = gauss_spec(grid, 1.0, gamma, Boundary::Periodic);
    spec.initial = InitialCondition::Analytic(AnalyticField::damped(1.0, gamma, Envelope::Gaussian).unwrap());
    let out = run(&spec).unwrap();
    for j in (0..grid.nt()).step_by(100) {
        let t = grid.t(j);
        let peak = out.eval(t, t).unwrap();
        let want = (-gamma * t).exp();
        assert!((peak / want - 1.0).abs() < 0.05, "t={t}: {peak} vs {want}");
    }
}

fn dalembert_error(n: usize) -> f64 {
    let dx = 20.0 / n as f64;
    let dt = 0.5 * dx;
    let t_end = 4.0;
    let nt = (t_end / dt).round() as usize + 1;
    let grid = Grid1x1::new(-10.0, dx, n, 0.0, dt, nt).unwrap();
    let out = run(&gauss_spec(grid, 1.0, 0.0, Boundary::Periodic)).unwrap();
    (0..n)
        .map(|i| {
            let x = grid.x(i);
            (out.node(i, nt - 1) - (-(t_end - x).powi(2)).exp()).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn second_order_convergence() {
    let e: Vec<f64> = [200, 400, 800].iter().map(|&n| dalembert_error(n)).collect();
    assert!(e[0] / e[1] >= 3.5, "{e:?}");
    assert!(e[1] / e[2] >= 3.5, "{e:?}");
}

#[test]
fn contract_errors() {
    let grid = Grid1x1::new(0.0, 0.1, 50, 0.0, 0.15, 10).unwrap();
    assert!(matches!(run(&gauss_spec(grid, 1.0, 0.0, Boundary::Periodic)), Err(Error::CflViolation { .. })));
    let grid = Grid1x1::new(0.0, 0.1, 50, 0.0, 0.05, 10).unwrap();
    assert!(matches!(run(&gauss_spec(grid, 1.0, 25.0, Boundary::Periodic)), Err(Error::InvalidParameter(_))));
    let mut spec = gauss_spec(grid, 1.0, 0.0, Boundary::Periodic);
    spec.initial = InitialCondition::Arrays { psi: vec![0.0; 49], psi_t: vec![0.0; 50] };
    assert!(matches!(run(&spec), Err(Error::InvalidGrid(_))));
    spec.initial = InitialCondition::Arrays { psi: vec![f64::NAN; 50], psi_t: vec![0.0; 50] };
    assert!(run(&spec).is_err());
}

#[test]
fn amplified_run_is_capped() {
    let grid = Grid1x1::new(-10.0, 0.1, 200, 0.0, 0.05, 20_000).unwrap();
    let r = run(&gauss_spec(grid, 1.0, -1.9, Boundary::Reflecting));
    assert!(matches!(r, Err(Error::NonfiniteBlowup { .. })));
}

#[test]
fn output_round_trips_through_csv() {
    let grid = Grid1x1::new(-2.0, 0.1, 40, 0.0, 0.05, 30).unwrap();
    let out = run(&gauss_spec(grid, 1.0, 0.05, Boundary::Reflecting)).unwrap();
    let mut buf = Vec::new();
    out.write_csv(&mut buf).unwrap();
    let back = SampledField::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.grid(), &grid);
    assert_eq!(back.values(), out.values());
}

fn tanh_speed() -> Profile {
    Profile::TanhRamp { low: 0.6, high: 1.0, center: 0.0, width: 1.5 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn damped_energy_never_grows(gamma in 0.0f64..1.0, x0 in -3.0f64..3.0) {
        let grid = Grid1x1::new(-8.0, 0.08, 200, 0.0, 0.04, 2).unwrap();
        let psi: Vec<f64> = (0..200).map(|i| (-(grid.x(i) - x0).powi(2)).exp()).collect();
        let spec = SimSpec {
            grid,
            speed: tanh_speed(),
            gamma,
            initial: InitialCondition::Arrays { psi, psi_t: vec![0.0; 200] },
            boundary: Boundary::Reflecting,
        };
        let mut lf = Leapfrog::new(&spec).unwrap();
        let mut e = lf.energy();
        for _ in 0..400 {
            lf.step();
            let en = lf.energy();
            prop_assert!(en <= e + 1e-10 * e.abs());
            e = en;
        }
    }

    #[test]
    fn undamped_run_reverses(x0 in -3.0f64..3.0, steps in 50usize..400) {
        let grid = Grid1x1::new(-8.0, 0.08, 200, 0.0, 0.04, 2).unwrap();
        let psi: Vec<f64> = (0..200).map(|i| (-(grid.x(i) - x0).powi(2)).exp()).collect();
        let psi_t: Vec<f64> = (0..200).map(|i| 2.0 * (grid.x(i) - x0) * psi[i]).collect();
        let spec = SimSpec {
            grid,
            speed: tanh_speed(),
            gamma: 0.0,
            initial: InitialCondition::Arrays { psi: psi.clone(), psi_t },
            boundary: Boundary::Reflecting,
        };
        let mut lf = Leapfrog::new(&spec).unwrap();
        for _ in 0..steps {
            lf.step();
        }
        lf.reverse();
        for _ in 0..steps {
            lf.step();
        }
        let scale = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = psi.iter().zip(lf.current()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(err <= 1e-8 * scale, "{}", err);
    }
}
