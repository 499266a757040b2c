use std::collections::HashMap;

use proptest::prelude::*;

use locpv::expr::Expr;
use locpv::field::Envelope;
use locpv::media::{
    dynamic_separation, sign_audit, transit_time, v0_global, v0_local, vi_global, vi_global_rederived, vi_local,
    vi_local_rederived, MediumProfile, ModeSpec, Relation,
};
use locpv::profile::Profile;
use locpv::Error;

fn linear(intercept: f64, slope: f64, c: f64) -> MediumProfile {
    MediumProfile::new(Profile::Linear { intercept, slope }, c).unwrap()
}

fn mode(xi: f64, medium: &MediumProfile) -> ModeSpec {
    ModeSpec::new(xi, Envelope::Exponential, medium.clone()).unwrap()
}

#[test]
fn zero_order_values() {
    let m = MediumProfile::new(Profile::Constant(1.5), 1.0).unwrap();
    for x in [-3.0, 0.0, 2.2] {
        assert!((v0_local(&m, x).unwrap() - 1.0 / 1.5).abs() < 1e-15);
        assert!((v0_global(&m, x) - 1.0 / 1.5).abs() < 1e-15);
    }
    let m = linear(1.0, 0.1, 1.0);
    assert!((v0_local(&m, 2.0).unwrap() - 1.0 / 1.4).abs() < 1e-15);
    assert!((transit_time(&m, 0.0, 2.0).unwrap() - 2.4).abs() < 1e-14);
    assert!((v0_global(&m, 2.0) - 1.0 / 1.2).abs() < 1e-15);
    assert!((2.0 / transit_time(&m, 0.0, 2.0).unwrap() - v0_global(&m, 2.0)).abs() < 1e-14);
    assert!((v0_global(&m, 0.0) - 1.0).abs() < 1e-15);
}

#[test]
fn zero_order_failures() {
    let src = "1/x";
    let inv = MediumProfile::new(
        Profile::Expr { source: src.into(), expr: Expr::parse(src, &HashMap::new()).unwrap() },
        1.0,
    )
    .unwrap();
    assert!(matches!(v0_local(&inv, 1.5), Err(Error::DegenerateDenominator(_))));
    let m = linear(1.0, 0.1, 1.0);
    assert!(matches!(transit_time(&m, 1.0, 1.0), Err(Error::DegenerateInterval)));
    // (x n)' = 1 + 2 * (-0.1) x vanishes at x = 5
    let m = linear(1.0, -0.1, 1.0);
    assert!(matches!(transit_time(&m, 0.0, 8.0), Err(Error::PoleOnPath { .. })));
}

#[test]
fn transit_matches_quadrature() {
    let m = MediumProfile::new(Profile::TanhRamp { low: 1.0, high: 1.6, center: 1.0, width: 0.5 }, 2.0).unwrap();
    let (x0, x1) = (-0.5, 3.0);
    // composite Simpson on the slowness
    let n = 2000;
    let h = (x1 - x0) / n as f64;
    let s = |x: f64| 1.0 / v0_local(&m, x).unwrap();
    let mut sum = s(x0) + s(x1);
    for k in 1..n {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * s(x0 + k as f64 * h);
    }
    let quad = sum * h / 3.0;
    let t = transit_time(&m, x0, x1).unwrap();
    assert!((quad - t).abs() <= 1e-8 * t);
}

#[test]
fn first_order_printed_values() {
    let m = linear(1.0, 0.1, 1.0);
    let md = mode(10.0, &m);
    let want = 0.1 * 0.2 / 1.2 - 1.2;
    assert!((1.0 / vi_local(&md, 1.0).unwrap() - want).abs() < 1e-14);
    let want = 1.2 - 1.4f64.ln() / 20.0;
    assert!((1.0 / vi_global(&md, 2.0).unwrap() - want).abs() < 1e-14);
    assert!((1.0 / vi_global(&md, 2.0).unwrap() - 1.1831764).abs() < 1e-7);

    let n0 = MediumProfile::new(Profile::Constant(1.3), 1.0).unwrap();
    let md = mode(5.0, &n0);
    assert!((1.0 / vi_local(&md, 0.7).unwrap() + 1.3).abs() < 1e-14);
    let want = 1.3 - 1.3f64.ln() / (5.0 * 2.0);
    assert!((1.0 / vi_global(&md, 2.0).unwrap() - want).abs() < 1e-14);
}

#[test]
fn first_order_failures() {
    let m = linear(1.0, -1.0, 1.0);
    assert!(matches!(vi_global(&mode(2.0, &m), 1.0), Err(Error::NonpositiveLogArgument(_))));
    assert!(matches!(vi_global(&mode(2.0, &m), 0.0), Err(Error::DegenerateInterval)));
    assert!(ModeSpec::new(0.0, Envelope::Exponential, m).is_err());
}

#[test]
fn large_xi_merges_with_order_zero() {
    let m = linear(1.0, 0.1, 1.0);
    let md = mode(1e9, &m);
    assert!((vi_global(&md, 2.0).unwrap() - v0_global(&m, 2.0)).abs() < 1e-8);
    let (_, g1, _) = m.optical_path(1.0);
    assert!((1.0 / vi_local(&md, 1.0).unwrap() + g1).abs() < 1e-8);
}

#[test]
fn homogeneous_collapse() {
    let m = MediumProfile::new(Profile::Constant(1.0), 3.0).unwrap();
    for xi in [0.5, 4.0, -2.0] {
        let md = mode(xi, &m);
        assert!((v0_local(&m, 1.2).unwrap() - 3.0).abs() < 1e-15);
        assert!((v0_global(&m, 1.2) - 3.0).abs() < 1e-15);
        assert!((vi_global(&md, 1.2).unwrap().abs() - 3.0).abs() < 1e-14);
    }
    let rep = dynamic_separation(&m, 2.0, &[1.0, 10.0, 100.0]).unwrap();
    assert_eq!(rep.v0_spread, 0.0);
    assert_eq!(rep.vi_spread, 0.0);
}

#[test]
fn separation_table() {
    let m = linear(1.0, 0.1, 1.0);
    let rep = dynamic_separation(&m, 2.0, &[1.0, 10.0, 100.0]).unwrap();
    assert_eq!(rep.rows.len(), 3);
    assert_eq!(rep.v0_spread, 0.0);
    for r in &rep.rows {
        assert!((r.v0_global - 1.0 / 1.2).abs() < 1e-15);
    }
    let vi: Vec<f64> = rep.rows.iter().map(|r| r.vi_global).collect();
    assert!(vi[0] > vi[1] && vi[1] > vi[2]);
    assert!(rep.vi_spread > 0.0);
    assert!(dynamic_separation(&m, 2.0, &[1.0, 0.0]).is_err());
    assert!(dynamic_separation(&m, 2.0, &[]).is_err());

    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("xi,v0_global,vI_global,vI_rederived"));
    assert_eq!(lines.count(), 3);
}

// c / v_I = g' - (c / xi) g'' / g' for psi = exp(xi (t - x n / c)), g = x n
fn rederived_local(m: &MediumProfile, xi: f64, x: f64) -> f64 {
    let (_, g1, g2) = m.optical_path(x);
    m.c / (g1 - m.c / xi * g2 / g1)
}

#[test]
fn rederivation_against_closed_form() {
    let m = MediumProfile::new(Profile::TanhRamp { low: 1.0, high: 1.5, center: 1.0, width: 0.7 }, 1.0).unwrap();
    for xi in [0.7, 3.0, 40.0] {
        let md = mode(xi, &m);
        for x in [0.0, 0.4, 1.3, 2.5] {
            let want = rederived_local(&m, xi, x);
            let got = vi_local_rederived(&md, x, 0.3).unwrap();
            assert!((got - want).abs() <= 1e-10 * want.abs());
        }
        // t(dx) = (g(dx) - g(0)) / c - (ln g'(dx) - ln g'(0)) / xi
        let dx = 2.0;
        let (g, g1, _) = m.optical_path(dx);
        let (_, g10, _) = m.optical_path(0.0);
        let t = g / m.c - (g1.ln() - g10.ln()) / xi;
        let got = vi_global_rederived(&md, dx).unwrap();
        assert!((got - dx / t).abs() <= 1e-9 * (dx / t).abs());
    }
}

#[test]
fn audit_relations() {
    let m = linear(1.0, 0.1, 1.0);
    let rep = sign_audit(&m, &[2.0, 20.0], &[0.5, 1.0, 2.0]).unwrap();
    assert_eq!(rep.entries.len(), 12);
    for e in &rep.entries {
        let want = if e.quantity == "vI_local" { Relation::Negated } else { Relation::Agree };
        assert_eq!(e.relation, want, "{e:?}");
    }
    assert_eq!(rep.discrepancies, 6);
    assert!(rep.to_json().contains("\"negated\""));
}

#[test]
fn check_rejects_bad_index() {
    let m = linear(1.0, -1.0, 1.0);
    assert!(m.check(0.0, 2.0).is_err());
    assert!(linear(1.0, 0.1, 1.0).check(0.0, 2.0).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn order_zero_ignores_xi(slope in 0.0f64..0.5, dx in 0.1f64..4.0, xi in 0.1f64..100.0) {
        let m = linear(1.0, slope, 1.0);
        let a = dynamic_separation(&m, dx, &[xi, 2.0 * xi, 7.0]).unwrap();
        prop_assert_eq!(a.v0_spread, 0.0);
    }

    #[test]
    fn separation_shrinks_with_xi(slope in 0.01f64..0.5, dx in 0.5f64..4.0) {
        let m = linear(1.0, slope, 1.0);
        let gap = |xi: f64| (vi_global(&mode(xi, &m), dx).unwrap() - vi_global(&mode(2.0 * xi, &m), dx).unwrap()).abs();
        let (g1, g2, g3) = (gap(1.0), gap(10.0), gap(100.0));
        prop_assert!(g1 > g2 && g2 > g3);
        prop_assert!(g3 < 0.02 * g1);
    }
}
