use std::f64::consts::PI;

use rzt_core::grid::{GridSpec, Field};
use rzt_core::kernels::MultiIndexDegree;
use rzt_core::lizorkin::{make_lizorkin_test, TestParams, Variant};
use rzt_core::quasiasym::{Automodel, Catalog, Evaluator};
use rzt_core::tauberian::{
    check_theorem5, check_theorem6, check_theorem7, check_theorem8, check_theorem9, CheckSettings,
    TauberianReport, Verdict,
};
use rzt_core::C64;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn phi1() -> Field {
    make_lizorkin_test(GridSpec::default_for(1).unwrap(), Variant::Phi, &TestParams::new(10.0)).unwrap()
}

fn phi2() -> Field {
    make_lizorkin_test(GridSpec::default_for(2).unwrap(), Variant::PhiTimes, &TestParams::new(6.0)).unwrap()
}

fn cat(c: Catalog) -> Evaluator {
    Evaluator::catalog(c)
}

fn show(r: &TauberianReport) -> String {
    serde_json::to_string_pretty(r).unwrap()
}

fn constant(r: &TauberianReport, name: &str) -> C64 {
    r.comparisons.iter().find(|c| c.quantity == name).unwrap_or_else(|| panic!("{name} missing")).measured
}

#[test]
fn theorem5_abs_power() {
    let r = check_theorem5(&cat(Catalog::AbsPower { alpha: 1.0 }), &Automodel::power(1.0), &phi1(), &CheckSettings::default())
        .unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", show(&r));
    let b = r.side_b.unwrap();
    assert!((b.degree + 2.0).abs() < 1e-6, "{}", show(&r));
}

#[test]
fn theorem5_sqrt1plusx2() {
    let r = check_theorem5(&cat(Catalog::Sqrt1PlusX2), &Automodel::power(1.0), &phi1(), &CheckSettings::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", show(&r));
    assert!((r.side_b.unwrap().degree + 2.0).abs() <= 0.05);
}

#[test]
fn theorem5_gaussian_and_dirac() {
    let settings = CheckSettings::default();
    let r = check_theorem5(&cat(Catalog::Gaussian { width: 1.0 }), &Automodel::power(-1.0), &phi1(), &settings).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", show(&r));
    assert!(r.side_b.unwrap().degree.abs() < 0.05);
    let r = check_theorem5(&cat(Catalog::DiracApprox { sigma: 0.05 }), &Automodel::power(-1.0), &phi1(), &settings).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", show(&r));
}

#[test]
fn theorem5_wrong_rho_is_inconclusive() {
    let r = check_theorem5(&cat(Catalog::AbsPower { alpha: 1.0 }), &Automodel::power(2.0), &phi1(), &CheckSettings::default())
        .unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
}

#[test]
fn theorem5_on_a_sampled_field_needs_room() {
    // scaling at infinity stretches the test beyond the sampled box
    let phi = phi1();
    let f = make_lizorkin_test(phi.spec, Variant::Phi, &TestParams::new(7.0)).unwrap();
    let err = check_theorem5(&Evaluator::Sampled(f), &Automodel::power(1.0), &phi, &CheckSettings::default()).unwrap_err();
    assert!(matches!(err, rzt_core::Error::Window(_)), "{err}");
}

#[test]
fn transform_twice_reflects() {
    // F[F[f]] = 2 pi f(-x): same degree at infinity
    let f = cat(Catalog::AbsPower { alpha: 0.5 }).fourier().fourier();
    let grid = rzt_core::quasiasym::TGrid::geometric(10.0, 1e3, 24).unwrap();
    let e = rzt_core::quasiasym::estimate_degree(
        &f,
        &phi1(),
        rzt_core::quasiasym::Direction::Infinity,
        &grid,
        rzt_core::quasiasym::Model::PurePower,
    )
    .unwrap();
    assert!((e.degree - 0.5).abs() < 0.1, "{e:?}");
}

#[test]
fn theorem6_self_reciprocal_power() {
    let r = check_theorem6(
        &cat(Catalog::AbsPower { alpha: -0.5 }),
        -0.5,
        Some((re(1.0), re(1.0))),
        &CheckSettings::default(),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", show(&r));
    let b1 = r.predicted_constants["B1"];
    assert!((b1 - re(2f64.sqrt())).norm() < 1e-3);
    let d1 = constant(&r, "F-side coefficient of xi_+^(-alpha-1)");
    assert!((d1 - re((2.0 * PI).sqrt())).norm() < 0.05 * (2.0 * PI).sqrt(), "{d1}");
    let b2 = r.predicted_constants["B2"];
    assert!((b1 - b2).norm() < 1e-6);
}

#[test]
fn theorem6_odd_power() {
    let r = check_theorem6(
        &cat(Catalog::SignPower { alpha: 0.5 }),
        0.5,
        Some((re(1.0), re(-1.0))),
        &CheckSettings::default(),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", show(&r));
}

#[test]
fn theorem6_delta_branch() {
    let r = check_theorem6(
        &cat(Catalog::DiracApprox { sigma: 1e-3 }),
        -1.0,
        Some((re(0.0), re(1.0))),
        &CheckSettings::default(),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", show(&r));
    let d = constant(&r, "F-side coefficient of 1");
    assert!((d - re(1.0)).norm() < 0.05);
}

#[test]
fn theorem6_higher_lattice_is_inconclusive() {
    let r = check_theorem6(&cat(Catalog::AbsPower { alpha: -2.5 }), -2.0, None, &CheckSettings::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
}

#[test]
fn theorem7_shifts() {
    let f = cat(Catalog::Sqrt1PlusX2);
    let phi = phi1();
    for beta in [0.5, -0.5, 1.0] {
        let r = check_theorem7(&f, re(beta), &Automodel::power(1.0), &phi, &CheckSettings::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "beta {beta}: {}", show(&r));
        assert!((r.side_b.unwrap().degree - (1.0 - beta)).abs() <= 0.05);
    }
}

#[test]
fn theorem7_identity() {
    let f = cat(Catalog::Sqrt1PlusX2);
    let r = check_theorem7(&f, re(0.0), &Automodel::power(1.0), &phi1(), &CheckSettings::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let (a, b) = (r.side_a.unwrap(), r.side_b.unwrap());
    assert!((a.degree - b.degree).abs() <= 1e-12);
    assert!((a.coefficient - b.coefficient).norm() <= 1e-12 * a.coefficient.norm());
}

#[test]
fn theorem8_product() {
    let f = cat(Catalog::Separable { factors: vec![Catalog::Sqrt1PlusX2, Catalog::Sqrt1PlusX2] });
    let phi = phi2();
    let rho = Automodel::power(2.0);
    let r = check_theorem8(&f, &MultiIndexDegree::real(&[0.5, 0.5]), &rho, &phi, &CheckSettings::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", show(&r));
    assert!((r.side_b.unwrap().degree - 1.0).abs() <= 0.1);
    let r = check_theorem8(&f, &MultiIndexDegree::real(&[-1.0, 0.5]), &rho, &phi, &CheckSettings::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", show(&r));
    assert!((r.side_b.unwrap().degree - 2.5).abs() <= 0.1);
    let moments = r.comparisons.iter().find(|c| c.quantity.starts_with("marginal moments")).unwrap();
    assert!(moments.measured.re <= 1e-8);
    let r = check_theorem8(&f, &MultiIndexDegree::real(&[0.0, 0.0]), &rho, &phi, &CheckSettings::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn theorem9_half_power() {
    let f = cat(Catalog::AbsPower { alpha: 0.5 });
    let r = check_theorem9(&f, 1, &Automodel::power(0.5), &CheckSettings::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", show(&r));
    let a = r.predicted_constants["A"];
    assert!((a - re(2.0 / 3.0)).norm() < 1e-3, "{a}");
    let three = check_theorem9(&f.clone().scaled(re(3.0)), 1, &Automodel::power(0.5), &CheckSettings::default()).unwrap();
    let (a1, a3) = (r.side_b.unwrap().coefficient, three.side_b.unwrap().coefficient);
    assert!((a3 - a1 * 3.0).norm() < 1e-9 * a3.norm(), "{a1} {a3}");
}

#[test]
fn theorem9_second_primitive() {
    let f = cat(Catalog::AbsPower { alpha: 0.5 });
    let r = check_theorem9(&f, 2, &Automodel::power(0.5), &CheckSettings::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", show(&r));
}

#[test]
fn theorem9_gaussian_is_inconclusive() {
    let f = cat(Catalog::Gaussian { width: 1.0 });
    let r = check_theorem9(&f, 1, &Automodel::power(-1.0), &CheckSettings::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
    let r = check_theorem9(&f, 2, &Automodel::power(-1.0), &CheckSettings::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive, "{}", show(&r));
}

#[test]
fn reports_are_deterministic() {
    let f = cat(Catalog::AbsPower { alpha: 1.0 });
    let a = check_theorem5(&f, &Automodel::power(1.0), &phi1(), &CheckSettings::default()).unwrap();
    let b = check_theorem5(&f, &Automodel::power(1.0), &phi1(), &CheckSettings::default()).unwrap();
    assert_eq!(show(&a), show(&b));
}
