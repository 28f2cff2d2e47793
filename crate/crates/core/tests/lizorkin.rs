use std::f64::consts::PI;

use proptest::prelude::*;
use rzt_core::grid::{Field, GridSpec};
use rzt_core::lizorkin::{
    lizorkin_spectrum, make_lizorkin_pair, make_lizorkin_test, marginal_moments, moments, project,
    worst_moment, LizorkinClass, TestParams, Variant,
};
use rzt_core::{Error, C64};

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn phi_grid() -> GridSpec {
    GridSpec::new(1, 4096, 5.0).unwrap()
}

fn phi_times_grid() -> GridSpec {
    GridSpec::new(2, 512, 4.0).unwrap()
}

/// Independent moment oracle: direct double loop over nodes.
fn moment_oracle(phi: &Field, index: &[u32]) -> C64 {
    let spec = phi.spec;
    let n = spec.dim();
    let mut acc = re(0.0);
    for (flat, v) in phi.values.iter().enumerate() {
        let x = spec.position(flat);
        let w: f64 = (0..n).map(|a| x[a].powi(index[a] as i32)).product();
        acc += v * w;
    }
    acc * spec.cell_volume()
}

#[test]
fn gaussian_moments() {
    let spec = GridSpec::default_for(1).unwrap();
    let phi = Field::from_real_fn(spec, |x| (-x[0] * x[0]).exp());
    let m = moments(&phi, 4).unwrap();
    assert_eq!(m.len(), 5);
    assert!((m[0].value.re - PI.sqrt()).abs() < 1e-12);
    assert!(m[1].value.norm() < 1e-12);
    assert!((m[2].value.re - PI.sqrt() / 2.0).abs() < 1e-12);
    assert!((m[4].value.re - 0.75 * PI.sqrt()).abs() < 1e-12);
}

#[test]
fn mixed_moments_match_direct_sum() {
    let spec = GridSpec::new(2, 128, 6.0).unwrap();
    let phi = Field::from_real_fn(spec, |x| (-(x[0] - 0.3).powi(2) - 2.0 * x[1] * x[1]).exp() * (1.0 + x[1]));
    let m = moments(&phi, 4).unwrap();
    assert_eq!(m.len(), 15);
    for mm in &m {
        let o = moment_oracle(&phi, &mm.index);
        assert!((mm.value - o).norm() < 1e-12 * (1.0 + o.norm()), "{:?}", mm.index);
    }
    assert_eq!(m[1].index, vec![0, 1]);
    assert_eq!(m[2].index, vec![1, 0]);
    let spec3 = GridSpec::new(3, 64, 6.0).unwrap();
    let g = Field::from_real_fn(spec3, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp());
    let m = moments(&g, 2).unwrap();
    let m002 = m.iter().find(|m| m.index == [0, 0, 2]).unwrap();
    assert!((m002.value.re - PI.powf(1.5) / 2.0).abs() < 1e-12);
}

#[test]
fn odd_fields_have_zero_even_moments() {
    let spec = GridSpec::default_for(1).unwrap();
    let phi = Field::from_real_fn(spec, |x| x[0] * (-x[0] * x[0]).exp());
    for m in moments(&phi, 10).unwrap() {
        if m.order() % 2 == 0 {
            assert!(m.value.norm() <= 1e-12, "{m:?}");
        }
    }
}

#[test]
fn order_limit_is_enforced() {
    let spec = GridSpec::default_for(1).unwrap();
    let phi = Field::zeros(spec);
    assert!(matches!(moments(&phi, 11), Err(Error::InvalidArgument(_))));
    assert!(matches!(marginal_moments(&phi, 1, 2), Err(Error::InvalidArgument(_))));
}

#[test]
fn spectrum_vanishes_at_origin() {
    let spec = GridSpec::default_for(1).unwrap();
    let psi = lizorkin_spectrum(spec, Variant::Phi, &TestParams::new(1.0)).unwrap();
    assert_eq!(psi.coeffs[0], re(0.0));
    let spec2 = phi_times_grid();
    let psi = lizorkin_spectrum(spec2, Variant::PhiTimes, &TestParams::new(3.0)).unwrap();
    for i in 0..spec2.points() {
        assert_eq!(psi.coeffs[spec2.flat_index(&[0, i])], re(0.0));
        assert_eq!(psi.coeffs[spec2.flat_index(&[i, 0])], re(0.0));
    }
}

#[test]
fn phi_membership() {
    let phi = make_lizorkin_test(phi_grid(), Variant::Phi, &TestParams::new(60.0)).unwrap();
    assert!((phi.l2_norm() - 1.0).abs() < 1e-12);
    let worst = worst_moment(&phi, Variant::Phi, 8).unwrap();
    assert!(worst <= 1e-8, "{worst:e}");
    assert!(phi.values.iter().all(|v| v.im.abs() < 1e-12));
}

#[test]
fn phi_membership_default_grid_low_orders() {
    let spec = GridSpec::default_for(1).unwrap();
    let phi = make_lizorkin_test(spec, Variant::Phi, &TestParams::new(10.0)).unwrap();
    let m = moments(&phi, 4).unwrap();
    assert!(m[0].value.norm() <= 1e-10);
    assert!(m.iter().all(|m| m.value.norm() <= 1e-8), "{m:?}");
}

#[test]
fn phi_times_membership() {
    let phi = make_lizorkin_test(phi_times_grid(), Variant::PhiTimes, &TestParams::new(40.0)).unwrap();
    for axis in 0..2 {
        for m in marginal_moments(&phi, axis, 6).unwrap() {
            assert!(m.sup_norm() <= 1e-8, "axis {axis} order {}: {:e}", m.order, m.sup_norm());
        }
    }
}

#[test]
fn product_of_one_dimensional_tests() {
    let s1 = GridSpec::new(1, 512, 4.0).unwrap();
    let a = make_lizorkin_test(s1, Variant::Phi, &TestParams::new(40.0)).unwrap();
    let b_params = TestParams { scale: 40.0, modulation: Some(vec![-15.0]) };
    let b = make_lizorkin_test(s1, Variant::Phi, &b_params).unwrap();
    let spec = phi_times_grid();
    let values = (0..spec.len())
        .map(|flat| {
            let idx = spec.multi_index(flat);
            a.values[idx[0]] * b.values[idx[1]]
        })
        .collect();
    let phi = Field::from_values(spec, values).unwrap();
    for axis in 0..2 {
        for m in marginal_moments(&phi, axis, 6).unwrap() {
            assert!(m.sup_norm() <= 1e-8, "axis {axis} order {}: {:e}", m.order, m.sup_norm());
            assert_eq!(m.field().unwrap().spec.dim(), 1);
        }
    }
}

#[test]
fn marginal_parity_and_one_dimensional_consistency() {
    let spec = GridSpec::new(2, 128, 8.0).unwrap();
    let phi = Field::from_real_fn(spec, |x| (-x[0] * x[0] - (x[1] - 0.5).powi(2)).exp());
    for m in marginal_moments(&phi, 0, 7).unwrap() {
        if m.order % 2 == 1 {
            assert!(m.sup_norm() <= 1e-12);
        }
    }
    let s1 = GridSpec::default_for(1).unwrap();
    let g = Field::from_real_fn(s1, |x| (-(x[0] - 0.2).powi(2)).exp());
    let full = moments(&g, 6).unwrap();
    let marg = marginal_moments(&g, 0, 6).unwrap();
    for (a, b) in full.iter().zip(&marg) {
        assert!(b.reduced.is_none());
        assert_eq!(a.value, b.values[0]);
    }
}

#[test]
fn projection_examples() {
    let spec = GridSpec::default_for(1).unwrap();
    let class = LizorkinClass::default_for(&spec, Variant::Phi);
    let g = Field::from_real_fn(spec, |x| (-x[0] * x[0]).exp());
    let p = project(&g, &class);
    assert!(moments(&p, 0).unwrap()[0].value.norm() <= 1e-8);
    let z = project(&Field::zeros(spec), &class);
    assert!(z.values.iter().all(|v| *v == re(0.0)));
    let phi = make_lizorkin_test(spec, Variant::Phi, &TestParams::new(3.0)).unwrap();
    let rel = project(&phi, &class).sub(&phi).l2_norm() / phi.l2_norm();
    assert!(rel <= 1e-6, "{rel:e}");
}

#[test]
fn projection_is_idempotent_on_flat_spectra() {
    let spec = GridSpec::default_for(1).unwrap();
    let class = LizorkinClass::default_for(&spec, Variant::Phi);
    for sigma in [5.0, 10.0, 20.0] {
        let phi = make_lizorkin_test(spec, Variant::Phi, &TestParams::new(sigma)).unwrap();
        let once = project(&phi, &class);
        let twice = project(&once, &class);
        assert!(twice.sub(&once).l2_norm() <= 1e-12 * once.l2_norm());
    }
    let s2 = phi_times_grid();
    let class2 = LizorkinClass::default_for(&s2, Variant::PhiTimes);
    let phi = make_lizorkin_test(s2, Variant::PhiTimes, &TestParams::new(40.0)).unwrap();
    let once = project(&phi, &class2);
    assert!(project(&once, &class2).sub(&once).l2_norm() <= 1e-12);
}

#[test]
fn projected_gaussians_pass_membership() {
    let spec = phi_grid();
    let class = LizorkinClass::new(&spec, Variant::Phi, 8.0 * spec.freq_spacing(), 1e-8).unwrap();
    let g = Field::from_real_fn(spec, |x| (-x[0] * x[0] / 0.01).exp());
    let p = project(&g, &class);
    assert!(worst_moment(&p, Variant::Phi, 0).unwrap() <= class.moment_tolerance);
    let s2 = phi_times_grid();
    let class2 = LizorkinClass::default_for(&s2, Variant::PhiTimes);
    let g = Field::from_real_fn(s2, |x| (-(x[0] * x[0] + x[1] * x[1]) / 0.02).exp());
    let p = project(&g, &class2);
    assert!(worst_moment(&p, Variant::PhiTimes, 0).unwrap() <= class2.moment_tolerance);
}

#[test]
fn class_and_parameter_validation() {
    let spec = GridSpec::default_for(1).unwrap();
    assert!(LizorkinClass::new(&spec, Variant::Phi, spec.freq_spacing(), 1e-8).is_err());
    assert!(make_lizorkin_test(spec, Variant::Phi, &TestParams::new(0.0)).is_err());
    assert!(matches!(
        make_lizorkin_test(spec, Variant::Phi, &TestParams::new(1e-170)),
        Err(Error::Degenerate(_))
    ));
    let bad = TestParams { scale: 1.0, modulation: Some(vec![1.0, 2.0]) };
    assert!(make_lizorkin_test(spec, Variant::Phi, &bad).is_err());
}

#[test]
fn parity_pair() {
    let spec = GridSpec::default_for(1).unwrap();
    let (even, odd) = make_lizorkin_pair(spec, 3.0).unwrap();
    let (er, or) = (even.reflected(), odd.reflected());
    assert!(er.sub(&even).l2_norm() < 1e-12);
    assert!(or.add(&odd).l2_norm() < 1e-12);
    assert!(odd.values.iter().all(|v| v.im.abs() < 1e-13));
    assert!((odd.l2_norm() - 1.0).abs() < 1e-12);
}

#[test]
fn modulated_test_is_complex_and_flat() {
    let spec = GridSpec::default_for(1).unwrap();
    let params = TestParams { scale: 8.0, modulation: Some(vec![4.0]) };
    let phi = make_lizorkin_test(spec, Variant::Phi, &params).unwrap();
    assert!(phi.values.iter().any(|v| v.im.abs() > 1e-3));
    assert!(worst_moment(&phi, Variant::Phi, 3).unwrap() <= 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn projection_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -2.0f64..2.0) {
        let spec = GridSpec::new(1, 1024, 20.0).unwrap();
        let class = LizorkinClass::default_for(&spec, Variant::Phi);
        let f = Field::from_real_fn(spec, |x| (-(x[0] - c).powi(2)).exp());
        let g = Field::from_real_fn(spec, |x| x[0] / (1.0 + x[0] * x[0]).powi(2));
        let lhs = project(&f.scaled(re(a)).add(&g.scaled(re(b))), &class);
        let rhs = project(&f, &class).scaled(re(a)).add(&project(&g, &class).scaled(re(b)));
        prop_assert!(lhs.sub(&rhs).l2_norm() <= 1e-12 * (1.0 + rhs.l2_norm()));
    }

    #[test]
    fn tests_are_in_class(sigma in 5.0f64..12.0, k0 in -2.0f64..2.0) {
        let spec = GridSpec::default_for(1).unwrap();
        let params = TestParams { scale: sigma, modulation: Some(vec![k0]) };
        let phi = make_lizorkin_test(spec, Variant::Phi, &params).unwrap();
        prop_assert!(worst_moment(&phi, Variant::Phi, 3).unwrap() <= 1e-8);
    }
}
