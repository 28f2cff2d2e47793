use std::f64::consts::PI;

use proptest::prelude::*;
use rzt_core::grid::{Field, GridSpec};
use rzt_core::kernels::{
    homogeneity_defect, multi_riesz_kernel_eval, pair_abs_power, pair_abs_power_pv,
    pair_principal_power, pair_xpm_power, riesz_kernel_eval, KernelId, KernelValue,
    MultiIndexDegree, Parity, PowerPairing, Side,
};
use rzt_core::quad::{gauss_kronrod, gauss_kronrod_to_infinity, tanh_sinh};
use rzt_core::special::{gamma, gamma_n};
use rzt_core::{Error, C64};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn grid1() -> GridSpec {
    GridSpec::default_for(1).unwrap()
}

fn gauss(spec: GridSpec) -> Field {
    Field::from_real_fn(spec, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp())
}

fn gamma_re(x: f64) -> f64 {
    gamma(re(x)).unwrap().re
}

/// `int_0^1 x^a (e^{-x^2} - taylor) dx + int_1^inf x^a e^{-x^2} dx + boundary`,
/// with `taylor` the Taylor polynomial of `e^{-x^2}` through order `m - 1`.
fn half_line_oracle(a: f64, m: usize) -> f64 {
    let coeffs = [1.0, 0.0, -1.0, 0.0, 0.5, 0.0, -1.0 / 6.0];
    let inner = tanh_sinh(
        |x, _, _| {
            if x < 1e-100 {
                return re(0.0);
            }
            let t: f64 = (0..m).map(|j| coeffs[j] * x.powi(j as i32)).sum();
            let d = if m > 0 && x < 1e-3 {
                // cancellation-free remainder of the series
                (m..7).map(|j| coeffs[j] * x.powi(j as i32)).sum::<f64>()
            } else {
                (-x * x).exp() - t
            };
            re(x.powf(a) * d)
        },
        0.0,
        1.0,
        1e-14,
    )
    .re;
    let outer = gauss_kronrod_to_infinity(|x| re(x.powf(a) * (-x * x).exp()), 1.0, 1e-16, 1e-14)
        .value
        .re;
    let boundary: f64 = (0..m).map(|j| coeffs[j] / (a + j as f64 + 1.0)).sum();
    inner + outer + boundary
}

#[test]
fn abs_power_gaussian_values() {
    let phi = gauss(grid1());
    let v = pair_abs_power(re(0.0), &phi).unwrap();
    assert!((v.re - PI.sqrt()).abs() < 1e-10);
    for a in [-2.5, -1.5, -0.5, 0.7, 2.3] {
        let v = pair_abs_power(re(a), &phi).unwrap();
        let exact = gamma_re((a + 1.0) / 2.0);
        assert!((v.re - exact).abs() <= 1e-9 * exact.abs().max(1.0), "a={a}: {v} vs {exact}");
        assert!(v.im.abs() < 1e-12);
    }
}

#[test]
fn abs_power_matches_taylor_subtracted_oracle() {
    let phi = gauss(grid1());
    let v = pair_abs_power(re(-1.5), &phi).unwrap();
    let oracle = 2.0 * half_line_oracle(-1.5, 1);
    assert!((v.re - oracle).abs() <= 1e-8, "{v} vs {oracle}");
}

#[test]
fn principal_value_of_inverse_abs() {
    let phi = gauss(grid1());
    let v = pair_abs_power_pv(0, &phi).unwrap();
    let inner = gauss_kronrod(
        |x| re(if x < 1e-4 { -x + x.powi(3) / 2.0 } else { ((-x * x).exp() - 1.0) / x }),
        0.0,
        1.0,
        &[],
        1e-16,
        1e-14,
    )
    .value
    .re;
    let outer =
        gauss_kronrod_to_infinity(|x| re((-x * x).exp() / x), 1.0, 1e-16, 1e-14).value.re;
    let oracle = 2.0 * (inner + outer);
    assert!((v.re - oracle).abs() <= 1e-7);
    assert!((v.re + EULER_GAMMA).abs() <= 1e-9);
}

#[test]
fn principal_value_matches_pole_subtracted_limit() {
    // finite part = lim (pairing at -1+eps minus the pole term 2 phi(0)/eps)
    let phi = gauss(grid1());
    let pv = pair_abs_power_pv(0, &phi).unwrap().re;
    let pp = PowerPairing::new(&phi);
    let at = |eps: f64| pp.abs_power(re(-1.0 + eps)).unwrap().re - 2.0 / eps;
    let sym = |eps: f64| 0.5 * (at(eps) + at(-eps));
    let richardson = (4.0 * sym(5e-4) - sym(1e-3)) / 3.0;
    assert!((pv - richardson).abs() < 1e-6, "{pv} vs {richardson}");
}

#[test]
fn principal_value_n2_and_n3() {
    for n in [2usize, 3] {
        let spec = GridSpec::default_for(n).unwrap();
        let phi = gauss(spec);
        let pp = PowerPairing::new(&phi);
        let pv = pp.abs_power_pv(0).unwrap().re;
        // analytic: (|S|/2) Gamma((a+n)/2) minus pole |S| phi(0) / (a+n), at a -> -n
        let area = if n == 2 { 2.0 * PI } else { 4.0 * PI };
        let exact = area / 2.0 * (-EULER_GAMMA);
        assert!((pv - exact).abs() < 1e-7, "n={n}: {pv} vs {exact}");
        let a = -(n as f64) - 0.5;
        let v = pp.abs_power(re(a)).unwrap().re;
        let exact = area / 2.0 * gamma_re((a + n as f64) / 2.0);
        assert!((v - exact).abs() < 1e-7 * exact.abs(), "n={n}: {v} vs {exact}");
    }
}

#[test]
fn lattice_points_are_rejected() {
    let phi = gauss(grid1());
    assert!(matches!(pair_abs_power(re(-1.0), &phi), Err(Error::Lattice { .. })));
    assert!(matches!(pair_abs_power(re(-3.0), &phi), Err(Error::Lattice { .. })));
    assert!(matches!(pair_xpm_power(Side::Plus, re(-2.0), &phi), Err(Error::Lattice { .. })));
    assert!(pair_abs_power(re(-2.0), &phi).is_ok());
}

#[test]
fn one_sided_powers() {
    let phi = gauss(grid1());
    let v = pair_xpm_power(Side::Plus, re(0.0), &phi).unwrap();
    assert!((v.re - PI.sqrt() / 2.0).abs() < 1e-10);
    let p = pair_xpm_power(Side::Plus, re(0.5), &phi).unwrap();
    let m = pair_xpm_power(Side::Minus, re(0.5), &phi).unwrap();
    assert!((p - m).norm() < 1e-12);
    let v = pair_xpm_power(Side::Plus, re(-1.5), &phi).unwrap();
    let oracle = half_line_oracle(-1.5, 1);
    assert!((v.re - oracle).abs() <= 1e-8, "{v} vs {oracle}");
    assert!((v.re - gamma_re(-0.25) / 2.0).abs() <= 1e-9);
    let v = pair_xpm_power(Side::Minus, re(-2.5), &phi).unwrap();
    assert!((v.re - half_line_oracle(-2.5, 2)).abs() <= 1e-8);
}

#[test]
fn one_sided_powers_of_asymmetric_test() {
    let spec = grid1();
    let phi = Field::from_real_fn(spec, |x| (1.0 + x[0]) * (-x[0] * x[0]).exp());
    for a in [-1.5f64, -0.3, 0.8] {
        let p = pair_xpm_power(Side::Plus, re(a), &phi).unwrap().re;
        let m = pair_xpm_power(Side::Minus, re(a), &phi).unwrap().re;
        // <x_+^a, (1+x)e^{-x^2}> = (Gamma((a+1)/2) + Gamma((a+2)/2))/2
        let ep = 0.5 * (gamma_re((a + 1.0) / 2.0) + gamma_re((a + 2.0) / 2.0));
        let em = 0.5 * (gamma_re((a + 1.0) / 2.0) - gamma_re((a + 2.0) / 2.0));
        assert!((p - ep).abs() < 1e-9, "{a}: {p} vs {ep}");
        assert!((m - em).abs() < 1e-9, "{a}: {m} vs {em}");
        let pp = PowerPairing::new(&phi);
        let even = pp.parity_power(Parity::Even, re(a)).unwrap().re;
        let odd = pp.parity_power(Parity::Odd, re(a)).unwrap().re;
        let abs = pp.abs_power(re(a)).unwrap().re;
        assert!((even - (p + m)).abs() < 1e-10 && (abs - even).abs() < 1e-9);
        assert!((odd - (p - m)).abs() < 1e-10);
    }
}

#[test]
fn lattice_composites() {
    let spec = grid1();
    let odd = Field::from_real_fn(spec, |x| x[0] * (-x[0] * x[0]).exp());
    let v = pair_principal_power(1, &odd).unwrap();
    assert!((v.re - PI.sqrt()).abs() < 1e-10);
    let even = gauss(spec);
    let v = pair_principal_power(2, &even).unwrap();
    assert!((v.re + 2.0 * PI.sqrt()).abs() < 1e-9);
    let pp = PowerPairing::new(&odd);
    assert!((pp.delta_derivative(1).re + 1.0).abs() < 1e-12);
    assert!(pp.delta_derivative(0).norm() < 1e-14);
    assert!(matches!(
        PowerPairing::new(&even).parity_power(Parity::Even, re(-1.0)),
        Err(Error::Lattice { .. })
    ));
}

#[test]
fn multidimensional_abs_power() {
    for n in [2usize, 3] {
        let spec = GridSpec::default_for(n).unwrap();
        let phi = gauss(spec);
        let area = if n == 2 { 2.0 * PI } else { 4.0 * PI };
        for a in [0.0, 1.3, -1.5, -(n as f64) - 1.2] {
            let v = pair_abs_power(re(a), &phi).unwrap().re;
            let exact = area / 2.0 * gamma_re((a + n as f64) / 2.0);
            assert!((v - exact).abs() <= 1e-7 * exact.abs(), "n={n} a={a}: {v} vs {exact}");
        }
    }
}

#[test]
fn log_power_pairing_is_alpha_derivative() {
    let phi = gauss(grid1());
    let pp = PowerPairing::new(&phi);
    for a in [-1.5, 0.5] {
        let v = pp.abs_power_log(re(a), 1).unwrap().re;
        let h = 1e-3;
        let g = |d: f64| gamma_re((a + d + 1.0) / 2.0);
        let fd = (8.0 * (g(h) - g(-h)) - (g(2.0 * h) - g(-2.0 * h))) / (12.0 * h);
        assert!((v - fd).abs() < 1e-7, "{a}: {v} vs {fd}");
    }
}

#[test]
fn zero_and_odd_tests_pair_to_zero() {
    let spec = grid1();
    let zero = Field::zeros(spec);
    assert_eq!(pair_abs_power(re(-1.5), &zero).unwrap(), re(0.0));
    assert_eq!(pair_abs_power_pv(1, &zero).unwrap(), re(0.0));
    let odd = Field::from_real_fn(spec, |x| x[0] * (-x[0] * x[0]).exp());
    for a in [-2.5, -1.5, 0.3] {
        assert!(pair_abs_power(re(a), &odd).unwrap().norm() < 1e-10);
    }
    assert!(pair_abs_power_pv(0, &odd).unwrap().norm() < 1e-10);
    let pp = PowerPairing::new(&odd);
    for a in [0.5, 1.0, 2.0, 3.0, -0.5] {
        assert!(pp.riesz_kernel(re(a)).unwrap().norm() < 1e-10, "{a}");
    }
}

#[test]
fn kernel_examples() {
    let v = riesz_kernel_eval(1, re(0.5), &[4.0]).unwrap().value().unwrap();
    assert!((v.re - 1.0 / (2.0 * (2.0 * PI).sqrt())).abs() < 1e-14);
    let v = riesz_kernel_eval(1, re(1.0), &[std::f64::consts::E]).unwrap().value().unwrap();
    assert!((v.re + 1.0 / PI).abs() < 1e-15);
    assert_eq!(riesz_kernel_eval(2, re(-4.0), &[1.0, 1.0]).unwrap(), KernelValue::NotPointwise);
    assert!(matches!(riesz_kernel_eval(1, re(0.5), &[0.0]), Err(Error::SingularPoint)));
    let m = multi_riesz_kernel_eval(&MultiIndexDegree::real(&[0.5, 0.5]), &[4.0, 4.0]).unwrap();
    assert!((m.value().unwrap().re - 0.039_788_735_772_973_836).abs() < 1e-15);
    let m = multi_riesz_kernel_eval(&MultiIndexDegree::real(&[1.0, 0.5]), &[std::f64::consts::E, 4.0])
        .unwrap();
    assert!((m.value().unwrap().re + 0.199_471_140_200_716_34 / PI).abs() < 1e-15);
    assert!(multi_riesz_kernel_eval(&MultiIndexDegree::real(&[1.0, 0.5]), &[0.0, 4.0]).is_err());
    assert_eq!(
        multi_riesz_kernel_eval(&MultiIndexDegree::real(&[-2.0, 0.5]), &[1.0, 4.0]).unwrap(),
        KernelValue::NotPointwise
    );
}

#[test]
fn log_branch_agrees_with_one_dimensional_closed_form() {
    // kappa_{1+2s}(x) = (-1)^{s+1} |x|^{2s} log|x| / (pi (2s)!)
    for s in 0..4u32 {
        let fact: f64 = (1..=2 * s).map(f64::from).product();
        for x in [0.3, 1.7, 5.0] {
            let v = riesz_kernel_eval(1, re(1.0 + 2.0 * s as f64), &[x]).unwrap().value().unwrap().re;
            let sign = if s % 2 == 0 { -1.0 } else { 1.0 };
            let exact = sign * x.powi(2 * s as i32) * x.ln() / (PI * fact);
            assert!((v - exact).abs() <= 1e-14 * exact.abs().max(1.0));
        }
    }
}

#[test]
fn homogeneity_examples() {
    let samples = vec![vec![1.0], vec![0.5], vec![2.0], vec![-1.5]];
    let k = KernelId::Riesz { dim: 1, alpha: re(0.5) };
    assert!(homogeneity_defect(&k, 3.0, &samples).unwrap() <= 1e-12);
    let k = KernelId::Riesz { dim: 1, alpha: re(1.0) };
    assert!(homogeneity_defect(&k, 2.0, &samples).unwrap() <= 1e-12);
    for k in [
        KernelId::Riesz { dim: 2, alpha: re(0.7) },
        KernelId::Riesz { dim: 2, alpha: re(4.0) },
        KernelId::Riesz { dim: 3, alpha: C64::new(1.2, 0.4) },
    ] {
        let n = match &k {
            KernelId::Riesz { dim, .. } => *dim,
            _ => unreachable!(),
        };
        let s: Vec<Vec<f64>> = (1..5).map(|i| (0..n).map(|j| 0.3 * (i + j) as f64).collect()).collect();
        assert_eq!(homogeneity_defect(&k, 1.0, &s).unwrap(), 0.0);
        assert!(homogeneity_defect(&k, 10.0, &s).unwrap() <= 1e-12);
    }
}

#[test]
fn multi_kernel_log_expansion() {
    let samples = vec![vec![0.7, 1.3], vec![1.5, 0.4], vec![-0.9, 2.0]];
    for alpha in [[1.0, 1.0], [1.0, 0.5], [3.0, 1.0], [0.4, 0.6]] {
        let k = KernelId::MultiRiesz(MultiIndexDegree::real(&alpha));
        for t in [0.5, 2.0, 10.0] {
            let d = homogeneity_defect(&k, t, &samples).unwrap();
            assert!(d <= 1e-12, "{alpha:?} t={t}: {d:e}");
        }
    }
}

#[test]
fn log_branch_is_the_limit_of_the_regular_branch() {
    let phi = gauss(grid1());
    let pp = PowerPairing::new(&phi);
    for s in 0..2u32 {
        let target = pp.riesz_kernel(re(1.0 + 2.0 * s as f64)).unwrap();
        let mut last = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4] {
            let a = re(1.0 + 2.0 * s as f64 + eps);
            let g = gamma_n(1, a);
            let pole = pp.abs_power(re(2.0 * s as f64)).unwrap() / g;
            let diff = (pp.riesz_kernel(a).unwrap() - pole - target).norm();
            assert!(diff < last);
            last = diff;
        }
        assert!(last < 1e-4, "s={s}: {last}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pairing_is_linear(a in -2.8f64..2.0, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
        prop_assume!(((a + 1.0) / 2.0 - ((a + 1.0) / 2.0).round()).abs() > 1e-3 || a > -1.0);
        let spec = GridSpec::new(1, 1024, 20.0).unwrap();
        let f = gauss(spec);
        let g = Field::from_real_fn(spec, |x| (-(x[0] - 0.5).powi(2)).exp());
        let h = f.scaled(re(c1)).add(&g.scaled(re(c2)));
        let lhs = pair_abs_power(re(a), &h).unwrap();
        let rhs = pair_abs_power(re(a), &f).unwrap() * c1 + pair_abs_power(re(a), &g).unwrap() * c2;
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn abs_power_scaling_law(a in -2.8f64..2.0, lam in 0.5f64..2.0) {
        prop_assume!(((a + 1.0) / 2.0 - ((a + 1.0) / 2.0).round()).abs() > 1e-2 || a > -1.0);
        // <|x|^a, phi(x/lam)> = lam^{a+1} <|x|^a, phi>
        let spec = grid1();
        let f = gauss(spec);
        let g = Field::from_real_fn(spec, |x| (-(x[0] / lam).powi(2)).exp());
        let lhs = pair_abs_power(re(a), &g).unwrap();
        let rhs = pair_abs_power(re(a), &f).unwrap() * lam.powf(a + 1.0);
        prop_assert!((lhs - rhs).norm() <= 1e-8 * (1.0 + rhs.norm()), "{} vs {}", lhs, rhs);
    }
}
