use std::f64::consts::PI;

use proptest::prelude::*;
use rzt_core::grid::{fourier_forward, fourier_inverse, trig_interpolate, Field, GridSpec, SpectralField};
use rzt_core::C64;

fn gaussian_1d(spec: GridSpec) -> Field {
    Field::from_real_fn(spec, |x| (-x[0] * x[0] / 2.0).exp())
}

fn rel_l2(a: &Field, b: &Field) -> f64 {
    a.sub(b).l2_norm() / b.l2_norm()
}

#[test]
fn round_trip_gaussian() {
    for spec in [
        GridSpec::new(1, 4096, 40.0).unwrap(),
        GridSpec::new(2, 128, 10.0).unwrap(),
        GridSpec::new(3, 64, 8.0).unwrap(),
    ] {
        let f = Field::from_real_fn(spec, |x| (-x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp());
        let back = fourier_inverse(&fourier_forward(&f));
        assert!(rel_l2(&back, &f) <= 1e-12);
    }
}

#[test]
fn gaussian_transform_pair() {
    let spec = GridSpec::new(1, 1024, 20.0).unwrap();
    let c = fourier_forward(&gaussian_1d(spec));
    let peak = (2.0 * PI).sqrt();
    for (i, v) in c.coeffs.iter().enumerate() {
        let xi = spec.freq(i);
        let exact = peak * (-xi * xi / 2.0).exp();
        assert!((v - exact).norm() <= 1e-10 * peak, "mode {i}: {v} vs {exact}");
    }
    let exact_coeffs = SpectralField::from_fn(spec, |xi| C64::new(peak * (-xi[0] * xi[0] / 2.0).exp(), 0.0));
    let f = fourier_inverse(&exact_coeffs);
    let g = gaussian_1d(spec);
    for (a, b) in f.values.iter().zip(&g.values) {
        assert!((a - b).norm() <= 1e-10);
    }
}

#[test]
fn two_dimensional_transform_pair() {
    let spec = GridSpec::new(2, 128, 12.0).unwrap();
    let f = Field::from_real_fn(spec, |x| (-(x[0] * x[0] + 4.0 * x[1] * x[1]) / 2.0).exp());
    let c = fourier_forward(&f);
    for flat in (0..spec.len()).step_by(97) {
        let xi = spec.wavevector(flat);
        let exact = 2.0 * PI / 2.0 * (-(xi[0] * xi[0] + xi[1] * xi[1] / 4.0) / 2.0).exp();
        assert!((c.coeffs[flat].re - exact).abs() < 1e-12);
    }
}

#[test]
fn interpolation_examples() {
    let spec = GridSpec::new(1, 1024, 20.0).unwrap();
    let f = gaussian_1d(spec);
    let v = trig_interpolate(&f, &[0.3]).unwrap();
    assert!((v.re - (-0.045f64).exp()).abs() <= 1e-10 && v.im.abs() <= 1e-10);
    for j in [0usize, 17, 512, 1023] {
        assert_eq!(trig_interpolate(&f, &[spec.node(j)]).unwrap(), f.values[j]);
    }
    let xi = spec.freq(37);
    let h = Field::from_fn(spec, |x| C64::from_polar(1.0, xi * x[0]));
    for x in [-19.3, 0.123, 7.77] {
        let v = trig_interpolate(&h, &[x]).unwrap();
        assert!((v - C64::from_polar(1.0, xi * x)).norm() < 1e-12);
    }
    assert!(trig_interpolate(&f, &[20.0]).is_err());
    assert!(trig_interpolate(&f, &[-20.5]).is_err());
}

#[test]
fn interpolation_in_two_dimensions() {
    let spec = GridSpec::new(2, 64, 8.0).unwrap();
    let f = Field::from_real_fn(spec, |x| (-(x[0] * x[0] + x[1] * x[1])).exp() * (1.0 + x[0]));
    let x = [0.31, -0.57];
    let v = trig_interpolate(&f, &x).unwrap();
    let exact = (-(x[0] * x[0] + x[1] * x[1])).exp() * (1.0 + x[0]);
    assert!((v.re - exact).abs() < 1e-10);
}

#[test]
fn parseval_and_realness() {
    let spec = GridSpec::new(1, 2048, 30.0).unwrap();
    let f = Field::from_real_fn(spec, |x| (-x[0] * x[0] / 3.0).exp() * (1.0 + x[0] * x[0]).cos());
    let c = fourier_forward(&f);
    let lhs = f.l2_norm().powi(2);
    let rhs = c.coeffs.iter().map(|v| v.norm_sqr()).sum::<f64>() * spec.freq_cell_volume()
        / (2.0 * PI);
    assert!((lhs - rhs).abs() <= 1e-10 * lhs);
    let max = c.max_abs();
    assert!(c.coeffs.iter().all(|v| v.im.abs() <= 1e-12 * max));
}

#[test]
fn double_transform_reflects() {
    let spec = GridSpec::new(1, 1024, 20.0).unwrap();
    let f = Field::from_real_fn(spec, |x| (-(x[0] - 1.0).powi(2)).exp());
    let ff = fourier_forward(&fourier_forward(&f).to_dual_field());
    assert!((ff.spec.dual().half_width() - spec.half_width()).abs() < 1e-12);
    for (j, v) in ff.spec_values_in_node_order().iter().enumerate() {
        let x = spec.node(j);
        let exact = 2.0 * PI * (-(-x - 1.0f64).powi(2)).exp();
        assert!((v - exact).norm() < 1e-10);
    }
}

trait NodeOrder {
    fn spec_values_in_node_order(&self) -> Vec<C64>;
}

impl NodeOrder for SpectralField {
    fn spec_values_in_node_order(&self) -> Vec<C64> {
        self.to_dual_field().values
    }
}

#[test]
fn field_file_round_trip() {
    let spec = GridSpec::new(2, 64, 3.5).unwrap();
    let f = Field::from_fn(spec, |x| C64::new(x[0], -x[1] * x[0]));
    let mut buf = Vec::new();
    f.write_rzf(&mut buf).unwrap();
    assert_eq!(&buf[..16], b"RZFLD001\0\0\0\0\0\0\0\0");
    assert_eq!(buf.len(), 16 + 4 + 4 + 8 + 16 * spec.len());
    let g = Field::read_rzf(buf.as_slice()).unwrap();
    assert_eq!(f, g);
    buf[0] = b'X';
    assert!(Field::read_rzf(buf.as_slice()).is_err());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.rzf");
    f.save(&path).unwrap();
    assert_eq!(Field::load(&path).unwrap(), f);
}

#[test]
fn boundary_mass_flags_wide_functions() {
    let spec = GridSpec::new(1, 256, 5.0).unwrap();
    assert!(gaussian_1d(spec).boundary_mass() > 1e-14);
    let narrow = Field::from_real_fn(spec, |x| (-4.0 * x[0] * x[0]).exp());
    assert!(narrow.boundary_mass() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_arbitrary_fields(values in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 64)) {
        let spec = GridSpec::new(1, 64, 2.0).unwrap();
        let f = Field::from_values(spec, values.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap();
        prop_assume!(f.l2_norm() > 0.0);
        let back = fourier_inverse(&fourier_forward(&f));
        prop_assert!(rel_l2(&back, &f) <= 1e-12);
        let c = fourier_forward(&f);
        let lhs = f.l2_norm().powi(2);
        let rhs = c.coeffs.iter().map(|v| v.norm_sqr()).sum::<f64>() * spec.freq_cell_volume() / (2.0 * PI);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs);
    }

    #[test]
    fn interpolant_reproduces_nodes(values in prop::collection::vec(-10f64..10.0, 64), j in 0usize..64) {
        let spec = GridSpec::new(1, 64, 1.5).unwrap();
        let f = Field::from_values(spec, values.iter().map(|&a| C64::new(a, 0.0)).collect()).unwrap();
        prop_assert_eq!(trig_interpolate(&f, &[spec.node(j)]).unwrap(), f.values[j]);
        let mid = spec.node(j) + 0.5 * spec.spacing();
        if mid < spec.half_width() {
            prop_assert!(trig_interpolate(&f, &[mid]).unwrap().im.abs() < 1e-9);
        }
    }
}
