//! Complex gamma function, the Riesz normalizing constant `gamma_n(alpha)`
//! and the few Bessel-type functions the pairings need.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real and imaginary parts within this distance of the exceptional
/// lattices are classified as lying on them.
pub const LATTICE_TOL: f64 = 1e-12;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `sin(pi z)` with the real part reduced exactly before scaling by pi.
pub fn sin_pi(z: C64) -> C64 {
    let k = z.re.round();
    let r = z.re - k;
    let sign = if (k as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let (s, c) = (PI * r).sin_cos();
    let b = PI * z.im;
    C64::new(s * b.cosh(), c * b.sinh()) * sign
}

fn nonpositive_integer(z: C64) -> Option<i64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        Some(z.re as i64)
    } else {
        None
    }
}

fn lanczos(z: C64) -> C64 {
    // Gamma(z) for Re z >= 1/2.
    let z = z - 1.0;
    let mut a = C64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * ((z + 0.5) * t.ln() - t).exp() * a
}

/// The gamma function on the complex plane.
pub fn gamma(z: C64) -> Result<C64> {
    if let Some(k) = nonpositive_integer(z) {
        return Err(Error::Pole(k));
    }
    if z.re < 0.5 {
        Ok(PI / (sin_pi(z) * lanczos(1.0 - z)))
    } else {
        Ok(lanczos(z))
    }
}

/// `1/Gamma(z)`, entire, zero at the nonpositive integers.
pub fn rgamma(z: C64) -> C64 {
    if nonpositive_integer(z).is_some() {
        return C64::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        sin_pi(z) * lanczos(1.0 - z) / PI
    } else {
        1.0 / lanczos(z)
    }
}

/// Real gamma for arguments known to avoid the poles.
pub fn gamma_real(x: f64) -> f64 {
    rgamma(C64::new(x, 0.0)).re.recip()
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Surface area of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_real(n as f64 / 2.0)
}

/// Classification of `gamma_n(alpha)` and its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormalizerValue {
    /// `gamma_n(alpha)`, finite and nonzero.
    Regular(C64),
    /// `alpha = n + 2s`; the kernel is `-|x|^{2s} log|x| / value`.
    LogKernel { s: u32, value: f64 },
    /// `alpha = -2s`; the kernel is `(-Delta)^s delta`.
    DeltaKernel { s: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizerKind {
    Regular,
    LogKernel,
    DeltaKernel,
}

impl NormalizerValue {
    pub fn kind(&self) -> NormalizerKind {
        match self {
            NormalizerValue::Regular(_) => NormalizerKind::Regular,
            NormalizerValue::LogKernel { .. } => NormalizerKind::LogKernel,
            NormalizerValue::DeltaKernel { .. } => NormalizerKind::DeltaKernel,
        }
    }
}

/// Nonnegative integer `s` with `x = offset + 2s`, if `x` is real and on that lattice.
pub(crate) fn even_lattice_index(x: C64, offset: f64) -> Option<u32> {
    if x.im != 0.0 {
        return None;
    }
    let s = (x.re - offset) / 2.0;
    let r = s.round();
    if r >= 0.0 && (x.re - offset - 2.0 * r).abs() <= LATTICE_TOL {
        Some(r as u32)
    } else {
        None
    }
}

/// `gamma_n(n + 2s) = (-1)^s 2^{n+2s-1} pi^{n/2} s! Gamma(n/2 + s)`.
pub fn log_kernel_constant(n: usize, s: u32) -> f64 {
    let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
    let nf = n as f64;
    sign * 2f64.powf(nf + 2.0 * s as f64 - 1.0)
        * PI.powf(nf / 2.0)
        * factorial(s)
        * gamma_real(nf / 2.0 + s as f64)
}

/// The plain formula `2^alpha pi^{n/2} Gamma(alpha/2) / Gamma((n-alpha)/2)`,
/// which is zero on the log lattice and infinite on the delta lattice.
pub fn gamma_n(n: usize, alpha: C64) -> C64 {
    let nf = n as f64;
    let half = alpha / 2.0;
    let g = match gamma(half) {
        Ok(g) => g,
        Err(_) => return C64::new(f64::INFINITY, 0.0),
    };
    C64::new(2.0, 0.0).powc(alpha) * PI.powf(nf / 2.0) * g * rgamma((nf - alpha) / 2.0)
}

/// Normalizer of the Riesz kernel `kappa_alpha` in dimension `n`.
pub fn riesz_normalizer(n: usize, alpha: C64) -> NormalizerValue {
    if let Some(s) = even_lattice_index(-alpha, 0.0) {
        return NormalizerValue::DeltaKernel { s };
    }
    if let Some(s) = even_lattice_index(alpha, n as f64) {
        return NormalizerValue::LogKernel { s, value: log_kernel_constant(n, s) };
    }
    NormalizerValue::Regular(gamma_n(n, alpha))
}

/// `K_nu(z)` for real order and `z > 0`, from
/// `int_0^inf exp(-z cosh u) cosh(nu u) du` by the trapezoidal rule.
pub fn bessel_k(nu: f64, z: f64) -> f64 {
    assert!(z > 0.0, "bessel_k needs a positive argument");
    if z > 700.0 {
        return 0.0;
    }
    let h = 0.125;
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let u = k as f64 * h;
        let e = -z * (u.cosh() - 1.0) + nu.abs() * u;
        let term = e.exp() * (1.0 + (-2.0 * nu.abs() * u).exp()) / 2.0;
        sum += term;
        if e < -40.0 && u > 1.0 {
            break;
        }
        k += 1;
    }
    sum * h * (-z).exp()
}

/// `J_0(z)` from the periodic trapezoidal rule on Bessel's integral.
pub fn bessel_j0(z: f64) -> f64 {
    let z = z.abs();
    let m = (1.2 * z).ceil() as usize + 40;
    let mut sum = 0.0;
    for j in 0..m {
        let theta = 2.0 * PI * j as f64 / m as f64;
        sum += (z * theta.sin()).cos();
    }
    sum / m as f64
}

/// Average of `e^{-i xi . x}` over the sphere `|x| = r` in dimension `n`,
/// as a function of `z = |xi| r`.
pub fn sphere_mean_kernel(n: usize, z: f64) -> f64 {
    match n {
        1 => z.cos(),
        2 => bessel_j0(z),
        _ => {
            if z.abs() < 1e-4 {
                1.0 - z * z / 6.0 + z.powi(4) / 120.0
            } else {
                z.sin() / z
            }
        }
    }
}

/// C-infinity step: 0 for `s <= 0`, 1 for `s >= 1`.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
}

/// Smooth partition of unity: 1 on `[0, R/2]`, 0 on `[R, inf)`.
pub fn radial_cutoff(r: f64, radius: f64) -> f64 {
    1.0 - smooth_step((r - 0.5 * radius) / (0.5 * radius))
}
