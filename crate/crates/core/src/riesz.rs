//! The Riesz operator `D^alpha` and its product form `D^alpha_x` as
//! spectral multipliers with the annihilated zero mode (hyperplanes).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fourier_forward, fourier_inverse, Field, GridSpec};
use crate::kernels::MultiIndexDegree;
use crate::lizorkin::{hyperplane_energy, low_frequency_energy, project, project_axes, LizorkinClass, Variant};
use crate::special::LATTICE_TOL;
use crate::C64;

/// Spectral energy near the singular set above which a negative-order
/// operator first projects its input.
pub const PROJECTION_THRESHOLD: f64 = 1e-10;

/// Spectral coefficients below this fraction of the largest one are FFT
/// roundoff and are dropped before the symbol amplifies them.
pub const ROUNDOFF_CHOP: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Degree {
    Isotropic(C64),
    Product(MultiIndexDegree),
}

/// Symbol `|xi|^alpha` or `prod_j |xi_j|^{alpha_j}`, zero on the
/// annihilated set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszMultiplier {
    pub dim: usize,
    pub degree: Degree,
}

/// `x^alpha` for `x > 0`, exact for non-negative even integer `alpha` when
/// passed the square `x2 = x^2`.
fn power_of_square(x2: f64, alpha: C64) -> C64 {
    if alpha.im == 0.0 {
        let half = alpha.re / 2.0;
        if half >= 0.0 && half == half.round() && half <= 64.0 {
            return C64::new(x2.powi(half as i32), 0.0);
        }
    }
    let modulus = x2.powf(0.5 * alpha.re);
    if alpha.im == 0.0 {
        return C64::new(modulus, 0.0);
    }
    C64::from_polar(modulus, 0.5 * alpha.im * x2.ln())
}

impl RieszMultiplier {
    pub fn isotropic(dim: usize, alpha: C64) -> Self {
        RieszMultiplier { dim, degree: Degree::Isotropic(alpha) }
    }

    pub fn product(alpha: MultiIndexDegree) -> Self {
        RieszMultiplier { dim: alpha.dim(), degree: Degree::Product(alpha) }
    }

    /// Symbol value at wavevector `xi`.
    pub fn value(&self, xi: &[f64]) -> C64 {
        match &self.degree {
            Degree::Isotropic(alpha) => {
                let r2: f64 = xi.iter().map(|v| v * v).sum();
                if r2 == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    power_of_square(r2, *alpha)
                }
            }
            Degree::Product(alpha) => {
                let mut acc = C64::new(1.0, 0.0);
                for (&a, &x) in alpha.components.iter().zip(xi) {
                    if a == C64::new(0.0, 0.0) {
                        continue;
                    }
                    if x == 0.0 {
                        return C64::new(0.0, 0.0);
                    }
                    acc *= power_of_square(x * x, a);
                }
                acc
            }
        }
    }

    fn is_identity(&self) -> bool {
        match &self.degree {
            Degree::Isotropic(a) => *a == C64::new(0.0, 0.0),
            Degree::Product(a) => a.components.iter().all(|c| *c == C64::new(0.0, 0.0)),
        }
    }

    /// Multiplies the spectrum of `f` by the symbol without projecting.
    pub fn apply_raw(&self, f: &Field) -> Result<Field> {
        if f.spec.dim() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "multiplier of dimension {} applied to a field of dimension {}",
                self.dim,
                f.spec.dim()
            )));
        }
        if self.is_identity() {
            return Ok(f.clone());
        }
        let spec = f.spec;
        let mut spectrum = fourier_forward(f);
        let floor = ROUNDOFF_CHOP * spectrum.coeffs.iter().fold(0.0, |m: f64, c| m.max(c.norm()));
        spectrum.coeffs.par_iter_mut().enumerate().for_each(|(flat, c)| {
            if c.norm() <= floor {
                *c = C64::new(0.0, 0.0);
                return;
            }
            let xi = spec.wavevector(flat);
            *c *= self.value(&xi[..spec.dim()]);
        });
        Ok(fourier_inverse(&spectrum))
    }
}

fn default_taper(spec: &GridSpec) -> f64 {
    LizorkinClass::default_for(spec, Variant::Phi).taper_radius
}

/// `D^alpha f = F^{-1}[|xi|^alpha F[f]]` with the zero mode annihilated.
/// For `Re alpha < 0` the input is projected onto the Lizorkin class first
/// when it carries spectral energy near the origin.
pub fn apply_riesz(f: &Field, alpha: C64) -> Field {
    let m = RieszMultiplier::isotropic(f.spec.dim(), alpha);
    if m.is_identity() {
        return f.clone();
    }
    let spec = f.spec;
    let projected;
    let src = if alpha.re < 0.0 && low_frequency_energy(f, default_taper(&spec)) > PROJECTION_THRESHOLD {
        projected = project(f, &LizorkinClass::default_for(&spec, Variant::Phi));
        &projected
    } else {
        f
    };
    m.apply_raw(src).expect("dimension matches by construction")
}

/// `D^alpha_x f` with symbol `prod_j |xi_j|^{alpha_j}`; hyperplanes of the
/// axes with nonzero order are annihilated, and axes with `Re alpha_j < 0`
/// are projected first when needed.
pub fn apply_multi_riesz(f: &Field, alpha: &MultiIndexDegree) -> Result<Field> {
    let m = RieszMultiplier::product(alpha.clone());
    if alpha.dim() != f.spec.dim() {
        return m.apply_raw(f);
    }
    let negative: Vec<usize> =
        alpha.components.iter().enumerate().filter(|(_, a)| a.re < 0.0).map(|(k, _)| k).collect();
    let eps = default_taper(&f.spec);
    if !negative.is_empty() && hyperplane_energy(f, eps, &negative) > PROJECTION_THRESHOLD {
        return m.apply_raw(&project_axes(f, eps, &negative));
    }
    m.apply_raw(f)
}

/// Largest of `||D^a D^b f - D^{a+b} f|| / ||f||` and `||D^a D^{-a} f - f|| / ||f||`.
pub fn riesz_group_check(f: &Field, alpha: C64, beta: C64) -> f64 {
    let norm = f.l2_norm();
    if norm == 0.0 {
        return 0.0;
    }
    let ab = apply_riesz(&apply_riesz(f, beta), alpha);
    let sum = apply_riesz(f, alpha + beta);
    let back = apply_riesz(&apply_riesz(f, -alpha), alpha);
    let d1 = ab.sub(&sum).l2_norm() / norm;
    let d2 = back.sub(f).l2_norm() / norm;
    d1.max(d2)
}

/// True when `alpha` is a non-negative even integer, where `D^alpha` is a
/// power of `-Delta`.
pub fn is_laplacian_power(alpha: C64) -> bool {
    alpha.im == 0.0 && alpha.re >= 0.0 && (alpha.re / 2.0 - (alpha.re / 2.0).round()).abs() <= LATTICE_TOL
}
