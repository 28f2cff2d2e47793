//! Lizorkin-class test fields, moment diagnostics and the spectral
//! projection that removes a neighbourhood of the origin (or of the
//! coordinate hyperplanes) from a field's spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fourier_forward, fourier_inverse, Field, GridSpec, SpectralField};
use crate::special::smooth_step;
use crate::C64;

/// Highest moment order accepted by [`moments`] and [`marginal_moments`].
pub const MAX_MOMENT_ORDER: u32 = 10;

/// `Phi`: all moments vanish. `PhiTimes`: all marginal moments along each
/// coordinate axis vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Phi,
    PhiTimes,
}

/// A discrete stand-in for one of the Lizorkin spaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LizorkinClass {
    pub variant: Variant,
    /// Frequency radius `eps`: the projection removes `|xi| <= eps/2` and
    /// keeps `|xi| >= eps`.
    pub taper_radius: f64,
    pub moment_tolerance: f64,
}

impl LizorkinClass {
    pub fn new(spec: &GridSpec, variant: Variant, taper_radius: f64, moment_tolerance: f64) -> Result<Self> {
        if !(taper_radius >= 2.0 * spec.freq_spacing()) {
            return Err(Error::InvalidArgument(format!(
                "taper radius {taper_radius} is below two frequency spacings ({})",
                2.0 * spec.freq_spacing()
            )));
        }
        if !(moment_tolerance > 0.0) {
            return Err(Error::InvalidArgument("moment tolerance must be positive".into()));
        }
        Ok(LizorkinClass { variant, taper_radius, moment_tolerance })
    }

    /// `eps = 8 pi / L` and tolerance `1e-8`.
    pub fn default_for(spec: &GridSpec, variant: Variant) -> Self {
        LizorkinClass { variant, taper_radius: 8.0 * spec.freq_spacing(), moment_tolerance: 1e-8 }
    }
}

/// Parameters of the spectral bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestParams {
    /// Scale `sigma` of `exp(-|xi - k0|^2/sigma^2 - sigma^2/|xi|^2)`.
    pub scale: f64,
    /// Centre `k0` of the bump; zero when absent.
    #[serde(default)]
    pub modulation: Option<Vec<f64>>,
}

impl TestParams {
    pub fn new(scale: f64) -> Self {
        TestParams { scale, modulation: None }
    }
}

fn bump(xi: f64, shift: f64, sigma: f64) -> f64 {
    if xi == 0.0 {
        return 0.0;
    }
    let u = (xi - shift) / sigma;
    (-u * u - (sigma / xi).powi(2)).exp()
}

fn validate(spec: &GridSpec, params: &TestParams) -> Result<Vec<f64>> {
    if !(params.scale > 0.0 && params.scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale {} must be positive", params.scale)));
    }
    let shift = params.modulation.clone().unwrap_or_else(|| vec![0.0; spec.dim()]);
    if shift.len() != spec.dim() {
        return Err(Error::InvalidArgument(format!(
            "modulation has {} components, grid has dimension {}",
            shift.len(),
            spec.dim()
        )));
    }
    Ok(shift)
}

fn field_from_spectrum(spectrum: SpectralField) -> Result<Field> {
    if spectrum.max_abs() == 0.0 {
        return Err(Error::Degenerate(
            "the spectral bump underflows on every frequency node".into(),
        ));
    }
    let phi = fourier_inverse(&spectrum);
    let norm = phi.l2_norm();
    Ok(phi.scaled(C64::new(norm.recip(), 0.0)))
}

fn is_nyquist(spec: &GridSpec, flat: usize) -> bool {
    let idx = spec.multi_index(flat);
    idx[..spec.dim()].iter().any(|&i| i == spec.points() / 2)
}

/// Lizorkin test field `phi` with `F[phi] = psi`, normalised to unit `L^2`
/// norm. `psi` is `exp(-|xi-k0|^2/sigma^2 - sigma^2/|xi|^2)` for `Phi` and
/// the per-axis product of the one-dimensional bumps for `PhiTimes`.
pub fn make_lizorkin_test(spec: GridSpec, variant: Variant, params: &TestParams) -> Result<Field> {
    field_from_spectrum(lizorkin_spectrum(spec, variant, params)?)
}

/// The bump `psi` on the frequency grid, exactly zero at `xi = 0` (and on
/// the coordinate hyperplanes for `PhiTimes`) and at the Nyquist modes.
pub fn lizorkin_spectrum(spec: GridSpec, variant: Variant, params: &TestParams) -> Result<SpectralField> {
    let shift = validate(&spec, params)?;
    let sigma = params.scale;
    let mut spectrum = SpectralField::from_fn(spec, |xi| {
        let v = match variant {
            Variant::Phi => {
                let r2: f64 = xi.iter().map(|v| v * v).sum();
                if r2 == 0.0 {
                    0.0
                } else {
                    let d2: f64 = xi.iter().zip(&shift).map(|(a, b)| (a - b).powi(2)).sum();
                    (-d2 / (sigma * sigma) - sigma * sigma / r2).exp()
                }
            }
            Variant::PhiTimes => xi.iter().zip(&shift).map(|(&a, &b)| bump(a, b, sigma)).product(),
        };
        C64::new(v, 0.0)
    });
    for flat in 0..spec.len() {
        if is_nyquist(&spec, flat) {
            spectrum.coeffs[flat] = C64::new(0.0, 0.0);
        }
    }
    Ok(spectrum)
}

/// A real even and a real odd test of class `Phi` in one dimension, both
/// of unit norm; the odd one has spectrum `i (xi/sigma) psi(xi)`.
pub fn make_lizorkin_pair(spec: GridSpec, scale: f64) -> Result<(Field, Field)> {
    if spec.dim() != 1 {
        return Err(Error::InvalidArgument("parity pairs are one-dimensional".into()));
    }
    let even = make_lizorkin_test(spec, Variant::Phi, &TestParams::new(scale))?;
    let mut spectrum = SpectralField::from_fn(spec, |xi| C64::new(0.0, xi[0] / scale * bump(xi[0], 0.0, scale)));
    spectrum.coeffs[spec.points() / 2] = C64::new(0.0, 0.0);
    let odd = field_from_spectrum(spectrum)?;
    Ok((even, odd))
}

fn check_order(max_order: u32) -> Result<()> {
    if max_order > MAX_MOMENT_ORDER {
        return Err(Error::InvalidArgument(format!(
            "moment order {max_order} exceeds {MAX_MOMENT_ORDER}"
        )));
    }
    Ok(())
}

/// Trapezoidal contraction of `axis` against `x^m` for `m = 0..=max_order`.
/// Returns one array per order, each with the axis removed (row-major in
/// the remaining axes).
fn contract_axis(values: &[C64], dims: usize, spec: &GridSpec, axis: usize, max_order: u32) -> Vec<Vec<C64>> {
    let n = spec.points();
    let dx = spec.spacing();
    let stride = n.pow((dims - 1 - axis) as u32);
    let outer = values.len() / (stride * n);
    let powers: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let x = spec.node(i);
            let mut p = Vec::with_capacity(max_order as usize + 1);
            let mut acc = dx;
            for _ in 0..=max_order {
                p.push(acc);
                acc *= x;
            }
            p
        })
        .collect();
    let mut out = vec![vec![C64::new(0.0, 0.0); outer * stride]; max_order as usize + 1];
    for o in 0..outer {
        for s in 0..stride {
            let dst = o * stride + s;
            for (i, p) in powers.iter().enumerate() {
                let v = values[o * stride * n + i * stride + s];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for (m, w) in p.iter().enumerate() {
                    out[m][dst] += v * w;
                }
            }
        }
    }
    out
}

/// One mixed moment `int x^j phi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub index: Vec<u32>,
    pub value: C64,
}

impl Moment {
    pub fn order(&self) -> u32 {
        self.index.iter().sum()
    }
}

/// All mixed moments with `|j| <= max_order`, ordered by total order and
/// then lexicographically.
pub fn moments(phi: &Field, max_order: u32) -> Result<Vec<Moment>> {
    check_order(max_order)?;
    let spec = phi.spec;
    let dim = spec.dim();
    // contract the last axis first; keep (multi-index so far, array)
    let mut stage: Vec<(Vec<u32>, Vec<C64>)> = vec![(Vec::new(), phi.values.clone())];
    for axis in (0..dim).rev() {
        let mut next = Vec::new();
        for (prefix, arr) in &stage {
            let used: u32 = prefix.iter().sum();
            let parts = contract_axis(arr, axis + 1, &spec, axis, max_order - used);
            for (m, part) in parts.into_iter().enumerate() {
                let mut idx = vec![m as u32];
                idx.extend_from_slice(prefix);
                next.push((idx, part));
            }
        }
        stage = next;
    }
    let mut out: Vec<Moment> =
        stage.into_iter().map(|(index, arr)| Moment { index, value: arr[0] }).collect();
    out.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.index.cmp(&b.index)));
    Ok(out)
}

/// Partial moments `int x_k^m phi dx_k` of one order, as a function of the
/// remaining coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalMoment {
    pub order: u32,
    /// Grid of the remaining coordinates; `None` for `n = 1`, where the
    /// marginal moment is the scalar in `values[0]`.
    pub reduced: Option<GridSpec>,
    pub values: Vec<C64>,
}

impl MarginalMoment {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn field(&self) -> Option<Field> {
        self.reduced.map(|spec| Field { spec, values: self.values.clone() })
    }
}

/// Marginal moments along `axis` for orders `0..=max_order`.
pub fn marginal_moments(phi: &Field, axis: usize, max_order: u32) -> Result<Vec<MarginalMoment>> {
    check_order(max_order)?;
    let spec = phi.spec;
    if axis >= spec.dim() {
        return Err(Error::InvalidArgument(format!(
            "axis {axis} out of range for dimension {}",
            spec.dim()
        )));
    }
    let reduced = if spec.dim() > 1 {
        Some(GridSpec::new(spec.dim() - 1, spec.points(), spec.half_width())?)
    } else {
        None
    };
    let parts = contract_axis(&phi.values, spec.dim(), &spec, axis, max_order);
    Ok(parts
        .into_iter()
        .enumerate()
        .map(|(m, values)| MarginalMoment { order: m as u32, reduced, values })
        .collect())
}

/// Largest moment magnitude of `phi` for the class (all mixed moments for
/// `Phi`, marginal sup-norms over every axis for `PhiTimes`).
pub fn worst_moment(phi: &Field, variant: Variant, max_order: u32) -> Result<f64> {
    match variant {
        Variant::Phi => Ok(moments(phi, max_order)?.iter().map(|m| m.value.norm()).fold(0.0, f64::max)),
        Variant::PhiTimes => {
            let mut worst: f64 = 0.0;
            for axis in 0..phi.spec.dim() {
                for m in marginal_moments(phi, axis, max_order)? {
                    worst = worst.max(m.sup_norm());
                }
            }
            Ok(worst)
        }
    }
}

fn ramp(eps: f64, r: f64) -> f64 {
    smooth_step((r - 0.5 * eps) / (0.5 * eps))
}

/// Multiplier of the projection at one wavevector.
pub fn taper(class: &LizorkinClass, xi: &[f64]) -> f64 {
    let eps = class.taper_radius;
    match class.variant {
        Variant::Phi => ramp(eps, xi.iter().map(|v| v * v).sum::<f64>().sqrt()),
        Variant::PhiTimes => xi.iter().map(|v| ramp(eps, v.abs())).product(),
    }
}

fn multiply_spectrum(phi: &Field, m: impl Fn(&[f64]) -> f64) -> Field {
    let spec = phi.spec;
    let n = spec.dim();
    let mut spectrum = fourier_forward(phi);
    for (flat, c) in spectrum.coeffs.iter_mut().enumerate() {
        if *c == C64::new(0.0, 0.0) {
            continue;
        }
        let xi = spec.wavevector(flat);
        let w = m(&xi[..n]);
        if w != 1.0 {
            *c *= w;
        }
    }
    fourier_inverse(&spectrum)
}

/// Multiplies the spectrum of `phi` by the class taper.
pub fn project(phi: &Field, class: &LizorkinClass) -> Field {
    multiply_spectrum(phi, |xi| taper(class, xi))
}

/// Per-axis taper around the hyperplanes `xi_k = 0` for the listed axes only.
pub fn project_axes(phi: &Field, taper_radius: f64, axes: &[usize]) -> Field {
    multiply_spectrum(phi, |xi| axes.iter().map(|&k| ramp(taper_radius, xi[k].abs())).product())
}

fn energy_fraction(phi: &Field, inside: impl Fn(&[f64]) -> bool) -> f64 {
    let spec = phi.spec;
    let n = spec.dim();
    let spectrum = fourier_forward(phi);
    let mut low = 0.0;
    let mut total = 0.0;
    for (flat, c) in spectrum.coeffs.iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        if e > 0.0 && inside(&spec.wavevector(flat)[..n]) {
            low += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        low / total
    }
}

/// Fraction of the spectral energy of `phi` inside `|xi| < eps`.
pub fn low_frequency_energy(phi: &Field, eps: f64) -> f64 {
    energy_fraction(phi, |xi| xi.iter().map(|v| v * v).sum::<f64>() < eps * eps)
}

/// Fraction of the spectral energy within `eps` of any listed hyperplane.
pub fn hyperplane_energy(phi: &Field, eps: f64, axes: &[usize]) -> f64 {
    energy_fraction(phi, |xi| axes.iter().any(|&k| xi[k].abs() < eps))
}
