//! Riesz and multi-Riesz kernels, their homogeneity defects, and regularized
//! pairings of power-type distributions with test fields.
//!
//! A pairing `<|x|^alpha, phi>` is split with a smooth partition `chi` that is
//! 1 on `|x| <= R/2` and 0 beyond `R`. The far part `|x|^alpha (1-chi) phi`
//! is smooth and uses the grid trapezoid. The near part is reduced to a
//! radial integral of the spherical mean of `phi`, computed from its
//! significant Fourier modes, with the Taylor polynomial at 0 subtracted and
//! added back through the analytic continuation of `int_0^R r^{b-1} dr`.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fourier_forward, Field};
use crate::quad::gauss_kronrod;
use crate::special::{
    factorial, gamma_real, radial_cutoff, riesz_normalizer, sphere_area, sphere_mean_kernel,
    NormalizerValue, LATTICE_TOL,
};

/// Pointwise value of a kernel, or a marker for delta-type kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelValue {
    Pointwise(C64),
    NotPointwise,
}

impl KernelValue {
    pub fn value(&self) -> Option<C64> {
        match self {
            KernelValue::Pointwise(v) => Some(*v),
            KernelValue::NotPointwise => None,
        }
    }
}

/// Per-coordinate orders of a multi-Riesz kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiIndexDegree {
    pub components: Vec<C64>,
}

impl MultiIndexDegree {
    pub fn new(components: Vec<C64>) -> Self {
        MultiIndexDegree { components }
    }

    pub fn real(components: &[f64]) -> Self {
        MultiIndexDegree { components: components.iter().map(|&a| C64::new(a, 0.0)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// `|alpha| = alpha_1 + ... + alpha_n`.
    pub fn total(&self) -> C64 {
        self.components.iter().sum()
    }
}

/// Limit distribution `C1 x_+^alpha + C2 x_-^alpha`, or on the lattice
/// `alpha = -k` the form `C1 P(x^{-k}) + C2 delta^{(k-1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitForm1D {
    pub degree: C64,
    pub c_plus: C64,
    pub c_minus: C64,
    pub lattice_case: bool,
}

fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn real_power(r: f64, p: C64) -> C64 {
    (p * r.ln()).exp()
}

/// Riesz kernel `kappa_alpha(x)` in dimension `x.len()`.
pub fn riesz_kernel_eval(n: usize, alpha: C64, x: &[f64]) -> Result<KernelValue> {
    if x.len() != n {
        return Err(Error::InvalidArgument(format!("point of length {} in dimension {n}", x.len())));
    }
    let r = euclidean_norm(x);
    if r == 0.0 {
        return Err(Error::SingularPoint);
    }
    Ok(match riesz_normalizer(n, alpha) {
        NormalizerValue::Regular(g) => {
            KernelValue::Pointwise(real_power(r, alpha - n as f64) / g)
        }
        NormalizerValue::LogKernel { s, value } => {
            KernelValue::Pointwise(C64::new(-r.powi(2 * s as i32) * r.ln() / value, 0.0))
        }
        NormalizerValue::DeltaKernel { .. } => KernelValue::NotPointwise,
    })
}

/// Product `kappa_{alpha_1}(x_1) ... kappa_{alpha_n}(x_n)` of 1-D kernels.
pub fn multi_riesz_kernel_eval(alpha: &MultiIndexDegree, x: &[f64]) -> Result<KernelValue> {
    if x.len() != alpha.dim() {
        return Err(Error::InvalidArgument("point and multi-index differ in length".into()));
    }
    if x.contains(&0.0) {
        return Err(Error::SingularPoint);
    }
    let mut acc = C64::new(1.0, 0.0);
    for (&a, &xj) in alpha.components.iter().zip(x) {
        match riesz_kernel_eval(1, a, &[xj])? {
            KernelValue::Pointwise(v) => acc *= v,
            KernelValue::NotPointwise => return Ok(KernelValue::NotPointwise),
        }
    }
    Ok(KernelValue::Pointwise(acc))
}

/// Kernel selector for [`homogeneity_defect`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelId {
    Riesz { dim: usize, alpha: C64 },
    MultiRiesz(MultiIndexDegree),
}

/// Elementary symmetric polynomial `e_k` of `v`.
fn elementary_symmetric(v: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &x in v {
        for j in (1..=k).rev() {
            e[j] += e[j - 1] * x;
        }
    }
    e[k]
}

/// `max |kappa(t x) - t^deg kappa(x) - correction(t, x)|` over `samples`.
pub fn homogeneity_defect(kernel: &KernelId, t: f64, samples: &[Vec<f64>]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("scale {t} must be positive")));
    }
    let lt = t.ln();
    let mut worst: f64 = 0.0;
    for x in samples {
        let tx: Vec<f64> = x.iter().map(|v| v * t).collect();
        let defect = match kernel {
            KernelId::Riesz { dim, alpha } => {
                let n = *dim;
                let (Some(a), Some(b)) = (
                    riesz_kernel_eval(n, *alpha, &tx)?.value(),
                    riesz_kernel_eval(n, *alpha, x)?.value(),
                ) else {
                    continue;
                };
                match riesz_normalizer(n, *alpha) {
                    NormalizerValue::LogKernel { s, value } => {
                        let p = t.powi(2 * s as i32);
                        let corr = -p * lt * euclidean_norm(x).powi(2 * s as i32) / value;
                        (a - p * b - corr).norm()
                    }
                    _ => (a - real_power(t, *alpha - n as f64) * b).norm(),
                }
            }
            KernelId::MultiRiesz(alpha) => {
                let (Some(a), Some(b)) = (
                    multi_riesz_kernel_eval(alpha, &tx)?.value(),
                    multi_riesz_kernel_eval(alpha, x)?.value(),
                ) else {
                    continue;
                };
                let deg = alpha.total() - alpha.dim() as f64;
                let scale = real_power(t, deg);
                // product over regular components times |x_j|^{2s_j} c_j over log components
                let mut prefactor = C64::new(1.0, 0.0);
                let mut logs = Vec::new();
                for (&aj, &xj) in alpha.components.iter().zip(x.iter()) {
                    match riesz_normalizer(1, aj) {
                        NormalizerValue::LogKernel { s, value } => {
                            prefactor *= -xj.abs().powi(2 * s as i32) / value;
                            logs.push(xj.abs().ln());
                        }
                        _ => {
                            prefactor *= riesz_kernel_eval(1, aj, &[xj])?.value().unwrap_or_default();
                        }
                    }
                }
                let k = logs.len();
                let expansion: f64 =
                    (1..=k).map(|i| lt.powi(i as i32) * elementary_symmetric(&logs, k - i)).sum();
                (a - scale * b - scale * prefactor * expansion).norm()
            }
        };
        worst = worst.max(defect);
    }
    Ok(worst)
}

/// Which one-sided combination of `x_+^alpha` and `x_-^alpha` is paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

/// `|x|^alpha` (even) or `|x|^alpha sign x` (odd).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HalfLine {
    Plus,
    Minus,
    Even,
    Odd,
}

impl HalfLine {
    fn uses_order(self, j: usize) -> bool {
        match self {
            HalfLine::Plus | HalfLine::Minus => true,
            HalfLine::Even => j % 2 == 0,
            HalfLine::Odd => j % 2 == 1,
        }
    }
}

/// Integral `int_0^d r^{b-1} log^l r dr`, analytically continued in `b`.
fn power_log_integral(b: C64, log_order: u32, d: f64) -> C64 {
    let ld = d.ln();
    let db = (b * ld).exp();
    let l = log_order as i32;
    let mut acc = C64::new(0.0, 0.0);
    let mut falling = 1.0;
    for j in 0..=l {
        if j > 0 {
            falling *= (l - j + 1) as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * falling * ld.powi(l - j) / b.powi(j + 1);
    }
    db * acc
}

/// Precomputed spectral data of one test field, shared by all power
/// pairings against it.
#[derive(Debug, Clone)]
pub struct PowerPairing {
    field: Field,
    /// `(|xi|, sum of coefficients on that shell)`
    shells: Vec<(f64, C64)>,
    /// 1-D modes `(xi, c, is_nyquist)`
    modes: Vec<(f64, C64, bool)>,
    norm: f64,
    bandwidth: f64,
    split: f64,
}

const MODE_THRESHOLD: f64 = 1e-14;
const SERIES_TERMS: usize = 14;

impl PowerPairing {
    pub fn new(field: &Field) -> Self {
        let spec = field.spec;
        let spectrum = fourier_forward(field);
        let cut = MODE_THRESHOLD * spectrum.max_abs();
        let h = spec.freq_spacing();
        let mut shells: BTreeMap<u64, C64> = BTreeMap::new();
        let mut modes = Vec::new();
        let mut bandwidth: f64 = 0.0;
        for (flat, &c) in spectrum.coeffs.iter().enumerate() {
            if c.norm() < cut || c.norm() == 0.0 {
                continue;
            }
            let idx = spec.multi_index(flat);
            let key: u64 = idx[..spec.dim()].iter().map(|&i| spec.mode(i).pow(2) as u64).sum();
            *shells.entry(key).or_default() += c;
            let rho = (key as f64).sqrt() * h;
            bandwidth = bandwidth.max(rho);
            if spec.dim() == 1 {
                modes.push((spec.freq(idx[0]), c, idx[0] == spec.points() / 2));
            }
        }
        let shells = shells.into_iter().map(|(k, c)| ((k as f64).sqrt() * h, c)).collect();
        PowerPairing {
            field: field.clone(),
            shells,
            modes,
            norm: (2.0 * spec.half_width()).powi(-(spec.dim() as i32)),
            bandwidth,
            split: f64::max(1.0, 128.0 * spec.spacing()).min(0.5 * spec.half_width()),
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Split radius `R` of the near/far partition.
    pub fn split_radius(&self) -> f64 {
        self.split
    }

    fn inner_radius(&self) -> f64 {
        if self.bandwidth > 0.0 {
            f64::min(self.split / 4.0, 0.25 / self.bandwidth)
        } else {
            self.split / 4.0
        }
    }

    fn is_zero(&self) -> bool {
        self.shells.is_empty()
    }

    /// Spherical mean of the test field on `|x| = r`.
    fn spherical_mean(&self, r: f64) -> C64 {
        let n = self.field.spec.dim();
        self.shells.iter().map(|&(rho, c)| c * sphere_mean_kernel(n, rho * r)).sum::<C64>()
            * self.norm
    }

    /// `(Delta^k phi)(0)`.
    pub fn laplacian_power_at_origin(&self, k: u32) -> C64 {
        self.shells.iter().map(|&(rho, c)| c * (-rho * rho).powi(k as i32)).sum::<C64>() * self.norm
    }

    /// `phi^{(j)}(0)` for `n = 1`.
    pub fn derivative_at_origin(&self, j: u32) -> C64 {
        self.modes
            .iter()
            .map(|&(xi, c, nyq)| c * half_line_derivative(HalfLine::Plus, xi, nyq, j))
            .sum::<C64>()
            * self.norm
    }

    fn far_sum(&self, weight: impl Fn(&[f64]) -> C64) -> C64 {
        let spec = self.field.spec;
        let n = spec.dim();
        let half = 0.5 * self.split;
        let mut acc = C64::new(0.0, 0.0);
        for (flat, &v) in self.field.values.iter().enumerate() {
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let x = spec.position(flat);
            let r = euclidean_norm(&x[..n]);
            if r <= half {
                continue;
            }
            let w = 1.0 - radial_cutoff(r, self.split);
            if w == 0.0 {
                continue;
            }
            acc += weight(&x[..n]) * v * w;
        }
        acc * spec.cell_volume()
    }

    fn taylor_order(alpha: C64, n: usize) -> Option<u32> {
        // smallest m >= 0 with Re alpha > -m - n - 1... expressed on radial terms
        if alpha.re > -(n as f64) {
            None
        } else {
            let m = (-alpha.re - n as f64 - 1.0).floor() + 1.0;
            Some((m.max(0.0) as u32) / 2)
        }
    }

    /// `<|x|^alpha log^l |x|, phi>` by analytic continuation in `alpha`;
    /// with `finite_part` set to `Some(s)` the pole at `alpha = -n - 2s` is
    /// removed and its finite part kept.
    fn radial(&self, alpha: C64, log_order: u32, finite_part: Option<u32>) -> Result<C64> {
        if self.is_zero() {
            return Ok(C64::new(0.0, 0.0));
        }
        let n = self.field.spec.dim();
        let nf = n as f64;
        let kmax = Self::taylor_order(alpha, n);
        let top = kmax.map_or(0, |k| k + 1) as usize + SERIES_TERMS / 2;
        let half_n = gamma_real(nf / 2.0);
        let a: Vec<C64> = (0..top)
            .map(|k| {
                let k32 = k as u32;
                self.laplacian_power_at_origin(k32) * half_n
                    / (4f64.powi(k as i32) * factorial(k32) * gamma_real(nf / 2.0 + k as f64))
            })
            .collect();
        let subtract = kmax.map_or(0, |k| k as usize + 1);
        for k in 0..subtract {
            let b = alpha + nf + 2.0 * k as f64;
            if Some(k as u32) != finite_part && b.im == 0.0 && b.re.abs() <= LATTICE_TOL {
                return Err(Error::Lattice {
                    alpha: alpha.re,
                    use_instead: "pair_abs_power_pv",
                });
            }
        }
        let big_r = self.split;
        let d = self.inner_radius();
        let exponent = alpha + nf - 1.0;
        let integrand = |r: f64| -> C64 {
            let lr = r.ln();
            let taylor: C64 = (0..subtract).map(|k| a[k] * r.powi(2 * k as i32)).sum();
            let body = self.spherical_mean(r) * radial_cutoff(r, big_r) - taylor;
            (exponent * lr).exp() * lr.powi(log_order as i32) * body
        };
        let scale = self.shells.iter().map(|(_, c)| c.norm()).sum::<f64>() * self.norm;
        let near = gauss_kronrod(integrand, d, big_r, &[0.5 * big_r], 1e-15 * scale, 1e-13).value;
        let series: C64 = (subtract..top)
            .map(|k| a[k] * power_log_integral(alpha + nf + 2.0 * k as f64, log_order, d))
            .sum();
        let boundary: C64 = (0..subtract)
            .map(|k| {
                if Some(k as u32) == finite_part {
                    a[k] * big_r.ln().powi(log_order as i32 + 1) / (log_order as f64 + 1.0)
                } else {
                    a[k] * power_log_integral(alpha + nf + 2.0 * k as f64, log_order, big_r)
                }
            })
            .sum();
        let far = self.far_sum(|x| {
            let r = euclidean_norm(x);
            real_power(r, alpha) * r.ln().powi(log_order as i32)
        });
        Ok((near + series + boundary) * sphere_area(n) + far)
    }

    /// `<|x|^alpha, phi>`.
    pub fn abs_power(&self, alpha: C64) -> Result<C64> {
        self.abs_power_log(alpha, 0)
    }

    /// `<|x|^alpha log^l |x|, phi>`.
    pub fn abs_power_log(&self, alpha: C64, log_order: u32) -> Result<C64> {
        let n = self.field.spec.dim() as f64;
        if alpha.im == 0.0 {
            let b = alpha.re + n;
            if b <= LATTICE_TOL && (b / 2.0 - (b / 2.0).round()).abs() * 2.0 <= LATTICE_TOL {
                return Err(Error::Lattice { alpha: alpha.re, use_instead: "pair_abs_power_pv" });
            }
        }
        self.radial(alpha, log_order, None)
    }

    /// `<P(|x|^{-n-2s}), phi>`.
    pub fn abs_power_pv(&self, s: u32) -> Result<C64> {
        let n = self.field.spec.dim() as f64;
        self.radial(C64::new(-n - 2.0 * s as f64, 0.0), 0, Some(s))
    }

    fn half_line(&self, alpha: C64, kind: HalfLine) -> Result<C64> {
        if self.field.spec.dim() != 1 {
            return Err(Error::InvalidArgument("one-sided powers need n = 1".into()));
        }
        if self.is_zero() {
            return Ok(C64::new(0.0, 0.0));
        }
        let m = if alpha.re > -1.0 { 0 } else { ((-alpha.re - 1.0).floor() + 1.0) as usize };
        let top = m + SERIES_TERMS;
        let h: Vec<C64> = (0..top)
            .map(|j| {
                if !kind.uses_order(j) {
                    return C64::new(0.0, 0.0);
                }
                self.modes
                    .iter()
                    .map(|&(xi, c, nyq)| c * half_line_derivative(kind, xi, nyq, j as u32))
                    .sum::<C64>()
                    * self.norm
                    / factorial(j as u32)
            })
            .collect();
        for j in 0..m {
            let b = alpha + j as f64 + 1.0;
            if kind.uses_order(j) && b.im == 0.0 && b.re.abs() <= LATTICE_TOL {
                let use_instead = match kind {
                    HalfLine::Plus | HalfLine::Minus => {
                        "the composites pair_parity_power / pair_principal_power"
                    }
                    HalfLine::Even | HalfLine::Odd => "pair_principal_power",
                };
                return Err(Error::Lattice { alpha: alpha.re, use_instead });
            }
        }
        let big_r = self.split;
        let d = self.inner_radius();
        let integrand = |x: f64| -> C64 {
            let taylor: C64 = (0..m).map(|j| h[j] * x.powi(j as i32)).sum();
            let hx: C64 = self
                .modes
                .iter()
                .map(|&(xi, c, nyq)| c * half_line_weight(kind, xi, nyq, x))
                .sum::<C64>()
                * self.norm;
            real_power(x, alpha) * (hx * radial_cutoff(x, big_r) - taylor)
        };
        let scale = self.modes.iter().map(|(_, c, _)| c.norm()).sum::<f64>() * self.norm;
        let near = gauss_kronrod(integrand, d, big_r, &[0.5 * big_r], 1e-15 * scale, 1e-13).value;
        let series: C64 =
            (m..top).map(|j| h[j] * real_power(d, alpha + j as f64 + 1.0) / (alpha + j as f64 + 1.0)).sum();
        let boundary: C64 = (0..m)
            .filter(|&j| kind.uses_order(j))
            .map(|j| h[j] * real_power(big_r, alpha + j as f64 + 1.0) / (alpha + j as f64 + 1.0))
            .sum();
        let far = self.far_sum(|x| {
            let v = x[0];
            let p = real_power(v.abs(), alpha);
            match kind {
                HalfLine::Plus if v > 0.0 => p,
                HalfLine::Minus if v < 0.0 => p,
                HalfLine::Even => p,
                HalfLine::Odd => p * v.signum(),
                _ => C64::new(0.0, 0.0),
            }
        });
        Ok(near + series + boundary + far)
    }

    /// `<x_+^alpha, phi>` or `<x_-^alpha, phi>`.
    pub fn xpm_power(&self, side: Side, alpha: C64) -> Result<C64> {
        if alpha.im == 0.0 && alpha.re < 0.0 && (alpha.re - alpha.re.round()).abs() <= LATTICE_TOL {
            return Err(Error::Lattice {
                alpha: alpha.re,
                use_instead: "the composites pair_parity_power / pair_principal_power",
            });
        }
        self.half_line(alpha, if side == Side::Plus { HalfLine::Plus } else { HalfLine::Minus })
    }

    /// `<|x|^alpha, phi>` (even) or `<|x|^alpha sign x, phi>` (odd) for
    /// `n = 1`; regular at the lattice points where the poles of the two
    /// one-sided powers cancel.
    pub fn parity_power(&self, parity: Parity, alpha: C64) -> Result<C64> {
        self.half_line(alpha, if parity == Parity::Even { HalfLine::Even } else { HalfLine::Odd })
    }

    /// `<P(x^{-k}), phi>` for `k >= 1`.
    pub fn principal_power(&self, k: u32) -> Result<C64> {
        let parity = if k % 2 == 1 { Parity::Odd } else { Parity::Even };
        self.parity_power(parity, C64::new(-(k as f64), 0.0))
    }

    /// `<delta^{(j)}, phi> = (-1)^j phi^{(j)}(0)`.
    pub fn delta_derivative(&self, j: u32) -> C64 {
        let v = self.derivative_at_origin(j);
        if j % 2 == 0 {
            v
        } else {
            -v
        }
    }

    /// `<kappa_alpha, phi>` across all three kernel branches.
    pub fn riesz_kernel(&self, alpha: C64) -> Result<C64> {
        let n = self.field.spec.dim();
        match riesz_normalizer(n, alpha) {
            NormalizerValue::Regular(g) => Ok(self.abs_power(alpha - n as f64)? / g),
            NormalizerValue::LogKernel { s, value } => {
                Ok(-self.abs_power_log(C64::new(2.0 * s as f64, 0.0), 1)? / value)
            }
            NormalizerValue::DeltaKernel { s } => {
                let v = self.laplacian_power_at_origin(s);
                Ok(if s % 2 == 0 { v } else { -v })
            }
        }
    }
}

fn half_line_weight(kind: HalfLine, xi: f64, nyquist: bool, x: f64) -> C64 {
    let (s, c) = (xi * x).sin_cos();
    if nyquist {
        return match kind {
            HalfLine::Plus | HalfLine::Minus => C64::new(c, 0.0),
            HalfLine::Even => C64::new(2.0 * c, 0.0),
            HalfLine::Odd => C64::new(0.0, 0.0),
        };
    }
    match kind {
        HalfLine::Plus => C64::new(c, -s),
        HalfLine::Minus => C64::new(c, s),
        HalfLine::Even => C64::new(2.0 * c, 0.0),
        HalfLine::Odd => C64::new(0.0, -2.0 * s),
    }
}

fn half_line_derivative(kind: HalfLine, xi: f64, nyquist: bool, j: u32) -> C64 {
    let minus = C64::new(0.0, -xi).powi(j as i32);
    let plus = C64::new(0.0, xi).powi(j as i32);
    if nyquist {
        let cos_part = 0.5 * (minus + plus);
        return match kind {
            HalfLine::Plus | HalfLine::Minus => cos_part,
            HalfLine::Even => 2.0 * cos_part,
            HalfLine::Odd => C64::new(0.0, 0.0),
        };
    }
    match kind {
        HalfLine::Plus => minus,
        HalfLine::Minus => plus,
        HalfLine::Even => minus + plus,
        HalfLine::Odd => minus - plus,
    }
}

/// `<|x|^alpha, phi>` in dimension `phi.spec.dim()`.
pub fn pair_abs_power(alpha: C64, phi: &Field) -> Result<C64> {
    PowerPairing::new(phi).abs_power(alpha)
}

/// `<P(|x|^{-n-2s}), phi>`.
pub fn pair_abs_power_pv(s: u32, phi: &Field) -> Result<C64> {
    PowerPairing::new(phi).abs_power_pv(s)
}

/// `<x_+^alpha, phi>` or `<x_-^alpha, phi>` for `n = 1`.
pub fn pair_xpm_power(side: Side, alpha: C64, phi: &Field) -> Result<C64> {
    PowerPairing::new(phi).xpm_power(side, alpha)
}

/// `<|x|^alpha, phi>` or `<|x|^alpha sign x, phi>` for `n = 1`.
pub fn pair_parity_power(parity: Parity, alpha: C64, phi: &Field) -> Result<C64> {
    PowerPairing::new(phi).parity_power(parity, alpha)
}

/// `<P(x^{-k}), phi>` for `n = 1`.
pub fn pair_principal_power(k: u32, phi: &Field) -> Result<C64> {
    PowerPairing::new(phi).principal_power(k)
}

/// `<kappa_alpha, phi>`.
pub fn pair_riesz_kernel(alpha: C64, phi: &Field) -> Result<C64> {
    PowerPairing::new(phi).riesz_kernel(alpha)
}
