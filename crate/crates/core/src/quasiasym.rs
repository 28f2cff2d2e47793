//! Automodel comparison functions, scaled pairings `<f(t.), phi>` and
//! `<f(./t), phi>`, and regression estimates of quasi-asymptotic degrees.
//!
//! Catalog entries with a closed-form Fourier transform are paired through
//! Parseval's identity on the frequency grid of the test field, which is
//! spectrally accurate because the test spectrum is flat at the origin.
//! Pairings are therefore taken modulo polynomials: a spectrum that is
//! singular at `xi = 0` contributes nothing there. Fourier images are paired
//! in `x`-space against tests that vanish to infinite order at the origin.
//! Sampled fields are evaluated off the grid by local Lagrange
//! interpolation; the test field, which is band-limited, by its
//! trigonometric interpolant.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fourier_forward, Field, GridSpec, Interpolant, MAX_DIM};
use crate::kernels::{LimitForm1D, MultiIndexDegree, PowerPairing, Side};
use crate::special::{bessel_k, gamma, gamma_n, gamma_real, smooth_step, LATTICE_TOL};
use crate::C64;

/// `rho(t) = t^alpha log^m t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Automodel {
    pub degree: f64,
    #[serde(default)]
    pub log_order: u32,
}

impl Automodel {
    pub fn new(degree: f64, log_order: u32) -> Self {
        Automodel { degree, log_order }
    }

    pub fn power(degree: f64) -> Self {
        Automodel { degree, log_order: 0 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        t.powf(self.degree) * t.ln().powi(self.log_order as i32)
    }

    /// `t^shift rho(t)`.
    pub fn shifted(&self, shift: f64) -> Automodel {
        Automodel { degree: self.degree + shift, log_order: self.log_order }
    }
}

fn one() -> f64 {
    1.0
}

/// Closed-form functions available as evaluators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name", deny_unknown_fields)]
pub enum Catalog {
    /// `exp(-|x|^2 / (2 w^2))`.
    Gaussian {
        #[serde(default = "one")]
        width: f64,
    },
    /// `|x|^alpha`; for `alpha <= -n` point values carry a smooth cutoff
    /// vanishing on `|x| < 0.1`.
    AbsPower { alpha: f64 },
    /// `|x|^alpha sign x` (one dimension).
    SignPower { alpha: f64 },
    /// `|x|^alpha log^m |x|`.
    LogPower { alpha: f64, log_order: u32 },
    /// `sqrt(1 + |x|^2)`.
    #[serde(rename = "sqrt1plusx2")]
    Sqrt1PlusX2,
    /// Unit-mass gaussian of width `sigma`.
    DiracApprox { sigma: f64 },
    /// `sin(k . x)`.
    Harmonic { wavevector: Vec<f64> },
    /// `prod_j f_j(x_j)` with one-dimensional factors.
    Separable { factors: Vec<Catalog> },
}

pub type PointFn = Arc<dyn Fn(&[f64]) -> C64 + Send + Sync>;
pub type AxisFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn real_pow(r: f64, p: C64) -> C64 {
    (p * r.ln()).exp()
}

/// `d^j/da^j gamma_n(a + n)` for `j = 0..=m` by a Cauchy integral.
fn power_spectrum_derivatives(n: usize, a: f64, m: u32) -> Result<Vec<C64>> {
    let nf = n as f64;
    // poles of Gamma((a+n)/2) at a = -n - 2k
    let b = a + nf;
    let dist = if b > 0.0 { f64::INFINITY } else { (b / 2.0 - (b / 2.0).round()).abs() * 2.0 };
    if dist <= LATTICE_TOL {
        return Err(Error::Lattice { alpha: a, use_instead: "a non-lattice exponent" });
    }
    let g = |z: C64| gamma_n(n, z + nf);
    if m == 0 {
        return Ok(vec![g(C64::new(a, 0.0))]);
    }
    let r = f64::min(0.25, 0.5 * dist);
    let points = 64;
    let mut out = vec![g(C64::new(a, 0.0))];
    let samples: Vec<(C64, C64)> = (0..points)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / points as f64;
            let e = C64::from_polar(1.0, theta);
            (e, g(C64::new(a, 0.0) + e * r))
        })
        .collect();
    for j in 1..=m {
        let sum: C64 = samples.iter().map(|(e, v)| v * e.powi(-(j as i32))).sum();
        let fact: f64 = (1..=j).map(f64::from).product();
        out.push(sum * fact / (points as f64 * r.powi(j as i32)));
    }
    Ok(out)
}

fn binomial(m: u32, j: u32) -> f64 {
    (0..j).map(|i| (m - i) as f64 / (i + 1) as f64).product()
}

impl Catalog {
    /// Dimension the entry is tied to, if any.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            Catalog::SignPower { .. } => Some(1),
            Catalog::Separable { factors } => Some(factors.len()),
            Catalog::Harmonic { wavevector } => Some(wavevector.len()),
            _ => None,
        }
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if let Some(d) = self.fixed_dim() {
            if d != n {
                return Err(Error::InvalidArgument(format!(
                    "catalog entry {self:?} has dimension {d}, grid has {n}"
                )));
            }
        }
        if let Catalog::Separable { factors } = self {
            for f in factors {
                if f.fixed_dim().is_some_and(|d| d != 1) {
                    return Err(Error::InvalidArgument("separable factors must be one-dimensional".into()));
                }
            }
        }
        match self {
            Catalog::Gaussian { width } if !(*width > 0.0) => {
                Err(Error::InvalidArgument(format!("gaussian width {width} must be positive")))
            }
            Catalog::DiracApprox { sigma } if !(*sigma > 0.0) => {
                Err(Error::InvalidArgument(format!("dirac_approx sigma {sigma} must be positive")))
            }
            _ => Ok(()),
        }
    }

    /// Point value in dimension `x.len()`.
    pub fn value(&self, x: &[f64]) -> C64 {
        let n = x.len() as f64;
        let r = norm(x);
        let v = match self {
            Catalog::Gaussian { width } => (-r * r / (2.0 * width * width)).exp(),
            Catalog::AbsPower { alpha } => {
                if *alpha <= -n {
                    let cut = smooth_step((r - 0.1) / 0.1);
                    if cut == 0.0 {
                        0.0
                    } else {
                        r.powf(*alpha) * cut
                    }
                } else if r == 0.0 {
                    if *alpha > 0.0 {
                        0.0
                    } else if *alpha == 0.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    r.powf(*alpha)
                }
            }
            Catalog::SignPower { alpha } => {
                if r == 0.0 {
                    if *alpha > 0.0 {
                        0.0
                    } else {
                        f64::NAN
                    }
                } else {
                    r.powf(*alpha) * x[0].signum()
                }
            }
            Catalog::LogPower { alpha, log_order } => {
                if r == 0.0 {
                    if *alpha > 0.0 {
                        0.0
                    } else {
                        f64::NAN
                    }
                } else {
                    r.powf(*alpha) * r.ln().powi(*log_order as i32)
                }
            }
            Catalog::Sqrt1PlusX2 => (1.0 + r * r).sqrt(),
            Catalog::DiracApprox { sigma } => {
                (-r * r / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma).powf(n)
            }
            Catalog::Harmonic { wavevector } => {
                wavevector.iter().zip(x).map(|(k, v)| k * v).sum::<f64>().sin()
            }
            Catalog::Separable { factors } => {
                return factors.iter().zip(x).map(|(f, &v)| f.value(&[v])).product();
            }
        };
        C64::new(v, 0.0)
    }

    /// Closed-form `F[f]` in dimension `n`, or `None` when the entry has no
    /// function-valued transform. Singular points return non-finite values.
    pub fn spectrum(&self, n: usize) -> Result<Option<PointFn>> {
        self.check_dim(n)?;
        let nf = n as f64;
        let f: PointFn = match self.clone() {
            Catalog::Gaussian { width } => {
                let c = (2.0 * PI).powf(nf / 2.0) * width.powf(nf);
                Arc::new(move |xi| {
                    let r2: f64 = xi.iter().map(|v| v * v).sum();
                    C64::new(c * (-width * width * r2 / 2.0).exp(), 0.0)
                })
            }
            Catalog::DiracApprox { sigma } => Arc::new(move |xi| {
                let r2: f64 = xi.iter().map(|v| v * v).sum();
                C64::new((-sigma * sigma * r2 / 2.0).exp(), 0.0)
            }),
            Catalog::AbsPower { alpha } => {
                let c = power_spectrum_derivatives(n, alpha, 0)?[0];
                let p = C64::new(-alpha - nf, 0.0);
                Arc::new(move |xi| c * real_pow(norm(xi), p))
            }
            Catalog::LogPower { alpha, log_order } => {
                let d = power_spectrum_derivatives(n, alpha, log_order)?;
                let m = log_order;
                let coef: Vec<C64> = (0..=m).map(|j| d[j as usize] * binomial(m, j)).collect();
                let p = C64::new(-alpha - nf, 0.0);
                Arc::new(move |xi| {
                    let r = norm(xi);
                    let l = -r.ln();
                    let s: C64 = coef.iter().enumerate().map(|(j, c)| c * l.powi((m - j as u32) as i32)).sum();
                    s * real_pow(r, p)
                })
            }
            Catalog::SignPower { alpha } => {
                let g = gamma(C64::new(alpha + 1.0, 0.0)).map_err(|_| Error::Lattice {
                    alpha,
                    use_instead: "the principal-value composites",
                })?;
                let c = C64::new(0.0, 2.0) * g * (PI * (alpha + 1.0) / 2.0).sin();
                let p = C64::new(-alpha - 1.0, 0.0);
                Arc::new(move |xi| c * real_pow(xi[0].abs(), p) * xi[0].signum())
            }
            Catalog::Sqrt1PlusX2 => {
                let nu = (nf + 1.0) / 2.0;
                let c = (2.0 * PI).powf(nf / 2.0) * 2f64.powf(1.5) / gamma_real(-0.5);
                Arc::new(move |xi| {
                    let r = norm(xi);
                    if r == 0.0 {
                        C64::new(f64::INFINITY, 0.0)
                    } else {
                        C64::new(c * r.powf(-nu) * bessel_k(nu, r), 0.0)
                    }
                })
            }
            Catalog::Harmonic { .. } => return Ok(None),
            Catalog::Separable { factors } => {
                let mut axes = Vec::new();
                for f in &factors {
                    match f.spectrum(1)? {
                        Some(s) => axes.push(s),
                        None => return Ok(None),
                    }
                }
                Arc::new(move |xi| axes.iter().zip(xi).map(|(s, &v)| s(&[v])).product())
            }
        };
        Ok(Some(f))
    }

    fn axis_spectra(&self, n: usize) -> Result<Option<Vec<AxisFn>>> {
        let Catalog::Separable { factors } = self else {
            return Ok(None);
        };
        self.check_dim(n)?;
        let mut out: Vec<AxisFn> = Vec::new();
        for f in factors {
            match f.spectrum(1)? {
                Some(s) => out.push(Arc::new(move |v: f64| s(&[v]))),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }
}

/// A function paired against test fields: a catalog entry, a sampled field,
/// or a Fourier / Riesz image of another evaluator.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluator {
    Catalog { entry: Catalog, amplitude: C64 },
    Sampled(Field),
    /// `F[f]`, evaluated pointwise from the closed-form transform of `f`.
    Fourier(Box<Evaluator>),
    /// `D^beta f`, available through its spectrum only.
    Riesz { base: Box<Evaluator>, beta: C64 },
    MultiRiesz { base: Box<Evaluator>, beta: MultiIndexDegree },
}

/// Point value, spectrum and (for separable spectra) per-axis factors of
/// an evaluator in a fixed dimension.
#[derive(Clone, Default)]
pub struct Compiled {
    pub value: Option<PointFn>,
    pub spectrum: Option<PointFn>,
    pub axes: Option<Vec<AxisFn>>,
}

impl Evaluator {
    pub fn catalog(entry: Catalog) -> Self {
        Evaluator::Catalog { entry, amplitude: C64::new(1.0, 0.0) }
    }

    pub fn fourier(self) -> Self {
        Evaluator::Fourier(Box::new(self))
    }

    pub fn riesz(self, beta: C64) -> Self {
        Evaluator::Riesz { base: Box::new(self), beta }
    }

    pub fn multi_riesz(self, beta: MultiIndexDegree) -> Self {
        Evaluator::MultiRiesz { base: Box::new(self), beta }
    }

    pub fn scaled(self, a: C64) -> Self {
        match self {
            Evaluator::Catalog { entry, amplitude } => Evaluator::Catalog { entry, amplitude: amplitude * a },
            Evaluator::Sampled(f) => Evaluator::Sampled(f.scaled(a)),
            Evaluator::Fourier(b) => Evaluator::Fourier(Box::new(b.scaled(a))),
            Evaluator::Riesz { base, beta } => Evaluator::Riesz { base: Box::new(base.scaled(a)), beta },
            Evaluator::MultiRiesz { base, beta } => {
                Evaluator::MultiRiesz { base: Box::new(base.scaled(a)), beta }
            }
        }
    }

    pub fn compile(&self, n: usize) -> Result<Compiled> {
        match self {
            Evaluator::Catalog { entry, amplitude } => {
                entry.check_dim(n)?;
                let a = *amplitude;
                let e = entry.clone();
                let value: PointFn = Arc::new(move |x| e.value(x) * a);
                let spectrum = entry.spectrum(n)?.map(|s| -> PointFn { Arc::new(move |xi| s(xi) * a) });
                let axes = entry.axis_spectra(n)?.map(|mut v| {
                    let first = v[0].clone();
                    v[0] = Arc::new(move |x| first(x) * a);
                    v
                });
                Ok(Compiled { value: Some(value), spectrum, axes })
            }
            Evaluator::Sampled(field) => {
                if field.spec.dim() != n {
                    return Err(Error::InvalidArgument(format!(
                        "sampled field has dimension {}, expected {n}",
                        field.spec.dim()
                    )));
                }
                let ip = Arc::new(LocalInterpolant::new(field));
                let spec = field.spec;
                let value: PointFn = Arc::new(move |x| {
                    if spec.contains(x) {
                        ip.eval(x)
                    } else {
                        C64::new(f64::NAN, 0.0)
                    }
                });
                Ok(Compiled { value: Some(value), spectrum: None, axes: None })
            }
            Evaluator::Fourier(inner) => {
                let c = inner.compile(n)?;
                let value = c.spectrum.clone().ok_or_else(|| {
                    Error::InvalidArgument("Fourier image needs a closed-form transform".into())
                })?;
                let scale = (2.0 * PI).powi(n as i32);
                let spectrum = c.value.map(|v| -> PointFn {
                    Arc::new(move |xi| {
                        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
                        v(&neg) * scale
                    })
                });
                Ok(Compiled { value: Some(value), spectrum, axes: None })
            }
            Evaluator::Riesz { base, beta } => {
                let c = base.compile(n)?;
                let b = *beta;
                let spectrum = c.spectrum.map(|s| -> PointFn {
                    Arc::new(move |xi| {
                        let r = norm(xi);
                        if r == 0.0 {
                            C64::new(f64::NAN, 0.0)
                        } else {
                            s(xi) * real_pow(r, b)
                        }
                    })
                });
                Ok(Compiled { value: None, spectrum, axes: None })
            }
            Evaluator::MultiRiesz { base, beta } => {
                if beta.dim() != n {
                    return Err(Error::InvalidArgument(format!(
                        "multi-index of dimension {} on a grid of dimension {n}",
                        beta.dim()
                    )));
                }
                let c = base.compile(n)?;
                let b = beta.components.clone();
                let factor = move |j: usize, x: f64| -> C64 {
                    if b[j] == C64::new(0.0, 0.0) {
                        C64::new(1.0, 0.0)
                    } else if x == 0.0 {
                        C64::new(f64::NAN, 0.0)
                    } else {
                        real_pow(x.abs(), b[j])
                    }
                };
                let factor = Arc::new(factor);
                let spectrum = c.spectrum.map(|s| -> PointFn {
                    let factor = factor.clone();
                    Arc::new(move |xi| {
                        let mut v = s(xi);
                        for (j, &x) in xi.iter().enumerate() {
                            v *= factor(j, x);
                        }
                        v
                    })
                });
                let axes = c.axes.map(|axes| {
                    axes.into_iter()
                        .enumerate()
                        .map(|(j, s)| -> AxisFn {
                            let factor = factor.clone();
                            Arc::new(move |x| s(x) * factor(j, x))
                        })
                        .collect()
                });
                Ok(Compiled { value: None, spectrum, axes })
            }
        }
    }
}

/// Scaling direction of quasi-asymptotics: at infinity
/// (`f(t x)`) and at zero (`f(x/t)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Infinity,
    Zero,
}

enum Route {
    Parseval { spectrum: PointFn, modes: Vec<([f64; MAX_DIM], C64)> },
    Separable { axes: Vec<AxisFn>, freqs: Vec<f64>, modes: Vec<([usize; MAX_DIM], C64)> },
    Pointwise { value: PointFn, nodes: Vec<([f64; MAX_DIM], C64)> },
    Sampled {
        samples: Vec<([f64; MAX_DIM], C64)>,
        f: Arc<LocalInterpolant>,
        test: Arc<Interpolant>,
        nodes: Vec<([f64; MAX_DIM], C64)>,
        test_radius: f64,
    },
}

/// Reusable plan for `<f(s.), phi>` over many scales `s`.
pub struct ScaledPairing {
    route: Route,
    dim: usize,
    spec: GridSpec,
}

/// One scale of a pairing trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub pairing: C64,
    /// Quadrature of `|f(s.)| |phi|`, the scale of roundoff in `pairing`.
    pub mass: f64,
}

const NEGLIGIBLE: f64 = 1e-16;

fn significant_nodes(phi: &Field) -> Vec<([f64; MAX_DIM], C64)> {
    let spec = phi.spec;
    let cut = NEGLIGIBLE * phi.max_abs();
    let w = spec.cell_volume();
    phi.values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > cut)
        .map(|(flat, v)| (spec.position(flat), v * w))
        .collect()
}

impl ScaledPairing {
    pub fn new(f: &Evaluator, phi: &Field) -> Result<Self> {
        let spec = phi.spec;
        let n = spec.dim();
        if let Evaluator::Sampled(field) = f {
            if field.spec != spec {
                return Err(Error::InvalidArgument(
                    "sampled evaluator and test field must share a grid".into(),
                ));
            }
            let nodes = significant_nodes(phi);
            let test_radius = nodes
                .iter()
                .map(|(x, _)| x[..n].iter().fold(0.0f64, |m, v| m.max(v.abs())))
                .fold(0.0, f64::max);
            let w = spec.cell_volume();
            let samples = field
                .values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != C64::new(0.0, 0.0))
                .map(|(flat, v)| (spec.position(flat), v * w))
                .collect();
            return Ok(ScaledPairing {
                route: Route::Sampled {
                    samples,
                    f: Arc::new(LocalInterpolant::new(field)),
                    test: Arc::new(Interpolant::band_limited(phi, 1e-15)),
                    nodes,
                    test_radius,
                },
                dim: n,
                spec,
            });
        }
        let compiled = f.compile(n)?;
        let pointwise_first = matches!(f, Evaluator::Fourier(_));
        if pointwise_first {
            if let Some(value) = compiled.value {
                return Ok(ScaledPairing {
                    route: Route::Pointwise { value, nodes: significant_nodes(phi) },
                    dim: n,
                    spec,
                });
            }
        }
        let spectrum = fourier_forward(phi);
        let cut = NEGLIGIBLE * spectrum.max_abs();
        let w = (2.0 * spec.half_width()).powi(-(n as i32));
        let neg_modes = || {
            (0..spec.len()).filter_map(move |flat| {
                let c = spectrum.at_negated(flat);
                if c.norm() > cut {
                    Some((flat, c * w))
                } else {
                    None
                }
            })
        };
        if let Some(axes) = compiled.axes {
            let freqs = (0..spec.points()).map(|i| spec.freq(i)).collect();
            let modes = neg_modes().map(|(flat, c)| (spec.multi_index(flat), c)).collect();
            return Ok(ScaledPairing { route: Route::Separable { axes, freqs, modes }, dim: n, spec });
        }
        if let Some(s) = compiled.spectrum {
            let modes = neg_modes().map(|(flat, c)| (spec.wavevector(flat), c)).collect();
            return Ok(ScaledPairing { route: Route::Parseval { spectrum: s, modes }, dim: n, spec });
        }
        if let Some(value) = compiled.value {
            return Ok(ScaledPairing {
                route: Route::Pointwise { value, nodes: significant_nodes(phi) },
                dim: n,
                spec,
            });
        }
        Err(Error::InvalidArgument("evaluator has neither point values nor a spectrum".into()))
    }

    /// `<f(s.), phi>` and the matching absolute mass.
    pub fn pair_at_scale(&self, s: f64) -> Result<(C64, f64)> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale {s} must be positive")));
        }
        let n = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        let mut mass = 0.0;
        let mut add = |v: C64, w: C64| {
            if v.is_finite() {
                let p = v * w;
                acc += p;
                mass += p.norm();
            }
        };
        match &self.route {
            Route::Parseval { spectrum, modes } => {
                let mut xi = [0.0; MAX_DIM];
                for (k, c) in modes {
                    for a in 0..n {
                        xi[a] = k[a] / s;
                    }
                    add(spectrum(&xi[..n]), *c);
                }
                let sn = s.powi(-(n as i32));
                acc *= sn;
                mass *= sn;
            }
            Route::Separable { axes, freqs, modes } => {
                let tables: Vec<Vec<C64>> =
                    axes.iter().map(|a| freqs.iter().map(|&k| a(k / s)).collect()).collect();
                for (idx, c) in modes {
                    let v: C64 = (0..n).map(|a| tables[a][idx[a]]).product();
                    add(v, *c);
                }
                let sn = s.powi(-(n as i32));
                acc *= sn;
                mass *= sn;
            }
            Route::Pointwise { value, nodes } => {
                let mut x = [0.0; MAX_DIM];
                for (p, w) in nodes {
                    for a in 0..n {
                        x[a] = p[a] * s;
                    }
                    add(value(&x[..n]), *w);
                }
            }
            Route::Sampled { samples, f, test, nodes, test_radius } => {
                let l = self.spec.half_width();
                if s <= 1.0 {
                    // f(s x) stays inside the box
                    let mut x = [0.0; MAX_DIM];
                    for (p, w) in nodes {
                        for a in 0..n {
                            x[a] = p[a] * s;
                        }
                        add(f.eval(&x[..n]), *w);
                    }
                } else {
                    if test_radius * s > l * (1.0 + 1e-12) {
                        return Err(Error::Window(format!(
                            "scale {s} stretches the test (radius {test_radius:.3}) beyond the sampled box \
                             [-{l}, {l}); use a larger half width"
                        )));
                    }
                    let mut y = [0.0; MAX_DIM];
                    for (p, w) in samples {
                        if p[..n].iter().any(|v| v.abs() > test_radius * s) {
                            continue;
                        }
                        for a in 0..n {
                            y[a] = p[a] / s;
                        }
                        add(test.eval_unchecked(&y[..n]), *w);
                    }
                    let sn = s.powi(-(n as i32));
                    acc *= sn;
                    mass *= sn;
                }
            }
        }
        Ok((acc, mass))
    }

    pub fn pair(&self, t: f64, direction: Direction) -> Result<C64> {
        Ok(self.pair_with_mass(t, direction)?.0)
    }

    fn pair_with_mass(&self, t: f64, direction: Direction) -> Result<(C64, f64)> {
        match direction {
            Direction::Infinity => self.pair_at_scale(t),
            Direction::Zero => self.pair_at_scale(1.0 / t),
        }
    }

    /// Pairings over a t-grid; parallel, in grid order.
    pub fn trace(&self, direction: Direction, grid: &TGrid) -> Result<Vec<TracePoint>> {
        grid.points
            .par_iter()
            .map(|&t| {
                let (pairing, mass) = self.pair_with_mass(t, direction)?;
                Ok(TracePoint { t, pairing, mass })
            })
            .collect()
    }
}

// Plans hold closures that are Send + Sync and read-only data.
#[allow(dead_code)]
fn assert_sync() {
    fn is_sync<T: Sync + Send>() {}
    is_sync::<ScaledPairing>();
}

/// `<f(t.), phi>` (infinity) or `<f(./t), phi>` (zero).
pub fn pair_scaled(f: &Evaluator, phi: &Field, t: f64, direction: Direction) -> Result<C64> {
    ScaledPairing::new(f, phi)?.pair(t, direction)
}

/// Geometric grid of scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TGrid {
    pub points: Vec<f64>,
}

impl TGrid {
    pub fn geometric(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad t window [{t_min}, {t_max}]")));
        }
        if count < 2 {
            return Err(Error::InvalidArgument("a t-grid needs at least two points".into()));
        }
        let r = (t_max / t_min).ln() / (count - 1) as f64;
        let mut points: Vec<f64> = (0..count).map(|i| t_min * (r * i as f64).exp()).collect();
        points[count - 1] = t_max;
        Ok(TGrid { points })
    }

    pub fn t_min(&self) -> f64 {
        self.points[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.points.last().expect("non-empty grid")
    }

    /// At least 20 points over at least two decades.
    pub fn validate_for_estimation(&self) -> Result<()> {
        if self.points.len() < 20 {
            return Err(Error::Window(format!("t-grid has {} points; at least 20 needed", self.points.len())));
        }
        if self.t_max() / self.t_min() < 100.0 * (1.0 - 1e-12) {
            return Err(Error::Window("t-grid must span at least two decades".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    PurePower,
    PowerLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    /// A finite degree was fitted.
    Finite,
    /// The pairings decay faster than `t^{-10}` or reach the roundoff floor.
    MinusInfinity,
    /// The regression residual exceeds the validity threshold.
    Invalid,
}

fn serialize_degree<S: serde::Serializer>(d: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if d.is_finite() {
        s.serialize_f64(*d)
    } else if *d < 0.0 {
        s.serialize_str("-inf")
    } else {
        s.serialize_str("nan")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeEstimate {
    pub kind: EstimateKind,
    /// Fitted degree; `-inf` for [`EstimateKind::MinusInfinity`]. At zero
    /// the degree is minus the growth exponent of `<f(./t), phi>`.
    #[serde(serialize_with = "serialize_degree")]
    pub degree: f64,
    pub log_order: u32,
    /// Limit of the pairing normalized by the fitted comparison function.
    pub coefficient: C64,
    pub residual: f64,
    pub window: (f64, f64),
    pub direction: Direction,
}

impl DegreeEstimate {
    pub fn is_valid(&self) -> bool {
        self.kind != EstimateKind::Invalid
    }

    /// Growth exponent of the pairing trace in `t`.
    pub fn exponent(&self) -> f64 {
        match self.direction {
            Direction::Infinity => self.degree,
            Direction::Zero => -self.degree,
        }
    }

    /// `|p(t)| / (t^exponent log^m t)` for trace output.
    pub fn normalized(&self, p: &TracePoint) -> f64 {
        if self.kind == EstimateKind::MinusInfinity {
            return p.pairing.norm();
        }
        p.pairing.norm() / (p.t.powf(self.exponent()) * p.t.ln().powi(self.log_order as i32))
    }
}

/// Regression RMS above which an estimate is invalid.
pub const RESIDUAL_LIMIT: f64 = 0.1;
/// Slope below which pairings count as decaying faster than any power.
pub const MINUS_INFINITY_SLOPE: f64 = -10.0;
/// Relative floor (pairing over absolute mass) treated as exact cancellation.
pub const ROUNDOFF_FLOOR: f64 = 1e-11;
const POWER_LOG_TOL: f64 = 1e-3;
const MAX_LOG_ORDER: u32 = 3;

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    (slope, icpt, rms)
}

fn complex_median(v: &mut [C64]) -> C64 {
    let med = |xs: &mut Vec<f64>| {
        xs.sort_by(f64::total_cmp);
        let k = xs.len();
        if k % 2 == 1 {
            xs[k / 2]
        } else {
            0.5 * (xs[k / 2 - 1] + xs[k / 2])
        }
    };
    let mut re: Vec<f64> = v.iter().map(|c| c.re).collect();
    let mut im: Vec<f64> = v.iter().map(|c| c.im).collect();
    C64::new(med(&mut re), med(&mut im))
}

/// Solves the complex normal equations for `q(u) ~ sum_k a_k u^k`.
fn poly_fit(u: &[f64], q: &[C64], degree: usize) -> Vec<C64> {
    let m = degree + 1;
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![C64::new(0.0, 0.0); m];
    for (&ui, &qi) in u.iter().zip(q) {
        let pw: Vec<f64> = (0..m).map(|k| ui.powi(k as i32)).collect();
        for r in 0..m {
            b[r] += qi * pw[r];
            for c in 0..m {
                a[r][c] += pw[r] * pw[c];
            }
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        if d == 0.0 {
            continue;
        }
        for r in col + 1..m {
            let f = a[r][col] / d;
            for c in col..m {
                a[r][c] -= f * a[col][c];
            }
            let bc = b[col];
            b[r] -= bc * f;
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); m];
    for r in (0..m).rev() {
        let mut s = b[r];
        for c in r + 1..m {
            s -= x[c] * a[r][c];
        }
        x[r] = if a[r][r] == 0.0 { C64::new(0.0, 0.0) } else { s / a[r][r] };
    }
    x
}

/// Relative RMS misfit of `p(t) t^{-a}` by a polynomial of degree `m` in
/// `log t`, and its coefficients.
fn power_log_misfit(t: &[f64], p: &[C64], a: f64, m: u32) -> (f64, Vec<C64>) {
    let u: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let q: Vec<C64> = t.iter().zip(p).map(|(tv, pv)| pv * tv.powf(-a)).collect();
    let coef = poly_fit(&u, &q, m as usize);
    let mut res = 0.0;
    let mut tot = 0.0;
    for (ui, qi) in u.iter().zip(&q) {
        let fit: C64 = coef.iter().enumerate().map(|(k, c)| c * ui.powi(k as i32)).sum();
        res += (qi - fit).norm_sqr();
        tot += qi.norm_sqr();
    }
    ((res / tot).sqrt(), coef)
}

fn minimize_misfit(t: &[f64], p: &[C64], center: f64, m: u32) -> (f64, f64, Vec<C64>) {
    let f = |a: f64| power_log_misfit(t, p, a, m).0;
    let (lo, hi) = (center - 1.5, center + 1.5);
    let steps = 120;
    let mut best = lo;
    let mut best_v = f64::INFINITY;
    for i in 0..=steps {
        let a = lo + (hi - lo) * i as f64 / steps as f64;
        let v = f(a);
        if v < best_v {
            best_v = v;
            best = a;
        }
    }
    // golden-section refinement around the coarse minimum
    let h = (hi - lo) / steps as f64;
    let (mut a, mut b) = (best - h, best + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let (r, coef) = power_log_misfit(t, p, x, m);
    (x, r, coef)
}

/// Fits the degree from a pairing trace over the top half of its window.
pub fn estimate_from_trace(trace: &[TracePoint], direction: Direction, model: Model) -> Result<DegreeEstimate> {
    if trace.len() < 4 {
        return Err(Error::Window("trace too short for a fit".into()));
    }
    let window = (trace[0].t, trace[trace.len() - 1].t);
    let top = &trace[trace.len() / 2..];
    let sign = if direction == Direction::Infinity { 1.0 } else { -1.0 };
    let minus_inf = DegreeEstimate {
        kind: EstimateKind::MinusInfinity,
        degree: f64::NEG_INFINITY,
        log_order: 0,
        coefficient: C64::new(0.0, 0.0),
        residual: 0.0,
        window,
        direction,
    };
    if top.iter().any(|p| !p.pairing.is_finite()) {
        return Ok(DegreeEstimate {
            kind: EstimateKind::Invalid,
            degree: f64::NAN,
            log_order: 0,
            coefficient: C64::new(f64::NAN, 0.0),
            residual: f64::INFINITY,
            window,
            direction,
        });
    }
    if top.iter().all(|p| p.pairing.norm() <= ROUNDOFF_FLOOR * p.mass) {
        return Ok(minus_inf);
    }
    let x: Vec<f64> = top.iter().map(|p| p.t.ln()).collect();
    let y: Vec<f64> = top.iter().map(|p| p.pairing.norm().max(f64::MIN_POSITIVE).ln()).collect();
    let (slope, _, rms) = linear_fit(&x, &y);
    if slope < MINUS_INFINITY_SLOPE {
        return Ok(minus_inf);
    }
    let (exponent, log_order, residual, coefficient) = match model {
        Model::PurePower => {
            let mut norm: Vec<C64> = top[top.len().saturating_sub(5)..]
                .iter()
                .map(|p| p.pairing * p.t.powf(-slope))
                .collect();
            (slope, 0, rms, complex_median(&mut norm))
        }
        Model::PowerLog => {
            let t: Vec<f64> = top.iter().map(|p| p.t).collect();
            let p: Vec<C64> = top.iter().map(|p| p.pairing).collect();
            let mut chosen = None;
            let mut best: Option<(f64, u32, f64, Vec<C64>)> = None;
            for m in 0..=MAX_LOG_ORDER {
                let (a, r, coef) = minimize_misfit(&t, &p, slope, m);
                if best.as_ref().is_none_or(|b| r < b.2) {
                    best = Some((a, m, r, coef.clone()));
                }
                if r <= POWER_LOG_TOL {
                    chosen = Some((a, m, r, coef));
                    break;
                }
            }
            let (a, m, r, coef) = chosen.or(best).expect("at least one model order");
            (a, m, r, coef[m as usize])
        }
    };
    let kind = if residual > RESIDUAL_LIMIT { EstimateKind::Invalid } else { EstimateKind::Finite };
    Ok(DegreeEstimate { kind, degree: sign * exponent, log_order, coefficient, residual, window, direction })
}

/// Estimates the quasi-asymptotic degree of `f` in the given direction.
pub fn estimate_degree(
    f: &Evaluator,
    phi: &Field,
    direction: Direction,
    grid: &TGrid,
    model: Model,
) -> Result<DegreeEstimate> {
    grid.validate_for_estimation()?;
    let plan = ScaledPairing::new(f, phi)?;
    estimate_from_trace(&plan.trace(direction, grid)?, direction, model)
}

/// Outcome of [`regular_variation_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularVariationReport {
    /// `(a, C(a))` at the largest `t`.
    pub table: Vec<(f64, f64)>,
    /// Index estimate extrapolated to `t = infinity`.
    pub alpha_hat: f64,
    /// Index fitted at the largest `t` alone.
    pub alpha_at_t_max: f64,
    /// `max |C(a) / a^alpha_hat - 1|` at the largest `t`.
    pub max_deviation: f64,
    pub automodel: bool,
    pub diagnostics: String,
}

/// Linearity residual of `log C(a)` in `log a` above which ratios are not
/// of power type.
pub const NONLINEARITY_LIMIT: f64 = 0.05;

/// Empirical `C(a) = lim rho(t a) / rho(t)` and its index `alpha` with
/// `C(a) = a^alpha`.
pub fn regular_variation_check(
    rho: &(dyn Fn(f64) -> f64 + Sync),
    a_grid: &[f64],
    grid: &TGrid,
) -> Result<RegularVariationReport> {
    if a_grid.len() < 2 || a_grid.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument("a-grid needs at least two positive points".into()));
    }
    let not_automodel = |msg: String| RegularVariationReport {
        table: Vec::new(),
        alpha_hat: f64::NAN,
        alpha_at_t_max: f64::NAN,
        max_deviation: f64::INFINITY,
        automodel: false,
        diagnostics: msg,
    };
    let la: Vec<f64> = a_grid.iter().map(|a| a.ln()).collect();
    let mut alphas = Vec::new();
    let mut us = Vec::new();
    let mut last_rms = 0.0;
    let mut last_table = Vec::new();
    for &t in &grid.points {
        let base = rho(t);
        let mut lc = Vec::with_capacity(a_grid.len());
        let mut table = Vec::with_capacity(a_grid.len());
        for &a in a_grid {
            let c = rho(t * a) / base;
            if !(c.is_finite() && c > 0.0) {
                return Ok(not_automodel(format!("ratio rho({})/rho({t}) = {c} is not a finite positive number", t * a)));
            }
            lc.push(c.ln());
            table.push((a, c));
        }
        let (slope, _, rms) = linear_fit(&la, &lc);
        alphas.push(slope);
        us.push(if t > std::f64::consts::E { 1.0 / t.ln() } else { f64::NAN });
        last_rms = rms;
        last_table = table;
    }
    let alpha_t = *alphas.last().expect("non-empty grid");
    if last_rms > NONLINEARITY_LIMIT {
        return Ok(not_automodel(format!(
            "log C(a) is not linear in log a at t = {} (rms {last_rms:.3e})",
            grid.t_max()
        )));
    }
    let mut pairs: Vec<(f64, f64)> =
        us.iter().zip(&alphas).filter(|(u, _)| u.is_finite()).map(|(u, a)| (*u, *a)).collect();
    // extrapolate from the upper half of the window, where the expansion in u converges fastest
    let keep = (pairs.len() / 2).max(6).min(pairs.len());
    pairs.drain(..pairs.len() - keep);
    let alpha_hat = if pairs.len() >= 6 {
        let u: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let q: Vec<C64> = pairs.iter().map(|p| C64::new(p.1, 0.0)).collect();
        poly_fit(&u, &q, 3)[0].re
    } else {
        alpha_t
    };
    // successive changes of alpha_hat(t) must not grow
    let diffs: Vec<f64> = alphas.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let k = diffs.len();
    if k >= 4 {
        let early: f64 = diffs[..k / 2].iter().sum::<f64>() / (k / 2) as f64;
        let late: f64 = diffs[k / 2..].iter().sum::<f64>() / (k - k / 2) as f64;
        if late > 2.0 * early + 1e-12 {
            return Ok(not_automodel(format!(
                "index estimate keeps drifting (mean step {early:.3e} then {late:.3e})"
            )));
        }
    }
    let max_deviation = last_table.iter().map(|(a, c)| (c / a.powf(alpha_hat) - 1.0).abs()).fold(0.0, f64::max);
    Ok(RegularVariationReport {
        table: last_table,
        alpha_hat,
        alpha_at_t_max: alpha_t,
        max_deviation,
        automodel: true,
        diagnostics: format!("t_max = {}, linearity rms {last_rms:.3e}", grid.t_max()),
    })
}

/// Solves `m_i = C1 b_i1 + C2 b_i2` for two tests.
pub fn solve_two_by_two(m: [C64; 2], b: [[C64; 2]; 2]) -> Result<(C64, C64)> {
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let scale = b.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if !(det.norm() > 1e-10 * scale * scale) {
        return Err(Error::Conditioning(format!(
            "limit-form system is singular (det {:.3e}, entries up to {scale:.3e}); use tests of opposite parity",
            det.norm()
        )));
    }
    let c1 = (m[0] * b[1][1] - m[1] * b[0][1]) / det;
    let c2 = (b[0][0] * m[1] - b[1][0] * m[0]) / det;
    Ok((c1, c2))
}

/// Limit pairing `lim p(t) / t^exponent` from the median of the last five
/// normalized values.
pub fn plateau(trace: &[TracePoint], exponent: f64) -> C64 {
    let mut v: Vec<C64> =
        trace[trace.len().saturating_sub(5)..].iter().map(|p| p.pairing * p.t.powf(-exponent)).collect();
    complex_median(&mut v)
}

/// Measured limit pairings and the basis pairings of the two tests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitFormFit {
    pub form: LimitForm1D,
    pub measured: [C64; 2],
    pub basis: [[C64; 2]; 2],
}

/// Fits `g = C1 x_+^alpha + C2 x_-^alpha` (on the lattice `alpha = -k`:
/// `C1 P(x^{-k}) + C2 delta^{(k-1)}`) to the limit of `f` at infinity
/// (or at zero, with `f(x/t) ~ t^{-alpha}`).
pub fn fit_limit_form_1d(
    f: &Evaluator,
    alpha: f64,
    tests: (&Field, &Field),
    direction: Direction,
    grid: &TGrid,
) -> Result<LimitFormFit> {
    let (a, b) = tests;
    if a.spec.dim() != 1 || b.spec.dim() != 1 {
        return Err(Error::InvalidArgument("limit forms are one-dimensional".into()));
    }
    let exponent = if direction == Direction::Infinity { alpha } else { -alpha };
    let lattice = alpha < 0.0 && (alpha - alpha.round()).abs() <= LATTICE_TOL;
    let mut measured = [C64::new(0.0, 0.0); 2];
    let mut basis = [[C64::new(0.0, 0.0); 2]; 2];
    for (i, phi) in [a, b].into_iter().enumerate() {
        let trace = ScaledPairing::new(f, phi)?.trace(direction, grid)?;
        measured[i] = plateau(&trace, exponent);
        let pp = PowerPairing::new(phi);
        basis[i] = if lattice {
            let k = (-alpha).round() as u32;
            [pp.principal_power(k)?, pp.delta_derivative(k - 1)]
        } else {
            let al = C64::new(alpha, 0.0);
            [pp.xpm_power(Side::Plus, al)?, pp.xpm_power(Side::Minus, al)?]
        };
    }
    let (c_plus, c_minus) = solve_two_by_two(measured, basis)?;
    Ok(LimitFormFit {
        form: LimitForm1D { degree: C64::new(alpha, 0.0), c_plus, c_minus, lattice_case: lattice },
        measured,
        basis,
    })
}

const STENCIL: usize = 8;

/// Tensor-product Lagrange interpolation of degree `STENCIL - 1`; exact on
/// polynomials and free of the ringing a periodic interpolant shows on
/// non-periodic samples.
pub struct LocalInterpolant {
    field: Field,
}

impl LocalInterpolant {
    pub fn new(field: &Field) -> Self {
        LocalInterpolant { field: field.clone() }
    }

    fn axis_weights(&self, x: f64) -> (usize, [f64; STENCIL]) {
        let spec = self.field.spec;
        let n = spec.points();
        let u = (x + spec.half_width()) / spec.spacing();
        let start = (u.floor() as i64 - (STENCIL as i64 / 2 - 1)).clamp(0, (n - STENCIL) as i64) as usize;
        let v = u - start as f64;
        let mut w = [1.0; STENCIL];
        for (i, wi) in w.iter_mut().enumerate() {
            for j in 0..STENCIL {
                if j != i {
                    *wi *= (v - j as f64) / (i as f64 - j as f64);
                }
            }
        }
        (start, w)
    }

    /// Value at `x`; points outside `[-L, L)` are extrapolated from the edge
    /// stencil, so callers keep `x` inside the box.
    pub fn eval(&self, x: &[f64]) -> C64 {
        let spec = self.field.spec;
        let n = spec.dim();
        let stencils: Vec<(usize, [f64; STENCIL])> = x[..n].iter().map(|&v| self.axis_weights(v)).collect();
        let total = STENCIL.pow(n as u32);
        let mut acc = C64::new(0.0, 0.0);
        let mut idx = [0usize; MAX_DIM];
        for k in 0..total {
            let mut rem = k;
            let mut w = 1.0;
            for a in (0..n).rev() {
                let o = rem % STENCIL;
                rem /= STENCIL;
                idx[a] = stencils[a].0 + o;
                w *= stencils[a].1[o];
            }
            acc += self.field.values[spec.flat_index(&idx[..n])] * w;
        }
        acc
    }
}
