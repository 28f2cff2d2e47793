//! Periodic spectral grids on `[-L, L)^n` and the discrete Fourier transform
//! with the kernel `e^{+i xi x}`.
//!
//! Nodes are `x_j = -L + j dx` with `dx = 2L/N`; frequencies are
//! `xi_k = pi k / L` for `k` in `[-N/2, N/2)`, stored in FFT order.
//! Arrays are row-major with axis 0 slowest.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;
const RZF_MAGIC: &[u8; 16] = b"RZFLD001\0\0\0\0\0\0\0\0";

/// Shape of a cubic grid. Equality tolerates roundoff in the half width,
/// so that the dual of the dual grid compares equal to the original.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    points: usize,
    half_width: f64,
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.points == other.points
            && (self.half_width - other.half_width).abs() <= 1e-12 * self.half_width
    }
}

impl GridSpec {
    pub fn new(dim: usize, points: usize, half_width: f64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if points < 64 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {points} must be a power of two >= 64"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half width {half_width} must be positive")));
        }
        Ok(GridSpec { dim, points, half_width })
    }

    /// Desk-scale default for the given dimension.
    pub fn default_for(dim: usize) -> Result<Self> {
        match dim {
            1 => GridSpec::new(1, 4096, 40.0),
            2 => GridSpec::new(2, 512, 20.0),
            3 => GridSpec::new(3, 128, 10.0),
            _ => Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Total number of cells, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn freq_spacing(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Volume element `dx^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Volume element of the frequency lattice, `(pi/L)^n`.
    pub fn freq_cell_volume(&self) -> f64 {
        self.freq_spacing().powi(self.dim as i32)
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    /// Signed mode number of FFT-order index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.points as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn freq(&self, i: usize) -> f64 {
        self.mode(i) as f64 * self.freq_spacing()
    }

    /// FFT-order index of a signed mode number.
    pub fn index_of_mode(&self, k: i64) -> usize {
        k.rem_euclid(self.points as i64) as usize
    }

    /// The grid on which the spectrum lives when viewed as a field.
    pub fn dual(&self) -> GridSpec {
        GridSpec {
            dim: self.dim,
            points: self.points,
            half_width: std::f64::consts::PI * self.points as f64 / (2.0 * self.half_width),
        }
    }

    pub fn multi_index(&self, flat: usize) -> [usize; MAX_DIM] {
        let mut out = [0usize; MAX_DIM];
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            out[a] = rem % self.points;
            rem /= self.points;
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx[..self.dim].iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn position(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = self.node(idx[a]);
        }
        x
    }

    pub fn wavevector(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(flat);
        let mut xi = [0.0; MAX_DIM];
        for a in 0..self.dim {
            xi[a] = self.freq(idx[a]);
        }
        xi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && x.iter().all(|&v| v >= -self.half_width && v < self.half_width)
    }
}

/// Samples of a complex function on the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub spec: GridSpec,
    pub values: Vec<C64>,
}

/// Fourier coefficients `F[f](xi_k)` in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub spec: GridSpec,
    pub coeffs: Vec<C64>,
}

impl Field {
    pub fn zeros(spec: GridSpec) -> Self {
        Field { spec, values: vec![C64::new(0.0, 0.0); spec.len()] }
    }

    pub fn from_values(spec: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        Ok(Field { spec, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64]) -> C64) -> Self {
        let n = spec.dim();
        let values = (0..spec.len())
            .map(|flat| {
                let x = spec.position(flat);
                f(&x[..n])
            })
            .collect();
        Field { spec, values }
    }

    pub fn from_real_fn(spec: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(spec, |x| C64::new(f(x), 0.0))
    }

    /// Quadrature `dx^n sum f`.
    pub fn integral(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.spec.cell_volume()
    }

    /// Discrete `L^2` norm.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.spec.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus on the outermost layer of nodes relative to the
    /// global maximum. Values above `1e-14` mean the periodic wrap is visible.
    pub fn boundary_mass(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let n = self.spec.points();
        let mut edge: f64 = 0.0;
        for (flat, v) in self.values.iter().enumerate() {
            let idx = self.spec.multi_index(flat);
            if idx[..self.spec.dim()].iter().any(|&i| i == 0 || i == n - 1) {
                edge = edge.max(v.norm());
            }
        }
        edge / max
    }

    pub fn scaled(&self, a: C64) -> Field {
        Field { spec: self.spec, values: self.values.iter().map(|v| v * a).collect() }
    }

    /// `self - other` on the same grid.
    pub fn sub(&self, other: &Field) -> Field {
        assert_eq!(self.spec, other.spec, "fields live on different grids");
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Field { spec: self.spec, values }
    }

    pub fn add(&self, other: &Field) -> Field {
        assert_eq!(self.spec, other.spec, "fields live on different grids");
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Field { spec: self.spec, values }
    }

    /// `f(-x)` on the same grid, using periodic wrap for the node `-L`.
    pub fn reflected(&self) -> Field {
        let n = self.spec.points();
        let mut values = vec![C64::new(0.0, 0.0); self.values.len()];
        for (flat, v) in values.iter_mut().enumerate() {
            let idx = self.spec.multi_index(flat);
            let mut src = [0usize; MAX_DIM];
            for a in 0..self.spec.dim() {
                src[a] = (n - idx[a]) % n;
            }
            *v = self.values[self.spec.flat_index(&src)];
        }
        Field { spec: self.spec, values }
    }

    /// Index of the node at the origin.
    pub fn origin_index(&self) -> usize {
        let half = [self.spec.points() / 2; MAX_DIM];
        self.spec.flat_index(&half)
    }

    pub fn write_rzf<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(RZF_MAGIC)?;
        w.write_all(&(self.spec.dim() as u32).to_le_bytes())?;
        w.write_all(&(self.spec.points() as u32).to_le_bytes())?;
        w.write_all(&self.spec.half_width().to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.values.len());
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_rzf<R: Read>(mut r: R) -> Result<Field> {
        let mut magic = [0u8; 16];
        r.read_exact(&mut magic).map_err(|_| Error::Format("truncated header".into()))?;
        if &magic != RZF_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4).map_err(|_| Error::Format("truncated header".into()))?;
        let dim = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4).map_err(|_| Error::Format("truncated header".into()))?;
        let points = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8).map_err(|_| Error::Format("truncated header".into()))?;
        let half_width = f64::from_le_bytes(b8);
        let spec = GridSpec::new(dim, points, half_width)?;
        let mut data = Vec::new();
        r.read_to_end(&mut data)?;
        if data.len() != 16 * spec.len() {
            return Err(Error::Format(format!(
                "expected {} bytes of samples, found {}",
                16 * spec.len(),
                data.len()
            )));
        }
        let values = data
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("chunk of 16"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("chunk of 16"));
                C64::new(re, im)
            })
            .collect();
        Ok(Field { spec, values })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_rzf(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Field> {
        let bytes = std::fs::read(path)?;
        Field::read_rzf(bytes.as_slice())
    }
}

impl SpectralField {
    pub fn zeros(spec: GridSpec) -> Self {
        SpectralField { spec, coeffs: vec![C64::new(0.0, 0.0); spec.len()] }
    }

    /// Builds coefficients from a function of the wavevector.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64]) -> C64) -> Self {
        let n = spec.dim();
        let coeffs = (0..spec.len())
            .map(|flat| {
                let xi = spec.wavevector(flat);
                f(&xi[..n])
            })
            .collect();
        SpectralField { spec, coeffs }
    }

    /// The spectrum as a field on the dual grid, with frequencies in
    /// ascending order so that node `j` carries `xi = -L* + j dxi`.
    pub fn to_dual_field(&self) -> Field {
        let dual = self.spec.dual();
        let n = self.spec.points();
        let mut values = vec![C64::new(0.0, 0.0); self.coeffs.len()];
        for (flat, v) in values.iter_mut().enumerate() {
            let idx = dual.multi_index(flat);
            let mut src = [0usize; MAX_DIM];
            for a in 0..dual.dim() {
                src[a] = (idx[a] + n / 2) % n;
            }
            *v = self.coeffs[self.spec.flat_index(&src)];
        }
        Field { spec: dual, values }
    }

    /// Spectral value at the negated wavevector of FFT-order entry `flat`.
    pub fn at_negated(&self, flat: usize) -> C64 {
        let n = self.spec.points();
        let idx = self.spec.multi_index(flat);
        let mut src = [0usize; MAX_DIM];
        for a in 0..self.spec.dim() {
            src[a] = (n - idx[a]) % n;
        }
        self.coeffs[self.spec.flat_index(&src)]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn fft_axes(data: &mut [C64], spec: &GridSpec, direction: FftDirection) {
    let n = spec.points();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft(n, direction);
    let dim = spec.dim();
    let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut line = vec![C64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[start + i * stride] = *v;
                }
            }
        }
    }
}

fn apply_alternating_sign(data: &mut [C64], spec: &GridSpec) {
    for (flat, v) in data.iter_mut().enumerate() {
        let idx = spec.multi_index(flat);
        let parity: usize = idx[..spec.dim()].iter().sum();
        if parity % 2 == 1 {
            *v = -*v;
        }
    }
}

/// `F[f](xi_k) = dx^n sum_j e^{i xi_k x_j} f_j`.
pub fn fourier_forward(f: &Field) -> SpectralField {
    let spec = f.spec;
    let mut data = f.values.clone();
    fft_axes(&mut data, &spec, FftDirection::Inverse);
    apply_alternating_sign(&mut data, &spec);
    let w = spec.cell_volume();
    for v in &mut data {
        *v *= w;
    }
    SpectralField { spec, coeffs: data }
}

/// `f_j = (2L)^{-n} sum_k e^{-i xi_k x_j} c_k`, the exact inverse of
/// [`fourier_forward`].
pub fn fourier_inverse(c: &SpectralField) -> Field {
    let spec = c.spec;
    let mut data = c.coeffs.clone();
    apply_alternating_sign(&mut data, &spec);
    fft_axes(&mut data, &spec, FftDirection::Forward);
    let w = (2.0 * spec.half_width()).powi(-(spec.dim() as i32));
    for v in &mut data {
        *v *= w;
    }
    Field { spec, values: data }
}

/// Per-axis weight of mode `i` at coordinate `x`: `e^{-i xi x}`, with the
/// Nyquist mode replaced by `cos(xi x)`.
fn mode_weight(spec: &GridSpec, i: usize, x: f64) -> C64 {
    let xi = spec.freq(i);
    if i == spec.points() / 2 {
        C64::new((xi * x).cos(), 0.0)
    } else {
        C64::from_polar(1.0, -xi * x)
    }
}

/// Trigonometric interpolant of a field, reusable across many points.
#[derive(Debug, Clone)]
pub struct Interpolant {
    field: Field,
    spectrum: SpectralField,
    sparse: Option<Vec<(usize, C64)>>,
}

impl Interpolant {
    /// Exact interpolant using every mode.
    pub fn new(field: &Field) -> Self {
        Interpolant { field: field.clone(), spectrum: fourier_forward(field), sparse: None }
    }

    /// Interpolant keeping only modes with `|c| >= rel_threshold * max|c|`.
    /// Much cheaper for band-limited fields; node values are then reproduced
    /// only up to the discarded mass.
    pub fn band_limited(field: &Field, rel_threshold: f64) -> Self {
        let spectrum = fourier_forward(field);
        let cut = rel_threshold * spectrum.max_abs();
        let sparse = spectrum
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() >= cut && c.norm() > 0.0)
            .map(|(i, c)| (i, *c))
            .collect();
        Interpolant { field: field.clone(), spectrum, sparse: Some(sparse) }
    }

    pub fn spec(&self) -> GridSpec {
        self.field.spec
    }

    pub fn spectrum(&self) -> &SpectralField {
        &self.spectrum
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    fn node_hit(&self, x: &[f64]) -> Option<usize> {
        let spec = self.field.spec;
        let dx = spec.spacing();
        let mut idx = [0usize; MAX_DIM];
        for a in 0..spec.dim() {
            let s = (x[a] + spec.half_width()) / dx;
            let r = s.round();
            if (s - r).abs() > 1e-12 || r < 0.0 || r >= spec.points() as f64 {
                return None;
            }
            idx[a] = r as usize;
        }
        Some(spec.flat_index(&idx))
    }

    pub fn eval(&self, x: &[f64]) -> Result<C64> {
        let spec = self.field.spec;
        if !spec.contains(x) {
            return Err(Error::Domain(x.to_vec()));
        }
        if self.sparse.is_none() {
            if let Some(flat) = self.node_hit(x) {
                return Ok(self.field.values[flat]);
            }
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluates without the domain check; the interpolant is periodic.
    pub fn eval_unchecked(&self, x: &[f64]) -> C64 {
        let spec = self.field.spec;
        let n = spec.points();
        let norm = (2.0 * spec.half_width()).powi(-(spec.dim() as i32));
        if let Some(modes) = &self.sparse {
            let mut acc = C64::new(0.0, 0.0);
            for &(flat, c) in modes {
                let idx = spec.multi_index(flat);
                let mut w = c;
                for a in 0..spec.dim() {
                    w *= mode_weight(&spec, idx[a], x[a]);
                }
                acc += w;
            }
            return acc * norm;
        }
        let weights: Vec<Vec<C64>> = (0..spec.dim())
            .map(|a| (0..n).map(|i| mode_weight(&spec, i, x[a])).collect())
            .collect();
        let c = &self.spectrum.coeffs;
        let acc = match spec.dim() {
            1 => c.iter().zip(&weights[0]).map(|(c, w)| c * w).sum::<C64>(),
            2 => (0..n)
                .map(|i0| {
                    let row = &c[i0 * n..(i0 + 1) * n];
                    weights[0][i0] * row.iter().zip(&weights[1]).map(|(c, w)| c * w).sum::<C64>()
                })
                .sum(),
            _ => (0..n)
                .map(|i0| {
                    let inner: C64 = (0..n)
                        .map(|i1| {
                            let row = &c[(i0 * n + i1) * n..(i0 * n + i1 + 1) * n];
                            weights[1][i1]
                                * row.iter().zip(&weights[2]).map(|(c, w)| c * w).sum::<C64>()
                        })
                        .sum();
                    weights[0][i0] * inner
                })
                .sum(),
        };
        acc * norm
    }
}

/// Band-limited value of `f` at an arbitrary point of the domain.
pub fn trig_interpolate(f: &Field, x: &[f64]) -> Result<C64> {
    Interpolant::new(f).eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(4, 64, 1.0).is_err());
        assert!(GridSpec::new(1, 100, 1.0).is_err());
        assert!(GridSpec::new(1, 32, 1.0).is_err());
        assert!(GridSpec::new(1, 64, -1.0).is_err());
    }

    #[test]
    fn mode_numbering_is_fft_order() {
        let g = GridSpec::new(1, 64, 1.0).unwrap();
        assert_eq!(g.mode(0), 0);
        assert_eq!(g.mode(31), 31);
        assert_eq!(g.mode(32), -32);
        assert_eq!(g.mode(63), -1);
        assert_eq!(g.index_of_mode(-1), 63);
    }

    #[test]
    fn zero_spectrum_gives_zero_field() {
        let g = GridSpec::new(2, 64, 3.0).unwrap();
        let f = fourier_inverse(&SpectralField::zeros(g));
        assert!(f.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn reflection_is_involution() {
        let g = GridSpec::new(2, 64, 3.0).unwrap();
        let f = Field::from_real_fn(g, |x| (x[0] - 0.3 * x[1]).exp() * (-x[0] * x[0]).exp());
        assert_eq!(f.reflected().reflected(), f);
    }
}
