//! One-dimensional quadrature: adaptive Gauss-Kronrod and tanh-sinh.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64 as C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[i];
        if i % 2 == 1 {
            gauss += s * WG[i / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

struct Segment {
    a: f64,
    b: f64,
    value: C64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: C64,
    pub error: f64,
}

/// Globally adaptive Gauss-Kronrod (7/15) on `[a, b]` split at `breaks`.
pub fn gauss_kronrod<F: Fn(f64) -> C64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Quadrature {
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut heap = BinaryHeap::new();
    for w in pts.windows(2) {
        let (value, err) = gk15(&f, w[0], w[1]);
        heap.push(Segment { a: w[0], b: w[1], value, err });
    }
    let max_segments = 20_000;
    loop {
        let total: C64 = heap.iter().map(|s| s.value).sum();
        let err: f64 = heap.iter().map(|s| s.err).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) || heap.len() >= max_segments {
            return Quadrature { value: total, error: err };
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(Segment { err: 0.0, ..worst });
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
    }
}

/// Adaptive integral over `[a, inf)` via `x = a + s/(1-s)`.
pub fn gauss_kronrod_to_infinity<F: Fn(f64) -> C64>(
    f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Quadrature {
    let g = |s: f64| {
        let d = 1.0 - s;
        let v = f(a + s / d);
        if v == C64::new(0.0, 0.0) {
            v
        } else {
            v / (d * d)
        }
    };
    gauss_kronrod(g, 0.0, 1.0, &[0.5, 0.9, 0.99], abs_tol, rel_tol)
}

/// Tanh-sinh quadrature on `[a, b]`, tolerant of integrable endpoint
/// singularities. The integrand receives `(x, x - a, b - x)` with the
/// distances computed without cancellation.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> C64>(f: F, a: f64, b: f64, rel_tol: f64) -> C64 {
    let half = 0.5 * (b - a);
    let t_max = 6.5;
    let eval_at = |t: f64| -> C64 {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // distance to the nearer endpoint in units of `half`: 1 - tanh|u|
        let near = 2.0 * e / (1.0 + e);
        if near == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let cosh_u = u.cosh();
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        let (x, da, db) = if u < 0.0 {
            let da = half * near;
            (a + da, da, b - a - da)
        } else {
            let db = half * near;
            (b - db, b - a - db, db)
        };
        f(x, da, db) * (w * half)
    };
    let mut h = 0.5;
    let mut sum = eval_at(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        let t = k as f64 * h;
        sum += eval_at(t) + eval_at(-t);
        k += 1;
    }
    let mut estimate = sum * h;
    for _ in 0..10 {
        h /= 2.0;
        let mut add = C64::new(0.0, 0.0);
        let mut k = 1;
        while k as f64 * h <= t_max {
            let t = k as f64 * h;
            add += eval_at(t) + eval_at(-t);
            k += 2;
        }
        sum += add;
        let next = sum * h;
        let diff = (next - estimate).norm();
        estimate = next;
        if diff <= rel_tol * estimate.norm() {
            break;
        }
    }
    estimate
}
