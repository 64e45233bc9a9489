//! One-dimensional quadrature building blocks.
//!
//! Gauss–Legendre rules (computed by Newton iteration on the Legendre
//! recurrence), an adaptive Gauss–Kronrod integrator used for reference
//! values, and a Simpson rule on non-uniform nodes.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..(order + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let (_, d) = legendre_with_derivative(order, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// 7-point Gauss / 15-point Kronrod abscissae and weights.
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

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod (7/15) integration on a finite interval.
///
/// Integrable endpoint singularities are fine since no node sits on an endpoint.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Estimate {
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    for _ in 0..4000 {
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        if total_err <= tol.max(1e-15 * total.abs()) {
            break;
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    Estimate {
        value: pieces.iter().map(|p| p.2).sum(),
        error: pieces.iter().map(|p| p.3).sum(),
    }
}

/// Adaptive integration over `[a, ∞)` through the map `t = a + s/(1-s)`.
pub fn adaptive_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: f64) -> Estimate {
    adaptive(
        |s| {
            let one_minus = 1.0 - s;
            let t = a + s / one_minus;
            f(t) / (one_minus * one_minus)
        },
        0.0,
        1.0,
        tol,
    )
}

/// Composite Simpson rule on arbitrary increasing nodes.
///
/// Nodes are consumed in consecutive pairs of intervals (exact for quadratics
/// on unequal spacing); a trailing single interval reuses the previous node.
pub fn simpson_nonuniform(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (x[1] - x[0]) * (y[0] + y[1]);
    }
    let mut sum = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let hs = h0 + h1;
        sum += hs / 6.0
            * (y[i] * (2.0 - h1 / h0)
                + y[i + 1] * hs * hs / (h0 * h1)
                + y[i + 2] * (2.0 - h0 / h1));
        i += 2;
    }
    if i + 1 < n {
        // odd interval count: integrate the quadratic through the last three
        // nodes over the final interval only
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        sum += -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1)) * y[i - 1]
            + h1 * (3.0 * h0 + h1) / (6.0 * h0) * y[i]
            + h1 * (3.0 * h0 + 2.0 * h1) / (6.0 * (h0 + h1)) * y[i + 1];
    }
    sum
}
