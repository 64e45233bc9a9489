//! Directional autocorrelation g_u(t) = ∫ f(x)f(x+tu)dx and difference
//! correlation d_u(t) = ∫ |f(x+tu) − f(x)|² dx, plus the power-weighted
//! t-integrals every body construction is built from.

use std::io::Write;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Function, GridFunction, RadialProfile};
use crate::quad::{simpson_nonuniform, GaussLegendre};

/// Increasing evaluation points in t, starting at 0 and containing t = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TGrid {
    t: Vec<f64>,
}

impl TGrid {
    pub fn new(t: Vec<f64>) -> Result<TGrid> {
        if t.len() < 3 || t[0] != 0.0 {
            return Err(Error::InvalidInput(
                "t grid needs >= 3 points starting at 0".into(),
            ));
        }
        if !t.windows(2).all(|w| w[1] > w[0]) || !t.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(
                "t grid must be finite and strictly increasing".into(),
            ));
        }
        Ok(TGrid { t })
    }

    /// 0, then log-spaced nodes from `t_min` through 1 and onward to `t_max`
    /// with `per_decade` points per decade, never stepping more than `dt_max`.
    pub fn graded(t_min: f64, per_decade: usize, dt_max: f64, t_max: f64) -> TGrid {
        assert!(t_min > 0.0 && t_min < 1.0 && t_max > 1.0 && dt_max > 0.0);
        let ratio = 10f64.powf(1.0 / per_decade as f64);
        let mut t = vec![0.0];
        // below 1: log spacing chosen to land exactly on 1
        let k = ((1.0 / t_min).log10() * per_decade as f64).ceil() as usize;
        let lo_ratio = (1.0 / t_min).powf(1.0 / k as f64);
        let mut last = 0.0;
        for i in 0..k {
            let v = t_min * lo_ratio.powi(i as i32);
            if v - last > dt_max {
                let steps = ((v - last) / dt_max).ceil() as usize;
                for j in 1..steps {
                    t.push(last + (v - last) * j as f64 / steps as f64);
                }
            }
            t.push(v);
            last = v;
        }
        if 1.0 - last > dt_max {
            let steps = ((1.0 - last) / dt_max).ceil() as usize;
            for j in 1..steps {
                t.push(last + (1.0 - last) * j as f64 / steps as f64);
            }
        }
        t.push(1.0);
        let mut v = 1.0f64;
        while v < t_max {
            let step = (v * (ratio - 1.0)).min(dt_max);
            v = (v + step).min(t_max);
            if t_max - v < 0.25 * step {
                v = t_max;
            }
            t.push(v);
        }
        TGrid { t }
    }

    /// Default grid for a sampled function: resolution tied to the grid
    /// spacing or to the profile's knot density.
    pub fn for_function(f: &Function) -> TGrid {
        match f {
            Function::Grid(g) => {
                let h = g.spacing();
                let t_max = (2.0 * f.support_radius()).max(2.0);
                TGrid::graded((1e-2 * h).min(0.5), 24, h, t_max)
            }
            Function::Radial(p) => {
                let radii = p.radii();
                let k = radii.len();
                let last_ratio = (radii[k - 1] / radii[k - 2]).ln().max(1e-6);
                let first = radii[1];
                let per_decade = ((0.25 / last_ratio).round() as usize).clamp(16, 64);
                let t_max = (2.0 * p.r_max()).max(2.0);
                TGrid::graded((1e-2 * first).min(0.5), per_decade, f64::INFINITY, t_max)
            }
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.t.iter().position(|&v| v == value)
    }
}

/// Correlation curves of one function along one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalCorrelation {
    pub u: Vec<f64>,
    pub t: Vec<f64>,
    /// g_u(t), unnormalized.
    pub g: Vec<f64>,
    /// d_u(t) computed from the shifted differences directly.
    pub d: Vec<f64>,
    /// g_u(0) = ‖f‖₂².
    pub l2sq: f64,
    /// g vanishes beyond this t.
    pub support_bound: f64,
}

impl DirectionalCorrelation {
    /// d_u(t) through 2(g(0) − g(t)).
    pub fn d_identity(&self) -> Vec<f64> {
        self.g.iter().map(|v| 2.0 * (self.l2sq - v)).collect()
    }

    pub fn normalized(&self) -> Vec<f64> {
        self.g.iter().map(|v| v / self.l2sq).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,g,d")?;
        for i in 0..self.t.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e}",
                self.t[i], self.g[i], self.d[i]
            )?;
        }
        Ok(())
    }
}

/// G(k) = Σ_i f_i f_{i+k} over all integer lags with |k_j| < m.
#[derive(Debug, Clone)]
pub struct LagTable {
    n: usize,
    m: usize,
    h: f64,
    side: usize,
    data: Vec<f64>,
}

impl LagTable {
    pub fn new(f: &GridFunction) -> LagTable {
        let n = f.n();
        let m = f.m();
        let p = (2 * m).next_power_of_two();
        let total = p.pow(n as u32);
        let mut buf = vec![Complex::new(0.0, 0.0); total];
        let mut idx = vec![0usize; n];
        for (flat, v) in f.values().iter().enumerate() {
            f.unravel(flat, &mut idx);
            let mut c = 0;
            for d in 0..n {
                c = c * p + idx[d];
            }
            buf[c] = Complex::new(*v, 0.0);
        }
        let mut planner = FftPlanner::new();
        fft_nd(&mut buf, n, p, &mut planner, false);
        buf.iter_mut()
            .for_each(|z| *z = Complex::new(z.norm_sqr(), 0.0));
        fft_nd(&mut buf, n, p, &mut planner, true);
        let scale = 1.0 / total as f64;
        let side = 2 * m - 1;
        let mut data = vec![0.0; side.pow(n as u32)];
        let mut lag = vec![0i64; n];
        for (flat, slot) in data.iter_mut().enumerate() {
            let mut rem = flat;
            for d in (0..n).rev() {
                lag[d] = (rem % side) as i64 - (m as i64 - 1);
                rem /= side;
            }
            let mut c = 0usize;
            for d in 0..n {
                c = c * p + lag[d].rem_euclid(p as i64) as usize;
            }
            *slot = (buf[c].re * scale).max(0.0);
        }
        LagTable {
            n,
            m,
            h: f.spacing(),
            side,
            data,
        }
    }

    /// Same table by direct summation, O(m^{2n}).
    pub fn direct(f: &GridFunction) -> LagTable {
        let n = f.n();
        let m = f.m();
        let side = 2 * m - 1;
        let mut data = vec![0.0; side.pow(n as u32)];
        let vals = f.values();
        let mut a = vec![0usize; n];
        let mut b = vec![0usize; n];
        for i in 0..vals.len() {
            if vals[i] == 0.0 {
                continue;
            }
            f.unravel(i, &mut a);
            for j in 0..vals.len() {
                f.unravel(j, &mut b);
                let mut c = 0usize;
                for d in 0..n {
                    c = c * side + (b[d] + m - 1 - a[d]);
                }
                data[c] += vals[i] * vals[j];
            }
        }
        LagTable {
            n,
            m,
            h: f.spacing(),
            side,
            data,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn spacing(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn get(&self, k: &[i64]) -> f64 {
        let off = self.m as i64 - 1;
        let mut c = 0usize;
        for d in 0..self.n {
            let v = k[d] + off;
            if v < 0 || v >= self.side as i64 {
                return 0.0;
            }
            c = c * self.side + v as usize;
        }
        self.data[c]
    }

    /// Iterates over (lag, G(lag)) for all stored lags with G ≠ 0.
    pub fn nonzero(&self) -> impl Iterator<Item = ([i64; 3], f64)> + '_ {
        let off = self.m as i64 - 1;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(move |(flat, v)| {
                let mut lag = [0i64; 3];
                let mut rem = flat;
                for d in (0..self.n).rev() {
                    lag[d] = (rem % self.side) as i64 - off;
                    rem /= self.side;
                }
                (lag, *v)
            })
    }

    fn corners(&self, t: f64, u: &[f64]) -> ([i64; 3], [f64; 3]) {
        let mut base = [0i64; 3];
        let mut frac = [0.0; 3];
        for d in 0..self.n {
            let q = t * u[d] / self.h;
            let fl = q.floor();
            base[d] = fl as i64;
            frac[d] = q - fl;
        }
        (base, frac)
    }

    fn weights(&self, frac: &[f64; 3]) -> Vec<([i64; 3], f64)> {
        let n = self.n;
        (0..(1usize << n))
            .map(|corner| {
                let mut c = [0i64; 3];
                let mut w = 1.0;
                for d in 0..n {
                    let bit = ((corner >> (n - 1 - d)) & 1) as i64;
                    c[d] = bit;
                    w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
                }
                (c, w)
            })
            .filter(|(_, w)| *w != 0.0)
            .collect()
    }

    /// Overlap ∫ f(x) f_s(x) dx with the multilinearly interpolated shift
    /// f_s(x) = f(x + tu); equals the exact autocorrelation of the cellwise
    /// constant function.
    pub fn overlap(&self, t: f64, u: &[f64]) -> f64 {
        let (base, frac) = self.corners(t, u);
        let mut acc = 0.0;
        let mut k = [0i64; 3];
        for (c, w) in self.weights(&frac) {
            for d in 0..self.n {
                k[d] = base[d] + c[d];
            }
            acc += w * self.get(&k[..self.n]);
        }
        acc * self.h.powi(self.n as i32)
    }

    /// ‖f_s − f‖² for the interpolated shift, expanded over lag values.
    pub fn shifted_difference(&self, t: f64, u: &[f64]) -> f64 {
        let (base, frac) = self.corners(t, u);
        let ws = self.weights(&frac);
        let n = self.n;
        let mut k = [0i64; 3];
        let mut quad = 0.0;
        for (c1, w1) in &ws {
            for (c2, w2) in &ws {
                for d in 0..n {
                    k[d] = c2[d] - c1[d];
                }
                quad += w1 * w2 * self.get(&k[..n]);
            }
        }
        let mut cross = 0.0;
        for (c, w) in &ws {
            for d in 0..n {
                k[d] = base[d] + c[d];
            }
            cross += w * self.get(&k[..n]);
        }
        let g0 = self.get(&[0, 0, 0][..n]);
        (quad - 2.0 * cross + g0).max(0.0) * self.h.powi(n as i32)
    }
}

fn fft_nd(
    buf: &mut [Complex<f64>],
    n: usize,
    p: usize,
    planner: &mut FftPlanner<f64>,
    inverse: bool,
) {
    let fft = if inverse {
        planner.plan_fft_inverse(p)
    } else {
        planner.plan_fft_forward(p)
    };
    let total = buf.len();
    let mut line = vec![Complex::new(0.0, 0.0); p];
    for axis in 0..n {
        let stride = p.pow((n - 1 - axis) as u32);
        for start in 0..total {
            // first element of each line along `axis`
            if (start / stride) % p != 0 {
                continue;
            }
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = buf[start + j * stride];
            }
            fft.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                buf[start + j * stride] = *v;
            }
        }
    }
}

/// Options for the radial (half-space) correlation quadrature.
#[derive(Debug, Clone, Copy)]
pub struct RadialOptions {
    /// Gauss–Legendre order on each half of the polar angle range.
    pub theta_order: usize,
    /// Gauss–Legendre order per radial panel.
    pub panel_order: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions {
            theta_order: 16,
            panel_order: 4,
        }
    }
}

/// Density of the polar angle θ between a point of S^{n−1} and a fixed axis.
fn theta_density(n: usize, theta: f64) -> f64 {
    use std::f64::consts::PI;
    match n {
        2 => 2.0,
        3 => 2.0 * PI * theta.sin(),
        _ => crate::specfun::sphere_area(n - 1) * theta.sin().powi(n as i32 - 2),
    }
}

/// g(t) and direct d(t) of a radial profile.
///
/// The pair (x, x+tu) is symmetric, so only points with |x| < |x+tu| are
/// integrated and the result doubled. In polar coordinates this is the
/// region θ < θ_max(r) with cos θ_max = −min(1, t/(2r)).
pub fn radial_curves(p: &RadialProfile, t: &TGrid, opts: RadialOptions) -> (Vec<f64>, Vec<f64>) {
    use std::f64::consts::FRAC_PI_2;
    let n = p.n();
    let gl_theta = GaussLegendre::new(opts.theta_order);
    let gl = GaussLegendre::new(opts.panel_order);
    let radii = p.radii();
    let nm1 = (n - 1) as i32;
    let pair = |s: f64, fr: f64| -> (f64, f64) {
        let fs = p.eval_core(s);
        (fr * fs, (fs - fr) * (fs - fr))
    };
    let results: Vec<(f64, f64)> = t
        .points()
        .par_iter()
        .map(|&tv| {
            // contribution of radius r, integrated over the admissible angles
            let shell = |r: f64| -> (f64, f64) {
                let fr = p.eval_core(r);
                if n == 1 {
                    let (mut g, mut d) = pair(r + tv, fr);
                    if r < 0.5 * tv {
                        let (g2, d2) = pair(tv - r, fr);
                        g += g2;
                        d += d2;
                    }
                    return (g, d);
                }
                let mut g = 0.0;
                let mut d = 0.0;
                let cmin = if r > 0.0 {
                    (0.5 * tv / r).min(1.0)
                } else {
                    1.0
                };
                let theta_max = FRAC_PI_2 + cmin.asin();
                for (lo, hi) in [(0.0, FRAC_PI_2), (FRAC_PI_2, theta_max)] {
                    if hi <= lo {
                        continue;
                    }
                    for (th, w) in gl_theta.mapped(lo, hi) {
                        let s = (r * r + tv * tv + 2.0 * r * tv * th.cos()).max(0.0).sqrt();
                        let (a, b) = pair(s, fr);
                        let wt = w * theta_density(n, th);
                        g += wt * a;
                        d += wt * b;
                    }
                }
                (g, d)
            };
            let mut g = 0.0;
            let mut d = 0.0;
            let split = 0.5 * tv;
            for i in 0..radii.len() - 1 {
                let (a, b) = (radii[i], radii[i + 1]);
                let pieces: [(f64, f64); 2] = if split > a && split < b {
                    [(a, split), (split, b)]
                } else {
                    [(a, b), (b, b)]
                };
                for (lo, hi) in pieces {
                    if hi <= lo {
                        continue;
                    }
                    for (r, w) in gl.mapped(lo, hi) {
                        let (sg, sd) = shell(r);
                        let rw = w * r.powi(nm1);
                        g += rw * sg;
                        d += rw * sd;
                    }
                }
            }
            (2.0 * g, 2.0 * d)
        })
        .collect();
    let mut g: Vec<f64> = results.iter().map(|r| r.0).collect();
    let d = results.iter().map(|r| r.1).collect();
    // at t = 0 the half-space split degenerates; use the squared norm
    g[0] = crate::grid::lp_norm(&Function::Radial(p.clone()), 2.0).powi(2);
    (g, d)
}

/// Shared state for evaluating correlation curves of one function.
pub enum Correlator {
    Grid(LagTable),
    Radial {
        profile: RadialProfile,
        opts: RadialOptions,
    },
}

impl Correlator {
    pub fn new(f: &Function) -> Correlator {
        match f {
            Function::Grid(g) => Correlator::Grid(LagTable::new(g)),
            Function::Radial(p) => Correlator::Radial {
                profile: p.clone(),
                opts: RadialOptions::default(),
            },
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Correlator::Grid(l) => l.n(),
            Correlator::Radial { profile, .. } => profile.n(),
        }
    }

    /// Curves along each direction; radial inputs are computed once and
    /// shared across directions.
    pub fn curves(&self, directions: &[Vec<f64>], t: &TGrid) -> Vec<DirectionalCorrelation> {
        match self {
            Correlator::Grid(lags) => {
                let support = lags.h * lags.m as f64 * (lags.n as f64).sqrt();
                let g0 = lags.overlap(0.0, &[0.0; 3][..lags.n]);
                directions
                    .par_iter()
                    .map(|u| {
                        let g = t.points().iter().map(|&tv| lags.overlap(tv, u)).collect();
                        let d = t
                            .points()
                            .iter()
                            .map(|&tv| lags.shifted_difference(tv, u))
                            .collect();
                        DirectionalCorrelation {
                            u: u.clone(),
                            t: t.points().to_vec(),
                            g,
                            d,
                            l2sq: g0,
                            support_bound: support,
                        }
                    })
                    .collect()
            }
            Correlator::Radial { profile, opts } => {
                let (g, d) = radial_curves(profile, t, *opts);
                let l2sq = g[0];
                directions
                    .iter()
                    .map(|u| DirectionalCorrelation {
                        u: u.clone(),
                        t: t.points().to_vec(),
                        g: g.clone(),
                        d: d.clone(),
                        l2sq,
                        support_bound: 2.0 * profile.r_max(),
                    })
                    .collect()
            }
        }
    }
}

fn check_direction(u: &[f64], n: usize) -> Result<()> {
    let norm: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if u.len() != n || (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "direction must be a unit vector in R^{n} (got length {}, norm {norm})",
            u.len()
        )));
    }
    Ok(())
}

pub fn autocorrelation(f: &Function, u: &[f64], t: &TGrid) -> Result<DirectionalCorrelation> {
    check_direction(u, f.n())?;
    Ok(Correlator::new(f).curves(&[u.to_vec()], t).remove(0))
}

/// Direct and identity-based difference curves (in that order).
pub fn difference_correlation(f: &Function, u: &[f64], t: &TGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    let c = autocorrelation(f, u, t)?;
    let ident = c.d_identity();
    Ok((c.d, ident))
}

/// Which part of [0, ∞) to integrate over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Span {
    All,
    Below(f64),
    Above(f64),
}

/// Value of a singular t-integral with its extrapolated tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TIntegral {
    pub value: f64,
    pub tail: f64,
    pub diverging: bool,
}

/// ∫ t^a (log t)^L y(t) dt with L ∈ {0, 1}, for samples y on a grid with
/// t[0] = 0.
///
/// The first interval uses a closed form on the linear interpolant (or on a
/// fitted power law when y(0) = 0); the rest uses Simpson's rule in log t;
/// beyond the last node a fitted power-law tail is added.
pub fn power_integral(t: &[f64], y: &[f64], a: f64, log_power: u32, span: Span) -> TIntegral {
    assert_eq!(t.len(), y.len());
    assert!(t[0] == 0.0 && t.len() >= 3);
    assert!(log_power <= 1);
    let k = t.len();
    let (lo, hi, head, tail_on) = match span {
        Span::All => (1, k - 1, true, true),
        Span::Below(s) => (1, node_index(t, s), true, false),
        Span::Above(s) => (node_index(t, s), k - 1, false, true),
    };
    let mut diverging = false;
    let mut value = 0.0;
    if head {
        let (h, div) = head_integral(t, y, a, log_power);
        value += h;
        diverging |= div;
    }
    if hi > lo {
        let s: Vec<f64> = t[lo..=hi].iter().map(|v| v.ln()).collect();
        let fvals: Vec<f64> = (lo..=hi)
            .map(|i| {
                let lt = if log_power == 1 { t[i].ln() } else { 1.0 };
                t[i].powf(a + 1.0) * lt * y[i]
            })
            .collect();
        value += simpson_nonuniform(&s, &fvals);
    }
    let mut tail = 0.0;
    if tail_on && y[k - 1] != 0.0 {
        let (tv, div) = tail_integral(t, y, a, log_power);
        tail = tv;
        // a flat end means the curve has reached its constant asymptote and the tail is exact
        let flat = (y[k - 1] - y[k - 2]).abs() <= 1e-9 * y[k - 1].abs();
        diverging |= div || (!flat && tail.abs() > 0.01 * value.abs());
        value += tail;
    }
    TIntegral {
        value,
        tail,
        diverging: diverging || !value.is_finite(),
    }
}

fn node_index(t: &[f64], s: f64) -> usize {
    t.iter()
        .position(|&v| v == s)
        .unwrap_or_else(|| panic!("split point {s} is not a node of the t grid"))
}

fn head_integral(t: &[f64], y: &[f64], a: f64, log_power: u32) -> (f64, bool) {
    let t1 = t[1];
    let lt = t1.ln();
    // ∫_0^{t1} t^b (log t)^L dt
    let moment = |b: f64| -> f64 {
        if b <= -1.0 {
            return f64::INFINITY;
        }
        let e = t1.powf(b + 1.0);
        if log_power == 0 {
            e / (b + 1.0)
        } else {
            e * (lt / (b + 1.0) - 1.0 / ((b + 1.0) * (b + 1.0)))
        }
    };
    if y[0] != 0.0 {
        let slope = (y[1] - y[0]) / t1;
        let v = y[0] * moment(a) + slope * moment(a + 1.0);
        return (v, !v.is_finite());
    }
    if y[1] == 0.0 {
        return (0.0, false);
    }
    // y ≈ y1 (t/t1)^q near 0
    let q = if y[2] > 0.0 && y[1] > 0.0 {
        ((y[2] / y[1]).ln() / (t[2] / t1).ln()).clamp(0.0, 4.0)
    } else {
        1.0
    };
    let b = a + q;
    let v = y[1] * t1.powf(-q) * moment(b);
    (v, !v.is_finite())
}

fn tail_integral(t: &[f64], y: &[f64], a: f64, log_power: u32) -> (f64, bool) {
    let k = t.len();
    let (t0, t1) = (t[k - 2], t[k - 1]);
    let (y0, y1) = (y[k - 2], y[k - 1]);
    if !(y0 > 0.0 && y1 > 0.0) {
        return (0.0, false);
    }
    let p = -(y1 / y0).ln() / (t1 / t0).ln();
    let e = p - a - 1.0;
    if !(e > 0.0) {
        return (f64::INFINITY, true);
    }
    let base = y1 * t1.powf(a + 1.0);
    let v = if log_power == 0 {
        base / e
    } else {
        base * (t1.ln() / e + 1.0 / (e * e))
    };
    (v, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn graded_grid_contains_one_and_caps_steps() {
        let g = TGrid::graded(1e-4, 16, 0.05, 7.3);
        let t = g.points();
        assert_eq!(t[0], 0.0);
        assert!(g.index_of(1.0).is_some());
        assert_eq!(*t.last().unwrap(), 7.3);
        assert!(t
            .windows(2)
            .all(|w| w[1] > w[0] && w[1] - w[0] <= 0.05 + 1e-12));
    }

    #[test]
    fn fft_lag_table_matches_direct_sum() {
        let g = GridFunction::from_fn(2, 1.0, 6, |x| (x[0] + 2.0 * x[1]).abs() + 0.1).unwrap();
        let a = LagTable::new(&g);
        let b = LagTable::direct(&g);
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x - y).abs() < 1e-12 * b.data.iter().cloned().fold(0.0, f64::max));
        }
    }

    #[test]
    fn power_integral_head_and_tail() {
        // ∫_0^∞ t^{-1/2} e^{-t} dt = √π
        let tg = TGrid::graded(1e-5, 40, f64::INFINITY, 60.0);
        let t = tg.points();
        let y: Vec<f64> = t.iter().map(|v| (-v).exp()).collect();
        let r = power_integral(t, &y, -0.5, 0, Span::All);
        assert!((r.value - PI.sqrt()).abs() < 1e-6, "{}", r.value);
        // ∫_0^∞ t^{-2} (1 - e^{-t^2}) dt = √π with y(0) = 0 and a power tail
        let tg = TGrid::graded(1e-5, 40, f64::INFINITY, 1e4);
        let t = tg.points();
        let y: Vec<f64> = t.iter().map(|v| 1.0 - (-v * v).exp()).collect();
        let r = power_integral(t, &y, -2.0, 0, Span::All);
        assert!((r.value - PI.sqrt()).abs() < 1e-6, "{}", r.value);
        assert!(!r.diverging);
        // ∫_0^1 log t dt = -1
        let y = vec![1.0; t.len()];
        let r = power_integral(t, &y, 0.0, 1, Span::Below(1.0));
        assert!((r.value + 1.0).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn divergence_is_flagged() {
        let tg = TGrid::graded(1e-4, 20, f64::INFINITY, 100.0);
        let t = tg.points();
        let y: Vec<f64> = t.iter().map(|v| 1.0 / (1.0 + v)).collect();
        // t^{0.5}/(1+t) is not integrable at infinity
        assert!(power_integral(t, &y, 0.5, 0, Span::All).diverging);
        // 1/t is not integrable at 0
        assert!(power_integral(t, &y, -1.0, 0, Span::All).diverging);
    }

    #[test]
    fn indicator_autocorrelation_is_tent() {
        let f: Function = GridFunction::from_fn(1, 1.0, 256, |x| {
            if x[0] > 0.0 && x[0] < 1.0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap()
        .into();
        let tg = TGrid::graded(1e-3, 16, 0.01, 1.5);
        let c = autocorrelation(&f, &[1.0], &tg).unwrap();
        let h = 2.0 / 256.0;
        for (t, g) in c.t.iter().zip(&c.g) {
            assert!((g - (1.0 - t).max(0.0)).abs() < 2.0 * h);
        }
        let i = tg.index_of(1.0).unwrap();
        assert!(c.d[i] > 0.0);
    }

    #[test]
    fn radial_curve_of_gaussian() {
        // f = e^{-|x|^2} in R^2: g(t) = (π/2) e^{-t²/2}
        let p = RadialProfile::sample(2, 256, 1.0, 8.0, |r| (-r * r).exp()).unwrap();
        let tg = TGrid::graded(1e-3, 16, f64::INFINITY, 6.0);
        let (g, d) = radial_curves(&p, &tg, RadialOptions::default());
        for (i, &t) in tg.points().iter().enumerate() {
            let exact = PI / 2.0 * (-t * t / 2.0).exp();
            assert!(
                (g[i] - exact).abs() < 1e-4,
                "t={t} g={} exact={exact}",
                g[i]
            );
            assert!((d[i] - 2.0 * (PI / 2.0 - exact)).abs() < 1e-4);
        }
    }
}
