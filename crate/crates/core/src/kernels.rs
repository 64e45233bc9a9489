//! Double-integral energies (Riesz, logarithmic, anisotropic logarithmic),
//! fractional seminorms and Fourier-side moments.
//!
//! Grid energies are lag sums: with G(k) = Σ_i f_i f_{i+k} the energy of the
//! cellwise-constant function is Σ_k G(k) I(k), where I(k) integrates the
//! kernel against the tent T(z − kh) = Π_d (h − |z_d − k_d h|)_+. The lags
//! next to the origin carry the singularity and are integrated exactly.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bodies::{difference_curve, CorrelationData, SphereQuadrature, StarBody};
use crate::correlation::{power_integral, LagTable, Span};
use crate::error::{Error, Result};
use crate::grid::{lp_norm, Function, GridFunction, RadialProfile};
use crate::quad::GaussLegendre;
use crate::specfun::gamma_fn;

/// Largest grid size handled by lag sums; bigger grids use the polar route.
const LAG_SUM_MAX_M: [usize; 2] = [1 << 14, 512];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub value: f64,
    pub quadrature_error_estimate: f64,
    /// Part of `value` coming from the analytically integrated lags |k|∞ ≤ 1.
    pub diagonal_correction: f64,
    pub diverging: bool,
}

#[derive(Debug, Clone, Copy)]
pub enum Kernel<'a> {
    /// |z|^{α−n}
    Riesz(f64),
    /// −log‖z‖_K, Euclidean when no body is given.
    Log(Option<&'a StarBody>),
}

impl Kernel<'_> {
    fn check(&self, n: usize) -> Result<()> {
        match self {
            Kernel::Riesz(a) if !(*a > 0.0 && *a < n as f64) => Err(Error::Domain {
                function: "riesz_energy",
                value: *a,
                expected: "0 < alpha < n",
            }),
            Kernel::Log(Some(b)) if b.n() != n => Err(Error::InvalidInput(format!(
                "gauge body in R^{} for a function in R^{n}",
                b.n()
            ))),
            Kernel::Log(Some(b)) if !b.zero_nodes().is_empty() => Err(Error::NonPositiveRadius {
                node: b.zero_nodes()[0],
            }),
            _ => Ok(()),
        }
    }
}

/// ∬ f(x) f(y) |x−y|^{α−n} dx dy.
pub fn riesz_energy(f: &Function, alpha: f64) -> Result<EnergyValue> {
    energy(f, Kernel::Riesz(alpha))
}

/// −∬ f(x) log‖x−y‖_K f(y) dx dy, with the Euclidean norm when `body` is None.
pub fn log_energy(f: &Function, body: Option<&StarBody>) -> Result<EnergyValue> {
    energy(f, Kernel::Log(body))
}

pub fn energy(f: &Function, kernel: Kernel) -> Result<EnergyValue> {
    let n = f.n();
    kernel.check(n)?;
    match f {
        Function::Grid(g) if n <= 2 && g.m() <= LAG_SUM_MAX_M[n - 1] => {
            let (value, near) = lag_sum(g, kernel);
            let err = match g.coarsen() {
                Some(c) if c.m() >= 4 => (value - lag_sum(&c, kernel).0).abs(),
                _ => f64::INFINITY,
            };
            Ok(EnergyValue {
                value,
                quadrature_error_estimate: err,
                diagonal_correction: near,
                diverging: !value.is_finite(),
            })
        }
        _ => {
            let quad = match kernel {
                Kernel::Log(Some(b)) => b.quadrature().clone(),
                _ => Arc::new(SphereQuadrature::default_for(n)?),
            };
            polar_energy_from(&CorrelationData::new(f, quad)?, kernel)
        }
    }
}

/// Energy through polar coordinates, Σ_i w_i ∫₀^∞ t^{n−1} k(t u_i) g_{u_i}(t) dt.
pub fn polar_energy_from(data: &CorrelationData, kernel: Kernel) -> Result<EnergyValue> {
    let n = data.quadrature.n();
    kernel.check(n)?;
    let nodes = data.quadrature.nodes();
    let log_rho: Vec<f64> = match kernel {
        Kernel::Log(Some(b)) if b.quadrature().rule() == data.quadrature.rule() => {
            b.rho().iter().map(|r| r.ln()).collect()
        }
        Kernel::Log(Some(b)) => nodes.iter().map(|u| b.rho_at(u).ln()).collect(),
        _ => vec![0.0; nodes.len()],
    };
    let sum = |curves: &[crate::correlation::DirectionalCorrelation]| {
        let diverging = std::cell::Cell::new(false);
        let v = data.quadrature.integrate(|i| {
            let c = &curves[i];
            let (v, div) = match kernel {
                Kernel::Riesz(a) => {
                    let r = power_integral(&c.t, &c.g, a - 1.0, 0, Span::All);
                    (r.value, r.diverging)
                }
                Kernel::Log(_) => {
                    let a = n as f64 - 1.0;
                    let lg = power_integral(&c.t, &c.g, a, 1, Span::All);
                    if log_rho[i] == 0.0 {
                        (-lg.value, lg.diverging)
                    } else {
                        let mass = power_integral(&c.t, &c.g, a, 0, Span::All);
                        (
                            -lg.value + log_rho[i] * mass.value,
                            lg.diverging || mass.diverging,
                        )
                    }
                }
            };
            diverging.set(diverging.get() || div);
            v
        });
        (v, diverging.get())
    };
    let (value, diverging) = sum(&data.fine);
    let err = data
        .coarse
        .as_ref()
        .map_or(f64::INFINITY, |c| (value - sum(c).0).abs());
    Ok(EnergyValue {
        value,
        quadrature_error_estimate: err,
        diagonal_correction: 0.0,
        diverging: diverging || !value.is_finite(),
    })
}

/// ∬ |f(x) − f(y)|² / |x−y|^{n−2α} dx dy for α ∈ (−1, 0).
pub fn fractional_seminorm(f: &Function, alpha: f64) -> Result<EnergyValue> {
    let quad = Arc::new(SphereQuadrature::default_for(f.n())?);
    fractional_seminorm_from(&CorrelationData::new(f, quad)?, alpha)
}

pub fn fractional_seminorm_from(data: &CorrelationData, alpha: f64) -> Result<EnergyValue> {
    if !(alpha > -1.0 && alpha < 0.0) {
        return Err(Error::Domain {
            function: "fractional_seminorm",
            value: alpha,
            expected: "-1 < alpha < 0",
        });
    }
    let a = 2.0 * alpha - 1.0;
    let cellwise = data.cellwise();
    let sum = |curves: &[crate::correlation::DirectionalCorrelation]| {
        let diverging = std::cell::Cell::new(false);
        let v = data.quadrature.integrate(|i| {
            let d = difference_curve(&curves[i], a, cellwise);
            let r = power_integral(&curves[i].t, &d, a, 0, Span::All);
            diverging.set(diverging.get() || r.diverging);
            r.value
        });
        (v, diverging.get())
    };
    let (value, diverging) = sum(&data.fine);
    let err = data
        .coarse
        .as_ref()
        .map_or(f64::INFINITY, |c| (value - sum(c).0).abs());
    Ok(EnergyValue {
        value,
        quadrature_error_estimate: err,
        diagonal_correction: 0.0,
        diverging: diverging || !value.is_finite(),
    })
}

/// Constant C with α ∬ f f |x−y|^{α−n} = C ∫ |f̂|² |ξ|^{−α}.
pub fn riesz_fourier_constant(n: usize, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    Ok(
        2.0 * PI.powf(nf / 2.0 - alpha) * gamma_fn(alpha / 2.0 + 1.0)?
            / gamma_fn((nf - alpha) / 2.0)?,
    )
}

/// Constant C with ∬ |f(x)−f(y)|² |x−y|^{2α−n} = C ∫ |ξ|^{−2α} |f̂|², α ∈ (−1, 0).
pub fn seminorm_fourier_constant(n: usize, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    Ok(
        2.0 * PI.powf(nf / 2.0 - 2.0 * alpha) * gamma_fn(alpha)?.abs()
            / gamma_fn(nf / 2.0 - alpha)?,
    )
}

// ---------------------------------------------------------------------------
// Lag sums

/// Radial part of the kernel at unit spacing.
#[derive(Clone, Copy)]
enum Radial {
    /// r^{−β}
    Power(f64),
    /// −log r
    NegLog,
}

impl Radial {
    fn eval(self, r: f64) -> f64 {
        match self {
            Radial::Power(b) => r.powf(-b),
            Radial::NegLog => -r.ln(),
        }
    }

    /// Antiderivative of r^p κ(r), vanishing at 0 (p ≥ 1).
    fn moment(self, p: f64, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        match self {
            Radial::Power(b) => r.powf(p + 1.0 - b) / (p + 1.0 - b),
            Radial::NegLog => {
                let q = p + 1.0;
                -r.powf(q) * (r.ln() / q - 1.0 / (q * q))
            }
        }
    }
}

/// Returns (energy, contribution of the lags with |k|∞ ≤ 1).
fn lag_sum(f: &GridFunction, kernel: Kernel) -> (f64, f64) {
    let n = f.n();
    let h = f.spacing();
    let lags = LagTable::new(f);
    let cell2 = f.cell_volume().powi(2);
    // I(k) = scale · (J(k) + shift) with J the unit-spacing tent integral.
    let (radial, scale, shift) = match kernel {
        Kernel::Riesz(a) => (
            Radial::Power(n as f64 - a),
            cell2 * h.powf(a - n as f64),
            0.0,
        ),
        Kernel::Log(_) => (Radial::NegLog, cell2, -h.ln()),
    };
    let body = match kernel {
        Kernel::Log(b) => b,
        Kernel::Riesz(_) => None,
    };
    let entries: Vec<([i64; 3], f64)> = lags.nonzero().collect();
    let unit: Vec<f64> = match (n, body) {
        (1, _) => entries
            .iter()
            .map(|(k, _)| unit_lag_1d(k[0], radial, body))
            .collect(),
        (2, None) => {
            let m = f.m();
            let mut table = vec![f64::NAN; m * m];
            let mut needed = vec![false; m * m];
            for (k, _) in &entries {
                let (a, b) = sorted_abs(k);
                needed[a * m + b] = true;
            }
            let idx: Vec<usize> = (0..m * m).filter(|&i| needed[i]).collect();
            let vals: Vec<f64> = idx
                .par_iter()
                .map(|&i| unit_lag_2d([(i / m) as f64, (i % m) as f64], radial, None))
                .collect();
            for (i, v) in idx.into_iter().zip(vals) {
                table[i] = v;
            }
            entries
                .iter()
                .map(|(k, _)| {
                    let (a, b) = sorted_abs(k);
                    table[a * m + b]
                })
                .collect()
        }
        _ => entries
            .par_iter()
            .map(|(k, _)| unit_lag_2d([k[0] as f64, k[1] as f64], radial, body))
            .collect(),
    };
    let mut total = 0.0;
    let mut near = 0.0;
    for ((k, g), j) in entries.iter().zip(unit) {
        let c = g * scale * (j + shift);
        total += c;
        if k[..n].iter().all(|v| v.abs() <= 1) {
            near += c;
        }
    }
    (total, near)
}

fn sorted_abs(k: &[i64; 3]) -> (usize, usize) {
    let (a, b) = (k[0].unsigned_abs() as usize, k[1].unsigned_abs() as usize);
    (a.min(b), a.max(b))
}

/// ∫ (1 − |w − k|)_+ K(w) dw in one dimension via second antiderivatives.
fn unit_lag_1d(k: i64, radial: Radial, body: Option<&StarBody>) -> f64 {
    let big_f = |w: f64| -> f64 {
        let z = w.abs();
        if z == 0.0 {
            return 0.0;
        }
        match radial {
            Radial::Power(b) => z.powf(2.0 - b) / ((1.0 - b) * (2.0 - b)),
            Radial::NegLog => -(z * z / 2.0 * z.ln() - 0.75 * z * z),
        }
    };
    let k = k as f64;
    let mut j = big_f(k + 1.0) - 2.0 * big_f(k) + big_f(k - 1.0);
    if let Some(b) = body {
        let (plus, minus) = (b.rho_at(&[1.0]).ln(), b.rho_at(&[-1.0]).ln());
        j += if k > 0.0 {
            plus
        } else if k < 0.0 {
            minus
        } else {
            0.5 * (plus + minus)
        };
    }
    j
}

/// ∫ T₁(w − k) K(w) dw in two dimensions, T₁ the unit tent.
fn unit_lag_2d(k: [f64; 2], radial: Radial, body: Option<&StarBody>) -> f64 {
    let angular = |x: f64, y: f64| body.map_or(0.0, |b| b.rho_at(&[x, y]).ln());
    if k[0].abs() <= 1.0 && k[1].abs() <= 1.0 {
        return near_lag_2d(k, radial, body);
    }
    let order = if k[0].abs().max(k[1].abs()) <= 8.0 {
        5
    } else {
        3
    };
    let gl = GaussLegendre::new(order);
    let pts: Vec<(f64, f64)> = gl.mapped(0.0, 1.0).collect();
    let mut acc = 0.0;
    for s0 in [-1.0, 1.0] {
        for s1 in [-1.0, 1.0] {
            for &(a, wa) in &pts {
                for &(b, wb) in &pts {
                    let (x, y) = (k[0] + s0 * a, k[1] + s1 * b);
                    let r = x.hypot(y);
                    acc += wa * wb * (1.0 - a) * (1.0 - b) * (radial.eval(r) + angular(x, y));
                }
            }
        }
    }
    acc
}

/// Exact radial integration along rays from the origin; the angular integral
/// is split wherever the ray crosses a corner of the tent or a node of the
/// gauge body, then done by Gauss–Legendre.
fn near_lag_2d(k: [f64; 2], radial: Radial, body: Option<&StarBody>) -> f64 {
    let two_pi = 2.0 * PI;
    let mut cuts = vec![0.0, PI / 2.0, PI, 1.5 * PI, two_pi];
    for i in -1..=1 {
        for j in -1..=1 {
            let (x, y) = (k[0] + i as f64, k[1] + j as f64);
            if x != 0.0 || y != 0.0 {
                cuts.push(y.atan2(x).rem_euclid(two_pi));
            }
        }
    }
    if let Some(b) = body {
        cuts.extend(
            b.quadrature()
                .nodes()
                .iter()
                .map(|u| u[1].atan2(u[0]).rem_euclid(two_pi)),
        );
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let gl = GaussLegendre::new(8);
    cuts.windows(2)
        .map(|w| {
            gl.integrate(w[0], w[1], |th| {
                let lam = body.map_or(0.0, |b| b.rho_at(&[th.cos(), th.sin()]).ln());
                ray_integral(k, th, radial, lam)
            })
        })
        .sum()
}

/// ∫₀^∞ T₁(r e_θ − k) (κ(r) + λ) r dr with T₁ piecewise quadratic in r.
fn ray_integral(k: [f64; 2], th: f64, radial: Radial, lam: f64) -> f64 {
    let dir = [th.cos(), th.sin()];
    let mut br = vec![0.0];
    for d in 0..2 {
        if dir[d].abs() > 1e-300 {
            for j in -1..=1 {
                let r = (k[d] + j as f64) / dir[d];
                if r > 0.0 {
                    br.push(r);
                }
            }
        }
    }
    br.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut acc = 0.0;
    for w in br.windows(2) {
        let (ra, rb) = (w[0], w[1]);
        if rb <= ra {
            continue;
        }
        let rm = 0.5 * (ra + rb);
        // each factor 1 − |r dir_d − k_d| is linear on the piece: c0 + c1 r
        let mut lin = [[0.0; 2]; 2];
        let mut inside = true;
        for d in 0..2 {
            let v = rm * dir[d] - k[d];
            if v.abs() >= 1.0 {
                inside = false;
                break;
            }
            lin[d] = if v >= 0.0 {
                [1.0 + k[d], -dir[d]]
            } else {
                [1.0 - k[d], dir[d]]
            };
        }
        if !inside {
            continue;
        }
        let q = [
            lin[0][0] * lin[1][0],
            lin[0][0] * lin[1][1] + lin[0][1] * lin[1][0],
            lin[0][1] * lin[1][1],
        ];
        for (j, qj) in q.iter().enumerate() {
            let p = 1.0 + j as f64;
            let mut piece = radial.moment(p, rb) - radial.moment(p, ra);
            if lam != 0.0 {
                piece += lam * (rb.powf(p + 1.0) - ra.powf(p + 1.0)) / (p + 1.0);
            }
            acc += qj * piece;
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Fourier side

/// f̂(ξ) = ∫ e^{−2πiξ·x} f(x) dx by the midpoint rule on the cells.
pub fn fourier_transform(f: &GridFunction, xi: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    let n = f.n();
    if n > 2 {
        return Err(Error::InvalidInput(
            "direct Fourier quadrature supports n <= 2".into(),
        ));
    }
    if let Some(bad) = xi.iter().find(|v| v.len() != n) {
        return Err(Error::InvalidInput(format!(
            "frequency of dimension {} for a function in R^{n}",
            bad.len()
        )));
    }
    let m = f.m();
    let h = f.spacing();
    let axis: Vec<f64> = (0..m)
        .map(|i| -f.half_width() + (i as f64 + 0.5) * h)
        .collect();
    let vals = f.values();
    let vol = f.cell_volume();
    Ok(xi
        .par_iter()
        .map(|x| {
            let phase = |w: f64| -> Vec<Complex64> {
                axis.iter()
                    .map(|&a| Complex64::from_polar(1.0, -2.0 * PI * w * a))
                    .collect()
            };
            let e0 = phase(x[0]);
            let sum = if n == 1 {
                vals.iter().zip(&e0).map(|(v, e)| e * v).sum::<Complex64>()
            } else {
                let e1 = phase(x[1]);
                (0..m)
                    .map(|i| {
                        let row = &vals[i * m..(i + 1) * m];
                        e0[i] * row.iter().zip(&e1).map(|(v, e)| e * v).sum::<Complex64>()
                    })
                    .sum()
            };
            sum * vol
        })
        .collect())
}

/// ∫ e^{−2πiξx} f(|x|) dx for a 1-D profile, exact on the piecewise-linear
/// interpolant (truncated at the last knot).
pub fn profile_fourier_transform(p: &RadialProfile, xi: f64) -> f64 {
    let r = p.radii();
    let v = p.values();
    let k = 2.0 * PI * xi.abs();
    if k == 0.0 {
        return 2.0
            * r.windows(2)
                .zip(v.windows(2))
                .map(|(rw, vw)| 0.5 * (vw[0] + vw[1]) * (rw[1] - rw[0]))
                .sum::<f64>();
    }
    let last = r.len() - 1;
    let mut acc = v[last] * (k * r[last]).sin() / k;
    for i in 0..last {
        let dr = r[i + 1] - r[i];
        if dr <= 0.0 {
            continue;
        }
        let slope = (v[i + 1] - v[i]) / dr;
        // cos(k r1) − cos(k r0)
        let dc = -2.0 * (0.5 * k * (r[i + 1] + r[i])).sin() * (0.5 * k * dr).sin();
        acc += slope * dc / (k * k);
    }
    2.0 * acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// |ξ|^s
    Power(f64),
    /// log|ξ|
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierMoment {
    pub value: f64,
    /// 1 − ‖f̂‖²/‖f‖² over the frequency window used.
    pub plancherel_deficit: f64,
    /// Deficit at most 1%.
    pub window_ok: bool,
    pub diverging: bool,
}

/// |f̂|² sampled for moment integrals.
pub struct Spectrum {
    kind: SpectrumKind,
    l2sq: f64,
    deficit: f64,
}

enum SpectrumKind {
    /// Even spectrum in one dimension on nodes 0 = ξ_0 < ξ_1 < …
    Line { xi: Vec<f64>, power: Vec<f64> },
    /// Full period of the midpoint-rule transform on a square lattice.
    Plane {
        dxi: f64,
        side: usize,
        power: Vec<f64>,
    },
}

const PLANCHEREL_TARGET: f64 = 1e-3;

/// ∫_{ξ_max}^∞ C ξ^{a−p} (log ξ)^L dξ for the power law C ξ^{−p} fitted by least
/// squares to log power over the last decade of samples. None if the fit does not decay fast enough.
fn envelope_tail(xi: &[f64], power: &[f64], a: f64, log_power: u32) -> Option<f64> {
    let edge = *xi.last().unwrap();
    let pts: Vec<(f64, f64)> = xi
        .iter()
        .zip(power)
        .filter(|(x, p)| **x >= 0.1 * edge && **p > 0.0)
        .map(|(x, p)| (x.ln(), p.ln()))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / k, sy / k);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    let slope = sxy / sxx;
    let c = (my - slope * mx).exp();
    let e = -slope - a - 1.0;
    if !(e > 0.0) {
        return None;
    }
    let base = c * edge.powf(slope + a + 1.0);
    Some(if log_power == 0 {
        base / e
    } else {
        base * (edge.ln() / e + 1.0 / (e * e))
    })
}

impl Spectrum {
    pub fn new(f: &Function) -> Result<Spectrum> {
        match (f, f.n()) {
            (Function::Grid(g), 1) => Ok(Self::line_grid(g)),
            (Function::Grid(g), 2) => Ok(Self::plane(g)),
            (Function::Radial(p), 1) => Ok(Self::line_profile(p)),
            _ => Err(Error::InvalidInput(format!(
                "Fourier moments support grids with n <= 2 and profiles with n = 1 (got n = {})",
                f.n()
            ))),
        }
    }

    fn line_grid(g: &GridFunction) -> Spectrum {
        let r = g.half_width();
        let nyq = 0.5 / g.spacing();
        let xi = graded_frequencies(1e-3 / r, 24, 1.0 / (8.0 * r), nyq);
        let pts: Vec<Vec<f64>> = xi.iter().map(|&x| vec![x]).collect();
        let power: Vec<f64> = fourier_transform(g, &pts)
            .unwrap()
            .iter()
            .map(|z| z.norm_sqr())
            .collect();
        let l2sq = lp_norm(&Function::Grid(g.clone()), 2.0).powi(2);
        Self::windowed_line(xi, power, l2sq, 0.25 / r)
    }

    fn line_profile(p: &RadialProfile) -> Spectrum {
        let r = p.radii();
        let dmin = r
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let mut xi = vec![0.0];
        let ratio = 10f64.powf(1.0 / 48.0);
        let mut x = 1e-2 / p.r_max();
        let cap = 8.0 / dmin;
        while x < cap {
            xi.push(x);
            x *= ratio;
        }
        let power: Vec<f64> = xi
            .par_iter()
            .map(|&x| profile_fourier_transform(p, x).powi(2))
            .collect();
        let l2sq = lp_norm(
            &Function::Radial(p.clone().with_tail(crate::grid::Tail::Zero)),
            2.0,
        )
        .powi(2);
        Self::windowed_line(xi, power, l2sq, 1.0 / p.r_max())
    }

    /// Doubles the window from `start` until Plancherel holds to the target.
    fn windowed_line(xi: Vec<f64>, power: Vec<f64>, l2sq: f64, start: f64) -> Spectrum {
        let last = xi.len() - 1;
        let mass = |idx: usize| {
            2.0 * power_integral(&xi[..=idx], &power[..=idx], 0.0, 0, Span::Below(xi[idx])).value
        };
        let mut w = start;
        let mut idx;
        loop {
            idx = xi.partition_point(|&x| x < w).clamp(2, last);
            if idx == last || 1.0 - mass(idx) / l2sq <= PLANCHEREL_TARGET {
                break;
            }
            w *= 2.0;
        }
        let deficit = 1.0 - mass(idx) / l2sq;
        Spectrum {
            kind: SpectrumKind::Line {
                xi: xi[..=idx].to_vec(),
                power: power[..=idx].to_vec(),
            },
            l2sq,
            deficit,
        }
    }

    fn plane(g: &GridFunction) -> Spectrum {
        let m = g.m();
        let h = g.spacing();
        let side = 4 * m;
        let dxi = 1.0 / (h * side as f64);
        let freqs: Vec<f64> = (0..side)
            .map(|a| (a as f64 - (side / 2) as f64) * dxi)
            .collect();
        let axis: Vec<f64> = (0..m)
            .map(|i| -g.half_width() + (i as f64 + 0.5) * h)
            .collect();
        let phase: Vec<Complex64> = freqs
            .iter()
            .flat_map(|&w| {
                axis.iter()
                    .map(move |&a| Complex64::from_polar(1.0, -2.0 * PI * w * a))
            })
            .collect();
        let vals = g.values();
        // B[i][b] = Σ_j f_ij e(ξ_b, y_j)
        let b_mat: Vec<Complex64> = (0..m)
            .into_par_iter()
            .flat_map_iter(|i| {
                let row = &vals[i * m..(i + 1) * m];
                let phase = &phase;
                (0..side).map(move |b| {
                    row.iter()
                        .zip(&phase[b * m..(b + 1) * m])
                        .map(|(v, e)| e * v)
                        .sum::<Complex64>()
                })
            })
            .collect();
        let vol = g.cell_volume();
        let power: Vec<f64> = (0..side)
            .into_par_iter()
            .flat_map_iter(|a| {
                let e = &phase[a * m..(a + 1) * m];
                let b_mat = &b_mat;
                (0..side).map(move |b| {
                    let s: Complex64 = (0..m).map(|i| e[i] * b_mat[i * side + b]).sum();
                    (s * vol).norm_sqr()
                })
            })
            .collect();
        let l2sq = lp_norm(&Function::Grid(g.clone()), 2.0).powi(2);
        let total: f64 = power.iter().sum::<f64>() * dxi * dxi;
        Spectrum {
            kind: SpectrumKind::Plane { dxi, side, power },
            l2sq,
            deficit: 1.0 - total / l2sq,
        }
    }

    pub fn plancherel_deficit(&self) -> f64 {
        self.deficit
    }

    pub fn l2sq(&self) -> f64 {
        self.l2sq
    }

    /// ∫ |f̂(ξ)|² w(ξ) dξ with the flag for an extrapolated tail that is too large.
    pub fn moment(&self, weight: Weight) -> (f64, bool) {
        match &self.kind {
            SpectrumKind::Line { xi, power } => {
                let (a, l) = match weight {
                    Weight::Power(s) => (s, 0),
                    Weight::Log => (0.0, 1),
                };
                let r = power_integral(xi, power, a, l, Span::All);
                if !r.diverging {
                    return (2.0 * r.value, false);
                }
                // the last two samples can straddle an oscillation; fit the envelope over the last decade instead
                let edge = *xi.last().unwrap();
                let below = power_integral(xi, power, a, l, Span::Below(edge)).value;
                match envelope_tail(xi, power, a, l) {
                    Some(tail) => (
                        2.0 * (below + tail),
                        tail.abs() > 0.01 * below.abs().max(1e-300),
                    ),
                    None => (f64::INFINITY, true),
                }
            }
            SpectrumKind::Plane { dxi, side, power } => {
                let c = (side / 2) as f64;
                let mut acc = 0.0;
                for a in 0..*side {
                    for b in 0..*side {
                        let (x, y) = ((a as f64 - c) * dxi, (b as f64 - c) * dxi);
                        let rr = x.hypot(y);
                        if rr == 0.0 {
                            continue;
                        }
                        let w = match weight {
                            Weight::Power(s) => rr.powf(s),
                            Weight::Log => rr.ln(),
                        };
                        acc += power[a * side + b] * w;
                    }
                }
                let p0 = power[(side / 2) * side + side / 2];
                let center = match weight {
                    Weight::Power(s) => dxi.powf(s) * unit_cell_moment(Weight::Power(s)),
                    Weight::Log => dxi.ln() + unit_cell_moment(Weight::Log),
                };
                ((acc + p0 * center) * dxi * dxi, false)
            }
        }
    }
}

/// 0, then geometric nodes from `x_min` until the step reaches `d_max`,
/// then uniform steps up to `x_max`.
fn graded_frequencies(x_min: f64, per_decade: usize, d_max: f64, x_max: f64) -> Vec<f64> {
    let ratio = 10f64.powf(1.0 / per_decade as f64);
    let mut xi = vec![0.0];
    let mut x = x_min.min(x_max / 4.0);
    while x < x_max {
        xi.push(x);
        x += (x * (ratio - 1.0)).min(d_max);
    }
    if x_max - xi.last().unwrap() < 0.25 * d_max.min(x_max) {
        xi.pop();
    }
    xi.push(x_max);
    xi
}

/// ∫ over the unit square centered at 0 of |η|^s or log|η|.
fn unit_cell_moment(weight: Weight) -> f64 {
    let gl = GaussLegendre::new(24);
    8.0 * gl.integrate(0.0, PI / 4.0, |th| {
        let big_r = 0.5 / th.cos();
        match weight {
            Weight::Power(s) => big_r.powf(s + 2.0) / (s + 2.0),
            Weight::Log => big_r * big_r * (big_r.ln() / 2.0 - 0.25),
        }
    })
}

fn fourier_moment(f: &Function, weight: Weight) -> Result<FourierMoment> {
    let s = Spectrum::new(f)?;
    let (value, diverging) = s.moment(weight);
    Ok(FourierMoment {
        value,
        plancherel_deficit: s.deficit,
        window_ok: s.deficit.abs() <= 0.01,
        diverging: diverging || !value.is_finite(),
    })
}

/// ∫ |f̂(ξ)|² log|ξ| dξ.
pub fn fourier_log_moment(f: &Function) -> Result<FourierMoment> {
    fourier_moment(f, Weight::Log)
}

/// ∫ |f̂(ξ)|² |ξ|^s dξ.
pub fn fourier_power_moment(f: &Function, s: f64) -> Result<FourierMoment> {
    if !(s > -(f.n() as f64)) {
        return Err(Error::Domain {
            function: "fourier_power_moment",
            value: s,
            expected: "s > -n",
        });
    }
    fourier_moment(f, Weight::Power(s))
}
