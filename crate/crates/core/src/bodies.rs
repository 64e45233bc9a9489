//! Star bodies built from functions: S_α f, Π₂^{*,−α} f, R_α f and R_0 f,
//! sampled on a spherical quadrature rule.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::correlation::{power_integral, Correlator, DirectionalCorrelation, Span, TGrid};
use crate::error::{Error, Result};
use crate::grid::Function;
use crate::quad::GaussLegendre;
use crate::specfun::sphere_area;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SphereRule {
    /// {+1, −1}
    Points,
    /// `count` equally spaced angles starting at 0.
    Circle { count: usize },
    /// Gauss–Legendre in cos θ times uniform in φ.
    Product { n_theta: usize, n_phi: usize },
}

/// Nodes u_i ∈ S^{n−1} with positive weights summing to nω_n.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    n: usize,
    rule: SphereRule,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn new(n: usize, rule: SphereRule) -> Result<Self> {
        let (nodes, weights) = match (n, rule) {
            (1, SphereRule::Points) => (vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0]),
            (2, SphereRule::Circle { count }) if count >= 3 => {
                let step = 2.0 * PI / count as f64;
                let nodes = (0..count)
                    .map(|i| {
                        let (s, c) = (i as f64 * step).sin_cos();
                        vec![c, s]
                    })
                    .collect();
                (nodes, vec![step; count])
            }
            (3, SphereRule::Product { n_theta, n_phi }) if n_theta >= 2 && n_phi >= 3 => {
                let gl = GaussLegendre::new(n_theta);
                let dphi = 2.0 * PI / n_phi as f64;
                let mut nodes = Vec::with_capacity(n_theta * n_phi);
                let mut weights = Vec::with_capacity(n_theta * n_phi);
                for (&z, &w) in gl.nodes.iter().zip(&gl.weights) {
                    let s = (1.0 - z * z).sqrt();
                    for j in 0..n_phi {
                        let (sp, cp) = (j as f64 * dphi).sin_cos();
                        nodes.push(vec![s * cp, s * sp, z]);
                        weights.push(w * dphi);
                    }
                }
                (nodes, weights)
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "sphere rule {rule:?} is not available in dimension {n}"
                )))
            }
        };
        Ok(SphereQuadrature {
            n,
            rule,
            nodes,
            weights,
        })
    }

    /// n=1: both points; n=2: 256 angles; n=3: 32×64 product rule.
    pub fn default_for(n: usize) -> Result<Self> {
        match n {
            1 => Self::new(1, SphereRule::Points),
            2 => Self::new(2, SphereRule::Circle { count: 256 }),
            3 => Self::new(
                3,
                SphereRule::Product {
                    n_theta: 32,
                    n_phi: 64,
                },
            ),
            _ => Err(Error::InvalidInput(format!(
                "no sphere rule for dimension {n}"
            ))),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn rule(&self) -> SphereRule {
        self.rule
    }
    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        self.weights.iter().enumerate().map(|(i, w)| w * f(i)).sum()
    }
}

/// Radial function of a star-shaped set at the nodes of a sphere rule.
///
/// Nodes where ρ = 0 (a t-integral that vanished) are kept and reported by
/// [`StarBody::zero_nodes`]; log-based functionals skip them.
#[derive(Debug, Clone, PartialEq)]
pub struct StarBody {
    quadrature: Arc<SphereQuadrature>,
    rho: Vec<f64>,
    /// Per-node error estimate of ρ (0 when unknown).
    pub rho_error: Vec<f64>,
    pub label: String,
    /// Set when a t-integral failed to converge at some node.
    pub diverging: bool,
}

impl StarBody {
    pub fn new(
        quadrature: Arc<SphereQuadrature>,
        rho: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if rho.len() != quadrature.len() {
            return Err(Error::InvalidInput(format!(
                "{} radii for {} quadrature nodes",
                rho.len(),
                quadrature.len()
            )));
        }
        if let Some(i) = rho.iter().position(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "radius {} at node {i} is invalid",
                rho[i]
            )));
        }
        let k = rho.len();
        Ok(StarBody {
            quadrature,
            rho,
            rho_error: vec![0.0; k],
            label: label.into(),
            diverging: false,
        })
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(
        quadrature: Arc<SphereQuadrature>,
        label: &str,
        radial: F,
    ) -> Result<Self> {
        let rho = quadrature.nodes().iter().map(|u| radial(u)).collect();
        StarBody::new(quadrature, rho, label)
    }

    pub fn ball(quadrature: Arc<SphereQuadrature>, radius: f64) -> Result<Self> {
        StarBody::from_fn(quadrature, "ball", |_| radius)
    }

    pub fn n(&self) -> usize {
        self.quadrature.n()
    }
    pub fn quadrature(&self) -> &Arc<SphereQuadrature> {
        &self.quadrature
    }
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn zero_nodes(&self) -> Vec<usize> {
        (0..self.rho.len())
            .filter(|&i| self.rho[i] == 0.0)
            .collect()
    }

    pub fn same_rule(&self, other: &StarBody) -> bool {
        Arc::ptr_eq(&self.quadrature, &other.quadrature) || *self.quadrature == *other.quadrature
    }

    pub fn scaled(&self, c: f64) -> StarBody {
        StarBody {
            rho: self.rho.iter().map(|r| r * c).collect(),
            rho_error: self.rho_error.iter().map(|e| e * c.abs()).collect(),
            ..self.clone()
        }
    }

    /// The dilate with volume `target`.
    pub fn with_volume(&self, target: f64) -> StarBody {
        let v = star_volume(self);
        self.scaled((target / v).powf(1.0 / self.n() as f64))
    }

    /// (max ρ − min ρ) / mean ρ.
    pub fn relative_spread(&self) -> f64 {
        let max = self.rho.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.rho.iter().cloned().fold(f64::MAX, f64::min);
        let mean = self.rho.iter().sum::<f64>() / self.rho.len() as f64;
        (max - min) / mean
    }

    /// Interpolated radial function in direction v (not necessarily unit).
    pub fn rho_at(&self, v: &[f64]) -> f64 {
        let q = &self.quadrature;
        match q.rule() {
            SphereRule::Points => {
                if v[0] >= 0.0 {
                    self.rho[0]
                } else {
                    self.rho[1]
                }
            }
            SphereRule::Circle { count } => {
                let mut ang = v[1].atan2(v[0]);
                if ang < 0.0 {
                    ang += 2.0 * PI;
                }
                let pos = ang / (2.0 * PI) * count as f64;
                let i = (pos.floor() as usize) % count;
                let frac = pos - pos.floor();
                let j = (i + 1) % count;
                (1.0 - frac) * self.rho[i] + frac * self.rho[j]
            }
            SphereRule::Product { .. } => {
                let norm = crate::linalg::norm(v);
                let mut best = [(f64::MIN, 0usize); 3];
                for (i, u) in q.nodes().iter().enumerate() {
                    let dot = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / norm;
                    if dot > best[2].0 {
                        best[2] = (dot, i);
                        best.sort_by(|a, b| b.0.total_cmp(&a.0));
                    }
                }
                let mut wsum = 0.0;
                let mut acc = 0.0;
                for (dot, i) in best {
                    let dist = dot.clamp(-1.0, 1.0).acos();
                    if dist < 1e-12 {
                        return self.rho[i];
                    }
                    wsum += 1.0 / dist;
                    acc += self.rho[i] / dist;
                }
                acc / wsum
            }
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.n();
        let cols: Vec<String> = (0..n).map(|d| format!("u{d}")).collect();
        writeln!(w, "{},weight,rho", cols.join(","))?;
        for (i, u) in self.quadrature.nodes().iter().enumerate() {
            let comps: Vec<String> = u.iter().map(|c| format!("{c:.12e}")).collect();
            writeln!(
                w,
                "{},{:.17e},{:.17e}",
                comps.join(","),
                self.quadrature.weights()[i],
                self.rho[i]
            )?;
        }
        Ok(())
    }
}

/// ‖z‖_K = |z|/ρ_K(z/|z|), with ‖0‖_K = 0.
pub fn gauge(body: &StarBody, z: &[f64]) -> f64 {
    let r = crate::linalg::norm(z);
    if r == 0.0 {
        return 0.0;
    }
    r / body.rho_at(z)
}

/// |K| = (1/n) Σ w_i ρ_i^n.
pub fn star_volume(body: &StarBody) -> f64 {
    let n = body.n();
    body.quadrature.integrate(|i| body.rho[i].powi(n as i32)) / n as f64
}

/// Propagated error of [`star_volume`] from the per-node radius errors.
pub fn star_volume_error(body: &StarBody) -> f64 {
    let n = body.n();
    body.quadrature
        .integrate(|i| body.rho[i].powi(n as i32 - 1) * body.rho_error[i])
}

/// Correlation curves of a function along every node of a sphere rule, with
/// a second set from the coarsened function for error estimates.
pub struct CorrelationData {
    pub quadrature: Arc<SphereQuadrature>,
    pub l2sq: f64,
    pub fine: Vec<DirectionalCorrelation>,
    pub coarse: Option<Vec<DirectionalCorrelation>>,
    cellwise: bool,
}

impl CorrelationData {
    pub fn new(f: &Function, quadrature: Arc<SphereQuadrature>) -> Result<Self> {
        Self::build(f, quadrature, true)
    }

    pub fn without_estimate(f: &Function, quadrature: Arc<SphereQuadrature>) -> Result<Self> {
        Self::build(f, quadrature, false)
    }

    /// True for grid input, whose curves are exact for the cellwise-constant function.
    pub fn cellwise(&self) -> bool {
        self.cellwise
    }

    fn build(f: &Function, quadrature: Arc<SphereQuadrature>, coarse: bool) -> Result<Self> {
        if f.n() != quadrature.n() {
            return Err(Error::InvalidInput(format!(
                "function in R^{} with a sphere rule for R^{}",
                f.n(),
                quadrature.n()
            )));
        }
        let curves = |g: &Function| {
            let t = TGrid::for_function(g);
            Correlator::new(g).curves(quadrature.nodes(), &t)
        };
        let fine = curves(f);
        let l2sq = fine[0].l2sq;
        if !(l2sq > 0.0) {
            return Err(Error::InvalidInput("function vanishes identically".into()));
        }
        let coarse = if coarse {
            f.coarsen().map(|c| curves(&c))
        } else {
            None
        };
        Ok(CorrelationData {
            quadrature,
            l2sq,
            fine,
            coarse,
            cellwise: !f.is_radial(),
        })
    }

    /// Runs `per_node` on the fine and coarse curves and assembles a body.
    fn body<F>(&self, label: String, per_node: F) -> Result<StarBody>
    where
        F: Fn(&DirectionalCorrelation, f64, bool) -> (f64, bool),
    {
        let fine: Vec<(f64, bool)> = self
            .fine
            .iter()
            .map(|c| per_node(c, self.l2sq, self.cellwise))
            .collect();
        let diverging = fine.iter().any(|r| r.1 || !r.0.is_finite());
        let rho: Vec<f64> = fine
            .iter()
            .map(|r| if r.0.is_finite() { r.0.max(0.0) } else { 0.0 })
            .collect();
        let mut body = StarBody::new(self.quadrature.clone(), rho, label)?;
        body.diverging = diverging;
        if let Some(coarse) = &self.coarse {
            let cl2 = coarse[0].l2sq;
            for (i, c) in coarse.iter().enumerate() {
                let (v, _) = per_node(c, cl2, self.cellwise);
                body.rho_error[i] = if v.is_finite() {
                    (body.rho[i] - v).abs()
                } else {
                    f64::INFINITY
                };
            }
        }
        Ok(body)
    }
}

/// Difference curve used against the weight t^a. Cellwise (grid) data uses
/// 2(g(0) − g(t)), exact for the cellwise-constant function, whenever that
/// is integrable against t^a; otherwise the interpolated-shift curve.
pub(crate) fn difference_curve(c: &DirectionalCorrelation, a: f64, cellwise: bool) -> Vec<f64> {
    if cellwise && a > -1.95 {
        c.d_identity().into_iter().map(|v| v.max(0.0)).collect()
    } else {
        c.d.clone()
    }
}

fn check_alpha(alpha: f64, ok: bool, expected: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain {
            function: "body",
            value: alpha,
            expected,
        })
    }
}

/// ρ_{S_α f}(u)^α = ∫₀^∞ t^{α−1} g_u(t) dt.
pub fn s_alpha_body_from(data: &CorrelationData, alpha: f64) -> Result<StarBody> {
    check_alpha(alpha, alpha > 0.0, "alpha > 0")?;
    data.body(format!("S_{alpha}"), |c, _, _| {
        let r = power_integral(&c.t, &c.g, alpha - 1.0, 0, Span::All);
        (r.value.max(0.0).powf(1.0 / alpha), r.diverging)
    })
}

pub fn s_alpha_body(f: &Function, alpha: f64, quad: Arc<SphereQuadrature>) -> Result<StarBody> {
    s_alpha_body_from(&CorrelationData::new(f, quad)?, alpha)
}

/// ρ_{Π₂^{*,−α}f}(u)^{2α} = ∫₀^∞ t^{2α−1} d_u(t) dt for α ∈ (−1, 0).
pub fn polar_projection_body_from(data: &CorrelationData, alpha: f64) -> Result<StarBody> {
    check_alpha(alpha, alpha > -1.0 && alpha < 0.0, "-1 < alpha < 0")?;
    let a = 2.0 * alpha - 1.0;
    data.body(format!("Pi2_{alpha}"), |c, _, cellwise| {
        let d = difference_curve(c, a, cellwise);
        let r = power_integral(&c.t, &d, a, 0, Span::All);
        (r.value.powf(1.0 / (2.0 * alpha)), r.diverging)
    })
}

pub fn polar_projection_body(
    f: &Function,
    alpha: f64,
    quad: Arc<SphereQuadrature>,
) -> Result<StarBody> {
    polar_projection_body_from(&CorrelationData::new(f, quad)?, alpha)
}

/// ρ^α_{R_α f} per node (before taking the 1/α power), with the divergence flag.
fn radial_mean_power(
    c: &DirectionalCorrelation,
    l2sq: f64,
    cellwise: bool,
    alpha: f64,
) -> (f64, bool) {
    if alpha > 0.0 {
        let r = power_integral(&c.t, &c.g, alpha - 1.0, 0, Span::All);
        (alpha / l2sq * r.value, r.diverging)
    } else {
        let a = alpha - 1.0;
        let d = difference_curve(c, a, cellwise);
        let r = power_integral(&c.t, &d, a, 0, Span::All);
        (-alpha / (2.0 * l2sq) * r.value, r.diverging)
    }
}

/// R_α f for α > −1, α ≠ 0:
/// α > 0: ρ^α = (α/‖f‖₂²) ∫ t^{α−1} g_u; α < 0: ρ^α = (−α/(2‖f‖₂²)) ∫ t^{α−1} d_u.
pub fn radial_mean_body_from(data: &CorrelationData, alpha: f64) -> Result<StarBody> {
    check_alpha(
        alpha,
        alpha > -1.0 && alpha != 0.0,
        "alpha > -1, alpha != 0",
    )?;
    data.body(format!("R_{alpha}"), |c, l2sq, cellwise| {
        let (p, div) = radial_mean_power(c, l2sq, cellwise, alpha);
        (p.powf(1.0 / alpha), div)
    })
}

pub fn radial_mean_body(f: &Function, alpha: f64, quad: Arc<SphereQuadrature>) -> Result<StarBody> {
    radial_mean_body_from(&CorrelationData::new(f, quad)?, alpha)
}

/// log ρ_{R_0 f}(u) = ∫₀¹ (ĝ − 1)/t dt + ∫₁^∞ ĝ/t dt with ĝ = g_u/‖f‖₂².
pub fn log_r_zero(c: &DirectionalCorrelation, l2sq: f64, cellwise: bool) -> (f64, bool) {
    let d = difference_curve(c, -1.0, cellwise);
    let near = power_integral(&c.t, &d, -1.0, 0, Span::Below(1.0));
    let far = power_integral(&c.t, &c.g, -1.0, 0, Span::Above(1.0));
    (
        -near.value / (2.0 * l2sq) + far.value / l2sq,
        near.diverging || far.diverging,
    )
}

pub fn r_zero_body_from(data: &CorrelationData) -> Result<StarBody> {
    data.body("R_0".into(), |c, l2sq, cellwise| {
        let (lr, div) = log_r_zero(c, l2sq, cellwise);
        (lr.exp(), div)
    })
}

pub fn r_zero_body(f: &Function, quad: Arc<SphereQuadrature>) -> Result<StarBody> {
    r_zero_body_from(&CorrelationData::new(f, quad)?)
}

/// Sphere integral Σ w_i log ρ_i over nodes with ρ > 0, and the number of
/// skipped zero nodes.
pub fn log_radial_integral(body: &StarBody) -> (f64, usize) {
    let mut skipped = 0;
    let mut acc = 0.0;
    for (i, w) in body.quadrature.weights().iter().enumerate() {
        if body.rho[i] > 0.0 {
            acc += w * body.rho[i].ln();
        } else {
            skipped += 1;
        }
    }
    (acc, skipped)
}

/// Mean of log ρ over the sphere, (1/(nω_n)) ∫ log ρ du.
pub fn mean_log_radius(body: &StarBody) -> f64 {
    log_radial_integral(body).0 / sphere_area(body.n())
}
