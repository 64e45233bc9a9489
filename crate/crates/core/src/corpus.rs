//! The fixed test corpus: named functions with the chains they apply to, the
//! parameter lists they run at and the equality cases they are expected to hit.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bodies::{SphereQuadrature, StarBody};
use crate::error::Result;
use crate::grid::{
    make_extremizer, ExtremizerSpec, Family, Function, GridFunction, RadialProfile, Shape,
};
use crate::harness::{ChainId, Expectation, Side};

/// Bumped whenever an entry changes, so stored reports can be told apart.
pub const CORPUS_VERSION: u32 = 1;

pub const EQUALITY_THRESHOLD: f64 = 2e-2;

/// Outer radius (in units of the profile scale) for the power-tailed
/// extremizers; the slowly decaying n = 1 tails need the larger one.
pub fn extremizer_r_max(n: usize) -> f64 {
    if n == 1 {
        1e10
    } else {
        1e4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Alpha(f64),
    /// f(x/c)
    Dilation(f64),
}

impl Param {
    pub fn alpha(self) -> Option<f64> {
        match self {
            Param::Alpha(a) => Some(a),
            Param::Dilation(_) => None,
        }
    }

    pub fn dilation(self) -> f64 {
        match self {
            Param::Alpha(_) => 1.0,
            Param::Dilation(c) => c,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Alpha(a) => write!(f, "a{a}"),
            Param::Dilation(c) => write!(f, "d{c}"),
        }
    }
}

type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Source {
    Grid { half_width: f64, f: PointFn },
    Radial { scale: f64, r_max: f64, f: RadialFn },
    Extremizer(Family),
}

#[derive(Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub n: usize,
    pub description: String,
    /// Radially symmetric (every function on the line counts): the polar
    /// averaging steps of the chains are then equalities.
    pub symmetric: bool,
    source: Source,
}

impl fmt::Debug for CorpusEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CorpusEntry")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

impl CorpusEntry {
    fn grid(
        name: &str,
        n: usize,
        description: &str,
        symmetric: bool,
        half_width: f64,
        f: PointFn,
    ) -> Self {
        CorpusEntry {
            name: name.into(),
            n,
            description: description.into(),
            symmetric: symmetric || n == 1,
            source: Source::Grid { half_width, f },
        }
    }

    fn extremizer(name: &str, n: usize, description: &str, family: Family) -> Self {
        CorpusEntry {
            name: name.into(),
            n,
            description: description.into(),
            symmetric: true,
            source: Source::Extremizer(family),
        }
    }

    pub fn is_extremizer(&self) -> bool {
        matches!(self.source, Source::Extremizer(_))
    }

    pub fn kind(&self) -> &'static str {
        match self.source {
            Source::Grid { .. } => "grid",
            Source::Radial { .. } => "radial",
            Source::Extremizer(_) => "extremizer",
        }
    }

    pub fn chains(&self) -> Vec<ChainId> {
        match self.source {
            Source::Extremizer(Family::Hls(_)) => vec![ChainId::AffineHls],
            Source::Extremizer(Family::LogHls) => vec![ChainId::AffineLogHls],
            Source::Extremizer(Family::LogSob) if self.n == 1 => {
                vec![ChainId::AffineLogSobolev, ChainId::Beckner]
            }
            Source::Extremizer(Family::LogSob) => vec![ChainId::AffineLogSobolev],
            // Fourier moments of profiles are only available on the line
            Source::Radial { .. } if self.n > 1 => ChainId::ALL
                .into_iter()
                .filter(|c| *c != ChainId::Beckner)
                .collect(),
            _ => ChainId::ALL.to_vec(),
        }
    }

    /// Which steps of the chain should be equalities for this function.
    pub fn expectation(&self, chain: ChainId) -> Option<Expectation> {
        let side = match (&self.source, chain) {
            (Source::Extremizer(_), ChainId::Beckner) => Side::Left,
            (Source::Extremizer(_), _) => Side::Both,
            (_, ChainId::Beckner) => return None,
            (_, ChainId::AffineLogHls) if self.symmetric => Side::Left,
            _ if self.symmetric => Side::Right,
            _ => return None,
        };
        Some(Expectation {
            side,
            threshold: EQUALITY_THRESHOLD,
        })
    }

    /// Builds the function at grid size (or profile resolution) `m`. The HLS
    /// extremizer family is selected by `param`'s α.
    pub fn build(&self, param: Param, m: usize) -> Result<Function> {
        let c = param.dilation();
        let n = self.n;
        Ok(match &self.source {
            Source::Grid { half_width, f } => {
                let mut y = vec![0.0; n];
                GridFunction::from_fn(n, half_width * c, m, |x| {
                    for (yi, xi) in y.iter_mut().zip(x) {
                        *yi = xi / c;
                    }
                    f(&y)
                })?
                .into()
            }
            Source::Radial { scale, r_max, f } => {
                RadialProfile::sample(n, m, scale * c, r_max * c, |r| f(r / c))?.into()
            }
            Source::Extremizer(family) => {
                let family = match (family, param) {
                    (Family::Hls(_), Param::Alpha(a)) => Family::Hls(a),
                    (f, _) => *f,
                };
                let mut spec = ExtremizerSpec::standard(n, family, None);
                for i in 0..n {
                    spec.phi[i * n + i] = 1.0 / c;
                }
                make_extremizer(
                    &spec,
                    Shape::Radial {
                        resolution: m,
                        r_max: extremizer_r_max(n),
                    },
                )?
            }
        })
    }
}

/// α lists and dilations shared by the whole corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub affine_hls: Vec<f64>,
    pub affine_frac_l2: Vec<f64>,
    pub dilations: Vec<f64>,
}

impl Default for Parameters {
    fn default() -> Self {
        Parameters {
            affine_hls: vec![0.25, 0.5, 0.75],
            affine_frac_l2: vec![-0.4, -0.25, -0.1],
            dilations: vec![0.75, 1.0, 1.5],
        }
    }
}

impl Parameters {
    /// Parameters of `chain` that are legal in dimension n.
    pub fn for_chain(&self, chain: ChainId, n: usize) -> Vec<Param> {
        let nf = n as f64;
        match chain {
            ChainId::AffineHls => self
                .affine_hls
                .iter()
                .filter(|a| **a > 0.0 && **a < nf)
                .map(|a| Param::Alpha(*a))
                .collect(),
            ChainId::AffineFracL2 => self
                .affine_frac_l2
                .iter()
                .filter(|a| **a < 0.0 && **a > -(1.0f64).min(nf / 2.0))
                .map(|a| Param::Alpha(*a))
                .collect(),
            _ => self.dilations.iter().map(|c| Param::Dilation(*c)).collect(),
        }
    }
}

fn gaussian_mixture(n: usize, rng: &mut ChaCha8Rng) -> PointFn {
    struct Bump {
        weight: f64,
        center: Vec<f64>,
        // symmetric n×n precision matrix, row-major
        precision: Vec<f64>,
    }
    let bumps: Vec<Bump> = (0..3)
        .map(|_| {
            let weight = rng.gen_range(0.5..1.5);
            let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let precision = if n == 1 {
                vec![rng.gen_range(0.7..2.0)]
            } else {
                let t: f64 = rng.gen_range(0.0..PI);
                let (a, b) = (rng.gen_range(0.7..2.0), rng.gen_range(0.7..2.0));
                let (c, s) = (t.cos(), t.sin());
                vec![
                    a * c * c + b * s * s,
                    (a - b) * c * s,
                    (a - b) * c * s,
                    a * s * s + b * c * c,
                ]
            };
            Bump {
                weight,
                center,
                precision,
            }
        })
        .collect();
    Arc::new(move |x: &[f64]| {
        bumps
            .iter()
            .map(|b| {
                let mut q = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        q += (x[i] - b.center[i]) * b.precision[i * n + j] * (x[j] - b.center[j]);
                    }
                }
                b.weight * (-q).exp()
            })
            .sum()
    })
}

/// The standard corpus; `seed` drives the random mixtures.
pub fn standard_corpus(seed: u64) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mix1 = gaussian_mixture(1, &mut rng);
    let mix2 = gaussian_mixture(2, &mut rng);
    vec![
        CorpusEntry::grid(
            "gaussian_1d",
            1,
            "exp(-x^2)",
            true,
            6.0,
            Arc::new(|x| (-x[0] * x[0]).exp()),
        ),
        CorpusEntry::grid(
            "indicator_1d",
            1,
            "indicator of [0, 1]",
            true,
            2.0,
            Arc::new(|x| if x[0] > 0.0 && x[0] < 1.0 { 1.0 } else { 0.0 }),
        ),
        CorpusEntry::grid(
            "bump_1d",
            1,
            "exp(-1/(1-x^2)) on (-1, 1)",
            true,
            2.0,
            Arc::new(|x| {
                let t = x[0] * x[0];
                if t < 1.0 {
                    (-1.0 / (1.0 - t)).exp()
                } else {
                    0.0
                }
            }),
        ),
        CorpusEntry::grid(
            "mixture_1d",
            1,
            "seeded mixture of three Gaussians",
            true,
            6.0,
            mix1,
        ),
        CorpusEntry::grid(
            "gaussian_2d",
            2,
            "exp(-|x|^2)",
            true,
            5.0,
            Arc::new(|x| (-(x[0] * x[0] + x[1] * x[1])).exp()),
        ),
        CorpusEntry::grid(
            "disk_2d",
            2,
            "indicator of the unit disk",
            true,
            1.5,
            Arc::new(|x| {
                if x[0] * x[0] + x[1] * x[1] < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }),
        ),
        CorpusEntry::grid(
            "anisotropic_gaussian_2d",
            2,
            "exp(-(x^2 + 3y^2 + xy))",
            false,
            5.0,
            Arc::new(|x| (-(x[0] * x[0] + 3.0 * x[1] * x[1] + x[0] * x[1])).exp()),
        ),
        CorpusEntry::grid(
            "sheared_gaussian_2d",
            2,
            "exp(-((x-y)^2 + 3y^2))",
            false,
            5.0,
            Arc::new(|x| {
                let u = x[0] - x[1];
                (-(u * u + 3.0 * x[1] * x[1])).exp()
            }),
        ),
        CorpusEntry::grid(
            "translated_gaussian_2d",
            2,
            "exp(-|x - (0.5, -0.25)|^2)",
            true,
            5.0,
            Arc::new(|x| (-((x[0] - 0.5).powi(2) + (x[1] + 0.25).powi(2))).exp()),
        ),
        CorpusEntry::grid(
            "mixture_2d",
            2,
            "seeded mixture of three anisotropic Gaussians",
            false,
            5.0,
            mix2,
        ),
        CorpusEntry {
            name: "gaussian_profile_2d".into(),
            n: 2,
            description: "exp(-r^2) as a radial profile".into(),
            symmetric: true,
            source: Source::Radial {
                scale: 1.0,
                r_max: 12.0,
                f: Arc::new(|r| (-r * r).exp()),
            },
        },
        CorpusEntry::extremizer(
            "hls_extremizer_1d",
            1,
            "(1+x^2)^(-(1+a)/2)",
            Family::Hls(0.5),
        ),
        CorpusEntry::extremizer(
            "hls_extremizer_2d",
            2,
            "(1+|x|^2)^(-(2+a)/2)",
            Family::Hls(1.0),
        ),
        CorpusEntry::extremizer("log_hls_extremizer_1d", 1, "(1+x^2)^(-1)", Family::LogHls),
        CorpusEntry::extremizer("log_hls_extremizer_2d", 2, "(1+|x|^2)^(-2)", Family::LogHls),
        CorpusEntry::extremizer(
            "log_sobolev_extremizer_1d",
            1,
            "(1+x^2)^(-1/2)",
            Family::LogSob,
        ),
        CorpusEntry::extremizer(
            "log_sobolev_extremizer_2d",
            2,
            "(1+|x|^2)^(-1)",
            Family::LogSob,
        ),
    ]
}

/// Seeded star bodies ρ(θ) = exp(Σ_k a_k cos(kθ) + b_k sin(kθ)) on a circle rule.
pub fn random_star_bodies(
    quad: &Arc<SphereQuadrature>,
    count: usize,
    seed: u64,
) -> Result<Vec<StarBody>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|j| {
            let coeffs: Vec<(f64, f64)> = (1..=4)
                .map(|k| {
                    let s = 0.3 / k as f64;
                    (rng.gen_range(-s..s), rng.gen_range(-s..s))
                })
                .collect();
            StarBody::from_fn(quad.clone(), &format!("random_{j}"), |u: &[f64]| {
                let t = u[1].atan2(u[0]);
                let e: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| {
                        let k = (k + 1) as f64;
                        a * (k * t).cos() + b * (k * t).sin()
                    })
                    .sum();
                e.exp()
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::lp_norm;

    #[test]
    fn corpus_is_seeded_and_covers_both_dimensions() {
        let a = standard_corpus(11);
        let b = standard_corpus(11);
        assert!(a.len() >= 10);
        assert!(a.iter().any(|e| e.n == 1) && a.iter().any(|e| e.n == 2));
        for (x, y) in a.iter().zip(&b) {
            let fx = x.build(Param::Alpha(0.5), 32).unwrap();
            let fy = y.build(Param::Alpha(0.5), 32).unwrap();
            assert_eq!(lp_norm(&fx, 2.0), lp_norm(&fy, 2.0), "{}", x.name);
        }
    }

    #[test]
    fn dilation_scales_the_l1_norm() {
        let e = &standard_corpus(0)[4];
        let f1 = e.build(Param::Dilation(1.0), 64).unwrap();
        let f2 = e.build(Param::Dilation(1.5), 64).unwrap();
        let ratio = lp_norm(&f2, 1.0) / lp_norm(&f1, 1.0);
        assert!((ratio - 2.25).abs() < 1e-6, "{ratio}");
    }

    #[test]
    fn parameters_respect_dimension() {
        let p = Parameters {
            affine_hls: vec![0.5, 1.5],
            affine_frac_l2: vec![-0.75, -0.25],
            dilations: vec![1.0],
        };
        assert_eq!(p.for_chain(ChainId::AffineHls, 1), vec![Param::Alpha(0.5)]);
        assert_eq!(p.for_chain(ChainId::AffineHls, 2).len(), 2);
        assert_eq!(
            p.for_chain(ChainId::AffineFracL2, 1),
            vec![Param::Alpha(-0.25)]
        );
        assert_eq!(p.for_chain(ChainId::AffineFracL2, 2).len(), 2);
    }
}
