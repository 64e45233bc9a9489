//! Dual mixed volumes of star bodies sharing a sphere rule.

use crate::bodies::{star_volume, StarBody};
use crate::error::{Error, Result};

fn check_pair(k: &StarBody, l: &StarBody) -> Result<()> {
    if !k.same_rule(l) {
        return Err(Error::QuadratureMismatch);
    }
    Ok(())
}

/// Ṽ_α(K, L) = (1/n) ∫ ρ_K^{n−α} ρ_L^α du.
pub fn dual_mixed_volume(k: &StarBody, l: &StarBody, alpha: f64) -> Result<f64> {
    check_pair(k, l)?;
    let n = k.n() as f64;
    if alpha == 0.0 || alpha == n || !alpha.is_finite() {
        return Err(Error::Domain {
            function: "dual_mixed_volume",
            value: alpha,
            expected: "alpha not in {0, n}",
        });
    }
    let (rk, rl) = (k.rho(), l.rho());
    Ok(k.quadrature()
        .integrate(|i| rk[i].powf(n - alpha) * rl[i].powf(alpha))
        / n)
}

/// Ṽ_log(K, L) = (1/(n|K|)) ∫ ρ_K^n log(ρ_L/ρ_K) du.
///
/// This is the α → 0 limit of (1/α) log(Ṽ_α(K,L)/|K|) and satisfies
/// Ṽ_log(K, L) ≤ (1/n) log(|L|/|K|).
pub fn dual_mixed_volume_log(k: &StarBody, l: &StarBody) -> Result<f64> {
    check_pair(k, l)?;
    for body in [k, l] {
        if let Some(&node) = body.zero_nodes().first() {
            return Err(Error::NonPositiveRadius { node });
        }
    }
    let n = k.n();
    let (rk, rl) = (k.rho(), l.rho());
    let s = k
        .quadrature()
        .integrate(|i| rk[i].powi(n as i32) * (rl[i] / rk[i]).ln());
    Ok(s / (n as f64 * star_volume(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{SphereQuadrature, SphereRule};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn circle(count: usize) -> Arc<SphereQuadrature> {
        Arc::new(SphereQuadrature::new(2, SphereRule::Circle { count }).unwrap())
    }

    fn random_body(q: &Arc<SphereQuadrature>, rng: &mut impl Rng) -> StarBody {
        let rho = (0..q.len()).map(|_| rng.gen_range(0.3..2.0)).collect();
        StarBody::new(q.clone(), rho, "random").unwrap()
    }

    #[test]
    fn collapses_and_balls() {
        let q = circle(64);
        let b1 = StarBody::ball(q.clone(), 1.0).unwrap();
        let b2 = StarBody::ball(q.clone(), 2.0).unwrap();
        assert!((dual_mixed_volume(&b1, &b2, 1.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((dual_mixed_volume(&b2, &b2, 0.7).unwrap() - star_volume(&b2)).abs() < 1e-12);
        assert!(dual_mixed_volume_log(&b1, &b1).unwrap().abs() < 1e-15);
        assert!((dual_mixed_volume_log(&b1, &b2).unwrap() - 2f64.ln()).abs() < 1e-14);
        assert!(dual_mixed_volume(&b1, &b2, 2.0).is_err());
    }

    #[test]
    fn mismatched_rules_are_rejected() {
        let a = StarBody::ball(circle(16), 1.0).unwrap();
        let b = StarBody::ball(circle(32), 1.0).unwrap();
        assert!(matches!(
            dual_mixed_volume(&a, &b, 1.0),
            Err(Error::QuadratureMismatch)
        ));
    }

    #[test]
    fn inequalities_on_random_bodies() {
        let q = circle(48);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let k = random_body(&q, &mut rng);
            let l = random_body(&q, &mut rng);
            let (vk, vl) = (star_volume(&k), star_volume(&l));
            for alpha in [0.3, 1.0, 1.7] {
                let v = dual_mixed_volume(&k, &l, alpha).unwrap();
                assert!(vk.powf((2.0 - alpha) / 2.0) * vl.powf(alpha / 2.0) - v >= -1e-10);
            }
            let vlog = dual_mixed_volume_log(&k, &l).unwrap();
            assert!(0.5 * (vl / vk).ln() - vlog >= -1e-10);
            // homogeneity and the α → 0 limit
            let c = 1.7;
            let lc = l.scaled(c);
            let a = dual_mixed_volume(&k, &lc, 0.9).unwrap();
            let b = dual_mixed_volume(&k, &l, 0.9).unwrap();
            assert!((a - c.powf(0.9) * b).abs() < 1e-12 * a);
            let lim = |alpha: f64| (dual_mixed_volume(&k, &l, alpha).unwrap() / vk).ln() / alpha;
            assert!((lim(1e-3) - vlog).abs() < 1e-3);
        }
    }
}
