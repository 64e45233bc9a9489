use std::f64::consts::PI;
use std::sync::Arc;

use ahls::bodies::{polar_projection_body, s_alpha_body, SphereQuadrature, SphereRule, StarBody};
use ahls::grid::{lp_norm, schwarz_symmetrize, Function, GridFunction, RadialProfile};
use ahls::kernels::*;

fn gaussian_1d(m: usize) -> Function {
    GridFunction::from_fn(1, 6.0, m, |x| (-x[0] * x[0]).exp())
        .unwrap()
        .into()
}

fn blob_2d(m: usize) -> GridFunction {
    GridFunction::from_fn(2, 3.0, m, |x| {
        let (a, b) = (x[0] - 0.3, x[1] + 0.2);
        (-(a * a + 2.0 * b * b + 0.8 * a * b)).exp()
    })
    .unwrap()
}

#[test]
fn riesz_polar_identity() {
    let f: Function = blob_2d(64).into();
    let quad = Arc::new(SphereQuadrature::new(2, SphereRule::Circle { count: 128 }).unwrap());
    for alpha in [0.5, 1.0, 1.5] {
        let e = riesz_energy(&f, alpha).unwrap().value;
        let s = s_alpha_body(&f, alpha, quad.clone()).unwrap();
        let polar = quad.integrate(|i| s.rho()[i].powf(alpha));
        assert!(
            (e - polar).abs() < 1e-2 * e,
            "alpha {alpha}: {e} vs {polar}"
        );
    }
}

#[test]
fn log_split_identity() {
    let f: Function = blob_2d(64).into();
    let quad = Arc::new(SphereQuadrature::new(2, SphereRule::Circle { count: 128 }).unwrap());
    let body = StarBody::from_fn(quad.clone(), "K", |u: &[f64]| {
        1.0 / (0.5 * u[0] * u[0] + 2.0 * u[1] * u[1] + 0.3 * u[0]).sqrt()
    })
    .unwrap();
    let aniso = log_energy(&f, Some(&body)).unwrap().value;
    let euclid = log_energy(&f, None).unwrap().value;
    let s = s_alpha_body(&f, 2.0, quad.clone()).unwrap();
    let extra = quad.integrate(|i| s.rho()[i].powi(2) * body.rho()[i].ln());
    assert!(
        (aniso - euclid - extra).abs() < 1e-2,
        "{aniso} vs {}",
        euclid + extra
    );
}

#[test]
fn log_split_identity_1d_asymmetric_body() {
    let f = gaussian_1d(512);
    let quad = Arc::new(SphereQuadrature::default_for(1).unwrap());
    let body = StarBody::new(quad.clone(), vec![2.0, 0.5], "K").unwrap();
    let aniso = log_energy(&f, Some(&body)).unwrap().value;
    let euclid = log_energy(&f, None).unwrap().value;
    let s = s_alpha_body(&f, 1.0, quad.clone()).unwrap();
    let extra = quad.integrate(|i| s.rho()[i] * body.rho()[i].ln());
    assert!((aniso - euclid - extra).abs() < 1e-6);
}

#[test]
fn riesz_fourier_identity_gaussian() {
    let f = gaussian_1d(1024);
    for alpha in [0.25, 0.5, 0.75] {
        let lhs = alpha * riesz_energy(&f, alpha).unwrap().value;
        let rhs = riesz_fourier_constant(1, alpha).unwrap()
            * fourier_power_moment(&f, -alpha).unwrap().value;
        assert!(
            (lhs - rhs).abs() < 1e-2 * lhs,
            "alpha {alpha}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn seminorm_fourier_identity_gaussian() {
    let f = gaussian_1d(1024);
    let alpha = -0.25;
    let e = fractional_seminorm(&f, alpha).unwrap().value;
    let rhs = seminorm_fourier_constant(1, alpha).unwrap()
        * fourier_power_moment(&f, -2.0 * alpha).unwrap().value;
    assert!((e - rhs).abs() < 1e-2 * e, "{e} vs {rhs}");
}

#[test]
fn seminorm_is_polar_projection_integral() {
    let f = gaussian_1d(256);
    let quad = Arc::new(SphereQuadrature::default_for(1).unwrap());
    let alpha = -0.3;
    let e = fractional_seminorm(&f, alpha).unwrap().value;
    let pi2 = polar_projection_body(&f, alpha, quad.clone()).unwrap();
    let s = quad.integrate(|i| pi2.rho()[i].powf(2.0 * alpha));
    assert!((e - s).abs() < 1e-10 * e);
}

#[test]
fn log_moment_dilation() {
    let c0 = (2.0 / PI).powf(0.25);
    let base: Function = RadialProfile::sample(1, 256, 1.0, 12.0, |x| c0 * (-x * x).exp())
        .unwrap()
        .into();
    let c: f64 = 2.5;
    let dil: Function = RadialProfile::sample(1, 256, 1.0 / c, 12.0, |x| {
        c.sqrt() * c0 * (-(c * x).powi(2)).exp()
    })
    .unwrap()
    .into();
    let a = fourier_log_moment(&base).unwrap().value;
    let b = fourier_log_moment(&dil).unwrap().value;
    assert!((b - a - c.ln()).abs() < 1e-3, "{a} {b}");
}

#[test]
fn gaussian_log_energy_both_routes() {
    // −∬ e^{−|x|²−|y|²} log|x−y| = −(π/2) ∫ e^{−|z|²/2} log|z| dz = −π²(log 2 − γ)/2
    let exact = -PI * PI / 2.0 * (2f64.ln() - 0.577_215_664_901_532_9);
    let g: Function = GridFunction::from_fn(2, 5.0, 128, |x| (-(x[0] * x[0] + x[1] * x[1])).exp())
        .unwrap()
        .into();
    let p: Function = RadialProfile::sample(2, 256, 1.0, 10.0, |r| (-r * r).exp())
        .unwrap()
        .into();
    for f in [g, p] {
        let e = log_energy(&f, None).unwrap();
        assert!(
            (e.value - exact).abs() <= e.quadrature_error_estimate,
            "{e:?} vs {exact}"
        );
        assert!(e.quadrature_error_estimate < 0.1 * exact.abs());
    }
}

#[test]
fn rearrangement_increases_energies() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..3 {
        let vals: Vec<f64> = (0..24 * 24).map(|_| rng.gen::<f64>().powi(3)).collect();
        let g = GridFunction::new(2, 1.5, 24, vals).unwrap();
        let star = schwarz_symmetrize(&g);
        let f: Function = g.into();
        let fs: Function = star.into();
        assert!((lp_norm(&f, 2.0) - lp_norm(&fs, 2.0)).abs() < 1e-2);
        let a = riesz_energy(&f, 1.0).unwrap().value;
        let b = riesz_energy(&fs, 1.0).unwrap().value;
        assert!(a <= b * (1.0 + 1e-3), "{a} > {b}");
        let a = log_energy(&f, None).unwrap().value;
        let b = log_energy(&fs, None).unwrap().value;
        assert!(a <= b + 1e-3 * b.abs(), "{a} > {b}");
    }
}

#[test]
fn translation_invariance() {
    let mk = |s: f64| -> Function {
        GridFunction::from_fn(2, 4.0, 64, |x| (-((x[0] - s).powi(2) + x[1] * x[1])).exp())
            .unwrap()
            .into()
    };
    let a = riesz_energy(&mk(0.0), 0.7).unwrap().value;
    let b = riesz_energy(&mk(0.37), 0.7).unwrap().value;
    assert!((a - b).abs() < 2e-3 * a);
    let a = log_energy(&mk(0.0), None).unwrap().value;
    let b = log_energy(&mk(0.37), None).unwrap().value;
    assert!((a - b).abs() < 2e-3 * a.abs());
}
