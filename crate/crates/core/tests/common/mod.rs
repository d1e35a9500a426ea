//! Shared fixtures and closed-form oracles, implemented independently of
//! the library (normal CDF from `statrs`).

#![allow(dead_code)]

use skewflow_core::geometry::InterfaceCurve;
use skewflow_core::{
    BetaFn, CoefficientClass, CurveFamily, PiecewiseCoefficient, ProblemSpec, SkewnessSchedule, SmoothFn,
};
use statrs::distribution::{ContinuousCDF, Normal};

fn std_normal_cdf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(z)
}

/// CDF of skew BM started at 0: mass `(1−β)/2` below 0, `(1+β)/2` above,
/// each side a reflected Gaussian.
pub fn skew_bm_cdf(beta: f64, t: f64, x: f64) -> f64 {
    let z = x / t.sqrt();
    if x < 0.0 {
        (1.0 - beta) * std_normal_cdf(z)
    } else {
        (1.0 - beta) / 2.0 + (1.0 + beta) * (std_normal_cdf(z) - 0.5)
    }
}

/// `E[h·exp(−(x + W_τ − c)²/(2w²))]`.
pub fn heat_gaussian(height: f64, center: f64, width: f64, tau: f64, x: f64) -> f64 {
    let v = width * width + tau;
    height * width / v.sqrt() * (-(x - center) * (x - center) / (2.0 * v)).exp()
}

/// `E L⁰_t = E|B_t| = √(2t/π)`.
pub fn levy_mean_local_time(t: f64) -> f64 {
    (2.0 * t / std::f64::consts::PI).sqrt()
}

/// σ ≡ `sigma`, b ≡ `drift` on every piece, constant skewness.
pub fn constant_problem(
    curves: Vec<InterfaceCurve>,
    gap: f64,
    sigma: f64,
    drift: f64,
    betas: &[f64],
    x0: f64,
) -> ProblemSpec {
    let horizon = curves[0].horizon();
    let family = CurveFamily::new(curves, gap).unwrap();
    ProblemSpec::new(
        PiecewiseCoefficient::uniform(
            family.clone(),
            SmoothFn::constant(sigma),
            CoefficientClass::Diffusion { m: sigma, big_m: sigma },
        )
        .unwrap(),
        PiecewiseCoefficient::uniform(
            family,
            SmoothFn::constant(drift),
            CoefficientClass::Drift { big_m: drift.abs() },
        )
        .unwrap(),
        SkewnessSchedule::constant(betas, horizon).unwrap(),
        x0,
    )
    .unwrap()
}

/// Piecewise problem with moving curves and time-varying skewness.
pub fn moving_problem(
    curves: Vec<InterfaceCurve>,
    gap: f64,
    sigma: Vec<SmoothFn>,
    drift: Vec<SmoothFn>,
    betas: Vec<BetaFn>,
    bounds: (f64, f64, f64),
) -> ProblemSpec {
    let horizon = curves[0].horizon();
    let family = CurveFamily::new(curves, gap).unwrap();
    ProblemSpec::new(
        PiecewiseCoefficient::new(family.clone(), sigma, CoefficientClass::Diffusion { m: bounds.0, big_m: bounds.1 })
            .unwrap(),
        PiecewiseCoefficient::new(family, drift, CoefficientClass::Drift { big_m: bounds.2 }).unwrap(),
        SkewnessSchedule::new(betas, horizon).unwrap(),
        0.0,
    )
    .unwrap()
}

/// A moving two-interface problem with jumping σ, b and time-varying β.
pub fn two_interface_problem() -> ProblemSpec {
    moving_problem(
        vec![
            InterfaceCurve::sinusoid(-0.5, 0.2, 1.0, 0.0, 1.0).unwrap(),
            InterfaceCurve::linear(0.6, 0.1, 1.0).unwrap(),
        ],
        0.5,
        vec![SmoothFn::constant(1.0), SmoothFn::constant(1.5), SmoothFn::constant(0.8)],
        vec![SmoothFn::constant(0.2), SmoothFn::constant(-0.1), SmoothFn::constant(0.0)],
        vec![BetaFn::Sinusoid { c0: 0.3, amp: 0.2, freq: 2.0, phase: 0.0 }, BetaFn::Affine { c0: -0.4, c1: 0.3 }],
        (0.8, 1.5, 0.2),
    )
}
