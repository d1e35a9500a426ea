use alloc::vec::Vec;

use crate::coefficients::{ProblemSpec, Side};
use crate::error::{Error, Result};
use crate::geometry::InterfaceCurve;
use crate::math;
use crate::simulator::{LocalTimeAccumulator, PathOutcome, QvIncrement, SimConfig, Simulator};
use crate::stats::MeanEstimate;

/// Test functions `r(t, x)`, smooth off at most one curve `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PeskirTestFn {
    /// `|x − γ(t)|`; `r'_x` jumps by 2 across `γ`.
    AbsToCurve { curve: InterfaceCurve },
    /// `a·(x − c)²`
    Quadratic { a: f64, c: f64 },
    /// `amp·sin(freq·t)`
    TimeOnly { amp: f64, freq: f64 },
}

impl PeskirTestFn {
    pub fn value(&self, t: f64, x: f64) -> f64 {
        match *self {
            Self::AbsToCurve { curve } => math::abs(x - curve.value_at(t)),
            Self::Quadratic { a, c } => a * (x - c) * (x - c),
            Self::TimeOnly { amp, freq } => amp * math::sin(freq * t),
        }
    }

    /// Symmetric average of the one-sided `r'_t`.
    pub fn d_t(&self, t: f64, x: f64) -> f64 {
        match *self {
            Self::AbsToCurve { curve } => -curve.derivative_at(t) * sign(x - curve.value_at(t)),
            Self::Quadratic { .. } => 0.0,
            Self::TimeOnly { amp, freq } => amp * freq * math::cos(freq * t),
        }
    }

    /// Symmetric average of the one-sided `r'_x`.
    pub fn d_x(&self, t: f64, x: f64) -> f64 {
        match *self {
            Self::AbsToCurve { curve } => sign(x - curve.value_at(t)),
            Self::Quadratic { a, c } => 2.0 * a * (x - c),
            Self::TimeOnly { .. } => 0.0,
        }
    }

    /// `r''_xx` off the curve.
    pub fn d_xx(&self, _t: f64, _x: f64) -> f64 {
        match *self {
            Self::Quadratic { a, .. } => 2.0 * a,
            _ => 0.0,
        }
    }

    /// The kink curve, if any.
    pub fn curve(&self) -> Option<InterfaceCurve> {
        match *self {
            Self::AbsToCurve { curve } => Some(curve),
            _ => None,
        }
    }

    /// `r'_x(t, γ(t)+) − r'_x(t, γ(t)−)`
    pub fn jump(&self, _t: f64) -> f64 {
        match *self {
            Self::AbsToCurve { .. } => 2.0,
            _ => 0.0,
        }
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeskirConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// Half-width of the local-time window.
    pub epsilon: f64,
    pub mode: QvIncrement,
    pub k_se: f64,
    /// Bound on the mean absolute residual.
    pub abs_tolerance: f64,
}

impl PeskirConfig {
    /// `abs_tolerance = 2√ε + 5√Δt`, the size of the pathwise local-time error.
    pub fn new(n_paths: usize, n_steps: usize, seed: u64, epsilon: f64, horizon: f64) -> Self {
        let dt = horizon / n_steps.max(1) as f64;
        Self {
            n_paths,
            n_steps,
            seed,
            epsilon,
            mode: QvIncrement::SigmaSquared,
            k_se: 3.0,
            abs_tolerance: 2.0 * math::sqrt(epsilon) + 5.0 * math::sqrt(dt),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeskirReport {
    pub mean: f64,
    pub std_error: f64,
    /// `k_se·se`
    pub ci_half_width: f64,
    pub mean_abs: f64,
    pub abs_tolerance: f64,
    pub contains_zero: bool,
    pub pass: bool,
    pub n_paths: usize,
    pub aborted: usize,
    pub dt: f64,
    pub epsilon: f64,
}

/// Residual of the symmetric Itô–Tanaka formula along simulated paths:
/// `r(T,X_T) − r(0,X_0) − Σ r'_t Δt − Σ r'_x ΔX − ½ Σ r''_xx σ² Δt − ½ Σ jump·ΔL̂`,
/// all sums left-point on the simulation grid.
pub fn ito_peskir_residual(problem: &ProblemSpec, r: &PeskirTestFn, cfg: &PeskirConfig) -> Result<PeskirReport> {
    if cfg.n_paths < 2 {
        return Err(Error::InvalidParameter("Itô–Peskir residual needs at least two paths".into()));
    }
    let sim = Simulator::new(problem, SimConfig::new(cfg.n_paths, cfg.n_steps, cfg.seed))?;
    let dt = sim.dt();
    let curve = r.curve();
    if let Some(c) = curve {
        if c.horizon() < problem.horizon() {
            return Err(Error::InvalidParameter("test-function curve shorter than the horizon".into()));
        }
    }
    // Validates ε once; cloned per path.
    let template = match curve {
        Some(c) => Some(LocalTimeAccumulator::on_curve(problem, c, cfg.epsilon, cfg.mode)?),
        None => None,
    };
    let residuals = sim.map_paths(|p| {
        let mut lt = template.clone();
        let mut prev: Option<(f64, f64)> = None;
        let mut first = 0.0;
        let mut last = 0.0;
        let mut sum = 0.0;
        let mut lt_prev = 0.0;
        let outcome = sim.run_path(p, |j, t, x, _| {
            if let Some((tp, xp)) = prev {
                let sig = problem.sigma.value_at(&sim.frame(j - 1).xs, tp, xp, Side::Symmetric);
                sum +=
                    r.d_t(tp, xp) * (t - tp) + r.d_x(tp, xp) * (x - xp) + 0.5 * r.d_xx(tp, xp) * sig * sig * (t - tp);
            } else {
                first = r.value(t, x);
            }
            if let Some(acc) = lt.as_mut() {
                let l = acc.observe(t, x);
                if j > 0 {
                    sum += 0.5 * r.jump(prev.map_or(t, |(tp, _)| tp)) * (l - lt_prev);
                }
                lt_prev = l;
            }
            prev = Some((t, x));
            last = r.value(t, x);
        });
        match outcome {
            PathOutcome::Completed => Some(last - first - sum),
            PathOutcome::NonFinite { .. } => None,
        }
    });
    let values: Vec<f64> = residuals.iter().flatten().copied().collect();
    let est = MeanEstimate::from_samples(&values);
    let mean_abs = values.iter().map(|v| math::abs(*v)).sum::<f64>() / values.len().max(1) as f64;
    let half = cfg.k_se * est.std_error;
    let contains_zero = math::abs(est.mean) <= half;
    Ok(PeskirReport {
        mean: est.mean,
        std_error: est.std_error,
        ci_half_width: half,
        mean_abs,
        abs_tolerance: cfg.abs_tolerance,
        contains_zero,
        pass: contains_zero && mean_abs <= cfg.abs_tolerance,
        n_paths: values.len(),
        aborted: cfg.n_paths - values.len(),
        dt,
        epsilon: cfg.epsilon,
    })
}
