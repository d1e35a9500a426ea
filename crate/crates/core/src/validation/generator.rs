use alloc::vec::Vec;

use crate::coefficients::{ProblemSpec, Side};
use crate::error::{Error, Result};
use crate::geometry::CurveKind;
use crate::math;
use crate::rng::derive_seed;
use crate::simulator::{PathOutcome, SimConfig, Simulator};
use crate::stats::MeanEstimate;

/// Test functions for the martingale characterisation, built against a
/// one-interface problem.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorTestFn {
    /// Quadratic on each side of `x₁(t)` in `z = x − x₁(t)`:
    /// `p₋z + ½q₋z²` below, `p₊z + ½q₊z²` above, with
    /// `(1+β)p₊ = (1−β)p₋` and `L^Xφ` continuous across the curve.
    PiecewiseQuadratic {
        p_minus: f64,
        q_minus: f64,
    },
    /// Same slope `p` on both sides: breaks the transmission condition when `β ≠ 0`.
    Unmatched {
        p: f64,
    },
    Constant {
        c: f64,
    },
}

/// Evaluator binding a test function to a problem.
struct Bound<'a> {
    problem: &'a ProblemSpec,
    kind: &'a GeneratorTestFn,
}

impl Bound<'_> {
    /// `(z, p₊, q₊)` at time `t`.
    fn upper(&self, t: f64, p_minus: f64, q_minus: f64) -> (f64, f64, f64) {
        let curve = &self.problem.family().curves()[0];
        let c = curve.value_at(t);
        let v = curve.derivative_at(t);
        let beta = self.problem.beta.functions()[0].value(t);
        let p_plus = p_minus * (1.0 - beta) / (1.0 + beta);
        let s_m = self.problem.sigma.value_at_interface(1, t, c, Side::Left);
        let s_p = self.problem.sigma.value_at_interface(1, t, c, Side::Right);
        let b_m = self.problem.drift.value_at_interface(1, t, c, Side::Left);
        let b_p = self.problem.drift.value_at_interface(1, t, c, Side::Right);
        // ½σ₊²q₊ + (b₊ − x₁')p₊ = ½σ₋²q₋ + (b₋ − x₁')p₋ at z = 0.
        let q_plus = (0.5 * s_m * s_m * q_minus + (b_m - v) * p_minus - (b_p - v) * p_plus) / (0.5 * s_p * s_p);
        (c, p_plus, q_plus)
    }

    fn value(&self, t: f64, x: f64) -> f64 {
        match *self.kind {
            GeneratorTestFn::Constant { c } => c,
            GeneratorTestFn::Unmatched { p } => p * (x - self.problem.family().curves()[0].value_at(t)),
            GeneratorTestFn::PiecewiseQuadratic { p_minus, q_minus } => {
                let (c, p_plus, q_plus) = self.upper(t, p_minus, q_minus);
                let z = x - c;
                if z < 0.0 {
                    p_minus * z + 0.5 * q_minus * z * z
                } else {
                    p_plus * z + 0.5 * q_plus * z * z
                }
            }
        }
    }

    /// `(φ'_x, φ''_xx)` one-sided by `side` (meaningful on the curve only).
    fn space(&self, t: f64, x: f64, side: Side) -> (f64, f64) {
        match *self.kind {
            GeneratorTestFn::Constant { .. } => (0.0, 0.0),
            GeneratorTestFn::Unmatched { p } => (p, 0.0),
            GeneratorTestFn::PiecewiseQuadratic { p_minus, q_minus } => {
                let (c, p_plus, q_plus) = self.upper(t, p_minus, q_minus);
                let z = x - c;
                let below = (p_minus + q_minus * z, q_minus);
                let above = (p_plus + q_plus * z, q_plus);
                if z < 0.0 {
                    below
                } else if z > 0.0 {
                    above
                } else {
                    match side {
                        Side::Left => below,
                        Side::Right => above,
                        Side::Symmetric => (0.5 * (below.0 + above.0), 0.5 * (below.1 + above.1)),
                    }
                }
            }
        }
    }

    /// `L^Xφ = φ_t + ½σ²φ'' + bφ'`, with `φ_t` by a central difference at fixed `x`.
    fn generator(&self, t: f64, x: f64, horizon: f64) -> f64 {
        if let GeneratorTestFn::Constant { .. } = self.kind {
            return 0.0;
        }
        let h = 1e-5 * horizon;
        let (t0, t1) = ((t - h).max(0.0), (t + h).min(horizon));
        let phi_t = (self.value(t1, x) - self.value(t0, x)) / (t1 - t0);
        let positions = [self.problem.family().curves()[0].value_at(t)];
        let s = self.problem.sigma.value_at(&positions, t, x, Side::Symmetric);
        let b = self.problem.drift.value_at(&positions, t, x, Side::Symmetric);
        let (d1, d2) = self.space(t, x, Side::Symmetric);
        phi_t + 0.5 * s * s * d2 + b * d1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectRow {
    pub s: f64,
    pub x: f64,
    pub t: f64,
    pub defect: f64,
    pub se: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorReport {
    pub rows: Vec<DefectRow>,
    pub pass: bool,
    /// False for moving interfaces, where the characterisation is not
    /// established; `pass` is then informative only.
    pub gated: bool,
    pub dt: f64,
    pub c_dt: f64,
    pub k_se: f64,
}

/// `E^{s,x}[φ(t,X_t) − φ(s,x) − ∫_s^t L^Xφ(u,X_u) du]` at each `t` in
/// `times` (on the grid of `n_steps` over `[s, T]`), trapezoid in time.
/// Row passes iff `|defect| ≤ k_se·se + c_dt·Δt`.
#[allow(clippy::too_many_arguments)]
pub fn martingale_defect(
    problem: &ProblemSpec,
    phi: &GeneratorTestFn,
    s: f64,
    start_points: &[f64],
    times: &[f64],
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    c_dt: f64,
) -> Result<GeneratorReport> {
    if problem.family().len() != 1 {
        return Err(Error::InvalidParameter("generator test functions are built for one interface".into()));
    }
    if n_paths < 2 || n_steps == 0 || start_points.is_empty() || times.is_empty() {
        return Err(Error::InvalidParameter("martingale defect needs paths, steps, start points and times".into()));
    }
    let horizon = problem.horizon();
    let dt = (horizon - s) / n_steps as f64;
    let mut marks = Vec::with_capacity(times.len());
    for &t in times {
        let j = (t - s) / dt;
        let jr = libm::round(j);
        if !(t > s && t <= horizon) || math::abs(j - jr) > 1e-9 * j.max(1.0) {
            return Err(Error::InvalidParameter(alloc::format!("t = {t} is not a grid time after s = {s}")));
        }
        marks.push(jr as usize);
    }
    let mut sorted = marks.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != marks.len() {
        return Err(Error::InvalidParameter("repeated evaluation times".into()));
    }
    let bound = Bound { problem, kind: phi };
    const K_SE: f64 = 3.0;
    let mut rows = Vec::new();
    for (i, &x) in start_points.iter().enumerate() {
        let sim =
            Simulator::new(problem, SimConfig::new(n_paths, n_steps, derive_seed(seed, i as u64)).starting_at(s, x))?;
        let phi0 = bound.value(s, x);
        let per_path: Vec<Option<Vec<f64>>> = sim.map_paths(|p| {
            let mut out = Vec::with_capacity(marks.len());
            let mut integral = 0.0;
            let mut prev = 0.0;
            let outcome = sim.run_path(p, |j, t, xj, _| {
                let g = bound.generator(t, xj, horizon);
                if j > 0 {
                    integral += 0.5 * dt * (prev + g);
                }
                prev = g;
                if marks.contains(&j) {
                    out.push(bound.value(t, xj) - phi0 - integral);
                }
            });
            match outcome {
                PathOutcome::Completed => Some(out),
                PathOutcome::NonFinite { .. } => None,
            }
        });
        let done: Vec<&Vec<f64>> = per_path.iter().flatten().collect();
        // Marks are visited in grid order.
        let mut order: Vec<usize> = (0..marks.len()).collect();
        order.sort_by_key(|&k| marks[k]);
        for (slot, &k) in order.iter().enumerate() {
            let est = MeanEstimate::from_samples(&done.iter().map(|v| v[slot]).collect::<Vec<_>>());
            let tol = K_SE * est.std_error + c_dt * dt;
            rows.push(DefectRow {
                s,
                x,
                t: times[k],
                defect: est.mean,
                se: est.std_error,
                tolerance: tol,
                pass: math::abs(est.mean) <= tol,
            });
        }
    }
    let gated = problem.family().curves().iter().all(|c| matches!(c.kind(), CurveKind::Constant { .. }));
    Ok(GeneratorReport { pass: rows.iter().all(|r| r.pass), rows, gated, dt, c_dt, k_se: K_SE })
}
