use alloc::vec::Vec;

use crate::coefficients::{ProblemSpec, Side, SkewnessSchedule};
use crate::error::{Error, Result};
use crate::geometry::{default_interface_tol, locate, CurveFamily, Location};
use crate::math;

/// `R(t, x) = ∫_{x₁(t)}^x μ(t, z) dz` with `μ = ∏_{x_i ≤ x} (1−β_i)/(1+β_i)`, and its inverse `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct RemovalTransform {
    family: CurveFamily,
    beta: SkewnessSchedule,
}

/// `R`, `r` and `r'_t` frozen at one instant.
///
/// Segment `k ∈ 0..=I` is `[x_k, x_{k+1})` in x and `[y_k, y_{k+1})` in y
/// (with `x_0 = y_0 = −∞`). On segment `k ≥ 1`, `R = y_k + Π_k (x − x_k)`;
/// on segment 0, `R = x − x₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct RemovalFrame {
    pub t: f64,
    /// `x_i(t)`
    pub xs: Vec<f64>,
    /// `y_i(t) = R(t, x_i(t))`, `y_1 = 0`.
    pub ys: Vec<f64>,
    /// `Π_k = μ` on segment `k`; `Π_0 = 1`.
    pub slopes: Vec<f64>,
    /// `A_k = 1/Π_k = α` on segment `k`.
    pub inverse_slopes: Vec<f64>,
    /// `r'_t = rt0[k] + rt1[k]·y` on segment `k`.
    pub rt0: Vec<f64>,
    pub rt1: Vec<f64>,
}

impl RemovalTransform {
    pub fn new(family: CurveFamily, beta: SkewnessSchedule) -> Result<Self> {
        if beta.len() != family.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} skewness functions for {} interfaces",
                beta.len(),
                family.len()
            )));
        }
        Ok(Self { family, beta })
    }

    pub fn from_problem(problem: &ProblemSpec) -> Self {
        Self { family: problem.family().clone(), beta: problem.beta.clone() }
    }

    pub fn family(&self) -> &CurveFamily {
        &self.family
    }

    pub fn beta(&self) -> &SkewnessSchedule {
        &self.beta
    }

    pub fn frame(&self, t: f64) -> Result<RemovalFrame> {
        self.family.check_time(t)?;
        Ok(self.frame_at(t))
    }

    pub(crate) fn frame_at(&self, t: f64) -> RemovalFrame {
        let xs = self.family.positions_at(t);
        let vs = self.family.velocities_at(t);
        let betas = self.beta.values_at(t);
        let dbetas = self.beta.derivatives_at(t);
        let n = xs.len();

        let mut slopes = Vec::with_capacity(n + 1);
        // s_k = Σ_{j≤k} q_j'/q_j, so Π_k' = Π_k s_k and A_k' = −A_k s_k.
        let mut log_rates = Vec::with_capacity(n + 1);
        slopes.push(1.0);
        log_rates.push(0.0);
        for k in 0..n {
            let b = betas[k];
            slopes.push(slopes[k] * (1.0 - b) / (1.0 + b));
            log_rates.push(log_rates[k] - 2.0 * dbetas[k] / (1.0 - b * b));
        }
        let inverse_slopes: Vec<f64> = slopes.iter().map(|p| 1.0 / p).collect();

        let mut ys = Vec::with_capacity(n);
        let mut dys = Vec::with_capacity(n);
        ys.push(0.0);
        dys.push(0.0);
        for i in 1..n {
            let (p, dp) = (slopes[i], slopes[i] * log_rates[i]);
            let len = xs[i] - xs[i - 1];
            ys.push(ys[i - 1] + p * len);
            dys.push(dys[i - 1] + dp * len + p * (vs[i] - vs[i - 1]));
        }

        let mut rt0 = Vec::with_capacity(n + 1);
        let mut rt1 = Vec::with_capacity(n + 1);
        rt0.push(vs[0]);
        rt1.push(0.0);
        for k in 1..=n {
            let a = inverse_slopes[k];
            let da = -a * log_rates[k];
            rt1.push(da);
            rt0.push(vs[k - 1] - da * ys[k - 1] - a * dys[k - 1]);
        }
        RemovalFrame { t, xs, ys, slopes, inverse_slopes, rt0, rt1 }
    }

    /// `μ(t, x)`
    pub fn mu(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.frame(t)?.mu(x))
    }

    /// `R(t, x)`
    pub fn big_r(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.frame(t)?.big_r(x))
    }

    /// `r(t, y)`, the exact inverse of `R(t, ·)`.
    pub fn little_r(&self, t: f64, y: f64) -> Result<f64> {
        Ok(self.frame(t)?.little_r(y))
    }

    /// `α(t, y) = ∏_{y_i ≤ y} (1+β_i)/(1−β_i)`
    pub fn alpha(&self, t: f64, y: f64) -> Result<f64> {
        Ok(self.frame(t)?.alpha(y))
    }

    /// `y_i(t)` for every interface; `y_1 ≡ 0`.
    pub fn transformed_curves(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.frame(t)?.ys)
    }

    /// `r'_y(t, y)` with the given convention on interfaces.
    pub fn r_y(&self, t: f64, y: f64, side: Side) -> Result<f64> {
        Ok(self.frame(t)?.r_y(y, side))
    }

    /// `r'_t(t, y)` by exact differentiation of the closed form.
    pub fn r_t(&self, t: f64, y: f64, side: Side) -> Result<f64> {
        Ok(self.frame(t)?.r_t(y, side))
    }

    /// `(R'_x(x_i+), R'_x(x_i−))` at interface `id`.
    pub fn big_r_x_onesided(&self, t: f64, id: usize) -> Result<(f64, f64)> {
        self.check_id(id)?;
        let f = self.frame(t)?;
        Ok((f.slopes[id], f.slopes[id - 1]))
    }

    /// `(r'_y(y_i+), r'_y(y_i−))` at interface `id`.
    pub fn little_r_y_onesided(&self, t: f64, id: usize) -> Result<(f64, f64)> {
        self.check_id(id)?;
        let f = self.frame(t)?;
        Ok((f.inverse_slopes[id], f.inverse_slopes[id - 1]))
    }

    fn check_id(&self, id: usize) -> Result<()> {
        if id == 0 || id > self.family.len() {
            return Err(Error::InterfaceIndex { index: id, count: self.family.len() });
        }
        Ok(())
    }
}

impl RemovalFrame {
    /// Segment of `x` (interfaces belong to the segment on their right).
    #[inline]
    pub fn locate_x(&self, x: f64) -> Location {
        locate(&self.xs, x, default_interface_tol(x))
    }

    #[inline]
    pub fn locate_y(&self, y: f64) -> Location {
        locate(&self.ys, y, default_interface_tol(y))
    }

    pub fn mu(&self, x: f64) -> f64 {
        self.slopes[self.locate_x(x).index]
    }

    pub fn alpha(&self, y: f64) -> f64 {
        self.inverse_slopes[self.locate_y(y).index]
    }

    #[inline]
    pub fn big_r(&self, x: f64) -> f64 {
        let k = locate(&self.xs, x, 0.0).index;
        self.big_r_on(k, x)
    }

    #[inline]
    pub(crate) fn big_r_on(&self, k: usize, x: f64) -> f64 {
        if k == 0 {
            x - self.xs[0]
        } else {
            self.ys[k - 1] + self.slopes[k] * (x - self.xs[k - 1])
        }
    }

    #[inline]
    pub fn little_r(&self, y: f64) -> f64 {
        let k = locate(&self.ys, y, 0.0).index;
        self.little_r_on(k, y)
    }

    #[inline]
    pub(crate) fn little_r_on(&self, k: usize, y: f64) -> f64 {
        if k == 0 {
            y + self.xs[0]
        } else {
            self.xs[k - 1] + self.inverse_slopes[k] * (y - self.ys[k - 1])
        }
    }

    pub fn r_y(&self, y: f64, side: Side) -> f64 {
        let loc = self.locate_y(y);
        match loc.on_interface {
            Some(id) => pick(side, self.inverse_slopes[id - 1], self.inverse_slopes[id]),
            None => self.inverse_slopes[loc.index],
        }
    }

    #[inline]
    pub(crate) fn r_t_on(&self, k: usize, y: f64) -> f64 {
        self.rt0[k] + self.rt1[k] * y
    }

    pub fn r_t(&self, y: f64, side: Side) -> f64 {
        let loc = self.locate_y(y);
        match loc.on_interface {
            Some(id) => pick(side, self.r_t_on(id - 1, y), self.r_t_on(id, y)),
            None => self.r_t_on(loc.index, y),
        }
    }
}

#[inline]
fn pick(side: Side, left: f64, right: f64) -> f64 {
    match side {
        Side::Left => left,
        Side::Right => right,
        Side::Symmetric => 0.5 * (left + right),
    }
}

/// The local-time-free SDE `dY = σ̄ dW + b̄ dt` with `σ̄ = σ∘r / r'_y` and
/// `b̄ = (b∘r − r'_t) / r'_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedProblem {
    problem: ProblemSpec,
    transform: RemovalTransform,
}

/// Interval bookkeeping for `σ̄ ∈ Θ(m̄, M̄)` and `b̄ ∈ Ξ(M̄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedBounds {
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `None` when some `β_i` varies in time: `r'_t` then grows linearly in `y`
    /// and `b̄` is only locally bounded.
    pub drift_bound: Option<f64>,
}

impl TransformedProblem {
    pub fn new(problem: &ProblemSpec) -> Self {
        Self { problem: problem.clone(), transform: RemovalTransform::from_problem(problem) }
    }

    pub fn transform(&self) -> &RemovalTransform {
        &self.transform
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    /// `(σ̄(t, y), b̄(t, y))`, symmetric averages on `y = y_i(t)`.
    pub fn coefficients(&self, t: f64, y: f64) -> Result<(f64, f64)> {
        let frame = self.transform.frame(t)?;
        Ok(self.coefficients_in(&frame, y))
    }

    pub fn sigma_bar(&self, t: f64, y: f64) -> Result<f64> {
        Ok(self.coefficients(t, y)?.0)
    }

    pub fn b_bar(&self, t: f64, y: f64) -> Result<f64> {
        Ok(self.coefficients(t, y)?.1)
    }

    #[inline]
    pub(crate) fn coefficients_in(&self, frame: &RemovalFrame, y: f64) -> (f64, f64) {
        let loc = frame.locate_y(y);
        let t = frame.t;
        match loc.on_interface {
            None => {
                let k = loc.index;
                let x = frame.little_r_on(k, y);
                let a = frame.inverse_slopes[k];
                let s = self.problem.sigma.piece(k).value(t, x);
                let b = self.problem.drift.piece(k).value(t, x);
                (s / a, (b - frame.r_t_on(k, y)) / a)
            }
            Some(id) => {
                let x = frame.xs[id - 1];
                let a = 0.5 * (frame.inverse_slopes[id - 1] + frame.inverse_slopes[id]);
                let rt = 0.5 * (frame.r_t_on(id - 1, y) + frame.r_t_on(id, y));
                let s = self.problem.sigma.value_at_interface(id, t, x, Side::Symmetric);
                let b = self.problem.drift.value_at_interface(id, t, x, Side::Symmetric);
                (s / a, (b - rt) / a)
            }
        }
    }

    /// Certified ranges for the transformed coefficients, sampling `r'_t` on `n_t` instants.
    pub fn bounds(&self, n_t: usize) -> Result<TransformedBounds> {
        let report = self.problem.beta.report(n_t.max(2))?;
        let (sm, s_big) = match self.problem.sigma.class() {
            crate::CoefficientClass::Diffusion { m, big_m } => (m, big_m),
            _ => return Err(Error::InvalidCoefficient("sigma has no Θ class".into())),
        };
        let b_big = match self.problem.drift.class() {
            crate::CoefficientClass::Drift { big_m } => big_m,
            _ => return Err(Error::InvalidCoefficient("drift has no Ξ class".into())),
        };
        let n = self.problem.family().len() as i32;
        // q = (1−β)/(1+β) is decreasing in β.
        let q_lo = (1.0 - report.kappa) / (1.0 + report.kappa);
        let q_hi = (1.0 - report.k) / (1.0 + report.k);
        let pi_min = (1.0f64).min(q_lo).min(math::powi(q_lo, n));
        let pi_max = (1.0f64).max(q_hi).max(math::powi(q_hi, n));
        let drift_bound = if report.derivative_bound == 0.0 {
            let horizon = self.problem.horizon();
            let mut rt_max: f64 = 0.0;
            for j in 0..n_t.max(2) {
                let f = self.transform.frame_at(horizon * j as f64 / (n_t.max(2) - 1) as f64);
                rt_max = f.rt0.iter().fold(rt_max, |m, v| m.max(math::abs(*v)));
            }
            Some((b_big + rt_max) * pi_max)
        } else {
            None
        };
        Ok(TransformedBounds { sigma_min: sm * pi_min, sigma_max: s_big * pi_max, drift_bound })
    }
}
