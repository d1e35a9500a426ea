//! Euler–Maruyama on the local-time-free SDE `dY = σ̄ dW + b̄ dt`, mapped back
//! through `X = r(t, Y)`, plus path functionals (local time, occupation,
//! coupled strong-error probe).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::coefficients::{ProblemSpec, Side};
use crate::error::{Error, Result};
use crate::geometry::InterfaceCurve;
use crate::math;
use crate::par;
use crate::rng::NormalStream;
use crate::transform::{RemovalFrame, TransformedProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Euler–Maruyama on `Y = R(t, X)`, never discretising `dL` directly.
    #[default]
    EulerTransformed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// Start time `s ∈ [0, T)`.
    pub start_time: f64,
    /// Start position; the problem's `x0` when `None`.
    pub start: Option<f64>,
    /// Final time of the grid; the horizon `T` when `None`.
    pub stop: Option<f64>,
    pub scheme: Scheme,
}

impl SimConfig {
    pub fn new(n_paths: usize, n_steps: usize, seed: u64) -> Self {
        Self { n_paths, n_steps, seed, start_time: 0.0, start: None, stop: None, scheme: Scheme::EulerTransformed }
    }

    pub fn starting_at(mut self, s: f64, x: f64) -> Self {
        self.start_time = s;
        self.start = Some(x);
        self
    }

    pub fn stopping_at(mut self, t: f64) -> Self {
        self.stop = Some(t);
        self
    }
}

/// Result of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathOutcome {
    Completed,
    /// The state became non-finite at this step; the path was abandoned.
    NonFinite {
        step: usize,
    },
}

/// A prepared Euler scheme: time grid and frozen transform frames per step.
#[derive(Debug, Clone)]
pub struct Simulator {
    transformed: TransformedProblem,
    config: SimConfig,
    times: Vec<f64>,
    frames: Vec<RemovalFrame>,
    x0: f64,
    y0: f64,
    dt: f64,
    sqrt_dt: f64,
}

impl Simulator {
    /// Validates the problem and the configuration and precomputes the frames.
    pub fn new(problem: &ProblemSpec, config: SimConfig) -> Result<Self> {
        problem.validate(&problem.default_grid())?;
        Self::new_unchecked(problem, config)
    }

    /// As [`Simulator::new`] without re-running the sampled hypothesis checks.
    pub fn new_unchecked(problem: &ProblemSpec, config: SimConfig) -> Result<Self> {
        if config.n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
        }
        let horizon = problem.horizon();
        let s = config.start_time;
        if !(s >= 0.0 && s < horizon) {
            return Err(Error::TimeOutOfRange { t: s, horizon });
        }
        let end = config.stop.unwrap_or(horizon);
        if !(end > s && end <= horizon) {
            return Err(Error::TimeOutOfRange { t: end, horizon });
        }
        let x0 = config.start.unwrap_or(problem.x0);
        if !x0.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("start position must be finite, got {x0}")));
        }
        let transformed = TransformedProblem::new(problem);
        let n = config.n_steps;
        let dt = (end - s) / n as f64;
        let mut times: Vec<f64> = (0..=n).map(|j| s + j as f64 * dt).collect();
        times[n] = end;
        let frames: Vec<RemovalFrame> = times.iter().map(|&t| transformed.transform().frame_at(t)).collect();
        let y0 = frames[0].big_r(x0);
        Ok(Self { transformed, config, times, frames, x0, y0, dt, sqrt_dt: math::sqrt(dt) })
    }

    pub fn problem(&self) -> &ProblemSpec {
        self.transformed.problem()
    }

    pub fn transformed(&self) -> &TransformedProblem {
        &self.transformed
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn start(&self) -> (f64, f64) {
        (self.times[0], self.x0)
    }

    pub fn frame(&self, step: usize) -> &RemovalFrame {
        &self.frames[step]
    }

    /// Runs path `path` with the counter-based normals of `(seed, path)`,
    /// calling `visit(step, t, x, y)` on every state including the start.
    pub fn run_path(&self, path: usize, visit: impl FnMut(usize, f64, f64, f64)) -> PathOutcome {
        let mut normals = NormalStream::new(self.config.seed, path as u64, 0);
        let sqrt_dt = self.sqrt_dt;
        self.run_with(|_| sqrt_dt * normals.next_normal(), visit)
    }

    /// Runs one path with caller-supplied Brownian increments (`increments.len() == n_steps`).
    pub fn run_with_increments(
        &self,
        increments: &[f64],
        visit: impl FnMut(usize, f64, f64, f64),
    ) -> Result<PathOutcome> {
        if increments.len() != self.config.n_steps {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} increments for {} steps",
                increments.len(),
                self.config.n_steps
            )));
        }
        Ok(self.run_with(|j| increments[j], visit))
    }

    #[inline]
    fn run_with(
        &self,
        mut increment: impl FnMut(usize) -> f64,
        mut visit: impl FnMut(usize, f64, f64, f64),
    ) -> PathOutcome {
        let mut y = self.y0;
        visit(0, self.times[0], self.x0, y);
        for j in 0..self.config.n_steps {
            let (s, b) = self.transformed.coefficients_in(&self.frames[j], y);
            y += s * increment(j) + b * self.dt;
            if !y.is_finite() {
                return PathOutcome::NonFinite { step: j + 1 };
            }
            let x = self.frames[j + 1].little_r(y);
            visit(j + 1, self.times[j + 1], x, y);
        }
        PathOutcome::Completed
    }

    /// Maps every path index through `f` (in parallel with the `parallel` feature),
    /// preserving path order in the output.
    pub fn map_paths<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        par::map_indices(self.config.n_paths, f)
    }

    /// `X_T` for every path; `NaN` for abandoned paths.
    pub fn terminal_values(&self) -> Vec<f64> {
        self.map_paths(|p| {
            let mut last = f64::NAN;
            match self.run_path(p, |_, _, x, _| last = x) {
                PathOutcome::Completed => last,
                PathOutcome::NonFinite { .. } => f64::NAN,
            }
        })
    }

    /// Stores every state of every path.
    pub fn simulate(&self) -> PathEnsemble {
        let width = self.config.n_steps + 1;
        let rows = self.map_paths(|p| {
            let mut xs = vec![f64::NAN; width];
            let mut ys = vec![f64::NAN; width];
            let outcome = self.run_path(p, |j, _, x, y| {
                xs[j] = x;
                ys[j] = y;
            });
            (xs, ys, outcome)
        });
        let mut x = Vec::with_capacity(width * rows.len());
        let mut y = Vec::with_capacity(width * rows.len());
        let mut aborted = Vec::new();
        for (p, (xs, ys, outcome)) in rows.into_iter().enumerate() {
            if let PathOutcome::NonFinite { step } = outcome {
                aborted.push((p, step));
                // Partial states are kept; the rest of the row stays NaN.
            }
            x.extend_from_slice(&xs);
            y.extend_from_slice(&ys);
        }
        PathEnsemble { times: self.times.clone(), n_paths: self.config.n_paths, x, y, seed: self.config.seed, aborted }
    }
}

/// Simulated paths of `X` and of `Y = R(t, X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub times: Vec<f64>,
    pub n_paths: usize,
    /// Row-major `n_paths × (n_steps + 1)`.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub seed: u64,
    /// `(path, step)` of every abandoned path.
    pub aborted: Vec<(usize, usize)>,
}

impl PathEnsemble {
    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn x_path(&self, path: usize) -> &[f64] {
        let w = self.times.len();
        &self.x[path * w..(path + 1) * w]
    }

    pub fn y_path(&self, path: usize) -> &[f64] {
        let w = self.times.len();
        &self.y[path * w..(path + 1) * w]
    }

    pub fn terminal_x(&self) -> Vec<f64> {
        (0..self.n_paths).map(|p| *self.x_path(p).last().unwrap()).collect()
    }

    /// CSV with header `path,step,t,x,y`, 17 significant digits.
    pub fn write_csv<W: fmt::Write>(&self, out: &mut W) -> fmt::Result {
        writeln!(out, "path,step,t,x,y")?;
        for p in 0..self.n_paths {
            let (xs, ys) = (self.x_path(p), self.y_path(p));
            for (j, t) in self.times.iter().enumerate() {
                writeln!(out, "{p},{j},{t:.16e},{:.16e},{:.16e}", xs[j], ys[j])?;
            }
        }
        Ok(())
    }

    /// Row-major little-endian `f64` rows `(path, step, t, x, y)`.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.x.len() * 40);
        for p in 0..self.n_paths {
            let (xs, ys) = (self.x_path(p), self.y_path(p));
            for (j, t) in self.times.iter().enumerate() {
                for v in [p as f64, j as f64, *t, xs[j], ys[j]] {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }
}

/// Quadratic-variation increment used by the local-time estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QvIncrement {
    /// `σ²(t_j, X_j)·Δt`
    #[default]
    SigmaSquared,
    /// `(X_{j+1} − X_j)²`
    SquaredIncrement,
}

/// Streaming estimator `L̂_t = (1/2ε) Σ_{t_j < t} 1{|X_j − γ(t_j)| < ε}·ΔQV_j`.
#[derive(Debug, Clone)]
pub struct LocalTimeAccumulator<'a> {
    problem: &'a ProblemSpec,
    gamma: InterfaceCurve,
    epsilon: f64,
    mode: QvIncrement,
    prev: Option<(f64, f64)>,
    value: f64,
    positions: Vec<f64>,
}

impl<'a> LocalTimeAccumulator<'a> {
    /// Local time on interface `curve` (1-based) of the problem's family.
    pub fn new(problem: &'a ProblemSpec, curve: usize, epsilon: f64, mode: QvIncrement) -> Result<Self> {
        let gamma = *problem.family().curve(curve)?;
        Self::on_curve(problem, gamma, epsilon, mode)
    }

    /// Local time on an arbitrary curve `γ`.
    pub fn on_curve(problem: &'a ProblemSpec, gamma: InterfaceCurve, epsilon: f64, mode: QvIncrement) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { problem, gamma, epsilon, mode, prev: None, value: 0.0, positions: Vec::new() })
    }

    /// Feeds the next state; returns `L̂` at time `t`.
    #[inline]
    pub fn observe(&mut self, t: f64, x: f64) -> f64 {
        if let Some((tp, xp)) = self.prev {
            let gamma = self.gamma.value_at(tp);
            if math::abs(xp - gamma) < self.epsilon {
                let qv = match self.mode {
                    QvIncrement::SigmaSquared => {
                        self.positions.clear();
                        self.positions.extend(self.problem.family().curves().iter().map(|c| c.value_at(tp)));
                        let s = self.problem.sigma.value_at(&self.positions, tp, xp, Side::Symmetric);
                        s * s * (t - tp)
                    }
                    QvIncrement::SquaredIncrement => (x - xp) * (x - xp),
                };
                self.value += qv / (2.0 * self.epsilon);
            }
        }
        self.prev = Some((t, x));
        self.value
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn reset(&mut self) {
        self.prev = None;
        self.value = 0.0;
    }
}

/// Cumulative `L̂` along every stored path of `ensemble` for curve `curve` (1-based).
pub fn estimate_local_time(
    ensemble: &PathEnsemble,
    problem: &ProblemSpec,
    curve: usize,
    epsilon: f64,
    mode: QvIncrement,
) -> Result<Vec<Vec<f64>>> {
    let mut acc = LocalTimeAccumulator::new(problem, curve, epsilon, mode)?;
    Ok((0..ensemble.n_paths)
        .map(|p| {
            acc.reset();
            ensemble.x_path(p).iter().zip(&ensemble.times).map(|(&x, &t)| acc.observe(t, x)).collect()
        })
        .collect())
}

/// Fraction of `(path, step ≥ 1)` states within `tol` of some interface.
pub fn interface_occupation(ensemble: &PathEnsemble, problem: &ProblemSpec, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("occupation tolerance must be positive, got {tol}")));
    }
    let positions: Vec<Vec<f64>> = ensemble.times.iter().map(|&t| problem.family().positions_at(t)).collect();
    let (mut hits, mut total) = (0usize, 0usize);
    for p in 0..ensemble.n_paths {
        for (j, &x) in ensemble.x_path(p).iter().enumerate().skip(1) {
            if !x.is_finite() {
                continue;
            }
            total += 1;
            if positions[j].iter().any(|&c| math::abs(x - c) <= tol) {
                hits += 1;
            }
        }
    }
    Ok(if total == 0 { 0.0 } else { hits as f64 / total as f64 })
}

/// Coupled multi-level RMS differences of `X_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongErrorReport {
    /// Steps per level, `base·2^l`.
    pub steps: Vec<usize>,
    /// `rms[l] = RMS(X^{(l)}_T − X^{(l+1)}_T)`.
    pub rms: Vec<f64>,
    /// Least-squares slope of `−log₂ rms` against level, when at least two differences exist.
    pub order: Option<f64>,
    pub n_paths: usize,
    pub aborted: usize,
}

impl StrongErrorReport {
    /// Nonincreasing up to `slack` (relative) per consecutive pair, at most `allowed` violations.
    pub fn is_nonincreasing(&self, slack: f64, allowed: usize) -> bool {
        let violations = self.rms.windows(2).filter(|w| w[1] > w[0] * (1.0 + slack)).count();
        let inversions = self.rms.windows(2).filter(|w| w[1] > w[0]).count();
        violations == 0 && inversions <= allowed
    }
}

/// Simulates each path on `levels` nested grids with shared Brownian paths
/// (coarse increments are sums of the finest ones).
pub fn strong_error_probe(
    problem: &ProblemSpec,
    base_steps: usize,
    levels: usize,
    n_paths: usize,
    seed: u64,
) -> Result<StrongErrorReport> {
    if levels < 2 {
        return Err(Error::InvalidParameter("strong error probe needs at least 2 levels".into()));
    }
    if n_paths == 0 || base_steps == 0 {
        return Err(Error::InvalidParameter("strong error probe needs paths and steps".into()));
    }
    problem.validate(&problem.default_grid())?;
    let steps: Vec<usize> = (0..levels).map(|l| base_steps << l).collect();
    let sims = steps
        .iter()
        .map(|&n| Simulator::new_unchecked(problem, SimConfig::new(n_paths, n, seed)))
        .collect::<Result<Vec<_>>>()?;
    let fine = *steps.last().unwrap();
    let dt_fine = problem.horizon() / fine as f64;
    let sqrt_dt = math::sqrt(dt_fine);

    let rows: Vec<Option<Vec<f64>>> = par::map_indices(n_paths, |p| {
        let mut z = vec![0.0; fine];
        NormalStream::new(seed, p as u64, 0).fill(&mut z);
        let mut terminals = Vec::with_capacity(levels);
        for (l, sim) in sims.iter().enumerate() {
            let group = 1usize << (levels - 1 - l);
            let dw: Vec<f64> = z.chunks(group).map(|c| c.iter().sum::<f64>() * sqrt_dt).collect();
            let mut last = f64::NAN;
            match sim.run_with_increments(&dw, |_, _, x, _| last = x) {
                Ok(PathOutcome::Completed) => terminals.push(last),
                _ => return None,
            }
        }
        Some(terminals)
    });

    let mut sums = vec![0.0; levels - 1];
    let mut used = 0usize;
    for row in rows.iter().flatten() {
        used += 1;
        for l in 0..levels - 1 {
            let d = row[l] - row[l + 1];
            sums[l] += d * d;
        }
    }
    let rms: Vec<f64> = sums.iter().map(|s| math::sqrt(s / used.max(1) as f64)).collect();
    let order = (rms.len() >= 2).then(|| {
        // Regress log2(rms) on the level index.
        let n = rms.len() as f64;
        let xm = (n - 1.0) / 2.0;
        let ym = rms.iter().map(|r| math::log2(*r)).sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (l, r) in rms.iter().enumerate() {
            let dx = l as f64 - xm;
            sxy += dx * (math::log2(*r) - ym);
            sxx += dx * dx;
        }
        -sxy / sxx
    });
    Ok(StrongErrorReport { steps, rms, order, n_paths, aborted: n_paths - used })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_steps_is_an_error() {
        let p = ProblemSpec::skew_brownian(0.0, 0.0, 0.0, 1.0).unwrap();
        assert!(Simulator::new(&p, SimConfig::new(1, 0, 1)).is_err());
        assert!(Simulator::new(&p, SimConfig::new(1, 4, 1).starting_at(1.0, 0.0)).is_err());
    }

    #[test]
    fn deterministic_and_round_trip() {
        let p = ProblemSpec::skew_brownian(1.0 / 3.0, 0.0, 0.0, 1.0).unwrap();
        let sim = Simulator::new(&p, SimConfig::new(20, 50, 7)).unwrap();
        let a = sim.simulate();
        let b = sim.simulate();
        assert_eq!(a, b);
        for p in 0..a.n_paths {
            for (j, (&x, &y)) in a.x_path(p).iter().zip(a.y_path(p)).enumerate() {
                let back = sim.frame(j).little_r(y);
                assert!((x - back).abs() <= 1e-10 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn local_time_is_nondecreasing_and_zero_away() {
        let p = ProblemSpec::skew_brownian(0.0, 0.0, 0.0, 1.0).unwrap();
        let sim = Simulator::new(&p, SimConfig::new(10, 100, 3)).unwrap();
        let ens = sim.simulate();
        let lt = estimate_local_time(&ens, &p, 1, 0.1, QvIncrement::SigmaSquared).unwrap();
        for path in &lt {
            assert!(path.windows(2).all(|w| w[1] >= w[0]));
        }
        assert!(estimate_local_time(&ens, &p, 1, 0.0, QvIncrement::SigmaSquared).is_err());

        let far = ProblemSpec::skew_brownian(0.0, 50.0, 0.0, 1.0).unwrap();
        let ens = Simulator::new(&far, SimConfig::new(5, 100, 3)).unwrap().simulate();
        let lt = estimate_local_time(&ens, &far, 1, 0.1, QvIncrement::SigmaSquared).unwrap();
        assert!(lt.iter().all(|p| p.iter().all(|&v| v == 0.0)));
        assert_eq!(interface_occupation(&ens, &far, 0.01).unwrap(), 0.0);
        assert!(interface_occupation(&ens, &far, 0.0).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let p = ProblemSpec::skew_brownian(0.2, 0.0, 0.0, 1.0).unwrap();
        let ens = Simulator::new(&p, SimConfig::new(2, 3, 1)).unwrap().simulate();
        let mut s = alloc::string::String::new();
        ens.write_csv(&mut s).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "path,step,t,x,y");
        assert_eq!(lines.len(), 1 + 2 * 4);
        assert_eq!(ens.to_le_bytes().len(), 2 * 4 * 5 * 8);
    }

    #[test]
    fn strong_probe_preconditions() {
        let p = ProblemSpec::skew_brownian(0.0, 0.0, 0.0, 1.0).unwrap();
        assert!(strong_error_probe(&p, 8, 1, 10, 1).is_err());
        assert!(strong_error_probe(&p, 8, 3, 0, 1).is_err());
        // Euler is exact for Brownian motion: all levels agree up to summation round-off.
        let r = strong_error_probe(&p, 8, 3, 50, 1).unwrap();
        assert!(r.rms.iter().all(|&v| v < 1e-12));
    }
}
