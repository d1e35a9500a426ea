use alloc::vec::Vec;

use crate::coefficients::ProblemSpec;
use crate::error::{Error, Result};
use crate::functions::CatalogFn;
use crate::math;
use crate::pde_solver::{straighten_problem, GridParams, TransmissionPDE};
use crate::rng::derive_seed;
use crate::simulator::{PathOutcome, SimConfig, Simulator};
use crate::stats::MeanEstimate;

/// Monte Carlo sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
}

/// `u(t, x) ≈ mean ± std_error`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FKEstimate {
    pub t: f64,
    pub x: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub n_paths: usize,
    /// Paths abandoned on a non-finite state (excluded from the mean).
    pub aborted: usize,
}

/// Monte Carlo estimate of
/// `E^{t,x}[f(X_T) e^{−λ(T−t)} − ∫_t^T g(s, X_s) e^{−λ(s−t)} ds]`
/// with the time integral by the trapezoid rule on the simulation grid.
pub fn feynman_kac_mc(
    problem: &ProblemSpec,
    lambda: f64,
    f: &CatalogFn,
    g: &CatalogFn,
    t: f64,
    x: f64,
    mc: &McConfig,
) -> Result<FKEstimate> {
    if mc.n_paths == 0 {
        return Err(Error::InvalidParameter("Feynman–Kac estimate needs at least one path".into()));
    }
    let horizon = problem.horizon();
    if t == horizon {
        return Ok(FKEstimate { t, x, estimate: f.value(x), std_error: 0.0, n_paths: mc.n_paths, aborted: 0 });
    }
    let sim = Simulator::new(problem, SimConfig::new(mc.n_paths, mc.n_steps, mc.seed).starting_at(t, x))?;
    let dt = sim.dt();
    let skip_source = g.is_zero();
    let discount: Vec<f64> = sim.times().iter().map(|&s| math::exp(-lambda * (s - t))).collect();
    let samples = sim.map_paths(|p| {
        let mut integral = 0.0;
        let mut prev = 0.0;
        let mut last = x;
        let outcome = sim.run_path(p, |j, s, xs, _| {
            if !skip_source {
                let v = g.eval(s, xs) * discount[j];
                if j > 0 {
                    integral += 0.5 * dt * (prev + v);
                }
                prev = v;
            }
            last = xs;
        });
        match outcome {
            PathOutcome::Completed => Some(f.value(last) * math::exp(-lambda * (horizon - t)) - integral),
            PathOutcome::NonFinite { .. } => None,
        }
    });
    let values: Vec<f64> = samples.iter().flatten().copied().collect();
    let est = MeanEstimate::from_samples(&values);
    Ok(FKEstimate {
        t,
        x,
        estimate: est.mean,
        std_error: est.std_error,
        n_paths: values.len(),
        aborted: mc.n_paths - values.len(),
    })
}

/// `pass ⇔ |u_PDE − u_MC| ≤ k_se·se + c_grid·(h² + Δt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkTolerance {
    pub k_se: f64,
    pub c_grid: f64,
}

impl Default for FkTolerance {
    fn default() -> Self {
        Self { k_se: 3.0, c_grid: 5.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub t: f64,
    pub x: f64,
    pub u_pde: f64,
    pub u_mc: f64,
    pub se: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub pass: bool,
    pub k_se: f64,
    /// `ε_grid = c_grid·(h² + Δt)`
    pub eps_grid: f64,
    /// Cell width `2L/N` and time step `T/M` of the PDE grid.
    pub h: f64,
    pub dt: f64,
}

/// Feynman–Kac Monte Carlo against the PDE solution at `points`.
#[allow(clippy::too_many_arguments)]
pub fn compare_fk(
    problem: &ProblemSpec,
    lambda: f64,
    f: &CatalogFn,
    g: &CatalogFn,
    points: &[(f64, f64)],
    mc: &McConfig,
    grid: &GridParams,
    tolerance: &FkTolerance,
) -> Result<ComparisonReport> {
    compare_fk_with(problem, problem, lambda, f, g, points, mc, grid, tolerance)
}

/// As [`compare_fk`], with possibly different problems on the two sides
/// (negative controls).
#[allow(clippy::too_many_arguments)]
pub fn compare_fk_with(
    problem_mc: &ProblemSpec,
    problem_pde: &ProblemSpec,
    lambda: f64,
    f: &CatalogFn,
    g: &CatalogFn,
    points: &[(f64, f64)],
    mc: &McConfig,
    grid: &GridParams,
    tolerance: &FkTolerance,
) -> Result<ComparisonReport> {
    let pde = TransmissionPDE::from_problem(problem_pde, lambda, *f, *g)?;
    let solution = straighten_problem(&pde)?.solve(grid)?;
    let h = 2.0 * grid.half_width / grid.n_cells as f64;
    let dt = problem_pde.horizon() / grid.n_steps as f64;
    let eps_grid = tolerance.c_grid * (h * h + dt);
    let mut rows = Vec::with_capacity(points.len());
    for (k, &(t, x)) in points.iter().enumerate() {
        let u_pde = solution.evaluate_u(t, x)?;
        let point_mc = McConfig { seed: derive_seed(mc.seed, k as u64), ..*mc };
        let est = feynman_kac_mc(problem_mc, lambda, f, g, t, x, &point_mc)?;
        let gap = u_pde - est.estimate;
        let tol = tolerance.k_se * est.std_error + eps_grid;
        rows.push(ComparisonRow {
            t,
            x,
            u_pde,
            u_mc: est.estimate,
            se: est.std_error,
            gap,
            tolerance: tol,
            pass: math::abs(gap) <= tol,
        });
    }
    Ok(ComparisonReport { pass: rows.iter().all(|r| r.pass), rows, k_se: tolerance.k_se, eps_grid, h, dt })
}

impl ComparisonReport {
    /// CSV `t,x,u_pde,u_mc,se,gap,tolerance,pass`.
    pub fn write_csv<W: core::fmt::Write>(&self, out: &mut W) -> core::fmt::Result {
        writeln!(out, "t,x,u_pde,u_mc,se,gap,tolerance,pass")?;
        for r in &self.rows {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.t, r.x, r.u_pde, r.u_mc, r.se, r.gap, r.tolerance, r.pass
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_functionals_are_exact() {
        let p = ProblemSpec::skew_brownian(1.0 / 3.0, 0.0, 0.0, 1.0).unwrap();
        let mc = McConfig { n_paths: 50, n_steps: 20, seed: 1 };
        let one = CatalogFn::Constant { c: 1.0 };
        let e = feynman_kac_mc(&p, 0.0, &one, &CatalogFn::Zero, 0.0, 0.3, &mc).unwrap();
        assert_eq!((e.estimate, e.std_error), (1.0, 0.0));
        let e = feynman_kac_mc(&p, 0.7, &one, &CatalogFn::Zero, 0.25, 0.3, &mc).unwrap();
        assert!((e.estimate - (-0.7f64 * 0.75).exp()).abs() < 1e-15);
        assert_eq!(e.std_error, 0.0);
    }
}
