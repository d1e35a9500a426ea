use alloc::vec::Vec;

use crate::coefficients::ProblemSpec;
use crate::error::{Error, Result};
use crate::functions::CatalogFn;
use crate::math;
use crate::rng::derive_seed;
use crate::simulator::{SimConfig, Simulator};
use crate::stats::MeanEstimate;

/// Two-stage evolution test on `s < u < t`.
///
/// The second stage restarts from a coarse grid of intermediate states
/// (spacing `grid_spacing` over `[min x − grid_half_width, max x + grid_half_width]`,
/// plus the interface positions at `u`) with `n_inner` paths per node;
/// `v(z) = E^{u,z} φ(X_t)` is linearly interpolated in between and held
/// constant outside.
#[derive(Debug, Clone, PartialEq)]
pub struct CkConfig {
    pub s: f64,
    pub u: f64,
    pub t: f64,
    pub start_points: Vec<f64>,
    /// Steps over `[s, t]`; `u` must fall on the grid.
    pub n_steps: usize,
    /// Paths of the direct route and of the first stage.
    pub n_paths: usize,
    pub n_inner: usize,
    pub grid_spacing: f64,
    pub grid_half_width: f64,
    pub seed: u64,
    pub k_se: f64,
}

impl CkConfig {
    pub fn new(s: f64, u: f64, t: f64, start_points: Vec<f64>, n_paths: usize, seed: u64) -> Self {
        Self {
            s,
            u,
            t,
            start_points,
            n_steps: 200,
            n_paths,
            n_inner: 2000,
            grid_spacing: 0.05,
            grid_half_width: 4.0,
            seed,
            k_se: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkRow {
    pub x: f64,
    /// Index into the test-function list.
    pub function: usize,
    pub direct: f64,
    pub direct_se: f64,
    pub two_stage: f64,
    pub two_stage_se: f64,
    pub defect: f64,
    pub combined_se: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CkReport {
    pub rows: Vec<CkRow>,
    pub max_defect: f64,
    pub pass: bool,
    pub k_se: f64,
    pub grid_nodes: usize,
}

/// Compares `E^{s,x} φ(X_t)` with `E^{s,x} E^{u,X_u} φ(X_t)`.
pub fn chapman_kolmogorov_test(problem: &ProblemSpec, phis: &[CatalogFn], cfg: &CkConfig) -> Result<CkReport> {
    let horizon = problem.horizon();
    if !(cfg.s >= 0.0 && cfg.s < cfg.u && cfg.u < cfg.t && cfg.t <= horizon) {
        return Err(Error::InvalidParameter(alloc::format!(
            "need 0 ≤ s < u < t ≤ T, got s={}, u={}, t={}, T={horizon}",
            cfg.s,
            cfg.u,
            cfg.t
        )));
    }
    if cfg.n_paths < 2 || cfg.n_inner < 2 || cfg.n_steps == 0 || phis.is_empty() || cfg.start_points.is_empty() {
        return Err(Error::InvalidParameter(
            "Chapman–Kolmogorov test needs paths, steps, functions and start points".into(),
        ));
    }
    if !(cfg.grid_spacing > 0.0 && cfg.grid_half_width > 0.0) {
        return Err(Error::InvalidParameter("grid spacing and half-width must be positive".into()));
    }
    let dt = (cfg.t - cfg.s) / cfg.n_steps as f64;
    let first = (cfg.u - cfg.s) / dt;
    let n_first = libm::round(first) as usize;
    if math::abs(first - n_first as f64) > 1e-9 * first.max(1.0) || n_first == 0 || n_first >= cfg.n_steps {
        return Err(Error::InvalidParameter(alloc::format!("u = {} is not on the time grid of step {dt}", cfg.u)));
    }
    let n_second = cfg.n_steps - n_first;
    problem.validate(&problem.default_grid())?;

    // Second stage: v(z) on the coarse grid, shared by every start point.
    let lo = cfg.start_points.iter().copied().fold(f64::INFINITY, f64::min) - cfg.grid_half_width;
    let hi = cfg.start_points.iter().copied().fold(f64::NEG_INFINITY, f64::max) + cfg.grid_half_width;
    let count = libm::ceil((hi - lo) / cfg.grid_spacing) as usize;
    let mut nodes: Vec<f64> = (0..=count).map(|k| lo + k as f64 * cfg.grid_spacing).collect();
    nodes.extend(problem.family().positions_at(cfg.u).into_iter().filter(|&c| c > lo && c < hi));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| math::abs(*a - *b) < 1e-12);

    let inner_seed = derive_seed(cfg.seed, 2);
    let mut inner: Vec<Vec<MeanEstimate>> = Vec::with_capacity(nodes.len());
    for (k, &z) in nodes.iter().enumerate() {
        let sim = Simulator::new_unchecked(
            problem,
            SimConfig::new(cfg.n_inner, n_second, derive_seed(inner_seed, k as u64))
                .starting_at(cfg.u, z)
                .stopping_at(cfg.t),
        )?;
        let terminals: Vec<f64> = sim.terminal_values().into_iter().filter(|x| x.is_finite()).collect();
        inner.push(
            phis.iter()
                .map(|phi| {
                    MeanEstimate::from_samples(&terminals.iter().map(|&x| phi.eval(cfg.t, x)).collect::<Vec<_>>())
                })
                .collect(),
        );
    }

    let mut rows = Vec::new();
    for (i, &x) in cfg.start_points.iter().enumerate() {
        let direct_sim = Simulator::new_unchecked(
            problem,
            SimConfig::new(cfg.n_paths, cfg.n_steps, derive_seed(derive_seed(cfg.seed, 0), i as u64))
                .starting_at(cfg.s, x)
                .stopping_at(cfg.t),
        )?;
        let direct: Vec<f64> = direct_sim.terminal_values().into_iter().filter(|v| v.is_finite()).collect();
        let first_sim = Simulator::new_unchecked(
            problem,
            SimConfig::new(cfg.n_paths, n_first, derive_seed(derive_seed(cfg.seed, 1), i as u64))
                .starting_at(cfg.s, x)
                .stopping_at(cfg.u),
        )?;
        let middle: Vec<f64> = first_sim.terminal_values().into_iter().filter(|v| v.is_finite()).collect();
        let weights: Vec<(usize, f64)> = middle.iter().map(|&z| bracket(&nodes, z)).collect();

        for (f, phi) in phis.iter().enumerate() {
            let d = MeanEstimate::from_samples(&direct.iter().map(|&v| phi.eval(cfg.t, v)).collect::<Vec<_>>());
            let values: Vec<f64> = inner.iter().map(|row| row[f].mean).collect();
            let staged: Vec<f64> = weights.iter().map(|&(k, w)| interpolate(&values, k, w)).collect();
            let outer = MeanEstimate::from_samples(&staged);
            // Inner noise: the estimator is Σ_k w̄_k v_k with independent v_k.
            let mut mean_w = alloc::vec![0.0; nodes.len()];
            for &(k, w) in &weights {
                mean_w[k] += 1.0 - w;
                if w > 0.0 {
                    mean_w[k + 1] += w;
                }
            }
            let n = weights.len().max(1) as f64;
            let inner_var: f64 =
                mean_w.iter().zip(&inner).map(|(w, row)| (w / n) * (w / n) * row[f].std_error * row[f].std_error).sum();
            let two_se = math::sqrt(outer.std_error * outer.std_error + inner_var);
            let combined = math::sqrt(d.std_error * d.std_error + two_se * two_se);
            let defect = math::abs(d.mean - outer.mean);
            rows.push(CkRow {
                x,
                function: f,
                direct: d.mean,
                direct_se: d.std_error,
                two_stage: outer.mean,
                two_stage_se: two_se,
                defect,
                combined_se: combined,
                pass: defect <= cfg.k_se * combined,
            });
        }
    }
    Ok(CkReport {
        max_defect: rows.iter().map(|r| r.defect).fold(0.0, f64::max),
        pass: rows.iter().all(|r| r.pass),
        rows,
        k_se: cfg.k_se,
        grid_nodes: nodes.len(),
    })
}

/// `(k, w)` with `z ≈ (1−w)·nodes[k] + w·nodes[k+1]`, clamped to the ends.
fn bracket(nodes: &[f64], z: f64) -> (usize, f64) {
    let last = nodes.len() - 1;
    if !(z > nodes[0]) {
        return (0, 0.0);
    }
    if z >= nodes[last] {
        return (last, 0.0);
    }
    let k = nodes.partition_point(|&n| n <= z) - 1;
    (k, (z - nodes[k]) / (nodes[k + 1] - nodes[k]))
}

#[inline]
fn interpolate(values: &[f64], k: usize, w: f64) -> f64 {
    if w == 0.0 {
        values[k]
    } else {
        values[k] + w * (values[k + 1] - values[k])
    }
}
