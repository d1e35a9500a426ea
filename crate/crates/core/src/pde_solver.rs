//! Backward transmission problem in divergence form,
//!
//! ```text
//! u_t + (ρ/2)(a u_x)_x + B u_x − λu = g,   u(T, ·) = f,
//! a(x_i+) u_x(x_i+) = a(x_i−) u_x(x_i−)   on every interface,
//! ```
//!
//! solved on straightened coordinates `x̂ = Ψ(t, x)` (interfaces at integers)
//! with a vertex-centred finite-volume θ-scheme. Interfaces are grid nodes,
//! so no face straddles a discontinuity of `a` and the transmission condition
//! holds exactly at the discrete level.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::coefficients::ProblemSpec;
use crate::error::{Error, Result};
use crate::functions::CatalogFn;
use crate::geometry::CurveFamily;
use crate::math;
use crate::transform::{DivergenceTriple, StraightenFrame, StraightenTransform};

/// Data `(ρ, a, B, λ, g, f)` on a family of moving interfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionPDE {
    pub triple: DivergenceTriple,
    pub lambda: f64,
    /// Source `g` (compactly supported in practice).
    pub g: CatalogFn,
    /// Terminal condition `f`.
    pub f: CatalogFn,
}

impl TransmissionPDE {
    pub fn new(triple: DivergenceTriple, lambda: f64, f: CatalogFn, g: CatalogFn) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("lambda must be finite and ≥ 0, got {lambda}")));
        }
        Ok(Self { triple, lambda, g, f })
    }

    /// The triple of [`DivergenceTriple::new`] for `problem`.
    pub fn from_problem(problem: &ProblemSpec, lambda: f64, f: CatalogFn, g: CatalogFn) -> Result<Self> {
        Self::new(DivergenceTriple::new(problem), lambda, f, g)
    }

    pub fn family(&self) -> &CurveFamily {
        self.triple.problem().family()
    }

    pub fn horizon(&self) -> f64 {
        self.family().horizon()
    }
}

/// Value imposed on the two edges of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeCondition {
    /// Homogeneous Dirichlet (truncation of `u → 0` at infinity).
    #[default]
    Zero,
    /// `u = f∘ψ` on the edges at every time level.
    Terminal,
}

/// Grid parameters: box `[c − L, c + L]` in `x̂` around the centre `c` of the
/// straightened interfaces, `N` cells, `M` time steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub half_width: f64,
    pub n_cells: usize,
    pub n_steps: usize,
    pub theta: f64,
    pub edge: EdgeCondition,
}

impl GridParams {
    pub fn new(half_width: f64, n_cells: usize, n_steps: usize, theta: f64) -> Self {
        Self { half_width, n_cells, n_steps, theta, edge: EdgeCondition::Zero }
    }

    pub fn with_edge(mut self, edge: EdgeCondition) -> Self {
        self.edge = edge;
        self
    }
}

/// The problem pulled back to cylindrical interfaces `x̂ = 1, …, I_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylindricalPDE {
    pde: TransmissionPDE,
    straighten: StraightenTransform,
}

/// Straightens the interfaces of `pde`; `u(t, x) = û(t, Ψ(t, x))`.
pub fn straighten_problem(pde: &TransmissionPDE) -> Result<CylindricalPDE> {
    Ok(CylindricalPDE { pde: pde.clone(), straighten: StraightenTransform::new(pde.family())? })
}

/// Hat data `(ρ̂, â, B̂)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatData {
    pub rho: f64,
    pub a: f64,
    pub big_b: f64,
}

impl CylindricalPDE {
    pub fn pde(&self) -> &TransmissionPDE {
        &self.pde
    }

    pub fn straighten(&self) -> &StraightenTransform {
        &self.straighten
    }

    /// Centre `c = (1 + I_p)/2` of the straightened interfaces.
    pub fn centre(&self) -> f64 {
        0.5 * (1.0 + self.straighten.padded_len() as f64)
    }

    /// `(ρΨ'_x, aΨ'_x, BΨ'_x + Ψ'_t)` on padded segment `k` at `x̂`.
    #[inline]
    pub(crate) fn hat_on(&self, frame: &StraightenFrame, k: usize, xh: f64) -> HatData {
        let x = frame.little_psi(xh);
        let i = self.straighten.physical_index(k);
        let (rho, a, b) = self.pde.triple.on_subdomain(frame.t, x, i);
        let px = frame.psi_x_on(k);
        HatData { rho: rho * px, a: a * px, big_b: b * px + frame.psi_t_on(k, x) }
    }

    /// Hat data at `(t, x̂)` on padded segment `k`.
    pub fn hat(&self, t: f64, k: usize, xh: f64) -> Result<HatData> {
        let frame = self.straighten.frame(t)?;
        if k > frame.padded_len() {
            return Err(Error::InterfaceIndex { index: k, count: frame.padded_len() });
        }
        Ok(self.hat_on(&frame, k, xh))
    }

    /// Cells per segment of the box for `n_cells` cells in total: proportional
    /// to segment length (largest remainder), at least one per segment.
    pub fn allocate_cells(&self, half_width: f64, n_cells: usize) -> Result<Vec<usize>> {
        let ip = self.straighten.padded_len();
        let c = self.centre();
        let (lo, hi) = (c - half_width, c + half_width);
        if !(lo < 1.0 && hi > ip as f64) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "box half-width {half_width} does not enclose the straightened interfaces 1..{ip}"
            )));
        }
        let mut lengths = vec![1.0 - lo];
        lengths.extend(core::iter::repeat_n(1.0, ip - 1));
        lengths.push(hi - ip as f64);
        let total = 2.0 * half_width;
        let ideal: Vec<f64> = lengths.iter().map(|l| n_cells as f64 * l / total).collect();
        let mut counts: Vec<usize> = ideal.iter().map(|v| (math::floor(*v) as usize).max(1)).collect();
        let used: usize = counts.iter().sum();
        if used > n_cells {
            return Err(Error::InvalidParameter(alloc::format!(
                "{n_cells} cells cannot resolve {} segments",
                lengths.len()
            )));
        }
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| (ideal[b] - counts[b] as f64).total_cmp(&(ideal[a] - counts[a] as f64)).then(a.cmp(&b)));
        for &s in order.iter().cycle().take(n_cells - used) {
            counts[s] += 1;
        }
        Ok(counts)
    }

    /// Solves backward from `u(T) = f` and returns every time level.
    pub fn solve(&self, params: &GridParams) -> Result<GridSolution> {
        let ip = self.straighten.padded_len();
        if params.n_cells < 4 * self.straighten.physical_len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "N = {} below 4·I = {}",
                params.n_cells,
                4 * self.straighten.physical_len()
            )));
        }
        let counts = self.allocate_cells(params.half_width, params.n_cells)?;
        debug_assert_eq!(counts.len(), ip + 1);
        self.solve_with_counts(params, &counts)
    }

    pub(crate) fn solve_with_counts(&self, params: &GridParams, counts: &[usize]) -> Result<GridSolution> {
        let theta = params.theta;
        if !(0.5..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter(alloc::format!("theta must lie in [1/2, 1], got {theta}")));
        }
        if params.n_steps == 0 {
            return Err(Error::InvalidParameter("at least one time step is required".into()));
        }
        if params.edge == EdgeCondition::Zero && !self.pde.f.vanishes_at_infinity() {
            return Err(Error::InvalidParameter(
                "terminal condition does not vanish at infinity; use terminal edge values".into(),
            ));
        }
        let grid = Grid::new(self.centre(), params.half_width, counts);
        let n_nodes = grid.nodes.len();
        let horizon = self.pde.horizon();
        let m_steps = params.n_steps;
        let tau = horizon / m_steps as f64;
        let mut times: Vec<f64> = (0..=m_steps).map(|m| m as f64 * tau).collect();
        times[m_steps] = horizon;

        let mut warnings = Vec::new();
        if let Some((glo, ghi)) = self.pde.g.support() {
            if glo < ghi {
                for &t in &[0.0, horizon] {
                    let f = self.straighten.frame_at(t);
                    if f.little_psi(grid.nodes[0]) > glo || f.little_psi(grid.nodes[n_nodes - 1]) < ghi {
                        warnings.push(alloc::format!("source support [{glo}, {ghi}] leaves the box at t = {t}"));
                        break;
                    }
                }
            }
        }

        let mut values = vec![0.0; (m_steps + 1) * n_nodes];
        let mut next = self.assemble(&grid, times[m_steps], params.edge);
        {
            let row = &mut values[m_steps * n_nodes..];
            for (n, u) in row.iter_mut().enumerate() {
                *u = self.pde.f.value(next.frame.little_psi(grid.nodes[n]));
            }
            if params.edge == EdgeCondition::Zero {
                row[0] = 0.0;
                row[n_nodes - 1] = 0.0;
            }
        }

        let mut fluxes = Vec::new();
        let (mut lower, mut diag, mut upper, mut rhs) =
            (vec![0.0; n_nodes], vec![0.0; n_nodes], vec![0.0; n_nodes], vec![0.0; n_nodes]);
        for m in (0..m_steps).rev() {
            let cur = self.assemble(&grid, times[m], params.edge);
            let (done, todo) = values.split_at_mut((m + 1) * n_nodes);
            let u_next = &todo[..n_nodes];
            let u_cur = &mut done[m * n_nodes..];
            let ku_next = next.apply(u_next);
            for n in 1..n_nodes - 1 {
                let mass = theta * cur.mass(n) + (1.0 - theta) * next.mass(n);
                lower[n] = -theta * cur.lower[n];
                diag[n] = mass / tau - theta * cur.diag[n];
                upper[n] = -theta * cur.upper[n];
                rhs[n] = mass / tau * u_next[n] + (1.0 - theta) * (ku_next[n] - next.source(n)) - theta * cur.source(n);
            }
            for n in [0, n_nodes - 1] {
                lower[n] = 0.0;
                upper[n] = 0.0;
                diag[n] = 1.0;
                rhs[n] = cur.edge_value[n.min(1)];
            }
            thomas(&lower, &diag, &upper, &mut rhs)?;
            u_cur.copy_from_slice(&rhs);

            for (j, &n) in grid.interfaces.iter().enumerate() {
                let f = interface_flux(&cur, &next, u_cur, u_next, n, (theta, tau, self.pde.lambda));
                fluxes.push(InterfaceFlux { level: m, node: j + 1, plus: f.0, minus: f.1 });
            }
            next = cur;
        }

        Ok(GridSolution {
            nodes: grid.nodes,
            interface_nodes: grid.interfaces,
            times,
            values,
            half_width: params.half_width,
            theta,
            straighten: self.straighten.clone(),
            fluxes,
            warnings,
        })
    }

    /// Spatial operator `K`, mass and source at time `t` (see [`Level`]).
    fn assemble(&self, grid: &Grid, t: f64, edge: EdgeCondition) -> Level {
        let frame = self.straighten.frame_at(t);
        let n_nodes = grid.nodes.len();
        let lambda = self.pde.lambda;
        let mut lvl = Level::zeros(n_nodes, frame);
        // Face coefficients `â_face / h`, harmonic mean of the end values on the face's segment.
        for n in 0..n_nodes - 1 {
            let k = grid.face_segment[n];
            let h = grid.nodes[n + 1] - grid.nodes[n];
            let a0 = self.hat_on(&lvl.frame, k, grid.nodes[n]).a;
            let a1 = self.hat_on(&lvl.frame, k, grid.nodes[n + 1]).a;
            lvl.face[n] = 2.0 * a0 * a1 / (a0 + a1) / h;
        }
        for n in 1..n_nodes - 1 {
            let xh = grid.nodes[n];
            let (hl, hr) = (xh - grid.nodes[n - 1], grid.nodes[n + 1] - xh);
            let (kl, kr) = (grid.face_segment[n - 1], grid.face_segment[n]);
            let (dl, dr) = (self.hat_on(&lvl.frame, kl, xh), self.hat_on(&lvl.frame, kr, xh));
            let g = self.pde.g.eval(t, lvl.frame.little_psi(xh));
            lvl.mass_l[n] = 0.5 * hl / dl.rho;
            lvl.mass_r[n] = 0.5 * hr / dr.rho;
            lvl.adv_l[n] = 0.5 * dl.big_b / dl.rho;
            lvl.adv_r[n] = 0.5 * dr.big_b / dr.rho;
            lvl.src_l[n] = lvl.mass_l[n] * g;
            lvl.src_r[n] = lvl.mass_r[n] * g;
            // K u = ½(F₊ − F₋) + adv_l·(u_n − u_{n−1}) + adv_r·(u_{n+1} − u_n) − λ M u
            let (fl, fr) = (lvl.face[n - 1], lvl.face[n]);
            lvl.lower[n] = 0.5 * fl - lvl.adv_l[n];
            lvl.upper[n] = 0.5 * fr + lvl.adv_r[n];
            lvl.diag[n] = -0.5 * (fl + fr) + lvl.adv_l[n] - lvl.adv_r[n] - lambda * (lvl.mass_l[n] + lvl.mass_r[n]);
        }
        lvl.edge_value = match edge {
            EdgeCondition::Zero => [0.0, 0.0],
            EdgeCondition::Terminal => [
                self.pde.f.value(lvl.frame.little_psi(grid.nodes[0])),
                self.pde.f.value(lvl.frame.little_psi(grid.nodes[n_nodes - 1])),
            ],
        };
        lvl
    }

    /// Successive-refinement differences at `t = 0` on the coarse nodes.
    pub fn convergence_study(&self, coarse: &GridParams, levels: usize) -> Result<ConvergenceReport> {
        if levels < 3 {
            return Err(Error::InvalidParameter("convergence study needs at least 3 levels".into()));
        }
        let base = self.allocate_cells(coarse.half_width, coarse.n_cells)?;
        let fine_factor = 1usize << (levels - 1);
        let counts = |l: usize| base.iter().map(|c| c << l).collect::<Vec<_>>();
        let run = |l_space: usize, m: usize| {
            let p = GridParams { n_cells: coarse.n_cells << l_space, n_steps: m, ..*coarse };
            self.solve_with_counts(&p, &counts(l_space))
        };
        let coarse_at_zero =
            |s: &GridSolution, stride: usize| -> Vec<f64> { s.level(0).iter().step_by(stride).copied().collect() };

        let mut space = Vec::with_capacity(levels);
        for l in 0..levels {
            space.push(coarse_at_zero(&run(l, coarse.n_steps * fine_factor)?, 1 << l));
        }
        let mut time = Vec::with_capacity(levels);
        for l in 0..levels {
            time.push(coarse_at_zero(&run(levels - 1, coarse.n_steps << l)?, fine_factor));
        }
        Ok(ConvergenceReport::from_sequences(&space, &time))
    }
}

/// Max-norm successive differences and Richardson orders.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `‖u_{h} − u_{h/2}‖∞` with the time grid fixed at its finest.
    pub space_differences: Vec<f64>,
    pub space_orders: Vec<f64>,
    /// `‖u_{τ} − u_{τ/2}‖∞` with the space grid fixed at its finest.
    pub time_differences: Vec<f64>,
    pub time_orders: Vec<f64>,
}

impl ConvergenceReport {
    fn from_sequences(space: &[Vec<f64>], time: &[Vec<f64>]) -> Self {
        let diffs = |seq: &[Vec<f64>]| -> Vec<f64> {
            seq.windows(2).map(|w| w[0].iter().zip(&w[1]).fold(0.0f64, |m, (a, b)| m.max(math::abs(a - b)))).collect()
        };
        let orders = |d: &[f64]| -> Vec<f64> { d.windows(2).map(|w| math::log2(w[0] / w[1])).collect() };
        let sd = diffs(space);
        let td = diffs(time);
        Self { space_orders: orders(&sd), time_orders: orders(&td), space_differences: sd, time_differences: td }
    }

    pub fn min_space_order(&self) -> f64 {
        self.space_orders.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_time_order(&self) -> f64 {
        self.time_orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Reconstructed one-sided fluxes `â₊D₊u` and `â₋D₋u` at an interface node and level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceFlux {
    pub level: usize,
    /// Straightened (padded) interface index.
    pub node: usize,
    pub plus: f64,
    pub minus: f64,
}

impl InterfaceFlux {
    /// `|Φ₊ − Φ₋| / (|Φ₊| + |Φ₋| + 1)`
    pub fn relative_mismatch(&self) -> f64 {
        math::abs(self.plus - self.minus) / (math::abs(self.plus) + math::abs(self.minus) + 1.0)
    }
}

/// Discrete solution `û[m][n]` on the straightened grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub nodes: Vec<f64>,
    /// Node index of each padded interface.
    pub interface_nodes: Vec<usize>,
    pub times: Vec<f64>,
    /// Row-major `(M + 1) × (N + 1)`.
    pub values: Vec<f64>,
    pub half_width: f64,
    pub theta: f64,
    pub straighten: StraightenTransform,
    pub fluxes: Vec<InterfaceFlux>,
    pub warnings: Vec<String>,
}

impl GridSolution {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn level(&self, m: usize) -> &[f64] {
        let n = self.nodes.len();
        &self.values[m * n..(m + 1) * n]
    }

    pub fn max_flux_mismatch(&self) -> f64 {
        self.fluxes.iter().map(InterfaceFlux::relative_mismatch).fold(0.0, f64::max)
    }

    /// Bilinear interpolation in `(t, x̂)`; cells never straddle an interface.
    pub fn evaluate_hat(&self, t: f64, xh: f64) -> Result<f64> {
        let horizon = *self.times.last().unwrap();
        if !(0.0..=horizon).contains(&t) {
            return Err(Error::TimeOutOfRange { t, horizon });
        }
        let (first, last) = (self.nodes[0], *self.nodes.last().unwrap());
        if !(xh >= first && xh <= last) {
            return Err(Error::OutsideBox { t, x: xh });
        }
        let n = self.nodes.partition_point(|&v| v <= xh).clamp(1, self.nodes.len() - 1) - 1;
        let wx = (xh - self.nodes[n]) / (self.nodes[n + 1] - self.nodes[n]);
        let m_steps = self.times.len() - 1;
        let tau = horizon / m_steps as f64;
        let m = (math::floor(t / tau) as usize).min(m_steps - 1);
        let wt = (t - self.times[m]) / (self.times[m + 1] - self.times[m]);
        let at = |m: usize| {
            let row = self.level(m);
            if wx == 0.0 {
                row[n]
            } else {
                (1.0 - wx) * row[n] + wx * row[n + 1]
            }
        };
        Ok(if wt == 0.0 { at(m) } else { (1.0 - wt) * at(m) + wt * at(m + 1) })
    }

    /// `u(t, x) = û(t, Ψ(t, x))`.
    pub fn evaluate_u(&self, t: f64, x: f64) -> Result<f64> {
        let frame = self.straighten.frame(t)?;
        self.evaluate_hat(t, frame.big_psi(x)).map_err(|e| match e {
            Error::OutsideBox { .. } => Error::OutsideBox { t, x },
            other => other,
        })
    }

    /// CSV `t,x,u` in physical coordinates, one row per stored value.
    pub fn write_csv<W: fmt::Write>(&self, out: &mut W) -> fmt::Result {
        writeln!(out, "t,x,u")?;
        for (m, &t) in self.times.iter().enumerate() {
            let frame = self.straighten.frame_at(t);
            for (n, &xh) in self.nodes.iter().enumerate() {
                writeln!(out, "{t:.16e},{:.16e},{:.16e}", frame.little_psi(xh), self.level(m)[n])?;
            }
        }
        Ok(())
    }

    /// Header `(L, N, M, I)` as little-endian `f64`, then the row-major values.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let header = [
            self.half_width,
            (self.nodes.len() - 1) as f64,
            (self.times.len() - 1) as f64,
            self.straighten.physical_len() as f64,
        ];
        header.iter().chain(&self.values).flat_map(|v| v.to_le_bytes()).collect()
    }
}

/// Interface-aligned node layout.
struct Grid {
    nodes: Vec<f64>,
    /// Padded segment of face `[n, n+1]`.
    face_segment: Vec<usize>,
    interfaces: Vec<usize>,
}

impl Grid {
    fn new(centre: f64, half_width: f64, counts: &[usize]) -> Self {
        let ip = counts.len() - 1;
        let mut breaks = vec![centre - half_width];
        breaks.extend((1..=ip).map(|i| i as f64));
        breaks.push(centre + half_width);
        let mut nodes = vec![breaks[0]];
        let mut face_segment = Vec::new();
        let mut interfaces = Vec::with_capacity(ip);
        for (s, &c) in counts.iter().enumerate() {
            let (a, b) = (breaks[s], breaks[s + 1]);
            for k in 1..c {
                nodes.push(a + (b - a) * k as f64 / c as f64);
            }
            // Segment ends are stored exactly.
            nodes.push(b);
            face_segment.extend(core::iter::repeat_n(s, c));
            if s < ip {
                interfaces.push(nodes.len() - 1);
            }
        }
        Self { nodes, face_segment, interfaces }
    }
}

/// Semi-discrete data at one time level: `M u_t + K u = S`.
struct Level {
    frame: StraightenFrame,
    face: Vec<f64>,
    mass_l: Vec<f64>,
    mass_r: Vec<f64>,
    /// `(1/2)(B̂/ρ̂)` on each half-cell (multiplies `u_n − u_{n∓1}`).
    adv_l: Vec<f64>,
    adv_r: Vec<f64>,
    src_l: Vec<f64>,
    src_r: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    edge_value: [f64; 2],
}

impl Level {
    fn zeros(n: usize, frame: StraightenFrame) -> Self {
        Self {
            frame,
            face: vec![0.0; n - 1],
            mass_l: vec![0.0; n],
            mass_r: vec![0.0; n],
            adv_l: vec![0.0; n],
            adv_r: vec![0.0; n],
            src_l: vec![0.0; n],
            src_r: vec![0.0; n],
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            edge_value: [0.0; 2],
        }
    }

    #[inline]
    fn mass(&self, n: usize) -> f64 {
        self.mass_l[n] + self.mass_r[n]
    }

    #[inline]
    fn source(&self, n: usize) -> f64 {
        self.src_l[n] + self.src_r[n]
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for n in 1..u.len() - 1 {
            out[n] = self.lower[n] * u[n - 1] + self.diag[n] * u[n] + self.upper[n] * u[n + 1];
        }
        out
    }
}

/// `(Φ₊, Φ₋)` with `Φ₊ = F₊ + 2H₊`, `Φ₋ = F₋ − 2H₋`, where `H±` collect the
/// half-cell mass, advection, reaction and source terms of the θ-step, so
/// that the node equation reads `½(Φ₊ − Φ₋) = 0`.
fn interface_flux(cur: &Level, next: &Level, u: &[f64], u_next: &[f64], n: usize, step: (f64, f64, f64)) -> (f64, f64) {
    let (theta, tau, lambda) = step;
    let w = |a: f64, b: f64| theta * a + (1.0 - theta) * b;
    let dp = |v: &[f64]| v[n + 1] - v[n];
    let dm = |v: &[f64]| v[n] - v[n - 1];
    // Half-cell terms other than the time derivative.
    let right = |l: &Level, v: &[f64]| l.adv_r[n] * dp(v) - lambda * l.mass_r[n] * v[n] - l.src_r[n];
    let left = |l: &Level, v: &[f64]| l.adv_l[n] * dm(v) - lambda * l.mass_l[n] * v[n] - l.src_l[n];
    let delta = (u_next[n] - u[n]) / tau;

    let f_plus = w(cur.face[n] * dp(u), next.face[n] * dp(u_next));
    let f_minus = w(cur.face[n - 1] * dm(u), next.face[n - 1] * dm(u_next));
    let h_plus = w(cur.mass_r[n], next.mass_r[n]) * delta + w(right(cur, u), right(next, u_next));
    let h_minus = w(cur.mass_l[n], next.mass_l[n]) * delta + w(left(cur, u), left(next, u_next));
    (f_plus + 2.0 * h_plus, f_minus - 2.0 * h_minus)
}

/// In-place Thomas algorithm; `rhs` receives the solution.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::SingularSystem { row: 0 });
    }
    c[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SingularSystem { row: i });
        }
        c[i] = upper[i] / denom;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}
