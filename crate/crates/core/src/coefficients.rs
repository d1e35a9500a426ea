//! Piecewise-smooth space-time coefficients, skewness schedules and sampled
//! checks of the standing hypotheses (Θ/Ξ bounds, H- and AJ-hypotheses).

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{default_interface_tol, locate, CurveFamily};
use crate::math;

/// One-sided selection at an interface. Off interfaces all three agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    Left,
    Right,
    /// `f_±(x) = (f(x+) + f(x−)) / 2`
    #[default]
    Symmetric,
}

/// Smooth space-time functions used as coefficient pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothFn {
    Constant {
        c: f64,
    },
    /// `c0 + ct·t + cx·x`
    Affine {
        c0: f64,
        ct: f64,
        cx: f64,
    },
    /// `(a0 + a1·t)(b0 + b1·x)`
    Product {
        a0: f64,
        a1: f64,
        b0: f64,
        b1: f64,
    },
    /// `c0 + amp·sin(freq_t·t + freq_x·x + phase)`
    Sinusoid {
        c0: f64,
        amp: f64,
        freq_t: f64,
        freq_x: f64,
        phase: f64,
    },
    /// `c0 + amp·atan(scale·(x − center))`
    Arctan {
        c0: f64,
        amp: f64,
        scale: f64,
        center: f64,
    },
}

impl SmoothFn {
    pub const fn constant(c: f64) -> Self {
        SmoothFn::Constant { c }
    }

    #[inline]
    pub fn value(&self, t: f64, x: f64) -> f64 {
        match *self {
            SmoothFn::Constant { c } => c,
            SmoothFn::Affine { c0, ct, cx } => c0 + ct * t + cx * x,
            SmoothFn::Product { a0, a1, b0, b1 } => (a0 + a1 * t) * (b0 + b1 * x),
            SmoothFn::Sinusoid { c0, amp, freq_t, freq_x, phase } => {
                c0 + amp * math::sin(freq_t * t + freq_x * x + phase)
            }
            SmoothFn::Arctan { c0, amp, scale, center } => c0 + amp * math::atan(scale * (x - center)),
        }
    }

    pub fn d_t(&self, t: f64, x: f64) -> f64 {
        match *self {
            SmoothFn::Constant { .. } | SmoothFn::Arctan { .. } => 0.0,
            SmoothFn::Affine { ct, .. } => ct,
            SmoothFn::Product { a1, b0, b1, .. } => a1 * (b0 + b1 * x),
            SmoothFn::Sinusoid { amp, freq_t, freq_x, phase, .. } => {
                amp * freq_t * math::cos(freq_t * t + freq_x * x + phase)
            }
        }
    }

    pub fn d_x(&self, t: f64, x: f64) -> f64 {
        match *self {
            SmoothFn::Constant { .. } => 0.0,
            SmoothFn::Affine { cx, .. } => cx,
            SmoothFn::Product { a0, a1, b1, .. } => (a0 + a1 * t) * b1,
            SmoothFn::Sinusoid { amp, freq_t, freq_x, phase, .. } => {
                amp * freq_x * math::cos(freq_t * t + freq_x * x + phase)
            }
            SmoothFn::Arctan { amp, scale, center, .. } => {
                let s = scale * (x - center);
                amp * scale / (1.0 + s * s)
            }
        }
    }

    pub fn d_xx(&self, t: f64, x: f64) -> f64 {
        match *self {
            SmoothFn::Constant { .. } | SmoothFn::Affine { .. } | SmoothFn::Product { .. } => 0.0,
            SmoothFn::Sinusoid { amp, freq_t, freq_x, phase, .. } => {
                -amp * freq_x * freq_x * math::sin(freq_t * t + freq_x * x + phase)
            }
            SmoothFn::Arctan { amp, scale, center, .. } => {
                let s = scale * (x - center);
                -2.0 * amp * scale * scale * s / ((1.0 + s * s) * (1.0 + s * s))
            }
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            SmoothFn::Constant { c } => c.is_finite(),
            SmoothFn::Affine { c0, ct, cx } => c0.is_finite() && ct.is_finite() && cx.is_finite(),
            SmoothFn::Product { a0, a1, b0, b1 } => [a0, a1, b0, b1].iter().all(|v| v.is_finite()),
            SmoothFn::Sinusoid { c0, amp, freq_t, freq_x, phase } => {
                [c0, amp, freq_t, freq_x, phase].iter().all(|v| v.is_finite())
            }
            SmoothFn::Arctan { c0, amp, scale, center } => [c0, amp, scale, center].iter().all(|v| v.is_finite()),
        }
    }
}

/// Bounds class a coefficient is declared to belong to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientClass {
    /// `Θ(m, M)`: values in `[m, M]`, `m > 0`.
    Diffusion {
        m: f64,
        big_m: f64,
    },
    /// `Ξ(M)`: `|value| ≤ M`.
    Drift {
        big_m: f64,
    },
    Unconstrained,
}

impl CoefficientClass {
    fn admits(&self, v: f64) -> bool {
        match *self {
            CoefficientClass::Diffusion { m, big_m } => v >= m && v <= big_m,
            CoefficientClass::Drift { big_m } => math::abs(v) <= big_m,
            CoefficientClass::Unconstrained => v.is_finite(),
        }
    }
}

/// Uniform sample grid over `[0, T] × [x_min, x_max]` used by the hypothesis checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub n_t: usize,
    pub n_x: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl SampleGrid {
    fn validate(&self) -> Result<()> {
        if self.n_t < 2 || self.n_x < 2 || !(self.x_max > self.x_min) {
            return Err(Error::InvalidParameter(format!("degenerate sample grid {self:?}")));
        }
        Ok(())
    }

    fn time(&self, k: usize, horizon: f64) -> f64 {
        horizon * k as f64 / (self.n_t - 1) as f64
    }

    fn space(&self, l: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * l as f64 / (self.n_x - 1) as f64
    }
}

/// A coefficient made of `I + 1` smooth pieces, one per subdomain `D_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCoefficient {
    family: CurveFamily,
    pieces: Vec<SmoothFn>,
    class: CoefficientClass,
}

impl PiecewiseCoefficient {
    pub fn new(family: CurveFamily, pieces: Vec<SmoothFn>, class: CoefficientClass) -> Result<Self> {
        if pieces.len() != family.len() + 1 {
            return Err(Error::InvalidCoefficient(format!(
                "expected {} pieces for {} interfaces, got {}",
                family.len() + 1,
                family.len(),
                pieces.len()
            )));
        }
        if let Some(p) = pieces.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidCoefficient(format!("non-finite parameters in {p:?}")));
        }
        match class {
            CoefficientClass::Diffusion { m, big_m } if !(m > 0.0 && big_m >= m && big_m.is_finite()) => {
                return Err(Error::InvalidCoefficient(format!("invalid diffusion bounds [{m}, {big_m}]")));
            }
            CoefficientClass::Drift { big_m } if !(big_m >= 0.0 && big_m.is_finite()) => {
                return Err(Error::InvalidCoefficient(format!("invalid drift bound {big_m}")));
            }
            _ => {}
        }
        Ok(Self { family, pieces, class })
    }

    /// The same constant on every subdomain.
    pub fn uniform(family: CurveFamily, value: SmoothFn, class: CoefficientClass) -> Result<Self> {
        let n = family.len() + 1;
        Self::new(family, alloc::vec![value; n], class)
    }

    pub fn family(&self) -> &CurveFamily {
        &self.family
    }

    pub fn pieces(&self) -> &[SmoothFn] {
        &self.pieces
    }

    pub fn class(&self) -> CoefficientClass {
        self.class
    }

    /// Value with the requested one-sided convention at interfaces.
    pub fn eval(&self, t: f64, x: f64, side: Side) -> Result<f64> {
        self.family.check_time(t)?;
        Ok(self.value_at(&self.family.positions_at(t), t, x, side))
    }

    /// `△f(x_i(t)) = (f(x_i+) − f(x_i−)) / 2` at interface `id` (1-based).
    pub fn jump(&self, t: f64, id: usize) -> Result<f64> {
        let x = self.family.curve(id)?.eval(t)?;
        let (l, r) = (self.pieces[id - 1].value(t, x), self.pieces[id].value(t, x));
        Ok((r - l) / 2.0)
    }

    /// Evaluation against precomputed interface positions at `t`.
    #[inline]
    pub(crate) fn value_at(&self, positions: &[f64], t: f64, x: f64, side: Side) -> f64 {
        let loc = locate(positions, x, default_interface_tol(x));
        match loc.on_interface {
            Some(id) => self.value_at_interface(id, t, x, side),
            None => self.pieces[loc.index].value(t, x),
        }
    }

    #[inline]
    pub(crate) fn value_at_interface(&self, id: usize, t: f64, x: f64, side: Side) -> f64 {
        let left = self.pieces[id - 1].value(t, x);
        let right = self.pieces[id].value(t, x);
        match side {
            Side::Left => left,
            Side::Right => right,
            Side::Symmetric => 0.5 * (left + right),
        }
    }

    #[inline]
    pub(crate) fn piece(&self, index: usize) -> &SmoothFn {
        &self.pieces[index]
    }

    /// Samples every piece on its own (closed) subdomain inside the grid window.
    fn for_each_sample(&self, grid: &SampleGrid, mut visit: impl FnMut(usize, f64, f64)) -> Result<()> {
        grid.validate()?;
        let horizon = self.family.horizon();
        for k in 0..grid.n_t {
            let t = grid.time(k, horizon);
            let xs = self.family.positions_at(t);
            for l in 0..grid.n_x {
                let x = grid.space(l);
                let loc = locate(&xs, x, 0.0);
                visit(loc.index, t, x);
            }
            // One-sided limits at the interfaces themselves.
            for (k, &p) in xs.iter().enumerate() {
                if p >= grid.x_min && p <= grid.x_max {
                    visit(k, t, p);
                    visit(k + 1, t, p);
                }
            }
        }
        Ok(())
    }

    /// Sampled check that all values lie in the declared class.
    pub fn check_class(&self, grid: &SampleGrid) -> Result<ClassReport> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut passed = true;
        self.for_each_sample(grid, |i, t, x| {
            let v = self.pieces[i].value(t, x);
            min = min.min(v);
            max = max.max(v);
            passed &= self.class.admits(v);
        })?;
        Ok(ClassReport { min, max, passed })
    }

    /// Sampled sup of `|∂_x f|` and `|∂_t f|` per subdomain; passes iff every
    /// sup is finite and at most `bound`.
    pub fn check_h_hypothesis(&self, grid: &SampleGrid, bound: f64) -> Result<HReport> {
        let mut pieces = alloc::vec![PieceSup::default(); self.pieces.len()];
        self.for_each_sample(grid, |i, t, x| {
            let p = &self.pieces[i];
            pieces[i].sup_dx = pieces[i].sup_dx.max(math::abs(p.d_x(t, x)));
            pieces[i].sup_dt = pieces[i].sup_dt.max(math::abs(p.d_t(t, x)));
        })?;
        let passed = pieces
            .iter()
            .all(|p| p.sup_dx.is_finite() && p.sup_dt.is_finite() && p.sup_dx <= bound && p.sup_dt <= bound);
        Ok(HReport { pieces, bound, passed })
    }

    /// Average-jump check on `J_i(t) = |f²(t, x_i+) − f²(t, x_i−)|`.
    pub fn check_aj_hypothesis(&self, n_t: usize) -> Result<AjReport> {
        if n_t < 2 {
            return Err(Error::InvalidParameter("AJ check needs at least 2 time samples".into()));
        }
        let horizon = self.family.horizon();
        let times: Vec<f64> = (0..n_t).map(|k| horizon * k as f64 / (n_t - 1) as f64).collect();
        let mut interfaces = Vec::with_capacity(self.family.len());
        for id in 1..=self.family.len() {
            let curve = self.family.curve(id)?;
            let jumps: Vec<f64> = times
                .iter()
                .map(|&t| {
                    let x = curve.value_at(t);
                    let l = self.pieces[id - 1].value(t, x);
                    let r = self.pieces[id].value(t, x);
                    math::abs(r * r - l * l)
                })
                .collect();
            interfaces.push(average_jump_constant(&times, &jumps));
        }
        let constant = interfaces.iter().filter_map(|a| a.constant).fold(0.0, f64::max);
        let passed = interfaces.iter().all(|a| a.constant.is_none_or(f64::is_finite));
        Ok(AjReport { interfaces, constant, passed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassReport {
    pub min: f64,
    pub max: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PieceSup {
    pub sup_dx: f64,
    pub sup_dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HReport {
    pub pieces: Vec<PieceSup>,
    pub bound: f64,
    pub passed: bool,
}

/// AJ witness for one interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AjInterface {
    /// Trapezoid approximation of `∫_0^T J(s) ds`.
    pub integral: f64,
    pub max_jump: f64,
    /// `max_t J(t)·T / ∫J`; `None` when the jump vanishes identically.
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AjReport {
    pub interfaces: Vec<AjInterface>,
    /// Largest witness over interfaces (0 if no interface jumps).
    pub constant: f64,
    pub passed: bool,
}

/// Smallest admissible AJ constant for sampled jump sizes, up to trapezoid quadrature.
pub fn average_jump_constant(times: &[f64], jumps: &[f64]) -> AjInterface {
    debug_assert_eq!(times.len(), jumps.len());
    let integral: f64 = times.windows(2).zip(jumps.windows(2)).map(|(t, j)| 0.5 * (t[1] - t[0]) * (j[0] + j[1])).sum();
    let max_jump = jumps.iter().copied().fold(0.0, f64::max);
    let span = times.last().copied().unwrap_or(0.0) - times.first().copied().unwrap_or(0.0);
    let constant = if integral > 0.0 { Some(max_jump * span / integral) } else { None };
    AjInterface { integral, max_jump, constant }
}

/// Time-dependent skewness `β_i(t) ∈ (−1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaFn {
    Constant {
        b: f64,
    },
    /// `c0 + c1·t`, checked to stay inside `(−1, 1)` on `[0, T]`.
    Affine {
        c0: f64,
        c1: f64,
    },
    /// `c0 + amp·sin(freq·t + phase)`
    Sinusoid {
        c0: f64,
        amp: f64,
        freq: f64,
        phase: f64,
    },
}

impl BetaFn {
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            BetaFn::Constant { b } => b,
            BetaFn::Affine { c0, c1 } => c0 + c1 * t,
            BetaFn::Sinusoid { c0, amp, freq, phase } => c0 + amp * math::sin(freq * t + phase),
        }
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            BetaFn::Constant { .. } => 0.0,
            BetaFn::Affine { c1, .. } => c1,
            BetaFn::Sinusoid { amp, freq, phase, .. } => amp * freq * math::cos(freq * t + phase),
        }
    }

    /// Exact range on `[0, horizon]` where cheap, otherwise a dense sample.
    fn range(&self, horizon: f64) -> (f64, f64) {
        match *self {
            BetaFn::Constant { b } => (b, b),
            BetaFn::Affine { c0, c1 } => {
                let e = c0 + c1 * horizon;
                (c0.min(e), c0.max(e))
            }
            BetaFn::Sinusoid { .. } => {
                let n = 4096;
                (0..=n)
                    .map(|k| self.value(horizon * k as f64 / n as f64))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
            }
        }
    }
}

/// The `β_i` for every interface of a family.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewnessSchedule {
    betas: Vec<BetaFn>,
    horizon: f64,
}

impl SkewnessSchedule {
    pub fn new(betas: Vec<BetaFn>, horizon: f64) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::InvalidParameter("skewness schedule needs at least one interface".into()));
        }
        for (k, b) in betas.iter().enumerate() {
            let (lo, hi) = b.range(horizon);
            if !(lo > -1.0 && hi < 1.0) {
                let value = if lo <= -1.0 || lo.is_nan() { lo } else { hi };
                return Err(Error::BetaOutOfRange { interface: k + 1, value });
            }
        }
        Ok(Self { betas, horizon })
    }

    /// `β ≡ 0` on `count` interfaces.
    pub fn zero(count: usize, horizon: f64) -> Result<Self> {
        Self::new(alloc::vec![BetaFn::Constant { b: 0.0 }; count], horizon)
    }

    pub fn constant(values: &[f64], horizon: f64) -> Result<Self> {
        Self::new(values.iter().map(|&b| BetaFn::Constant { b }).collect(), horizon)
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn functions(&self) -> &[BetaFn] {
        &self.betas
    }

    fn check(&self, id: usize, t: f64) -> Result<&BetaFn> {
        if id == 0 || id > self.betas.len() {
            return Err(Error::InterfaceIndex { index: id, count: self.betas.len() });
        }
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::TimeOutOfRange { t, horizon: self.horizon });
        }
        Ok(&self.betas[id - 1])
    }

    /// `β_i(t)` for 1-based `id`.
    pub fn eval_beta(&self, id: usize, t: f64) -> Result<f64> {
        Ok(self.check(id, t)?.value(t))
    }

    pub fn eval_beta_derivative(&self, id: usize, t: f64) -> Result<f64> {
        Ok(self.check(id, t)?.derivative(t))
    }

    pub(crate) fn values_at(&self, t: f64) -> Vec<f64> {
        self.betas.iter().map(|b| b.value(t)).collect()
    }

    pub(crate) fn derivatives_at(&self, t: f64) -> Vec<f64> {
        self.betas.iter().map(|b| b.derivative(t)).collect()
    }

    /// Sampled `[k, κ]` range and derivative bound `M_β`.
    pub fn report(&self, n_t: usize) -> Result<BetaReport> {
        if n_t < 2 {
            return Err(Error::InvalidParameter("beta report needs at least 2 samples".into()));
        }
        let mut k = f64::INFINITY;
        let mut kappa = f64::NEG_INFINITY;
        let mut derivative_bound: f64 = 0.0;
        for j in 0..n_t {
            let t = self.horizon * j as f64 / (n_t - 1) as f64;
            for b in &self.betas {
                let v = b.value(t);
                k = k.min(v);
                kappa = kappa.max(v);
                derivative_bound = derivative_bound.max(math::abs(b.derivative(t)));
            }
        }
        Ok(BetaReport { k, kappa, derivative_bound, passed: k > -1.0 && kappa < 1.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaReport {
    pub k: f64,
    pub kappa: f64,
    pub derivative_bound: f64,
    pub passed: bool,
}

/// The full SDE-with-local-time problem: `σ`, `b`, `β_i`, curves, start and horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub sigma: PiecewiseCoefficient,
    pub drift: PiecewiseCoefficient,
    pub beta: SkewnessSchedule,
    pub x0: f64,
}

impl ProblemSpec {
    pub fn new(
        sigma: PiecewiseCoefficient,
        drift: PiecewiseCoefficient,
        beta: SkewnessSchedule,
        x0: f64,
    ) -> Result<Self> {
        if sigma.family() != drift.family() {
            return Err(Error::InvalidCoefficient("sigma and drift must share the curve family".into()));
        }
        if beta.len() != sigma.family().len() {
            return Err(Error::InvalidCoefficient(format!(
                "{} skewness functions for {} interfaces",
                beta.len(),
                sigma.family().len()
            )));
        }
        if beta.horizon() != sigma.family().horizon() {
            return Err(Error::InvalidCoefficient("skewness horizon differs from the curves' horizon".into()));
        }
        if !matches!(sigma.class(), CoefficientClass::Diffusion { .. }) {
            return Err(Error::InvalidCoefficient("sigma must be declared in a Θ(m, M) class".into()));
        }
        if !matches!(drift.class(), CoefficientClass::Drift { .. }) {
            return Err(Error::InvalidCoefficient("drift must be declared in a Ξ(M) class".into()));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidParameter(format!("x0 must be finite, got {x0}")));
        }
        Ok(Self { sigma, drift, beta, x0 })
    }

    /// Skew Brownian motion: one constant interface at `c`, `σ ≡ 1`, `b ≡ 0`.
    pub fn skew_brownian(beta: f64, interface: f64, x0: f64, horizon: f64) -> Result<Self> {
        let family =
            CurveFamily::new(alloc::vec![crate::geometry::InterfaceCurve::constant(interface, horizon)?], 1.0)?;
        Self::new(
            PiecewiseCoefficient::uniform(
                family.clone(),
                SmoothFn::constant(1.0),
                CoefficientClass::Diffusion { m: 1.0, big_m: 1.0 },
            )?,
            PiecewiseCoefficient::uniform(family, SmoothFn::constant(0.0), CoefficientClass::Drift { big_m: 0.0 })?,
            SkewnessSchedule::constant(&[beta], horizon)?,
            x0,
        )
    }

    pub fn family(&self) -> &CurveFamily {
        self.sigma.family()
    }

    pub fn horizon(&self) -> f64 {
        self.family().horizon()
    }

    /// Same problem with a different start point.
    pub fn with_start(&self, x0: f64) -> Self {
        Self { x0, ..self.clone() }
    }

    /// Same problem with a different skewness schedule.
    pub fn with_beta(&self, beta: SkewnessSchedule) -> Result<Self> {
        Self::new(self.sigma.clone(), self.drift.clone(), beta, self.x0)
    }

    /// Sample window covering the curves and the start point with a margin.
    pub fn default_grid(&self) -> SampleGrid {
        let horizon = self.horizon();
        let mut lo = self.x0;
        let mut hi = self.x0;
        for c in self.family().curves() {
            for k in 0..=64 {
                let x = c.value_at(horizon * k as f64 / 64.0);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        SampleGrid { n_t: 65, n_x: 401, x_min: lo - 5.0, x_max: hi + 5.0 }
    }

    /// Runs the ordering, Θ/Ξ and skewness checks and fails on the first violation.
    pub fn validate(&self, grid: &SampleGrid) -> Result<ProblemReport> {
        let family = self.family().validate(grid.n_t.max(2))?;
        let sigma = self.sigma.check_class(grid)?;
        let drift = self.drift.check_class(grid)?;
        let beta = self.beta.report(grid.n_t.max(2))?;
        let report = ProblemReport { family, sigma, drift, beta };
        if !report.family.passed {
            return Err(Error::CurvesNotOrdered {
                min_gap: report.family.min_gap,
                required: report.family.declared_gap,
            });
        }
        if !report.sigma.passed {
            return Err(Error::Hypothesis(format!(
                "sigma leaves its Θ class: sampled range [{}, {}]",
                report.sigma.min, report.sigma.max
            )));
        }
        if !report.drift.passed {
            return Err(Error::Hypothesis(format!(
                "drift leaves its Ξ class: sampled range [{}, {}]",
                report.drift.min, report.drift.max
            )));
        }
        if !report.beta.passed {
            return Err(Error::Hypothesis(format!(
                "beta leaves (-1,1): sampled range [{}, {}]",
                report.beta.k, report.beta.kappa
            )));
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemReport {
    pub family: crate::geometry::FamilyReport,
    pub sigma: ClassReport,
    pub drift: ClassReport,
    pub beta: BetaReport,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::InterfaceCurve;
    use alloc::vec;
    use core::f64::consts::PI;

    fn family_at_zero(horizon: f64) -> CurveFamily {
        CurveFamily::new(vec![InterfaceCurve::constant(0.0, horizon).unwrap()], 1.0).unwrap()
    }

    fn sigma_one_two() -> PiecewiseCoefficient {
        PiecewiseCoefficient::new(
            family_at_zero(1.0),
            vec![SmoothFn::constant(1.0), SmoothFn::constant(2.0)],
            CoefficientClass::Diffusion { m: 1.0, big_m: 2.0 },
        )
        .unwrap()
    }

    #[test]
    fn one_sided_values() {
        let s = sigma_one_two();
        assert_eq!(s.eval(0.5, 0.0, Side::Left).unwrap(), 1.0);
        assert_eq!(s.eval(0.5, 0.0, Side::Right).unwrap(), 2.0);
        assert_eq!(s.eval(0.5, 0.0, Side::Symmetric).unwrap(), 1.5);
        for side in [Side::Left, Side::Right, Side::Symmetric] {
            assert_eq!(s.eval(0.5, -3.0, side).unwrap(), 1.0);
        }
        assert_eq!(s.jump(0.5, 1).unwrap(), 0.5);
    }

    #[test]
    fn piece_count_is_checked() {
        let err = PiecewiseCoefficient::new(
            family_at_zero(1.0),
            vec![SmoothFn::constant(1.0)],
            CoefficientClass::Unconstrained,
        );
        assert!(matches!(err, Err(Error::InvalidCoefficient(_))));
    }

    #[test]
    fn h_hypothesis_examples() {
        let grid = SampleGrid { n_t: 5, n_x: 41, x_min: -2.0, x_max: 2.0 };
        let r = sigma_one_two().check_h_hypothesis(&grid, 10.0).unwrap();
        assert!(r.passed);
        assert!(r.pieces.iter().all(|p| p.sup_dx == 0.0 && p.sup_dt == 0.0));

        let lin = PiecewiseCoefficient::new(
            family_at_zero(1.0),
            vec![SmoothFn::Affine { c0: 1.0, ct: 0.0, cx: 1.0 }, SmoothFn::constant(1.0)],
            CoefficientClass::Unconstrained,
        )
        .unwrap();
        let r = lin.check_h_hypothesis(&grid, 10.0).unwrap();
        assert_eq!(r.pieces[0].sup_dx, 1.0);
        assert_eq!(r.pieces[1].sup_dx, 0.0);

        let sin_t = PiecewiseCoefficient::uniform(
            family_at_zero(PI),
            SmoothFn::Sinusoid { c0: 0.0, amp: 1.0, freq_t: 1.0, freq_x: 0.0, phase: 0.0 },
            CoefficientClass::Drift { big_m: 1.0 },
        )
        .unwrap();
        let r = sin_t.check_h_hypothesis(&grid, 10.0).unwrap();
        assert!(r.pieces.iter().all(|p| (p.sup_dt - 1.0).abs() < 1e-15));
        assert!(!sin_t.check_h_hypothesis(&grid, 0.5).unwrap().passed);
    }

    #[test]
    fn aj_constant_jump() {
        // σ = 1 | 2  ⇒  σ² jump 3 for all t
        let r = sigma_one_two().check_aj_hypothesis(11).unwrap();
        assert!(r.passed);
        assert!((r.interfaces[0].max_jump - 3.0).abs() < 1e-15);
        assert!((r.constant - 1.0).abs() < 1e-14);
    }

    #[test]
    fn aj_no_jump_is_vacuous() {
        let s = PiecewiseCoefficient::uniform(
            family_at_zero(1.0),
            SmoothFn::constant(1.3),
            CoefficientClass::Diffusion { m: 1.0, big_m: 2.0 },
        )
        .unwrap();
        let r = s.check_aj_hypothesis(5).unwrap();
        assert!(r.passed);
        assert_eq!(r.interfaces[0].constant, None);
        assert_eq!(r.constant, 0.0);
    }

    #[test]
    fn aj_witness_for_varying_jump() {
        // J(t) = 1 + sin²t on [0, π]: ∫J = 3π/2, max J = 2 ⇒ C* = 2π / (3π/2) = 4/3.
        let n = 201;
        let times: Vec<f64> = (0..n).map(|k| PI * k as f64 / (n - 1) as f64).collect();
        let jumps: Vec<f64> = times.iter().map(|t| 1.0 + t.sin() * t.sin()).collect();
        let a = average_jump_constant(&times, &jumps);
        assert!((a.integral - 1.5 * PI).abs() < 1e-12);
        assert!((a.constant.unwrap() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn beta_examples() {
        let c = SkewnessSchedule::constant(&[1.0 / 3.0], 1.0).unwrap();
        assert_eq!(c.eval_beta(1, 0.2).unwrap(), 1.0 / 3.0);
        assert_eq!(c.eval_beta_derivative(1, 0.2).unwrap(), 0.0);
        assert_eq!(c.report(11).unwrap().derivative_bound, 0.0);

        let s =
            SkewnessSchedule::new(vec![BetaFn::Sinusoid { c0: 0.0, amp: 0.5, freq: 1.0, phase: 0.0 }], 1.0).unwrap();
        assert_eq!(s.eval_beta(1, 0.0).unwrap(), 0.0);
        assert_eq!(s.eval_beta_derivative(1, 0.0).unwrap(), 0.5);

        let near = SkewnessSchedule::constant(&[0.9], 1.0).unwrap();
        assert_eq!(near.eval_beta(1, 1.0).unwrap(), 0.9);

        assert!(matches!(c.eval_beta(2, 0.0), Err(Error::InterfaceIndex { .. })));
        assert!(matches!(c.eval_beta(1, 1.5), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn beta_out_of_range_rejected() {
        assert!(matches!(SkewnessSchedule::constant(&[1.5], 1.0), Err(Error::BetaOutOfRange { interface: 1, .. })));
        assert!(SkewnessSchedule::new(vec![BetaFn::Affine { c0: 0.5, c1: 0.6 }], 1.0).is_err());
        assert!(SkewnessSchedule::new(vec![BetaFn::Affine { c0: 0.5, c1: 0.4 }], 1.0).is_ok());
    }

    #[test]
    fn class_membership_on_grid() {
        let grid = SampleGrid { n_t: 5, n_x: 21, x_min: -3.0, x_max: 3.0 };
        let r = sigma_one_two().check_class(&grid).unwrap();
        assert!(r.passed);
        assert_eq!((r.min, r.max), (1.0, 2.0));
        let bad = PiecewiseCoefficient::new(
            family_at_zero(1.0),
            vec![SmoothFn::constant(0.5), SmoothFn::constant(2.0)],
            CoefficientClass::Diffusion { m: 1.0, big_m: 2.0 },
        )
        .unwrap();
        assert!(!bad.check_class(&grid).unwrap().passed);
    }

    #[test]
    fn arctan_derivatives_match_finite_differences() {
        let f = SmoothFn::Arctan { c0: 1.0, amp: 0.1, scale: 2.0, center: 0.3 };
        let (t, x, h) = (0.2, 0.7, 1e-5);
        let fd = (f.value(t, x + h) - f.value(t, x - h)) / (2.0 * h);
        assert!((fd - f.d_x(t, x)).abs() < 1e-9);
        let fd2 = (f.d_x(t, x + h) - f.d_x(t, x - h)) / (2.0 * h);
        assert!((fd2 - f.d_xx(t, x)).abs() < 1e-8);
    }
}
