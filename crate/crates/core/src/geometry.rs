//! Interface curves `x_1(t) < … < x_I(t)` on `[0, T]` and the space-time
//! subdomains `D_0, …, D_I` they cut out.
//!
//! Curves come from a closed analytic catalog so that `x_i'(t)` is exact.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Analytic curve shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveKind {
    /// `x(t) = c`
    Constant { c: f64 },
    /// `x(t) = c0 + c1 t`
    Linear { c0: f64, c1: f64 },
    /// `x(t) = c0 + amp sin(freq t + phase)`
    Sinusoid { c0: f64, amp: f64, freq: f64, phase: f64 },
}

impl CurveKind {
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            CurveKind::Constant { c } => c,
            CurveKind::Linear { c0, c1 } => c0 + c1 * t,
            CurveKind::Sinusoid { c0, amp, freq, phase } => c0 + amp * math::sin(freq * t + phase),
        }
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            CurveKind::Constant { .. } => 0.0,
            CurveKind::Linear { c1, .. } => c1,
            CurveKind::Sinusoid { amp, freq, phase, .. } => amp * freq * math::cos(freq * t + phase),
        }
    }

    /// Upper bound of `|x'(t)|` over all `t`.
    pub fn speed_bound(&self) -> f64 {
        match *self {
            CurveKind::Constant { .. } => 0.0,
            CurveKind::Linear { c1, .. } => math::abs(c1),
            CurveKind::Sinusoid { amp, freq, .. } => math::abs(amp * freq),
        }
    }

    /// The same shape translated by `delta` in space.
    pub fn shifted(&self, delta: f64) -> CurveKind {
        match *self {
            CurveKind::Constant { c } => CurveKind::Constant { c: c + delta },
            CurveKind::Linear { c0, c1 } => CurveKind::Linear { c0: c0 + delta, c1 },
            CurveKind::Sinusoid { c0, amp, freq, phase } => CurveKind::Sinusoid { c0: c0 + delta, amp, freq, phase },
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            CurveKind::Constant { c } => c.is_finite(),
            CurveKind::Linear { c0, c1 } => c0.is_finite() && c1.is_finite(),
            CurveKind::Sinusoid { c0, amp, freq, phase } => {
                c0.is_finite() && amp.is_finite() && freq.is_finite() && phase.is_finite()
            }
        }
    }
}

/// One interface curve `t ↦ x_i(t)` on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceCurve {
    kind: CurveKind,
    horizon: f64,
}

impl InterfaceCurve {
    pub fn new(kind: CurveKind, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        if !kind.is_finite() {
            return Err(Error::InvalidFamily(format!("non-finite curve parameters: {kind:?}")));
        }
        Ok(Self { kind, horizon })
    }

    pub fn constant(c: f64, horizon: f64) -> Result<Self> {
        Self::new(CurveKind::Constant { c }, horizon)
    }

    pub fn linear(c0: f64, c1: f64, horizon: f64) -> Result<Self> {
        Self::new(CurveKind::Linear { c0, c1 }, horizon)
    }

    pub fn sinusoid(c0: f64, amp: f64, freq: f64, phase: f64, horizon: f64) -> Result<Self> {
        Self::new(CurveKind::Sinusoid { c0, amp, freq, phase }, horizon)
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if (0.0..=self.horizon).contains(&t) {
            Ok(())
        } else {
            Err(Error::TimeOutOfRange { t, horizon: self.horizon })
        }
    }

    /// `x_i(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.kind.value(t))
    }

    /// `x_i'(t)`, exact.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.kind.derivative(t))
    }

    /// Unchecked evaluation for hot loops whose time grid is already inside `[0, T]`.
    #[inline]
    pub(crate) fn value_at(&self, t: f64) -> f64 {
        self.kind.value(t)
    }

    #[inline]
    pub(crate) fn derivative_at(&self, t: f64) -> f64 {
        self.kind.derivative(t)
    }

    pub(crate) fn shifted(&self, delta: f64) -> Self {
        Self { kind: self.kind.shifted(delta), horizon: self.horizon }
    }
}

/// Default half-width of the band treated as "on an interface".
#[inline]
pub fn default_interface_tol(x: f64) -> f64 {
    1e-12 * (1.0 + math::abs(x))
}

/// Where a point sits relative to the curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    /// Subdomain index `i ∈ 0..=I`; `x` lies in the closure of `D_i`.
    pub index: usize,
    /// 1-based id of the interface within tolerance of `x`, lowest id first.
    pub on_interface: Option<usize>,
}

/// Ordered interface curves sharing a horizon, with a declared minimum separation.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFamily {
    curves: Vec<InterfaceCurve>,
    horizon: f64,
    gap: f64,
}

impl CurveFamily {
    /// Checks structure only (non-empty, shared horizon, positive gap).
    /// Ordering is checked by [`CurveFamily::validate`] or [`CurveFamily::validated`].
    pub fn new(curves: Vec<InterfaceCurve>, gap: f64) -> Result<Self> {
        let first =
            curves.first().ok_or_else(|| Error::InvalidFamily("at least one interface curve is required".into()))?;
        let horizon = first.horizon();
        if curves.iter().any(|c| c.horizon() != horizon) {
            return Err(Error::InvalidFamily("all curves must share the same horizon".into()));
        }
        if !(gap > 0.0 && gap.is_finite()) {
            return Err(Error::InvalidFamily(format!("gap must be positive, got {gap}")));
        }
        Ok(Self { curves, horizon, gap })
    }

    /// Builds the family and rejects it unless [`CurveFamily::validate`] passes.
    pub fn validated(curves: Vec<InterfaceCurve>, gap: f64, n_samples: usize) -> Result<Self> {
        let family = Self::new(curves, gap)?;
        let report = family.validate(n_samples)?;
        if !report.passed {
            return Err(Error::CurvesNotOrdered { min_gap: report.min_gap, required: gap });
        }
        Ok(family)
    }

    pub fn curves(&self) -> &[InterfaceCurve] {
        &self.curves
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// 1-based access, matching the interface ids used throughout.
    pub fn curve(&self, id: usize) -> Result<&InterfaceCurve> {
        if id == 0 || id > self.curves.len() {
            return Err(Error::InterfaceIndex { index: id, count: self.curves.len() });
        }
        Ok(&self.curves[id - 1])
    }

    pub fn positions(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        Ok(self.positions_at(t))
    }

    pub(crate) fn positions_at(&self, t: f64) -> Vec<f64> {
        self.curves.iter().map(|c| c.value_at(t)).collect()
    }

    pub(crate) fn velocities_at(&self, t: f64) -> Vec<f64> {
        self.curves.iter().map(|c| c.derivative_at(t)).collect()
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        if (0.0..=self.horizon).contains(&t) {
            Ok(())
        } else {
            Err(Error::TimeOutOfRange { t, horizon: self.horizon })
        }
    }

    /// Subdomain containing `(t, x)` and the interface it touches, if any.
    pub fn subdomain_index(&self, t: f64, x: f64, tol: f64) -> Result<Location> {
        self.check_time(t)?;
        if !(tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be non-negative, got {tol}")));
        }
        Ok(locate(&self.positions_at(t), x, tol))
    }

    /// Samples the family on `n_samples` uniform times.
    pub fn validate(&self, n_samples: usize) -> Result<FamilyReport> {
        if n_samples < 2 {
            return Err(Error::InvalidParameter("validation needs at least 2 samples".into()));
        }
        let mut min_gap = f64::INFINITY;
        let mut min_gap_time = 0.0;
        let mut max_speed: f64 = 0.0;
        for k in 0..n_samples {
            let t = self.horizon * k as f64 / (n_samples - 1) as f64;
            let xs = self.positions_at(t);
            for w in xs.windows(2) {
                let d = w[1] - w[0];
                if d < min_gap {
                    min_gap = d;
                    min_gap_time = t;
                }
            }
            for c in &self.curves {
                max_speed = max_speed.max(math::abs(c.derivative_at(t)));
            }
        }
        Ok(FamilyReport { min_gap, min_gap_time, declared_gap: self.gap, max_speed, passed: min_gap >= self.gap })
    }
}

/// Outcome of [`CurveFamily::validate`]. For a single curve `min_gap` is `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyReport {
    pub min_gap: f64,
    pub min_gap_time: f64,
    pub declared_gap: f64,
    pub max_speed: f64,
    pub passed: bool,
}

/// Locates `x` among sorted interface positions.
#[inline]
pub(crate) fn locate(positions: &[f64], x: f64, tol: f64) -> Location {
    let mut index = 0;
    let mut on_interface = None;
    for (k, &p) in positions.iter().enumerate() {
        if on_interface.is_none() && math::abs(x - p) <= tol {
            on_interface = Some(k + 1);
        }
        if p <= x || math::abs(x - p) <= tol {
            index = k + 1;
        }
    }
    Location { index, on_interface }
}
