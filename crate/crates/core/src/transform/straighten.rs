use alloc::vec::Vec;

use crate::coefficients::{ProblemSpec, Side};
use crate::error::{Error, Result};
use crate::geometry::{locate, CurveFamily};
use crate::math;

use super::pushforward_beta;

/// Samples used to certify the gaps before straightening.
const GAP_SAMPLES: usize = 1001;

/// Piecewise-affine `Ψ(t, ·)` sending the `j`-th (padded) curve to the integer `j`,
/// and its inverse `ψ`.
///
/// Families with fewer than three curves are padded with ghost curves at
/// distance `gap` (one on each side for `I = 1`, one below for `I = 2`).
/// Outside the outermost curves `Ψ` continues the first and last segments,
/// so the slope is continuous across the extreme curves.
#[derive(Debug, Clone, PartialEq)]
pub struct StraightenTransform {
    padded: CurveFamily,
    physical: usize,
    ghosts_below: usize,
}

/// `Ψ` frozen at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct StraightenFrame {
    pub t: f64,
    /// Padded curve positions.
    pub xs: Vec<f64>,
    /// `d_j = x_{j+1} − x_j` for `j = 1..I_p−1`.
    pub lengths: Vec<f64>,
    /// `d_j'(t)`
    pub length_rates: Vec<f64>,
    /// `x_j'(t)`
    pub velocities: Vec<f64>,
}

impl StraightenTransform {
    pub fn new(family: &CurveFamily) -> Result<Self> {
        let report = family.validate(GAP_SAMPLES)?;
        if !report.passed {
            return Err(Error::CurvesNotOrdered { min_gap: report.min_gap, required: report.declared_gap });
        }
        let gap = family.gap();
        let curves = family.curves();
        let (padded, ghosts_below) = match curves.len() {
            1 => (alloc::vec![curves[0].shifted(-gap), curves[0], curves[0].shifted(gap)], 1),
            2 => (alloc::vec![curves[0].shifted(-gap), curves[0], curves[1]], 1),
            _ => (curves.to_vec(), 0),
        };
        Ok(Self { padded: CurveFamily::new(padded, gap)?, physical: curves.len(), ghosts_below })
    }

    /// Curves after ghost padding.
    pub fn padded_family(&self) -> &CurveFamily {
        &self.padded
    }

    pub fn padded_len(&self) -> usize {
        self.padded.len()
    }

    pub fn physical_len(&self) -> usize {
        self.physical
    }

    /// Straightened position of physical interface `id` (1-based).
    pub fn anchor(&self, id: usize) -> usize {
        id + self.ghosts_below
    }

    /// Physical subdomain index of padded segment `k`.
    #[inline]
    pub fn physical_index(&self, k: usize) -> usize {
        k.saturating_sub(self.ghosts_below).min(self.physical)
    }

    /// Physical interface id sitting at padded node `j`, if any.
    pub fn physical_interface(&self, j: usize) -> Option<usize> {
        (j > self.ghosts_below && j <= self.ghosts_below + self.physical).then(|| j - self.ghosts_below)
    }

    pub fn frame(&self, t: f64) -> Result<StraightenFrame> {
        self.padded.check_time(t)?;
        Ok(self.frame_at(t))
    }

    pub(crate) fn frame_at(&self, t: f64) -> StraightenFrame {
        let xs = self.padded.positions_at(t);
        let velocities = self.padded.velocities_at(t);
        let lengths = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let length_rates = velocities.windows(2).map(|w| w[1] - w[0]).collect();
        StraightenFrame { t, xs, lengths, length_rates, velocities }
    }

    /// `Ψ(t, x)`
    pub fn big_psi(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.frame(t)?.big_psi(x))
    }

    /// `ψ(t, x̂)`
    pub fn little_psi(&self, t: f64, xh: f64) -> Result<f64> {
        Ok(self.frame(t)?.little_psi(xh))
    }

    pub fn psi_x(&self, t: f64, x: f64, side: Side) -> Result<f64> {
        Ok(self.frame(t)?.psi_x(x, side))
    }

    pub fn psi_t(&self, t: f64, x: f64, side: Side) -> Result<f64> {
        Ok(self.frame(t)?.psi_t(x, side))
    }

    /// Sampled `[m̂, M̂]` for the slopes of `Ψ(t, ·)`.
    pub fn slope_bounds(&self, n_t: usize) -> (f64, f64) {
        let n = n_t.max(2);
        let horizon = self.padded.horizon();
        (0..n).fold((f64::INFINITY, 0.0f64), |(lo, hi), j| {
            let f = self.frame_at(horizon * j as f64 / (n - 1) as f64);
            f.lengths.iter().fold((lo, hi), |(lo, hi), d| (lo.min(1.0 / d), hi.max(1.0 / d)))
        })
    }
}

impl StraightenFrame {
    #[inline]
    pub fn padded_len(&self) -> usize {
        self.xs.len()
    }

    /// Affine piece (1-based `j ∈ 1..I_p−1`) used on padded segment `k ∈ 0..=I_p`.
    #[inline]
    fn piece(&self, k: usize) -> usize {
        k.clamp(1, self.xs.len() - 1)
    }

    /// Padded segment containing `x` for the given side convention at a curve.
    #[inline]
    fn segments(&self, x: f64, side: Side) -> (usize, Option<usize>) {
        let loc = locate(&self.xs, x, 0.0);
        let on = (loc.index > 0 && self.xs[loc.index - 1] == x).then_some(loc.index);
        match (on, side) {
            (Some(j), Side::Left) => (j - 1, None),
            (Some(j), Side::Symmetric) => (j - 1, Some(j)),
            _ => (loc.index, None),
        }
    }

    #[inline]
    pub fn big_psi(&self, x: f64) -> f64 {
        let j = self.piece(locate(&self.xs, x, 0.0).index);
        j as f64 + (x - self.xs[j - 1]) / self.lengths[j - 1]
    }

    #[inline]
    pub fn little_psi(&self, xh: f64) -> f64 {
        let fl = math::floor(xh);
        if fl == xh && fl >= 1.0 && fl <= self.xs.len() as f64 {
            return self.xs[fl as usize - 1];
        }
        let j = if fl < 1.0 { 1 } else { (fl as usize).min(self.xs.len() - 1) };
        self.xs[j - 1] + (xh - j as f64) * self.lengths[j - 1]
    }

    /// `Ψ'_x` on padded segment `k`.
    #[inline]
    pub fn psi_x_on(&self, k: usize) -> f64 {
        1.0 / self.lengths[self.piece(k) - 1]
    }

    /// `Ψ'_t` on padded segment `k` at position `x`.
    #[inline]
    pub fn psi_t_on(&self, k: usize, x: f64) -> f64 {
        let j = self.piece(k) - 1;
        let d = self.lengths[j];
        -self.velocities[j] / d - (x - self.xs[j]) * self.length_rates[j] / (d * d)
    }

    pub fn psi_x(&self, x: f64, side: Side) -> f64 {
        match self.segments(x, side) {
            (k, None) => self.psi_x_on(k),
            (l, Some(r)) => 0.5 * (self.psi_x_on(l) + self.psi_x_on(r)),
        }
    }

    pub fn psi_t(&self, x: f64, side: Side) -> f64 {
        match self.segments(x, side) {
            (k, None) => self.psi_t_on(k, x),
            (l, Some(r)) => 0.5 * (self.psi_t_on(l, x) + self.psi_t_on(r, x)),
        }
    }

    /// Padded segment of a straightened coordinate; integers belong to the right.
    #[inline]
    pub fn segment_of_hat(&self, xh: f64) -> usize {
        let fl = math::floor(xh);
        if fl < 1.0 {
            0
        } else {
            (fl as usize).min(self.xs.len())
        }
    }
}

/// `σ̂ = σ·Ψ'_x`, `b̂ = b·Ψ'_x + Ψ'_t` (composed with `ψ`) and `β̂_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct HatCoefficients {
    problem: ProblemSpec,
    straighten: StraightenTransform,
}

impl HatCoefficients {
    pub fn new(problem: &ProblemSpec) -> Result<Self> {
        Ok(Self { problem: problem.clone(), straighten: StraightenTransform::new(problem.family())? })
    }

    pub fn straighten(&self) -> &StraightenTransform {
        &self.straighten
    }

    /// `(σ̂, b̂)` at straightened position `x̂` on padded segment `k`.
    pub(crate) fn on_segment(&self, frame: &StraightenFrame, k: usize, xh: f64) -> (f64, f64) {
        let x = frame.little_psi(xh);
        let i = self.straighten.physical_index(k);
        let px = frame.psi_x_on(k);
        let sigma = self.problem.sigma.piece(i).value(frame.t, x);
        let b = self.problem.drift.piece(i).value(frame.t, x);
        (sigma * px, b * px + frame.psi_t_on(k, x))
    }

    /// `(σ̂, b̂)(t, x̂)` with the side convention at integer nodes.
    pub fn eval(&self, t: f64, xh: f64, side: Side) -> Result<(f64, f64)> {
        let frame = self.straighten.frame(t)?;
        let k = frame.segment_of_hat(xh);
        let on_node = k >= 1 && math::floor(xh) == xh && k <= frame.padded_len();
        Ok(match (on_node, side) {
            (true, Side::Left) => self.on_segment(&frame, k - 1, xh),
            (true, Side::Symmetric) => {
                let (l, r) = (self.on_segment(&frame, k - 1, xh), self.on_segment(&frame, k, xh));
                (0.5 * (l.0 + r.0), 0.5 * (l.1 + r.1))
            }
            _ => self.on_segment(&frame, k, xh),
        })
    }

    /// `β̂` at padded node `j`: the push-forward of `β` (zero on ghosts) by `Ψ`.
    pub fn beta_hat(&self, t: f64, j: usize) -> Result<f64> {
        let frame = self.straighten.frame(t)?;
        if j == 0 || j > frame.padded_len() {
            return Err(Error::InterfaceIndex { index: j, count: frame.padded_len() });
        }
        let beta = match self.straighten.physical_interface(j) {
            Some(id) => self.problem.beta.eval_beta(id, t)?,
            None => 0.0,
        };
        pushforward_beta(frame.psi_x_on(j), frame.psi_x_on(j - 1), beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{CoefficientClass, PiecewiseCoefficient, SkewnessSchedule, SmoothFn};
    use crate::geometry::InterfaceCurve;
    use alloc::vec;

    fn family(curves: Vec<InterfaceCurve>) -> CurveFamily {
        CurveFamily::new(curves, 0.5).unwrap()
    }

    #[test]
    fn integer_curves_give_identity() {
        let f = family((1..=3).map(|i| InterfaceCurve::constant(i as f64, 1.0).unwrap()).collect());
        let st = StraightenTransform::new(&f).unwrap();
        for x in [-3.0, 0.4, 1.0, 2.5, 3.0, 8.0] {
            assert_eq!(st.big_psi(0.5, x).unwrap(), x);
            assert_eq!(st.little_psi(0.5, x).unwrap(), x);
            assert_eq!(st.psi_x(0.5, x, Side::Symmetric).unwrap(), 1.0);
            assert_eq!(st.psi_t(0.5, x, Side::Symmetric).unwrap(), 0.0);
        }
    }

    #[test]
    fn affine_interpolation() {
        let f = family([0.0, 2.0, 3.0].iter().map(|&c| InterfaceCurve::constant(c, 1.0).unwrap()).collect());
        let st = StraightenTransform::new(&f).unwrap();
        assert_eq!(st.big_psi(0.0, 1.0).unwrap(), 1.5);
        assert_eq!(st.psi_x(0.0, 2.0, Side::Left).unwrap(), 0.5);
        assert_eq!(st.psi_x(0.0, 2.0, Side::Right).unwrap(), 1.0);
    }

    #[test]
    fn rigid_translation() {
        let f = family((0..3).map(|i| InterfaceCurve::linear(i as f64, 1.0, 2.0).unwrap()).collect());
        let st = StraightenTransform::new(&f).unwrap();
        let t = 0.7;
        let x = 1.0 + t + 0.3;
        assert!((st.big_psi(t, x).unwrap() - (x - t + 1.0)).abs() < 1e-15);
        assert!((st.psi_t(t, x, Side::Symmetric).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn anchors_are_exact() {
        let f = family(vec![
            InterfaceCurve::sinusoid(0.0, 0.3, 1.0, 0.2, 1.0).unwrap(),
            InterfaceCurve::linear(1.1, 0.37, 1.0).unwrap(),
            InterfaceCurve::sinusoid(2.9, 0.1, 3.0, 0.0, 1.0).unwrap(),
            InterfaceCurve::constant(4.3, 1.0).unwrap(),
        ]);
        let st = StraightenTransform::new(&f).unwrap();
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            for (i, x) in f.positions(t).unwrap().into_iter().enumerate() {
                assert_eq!(st.big_psi(t, x).unwrap(), (i + 1) as f64);
                assert_eq!(st.little_psi(t, (i + 1) as f64).unwrap(), x);
            }
        }
    }

    #[test]
    fn ghosts_for_small_families() {
        let one = family(vec![InterfaceCurve::constant(0.0, 1.0).unwrap()]);
        let st = StraightenTransform::new(&one).unwrap();
        assert_eq!(st.padded_len(), 3);
        assert_eq!(st.anchor(1), 2);
        assert_eq!(st.big_psi(0.0, 0.0).unwrap(), 2.0);
        assert_eq!(st.big_psi(0.0, 1.0).unwrap(), 4.0);
        assert_eq!(st.physical_index(0), 0);
        assert_eq!(st.physical_index(2), 1);
        assert_eq!(st.physical_index(4), 1);

        let two =
            family(vec![InterfaceCurve::constant(0.0, 1.0).unwrap(), InterfaceCurve::constant(1.0, 1.0).unwrap()]);
        let st = StraightenTransform::new(&two).unwrap();
        assert_eq!((st.padded_len(), st.anchor(1), st.anchor(2)), (3, 2, 3));
        assert_eq!(st.physical_interface(1), None);
        assert_eq!(st.physical_interface(3), Some(2));
    }

    #[test]
    fn crossing_curves_are_rejected() {
        let f = CurveFamily::new(
            vec![
                InterfaceCurve::sinusoid(0.0, 1.0, 1.0, 0.0, core::f64::consts::PI).unwrap(),
                InterfaceCurve::constant(0.5, core::f64::consts::PI).unwrap(),
            ],
            0.1,
        )
        .unwrap();
        assert!(matches!(StraightenTransform::new(&f), Err(Error::CurvesNotOrdered { .. })));
    }

    fn unit_problem(family: CurveFamily, betas: &[f64], drift: f64) -> ProblemSpec {
        let horizon = family.horizon();
        ProblemSpec::new(
            PiecewiseCoefficient::uniform(
                family.clone(),
                SmoothFn::constant(1.0),
                CoefficientClass::Diffusion { m: 1.0, big_m: 1.0 },
            )
            .unwrap(),
            PiecewiseCoefficient::uniform(family, SmoothFn::constant(drift), CoefficientClass::Drift { big_m: 1.0 })
                .unwrap(),
            SkewnessSchedule::constant(betas, horizon).unwrap(),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn hat_coefficient_examples() {
        let cyl = family((1..=3).map(|i| InterfaceCurve::constant(i as f64, 1.0).unwrap()).collect());
        let hat = HatCoefficients::new(&unit_problem(cyl, &[0.2, -0.1, 0.4], 0.3)).unwrap();
        assert_eq!(hat.eval(0.5, 1.7, Side::Symmetric).unwrap(), (1.0, 0.3));
        assert!((hat.beta_hat(0.5, 3).unwrap() - 0.4).abs() < 1e-15);

        let moving = family((0..3).map(|i| InterfaceCurve::linear(i as f64, 1.0, 1.0).unwrap()).collect());
        let hat = HatCoefficients::new(&unit_problem(moving, &[0.2, -0.1, 0.4], 0.3)).unwrap();
        let (s, b) = hat.eval(0.5, 2.4, Side::Symmetric).unwrap();
        assert_eq!(s, 1.0);
        assert!((b - (0.3 - 1.0)).abs() < 1e-15);
        assert!((hat.beta_hat(0.5, 2).unwrap() + 0.1).abs() < 1e-15);
    }

    #[test]
    fn ghost_beta_hat_vanishes() {
        let one = family(vec![InterfaceCurve::sinusoid(0.0, 0.3, 1.0, 0.0, 1.0).unwrap()]);
        let hat = HatCoefficients::new(&unit_problem(one, &[1.0 / 3.0], 0.0)).unwrap();
        assert_eq!(hat.beta_hat(0.4, 1).unwrap(), 0.0);
        assert!((hat.beta_hat(0.4, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(hat.beta_hat(0.4, 3).unwrap(), 0.0);
    }
}
