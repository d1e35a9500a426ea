use proptest::prelude::*;
use skewflow_core::geometry::InterfaceCurve;
use skewflow_core::transform::{
    beta_from_a, pushforward_beta, DivergenceTriple, RemovalTransform, StraightenTransform,
};
use skewflow_core::{
    BetaFn, CoefficientClass, CurveFamily, PiecewiseCoefficient, ProblemSpec, Side, SkewnessSchedule, SmoothFn,
};

#[derive(Debug, Clone)]
struct Shape {
    curves: Vec<(f64, f64, f64, f64)>,
    betas: Vec<(f64, f64, f64, f64)>,
    sigmas: Vec<f64>,
}

fn shape() -> impl Strategy<Value = Shape> {
    (1usize..=3).prop_flat_map(|n| {
        (
            prop::collection::vec((-0.2..0.2f64, 0.0..0.4f64, 0.5..2.0f64, 0.0..6.0f64), n),
            prop::collection::vec((-0.6..0.6f64, 0.0..0.3f64, 0.5..3.0f64, 0.0..6.0f64), n),
            prop::collection::vec(0.5..2.0f64, n + 1),
        )
            .prop_map(|(curves, betas, sigmas)| Shape { curves, betas, sigmas })
    })
}

impl Shape {
    fn family(&self) -> CurveFamily {
        let curves = self
            .curves
            .iter()
            .enumerate()
            .map(|(i, &(c0, amp, freq, phase))| {
                InterfaceCurve::sinusoid(1.5 * i as f64 + c0, amp, freq, phase, 1.0).unwrap()
            })
            .collect();
        CurveFamily::new(curves, 0.2).unwrap()
    }

    fn schedule(&self) -> SkewnessSchedule {
        let betas =
            self.betas.iter().map(|&(c0, amp, freq, phase)| BetaFn::Sinusoid { c0, amp, freq, phase }).collect();
        SkewnessSchedule::new(betas, 1.0).unwrap()
    }

    fn removal(&self) -> RemovalTransform {
        RemovalTransform::new(self.family(), self.schedule()).unwrap()
    }

    fn problem(&self) -> ProblemSpec {
        let family = self.family();
        let sigma = PiecewiseCoefficient::new(
            family.clone(),
            self.sigmas.iter().map(|&s| SmoothFn::constant(s)).collect(),
            CoefficientClass::Diffusion { m: 0.5, big_m: 2.0 },
        )
        .unwrap();
        let drift =
            PiecewiseCoefficient::uniform(family, SmoothFn::constant(0.0), CoefficientClass::Drift { big_m: 0.0 })
                .unwrap();
        ProblemSpec::new(sigma, drift, self.schedule(), 0.0).unwrap()
    }
}

proptest! {
    #[test]
    fn removal_round_trip(s in shape(), t in 0.0..=1.0f64, x in -6.0..9.0f64) {
        let tr = s.removal();
        let y = tr.big_r(t, x).unwrap();
        prop_assert!((tr.little_r(t, y).unwrap() - x).abs() <= 1e-12 * (1.0 + x.abs()));
    }

    #[test]
    fn removal_is_strictly_increasing(s in shape(), t in 0.0..=1.0f64, x in -6.0..9.0f64, dx in 1e-6..1.0f64) {
        let tr = s.removal();
        prop_assert!(tr.big_r(t, x + dx).unwrap() > tr.big_r(t, x).unwrap());
        prop_assert!(tr.mu(t, x).unwrap() > 0.0);
    }

    #[test]
    fn removal_kills_skewness(s in shape(), t in 0.0..=1.0f64) {
        let tr = s.removal();
        for id in 1..=tr.family().len() {
            let beta = tr.beta().eval_beta(id, t).unwrap();
            let (pp, pm) = tr.big_r_x_onesided(t, id).unwrap();
            prop_assert!(pushforward_beta(pp, pm, beta).unwrap().abs() <= 1e-14);
            let (ap, am) = tr.little_r_y_onesided(t, id).unwrap();
            prop_assert!((pushforward_beta(ap, am, 0.0).unwrap() - beta).abs() <= 1e-14);
        }
    }

    #[test]
    fn transformed_curves_are_images(s in shape(), t in 0.0..=1.0f64) {
        let tr = s.removal();
        let ys = tr.transformed_curves(t).unwrap();
        let xs = tr.family().positions(t).unwrap();
        prop_assert_eq!(ys[0], 0.0);
        for (x, y) in xs.iter().zip(&ys) {
            prop_assert!((tr.big_r(t, *x).unwrap() - y).abs() <= 1e-13 * (1.0 + y.abs()));
        }
    }

    /// Central differences of `r` in `t` converge to `r'_t` at second order.
    #[test]
    fn r_t_finite_difference_order(s in shape(), t in 0.1..0.9f64, y in -4.0..6.0f64) {
        let tr = s.removal();
        let frame = tr.frame(t).unwrap();
        // Stay clear of the transformed curves so the difference quotient is smooth.
        prop_assume!(frame.ys.iter().all(|c| (c - y).abs() > 0.05));
        let exact = tr.r_t(t, y, Side::Symmetric).unwrap();
        let fd = |h: f64| (tr.little_r(t + h, y).unwrap() - tr.little_r(t - h, y).unwrap()) / (2.0 * h);
        let (e1, e2) = ((fd(4e-3) - exact).abs(), (fd(2e-3) - exact).abs());
        prop_assert!(e2 < 1e-10 || (e1 / e2).log2() >= 1.9, "errors {e1:e} {e2:e}");
    }

    #[test]
    fn straightening_anchors_and_inverse(s in shape(), t in 0.0..=1.0f64, x in -6.0..9.0f64) {
        let st = StraightenTransform::new(&s.family()).unwrap();
        for id in 1..=st.physical_len() {
            let xi = s.family().curve(id).unwrap().eval(t).unwrap();
            prop_assert!((st.big_psi(t, xi).unwrap() - st.anchor(id) as f64).abs() <= 1e-12);
        }
        let xh = st.big_psi(t, x).unwrap();
        prop_assert!((st.little_psi(t, xh).unwrap() - x).abs() <= 1e-12 * (1.0 + x.abs()));
        prop_assert!(st.psi_x(t, x, Side::Symmetric).unwrap() > 0.0);
    }

    #[test]
    fn dictionary_round_trip(s in shape(), t in 0.0..=1.0f64, x in -6.0..9.0f64, c in 0.25..4.0f64) {
        let p = s.problem();
        let triple = DivergenceTriple::new(&p).scaled(c).unwrap();
        for id in 1..=p.family().len() {
            let (ap, am) = triple.a_onesided(t, id).unwrap();
            let beta = p.beta.eval_beta(id, t).unwrap();
            prop_assert!((beta_from_a(ap, am).unwrap() - beta).abs() <= 1e-14);
        }
        let (rho, a, big_b) = triple.eval(t, x, Side::Left).unwrap();
        let sigma = p.sigma.eval(t, x, Side::Left).unwrap();
        prop_assert!((rho * a - sigma * sigma).abs() <= 1e-13 * sigma * sigma);
        prop_assert_eq!(big_b, p.drift.eval(t, x, Side::Left).unwrap());
    }
}
