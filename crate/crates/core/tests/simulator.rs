mod common;

use skewflow_core::geometry::InterfaceCurve;
use skewflow_core::simulator::{interface_occupation, strong_error_probe, LocalTimeAccumulator, QvIncrement};
use skewflow_core::stats::MeanEstimate;
use skewflow_core::{BetaFn, ProblemSpec, SimConfig, Simulator, SmoothFn};

#[test]
fn brownian_motion_moments() {
    let p = ProblemSpec::skew_brownian(0.0, 0.0, 0.0, 1.0).unwrap();
    let n = 20_000;
    let xs = Simulator::new(&p, SimConfig::new(n, 50, 11)).unwrap().terminal_values();
    let mean = MeanEstimate::from_samples(&xs);
    assert!(mean.mean.abs() <= 4.0 / (n as f64).sqrt(), "{mean:?}");
    let var = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
    assert!((var - 1.0).abs() <= 0.05, "variance {var}");
}

#[test]
fn explicit_increments_away_from_interfaces() {
    // σ ≡ 2 and b ≡ 0.5 everywhere; the path never approaches the interface at 5.
    let p = common::constant_problem(vec![InterfaceCurve::constant(5.0, 1.0).unwrap()], 0.5, 2.0, 0.5, &[0.4], 0.0);
    let sim = Simulator::new(&p, SimConfig::new(1, 4, 0)).unwrap();
    let dw = [0.1, -0.3, 0.2, 0.05];
    let mut last = f64::NAN;
    sim.run_with_increments(&dw, |_, _, x, _| last = x).unwrap();
    let expected = 2.0 * dw.iter().sum::<f64>() + 0.5;
    assert!((last - expected).abs() <= 1e-12, "{last} vs {expected}");
    assert!(sim.run_with_increments(&dw[..3], |_, _, _, _| {}).is_err());
}

#[test]
fn same_seed_same_paths() {
    let p = common::two_interface_problem();
    let a = Simulator::new(&p, SimConfig::new(50, 100, 9)).unwrap().simulate();
    let b = Simulator::new(&p, SimConfig::new(50, 100, 9)).unwrap().simulate();
    let c = Simulator::new(&p, SimConfig::new(50, 100, 10)).unwrap().simulate();
    assert_eq!(a.x, b.x);
    assert_ne!(a.x, c.x);
    // A path does not depend on how many others are simulated.
    let d = Simulator::new(&p, SimConfig::new(10, 100, 9)).unwrap().simulate();
    assert_eq!(a.x_path(7), d.x_path(7));
}

#[test]
fn restarted_simulation_starts_where_asked() {
    let p = common::two_interface_problem();
    let sim = Simulator::new(&p, SimConfig::new(3, 20, 1).starting_at(0.25, 0.4).stopping_at(0.75)).unwrap();
    let ens = sim.simulate();
    assert_eq!(ens.times[0], 0.25);
    assert_eq!(*ens.times.last().unwrap(), 0.75);
    for path in 0..3 {
        assert_eq!(ens.x_path(path)[0], 0.4);
    }
    assert!(Simulator::new(&p, SimConfig::new(3, 20, 1).starting_at(0.5, 0.0).stopping_at(0.5)).is_err());
}

/// The transformed process has no atom at the interface: occupation of a
/// `tol`-band scales like `tol`.
#[test]
fn no_sticking_at_interfaces() {
    let p = ProblemSpec::skew_brownian(0.6, 0.0, 0.0, 1.0).unwrap();
    let ens = Simulator::new(&p, SimConfig::new(4000, 1000, 3)).unwrap().simulate();
    let wide = interface_occupation(&ens, &p, 1e-2).unwrap();
    let narrow = interface_occupation(&ens, &p, 1e-3).unwrap();
    let ratio = wide / narrow;
    assert!((5.0..=20.0).contains(&ratio), "occupation {wide} vs {narrow}");
}

#[test]
fn strong_error_decreases_for_smooth_coefficients() {
    let sigma = SmoothFn::Arctan { c0: 1.0, amp: 0.1, scale: 1.0, center: 0.0 };
    let p = common::moving_problem(
        vec![InterfaceCurve::constant(0.0, 1.0).unwrap()],
        0.5,
        vec![sigma, sigma],
        vec![SmoothFn::constant(0.1), SmoothFn::constant(0.1)],
        vec![BetaFn::Constant { b: 0.0 }],
        (0.8, 1.2, 0.1),
    );
    let report = strong_error_probe(&p, 16, 5, 2000, 21).unwrap();
    assert!(report.is_nonincreasing(0.0, 0), "{report:?}");
    assert!(report.order.unwrap() >= 0.4, "{report:?}");
}

#[test]
fn local_time_scales_with_sigma_squared() {
    let curve = InterfaceCurve::constant(0.0, 1.0).unwrap();
    let p1 = common::constant_problem(vec![curve], 0.5, 1.0, 0.0, &[0.2], 0.0);
    let p2 = common::constant_problem(vec![curve], 0.5, 3.0, 0.0, &[0.2], 0.0);
    let mut l1 = LocalTimeAccumulator::new(&p1, 1, 0.1, QvIncrement::SigmaSquared).unwrap();
    let mut l2 = LocalTimeAccumulator::new(&p2, 1, 0.1, QvIncrement::SigmaSquared).unwrap();
    let path = [0.0, 0.05, -0.2, -0.09, 0.3, 0.01, 0.02];
    for (j, &x) in path.iter().enumerate() {
        let t = j as f64 * 0.1;
        l1.observe(t, x);
        l2.observe(t, x);
    }
    // Hits at steps 0, 1, 3, 5 (step 6 is the last state and adds nothing).
    assert!((l1.value() - 4.0 * 0.1 / 0.2).abs() <= 1e-12, "{}", l1.value());
    assert!((l2.value() - 9.0 * l1.value()).abs() <= 1e-12);
}

#[test]
fn local_time_estimator_rejects_bad_window() {
    let p = ProblemSpec::skew_brownian(0.0, 0.0, 0.0, 1.0).unwrap();
    assert!(LocalTimeAccumulator::new(&p, 1, 0.0, QvIncrement::SigmaSquared).is_err());
    assert!(LocalTimeAccumulator::new(&p, 2, 0.1, QvIncrement::SigmaSquared).is_err());
}
