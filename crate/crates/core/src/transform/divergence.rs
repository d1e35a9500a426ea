use crate::coefficients::{ProblemSpec, Side};
use crate::error::{Error, Result};
use crate::geometry::{default_interface_tol, locate};

/// Divergence-form data `(ρ, a, B)` with `a = c⁻¹·∏_{x_i ≤ x} (1+β_i)/(1−β_i)`,
/// `ρ = c·σ²/∏(…)` and `B = b`, so that `ρ·a = σ²` and the jumps of `a`
/// reproduce every `β_i`. The default scale is `c = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceTriple {
    problem: ProblemSpec,
    scale: f64,
}

impl DivergenceTriple {
    pub fn new(problem: &ProblemSpec) -> Self {
        Self { problem: problem.clone(), scale: 1.0 }
    }

    /// The equivalent triple `(cρ, a/c, B)`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("triple scale must be positive, got {c}")));
        }
        Ok(Self { problem: self.problem.clone(), scale: self.scale * c })
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `∏_{i ≤ k} (1+β_i)/(1−β_i)` on subdomain `k`.
    #[inline]
    pub(crate) fn a_product(&self, t: f64, k: usize) -> f64 {
        self.problem.beta.functions()[..k].iter().fold(1.0, |acc, b| {
            let v = b.value(t);
            acc * (1.0 + v) / (1.0 - v)
        })
    }

    /// `(ρ, a, B)` on subdomain `k` at `(t, x)`.
    #[inline]
    pub(crate) fn on_subdomain(&self, t: f64, x: f64, k: usize) -> (f64, f64, f64) {
        let p = self.a_product(t, k);
        let s = self.problem.sigma.piece(k).value(t, x);
        let b = self.problem.drift.piece(k).value(t, x);
        (self.scale * s * s / p, p / self.scale, b)
    }

    /// `(ρ, a, B)(t, x)` with the side convention on interfaces.
    pub fn eval(&self, t: f64, x: f64, side: Side) -> Result<(f64, f64, f64)> {
        let family = self.problem.family();
        family.check_time(t)?;
        let xs = family.positions_at(t);
        let loc = locate(&xs, x, default_interface_tol(x));
        Ok(match (loc.on_interface, side) {
            (None, _) => self.on_subdomain(t, x, loc.index),
            (Some(id), Side::Left) => self.on_subdomain(t, x, id - 1),
            (Some(id), Side::Right) => self.on_subdomain(t, x, id),
            (Some(id), Side::Symmetric) => {
                let (l, r) = (self.on_subdomain(t, x, id - 1), self.on_subdomain(t, x, id));
                (0.5 * (l.0 + r.0), 0.5 * (l.1 + r.1), 0.5 * (l.2 + r.2))
            }
        })
    }

    pub fn rho(&self, t: f64, x: f64, side: Side) -> Result<f64> {
        Ok(self.eval(t, x, side)?.0)
    }

    pub fn a(&self, t: f64, x: f64, side: Side) -> Result<f64> {
        Ok(self.eval(t, x, side)?.1)
    }

    pub fn big_b(&self, t: f64, x: f64, side: Side) -> Result<f64> {
        Ok(self.eval(t, x, side)?.2)
    }

    /// `(a(x_i+), a(x_i−))` at interface `id`.
    pub fn a_onesided(&self, t: f64, id: usize) -> Result<(f64, f64)> {
        let n = self.problem.family().len();
        if id == 0 || id > n {
            return Err(Error::InterfaceIndex { index: id, count: n });
        }
        self.problem.family().check_time(t)?;
        Ok((self.a_product(t, id) / self.scale, self.a_product(t, id - 1) / self.scale))
    }
}

/// `β = (a₊ − a₋)/(a₊ + a₋)`
pub fn beta_from_a(a_plus: f64, a_minus: f64) -> Result<f64> {
    if !(a_plus > 0.0 && a_minus > 0.0) {
        return Err(Error::NonPositiveSlope { plus: a_plus, minus: a_minus });
    }
    Ok((a_plus - a_minus) / (a_plus + a_minus))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dictionary_examples() {
        let p = ProblemSpec::skew_brownian(1.0 / 3.0, 0.0, 0.0, 1.0).unwrap();
        let d = DivergenceTriple::new(&p);
        let (rl, al, bl) = d.eval(0.5, -1.0, Side::Symmetric).unwrap();
        let (rr, ar, br) = d.eval(0.5, 1.0, Side::Symmetric).unwrap();
        assert_eq!((rl, al, bl), (1.0, 1.0, 0.0));
        assert!((ar - 2.0).abs() < 1e-15 && (rr - 0.5).abs() < 1e-15 && br == 0.0);
        assert!((rr * ar - 1.0).abs() < 1e-15);
        assert!((beta_from_a(2.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        let (ap, am) = d.a_onesided(0.5, 1).unwrap();
        assert!((beta_from_a(ap, am).unwrap() - 1.0 / 3.0).abs() < 1e-15);

        let zero = ProblemSpec::skew_brownian(0.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(DivergenceTriple::new(&zero).eval(0.5, 2.0, Side::Symmetric).unwrap(), (1.0, 1.0, 0.0));
    }

    #[test]
    fn scaled_triple_keeps_sigma_squared() {
        let p = ProblemSpec::skew_brownian(0.5, 0.0, 0.0, 1.0).unwrap();
        let d = DivergenceTriple::new(&p).scaled(2.0).unwrap();
        for x in [-1.0, 1.0] {
            let (r, a, _) = d.eval(0.1, x, Side::Symmetric).unwrap();
            assert!((r * a - 1.0).abs() < 1e-15);
        }
        assert!(DivergenceTriple::new(&p).scaled(0.0).is_err());
    }
}
