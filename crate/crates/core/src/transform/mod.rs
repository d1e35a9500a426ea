//! Space bijections: the local-time-removing pair `(R, r)`, the interface
//! straightening pair `(ψ, Ψ)`, and the `(σ, b, β) ↔ (ρ, a, B)` dictionary.

mod divergence;
mod removal;
mod straighten;

pub use divergence::{beta_from_a, DivergenceTriple};
pub use removal::{RemovalFrame, RemovalTransform, TransformedBounds, TransformedProblem};
pub use straighten::{HatCoefficients, StraightenFrame, StraightenTransform};

use crate::error::{Error, Result};

/// β of the image process under a map with one-sided slopes `φ₊`, `φ₋`:
/// `[φ₊(1+β) − φ₋(1−β)] / [φ₊(1+β) + φ₋(1−β)]`.
pub fn pushforward_beta(phi_plus: f64, phi_minus: f64, beta: f64) -> Result<f64> {
    if !(phi_plus > 0.0 && phi_minus > 0.0) || !phi_plus.is_finite() || !phi_minus.is_finite() {
        return Err(Error::NonPositiveSlope { plus: phi_plus, minus: phi_minus });
    }
    if !(beta > -1.0 && beta < 1.0) {
        return Err(Error::BetaOutOfRange { interface: 0, value: beta });
    }
    // Same quotient regrouped in the sum and difference of the slopes,
    // which is exact when the slopes agree.
    let d = phi_plus - phi_minus;
    let s = phi_plus + phi_minus;
    Ok((d + beta * s) / (s + beta * d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pushforward_examples() {
        assert_eq!(pushforward_beta(1.0, 1.0, 0.4).unwrap(), 0.4);
        assert!(pushforward_beta(0.5, 1.0, 1.0 / 3.0).unwrap().abs() < 1e-15);
        assert!((pushforward_beta(2.0, 1.0, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert!(matches!(pushforward_beta(0.0, 1.0, 0.0), Err(Error::NonPositiveSlope { .. })));
        assert!(pushforward_beta(1.0, -1.0, 0.0).is_err());
    }
}
