//! Terminal conditions `f`, sources `g` and test functions `φ`.

use crate::math;

/// Space-time functions from a small analytic catalog.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CatalogFn {
    #[default]
    Zero,
    Constant {
        c: f64,
    },
    /// `height · exp(−(x − center)² / (2·width²))`
    Gaussian {
        height: f64,
        center: f64,
        width: f64,
    },
    /// `height · (1 − s²)³` for `|s| < 1`, `s = (x − center)/radius`; zero outside.
    Bump {
        height: f64,
        center: f64,
        radius: f64,
    },
    /// Continuous, affine on each side of `knot`.
    PiecewiseLinear {
        knot: f64,
        value: f64,
        slope_left: f64,
        slope_right: f64,
    },
    /// `1{x > threshold}`
    Indicator {
        threshold: f64,
    },
}

impl CatalogFn {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            CatalogFn::Zero => 0.0,
            CatalogFn::Constant { c } => c,
            CatalogFn::Gaussian { height, center, width } => {
                let s = (x - center) / width;
                height * math::exp(-0.5 * s * s)
            }
            CatalogFn::Bump { height, center, radius } => {
                let s = (x - center) / radius;
                if s.abs() < 1.0 {
                    let w = 1.0 - s * s;
                    height * w * w * w
                } else {
                    0.0
                }
            }
            CatalogFn::PiecewiseLinear { knot, value, slope_left, slope_right } => {
                let slope = if x < knot { slope_left } else { slope_right };
                value + slope * (x - knot)
            }
            CatalogFn::Indicator { threshold } => {
                if x > threshold {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Space-time evaluation; every catalog entry is time independent.
    #[inline]
    pub fn eval(&self, _t: f64, x: f64) -> f64 {
        self.value(x)
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            CatalogFn::Zero => true,
            CatalogFn::Constant { c } => c == 0.0,
            CatalogFn::Gaussian { height, .. } | CatalogFn::Bump { height, .. } => height == 0.0,
            _ => false,
        }
    }

    /// Interval outside which the function vanishes, when there is one.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            CatalogFn::Zero => Some((0.0, 0.0)),
            CatalogFn::Bump { center, radius, .. } => Some((center - radius.abs(), center + radius.abs())),
            _ if self.is_zero() => Some((0.0, 0.0)),
            _ => None,
        }
    }

    /// Whether the function decays at ±∞ (required of PDE terminal data).
    pub fn vanishes_at_infinity(&self) -> bool {
        matches!(self, CatalogFn::Zero | CatalogFn::Gaussian { .. } | CatalogFn::Bump { .. }) || self.is_zero()
    }
}
