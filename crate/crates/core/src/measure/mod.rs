//! Probability measures on the real line, seen through their CDFs and
//! quantile functions.
//!
//! The convention throughout is the left-continuous one: `F(x) = μ((-∞, x))`
//! and `F⁻¹(p) = inf { x : F(x) ≥ p }` for `p ∈ (0, 1)`.

mod analytic;
mod discrete;
mod io;
mod levy;

pub use analytic::{discretize, AnalyticCurve};
pub use discrete::{from_samples, DiscreteMeasure, EmpiricalMeasure, ATOM_MERGE_TOL};
pub use io::{parse_samples_csv, read_measure_file, Measure, MeasureSpec};
pub use levy::levy_distance;

use crate::error::{Error, Result};

/// A nondecreasing, left-continuous function on `(0, 1)`: the quantile
/// function of some probability measure.
pub trait QuantileCurve: Send + Sync {
    /// `F⁻¹(p)`. Callers must pass `p ∈ (0, 1)`.
    fn quantile(&self, p: f64) -> f64;

    /// Levels in `(0, 1)` where the curve may jump or bend. Exhaustive for
    /// discrete measures, advisory (possibly empty) for analytic families.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// The discrete representation, when the curve is a step function.
    fn as_discrete(&self) -> Option<&DiscreteMeasure> {
        None
    }
}

/// `F⁻¹(p)` with the domain checked.
pub fn quantile_eval<Q: QuantileCurve + ?Sized>(curve: &Q, p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(curve.quantile(p))
    } else {
        Err(Error::Domain(p))
    }
}

/// `F(x) = μ((-∞, x))`.
pub fn cdf_eval(mu: &DiscreteMeasure, x: f64) -> f64 {
    mu.cdf(x)
}

impl<Q: QuantileCurve + ?Sized> QuantileCurve for &Q {
    fn quantile(&self, p: f64) -> f64 {
        (**self).quantile(p)
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn as_discrete(&self) -> Option<&DiscreteMeasure> {
        (**self).as_discrete()
    }
}

impl<Q: QuantileCurve + ?Sized> QuantileCurve for Box<Q> {
    fn quantile(&self, p: f64) -> f64 {
        (**self).quantile(p)
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn as_discrete(&self) -> Option<&DiscreteMeasure> {
        (**self).as_discrete()
    }
}
