use crate::cost::CostFunction;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Width at which the argmin searches stop.
pub const ARGMIN_WIDTH: f64 = 1e-12;

/// Outcome of a scalar Fréchet-mean computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarFrechetResult {
    /// Leftmost minimizer of `y ↦ Σ λᵢ g(aᵢ - y)`.
    pub minimizer: f64,
    /// `Σ λᵢ g(aᵢ - y*)` with the weights normalized to one.
    pub objective: f64,
    pub iterations: usize,
}

/// Leftmost minimizer of `f(y) = Σ λᵢ g(aᵢ - y)`.
///
/// The minimizer lies in `[min aᵢ, max aᵢ]`, which is searched directly:
/// closed form for the quadratic cost, bisection on `f'` when `g'` is known,
/// and golden-section search otherwise.
pub fn scalar_frechet_mean(g: &CostFunction, points: &[f64], weights: &[f64]) -> Result<ScalarFrechetResult> {
    if points.is_empty() {
        return Err(Error::EmptyInput("points"));
    }
    if points.len() != weights.len() {
        return Err(Error::LengthMismatch {
            what: "points and weights",
            left: points.len(),
            right: weights.len(),
        });
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("points"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidWeights("weights must be positive and finite".into()));
    }
    let total: f64 = weights.iter().copied().collect::<CompensatedSum>().value();

    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let objective = |y: f64| -> f64 {
        points
            .iter()
            .zip(weights)
            .map(|(&a, &w)| w * g.eval(a - y))
            .collect::<CompensatedSum>()
            .value()
            / total
    };
    let done = |minimizer: f64, iterations: usize| ScalarFrechetResult {
        minimizer,
        objective: objective(minimizer),
        iterations,
    };

    if lo == hi {
        return Ok(done(lo, 0));
    }
    if g.is_quadratic() {
        let m = points
            .iter()
            .zip(weights)
            .map(|(&a, &w)| a * w)
            .collect::<CompensatedSum>()
            .value()
            / total;
        return Ok(done(m.clamp(lo, hi), 0));
    }
    if g.has_derivative() {
        let (x, it) = bisect_derivative(g, points, weights, lo, hi);
        return Ok(done(x, it));
    }
    let (x, it) = golden_section_leftmost(objective, lo, hi);
    Ok(done(x, it))
}

/// Equal-weight convenience wrapper (`argmin_x Σ g(Xᵢ - x)`).
pub fn scalar_frechet_mean_unweighted(g: &CostFunction, points: &[f64]) -> Result<ScalarFrechetResult> {
    scalar_frechet_mean(g, points, &vec![1.0; points.len()])
}

/// `f'(y) = -Σ λᵢ g'(aᵢ - y)` is nondecreasing; find the smallest `y` with
/// `f'(y) ≥ 0`.
fn bisect_derivative(g: &CostFunction, points: &[f64], weights: &[f64], mut lo: f64, mut hi: f64) -> (f64, usize) {
    let slope = |y: f64| -> f64 {
        -points
            .iter()
            .zip(weights)
            .map(|(&a, &w)| w * g.derivative(a - y).expect("derivative present"))
            .sum::<f64>()
    };
    if slope(lo) >= 0.0 {
        return (lo, 1);
    }
    let mut iterations = 1;
    while hi - lo > ARGMIN_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if slope(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi, iterations)
}

/// Golden-section search that keeps the left bracket on ties, so flat
/// minima resolve to their left endpoint.
pub(crate) fn golden_section_leftmost(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, usize) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut iterations = 2;
    while b - a > ARGMIN_WIDTH {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        iterations += 1;
        if x1 <= a || x2 >= b || iterations > 500 {
            break;
        }
    }
    (a, iterations)
}
