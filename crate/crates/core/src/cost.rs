//! Strictly convex cost functions `g` with `g(0) = 0`, transport cost
//! `c(x, y) = g(x - y)`, and the growth bound `g(x - y) ≤ A + B (g(x) + g(y))`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Constants `(A, B)` with `g(x - y) ≤ A + B (g(x) + g(y))` for all `x, y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthConstants {
    pub a: f64,
    pub b: f64,
}

#[derive(Clone)]
enum Kind {
    Quadratic,
    Power { p: f64, int_exp: Option<i32> },
    SkewQuadratic { c: f64 },
    Custom {
        eval: ScalarFn,
        derivative: Option<ScalarFn>,
        smooth: bool,
    },
}

/// A strictly convex `g ≥ 0` with `g(0) = 0`.
#[derive(Clone)]
pub struct CostFunction {
    kind: Kind,
    label: String,
    growth: Option<GrowthConstants>,
}

impl fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CostFunction")
            .field("label", &self.label)
            .field("growth", &self.growth)
            .finish()
    }
}

impl CostFunction {
    /// `g(x) = x²`.
    pub fn quadratic() -> Self {
        Self {
            kind: Kind::Quadratic,
            label: "quadratic".into(),
            growth: Some(GrowthConstants { a: 0.0, b: 2.0 }),
        }
    }

    /// `g(x) = |x|^p`, `p > 1`.
    pub fn power(p: f64) -> Result<Self> {
        let (a, b) = growth_constants_for_power(p)?;
        let int_exp = (p.fract() == 0.0 && p <= 16.0).then_some(p as i32);
        Ok(Self {
            kind: Kind::Power { p, int_exp },
            label: format!("power:{p}"),
            growth: Some(GrowthConstants { a, b }),
        })
    }

    /// `g(x) = x²` for `x ≥ 0` and `c x²` for `x < 0`, `c > 0`. Its Fréchet
    /// mean is an expectile.
    pub fn skew_quadratic(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::NotStrictlyConvex(format!("c > 0 required, got {c}")));
        }
        Ok(Self {
            kind: Kind::SkewQuadratic { c },
            label: format!("skewquad:{c}"),
            growth: Some(GrowthConstants {
                a: 0.0,
                b: 2.0 * c.max(1.0 / c),
            }),
        })
    }

    /// Registers a user-supplied cost.
    ///
    /// `g(0) = 0` and positivity are checked on a grid and strict convexity
    /// is probed on `10⁴` random triples; none of this is a proof.
    pub fn custom<F>(
        label: impl Into<String>,
        eval: F,
        derivative: Option<ScalarFn>,
        smooth: bool,
        growth: Option<GrowthConstants>,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        if eval(0.0) != 0.0 {
            return Err(Error::NotStrictlyConvex(format!("{label}: g(0) = {} ≠ 0", eval(0.0))));
        }
        for k in 1..=200 {
            let x = k as f64 * 0.05;
            if !(eval(x) > 0.0 && eval(-x) > 0.0) {
                return Err(Error::NotStrictlyConvex(format!("{label}: g(±{x}) is not positive")));
            }
        }
        if let Some((x, y, d)) = probe_strict_convexity(&eval, 10_000, 0x5eed) {
            return Err(Error::NotStrictlyConvex(format!(
                "{label}: g(x)+g(y) ≤ g(x+δ)+g(y-δ) at x={x}, y={y}, δ={d}"
            )));
        }
        Ok(Self {
            kind: Kind::Custom {
                eval: Arc::new(eval),
                derivative,
                smooth,
            },
            label,
            growth,
        })
    }

    /// Parses `quadratic`, `power:<p>` or `skewquad:<c>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "quadratic" {
            return Ok(Self::quadratic());
        }
        let (name, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("unknown cost `{spec}`")))?;
        let value: f64 = arg
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("cost parameter `{arg}` is not a number")))?;
        match name.trim() {
            "power" => Self::power(value),
            "skewquad" => Self::skew_quadratic(value),
            other => Err(Error::Parse(format!("unknown cost `{other}`"))),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn growth(&self) -> Option<GrowthConstants> {
        self.growth
    }

    pub fn with_growth(mut self, a: f64, b: f64) -> Self {
        self.growth = Some(GrowthConstants { a, b });
        self
    }

    pub fn without_growth(mut self) -> Self {
        self.growth = None;
        self
    }

    /// Growth constants, or an error when the cost carries none.
    pub fn require_growth(&self) -> Result<GrowthConstants> {
        self.growth
            .ok_or_else(|| Error::GrowthConstantsMissing(self.label.clone()))
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.kind, Kind::Quadratic)
    }

    /// Twice differentiable everywhere (so first-order conditions can be
    /// solved to high accuracy).
    pub fn is_smooth(&self) -> bool {
        match &self.kind {
            Kind::Quadratic => true,
            Kind::Power { p, .. } => *p >= 2.0,
            Kind::SkewQuadratic { .. } => false,
            Kind::Custom { smooth, .. } => *smooth,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Quadratic => x * x,
            Kind::Power { p, int_exp } => match int_exp {
                Some(k) => x.abs().powi(*k),
                None => x.abs().powf(*p),
            },
            Kind::SkewQuadratic { c } => {
                if x >= 0.0 {
                    x * x
                } else {
                    c * x * x
                }
            }
            Kind::Custom { eval, .. } => eval(x),
        }
    }

    /// `c` for [`CostFunction::skew_quadratic`], `None` otherwise.
    pub fn skew_coefficient(&self) -> Option<f64> {
        match self.kind {
            Kind::SkewQuadratic { c } => Some(c),
            _ => None,
        }
    }

    /// `g(-x) = g(x)` for the built-in symmetric families.
    pub fn is_even(&self) -> bool {
        match self.kind {
            Kind::Quadratic | Kind::Power { .. } => true,
            Kind::SkewQuadratic { c } => c == 1.0,
            Kind::Custom { .. } => false,
        }
    }

    pub fn has_derivative(&self) -> bool {
        !matches!(&self.kind, Kind::Custom { derivative: None, .. })
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> Option<f64> {
        Some(match &self.kind {
            Kind::Quadratic => 2.0 * x,
            Kind::Power { p, int_exp } => {
                let m = match int_exp {
                    Some(k) => p * x.abs().powi(k - 1),
                    None => p * x.abs().powf(p - 1.0),
                };
                m.copysign(x)
            }
            Kind::SkewQuadratic { c } => {
                if x >= 0.0 {
                    2.0 * x
                } else {
                    2.0 * c * x
                }
            }
            Kind::Custom { derivative, .. } => return derivative.as_ref().map(|d| d(x)),
        })
    }
}

/// Searches for a violation of strict convexity in the exchange form
/// `g(x) + g(y) > g(x + δ) + g(y - δ)`, `0 < δ < y - x`.
pub fn probe_strict_convexity<F: Fn(f64) -> f64>(
    g: F,
    trials: usize,
    seed: u64,
) -> Option<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let scale = 10f64.powf(rng.random_range(-1.0..1.5));
        let x = rng.random_range(-scale..scale);
        let y = x + scale * rng.random_range(1e-3..2.0);
        let d = (y - x) * rng.random_range(0.01..0.99);
        if !(g(x) + g(y) > g(x + d) + g(y - d)) {
            return Some((x, y, d));
        }
    }
    None
}

/// `(A, B) = (0, 2^p)` for `g(x) = |x|^p`: the algebraic-growth bound with
/// matching upper and lower power envelopes.
pub fn growth_constants_for_power(p: f64) -> Result<(f64, f64)> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::NotStrictlyConvex(format!("p > 1 required, got {p}")));
    }
    Ok((0.0, 2f64.powf(p)))
}

/// A pair where the growth bound fails, with the amount it fails by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthViolation {
    pub x: f64,
    pub y: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCheck {
    pub holds: bool,
    pub pairs_checked: usize,
    /// The pair with the largest excess, if any pair fails.
    pub worst: Option<GrowthViolation>,
}

/// Checks `g(x - y) ≤ A + B (g(x) + g(y))` on every pair of grid points.
pub fn check_growth(g: &CostFunction, a: f64, b: f64, grid: &[f64]) -> GrowthCheck {
    let mut worst: Option<GrowthViolation> = None;
    for &x in grid {
        for &y in grid {
            let lhs = g.eval(x - y);
            let rhs = a + b * (g.eval(x) + g.eval(y));
            let excess = lhs - rhs;
            if excess > 1e-12 * rhs.abs().max(1.0) && worst.is_none_or(|w| excess > w.excess) {
                worst = Some(GrowthViolation { x, y, excess });
            }
        }
    }
    GrowthCheck {
        holds: worst.is_none(),
        pairs_checked: grid.len() * grid.len(),
        worst,
    }
}

/// `points` equally spaced values covering `[-limit, limit]`.
pub fn symmetric_grid(limit: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2);
    (0..points)
        .map(|i| -limit + 2.0 * limit * i as f64 / (points - 1) as f64)
        .collect()
}
