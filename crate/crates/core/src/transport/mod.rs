//! Transportation cost `J(μ, ν) = ∫₀¹ g(F⁻¹_μ − F⁻¹_ν) dp`, the monotone
//! optimal plan, the optimal map, and an LP oracle.

mod lp;
mod plan;

use std::fmt;

pub use lp::{lp_oracle_cost, lp_simplex, lp_vertex_enumeration, LP_ORACLE_MAX_CELLS};
pub use plan::{monotone_plan, optimal_map, PlanEntry, TransportPlan};

use crate::cost::CostFunction;
use crate::measure::{DiscreteMeasure, QuantileCurve};
use crate::numeric::{gauss_legendre_32, CompensatedSum};

/// Value of `J`: finite, or a signaled divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransportCost {
    Finite(f64),
    Infinite,
}

impl TransportCost {
    pub fn from_value(v: f64) -> Self {
        if v.is_finite() {
            Self::Finite(v)
        } else {
            Self::Infinite
        }
    }

    /// The cost as a float, `+∞` when infinite.
    pub fn value(self) -> f64 {
        match self {
            Self::Finite(v) => v,
            Self::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Self::Finite(_))
    }
}

impl fmt::Display for TransportCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

/// Innermost lower tail panel width.
const LOWER_TAIL_FLOOR: f64 = 1e-60;
/// Doubles below 1 are spaced `1.1e-16` apart, so the upper tail stops here.
const UPPER_TAIL_FLOOR: f64 = 1e-15;

/// Composite Gauss–Legendre settings for curves without exact breakpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Equal panels covering `[eta, 1 - eta]`.
    pub panels: usize,
    /// Truncation at each end of `(0, 1)`.
    pub eta: f64,
    /// Also integrate `(0, eta)` and `(1 - eta, 1)` on decade-spaced panels
    /// reaching down to `LOWER_TAIL_FLOOR` and `UPPER_TAIL_FLOOR`. Off by default, which leaves a
    /// truncation bias of order `eta` times the integrand near the ends.
    pub include_tails: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            panels: 256,
            eta: 1e-6,
            include_tails: false,
        }
    }
}

/// `J(μ, ν)` for discrete measures, summed exactly over the common
/// refinement of the two cumulative-weight partitions.
pub fn discrete_transport_cost(g: &CostFunction, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> TransportCost {
    let mut acc = CompensatedSum::new();
    plan::for_each_quantile_segment(mu, nu, |x, y, len| acc.add(len * g.eval(x - y)));
    TransportCost::from_value(acc.value())
}

/// `J(μ, ν)`. Exact when both curves are discrete, composite quadrature
/// (with [`QuadratureConfig::default`]) otherwise.
pub fn transport_cost<A, B>(g: &CostFunction, mu: &A, nu: &B) -> TransportCost
where
    A: QuantileCurve + ?Sized,
    B: QuantileCurve + ?Sized,
{
    match (mu.as_discrete(), nu.as_discrete()) {
        (Some(a), Some(b)) => discrete_transport_cost(g, a, b),
        _ => transport_cost_quadrature(g, mu, nu, QuadratureConfig::default()),
    }
}

/// `J(μ, ν)` by quadrature. Panel edges include every breakpoint the curves
/// advertise, so step functions are integrated piecewise exactly.
pub fn transport_cost_quadrature<A, B>(
    g: &CostFunction,
    mu: &A,
    nu: &B,
    config: QuadratureConfig,
) -> TransportCost
where
    A: QuantileCurve + ?Sized,
    B: QuantileCurve + ?Sized,
{
    let (lo, hi) = (config.eta, 1.0 - config.eta);
    let k = config.panels.max(1);
    let mut edges: Vec<f64> = (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect();
    // Quantile functions of unbounded laws blow up at the ends, so the outer
    // panels are split at decades to keep each one well resolved.
    let mut d = 10.0 * lo;
    while d < (hi - lo) / k as f64 {
        edges.push(d);
        edges.push(1.0 - d);
        d *= 10.0;
    }
    edges.extend(
        mu.breakpoints()
            .into_iter()
            .chain(nu.breakpoints())
            .filter(|&p| p > lo && p < hi),
    );
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() <= plan::MIN_SEGMENT);

    let integrand = |p: f64| g.eval(mu.quantile(p) - nu.quantile(p));
    let mut acc = CompensatedSum::new();
    for w in edges.windows(2) {
        acc.add(gauss_legendre_panel(&integrand, w[0], w[1]));
    }
    if config.include_tails {
        let tail = |floor: f64, panel: &mut dyn FnMut(f64, f64)| {
            let mut width = lo;
            while width > floor {
                panel(width * 0.1, width);
                width *= 0.1;
            }
        };
        tail(LOWER_TAIL_FLOOR, &mut |a, b| acc.add(gauss_legendre_panel(&integrand, a, b)));
        acc.add(gauss_legendre_panel(&integrand, 0.0, LOWER_TAIL_FLOOR));
        tail(UPPER_TAIL_FLOOR, &mut |a, b| acc.add(gauss_legendre_panel(&integrand, 1.0 - b, 1.0 - a)));
    }
    TransportCost::from_value(acc.value())
}

fn gauss_legendre_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gauss_legendre_32();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let s: f64 = nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum();
    half * s
}
