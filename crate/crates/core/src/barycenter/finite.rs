use super::scalar::scalar_frechet_mean;
use crate::cost::CostFunction;
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, QuantileCurve};
use crate::numeric::CompensatedSum;
use crate::transport::{discrete_transport_cost, TransportCost};

/// Interval lengths at or below this are merged away.
const MIN_INTERVAL: f64 = 1e-15;

/// Measures `μᵢ` with positive weights `λᵢ`, normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedFamily {
    measures: Vec<DiscreteMeasure>,
    weights: Vec<f64>,
}

impl WeightedFamily {
    pub fn new(measures: Vec<DiscreteMeasure>, weights: Vec<f64>) -> Result<Self> {
        if measures.is_empty() {
            return Err(Error::EmptyInput("family"));
        }
        if measures.len() != weights.len() {
            return Err(Error::LengthMismatch {
                what: "measures and weights",
                left: measures.len(),
                right: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidWeights("family weights must be positive".into()));
        }
        let total = weights.iter().copied().collect::<CompensatedSum>().value();
        Ok(Self {
            measures,
            weights: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    /// Equal weights `1/n`.
    pub fn equal(measures: Vec<DiscreteMeasure>) -> Result<Self> {
        let n = measures.len();
        Self::new(measures, vec![1.0; n])
    }

    pub fn measures(&self) -> &[DiscreteMeasure] {
        &self.measures
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measures.is_empty()
    }
}

/// The barycenter's quantile function on the merged partition of `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantilePartition {
    /// `0 = e₀ < e₁ < … < e_K = 1`.
    pub edges: Vec<f64>,
    /// `ψ` on each interval `(e_{k-1}, e_k]`, nondecreasing.
    pub values: Vec<f64>,
}

impl QuantilePartition {
    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }

    pub fn lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| w[1] - w[0])
    }
}

/// Merged cumulative-weight breakpoints of every measure in the family.
pub(crate) fn merged_edges(measures: &[DiscreteMeasure]) -> Vec<f64> {
    let mut levels: Vec<f64> = measures
        .iter()
        .flat_map(|m| m.cumulative().iter().copied())
        .collect();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    let mut edges: Vec<f64> = Vec::with_capacity(levels.len());
    for l in levels {
        match edges.last() {
            Some(&last) if l - last <= MIN_INTERVAL => {}
            _ => edges.push(l),
        }
    }
    // The top level is always exactly one.
    *edges.last_mut().unwrap() = 1.0;
    if edges.len() == 1 {
        edges.push(1.0);
    }
    edges
}

/// `ψ(p) = argmin_y Σ λᵢ g(F⁻¹_μᵢ(p) - y)` on each interval of the merged
/// partition, where every `F⁻¹_μᵢ` is constant.
pub fn barycenter_quantiles(g: &CostFunction, fam: &WeightedFamily) -> Result<QuantilePartition> {
    let edges = merged_edges(&fam.measures);
    let mut values = Vec::with_capacity(edges.len() - 1);
    let mut buf = vec![0.0; fam.len()];
    for w in edges.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        for (slot, m) in buf.iter_mut().zip(&fam.measures) {
            *slot = m.quantile(mid);
        }
        values.push(scalar_frechet_mean(g, &buf, &fam.weights)?.minimizer);
    }
    enforce_monotone(&mut values)?;
    Ok(QuantilePartition { edges, values })
}

/// Re-checks that `ψ` is nondecreasing. Drops at solver precision are
/// flattened; anything larger is reported.
fn enforce_monotone(values: &mut [f64]) -> Result<()> {
    for k in 1..values.len() {
        let (prev, cur) = (values[k - 1], values[k]);
        if cur < prev {
            let tol = 1e-9 * prev.abs().max(1.0);
            if prev - cur > tol {
                return Err(Error::Monotonicity(format!(
                    "barycenter quantile drops from {prev} to {cur} at interval {k}"
                )));
            }
            values[k] = prev;
        }
    }
    Ok(())
}

/// The Fréchet barycenter `ν* = ψ_# Leb|(0,1)` of a finite weighted family.
pub fn finite_barycenter(g: &CostFunction, fam: &WeightedFamily) -> Result<DiscreteMeasure> {
    let part = barycenter_quantiles(g, fam)?;
    DiscreteMeasure::normalized(part.values.clone(), part.lengths().collect())
}

/// `Σ λᵢ J(μᵢ, ν)`.
pub fn barycenter_objective(g: &CostFunction, fam: &WeightedFamily, nu: &DiscreteMeasure) -> TransportCost {
    let mut acc = CompensatedSum::new();
    for (m, &w) in fam.measures.iter().zip(&fam.weights) {
        match discrete_transport_cost(g, m, nu) {
            TransportCost::Finite(j) => acc.add(w * j),
            TransportCost::Infinite => return TransportCost::Infinite,
        }
    }
    TransportCost::from_value(acc.value())
}
