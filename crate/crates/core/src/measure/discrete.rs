use serde::{Deserialize, Serialize};

use super::QuantileCurve;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Atoms closer than `ATOM_MERGE_TOL * max(1, |atom|)` are merged.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

/// Weight sums within this distance of 1 are renormalized; anything further
/// is rejected.
const RENORMALIZE_TOL: f64 = 1e-9;

/// A finitely supported probability measure.
///
/// Atoms are strictly increasing and every weight is positive; the weights sum
/// to one. Cumulative levels are kept alongside so that quantile lookups are
/// a binary search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from unsorted atoms and weights, merging duplicate
    /// atoms and renormalizing weights whose sum is within `1e-9` of one.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::LengthMismatch {
                what: "atoms and weights",
                left: atoms.len(),
                right: weights.len(),
            });
        }
        if atoms.is_empty() {
            return Err(Error::EmptyInput("discrete measure"));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("atoms"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidWeights(format!(
                "every weight must be positive and finite, got {w}"
            )));
        }
        let total = weights.iter().copied().collect::<CompensatedSum>().value();
        if (total - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self::build(atoms, weights, total))
    }

    /// Like [`DiscreteMeasure::new`] but accepts any positive total mass and
    /// normalizes it away.
    pub fn normalized(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let total = weights.iter().copied().collect::<CompensatedSum>().value();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidWeights(format!("total mass {total}")));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Self::new(atoms, weights)
    }

    fn build(atoms: Vec<f64>, weights: Vec<f64>, total: f64) -> Self {
        let mut pairs: Vec<(f64, f64)> = atoms.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut merged_atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut merged_weights: Vec<CompensatedSum> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match merged_atoms.last() {
                Some(&last) if x - last <= ATOM_MERGE_TOL * last.abs().max(1.0) => {
                    merged_weights.last_mut().unwrap().add(w);
                }
                _ => {
                    merged_atoms.push(x);
                    let mut s = CompensatedSum::new();
                    s.add(w);
                    merged_weights.push(s);
                }
            }
        }
        let weights: Vec<f64> = merged_weights.iter().map(|s| s.value() / total).collect();
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = CompensatedSum::new();
        for &w in &weights {
            acc.add(w);
            cumulative.push(acc.value().min(1.0));
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Self {
            atoms: merged_atoms,
            weights,
            cumulative,
        }
    }

    /// The unit mass at `x`.
    pub fn dirac(x: f64) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    /// Equal weights on the given atoms (duplicates merge).
    pub fn uniform_on(atoms: Vec<f64>) -> Result<Self> {
        from_samples(&atoms)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cumulative weights `F(x_k⁺)`; the last entry is exactly 1.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `μ((-∞, x))`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a < x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// `μ((-∞, x])`, the right limit of [`DiscreteMeasure::cdf`].
    pub fn cdf_right(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Index of the atom holding quantile level `p`.
    pub(crate) fn quantile_index(&self, p: f64) -> usize {
        self.cumulative
            .partition_point(|&c| c < p)
            .min(self.atoms.len() - 1)
    }

    /// `F⁻¹(p)`, with a domain error outside `(0, 1)`.
    pub fn quantile_eval(&self, p: f64) -> Result<f64> {
        super::quantile_eval(self, p)
    }

    pub fn mean(&self) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| a * w)
            .collect::<CompensatedSum>()
            .value()
    }

    /// Translates every atom by `t`.
    pub fn shifted(&self, t: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|a| a + t).collect(),
            weights: self.weights.clone(),
            cumulative: self.cumulative.clone(),
        }
    }

    /// Atom-by-atom comparison within an absolute tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len()
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|(a, b)| (a - b).abs() <= tol)
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

impl QuantileCurve for DiscreteMeasure {
    fn quantile(&self, p: f64) -> f64 {
        self.atoms[self.quantile_index(p)]
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.cumulative[..self.cumulative.len() - 1].to_vec()
    }

    fn as_discrete(&self) -> Option<&DiscreteMeasure> {
        Some(self)
    }
}

impl<'de> Deserialize<'de> for DiscreteMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            atoms: Vec<f64>,
            weights: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        DiscreteMeasure::new(raw.atoms, raw.weights).map_err(serde::de::Error::custom)
    }
}

/// The empirical measure of a sample: equal weights `1/n`, duplicates merged.
pub fn from_samples(xs: &[f64]) -> Result<DiscreteMeasure> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    let w = 1.0 / xs.len() as f64;
    DiscreteMeasure::normalized(xs.to_vec(), vec![w; xs.len()])
}

/// A raw sample kept in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    samples: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("samples"));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("samples"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// The `i`-th order statistic, 1-based.
    pub fn order_statistic(&self, i: usize) -> f64 {
        self.samples[i - 1]
    }

    pub fn to_measure(&self) -> DiscreteMeasure {
        from_samples(&self.samples).expect("nonempty finite sample")
    }
}
