use crate::cost::CostFunction;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::numeric::CompensatedSum;

/// Quantile intervals shorter than this are dropped from plans.
pub(crate) const MIN_SEGMENT: f64 = 1e-15;

/// One cell of a transport plan: `mass` moved from `x` to `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEntry {
    pub x: f64,
    pub y: f64,
    pub mass: f64,
}

/// A coupling of two discrete measures, stored as its support cells.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    entries: Vec<PlanEntry>,
}

impl TransportPlan {
    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.mass).collect::<CompensatedSum>().value()
    }

    /// `∫ g(x - y) dγ`.
    pub fn cost(&self, g: &CostFunction) -> f64 {
        self.entries
            .iter()
            .map(|e| e.mass * g.eval(e.x - e.y))
            .collect::<CompensatedSum>()
            .value()
    }

    /// Mass aggregated by source point.
    pub fn source_marginal(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(
            self.entries.iter().map(|e| e.x).collect(),
            self.entries.iter().map(|e| e.mass).collect(),
        )
    }

    /// Mass aggregated by target point.
    pub fn target_marginal(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(
            self.entries.iter().map(|e| e.y).collect(),
            self.entries.iter().map(|e| e.mass).collect(),
        )
    }

    /// True when, sorted by source, targets never decrease.
    pub fn is_monotone(&self) -> bool {
        self.entries
            .windows(2)
            .all(|w| w[0].x <= w[1].x && w[0].y <= w[1].y)
    }

    /// `x,y,mass` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,mass\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.x, e.y, e.mass));
        }
        out
    }
}

/// Walks the common refinement of the two cumulative-weight partitions of
/// `(0, 1)`, yielding `(F⁻¹_μ, F⁻¹_ν, interval length)` for each piece.
pub(crate) fn for_each_quantile_segment(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    mut f: impl FnMut(f64, f64, f64),
) {
    let (cm, cn) = (mu.cumulative(), nu.cumulative());
    let (am, an) = (mu.atoms(), nu.atoms());
    let (mut i, mut j) = (0, 0);
    let mut level = 0.0;
    while i < am.len() && j < an.len() {
        let next = cm[i].min(cn[j]);
        let len = next - level;
        if len > MIN_SEGMENT {
            f(am[i], an[j], len);
        }
        level = level.max(next);
        let (ci, cj) = (cm[i], cn[j]);
        if ci <= cj {
            i += 1;
        }
        if cj <= ci {
            j += 1;
        }
    }
}

/// The monotone (quantile) coupling `(F⁻¹_μ × F⁻¹_ν)_# Leb|(0,1)`.
///
/// It does not depend on the cost: it is optimal for every strictly convex
/// `g`.
pub fn monotone_plan(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> TransportPlan {
    let mut entries = Vec::with_capacity(mu.len() + nu.len());
    for_each_quantile_segment(mu, nu, |x, y, mass| entries.push(PlanEntry { x, y, mass }));
    TransportPlan { entries }
}

/// The optimal map `T(x) = F⁻¹_ν(F_μ(x) + 0)` as `(x, T(x))` pairs, one per
/// source atom. Fails when the monotone plan has to split a source atom.
pub fn optimal_map(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Vec<(f64, f64)>> {
    let plan = monotone_plan(mu, nu);
    let mut map: Vec<(f64, f64)> = Vec::with_capacity(mu.len());
    for e in plan.entries() {
        match map.last() {
            Some(&(x, _)) if x == e.x => return Err(Error::NoMongeMap { atom: e.x }),
            _ => map.push((e.x, e.y)),
        }
    }
    Ok(map)
}
