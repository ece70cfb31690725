//! Fréchet barycenters on the real line, computed quantile by quantile.
//!
//! For a family `(μᵢ, λᵢ)` the barycenter has quantile function
//! `ψ(p) = argmin_y Σ λᵢ g(F⁻¹_μᵢ(p) - y)`, a scalar convex problem at each
//! level `p`. For `g(x) = x²` this is the weighted average of quantiles.

mod finite;
mod isotonic;
mod population;
mod scalar;

pub use finite::{barycenter_objective, barycenter_quantiles, finite_barycenter, QuantilePartition, WeightedFamily};
pub use isotonic::{isotonic_fit, max_monotone_violation};
pub use population::{
    default_grid, population_barycenter, MeasureDistribution, PopulationBarycenter, BOOTSTRAP_RESAMPLES,
    VIOLATION_SE_FACTOR,
};
pub use scalar::{scalar_frechet_mean, scalar_frechet_mean_unweighted, ScalarFrechetResult, ARGMIN_WIDTH};
