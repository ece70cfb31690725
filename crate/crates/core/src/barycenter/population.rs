use rayon::prelude::*;
use rand::Rng;

use super::finite::{finite_barycenter, WeightedFamily};
use super::isotonic::{isotonic_fit, max_monotone_violation};
use super::scalar::scalar_frechet_mean_unweighted;
use crate::cost::CostFunction;
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, QuantileCurve};
use crate::sampling::{substream, MeasureSampler};

/// Bootstrap resamples per grid point.
pub const BOOTSTRAP_RESAMPLES: usize = 50;

/// Pre-correction monotonicity violations beyond this many bootstrap
/// standard errors are treated as a bug, not noise.
pub const VIOLATION_SE_FACTOR: f64 = 10.0;

const STREAM_DRAWS: u64 = 0x706f_705f_6472_6177;
const STREAM_BOOTSTRAP: u64 = 0x706f_705f_626f_6f74;

/// A law over measures.
#[derive(Debug, Clone)]
pub enum MeasureDistribution {
    /// Finitely many measures with probabilities: the barycenter is exact.
    Mixture(WeightedFamily),
    /// Anything that can be sampled: the barycenter is a Monte Carlo estimate.
    Sampler(MeasureSampler),
}

/// Result of [`population_barycenter`].
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationBarycenter {
    pub measure: DiscreteMeasure,
    /// `false` for Monte Carlo estimates.
    pub exact: bool,
    pub grid: Vec<f64>,
    /// Estimated `ψ` on the grid after the isotonic correction.
    pub psi: Vec<f64>,
    /// Per-point estimates before the correction.
    pub raw_psi: Vec<f64>,
    /// Bootstrap standard errors of `raw_psi` (zero on the exact path).
    pub std_errors: Vec<f64>,
    /// `max_{i<j} (raw_psi[i] - raw_psi[j])`.
    pub max_violation: f64,
}

/// `k / cells` for `k = 1 … cells - 1`; the endpoints are excluded because
/// quantile functions may diverge there.
pub fn default_grid(cells: usize) -> Vec<f64> {
    (1..cells).map(|k| k as f64 / cells as f64).collect()
}

/// The population barycenter `ψ(p) = argmin_y E g(F⁻¹_𝛍(p) - y)`.
///
/// Mixtures reduce exactly to [`finite_barycenter`] (the grid is only used to
/// report `ψ`). For samplers, every grid point gets its own substream keyed by
/// `(seed, grid index)`: `mc_samples` measures are drawn, their quantiles at
/// that point averaged in the `g` sense, and a bootstrap gives the standard
/// error. The resulting `ψ̂` is made nondecreasing by isotonic regression.
pub fn population_barycenter(
    g: &CostFunction,
    dist: &MeasureDistribution,
    grid: &[f64],
    mc_samples: usize,
    seed: u64,
) -> Result<PopulationBarycenter> {
    match dist {
        MeasureDistribution::Mixture(fam) => {
            let measure = finite_barycenter(g, fam)?;
            let grid: Vec<f64> = grid.iter().copied().filter(|p| *p > 0.0 && *p < 1.0).collect();
            let psi: Vec<f64> = grid.iter().map(|&p| measure.quantile(p)).collect();
            Ok(PopulationBarycenter {
                measure,
                exact: true,
                std_errors: vec![0.0; grid.len()],
                raw_psi: psi.clone(),
                psi,
                grid,
                max_violation: 0.0,
            })
        }
        MeasureDistribution::Sampler(sampler) => sampled_barycenter(g, sampler, grid, mc_samples, seed),
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("quantile grid"));
    }
    if let Some(p) = grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::Domain(*p));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("quantile grid must be strictly increasing".into()));
    }
    Ok(())
}

fn sampled_barycenter(
    g: &CostFunction,
    sampler: &MeasureSampler,
    grid: &[f64],
    mc_samples: usize,
    seed: u64,
) -> Result<PopulationBarycenter> {
    validate_grid(grid)?;
    if mc_samples < 2 {
        return Err(Error::InvalidParameter(format!("mc_samples must be at least 2, got {mc_samples}")));
    }

    let per_point: Vec<(f64, f64)> = grid
        .par_iter()
        .enumerate()
        .map(|(k, &p)| {
            let mut rng = substream(seed, &[STREAM_DRAWS, k as u64]);
            let mut values = Vec::with_capacity(mc_samples);
            for _ in 0..mc_samples {
                values.push(sampler.draw(&mut rng)?.quantile(p));
            }
            let estimate = scalar_frechet_mean_unweighted(g, &values)?.minimizer;

            let mut rng = substream(seed, &[STREAM_BOOTSTRAP, k as u64]);
            let mut resample = vec![0.0; mc_samples];
            let mut boot = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
            for _ in 0..BOOTSTRAP_RESAMPLES {
                for slot in resample.iter_mut() {
                    *slot = values[rng.random_range(0..mc_samples)];
                }
                boot.push(scalar_frechet_mean_unweighted(g, &resample)?.minimizer);
            }
            Ok((estimate, std_dev(&boot)))
        })
        .collect::<Result<_>>()?;

    let raw_psi: Vec<f64> = per_point.iter().map(|r| r.0).collect();
    let std_errors: Vec<f64> = per_point.iter().map(|r| r.1).collect();
    check_violations(&raw_psi, &std_errors)?;
    let max_violation = max_monotone_violation(&raw_psi);
    let psi = isotonic_fit(&raw_psi, &vec![1.0; raw_psi.len()]);

    // Cell k spans the midpoints between neighbouring grid points.
    let mut bounds = Vec::with_capacity(grid.len() + 1);
    bounds.push(0.0);
    bounds.extend(grid.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    bounds.push(1.0);
    let weights: Vec<f64> = bounds.windows(2).map(|w| w[1] - w[0]).collect();
    let measure = DiscreteMeasure::normalized(psi.clone(), weights)?;

    Ok(PopulationBarycenter {
        measure,
        exact: false,
        grid: grid.to_vec(),
        psi,
        raw_psi,
        std_errors,
        max_violation,
    })
}

/// Every decreasing pair must be explainable by noise: the drop may not
/// exceed `VIOLATION_SE_FACTOR` times the larger standard error involved.
fn check_violations(psi: &[f64], se: &[f64]) -> Result<()> {
    // Running argmax keeps this linear; the pair with the largest earlier
    // value is the binding one for a fixed later point.
    let mut best = 0usize;
    for j in 1..psi.len() {
        if psi[j - 1] > psi[best] {
            best = j - 1;
        }
        let drop = psi[best] - psi[j];
        if drop > 0.0 {
            let allowed = VIOLATION_SE_FACTOR * se[best].max(se[j]) + 1e-12 * psi[best].abs().max(1.0);
            if drop > allowed {
                return Err(Error::Monotonicity(format!(
                    "estimated quantile drops by {drop} between grid points {best} and {j}, \
                     beyond {VIOLATION_SE_FACTOR} standard errors"
                )));
            }
        }
    }
    Ok(())
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
