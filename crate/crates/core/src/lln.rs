//! Seeded convergence experiments: the scalar nonlinear law of large numbers,
//! convergence of empirical barycenters, and diagnostics separating weak
//! convergence from convergence in transportation cost.
//!
//! Every per-`n` value is an average over independent replicates, each drawn
//! from its own substream keyed by `(experiment, n, replicate)`. Reports are
//! therefore bit-identical regardless of thread count or scheduling.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barycenter::{
    default_grid, finite_barycenter, population_barycenter, scalar_frechet_mean_unweighted, MeasureDistribution,
    WeightedFamily,
};
use crate::cost::CostFunction;
use crate::error::{Error, Result};
use crate::measure::{discretize, levy_distance, DiscreteMeasure, Measure, MeasureSpec};
use crate::numeric::CompensatedSum;
use crate::sampling::{substream, MeasureSampler, MeasureSamplerSpec, ScalarSampler};
use crate::transport::{discrete_transport_cost, TransportCost};

/// Half-decade sample sizes from 10 to 10⁴.
pub const DEFAULT_LADDER: [usize; 7] = [10, 32, 100, 316, 1000, 3162, 10_000];
pub const DEFAULT_SCALAR_REPLICATES: usize = 16;
pub const DEFAULT_BARYCENTER_REPLICATES: usize = 64;
/// Equal-mass atoms used to discretize analytic draws and references.
pub const DEFAULT_CELLS: usize = 200;
pub const DEFAULT_MC_BUDGET: usize = 1000;
/// The numerical reference barycenter uses this multiple of the budget.
pub const REFERENCE_BUDGET_FACTOR: usize = 10;

/// Truncation levels for the divergence sweep.
pub const TRUNCATION_LEVELS: [usize; 3] = [10, 20, 40];
/// A cost growing at least this much per truncation level is declared infinite.
pub const DIVERGENCE_GROWTH: f64 = 10.0;

const EXPERIMENT_SCALAR: u64 = 1;
const EXPERIMENT_BARYCENTER: u64 = 2;

/// Where the target of a report comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Closed form, or an exact finite computation.
    Analytic,
    /// A high-budget Monte Carlo estimate.
    Numerical,
    /// Given by the caller.
    Supplied,
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Analytic => "analytic",
            Self::Numerical => "numerical",
            Self::Supplied => "supplied",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub metric: String,
    pub value: f64,
}

/// Per-`n` diagnostics of a convergence experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub n_values: Vec<usize>,
    /// One row per `(n, metric)`, ordered by `n` and then by metric.
    pub rows: Vec<ReportRow>,
    pub seed: u64,
    pub target_kind: TargetKind,
    pub target: String,
}

impl ConvergenceReport {
    /// Values of one metric along the ladder.
    pub fn metric(&self, name: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.metric == name).map(|r| r.value).collect()
    }

    pub fn metric_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.metric.as_str()) {
                names.push(&r.metric);
            }
        }
        names
    }

    /// `n,metric_name,value,seed,target_kind`, values in shortest
    /// round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,metric_name,value,seed,target_kind\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.n, r.metric, r.value, self.seed, self.target_kind);
        }
        out
    }
}

fn validate_ladder(n_values: &[usize]) -> Result<()> {
    if n_values.is_empty() {
        return Err(Error::EmptyInput("n ladder"));
    }
    if n_values[0] == 0 || n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "n ladder must be positive and strictly increasing, got {n_values:?}"
        )));
    }
    Ok(())
}

/// Size and budget knobs shared by the experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlnSettings {
    pub n_values: Vec<usize>,
    /// Independent replicates averaged per `n`; `None` picks the
    /// experiment's default.
    pub replicates: Option<usize>,
    /// Atoms per discretized analytic measure.
    pub cells: usize,
    /// Monte Carlo draws per quantile level for population barycenters.
    pub mc_budget: usize,
}

impl Default for LlnSettings {
    fn default() -> Self {
        Self {
            n_values: DEFAULT_LADDER.to_vec(),
            replicates: None,
            cells: DEFAULT_CELLS,
            mc_budget: DEFAULT_MC_BUDGET,
        }
    }
}

/// Runs `f(n, replicate)` over the whole ladder in parallel and averages
/// each metric over replicates in a fixed order.
fn replicate_means<const M: usize>(
    n_values: &[usize],
    replicates: usize,
    f: impl Fn(usize, u64) -> Result<[f64; M]> + Sync,
) -> Result<Vec<[f64; M]>> {
    if replicates == 0 {
        return Err(Error::InvalidParameter("replicates must be positive".into()));
    }
    let jobs: Vec<(usize, u64)> = n_values
        .iter()
        .flat_map(|&n| (0..replicates as u64).map(move |r| (n, r)))
        .collect();
    let values: Vec<[f64; M]> = jobs.par_iter().map(|&(n, r)| f(n, r)).collect::<Result<_>>()?;
    Ok(values
        .chunks(replicates)
        .map(|chunk| {
            std::array::from_fn(|m| {
                chunk.iter().map(|v| v[m]).collect::<CompensatedSum>().value() / replicates as f64
            })
        })
        .collect())
}

fn rows<const M: usize>(n_values: &[usize], names: [&str; M], means: &[[f64; M]]) -> Vec<ReportRow> {
    n_values
        .iter()
        .zip(means)
        .flat_map(|(&n, vals)| {
            names.iter().zip(vals).map(move |(name, &value)| ReportRow {
                n,
                metric: name.to_string(),
                value,
            })
        })
        .collect()
}

/// `|x̄ₙ - x*|` averaged over replicates, where `x̄ₙ = argmin_x Σ g(Xᵢ - x)`.
///
/// `target` overrides the closed-form `x*` of the sampler; one of the two
/// must exist. The hypothesis that `E g(X - x)` is finite for some `x` is
/// the caller's to assert.
pub fn scalar_lln_experiment(
    g: &CostFunction,
    sampler: &ScalarSampler,
    target: Option<f64>,
    settings: &LlnSettings,
    seed: u64,
) -> Result<ConvergenceReport> {
    sampler.validate()?;
    validate_ladder(&settings.n_values)?;
    let (x_star, target_kind) = match target {
        Some(x) if x.is_finite() => (x, TargetKind::Supplied),
        Some(_) => return Err(Error::NonFinite("target")),
        None => {
            let x = sampler.frechet_target(g).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "no closed-form target for {sampler:?} under {}; supply one",
                    g.label()
                ))
            })?;
            (x, TargetKind::Analytic)
        }
    };
    let replicates = settings.replicates.unwrap_or(DEFAULT_SCALAR_REPLICATES);
    let means = replicate_means(&settings.n_values, replicates, |n, r| {
        let mut rng = substream(seed, &[EXPERIMENT_SCALAR, n as u64, r]);
        let xs = sampler.sample_n(&mut rng, n);
        let x_bar = scalar_frechet_mean_unweighted(g, &xs)?.minimizer;
        Ok([(x_bar - x_star).abs()])
    })?;
    Ok(ConvergenceReport {
        rows: rows(&settings.n_values, ["abs_error"], &means),
        n_values: settings.n_values.clone(),
        seed,
        target_kind,
        target: format!("x* = {x_star}"),
    })
}

/// The barycenter a report measures against, in discrete form.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterReference {
    pub measure: DiscreteMeasure,
    pub kind: TargetKind,
}

/// `ν*` for the barycenter experiment: closed form when the family has one,
/// otherwise a population barycenter with `REFERENCE_BUDGET_FACTOR` times
/// the Monte Carlo budget.
pub fn barycenter_reference(
    g: &CostFunction,
    sampler: &MeasureSampler,
    settings: &LlnSettings,
    seed: u64,
) -> Result<BarycenterReference> {
    if let Some(m) = sampler.analytic_barycenter(g) {
        let measure = match m {
            Measure::Discrete(d) => d,
            Measure::Analytic(c) => discretize(&c, settings.cells)?,
        };
        return Ok(BarycenterReference { measure, kind: TargetKind::Analytic });
    }
    let pop = population_barycenter(
        g,
        &MeasureDistribution::Sampler(sampler.clone()),
        &default_grid(settings.cells),
        REFERENCE_BUDGET_FACTOR * settings.mc_budget,
        seed,
    )?;
    Ok(BarycenterReference { measure: pop.measure, kind: TargetKind::Numerical })
}

/// Empirical barycenters `ν̄ₙ` of `n` i.i.d. draws against `ν*`, reporting
/// `J(ν̄ₙ, ν*)`, `J(ν*, ν̄ₙ)` and the Lévy distance, each averaged over
/// replicates. Analytic draws are discretized to `settings.cells` atoms, as
/// is an analytic `ν*`; for translate families the discretization commutes
/// with the barycenter, so the metrics stay exact.
pub fn barycenter_lln_experiment(
    g: &CostFunction,
    dist: &MeasureDistribution,
    settings: &LlnSettings,
    seed: u64,
) -> Result<ConvergenceReport> {
    g.require_growth()?;
    validate_ladder(&settings.n_values)?;
    if settings.cells == 0 {
        return Err(Error::InvalidParameter("cells must be positive".into()));
    }
    let sampler = match dist {
        MeasureDistribution::Sampler(s) => s.clone(),
        MeasureDistribution::Mixture(fam) => MeasureSampler::Choice {
            measures: fam.measures().iter().cloned().map(Measure::Discrete).collect(),
            probs: fam.weights().to_vec(),
        },
    };
    let reference = barycenter_reference(g, &sampler, settings, seed)?;
    let nu_star = &reference.measure;

    let replicates = settings.replicates.unwrap_or(DEFAULT_BARYCENTER_REPLICATES);
    let means = replicate_means(&settings.n_values, replicates, |n, r| {
        let mut rng = substream(seed, &[EXPERIMENT_BARYCENTER, n as u64, r]);
        let mut draws = Vec::with_capacity(n);
        for _ in 0..n {
            draws.push(sampler.draw(&mut rng)?.to_discrete(settings.cells)?);
        }
        let nu_bar = finite_barycenter(g, &WeightedFamily::equal(draws)?)?;
        Ok([
            discrete_transport_cost(g, &nu_bar, nu_star).value(),
            discrete_transport_cost(g, nu_star, &nu_bar).value(),
            levy_distance(&nu_bar, nu_star),
        ])
    })?;
    Ok(ConvergenceReport {
        rows: rows(&settings.n_values, ["j_forward", "j_backward", "levy"], &means),
        n_values: settings.n_values.clone(),
        seed,
        target_kind: reference.kind,
        target: sampler.description(),
    })
}

/// `J(ν̄ₙ, ν*)` and `J(ν*, ν̄ₙ)` must go to zero together. With growth
/// constants `(A, B)` and `g(-x) ≤ A + B g(x)` this means each column is
/// bounded by `A + B` times the other at every `n`.
pub fn j_columns_consistent(report: &ConvergenceReport, g: &CostFunction) -> Result<bool> {
    let gc = g.require_growth()?;
    let fwd = report.metric("j_forward");
    let bwd = report.metric("j_backward");
    Ok(fwd.len() == bwd.len()
        && fwd.iter().zip(&bwd).all(|(&f, &b)| {
            let slack = 1e-12 * f.max(b).max(1e-300);
            b <= gc.a + gc.b * f + slack && f <= gc.a + gc.b * b + slack
        }))
}

/// For each `(n, μₙ)`: the Lévy distance to `target`, the witness gap
/// `|J(μₙ, ν₀) - J(target, ν₀)|`, and `J(μₙ, target)`. Convergence in `J`
/// should coincide with the first two going to zero.
pub fn strongweak_check(
    g: &CostFunction,
    sequence: &[(usize, DiscreteMeasure)],
    target: &DiscreteMeasure,
    witness: &DiscreteMeasure,
) -> ConvergenceReport {
    let base = discrete_transport_cost(g, target, witness);
    let means: Vec<[f64; 3]> = sequence
        .iter()
        .map(|(_, mu)| {
            let gap = match (discrete_transport_cost(g, mu, witness), base) {
                (TransportCost::Finite(a), TransportCost::Finite(b)) => (a - b).abs(),
                _ => f64::INFINITY,
            };
            [levy_distance(mu, target), gap, discrete_transport_cost(g, mu, target).value()]
        })
        .collect();
    let n_values: Vec<usize> = sequence.iter().map(|(n, _)| *n).collect();
    ConvergenceReport {
        rows: rows(&n_values, ["levy", "witness_gap", "j_to_target"], &means),
        n_values,
        seed: 0,
        target_kind: TargetKind::Analytic,
        target: format!("{target:?}"),
    }
}

/// `(1 - 1/n) δ₀ + (1/n) δₙ`: converges weakly to `δ₀` while
/// `J(μₙ, δ₀) = g(n) / n` need not vanish.
pub fn mass_escape_measure(n: usize) -> Result<DiscreteMeasure> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if n == 1 {
        return DiscreteMeasure::dirac(1.0);
    }
    let w = 1.0 / n as f64;
    DiscreteMeasure::new(vec![0.0, n as f64], vec![1.0 - w, w])
}

/// `δ_{1/n}`.
pub fn dirac_approach_measure(n: usize) -> Result<DiscreteMeasure> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    DiscreteMeasure::dirac(1.0 / n as f64)
}

/// Measures whose tails can be cut at a level, for the divergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum TruncatableMeasure {
    Fixed(DiscreteMeasure),
    /// Atoms `±2^k`, `k = 0..=level`, with weights `∝ 2^{-decay k}`.
    DyadicTail { decay: f64 },
}

impl TruncatableMeasure {
    pub fn at_level(&self, level: usize) -> Result<DiscreteMeasure> {
        match self {
            Self::Fixed(m) => Ok(m.clone()),
            Self::DyadicTail { decay } => {
                if !(decay.is_finite() && *decay > 0.0) {
                    return Err(Error::InvalidParameter(format!("decay must be positive, got {decay}")));
                }
                let mut atoms = Vec::with_capacity(2 * level + 2);
                let mut weights = Vec::with_capacity(2 * level + 2);
                for k in 0..=level {
                    let x = 2f64.powi(k as i32);
                    let w = 2f64.powf(-decay * k as f64);
                    atoms.extend([-x, x]);
                    weights.extend([w, w]);
                }
                DiscreteMeasure::normalized(atoms, weights)
            }
        }
    }
}

/// `J(μ, ν)` is declared infinite when it is already infinite at some
/// truncation level, or grows by `DIVERGENCE_GROWTH` at every level step.
pub fn cost_diverges(g: &CostFunction, mu: &TruncatableMeasure, nu: &TruncatableMeasure) -> Result<bool> {
    let mut js = Vec::with_capacity(TRUNCATION_LEVELS.len());
    for &k in &TRUNCATION_LEVELS {
        match discrete_transport_cost(g, &mu.at_level(k)?, &nu.at_level(k)?) {
            TransportCost::Infinite => return Ok(true),
            TransportCost::Finite(v) => js.push(v),
        }
    }
    Ok(js[js.len() - 1] > 0.0 && js.windows(2).all(|w| w[1] >= DIVERGENCE_GROWTH * w[0]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// Index groups, each sorted, ordered by smallest member.
    pub classes: Vec<Vec<usize>>,
    /// `finite[i][j]` iff `J(μᵢ, μⱼ) < ∞` was concluded.
    pub finite: Vec<Vec<bool>>,
    pub symmetric: bool,
    pub transitive: bool,
}

/// Groups measures by `J(μ, ν) < ∞` and checks that the computed relation
/// is symmetric and transitive on the given set.
pub fn equivalence_class_check(g: &CostFunction, measures: &[TruncatableMeasure]) -> Result<EquivalenceReport> {
    g.require_growth()?;
    let n = measures.len();
    let mut finite = vec![vec![true; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                finite[i][j] = !cost_diverges(g, &measures[i], &measures[j])?;
            }
        }
    }
    let symmetric = (0..n).all(|i| (0..n).all(|j| finite[i][j] == finite[j][i]));
    let transitive =
        (0..n).all(|i| (0..n).all(|j| !finite[i][j] || (0..n).all(|k| !finite[j][k] || finite[i][k])));

    let mut class_of: Vec<Option<usize>> = vec![None; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if class_of[i].is_some() {
            continue;
        }
        // Connected component under the symmetrized relation.
        let id = classes.len();
        let mut members = vec![i];
        class_of[i] = Some(id);
        let mut head = 0;
        while head < members.len() {
            let a = members[head];
            head += 1;
            for b in 0..n {
                if class_of[b].is_none() && (finite[a][b] || finite[b][a]) {
                    class_of[b] = Some(id);
                    members.push(b);
                }
            }
        }
        members.sort_unstable();
        classes.push(members);
    }
    Ok(EquivalenceReport { classes, finite, symmetric, transitive })
}

/// `ot1d lln scalar` configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarLlnConfig {
    pub cost: String,
    pub sampler: ScalarSampler,
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(flatten)]
    pub settings: LlnSettings,
}

/// `ot1d lln barycenter` configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarycenterLlnConfig {
    pub cost: String,
    pub sampler: MeasureSamplerSpec,
    #[serde(flatten)]
    pub settings: LlnSettings,
}

/// Sequences for `ot1d lln strongweak`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SequenceSpec {
    /// [`mass_escape_measure`] against `δ₀` with witness `δ₀`.
    MassEscape,
    /// [`dirac_approach_measure`] against `δ₀` with witness `δ₀`.
    DiracApproach,
    /// Explicit measures, labelled `1, 2, ...`.
    Explicit {
        measures: Vec<MeasureSpec>,
        target: MeasureSpec,
        witness: MeasureSpec,
    },
}

/// `ot1d lln strongweak` configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongWeakConfig {
    pub cost: String,
    pub sequence: SequenceSpec,
    #[serde(default = "default_strongweak_ladder")]
    pub n_values: Vec<usize>,
}

fn default_strongweak_ladder() -> Vec<usize> {
    DEFAULT_LADDER.to_vec()
}

fn discrete_spec(spec: &MeasureSpec) -> Result<DiscreteMeasure> {
    match spec.resolve()? {
        Measure::Discrete(d) => Ok(d),
        Measure::Analytic(_) => Err(Error::InvalidParameter(
            "strong/weak sequences need discrete measures".into(),
        )),
    }
}

impl StrongWeakConfig {
    pub fn run(&self) -> Result<ConvergenceReport> {
        let g = CostFunction::parse(&self.cost)?;
        let zero = DiscreteMeasure::dirac(0.0)?;
        let (sequence, target, witness) = match &self.sequence {
            SequenceSpec::MassEscape | SequenceSpec::DiracApproach => {
                validate_ladder(&self.n_values)?;
                let make = if self.sequence == SequenceSpec::MassEscape {
                    mass_escape_measure
                } else {
                    dirac_approach_measure
                };
                let seq = self.n_values.iter().map(|&n| Ok((n, make(n)?))).collect::<Result<Vec<_>>>()?;
                (seq, zero.clone(), zero)
            }
            SequenceSpec::Explicit { measures, target, witness } => {
                let seq = measures
                    .iter()
                    .enumerate()
                    .map(|(i, m)| Ok((i + 1, discrete_spec(m)?)))
                    .collect::<Result<Vec<_>>>()?;
                if seq.is_empty() {
                    return Err(Error::EmptyInput("sequence"));
                }
                (seq, discrete_spec(target)?, discrete_spec(witness)?)
            }
        };
        Ok(strongweak_check(&g, &sequence, &target, &witness))
    }
}

impl ScalarLlnConfig {
    pub fn run(&self, seed: u64) -> Result<ConvergenceReport> {
        let g = CostFunction::parse(&self.cost)?;
        scalar_lln_experiment(&g, &self.sampler, self.target, &self.settings, seed)
    }
}

impl BarycenterLlnConfig {
    pub fn run(&self, seed: u64) -> Result<ConvergenceReport> {
        let g = CostFunction::parse(&self.cost)?;
        let dist = MeasureDistribution::Sampler(self.sampler.resolve()?);
        barycenter_lln_experiment(&g, &dist, &self.settings, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::AnalyticCurve;

    fn settings(n_values: &[usize], replicates: usize) -> LlnSettings {
        LlnSettings {
            n_values: n_values.to_vec(),
            replicates: Some(replicates),
            ..Default::default()
        }
    }

    #[test]
    fn constant_sampler_is_exact() {
        let s = ScalarSampler::Constant { value: 2.5 };
        for g in [CostFunction::quadratic(), CostFunction::skew_quadratic(4.0).unwrap()] {
            let r = scalar_lln_experiment(&g, &s, None, &settings(&[1, 7, 50], 3), 9).unwrap();
            assert_eq!(r.metric("abs_error"), vec![0.0; 3]);
            assert_eq!(r.target_kind, TargetKind::Analytic);
        }
    }

    #[test]
    fn bernoulli_quadratic_at_ten_thousand() {
        let s = ScalarSampler::Bernoulli { p: 0.3 };
        let r = scalar_lln_experiment(&CostFunction::quadratic(), &s, None, &settings(&[10_000], 1), 1).unwrap();
        assert!(r.metric("abs_error")[0] <= 0.02);
    }

    #[test]
    fn skew_uniform_at_hundred_thousand() {
        // 2 E(X-x)⁺ = 8 E(x-X)⁺ on U(0,1): (1-x)² = 4x², x* = 1/3.
        let g = CostFunction::skew_quadratic(4.0).unwrap();
        let s = ScalarSampler::Uniform { a: 0.0, b: 1.0 };
        assert!((s.frechet_target(&g).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let r = scalar_lln_experiment(&g, &s, None, &settings(&[100_000], 1), 2).unwrap();
        assert!(r.metric("abs_error")[0] <= 0.01);
    }

    #[test]
    fn scalar_needs_a_target() {
        let g = CostFunction::skew_quadratic(2.0).unwrap();
        let s = ScalarSampler::Gaussian { mean: 0.0, std: 1.0 };
        assert!(scalar_lln_experiment(&g, &s, None, &settings(&[10], 1), 0).is_err());
        let r = scalar_lln_experiment(&g, &s, Some(-0.2), &settings(&[10], 1), 0).unwrap();
        assert_eq!(r.target_kind, TargetKind::Supplied);
    }

    #[test]
    fn ladder_is_validated() {
        let s = ScalarSampler::Constant { value: 0.0 };
        let q = CostFunction::quadratic();
        for bad in [&[][..], &[0, 1], &[10, 10], &[20, 10]] {
            assert!(scalar_lln_experiment(&q, &s, None, &settings(bad, 1), 0).is_err());
        }
    }

    #[test]
    fn random_sign_dirac_barycenter() {
        // ν̄ₙ = δ_{S̄ₙ}, so J = S̄ₙ² in both directions and Lévy = |S̄ₙ|.
        let sampler = MeasureSampler::RandomDirac { location: ScalarSampler::two_point(-1.0, 1.0) };
        let q = CostFunction::quadratic();
        let r = barycenter_lln_experiment(
            &q,
            &MeasureDistribution::Sampler(sampler),
            &settings(&[10, 100, 1000], 64),
            3,
        )
        .unwrap();
        assert_eq!(r.target_kind, TargetKind::Analytic);
        let j = r.metric("j_forward");
        assert_eq!(j, r.metric("j_backward"));
        for (n, v) in r.n_values.iter().zip(&j) {
            // E S̄ₙ² = 1/n; 64 replicates keep the average within a factor 2.
            let expected = 1.0 / *n as f64;
            assert!(*v > 0.5 * expected && *v < 2.0 * expected, "{n}: {v}");
        }
        let levy = r.metric("levy");
        assert!(levy.windows(2).all(|w| w[1] < w[0]), "{levy:?}");
        assert!(j_columns_consistent(&r, &q).unwrap());
    }

    #[test]
    fn translate_family_reduces_to_mean_shift() {
        let base = Measure::Analytic(AnalyticCurve::uniform(0.0, 1.0).unwrap());
        let sampler = MeasureSampler::Translate {
            base,
            shift: ScalarSampler::Gaussian { mean: 0.0, std: 1.0 },
        };
        let q = CostFunction::quadratic();
        let set = LlnSettings { cells: 50, ..settings(&[10, 100, 1000], 1) };
        let r = barycenter_lln_experiment(&q, &MeasureDistribution::Sampler(sampler.clone()), &set, 4).unwrap();
        // Recompute S̄ₙ from the same substreams.
        for (n, j) in r.n_values.iter().zip(r.metric("j_forward")) {
            let mut rng = substream(4, &[EXPERIMENT_BARYCENTER, *n as u64, 0]);
            let mut total = 0.0;
            for _ in 0..*n {
                match sampler.draw(&mut rng).unwrap() {
                    crate::sampling::Drawn::Shifted(_, t) => total += t,
                    _ => unreachable!(),
                }
            }
            let s_bar = total / *n as f64;
            assert!((j - s_bar * s_bar).abs() < 1e-9 * (1.0 + j), "{n}: {j} vs {}", s_bar * s_bar);
        }
    }

    #[test]
    fn fixed_sampler_gives_zero_metrics() {
        let mu = DiscreteMeasure::new(vec![0.0, 2.0, 3.0], vec![0.2, 0.3, 0.5]).unwrap();
        let sampler = MeasureSampler::Fixed(Measure::Discrete(mu));
        let g = CostFunction::power(3.0).unwrap();
        let r = barycenter_lln_experiment(&g, &MeasureDistribution::Sampler(sampler), &settings(&[1, 5], 2), 0)
            .unwrap();
        assert!(r.rows.iter().all(|row| row.value == 0.0));
    }

    #[test]
    fn barycenter_requires_growth() {
        let sampler = MeasureSampler::RandomDirac { location: ScalarSampler::Bernoulli { p: 0.5 } };
        let g = CostFunction::quadratic().without_growth();
        let err = barycenter_lln_experiment(&g, &MeasureDistribution::Sampler(sampler), &settings(&[10], 1), 0);
        assert!(matches!(err, Err(Error::GrowthConstantsMissing(_))));
    }

    #[test]
    fn mass_escape_columns() {
        let q = CostFunction::quadratic();
        let zero = DiscreteMeasure::dirac(0.0).unwrap();
        let seq: Vec<_> = (1..=5).map(|n| (n, mass_escape_measure(n).unwrap())).collect();
        let r = strongweak_check(&q, &seq, &zero, &zero);
        let j = r.metric("j_to_target");
        for (n, v) in (1..=5).zip(&j) {
            assert!((v - n as f64).abs() < 1e-12, "{n}: {v}");
        }
        assert_eq!(r.metric("witness_gap"), j);
        let levy = r.metric("levy");
        for (n, l) in (1..=5).zip(&levy) {
            assert!((l - 1.0 / n as f64).abs() < 1e-12, "{n}: {l}");
        }
    }

    #[test]
    fn dirac_approach_columns() {
        let q = CostFunction::quadratic();
        let zero = DiscreteMeasure::dirac(0.0).unwrap();
        let seq: Vec<_> = [1, 10, 100].iter().map(|&n| (n, dirac_approach_measure(n).unwrap())).collect();
        let r = strongweak_check(&q, &seq, &zero, &zero);
        for (n, j) in r.n_values.iter().zip(r.metric("j_to_target")) {
            assert!((j - 1.0 / (n * n) as f64).abs() < 1e-15);
        }
        assert!(r.metric("levy").windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn constant_sequence_is_all_zero() {
        let q = CostFunction::quadratic();
        let t = DiscreteMeasure::new(vec![1.0, 4.0], vec![0.5, 0.5]).unwrap();
        let w = DiscreteMeasure::dirac(0.0).unwrap();
        let seq: Vec<_> = (1..4).map(|n| (n, t.clone())).collect();
        let r = strongweak_check(&q, &seq, &t, &w);
        assert!(r.rows.iter().all(|row| row.value == 0.0));
    }

    #[test]
    fn csv_layout() {
        let q = CostFunction::quadratic();
        let zero = DiscreteMeasure::dirac(0.0).unwrap();
        let seq = vec![(1, mass_escape_measure(1).unwrap())];
        let mut r = strongweak_check(&q, &seq, &zero, &zero);
        r.seed = 5;
        assert_eq!(
            r.to_csv(),
            "n,metric_name,value,seed,target_kind\n\
             1,levy,1,5,analytic\n1,witness_gap,1,5,analytic\n1,j_to_target,1,5,analytic\n"
        );
    }

    #[test]
    fn equivalence_classes() {
        let q = CostFunction::quadratic();
        let fixed = |m: DiscreteMeasure| TruncatableMeasure::Fixed(m);
        let d0 = fixed(DiscreteMeasure::dirac(0.0).unwrap());
        let d1 = fixed(DiscreteMeasure::dirac(1.0).unwrap());
        let u = fixed(discretize(&AnalyticCurve::uniform(0.0, 1.0).unwrap(), 100).unwrap());
        let r = equivalence_class_check(&q, &[d0.clone(), d1, u]).unwrap();
        assert_eq!(r.classes, vec![vec![0, 1, 2]]);

        let heavy = TruncatableMeasure::DyadicTail { decay: 0.5 };
        let light = TruncatableMeasure::DyadicTail { decay: 3.0 };
        let r = equivalence_class_check(&q, &[d0.clone(), heavy.clone()]).unwrap();
        assert_eq!(r.classes, vec![vec![0], vec![1]]);
        let r = equivalence_class_check(&q, &[d0, heavy.clone(), light, heavy]).unwrap();
        assert_eq!(r.classes, vec![vec![0, 2], vec![1, 3]]);
        assert!(r.symmetric && r.transitive);

        let mu = fixed(DiscreteMeasure::new(vec![0.0, 5.0], vec![0.5, 0.5]).unwrap());
        let p3 = CostFunction::power(3.0).unwrap();
        assert_eq!(equivalence_class_check(&p3, &[mu.clone(), mu]).unwrap().classes, vec![vec![0, 1]]);
        assert!(equivalence_class_check(&q.without_growth(), &[]).is_err());
    }

    #[test]
    fn configs_parse() {
        let c: ScalarLlnConfig = serde_json::from_str(
            r#"{"cost":"quadratic","sampler":{"family":"bernoulli","p":0.3},"n_values":[10,100],"replicates":4}"#,
        )
        .unwrap();
        assert_eq!(c.settings.replicates, Some(4));
        assert_eq!(c.settings.cells, DEFAULT_CELLS);
        let b: BarycenterLlnConfig = serde_json::from_str(
            r#"{"cost":"power:2","sampler":{"family":"translate","base":{"type":"uniform","a":0,"b":1},
                "shift":{"family":"gaussian","mean":0,"std":1}},"cells":20}"#,
        )
        .unwrap();
        assert_eq!(b.settings.n_values, DEFAULT_LADDER.to_vec());
        let s: StrongWeakConfig =
            serde_json::from_str(r#"{"cost":"quadratic","sequence":{"family":"mass_escape"},"n_values":[1,2,3]}"#)
                .unwrap();
        let r = s.run().unwrap();
        for (n, j) in r.n_values.iter().zip(r.metric("j_to_target")) {
            assert!((j - *n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let s = ScalarSampler::Uniform { a: 0.0, b: 1.0 };
        let g = CostFunction::power(4.0).unwrap();
        let set = settings(&[10, 100], 4);
        let a = scalar_lln_experiment(&g, &s, None, &set, 11).unwrap();
        let b = scalar_lln_experiment(&g, &s, None, &set, 11).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let c = scalar_lln_experiment(&g, &s, None, &set, 12).unwrap();
        assert_ne!(a.to_csv(), c.to_csv());
    }
}
