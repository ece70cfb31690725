//! The built-in invariant suite behind `ot1d check`.

use std::fmt;

use rand::Rng;

use crate::barycenter::{barycenter_quantiles, finite_barycenter, WeightedFamily};
use crate::cost::{check_growth, growth_constants_for_power, probe_strict_convexity, symmetric_grid, CostFunction};
use crate::error::Result;
use crate::lln::{scalar_lln_experiment, LlnSettings};
use crate::measure::{DiscreteMeasure, QuantileCurve};
use crate::sampling::{substream, ScalarSampler, SeededRng};
use crate::transport::{discrete_transport_cost, lp_oracle_cost, monotone_plan};

/// The four cost instances exercised by the suite.
pub fn builtin_costs() -> Vec<CostFunction> {
    vec![
        CostFunction::quadratic(),
        CostFunction::power(1.5).expect("valid exponent"),
        CostFunction::power(4.0).expect("valid exponent"),
        CostFunction::skew_quadratic(4.0).expect("valid coefficient"),
    ]
}

/// `1..=max_atoms` atoms on a coarse grid in `[-5, 5]` (so ties and shared
/// atoms happen), with weights bounded away from zero.
pub fn random_discrete_measure(rng: &mut SeededRng, max_atoms: usize) -> DiscreteMeasure {
    let k = rng.random_range(1..=max_atoms.max(1));
    let atoms: Vec<f64> = (0..k).map(|_| rng.random_range(-40i32..=40) as f64 / 8.0).collect();
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    DiscreteMeasure::normalized(atoms, weights).expect("finite positive weights")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status}  {:<26} {}", self.name, self.detail)
    }
}

fn outcome(name: &'static str, failures: usize, total: usize, worst: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: failures == 0,
        detail: format!("{failures}/{total} failed, worst {worst:.3e}"),
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

const CHECK_ORACLE: u64 = 101;
const CHECK_GALOIS: u64 = 102;
const CHECK_TRIANGLE: u64 = 103;
const CHECK_MARGINALS: u64 = 104;
const CHECK_TRANSLATION: u64 = 105;
const CHECK_QUADRATIC: u64 = 106;

/// Runs every check with `trials` randomized instances each.
pub fn run_checks(trials: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        oracle_equivalence(trials, seed)?,
        growth_constants(),
        wrong_growth_constant_detected(),
        convexity_probe(),
        galois_connection(trials, seed),
        w2_triangle(trials, seed),
        plan_marginals(trials, seed)?,
        translation_equivariance(trials, seed)?,
        quadratic_barycenter(trials, seed)?,
        determinism_across_threads(seed)?,
    ])
}

/// Quantile sweep against the LP optimum, relative tolerance `1e-9`.
pub fn oracle_equivalence(trials: usize, seed: u64) -> Result<CheckOutcome> {
    let costs = builtin_costs();
    let (mut fails, mut worst) = (0, 0.0f64);
    for t in 0..trials {
        let mut rng = substream(seed, &[CHECK_ORACLE, t as u64]);
        let mu = random_discrete_measure(&mut rng, 8);
        let nu = random_discrete_measure(&mut rng, 8);
        for g in &costs {
            let e = rel_err(discrete_transport_cost(g, &mu, &nu).value(), lp_oracle_cost(g, &mu, &nu)?);
            worst = worst.max(e);
            fails += usize::from(e > 1e-9);
        }
    }
    Ok(outcome("oracle equivalence", fails, trials * costs.len(), worst))
}

/// `growth_constants_for_power` holds on `[-100, 100]`, 10⁴ pairs.
pub fn growth_constants() -> CheckOutcome {
    let grid = symmetric_grid(100.0, 100);
    let mut fails = 0;
    let mut pairs = 0;
    let mut worst = 0.0f64;
    for p in [1.5, 2.0, 3.0, 4.0] {
        let g = CostFunction::power(p).expect("valid exponent");
        let (a, b) = growth_constants_for_power(p).expect("valid exponent");
        let check = check_growth(&g, a, b, &grid);
        pairs += check.pairs_checked;
        fails += usize::from(!check.holds);
        if let Some(v) = check.worst {
            worst = worst.max(v.excess);
        }
    }
    outcome("growth constants", fails, pairs, worst)
}

/// `B = 0.5` for the quadratic cost must be rejected with a witness pair.
pub fn wrong_growth_constant_detected() -> CheckOutcome {
    let check = check_growth(&CostFunction::quadratic(), 0.0, 0.5, &symmetric_grid(100.0, 100));
    CheckOutcome {
        name: "wrong growth rejected",
        passed: !check.holds && check.worst.is_some(),
        detail: match check.worst {
            Some(v) => format!("violating pair ({}, {}), excess {:.3e}", v.x, v.y, v.excess),
            None => "no violation found".into(),
        },
    }
}

/// Midpoint strict convexity of every built-in cost.
pub fn convexity_probe() -> CheckOutcome {
    let costs = builtin_costs();
    let bad: Vec<&str> = costs
        .iter()
        .filter(|g| probe_strict_convexity(|x| g.eval(x), 10_000, 0x5eed).is_some())
        .map(|g| g.label())
        .collect();
    CheckOutcome {
        name: "convexity probe",
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{} costs strictly convex", costs.len())
        } else {
            format!("not strictly convex: {}", bad.join(", "))
        },
    }
}

/// `F⁻¹(p) ≤ x  ⇔  p ≤ μ((-∞, x])`, probed at random points and at atoms.
pub fn galois_connection(trials: usize, seed: u64) -> CheckOutcome {
    let mut fails = 0;
    for t in 0..trials {
        let mut rng = substream(seed, &[CHECK_GALOIS, t as u64]);
        let mu = random_discrete_measure(&mut rng, 8);
        let p: f64 = rng.random_range(f64::EPSILON..1.0);
        let x = if rng.random_bool(0.5) {
            mu.atoms()[rng.random_range(0..mu.len())]
        } else {
            rng.random_range(-6.0..6.0)
        };
        fails += usize::from((mu.quantile(p) <= x) != (p <= mu.cdf_right(x)));
    }
    outcome("quantile/cdf galois", fails, trials, 0.0)
}

/// `W₂ = √J` under the quadratic cost is a metric.
pub fn w2_triangle(trials: usize, seed: u64) -> CheckOutcome {
    let q = CostFunction::quadratic();
    let w2 = |a: &DiscreteMeasure, b: &DiscreteMeasure| discrete_transport_cost(&q, a, b).value().sqrt();
    let (mut fails, mut worst) = (0, 0.0f64);
    for t in 0..trials {
        let mut rng = substream(seed, &[CHECK_TRIANGLE, t as u64]);
        let [a, b, c] = std::array::from_fn(|_| random_discrete_measure(&mut rng, 8));
        let excess = w2(&a, &c) - w2(&a, &b) - w2(&b, &c);
        worst = worst.max(excess);
        fails += usize::from(excess > 1e-12);
    }
    outcome("w2 triangle inequality", fails, trials, worst)
}

/// The monotone plan is monotone, has the right marginals, and attains `J`.
pub fn plan_marginals(trials: usize, seed: u64) -> Result<CheckOutcome> {
    let q = CostFunction::power(3.0)?;
    let (mut fails, mut worst) = (0, 0.0f64);
    for t in 0..trials {
        let mut rng = substream(seed, &[CHECK_MARGINALS, t as u64]);
        let mu = random_discrete_measure(&mut rng, 8);
        let nu = random_discrete_measure(&mut rng, 8);
        let plan = monotone_plan(&mu, &nu);
        let e = rel_err(plan.cost(&q), discrete_transport_cost(&q, &mu, &nu).value())
            .max((plan.total_mass() - 1.0).abs());
        worst = worst.max(e);
        let ok = plan.is_monotone()
            && plan.source_marginal()?.approx_eq(&mu, 1e-12)
            && plan.target_marginal()?.approx_eq(&nu, 1e-12)
            && e <= 1e-12;
        fails += usize::from(!ok);
    }
    Ok(outcome("plan marginals", fails, trials, worst))
}

/// Shifting every measure by `t` leaves `J` unchanged and shifts barycenters.
pub fn translation_equivariance(trials: usize, seed: u64) -> Result<CheckOutcome> {
    let costs = builtin_costs();
    let (mut fails, mut worst) = (0, 0.0f64);
    for trial in 0..trials {
        let mut rng = substream(seed, &[CHECK_TRANSLATION, trial as u64]);
        let g = &costs[trial % costs.len()];
        let mu = random_discrete_measure(&mut rng, 6);
        let nu = random_discrete_measure(&mut rng, 6);
        let t = rng.random_range(-3.0..3.0);
        let e_cost = rel_err(
            discrete_transport_cost(g, &mu.shifted(t), &nu.shifted(t)).value(),
            discrete_transport_cost(g, &mu, &nu).value(),
        );
        let fam = WeightedFamily::equal(vec![mu.clone(), nu.clone()])?;
        let fam_t = WeightedFamily::equal(vec![mu.shifted(t), nu.shifted(t)])?;
        let a = barycenter_quantiles(g, &fam)?;
        let b = barycenter_quantiles(g, &fam_t)?;
        let e_bary = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x + t - y).abs())
            .fold(0.0, f64::max);
        let e = e_cost.max(e_bary);
        worst = worst.max(e);
        fails += usize::from(e_cost > 1e-9 || e_bary > 1e-9 || a.values.len() != b.values.len());
    }
    Ok(outcome("translation equivariance", fails, trials, worst))
}

/// Quadratic barycenters average the quantile functions.
pub fn quadratic_barycenter(trials: usize, seed: u64) -> Result<CheckOutcome> {
    let q = CostFunction::quadratic();
    let (mut fails, mut worst) = (0, 0.0f64);
    for t in 0..trials {
        let mut rng = substream(seed, &[CHECK_QUADRATIC, t as u64]);
        let k = rng.random_range(1..=5);
        let measures: Vec<DiscreteMeasure> = (0..k).map(|_| random_discrete_measure(&mut rng, 6)).collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let fam = WeightedFamily::new(measures, weights)?;
        let bary = finite_barycenter(&q, &fam)?;
        let part = barycenter_quantiles(&q, &fam)?;
        for p in part.midpoints() {
            let avg: f64 = fam.measures().iter().zip(fam.weights()).map(|(m, w)| w * m.quantile(p)).sum();
            let e = (bary.quantile(p) - avg).abs();
            worst = worst.max(e);
            fails += usize::from(e > 1e-12);
        }
    }
    Ok(outcome("quadratic barycenter", fails, trials, worst))
}

/// The same experiment on one and on four worker threads.
pub fn determinism_across_threads(seed: u64) -> Result<CheckOutcome> {
    let run = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::Error::InvalidParameter(e.to_string()))?;
        pool.install(|| {
            let settings = LlnSettings {
                n_values: vec![10, 100, 1000],
                replicates: Some(8),
                ..Default::default()
            };
            let g = CostFunction::power(4.0)?;
            Ok(scalar_lln_experiment(&g, &ScalarSampler::Uniform { a: 0.0, b: 1.0 }, None, &settings, seed)?.to_csv())
        })
    };
    let same = run(1)? == run(4)?;
    Ok(CheckOutcome {
        name: "determinism across threads",
        passed: same,
        detail: if same { "1 vs 4 threads bit-identical".into() } else { "outputs differ".into() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        for c in run_checks(200, 0).unwrap() {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn random_measures_are_reproducible() {
        let a = random_discrete_measure(&mut substream(1, &[2]), 8);
        let b = random_discrete_measure(&mut substream(1, &[2]), 8);
        assert_eq!(a, b);
        assert!(a.len() <= 8);
    }
}
