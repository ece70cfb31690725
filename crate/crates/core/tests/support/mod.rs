//! Instance generators and reference implementations shared by the
//! integration tests. Nothing here calls into the quantile machinery under
//! test.

#![allow(dead_code)]

use ot1d::measure::DiscreteMeasure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Flat Dirichlet weights via normalized exponentials.
pub fn dirichlet(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect::<Vec<f64>>();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w: f64| (w / total).max(1e-12)).collect()
}

/// `1..=max_atoms` atoms uniform in `[-range, range]` with Dirichlet weights.
pub fn measure(rng: &mut ChaCha8Rng, max_atoms: usize, range: f64) -> DiscreteMeasure {
    let k = rng.random_range(1..=max_atoms);
    let atoms: Vec<f64> = (0..k).map(|_| rng.random_range(-range..=range)).collect();
    DiscreteMeasure::normalized(atoms, dirichlet(rng, k)).unwrap()
}

/// Atoms on the grid `k/8` and weights that are multiples of `1/16`, so
/// every sum and difference below is exact in binary floating point.
pub fn dyadic_measure(rng: &mut ChaCha8Rng, max_atoms: usize) -> DiscreteMeasure {
    let k = rng.random_range(1..=max_atoms.min(16));
    let mut units = vec![1u32; k];
    for _ in k..16 {
        units[rng.random_range(0..k)] += 1;
    }
    let atoms: Vec<f64> = (0..k).map(|_| rng.random_range(-24i32..=24) as f64 / 8.0).collect();
    let weights: Vec<f64> = units.iter().map(|&u| u as f64 / 16.0).collect();
    DiscreteMeasure::new(atoms, weights).unwrap()
}

/// Sorted `(atom, weight)` pairs, merged on exact equality.
pub fn sorted_pairs(m: &DiscreteMeasure) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = m.atoms().iter().copied().zip(m.weights().iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// `inf { x : μ((-∞, x]) ≥ p }` by a linear scan with a running sum.
pub fn ref_quantile(m: &DiscreteMeasure, p: f64) -> f64 {
    let pairs = sorted_pairs(m);
    let mut acc = 0.0;
    for &(x, w) in &pairs {
        acc += w;
        if acc >= p - 1e-14 {
            return x;
        }
    }
    pairs.last().unwrap().0
}

/// `μ((-∞, x])`.
pub fn ref_cdf_right(m: &DiscreteMeasure, x: f64) -> f64 {
    m.atoms().iter().zip(m.weights()).filter(|(a, _)| **a <= x).map(|(_, w)| w).sum()
}

/// Union of the cumulative levels of every measure, with `0` and `1`.
pub fn merged_levels(ms: &[&DiscreteMeasure]) -> Vec<f64> {
    let mut levels = vec![0.0, 1.0];
    for m in ms {
        let mut acc = 0.0;
        for (_, w) in sorted_pairs(m) {
            acc += w;
            if acc < 1.0 - 1e-12 {
                levels.push(acc);
            }
        }
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    levels
}

/// Cost `g` and its derivative in closed form, written out independently.
#[derive(Debug, Clone, Copy)]
pub enum RefCost {
    Quadratic,
    Power(f64),
    Skew(f64),
}

impl RefCost {
    pub fn spec(self) -> String {
        match self {
            Self::Quadratic => "quadratic".into(),
            Self::Power(p) => format!("power:{p}"),
            Self::Skew(c) => format!("skewquad:{c}"),
        }
    }

    pub fn g(self, x: f64) -> f64 {
        match self {
            Self::Quadratic => x * x,
            Self::Power(p) => x.abs().powf(p),
            Self::Skew(c) => {
                if x >= 0.0 {
                    x * x
                } else {
                    c * x * x
                }
            }
        }
    }

    pub fn dg(self, x: f64) -> f64 {
        match self {
            Self::Quadratic => 2.0 * x,
            Self::Power(p) => p * x.abs().powf(p - 1.0) * x.signum(),
            Self::Skew(c) => {
                if x >= 0.0 {
                    2.0 * x
                } else {
                    2.0 * c * x
                }
            }
        }
    }

    pub fn cost(self) -> ot1d::cost::CostFunction {
        ot1d::cost::CostFunction::parse(&self.spec()).unwrap()
    }
}

/// The four built-in cost instances.
pub const BUILTINS: [RefCost; 4] = [RefCost::Quadratic, RefCost::Power(1.5), RefCost::Power(4.0), RefCost::Skew(4.0)];

/// `J(μ, ν) = Σ over merged level intervals of length · g(F⁻¹_μ - F⁻¹_ν)`,
/// evaluated at interval midpoints with the reference quantile.
pub fn ref_transport_cost(g: RefCost, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let levels = merged_levels(&[mu, nu]);
    levels
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (w[1] - w[0]) * g.g(ref_quantile(mu, mid) - ref_quantile(nu, mid))
        })
        .sum()
}

/// Root of a nondecreasing function on `[lo, hi]` by plain bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
