//! Seeded randomness: counter-based substreams and the scalar and
//! measure-valued samplers used by barycenter and LLN experiments.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Bernoulli, Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::barycenter::scalar_frechet_mean;
use crate::cost::CostFunction;
use crate::error::{Error, Result};
use crate::measure::{discretize, DiscreteMeasure, Measure, MeasureSpec, QuantileCurve};

pub type SeededRng = ChaCha8Rng;

/// An independent generator for `(seed, keys...)`.
///
/// The seed picks the ChaCha key and the keys are folded into the stream id,
/// so draws keyed by, say, `(experiment, n, replicate)` do not depend on the
/// order in which work is scheduled.
pub fn substream(seed: u64, keys: &[u64]) -> SeededRng {
    let mut stream = 0x243f_6a88_85a3_08d3_u64;
    for &k in keys {
        stream = splitmix64(stream ^ k);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Real-valued sampling families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ScalarSampler {
    Constant { value: f64 },
    Bernoulli { p: f64 },
    Uniform { a: f64, b: f64 },
    Gaussian { mean: f64, std: f64 },
    /// Finite support with the given probabilities.
    Discrete { values: Vec<f64>, probs: Vec<f64> },
}

impl ScalarSampler {
    pub fn two_point(a: f64, b: f64) -> Self {
        Self::Discrete {
            values: vec![a, b],
            probs: vec![0.5, 0.5],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Constant { value } => value.is_finite(),
            Self::Bernoulli { p } => (0.0..=1.0).contains(p),
            Self::Uniform { a, b } => a.is_finite() && b.is_finite() && a < b,
            Self::Gaussian { mean, std } => mean.is_finite() && std.is_finite() && *std > 0.0,
            Self::Discrete { values, probs } => {
                !values.is_empty()
                    && values.len() == probs.len()
                    && values.iter().all(|v| v.is_finite())
                    && probs.iter().all(|p| p.is_finite() && *p >= 0.0)
                    && probs.iter().sum::<f64>() > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad scalar sampler {self:?}")))
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Bernoulli { p } => {
                if Bernoulli::new(*p).expect("validated").sample(rng) {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Uniform { a, b } => Uniform::new(*a, *b).expect("validated").sample(rng),
            Self::Gaussian { mean, std } => Normal::new(*mean, *std).expect("validated").sample(rng),
            Self::Discrete { values, probs } => {
                values[WeightedIndex::new(probs).expect("validated").sample(rng)]
            }
        }
    }

    pub fn sample_n(&self, rng: &mut impl Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    /// `x* = argmin_x E g(X - x)` when it is available in closed form (or,
    /// for finite support, from an exact finite minimization).
    pub fn frechet_target(&self, g: &CostFunction) -> Option<f64> {
        match self {
            Self::Constant { value } => Some(*value),
            Self::Bernoulli { p } => {
                let (values, probs) = bernoulli_support(*p);
                scalar_frechet_mean(g, &values, &probs).ok().map(|r| r.minimizer)
            }
            Self::Discrete { values, probs } => {
                let (v, p): (Vec<f64>, Vec<f64>) = values
                    .iter()
                    .zip(probs)
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(v, p)| (*v, *p))
                    .unzip();
                scalar_frechet_mean(g, &v, &p).ok().map(|r| r.minimizer)
            }
            Self::Uniform { a, b } => {
                if g.is_even() {
                    Some(0.5 * (a + b))
                } else {
                    // E g'(X - x) = 0  ⇔  (b - x)² = c (x - a)².
                    g.skew_coefficient().map(|c| a + (b - a) / (1.0 + c.sqrt()))
                }
            }
            Self::Gaussian { mean, .. } => g.is_even().then_some(*mean),
        }
    }
}

fn bernoulli_support(p: f64) -> (Vec<f64>, Vec<f64>) {
    if p <= 0.0 {
        (vec![0.0], vec![1.0])
    } else if p >= 1.0 {
        (vec![1.0], vec![1.0])
    } else {
        (vec![0.0, 1.0], vec![1.0 - p, p])
    }
}

type CustomDraw = Arc<dyn Fn(&mut SeededRng) -> Result<Measure> + Send + Sync>;

/// A law over measures that can be sampled.
#[derive(Clone)]
pub enum MeasureSampler {
    /// `δ_S` with `S` drawn from a scalar family.
    RandomDirac { location: ScalarSampler },
    /// A fixed base measure translated by a random shift.
    Translate { base: Measure, shift: ScalarSampler },
    /// Always the same measure.
    Fixed(Measure),
    /// One of finitely many measures, picked with the given probabilities.
    Choice { measures: Vec<Measure>, probs: Vec<f64> },
    Custom { draw: CustomDraw, description: String },
}

impl fmt::Debug for MeasureSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description())
    }
}

/// A drawn measure; borrows from the sampler where it can.
#[derive(Debug, Clone)]
pub enum Drawn<'a> {
    Dirac(f64),
    Shifted(&'a Measure, f64),
    Borrowed(&'a Measure),
    Owned(Measure),
}

impl QuantileCurve for Drawn<'_> {
    fn quantile(&self, p: f64) -> f64 {
        match self {
            Self::Dirac(x) => *x,
            Self::Shifted(m, t) => m.quantile(p) + t,
            Self::Borrowed(m) => m.quantile(p),
            Self::Owned(m) => m.quantile(p),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Dirac(_) => Vec::new(),
            Self::Shifted(m, _) | Self::Borrowed(m) => m.breakpoints(),
            Self::Owned(m) => m.breakpoints(),
        }
    }
}

impl Drawn<'_> {
    pub fn to_measure(&self) -> Measure {
        match self {
            Self::Dirac(x) => Measure::Discrete(DiscreteMeasure::dirac(*x).expect("finite draw")),
            Self::Shifted(m, t) => m.shifted(*t),
            Self::Borrowed(m) => (*m).clone(),
            Self::Owned(m) => m.clone(),
        }
    }

    /// Discrete form; analytic curves become `cells` equal-mass atoms.
    pub fn to_discrete(&self, cells: usize) -> Result<DiscreteMeasure> {
        match self.to_measure() {
            Measure::Discrete(d) => Ok(d),
            Measure::Analytic(c) => discretize(&c, cells),
        }
    }
}

impl MeasureSampler {
    pub fn draw<'a>(&'a self, rng: &mut SeededRng) -> Result<Drawn<'a>> {
        Ok(match self {
            Self::RandomDirac { location } => Drawn::Dirac(location.sample(rng)),
            Self::Translate { base, shift } => Drawn::Shifted(base, shift.sample(rng)),
            Self::Fixed(m) => Drawn::Borrowed(m),
            Self::Choice { measures, probs } => {
                let idx = WeightedIndex::new(probs)
                    .map_err(|e| Error::Sampler(e.to_string()))?
                    .sample(rng);
                Drawn::Borrowed(&measures[idx])
            }
            Self::Custom { draw, .. } => Drawn::Owned(draw(rng)?),
        })
    }

    pub fn description(&self) -> String {
        match self {
            Self::RandomDirac { location } => format!("random dirac at {location:?}"),
            Self::Translate { base, shift } => {
                format!("{} translated by {shift:?}", base.to_json())
            }
            Self::Fixed(m) => format!("fixed {}", m.to_json()),
            Self::Choice { measures, probs } => {
                format!("choice of {} measures with probabilities {probs:?}", measures.len())
            }
            Self::Custom { description, .. } => description.clone(),
        }
    }

    /// The population barycenter in closed form, when the family allows it.
    pub fn analytic_barycenter(&self, g: &CostFunction) -> Option<Measure> {
        match self {
            Self::Fixed(m) => Some(m.clone()),
            Self::RandomDirac { location } => location
                .frechet_target(g)
                .and_then(|x| DiscreteMeasure::dirac(x).ok())
                .map(Measure::Discrete),
            Self::Translate { base, shift } => shift.frechet_target(g).map(|x| base.shifted(x)),
            Self::Choice { measures, probs } => {
                let discrete: Option<Vec<DiscreteMeasure>> =
                    measures.iter().map(|m| m.as_discrete().cloned()).collect();
                let fam = crate::barycenter::WeightedFamily::new(discrete?, probs.clone()).ok()?;
                crate::barycenter::finite_barycenter(g, &fam).ok().map(Measure::Discrete)
            }
            Self::Custom { .. } => None,
        }
    }
}

/// Serializable description of a [`MeasureSampler`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MeasureSamplerSpec {
    RandomDirac { location: ScalarSampler },
    Translate { base: MeasureSpec, shift: ScalarSampler },
    Fixed { measure: MeasureSpec },
    Choice { measures: Vec<MeasureSpec>, probs: Vec<f64> },
}

impl MeasureSamplerSpec {
    pub fn resolve(&self) -> Result<MeasureSampler> {
        Ok(match self {
            Self::RandomDirac { location } => {
                location.validate()?;
                MeasureSampler::RandomDirac { location: location.clone() }
            }
            Self::Translate { base, shift } => {
                shift.validate()?;
                MeasureSampler::Translate {
                    base: base.resolve()?,
                    shift: shift.clone(),
                }
            }
            Self::Fixed { measure } => MeasureSampler::Fixed(measure.resolve()?),
            Self::Choice { measures, probs } => {
                if measures.is_empty() || measures.len() != probs.len() {
                    return Err(Error::InvalidParameter("choice needs one probability per measure".into()));
                }
                WeightedIndex::new(probs).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                MeasureSampler::Choice {
                    measures: measures.iter().map(MeasureSpec::resolve).collect::<Result<_>>()?,
                    probs: probs.clone(),
                }
            }
        })
    }
}
