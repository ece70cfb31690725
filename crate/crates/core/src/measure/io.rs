use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{from_samples, AnalyticCurve, DiscreteMeasure, QuantileCurve};
use crate::error::{Error, Result};

/// On-disk JSON form of a measure.
///
/// ```json
/// {"type":"discrete","atoms":[0,1],"weights":[0.5,0.5]}
/// {"type":"samples","values":[0.3,1.2,0.7]}
/// {"type":"uniform","a":0,"b":1}
/// {"type":"gaussian","mean":0,"std":1}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MeasureSpec {
    Discrete { atoms: Vec<f64>, weights: Vec<f64> },
    Samples { values: Vec<f64> },
    Uniform { a: f64, b: f64 },
    Gaussian { mean: f64, std: f64 },
    Exponential {
        rate: f64,
        #[serde(default)]
        loc: f64,
    },
}

/// A resolved measure: either a step function or a closed-form family.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Discrete(DiscreteMeasure),
    Analytic(AnalyticCurve),
}

impl MeasureSpec {
    pub fn resolve(&self) -> Result<Measure> {
        Ok(match self {
            Self::Discrete { atoms, weights } => {
                Measure::Discrete(DiscreteMeasure::new(atoms.clone(), weights.clone())?)
            }
            Self::Samples { values } => Measure::Discrete(from_samples(values)?),
            Self::Uniform { a, b } => Measure::Analytic(AnalyticCurve::uniform(*a, *b)?),
            Self::Gaussian { mean, std } => Measure::Analytic(AnalyticCurve::gaussian(*mean, *std)?),
            Self::Exponential { rate, loc } => {
                Measure::Analytic(AnalyticCurve::exponential(*rate, *loc)?)
            }
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl From<&DiscreteMeasure> for MeasureSpec {
    fn from(m: &DiscreteMeasure) -> Self {
        Self::Discrete {
            atoms: m.atoms().to_vec(),
            weights: m.weights().to_vec(),
        }
    }
}

impl From<AnalyticCurve> for MeasureSpec {
    fn from(c: AnalyticCurve) -> Self {
        match c {
            AnalyticCurve::Uniform { a, b } => Self::Uniform { a, b },
            AnalyticCurve::Gaussian { mean, std } => Self::Gaussian { mean, std },
            AnalyticCurve::Exponential { rate, loc } => Self::Exponential { rate, loc },
        }
    }
}

impl Measure {
    pub fn to_spec(&self) -> MeasureSpec {
        match self {
            Self::Discrete(m) => m.into(),
            Self::Analytic(c) => (*c).into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("measure specs always serialize")
    }

    pub fn shifted(&self, t: f64) -> Self {
        match self {
            Self::Discrete(m) => Self::Discrete(m.shifted(t)),
            Self::Analytic(c) => Self::Analytic(c.shifted(t)),
        }
    }
}

impl QuantileCurve for Measure {
    fn quantile(&self, p: f64) -> f64 {
        match self {
            Self::Discrete(m) => m.quantile(p),
            Self::Analytic(c) => c.quantile(p),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Discrete(m) => m.breakpoints(),
            Self::Analytic(c) => c.breakpoints(),
        }
    }

    fn as_discrete(&self) -> Option<&DiscreteMeasure> {
        match self {
            Self::Discrete(m) => Some(m),
            Self::Analytic(_) => None,
        }
    }
}

/// Parses one real per line. Blank lines and lines starting with `#` are
/// skipped.
pub fn parse_samples_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let x: f64 = line
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: `{line}` is not a number", lineno + 1)))?;
        if !x.is_finite() {
            return Err(Error::Parse(format!("line {}: non-finite value", lineno + 1)));
        }
        out.push(x);
    }
    Ok(out)
}

/// Loads a measure from a `.json` spec or, for any other extension, a
/// one-sample-per-line CSV.
pub fn read_measure_file(path: &Path) -> Result<Measure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        MeasureSpec::from_json(&text)?.resolve()
    } else {
        Ok(Measure::Discrete(from_samples(&parse_samples_csv(&text)?)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_json_variant() {
        let d = MeasureSpec::from_json(r#"{"type":"discrete","atoms":[1,0],"weights":[0.25,0.75]}"#)
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(
            d,
            Measure::Discrete(DiscreteMeasure::new(vec![0.0, 1.0], vec![0.75, 0.25]).unwrap())
        );
        let s = MeasureSpec::from_json(r#"{"type":"samples","values":[2,2,5]}"#).unwrap();
        assert!(matches!(s.resolve().unwrap(), Measure::Discrete(m) if m.len() == 2));
        let u = MeasureSpec::from_json(r#"{"type":"uniform","a":0,"b":1}"#).unwrap();
        assert_eq!(u.resolve().unwrap().quantile(0.25), 0.25);
        let g = MeasureSpec::from_json(r#"{"type":"gaussian","mean":1,"std":2}"#).unwrap();
        assert!((g.resolve().unwrap().quantile(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_json() {
        assert!(MeasureSpec::from_json(r#"{"type":"cauchy"}"#).is_err());
        assert!(MeasureSpec::from_json(r#"{"type":"uniform","a":1,"b":0}"#)
            .unwrap()
            .resolve()
            .is_err());
        assert!(MeasureSpec::from_json(r#"{"type":"samples","values":[]}"#)
            .unwrap()
            .resolve()
            .is_err());
    }

    #[test]
    fn csv_skips_comments() {
        let xs = parse_samples_csv("# header\n1.5\n\n  -2\n# trailing\n3e-1\n").unwrap();
        assert_eq!(xs, vec![1.5, -2.0, 0.3]);
        assert!(parse_samples_csv("1\nabc\n").is_err());
    }

    #[test]
    fn emitted_json_reparses_to_equal_measure() {
        let m = DiscreteMeasure::new(vec![0.1, 1.0 / 3.0, 2.0], vec![0.2, 0.7, 0.1]).unwrap();
        let text = Measure::Discrete(m.clone()).to_json();
        let back = MeasureSpec::from_json(&text).unwrap().resolve().unwrap();
        assert!(back.as_discrete().unwrap().approx_eq(&m, 1e-12));
    }
}
