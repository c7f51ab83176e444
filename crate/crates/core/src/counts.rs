//! Raw shot counts as exported by a device or produced by the sampler.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{binomial_se, display_label, parse_label, Distribution, MAX_QUBITS};

#[derive(Deserialize)]
struct RawCounts {
    n_qubits: usize,
    shots: u64,
    #[serde(default)]
    layout: Vec<String>,
    #[serde(default)]
    seed: Option<u64>,
    counts: BTreeMap<String, u64>,
}

/// Shot counts keyed by display-order bitstring (highest qubit leftmost).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCounts")]
pub struct CountsRecord {
    n_qubits: usize,
    shots: u64,
    layout: Vec<String>,
    seed: Option<u64>,
    counts: BTreeMap<String, u64>,
}

impl TryFrom<RawCounts> for CountsRecord {
    type Error = Error;
    fn try_from(raw: RawCounts) -> Result<Self> {
        let rec = CountsRecord {
            n_qubits: raw.n_qubits,
            shots: raw.shots,
            layout: raw.layout,
            seed: raw.seed,
            counts: raw.counts,
        };
        rec.validate()?;
        Ok(rec)
    }
}

impl CountsRecord {
    pub fn new(n_qubits: usize, counts: BTreeMap<String, u64>) -> Result<Self> {
        let shots = counts.values().sum();
        let rec = Self {
            n_qubits,
            shots,
            layout: Vec::new(),
            seed: None,
            counts,
        };
        rec.validate()?;
        Ok(rec)
    }

    /// Builds a record from a dense count vector indexed little-endian.
    /// Zero entries are omitted.
    pub fn from_dense(n_qubits: usize, dense: &[u64]) -> Result<Self> {
        if dense.len() != 1usize << n_qubits.min(MAX_QUBITS) {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits.min(MAX_QUBITS),
                got: dense.len(),
            });
        }
        let counts = dense
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(k, &c)| (display_label(k, n_qubits), c))
            .collect();
        Self::new(n_qubits, counts)
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_layout(mut self, layout: Vec<String>) -> Self {
        self.layout = layout;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!("bad n_qubits {}", self.n_qubits)));
        }
        for key in self.counts.keys() {
            if key.len() != self.n_qubits {
                return Err(Error::invalid(format!(
                    "bitstring {key:?} does not have {} characters",
                    self.n_qubits
                )));
            }
            parse_label(key)?;
        }
        let total: u64 = self.counts.values().sum();
        if total != self.shots {
            return Err(Error::invalid(format!(
                "counts sum to {total} but shots = {}",
                self.shots
            )));
        }
        if !self.layout.is_empty() && self.layout.len() != self.n_qubits {
            return Err(Error::invalid("layout length differs from n_qubits"));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn layout(&self) -> &[String] {
        &self.layout
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    /// Dense count vector indexed little-endian.
    pub fn dense(&self) -> Vec<u64> {
        let mut out = vec![0u64; 1 << self.n_qubits];
        for (k, &c) in &self.counts {
            out[parse_label(k).expect("validated")] += c;
        }
        out
    }

    /// Empirical distribution `counts[k] / shots`.
    pub fn to_distribution(&self) -> Result<Distribution> {
        if self.shots == 0 {
            return Err(Error::EmptyCounts);
        }
        let n = self.shots as f64;
        let probs = self.dense().into_iter().map(|c| c as f64 / n).collect();
        Distribution::new(self.n_qubits, probs)
    }

    /// Single-qubit counts of `qubit`.
    pub fn marginal(&self, qubit: usize) -> Result<CountsRecord> {
        if qubit >= self.n_qubits {
            return Err(Error::invalid(format!("qubit {qubit} out of range")));
        }
        let mut dense = [0u64; 2];
        for (k, c) in self.dense().into_iter().enumerate() {
            dense[(k >> qubit) & 1] += c;
        }
        let mut rec = Self::from_dense(1, &dense)?;
        rec.seed = self.seed;
        if let Some(label) = self.layout.get(qubit) {
            rec.layout = vec![label.clone()];
        }
        Ok(rec)
    }
}

/// Free function form of [`CountsRecord::to_distribution`].
pub fn to_distribution(c: &CountsRecord) -> Result<Distribution> {
    c.to_distribution()
}

/// An observed outcome distribution with the shot count behind it
/// (`None` for exact, noise-free probabilities).
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub dist: Distribution,
    pub shots: Option<u64>,
}

impl Observation {
    pub fn exact(dist: Distribution) -> Self {
        Self { dist, shots: None }
    }

    pub fn from_counts(c: &CountsRecord) -> Result<Self> {
        Ok(Self {
            dist: c.to_distribution()?,
            shots: Some(c.shots()),
        })
    }

    /// P(`qubit` reads `bit`) with its binomial standard error.
    pub fn fraction(&self, qubit: usize, bit: u8) -> (f64, f64) {
        let one = self.dist.prob_one(qubit);
        let p = if bit == 1 { one } else { 1.0 - one };
        let se = self.shots.map_or(0.0, |n| binomial_se(p, n));
        (p, se)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: usize, pairs: &[(&str, u64)]) -> CountsRecord {
        CountsRecord::new(n, pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()).unwrap()
    }

    #[test]
    fn to_distribution_examples() {
        let d = rec(2, &[("00", 1), ("11", 1)]).to_distribution().unwrap();
        assert_eq!(d.probs(), &[0.5, 0.0, 0.0, 0.5]);
        let d = rec(1, &[("0", 3)]).to_distribution().unwrap();
        assert_eq!(d.probs(), &[1.0, 0.0]);
        // "01": qubit 1 = 0, qubit 0 = 1 -> index 1
        let d = rec(2, &[("01", 1), ("10", 3)]).to_distribution().unwrap();
        assert_eq!(d.probs(), &[0.0, 0.25, 0.75, 0.0]);
    }

    #[test]
    fn empty_counts_rejected() {
        let r = CountsRecord::new(1, BTreeMap::new()).unwrap();
        assert_eq!(r.to_distribution(), Err(Error::EmptyCounts));
    }

    #[test]
    fn invalid_records() {
        let json = r#"{"n_qubits":2,"shots":3,"layout":[],"seed":null,"counts":{"00":1,"11":1}}"#;
        assert!(serde_json::from_str::<CountsRecord>(json).is_err());
        let json = r#"{"n_qubits":2,"shots":2,"counts":{"0":2}}"#;
        assert!(serde_json::from_str::<CountsRecord>(json).is_err());
        let json = r#"{"n_qubits":2,"shots":2,"layout":["q0","q1"],"seed":7,"counts":{"01":2}}"#;
        let r: CountsRecord = serde_json::from_str(json).unwrap();
        assert_eq!(r.seed(), Some(7));
        assert_eq!(r.marginal(0).unwrap().dense(), vec![0, 2]);
        assert_eq!(r.marginal(1).unwrap().layout(), &["q1".to_string()]);
    }
}
