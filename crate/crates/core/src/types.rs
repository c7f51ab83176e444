//! Shared value types: outcome distributions and per-qubit error rates.
//!
//! Outcome vectors are indexed little-endian: bit `i` of an index is the
//! outcome of qubit `i`. Bitstring labels are only produced at display time,
//! with the highest-numbered qubit leftmost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register accepted for dense outcome vectors.
pub const MAX_QUBITS: usize = 20;

/// Tolerance on the total mass of a probability distribution.
pub const DIST_SUM_TOL: f64 = 1e-10;

/// Tolerance on the total mass of a quasi-probability distribution.
pub const QUASI_SUM_TOL: f64 = 1e-9;

/// Upper bound used when clamping rates into `[0, 0.5)`.
pub const MAX_RATE: f64 = 0.5 - 1e-9;

#[derive(Deserialize)]
struct RawVector {
    n_qubits: usize,
    values: Vec<f64>,
}

fn check_len(n_qubits: usize, len: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::invalid(format!(
            "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    if len != 1 << n_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << n_qubits,
            got: len,
        });
    }
    Ok(())
}

/// A normalized, non-negative outcome distribution over `2^n` outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVector")]
pub struct Distribution {
    n_qubits: usize,
    #[serde(rename = "values")]
    probs: Vec<f64>,
}

impl TryFrom<RawVector> for Distribution {
    type Error = Error;
    fn try_from(raw: RawVector) -> Result<Self> {
        Distribution::new(raw.n_qubits, raw.values)
    }
}

impl Distribution {
    /// Validates entries in `[0, 1]` and total mass 1. Entries that are
    /// negative only by rounding (> -1e-12) are set to zero.
    pub fn new(n_qubits: usize, mut probs: Vec<f64>) -> Result<Self> {
        check_len(n_qubits, probs.len())?;
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -1e-12 || *p > 1.0 + 1e-12 {
                return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
            }
            *p = p.clamp(0.0, 1.0);
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > DIST_SUM_TOL {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { n_qubits, probs })
    }

    /// Point mass on a single outcome.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut probs = vec![0.0; 1usize.checked_shl(n_qubits as u32).unwrap_or(0)];
        if index >= probs.len() {
            return Err(Error::invalid(format!(
                "index {index} out of range for {n_qubits} qubits"
            )));
        }
        probs[index] = 1.0;
        Self::new(n_qubits, probs)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability that `qubit` reads `1`.
    pub fn prob_one(&self, qubit: usize) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(k, _)| (k >> qubit) & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }

    /// Marginal over the listed qubits; output qubit `k` is `qubits[k]`.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Distribution> {
        if qubits.is_empty() || qubits.iter().any(|&q| q >= self.n_qubits) {
            return Err(Error::invalid("marginal qubits out of range"));
        }
        let mut out = vec![0.0; 1 << qubits.len()];
        for (k, &p) in self.probs.iter().enumerate() {
            let mut idx = 0;
            for (pos, &q) in qubits.iter().enumerate() {
                idx |= ((k >> q) & 1) << pos;
            }
            out[idx] += p;
        }
        Distribution::new(qubits.len(), out)
    }

    pub fn to_quasi(&self) -> QuasiDistribution {
        QuasiDistribution {
            n_qubits: self.n_qubits,
            values: self.probs.clone(),
        }
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

/// A signed outcome vector whose entries sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVector")]
pub struct QuasiDistribution {
    n_qubits: usize,
    values: Vec<f64>,
}

impl TryFrom<RawVector> for QuasiDistribution {
    type Error = Error;
    fn try_from(raw: RawVector) -> Result<Self> {
        QuasiDistribution::new(raw.n_qubits, raw.values)
    }
}

impl QuasiDistribution {
    pub fn new(n_qubits: usize, values: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(n_qubits, values, QUASI_SUM_TOL)
    }

    pub(crate) fn with_tolerance(n_qubits: usize, values: Vec<f64>, tol: f64) -> Result<Self> {
        check_len(n_qubits, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite quasi-probability"));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::invalid(format!(
                "quasi-probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self { n_qubits, values })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total negative mass.
    pub fn negativity(&self) -> f64 {
        self.values.iter().filter(|v| **v < 0.0).map(|v| -v).sum()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl From<Distribution> for QuasiDistribution {
    fn from(d: Distribution) -> Self {
        QuasiDistribution {
            n_qubits: d.n_qubits,
            values: d.probs,
        }
    }
}

/// A value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn new(value: f64, se: f64) -> Self {
        Self { value, se }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, se: 0.0 }
    }

    /// Distance to `other` in units of the combined standard error.
    /// Infinite when the errors are zero and the values differ.
    pub fn z_score(&self, other: &Estimate) -> f64 {
        let se = self.se.hypot(other.se);
        let diff = (self.value - other.value).abs();
        if se == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / se
        }
    }
}

/// Per-qubit state-preparation and readout flip rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ErrorRates {
    pub delta_sp: f64,
    pub delta_m0: f64,
    pub delta_m1: f64,
    #[serde(default)]
    pub se_sp: f64,
    #[serde(default)]
    pub se_m0: f64,
    #[serde(default)]
    pub se_m1: f64,
}

fn check_rate(name: &str, v: f64, upper: f64) -> Result<()> {
    if !(v.is_finite() && (0.0..upper).contains(&v)) {
        return Err(Error::invalid(format!("{name} = {v} outside [0, {upper})")));
    }
    Ok(())
}

impl ErrorRates {
    pub fn new(delta_sp: f64, delta_m0: f64, delta_m1: f64) -> Result<Self> {
        let r = Self {
            delta_sp,
            delta_m0,
            delta_m1,
            ..Default::default()
        };
        r.validate()?;
        Ok(r)
    }

    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("delta_sp", self.delta_sp, 0.5)?;
        check_rate("delta_m0", self.delta_m0, 0.5)?;
        check_rate("delta_m1", self.delta_m1, 0.5)?;
        for se in [self.se_sp, self.se_m0, self.se_m1] {
            if !(se.is_finite() && se >= 0.0) {
                return Err(Error::invalid("standard errors must be non-negative"));
            }
        }
        Ok(())
    }

    /// Combined SPAM rates implied by these rates:
    /// `delta_spam^b = delta_m^b + delta_sp (1 - delta_m^0 - delta_m^1)`.
    pub fn spam(&self) -> SpamRates {
        let visibility = 1.0 - self.delta_m0 - self.delta_m1;
        SpamRates {
            delta0: self.delta_m0 + self.delta_sp * visibility,
            delta1: self.delta_m1 + self.delta_sp * visibility,
            se0: 0.0,
            se1: 0.0,
        }
    }
}

/// Measured SPAM flip rates: `delta0` = P(read 1 | prepared 0),
/// `delta1` = P(read 0 | prepared 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SpamRates {
    pub delta0: f64,
    pub delta1: f64,
    #[serde(default)]
    pub se0: f64,
    #[serde(default)]
    pub se1: f64,
}

impl SpamRates {
    pub fn new(delta0: f64, delta1: f64) -> Result<Self> {
        let r = Self {
            delta0,
            delta1,
            se0: 0.0,
            se1: 0.0,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn with_se(mut self, se0: f64, se1: f64) -> Self {
        self.se0 = se0;
        self.se1 = se1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("delta_spam0", self.delta0, 1.0)?;
        check_rate("delta_spam1", self.delta1, 1.0)?;
        Ok(())
    }

    pub fn zero(&self) -> Estimate {
        Estimate::new(self.delta0, self.se0)
    }

    pub fn one(&self) -> Estimate {
        Estimate::new(self.delta1, self.se1)
    }
}

/// Binomial standard error `sqrt(p (1 - p) / n)` of a fraction estimated from
/// `n` shots.
pub fn binomial_se(p: f64, shots: u64) -> f64 {
    if shots == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / shots as f64).max(0.0).sqrt()
}

/// Bitstring label of an outcome index, highest-numbered qubit leftmost.
pub fn display_label(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`display_label`].
pub fn parse_label(label: &str) -> Result<usize> {
    if label.is_empty() || label.len() > MAX_QUBITS || !label.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::invalid(format!("bad bitstring {label:?}")));
    }
    Ok(usize::from_str_radix(label, 2).expect("validated binary string"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(display_label(1, 2), "01");
        assert_eq!(display_label(2, 2), "10");
        assert_eq!(display_label(5, 4), "0101");
        for k in 0..16 {
            assert_eq!(parse_label(&display_label(k, 4)).unwrap(), k);
        }
        assert!(parse_label("012").is_err());
        assert!(parse_label("").is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(1, vec![0.5, 0.5]).is_ok());
        assert!(Distribution::new(1, vec![0.6, 0.5]).is_err());
        assert!(Distribution::new(1, vec![1.1, -0.1]).is_err());
        assert!(Distribution::new(2, vec![0.5, 0.5]).is_err());
        assert!(Distribution::new(0, vec![1.0]).is_err());
    }

    #[test]
    fn marginal_and_prob_one() {
        // q0 = 1 with prob 0.3, q1 = 1 with prob 0.6, independent
        let p = Distribution::new(2, vec![0.28, 0.12, 0.42, 0.18]).unwrap();
        assert!((p.prob_one(0) - 0.3).abs() < 1e-15);
        assert!((p.prob_one(1) - 0.6).abs() < 1e-15);
        let m = p.marginal(&[1]).unwrap();
        assert!((m.probs()[1] - 0.6).abs() < 1e-15);
        let swapped = p.marginal(&[1, 0]).unwrap();
        assert_eq!(swapped.probs()[1], 0.42);
        assert_eq!(swapped.probs()[2], 0.12);
    }

    #[test]
    fn spam_forward_formula() {
        let r = ErrorRates::new(0.05, 0.04, 0.06).unwrap();
        let s = r.spam();
        assert!((s.delta0 - 0.085).abs() < 1e-15);
        assert!((s.delta1 - 0.105).abs() < 1e-15);
        assert!(ErrorRates::new(0.5, 0.0, 0.0).is_err());
        assert!(ErrorRates::new(0.0, -0.1, 0.0).is_err());
    }

    #[test]
    fn json_shape() {
        let p = Distribution::new(1, vec![0.25, 0.75]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"n_qubits":1,"values":[0.25,0.75]}"#);
        let back: Distribution = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Distribution>(r#"{"n_qubits":1,"values":[0.5,0.6]}"#).is_err());
        let q: QuasiDistribution =
            serde_json::from_str(r#"{"n_qubits":1,"values":[1.1,-0.1]}"#).unwrap();
        assert!((q.negativity() - 0.1).abs() < 1e-15);
    }
}
