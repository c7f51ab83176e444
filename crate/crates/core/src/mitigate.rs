//! Readout and state-preparation mitigation.
//!
//! Two pipelines are provided:
//!
//! * SRM inverts the lumped SPAM assignment matrix and projects onto the
//!   probability simplex.
//! * SPRM inverts the readout-only matrix on the raw distribution and on one
//!   extra distribution per qubit (same circuit with an initial X on that
//!   qubit), removes preparation error to first order by combining them,
//!   and projects at the very end.
//!
//! All linear steps keep signed quasi-probabilities; clipping happens once,
//! in the final projection.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assignment::AssignmentMatrix;
use crate::error::{Error, Result};
use crate::types::{Distribution, ErrorRates, QuasiDistribution};

/// Anything that is a length-`2^n` outcome vector.
pub trait OutcomeVector {
    fn n_qubits(&self) -> usize;
    fn as_slice(&self) -> &[f64];
}

impl OutcomeVector for Distribution {
    fn n_qubits(&self) -> usize {
        Distribution::n_qubits(self)
    }
    fn as_slice(&self) -> &[f64] {
        self.probs()
    }
}

impl OutcomeVector for QuasiDistribution {
    fn n_qubits(&self) -> usize {
        QuasiDistribution::n_qubits(self)
    }
    fn as_slice(&self) -> &[f64] {
        self.values()
    }
}

/// `A^{-1} p`, applied factor by factor.
pub fn apply_inverse<P: OutcomeVector>(a: &AssignmentMatrix, p: &P) -> Result<QuasiDistribution> {
    if a.n_qubits() != p.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: p.n_qubits(),
            got: a.n_qubits(),
        });
    }
    QuasiDistribution::new(p.n_qubits(), a.apply_inverse(p.as_slice())?)
}

/// Euclidean projection of `v` onto the probability simplex (sort and clip).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            threshold = t;
        }
    }
    v.iter().map(|&x| (x - threshold).max(0.0)).collect()
}

/// Nearest (2-norm) probability distribution to `q`.
pub fn nearest_distribution(q: &QuasiDistribution) -> Result<Distribution> {
    let sum: f64 = q.values().iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!(
            "quasi-distribution sums to {sum}, too far from 1"
        )));
    }
    let mut p = project_to_simplex(q.values());
    // absorb rounding so the result sums to 1 to machine precision
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Distribution::new(q.n_qubits(), p)
}

/// Inputs for first-order preparation mitigation: the raw distribution, one
/// distribution per qubit with an initial X on that qubit, and the rates.
#[derive(Debug, Clone, PartialEq)]
pub struct MitigationInputs {
    pub p_raw: Distribution,
    pub p_flipped: Vec<Distribution>,
    pub rates: Vec<ErrorRates>,
}

impl MitigationInputs {
    pub fn validate(&self) -> Result<()> {
        let n = self.rates.len();
        if self.p_flipped.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.p_flipped.len(),
            });
        }
        if let Some(p) = self
            .p_flipped
            .iter()
            .find(|p| p.n_qubits() != self.p_raw.n_qubits())
        {
            return Err(Error::DimensionMismatch {
                expected: self.p_raw.n_qubits(),
                got: p.n_qubits(),
            });
        }
        for r in &self.rates {
            r.validate()?;
        }
        Ok(())
    }

    fn deltas(&self) -> Vec<f64> {
        self.rates.iter().map(|r| r.delta_sp).collect()
    }
}

/// `P0 + sum_i d_i / (1 - 2 d_i) (P0 - P_i)` on signed vectors.
pub fn first_order_sp<P: OutcomeVector>(
    p0: &P,
    flipped: &[P],
    deltas: &[f64],
) -> Result<QuasiDistribution> {
    if flipped.len() != deltas.len() {
        return Err(Error::DimensionMismatch {
            expected: deltas.len(),
            got: flipped.len(),
        });
    }
    let base = p0.as_slice();
    let mut out = base.to_vec();
    for (pi, &d) in flipped.iter().zip(deltas) {
        if !(0.0..0.5).contains(&d) {
            return Err(Error::invalid(format!("delta_sp = {d} outside [0, 0.5)")));
        }
        if pi.n_qubits() != p0.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: p0.n_qubits(),
                got: pi.n_qubits(),
            });
        }
        let w = d / (1.0 - 2.0 * d);
        for ((o, b), x) in out.iter_mut().zip(base).zip(pi.as_slice()) {
            *o += w * (b - x);
        }
    }
    QuasiDistribution::new(p0.n_qubits(), out)
}

/// First-order preparation-error mitigation of the raw distribution.
pub fn mitigate_sp_first_order(inputs: &MitigationInputs) -> Result<QuasiDistribution> {
    inputs.validate()?;
    first_order_sp(&inputs.p_raw, &inputs.p_flipped, &inputs.deltas())
}

/// Exact preparation-error inversion from all `2^n` preparations.
///
/// `by_preparation` maps a preparation index `s'` (bit `j` set = X on qubit
/// `j` before the circuit) to its observed distribution. Returns
/// `sum_{s'} c_{s'} P^{s'}` with `c_{s'} = prod_j [A_SP^(j)^{-1}]_{0, s'_j}`.
pub fn mitigate_sp_exact(
    by_preparation: &BTreeMap<usize, Distribution>,
    deltas: &[f64],
) -> Result<QuasiDistribution> {
    let n = deltas.len();
    if n == 0 || n > crate::sim::MAX_EXACT_QUBITS {
        return Err(Error::invalid(format!("exact SP mitigation needs 1..=12 qubits, got {n}")));
    }
    for &d in deltas {
        if !(0.0..0.5).contains(&d) {
            return Err(Error::invalid(format!("delta_sp = {d} outside [0, 0.5)")));
        }
    }
    let first = by_preparation
        .get(&0)
        .ok_or_else(|| Error::Missing("preparation 0".into()))?;
    let mut out = vec![0.0; first.len()];
    for s in 0..1usize << n {
        let p = by_preparation
            .get(&s)
            .ok_or_else(|| Error::Missing(format!("preparation {s}")))?;
        if p.n_qubits() != first.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: first.n_qubits(),
                got: p.n_qubits(),
            });
        }
        let coeff: f64 = deltas
            .iter()
            .enumerate()
            .map(|(j, &d)| {
                if (s >> j) & 1 == 0 {
                    (1.0 - d) / (1.0 - 2.0 * d)
                } else {
                    -d / (1.0 - 2.0 * d)
                }
            })
            .product();
        for (o, x) in out.iter_mut().zip(p.probs()) {
            *o += coeff * x;
        }
    }
    QuasiDistribution::new(first.n_qubits(), out)
}

/// Output of a mitigation pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Mitigated {
    /// Signed result before projection.
    pub quasi: QuasiDistribution,
    /// Nearest probability distribution to `quasi`.
    pub dist: Distribution,
    /// l1 mass moved by the projection.
    pub negatives_clipped: f64,
}

impl Mitigated {
    fn project(quasi: QuasiDistribution) -> Result<Self> {
        let dist = nearest_distribution(&quasi)?;
        let negatives_clipped = quasi
            .values()
            .iter()
            .zip(dist.probs())
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(Self {
            quasi,
            dist,
            negatives_clipped,
        })
    }
}

/// Standard readout mitigation: `A_SPAM^{-1}` then projection.
pub fn srm_pipeline(p_raw: &Distribution, a_spam: &AssignmentMatrix) -> Result<Mitigated> {
    Mitigated::project(apply_inverse(a_spam, p_raw)?)
}

/// State-preparation and readout mitigation: `A_M^{-1}` on every input,
/// first-order SP correction, then projection.
pub fn sprm_pipeline(inputs: &MitigationInputs) -> Result<Mitigated> {
    inputs.validate()?;
    let a_m = AssignmentMatrix::from_readout(&inputs.rates)?;
    let raw = apply_inverse(&a_m, &inputs.p_raw)?;
    let flipped = inputs
        .p_flipped
        .iter()
        .map(|p| apply_inverse(&a_m, p))
        .collect::<Result<Vec<_>>>()?;
    Mitigated::project(first_order_sp(&raw, &flipped, &inputs.deltas())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Srm,
    Sprm,
}

/// Serialized result of one mitigation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationReport {
    pub raw: Distribution,
    pub mitigated: Distribution,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity_vs_ideal: Option<f64>,
    pub negatives_clipped: f64,
}

impl MitigationReport {
    pub fn new(raw: Distribution, result: &Mitigated, method: Method, ideal: Option<&Distribution>) -> Result<Self> {
        let fidelity_vs_ideal = ideal
            .map(|i| crate::analysis::fidelity(&result.dist, i))
            .transpose()?;
        Ok(Self {
            raw,
            mitigated: result.dist.clone(),
            method,
            fidelity_vs_ideal,
            negatives_clipped: result.negatives_clipped,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quasi(v: &[f64]) -> QuasiDistribution {
        let n = v.len().trailing_zeros() as usize;
        QuasiDistribution::new(n, v.to_vec()).unwrap()
    }

    #[test]
    fn projection_examples() {
        let p = nearest_distribution(&quasi(&[1.1, -0.1])).unwrap();
        assert_eq!(p.probs(), &[1.0, 0.0]);
        let p = project_to_simplex(&[0.7, 0.5, -0.2]);
        let want = [0.6, 0.4, 0.0];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let already = [0.1, 0.2, 0.3, 0.4];
        let p = nearest_distribution(&quasi(&already)).unwrap();
        for (a, b) in p.probs().iter().zip(already) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(nearest_distribution(&QuasiDistribution::with_tolerance(1, vec![0.5, 0.6], 1.0).unwrap()).is_err());
    }

    #[test]
    fn first_order_single_qubit_is_exact() {
        let rates = vec![ErrorRates::new(0.05, 0.0, 0.0).unwrap()];
        let inputs = MitigationInputs {
            p_raw: Distribution::new(1, vec![0.95, 0.05]).unwrap(),
            p_flipped: vec![Distribution::new(1, vec![0.05, 0.95]).unwrap()],
            rates,
        };
        let out = mitigate_sp_first_order(&inputs).unwrap();
        assert!((out.values()[0] - 1.0).abs() < 1e-15);
        assert!(out.values()[1].abs() < 1e-15);
    }

    #[test]
    fn first_order_zero_rates_is_identity() {
        let raw = Distribution::new(2, vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let inputs = MitigationInputs {
            p_raw: raw.clone(),
            p_flipped: vec![Distribution::basis(2, 1).unwrap(), Distribution::basis(2, 2).unwrap()],
            rates: vec![ErrorRates::noiseless(); 2],
        };
        assert_eq!(mitigate_sp_first_order(&inputs).unwrap().values(), raw.probs());
    }

    #[test]
    fn input_mismatch_errors() {
        let inputs = MitigationInputs {
            p_raw: Distribution::basis(2, 0).unwrap(),
            p_flipped: vec![Distribution::basis(2, 1).unwrap()],
            rates: vec![ErrorRates::noiseless(); 2],
        };
        assert!(mitigate_sp_first_order(&inputs).is_err());
        let mut by_prep = BTreeMap::new();
        by_prep.insert(0, Distribution::basis(1, 0).unwrap());
        assert!(matches!(mitigate_sp_exact(&by_prep, &[0.1]), Err(Error::Missing(_))));
        by_prep.insert(1, Distribution::basis(1, 1).unwrap());
        assert!(mitigate_sp_exact(&by_prep, &[0.5]).is_err());
        assert_eq!(mitigate_sp_exact(&by_prep, &[0.0]).unwrap().values(), &[1.0, 0.0]);
    }

    #[test]
    fn srm_identity_leaves_input() {
        let raw = Distribution::new(1, vec![0.3, 0.7]).unwrap();
        let out = srm_pipeline(&raw, &AssignmentMatrix::identity(1)).unwrap();
        assert_eq!(out.dist, raw);
        assert_eq!(out.negatives_clipped, 0.0);
    }
}
