//! Circuits and the stochastic noise model applied to them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::ErrorRates;

/// Gate set understood by the simulator. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Gate {
    X { q: usize },
    Z { q: usize },
    Ry { q: usize, theta: f64 },
    /// Only needed for Y-basis tomography rotations.
    Rx { q: usize, theta: f64 },
    Cnot { control: usize, target: usize },
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X { q } | Gate::Z { q } | Gate::Ry { q, .. } | Gate::Rx { q, .. } => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }
}

#[derive(Deserialize)]
struct RawCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    #[serde(default)]
    measured_qubits: Option<Vec<usize>>,
}

/// An ordered gate list on `n_qubits` qubits, all starting in `|0>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit")]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    /// Output qubit `k` of the distribution is `measured_qubits[k]`; all
    /// qubits in order when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    measured_qubits: Option<Vec<usize>>,
}

impl TryFrom<RawCircuit> for Circuit {
    type Error = Error;
    fn try_from(raw: RawCircuit) -> Result<Self> {
        let mut c = Circuit::new(raw.n_qubits)?;
        for g in raw.gates {
            c.push(g)?;
        }
        if let Some(m) = raw.measured_qubits {
            c = c.measure(m)?;
        }
        Ok(c)
    }
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > crate::types::MAX_QUBITS {
            return Err(Error::invalid(format!("bad register size {n_qubits}")));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
            measured_qubits: None,
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let qs = gate.qubits();
        if let Some(&q) = qs.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::invalid(format!(
                "qubit {q} out of range for {} qubits",
                self.n_qubits
            )));
        }
        if let Gate::Cnot { control, target } = gate {
            if control == target {
                return Err(Error::invalid("CNOT control equals target"));
            }
        }
        if let Gate::Ry { theta, .. } | Gate::Rx { theta, .. } = gate {
            if !theta.is_finite() {
                return Err(Error::invalid("non-finite rotation angle"));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn with(mut self, gate: Gate) -> Result<Self> {
        self.push(gate)?;
        Ok(self)
    }

    pub fn measure(mut self, qubits: Vec<usize>) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::invalid("no measured qubits"));
        }
        let mut seen = vec![false; self.n_qubits];
        for &q in &qubits {
            if q >= self.n_qubits || seen[q] {
                return Err(Error::invalid(format!("bad measured qubit {q}")));
            }
            seen[q] = true;
        }
        self.measured_qubits = Some(qubits);
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn measured_qubits(&self) -> Vec<usize> {
        self.measured_qubits
            .clone()
            .unwrap_or_else(|| (0..self.n_qubits).collect())
    }

    /// Same circuit with an X gate prepended on each listed qubit.
    pub fn with_initial_x(&self, qubits: &[usize]) -> Result<Self> {
        let mut out = Circuit {
            n_qubits: self.n_qubits,
            gates: Vec::with_capacity(self.gates.len() + qubits.len()),
            measured_qubits: self.measured_qubits.clone(),
        };
        for &q in qubits {
            out.push(Gate::X { q })?;
        }
        out.gates.extend_from_slice(&self.gates);
        Ok(out)
    }
}

/// Pauli labels in channel index order.
pub const PAULI_LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// Two-qubit Pauli channel `rho -> sum_a p_a P_a rho P_a`.
///
/// Index `4 * c + t` holds the probability of Pauli `c` on the CNOT control
/// and `t` on the target, with I, X, Y, Z = 0, 1, 2, 3. In JSON the channel is
/// a map from two-letter labels (control first) to probabilities; missing
/// labels are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, f64>", into = "BTreeMap<String, f64>")]
pub struct PauliChannel {
    probs: [f64; 16],
}

impl TryFrom<BTreeMap<String, f64>> for PauliChannel {
    type Error = Error;
    fn try_from(map: BTreeMap<String, f64>) -> Result<Self> {
        let mut probs = [0.0; 16];
        for (label, p) in map {
            let idx: Vec<usize> = label
                .chars()
                .map(|c| PAULI_LABELS.iter().position(|&l| l == c))
                .collect::<Option<_>>()
                .filter(|v: &Vec<usize>| v.len() == 2)
                .ok_or_else(|| Error::invalid(format!("bad Pauli label {label:?}")))?;
            probs[4 * idx[0] + idx[1]] = p;
        }
        PauliChannel::new(probs)
    }
}

impl From<PauliChannel> for BTreeMap<String, f64> {
    fn from(ch: PauliChannel) -> Self {
        ch.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != 0.0)
            .map(|(a, &p)| {
                let label: String = [PAULI_LABELS[a / 4], PAULI_LABELS[a % 4]].iter().collect();
                (label, p)
            })
            .collect()
    }
}

impl PauliChannel {
    pub fn new(probs: [f64; 16]) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("Pauli probabilities must be non-negative"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("Pauli probabilities sum to {sum}")));
        }
        Ok(Self { probs })
    }

    pub fn identity() -> Self {
        let mut probs = [0.0; 16];
        probs[0] = 1.0;
        Self { probs }
    }

    /// `p_II = 1 - total_error`, the rest spread evenly over the other 15.
    pub fn uniform(total_error: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&total_error) {
            return Err(Error::invalid("total error outside [0, 1]"));
        }
        let mut probs = [total_error / 15.0; 16];
        probs[0] = 1.0 - total_error;
        Self::new(probs)
    }

    /// Product of single-qubit Pauli channels, each given as (pI, pX, pY, pZ).
    pub fn product(control: [f64; 4], target: [f64; 4]) -> Result<Self> {
        let mut probs = [0.0; 16];
        for c in 0..4 {
            for t in 0..4 {
                probs[4 * c + t] = control[c] * target[t];
            }
        }
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64; 16] {
        &self.probs
    }

    pub fn is_identity(&self) -> bool {
        self.probs[0] == 1.0
    }

    /// Channel seen when control and target are exchanged.
    pub fn swapped(&self) -> Self {
        let mut probs = [0.0; 16];
        for c in 0..4 {
            for t in 0..4 {
                probs[4 * t + c] = self.probs[4 * c + t];
            }
        }
        Self { probs }
    }

    /// Probability of a bit flip (X or Y) on the control qubit.
    pub fn control_flip_prob(&self) -> f64 {
        (0..16)
            .filter(|a| matches!(a / 4, 1 | 2))
            .map(|a| self.probs[a])
            .sum()
    }

    /// Probability of a bit flip (X or Y) on the target qubit.
    pub fn target_flip_prob(&self) -> f64 {
        (0..16)
            .filter(|a| matches!(a % 4, 1 | 2))
            .map(|a| self.probs[a])
            .sum()
    }
}

/// Noise attached to CNOTs with a given control and target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnotNoise {
    pub control: usize,
    pub target: usize,
    pub channel: PauliChannel,
}

fn default_true() -> bool {
    true
}

/// Stochastic noise for a register: preparation and readout flips per qubit,
/// Pauli channels after CNOTs, and Z-twirling toggles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub per_qubit: Vec<ErrorRates>,
    #[serde(default)]
    pub cnot_channels: Vec<CnotNoise>,
    /// Channel for CNOTs without an explicit entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_cnot: Option<PauliChannel>,
    /// Random Z on every qubit right after preparation.
    #[serde(default = "default_true")]
    pub twirl_z: bool,
    /// Random Z on every qubit right before readout.
    #[serde(default)]
    pub twirl_measure: bool,
    /// Qubits whose preparation error is coherent,
    /// `sqrt(1-d)|0> + sqrt(d) e^{i phase}|1>`, keyed by qubit with the phase.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub coherent_sp: BTreeMap<usize, f64>,
}

impl NoiseModel {
    pub fn noiseless(n_qubits: usize) -> Self {
        Self::uniform(n_qubits, ErrorRates::noiseless())
    }

    pub fn uniform(n_qubits: usize, rates: ErrorRates) -> Self {
        Self::from_rates(vec![rates; n_qubits])
    }

    pub fn from_rates(per_qubit: Vec<ErrorRates>) -> Self {
        Self {
            per_qubit,
            cnot_channels: Vec::new(),
            default_cnot: None,
            twirl_z: true,
            twirl_measure: false,
            coherent_sp: BTreeMap::new(),
        }
    }

    pub fn with_default_cnot(mut self, channel: PauliChannel) -> Self {
        self.default_cnot = Some(channel);
        self
    }

    pub fn with_cnot(mut self, control: usize, target: usize, channel: PauliChannel) -> Self {
        self.cnot_channels.retain(|c| !(c.control == control && c.target == target));
        self.cnot_channels.push(CnotNoise {
            control,
            target,
            channel,
        });
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.per_qubit.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.per_qubit.is_empty() {
            return Err(Error::invalid("noise model has no qubits"));
        }
        for r in &self.per_qubit {
            r.validate()?;
        }
        let n = self.n_qubits();
        for c in &self.cnot_channels {
            if c.control >= n || c.target >= n || c.control == c.target {
                return Err(Error::invalid(format!(
                    "bad CNOT channel pair ({}, {})",
                    c.control, c.target
                )));
            }
            PauliChannel::new(c.channel.probs)?;
        }
        if let Some(ch) = &self.default_cnot {
            PauliChannel::new(ch.probs)?;
        }
        if let Some((&q, _)) = self.coherent_sp.iter().find(|(&q, _)| q >= n) {
            return Err(Error::invalid(format!("coherent_sp qubit {q} out of range")));
        }
        Ok(())
    }

    pub fn channel_for(&self, control: usize, target: usize) -> Option<&PauliChannel> {
        self.cnot_channels
            .iter()
            .find(|c| c.control == control && c.target == target)
            .map(|c| &c.channel)
            .or(self.default_cnot.as_ref())
    }

    /// Noise model of the sub-register `qubits`; local qubit `k` is
    /// `qubits[k]`.
    pub fn restrict(&self, qubits: &[usize]) -> Result<NoiseModel> {
        let n = self.n_qubits();
        if qubits.iter().any(|&q| q >= n) {
            return Err(Error::invalid("restricted qubit out of range"));
        }
        let local = |q: usize| qubits.iter().position(|&x| x == q);
        let cnot_channels = self
            .cnot_channels
            .iter()
            .filter_map(|c| {
                Some(CnotNoise {
                    control: local(c.control)?,
                    target: local(c.target)?,
                    channel: c.channel,
                })
            })
            .collect();
        let coherent_sp = self
            .coherent_sp
            .iter()
            .filter_map(|(&q, &phi)| Some((local(q)?, phi)))
            .collect();
        Ok(NoiseModel {
            per_qubit: qubits.iter().map(|&q| self.per_qubit[q]).collect(),
            cnot_channels,
            default_cnot: self.default_cnot,
            twirl_z: self.twirl_z,
            twirl_measure: self.twirl_measure,
            coherent_sp,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circuit_validation() {
        let mut c = Circuit::new(2).unwrap();
        assert!(c.push(Gate::X { q: 2 }).is_err());
        assert!(c.push(Gate::Cnot { control: 1, target: 1 }).is_err());
        assert!(c.push(Gate::Cnot { control: 1, target: 0 }).is_ok());
        assert!(c.clone().measure(vec![0, 0]).is_err());
        assert_eq!(c.measured_qubits(), vec![0, 1]);
    }

    #[test]
    fn circuit_json() {
        let json = r#"{"n_qubits":2,"gates":[{"kind":"ry","q":0,"theta":0.5},{"kind":"cnot","control":0,"target":1},{"kind":"x","q":1}]}"#;
        let c: Circuit = serde_json::from_str(json).unwrap();
        assert_eq!(c.gates().len(), 3);
        assert_eq!(serde_json::to_string(&c).unwrap(), json);
        let bad = r#"{"n_qubits":1,"gates":[{"kind":"cnot","control":0,"target":1}]}"#;
        assert!(serde_json::from_str::<Circuit>(bad).is_err());
    }

    #[test]
    fn pauli_channel_json_and_flips() {
        let ch = PauliChannel::uniform(0.03).unwrap();
        assert!((ch.control_flip_prob() - 0.016).abs() < 1e-15);
        assert!((ch.target_flip_prob() - 0.016).abs() < 1e-15);
        let json = serde_json::to_string(&ch).unwrap();
        let back: PauliChannel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ch);
        let asym: PauliChannel = serde_json::from_str(r#"{"II":0.9,"XI":0.1}"#).unwrap();
        assert!((asym.control_flip_prob() - 0.1).abs() < 1e-15);
        assert_eq!(asym.target_flip_prob(), 0.0);
        assert!((asym.swapped().target_flip_prob() - 0.1).abs() < 1e-15);
        assert!(serde_json::from_str::<PauliChannel>(r#"{"II":0.5}"#).is_err());
        assert!(serde_json::from_str::<PauliChannel>(r#"{"IW":1.0}"#).is_err());
    }

    #[test]
    fn restrict_maps_indices() {
        let noise = NoiseModel::from_rates(vec![
            ErrorRates::new(0.01, 0.0, 0.0).unwrap(),
            ErrorRates::new(0.02, 0.0, 0.0).unwrap(),
            ErrorRates::new(0.03, 0.0, 0.0).unwrap(),
        ])
        .with_cnot(2, 0, PauliChannel::uniform(0.1).unwrap());
        let local = noise.restrict(&[2, 0]).unwrap();
        assert_eq!(local.per_qubit[0].delta_sp, 0.03);
        assert!(local.channel_for(0, 1).is_some());
        assert!(local.channel_for(1, 0).is_none());
    }
}
