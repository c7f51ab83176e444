//! Separate estimation of preparation and readout error rates.
//!
//! The target qubit's SPAM rates are measured directly. Its preparation
//! error is read off an ancilla: a CNOT from the target copies the
//! target's preparation flips onto the ancilla, shifting the ancilla's SPAM
//! rates linearly in `delta_sp`. Readout rates then follow from the target's
//! SPAM rates.

pub mod cooling;
pub mod plan;
pub mod run;
pub mod zne;

use serde::{Deserialize, Serialize};

use crate::counts::{CountsRecord, Observation};
use crate::error::{Error, Result};
use crate::types::{binomial_se, ErrorRates, Estimate, SpamRates, MAX_RATE};

pub use cooling::{cooling_forward, cooling_solve, CoolingObservables, CoolingRates, CoolingSolution};
pub use plan::{build_characterization_plan, CircuitRole, PlannedCircuit, Protocol};
pub use run::{
    run_characterization, CharacterizationReport, CountsDir, CountsSource, QubitCharacterization,
    SimulatedDevice, ZneDetail,
};
pub use zne::{zne_extrapolate, ZneFit, ZnePoint};

/// Ancilla observables for one (target, ancilla) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AncillaMeasurement {
    pub target_label: usize,
    pub ancilla_label: usize,
    /// SPAM rates of the target.
    pub spam_target: SpamRates,
    /// Ancilla SPAM rates without the target-controlled CNOT
    /// (or with the ancilla as control, in the noisy-CNOT protocol).
    pub spam_ancilla_plain: SpamRates,
    /// Ancilla SPAM rates after the CNOT from the target.
    pub spam_ancilla_cnot: SpamRates,
}

impl AncillaMeasurement {
    pub fn validate(&self) -> Result<()> {
        self.spam_target.validate()?;
        self.spam_ancilla_plain.validate()?;
        self.spam_ancilla_cnot.validate()
    }
}

/// SPAM rates of a single qubit from its prepare-0 and prepare-1 runs.
pub fn estimate_spam(counts_prep0: &CountsRecord, counts_prep1: &CountsRecord) -> Result<SpamRates> {
    for c in [counts_prep0, counts_prep1] {
        if c.n_qubits() != 1 {
            return Err(Error::invalid(format!(
                "SPAM estimation needs single-qubit counts, got {} qubits",
                c.n_qubits()
            )));
        }
    }
    spam_from_observations(
        &Observation::from_counts(counts_prep0)?,
        &Observation::from_counts(counts_prep1)?,
        0,
    )
}

/// SPAM rates of `qubit`: the fraction of '1' when prepared in 0 and of '0'
/// when prepared in 1.
pub fn spam_from_observations(prep0: &Observation, prep1: &Observation, qubit: usize) -> Result<SpamRates> {
    let (d0, se0) = prep0.fraction(qubit, 1);
    let (d1, se1) = prep1.fraction(qubit, 0);
    Ok(SpamRates::new(d0, d1)?.with_se(se0, se1))
}

fn clamp_rate(v: f64) -> (f64, bool) {
    if v < 0.0 {
        (0.0, true)
    } else if v > MAX_RATE {
        (MAX_RATE, true)
    } else {
        (v, false)
    }
}

/// Preparation-error estimate of the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpEstimate {
    pub value: f64,
    pub se: f64,
    /// True when the raw estimate fell outside `[0, 0.5)`.
    pub clamped: bool,
    /// Estimates from the prepare-0 and prepare-1 equations separately.
    pub per_equation: [Estimate; 2],
}

impl SpEstimate {
    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.value, self.se)
    }
}

/// Solves the ancilla equations
/// `t_b = (1 - a_0 - a_1) delta_sp + a_b` for `b = 0, 1`,
/// combining both by inverse-variance weighting.
pub fn solve_delta_sp(m: &AncillaMeasurement) -> Result<SpEstimate> {
    m.validate()?;
    let a = &m.spam_ancilla_plain;
    let t = &m.spam_ancilla_cnot;
    let d = 1.0 - a.delta0 - a.delta1;
    if d <= 1e-12 {
        return Err(Error::Singular(format!(
            "ancilla SPAM rates sum to {}",
            a.delta0 + a.delta1
        )));
    }
    let e = [(t.delta0 - a.delta0) / d, (t.delta1 - a.delta1) / d];
    // Gradients with respect to (t0, t1, a0, a1).
    let grads = [
        [1.0 / d, 0.0, (e[0] - 1.0) / d, e[0] / d],
        [0.0, 1.0 / d, e[1] / d, (e[1] - 1.0) / d],
    ];
    let se_in = [t.se0, t.se1, a.se0, a.se1];
    let var = |g: &[f64; 4]| -> f64 { g.iter().zip(&se_in).map(|(g, s)| (g * s).powi(2)).sum() };
    let vars = [var(&grads[0]), var(&grads[1])];
    let weights = if vars[0] > 0.0 && vars[1] > 0.0 {
        let w = [1.0 / vars[0], 1.0 / vars[1]];
        let s = w[0] + w[1];
        [w[0] / s, w[1] / s]
    } else {
        [0.5, 0.5]
    };
    let raw = weights[0] * e[0] + weights[1] * e[1];
    let combined: [f64; 4] = std::array::from_fn(|k| weights[0] * grads[0][k] + weights[1] * grads[1][k]);
    let se = var(&combined).sqrt();
    let (value, clamped) = clamp_rate(raw);
    if clamped {
        log::warn!(
            "delta_sp estimate {raw} for qubit {} clamped to {value}",
            m.target_label
        );
    }
    Ok(SpEstimate {
        value,
        se,
        clamped,
        per_equation: [
            Estimate::new(e[0], vars[0].sqrt()),
            Estimate::new(e[1], vars[1].sqrt()),
        ],
    })
}

/// Readout-error estimates of a qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutEstimate {
    pub m0: Estimate,
    pub m1: Estimate,
    pub clamped: bool,
}

/// Inverts `spam_b = delta_m^b + delta_sp (1 - delta_m^0 - delta_m^1)` for
/// the readout rates, given an estimate of `delta_sp`.
pub fn solve_delta_m(spam: &SpamRates, delta_sp: Estimate) -> Result<ReadoutEstimate> {
    spam.validate()?;
    let dsp = delta_sp.value;
    if !(0.0..0.5).contains(&dsp) {
        return Err(Error::invalid(format!("delta_sp must be in [0, 0.5), got {dsp}")));
    }
    let k = 1.0 - 2.0 * dsp;
    let (a, b) = (spam.delta0, spam.delta1);
    let s = (a + b - 2.0 * dsp) / k;
    let diff = a - b;
    let raw = [(s + diff) / 2.0, (s - diff) / 2.0];
    let dd = (a + b - 1.0) / (k * k);
    let same = (1.0 / k + 1.0) / 2.0;
    let other = (1.0 / k - 1.0) / 2.0;
    let se = |own_se: f64, other_se: f64| {
        ((same * own_se).powi(2) + (other * other_se).powi(2) + (dd * delta_sp.se).powi(2)).sqrt()
    };
    let (m0, c0) = clamp_rate(raw[0]);
    let (m1, c1) = clamp_rate(raw[1]);
    if c0 || c1 {
        log::warn!("readout estimates ({}, {}) clamped", raw[0], raw[1]);
    }
    Ok(ReadoutEstimate {
        m0: Estimate::new(m0, se(spam.se0, spam.se1)),
        m1: Estimate::new(m1, se(spam.se1, spam.se0)),
        clamped: c0 || c1,
    })
}

/// Full estimate for one target: preparation, readout and SPAM rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetEstimate {
    pub delta_sp: Estimate,
    pub delta_m0: Estimate,
    pub delta_m1: Estimate,
    pub spam: SpamRates,
    pub clamped: bool,
}

impl TargetEstimate {
    pub fn rates(&self) -> Result<ErrorRates> {
        let mut r = ErrorRates::new(self.delta_sp.value, self.delta_m0.value, self.delta_m1.value)?;
        r.se_sp = self.delta_sp.se;
        r.se_m0 = self.delta_m0.se;
        r.se_m1 = self.delta_m1.se;
        Ok(r)
    }
}

fn combine(sp: SpEstimate, spam: SpamRates) -> Result<TargetEstimate> {
    let m = solve_delta_m(&spam, sp.estimate())?;
    Ok(TargetEstimate {
        delta_sp: sp.estimate(),
        delta_m0: m.m0,
        delta_m1: m.m1,
        spam,
        clamped: sp.clamped || m.clamped,
    })
}

/// Noiseless-CNOT protocol: everything from one ancilla measurement.
pub fn characterize_plain(m: &AncillaMeasurement) -> Result<TargetEstimate> {
    combine(solve_delta_sp(m)?, m.spam_target)
}

/// Noisy-CNOT protocol. `m` carries the ancilla rates with the CNOT in both
/// directions, so the CNOT noise cancels under the symmetric-noise
/// assumption; readout rates come from `raw_target`, measured without any
/// CNOT.
pub fn characterize_noisy_cnot(m: &AncillaMeasurement, raw_target: &SpamRates) -> Result<TargetEstimate> {
    combine(solve_delta_sp(m)?, *raw_target)
}

/// Binomial SPAM rates from exact probabilities and a nominal shot count.
pub fn spam_with_shots(delta0: f64, delta1: f64, shots: u64) -> Result<SpamRates> {
    Ok(SpamRates::new(delta0, delta1)?.with_se(binomial_se(delta0, shots), binomial_se(delta1, shots)))
}
