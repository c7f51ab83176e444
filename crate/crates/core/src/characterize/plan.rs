//! Circuits needed to characterize a set of (target, ancilla) pairs.
//!
//! Every planned circuit acts on a two-qubit register with the target as
//! local qubit 0 and the ancilla as local qubit 1.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Local index of the target qubit in planned circuits.
pub const TARGET: usize = 0;
/// Local index of the ancilla qubit in planned circuits.
pub const ANCILLA: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Protocol {
    /// CNOT assumed noiseless.
    Plain,
    /// CNOT in both directions so that symmetric CNOT noise cancels.
    NoisyCnot,
    /// CNOTs repeated `folds` times and extrapolated to zero noise.
    Zne { folds: Vec<u32> },
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Plain => "plain",
            Protocol::NoisyCnot => "noisy-cnot",
            Protocol::Zne { .. } => "zne",
        }
    }

    pub fn zne_default() -> Self {
        Protocol::Zne { folds: vec![1, 3, 5] }
    }

    fn folds(&self) -> Vec<u32> {
        match self {
            Protocol::Zne { folds } => folds.clone(),
            _ => vec![1],
        }
    }

    fn validate(&self) -> Result<()> {
        if let Protocol::Zne { folds } = self {
            if folds.len() < 2 {
                return Err(Error::invalid("ZNE needs at least two fold counts"));
            }
            if let Some(m) = folds.iter().find(|m| *m % 2 == 0) {
                return Err(Error::invalid(format!("fold counts must be odd, got {m}")));
            }
            let mut sorted = folds.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != folds.len() {
                return Err(Error::invalid("fold counts must be distinct"));
            }
        }
        Ok(())
    }
}

/// Which preparation and CNOT a planned circuit uses. Preparation labels
/// are written ancilla first, target second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitRole {
    /// Both qubits measured directly from |00>.
    Direct00,
    /// Both qubits flipped to |11> and measured directly.
    Direct11,
    /// CNOT target -> ancilla from |00>.
    CnotTa00,
    /// CNOT target -> ancilla with the target flipped to 1.
    CnotTa01,
    /// CNOT ancilla -> target from |00>.
    CnotAt00,
    /// CNOT ancilla -> target with the ancilla flipped to 1.
    CnotAt10,
}

impl CircuitRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            CircuitRole::Direct00 => "direct_00",
            CircuitRole::Direct11 => "direct_11",
            CircuitRole::CnotTa00 => "cnot_ta_00",
            CircuitRole::CnotTa01 => "cnot_ta_01",
            CircuitRole::CnotAt00 => "cnot_at_00",
            CircuitRole::CnotAt10 => "cnot_at_10",
        }
    }

    pub fn has_cnot(&self) -> bool {
        !matches!(self, CircuitRole::Direct00 | CircuitRole::Direct11)
    }

    fn circuit(&self) -> Result<Circuit> {
        let c = Circuit::new(2)?;
        let (flips, cnot): (&[usize], Option<(usize, usize)>) = match self {
            CircuitRole::Direct00 => (&[], None),
            CircuitRole::Direct11 => (&[TARGET, ANCILLA], None),
            CircuitRole::CnotTa00 => (&[], Some((TARGET, ANCILLA))),
            CircuitRole::CnotTa01 => (&[TARGET], Some((TARGET, ANCILLA))),
            CircuitRole::CnotAt00 => (&[], Some((ANCILLA, TARGET))),
            CircuitRole::CnotAt10 => (&[ANCILLA], Some((ANCILLA, TARGET))),
        };
        let mut c = c;
        for &q in flips {
            c.push(Gate::X { q })?;
        }
        if let Some((control, target)) = cnot {
            c.push(Gate::Cnot { control, target })?;
        }
        Ok(c)
    }
}

impl fmt::Display for CircuitRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedCircuit {
    /// File-name-safe identifier, e.g. `t0_a1_cnot_ta_01` or `t0_a1_cnot_ta_01_m3`.
    pub id: String,
    pub target: usize,
    pub ancilla: usize,
    pub role: CircuitRole,
    /// CNOT repetition count used when running the circuit.
    pub fold: u32,
    pub circuit: Circuit,
}

fn roles(protocol: &Protocol) -> &'static [CircuitRole] {
    use CircuitRole::*;
    match protocol {
        Protocol::Plain => &[Direct00, Direct11, CnotTa00, CnotTa01],
        Protocol::NoisyCnot | Protocol::Zne { .. } => {
            &[Direct00, Direct11, CnotTa00, CnotTa01, CnotAt00, CnotAt10]
        }
    }
}

fn connected(coupling: &[(usize, usize)], a: usize, b: usize) -> bool {
    coupling.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
}

/// Circuits characterizing each `(target, ancilla)` pair under `protocol`.
/// With a coupling map, every pair must be an edge of it.
pub fn build_characterization_plan(
    pairs: &[(usize, usize)],
    protocol: &Protocol,
    coupling: Option<&[(usize, usize)]>,
) -> Result<Vec<PlannedCircuit>> {
    protocol.validate()?;
    let mut plan = Vec::new();
    for &(t, a) in pairs {
        if t == a {
            return Err(Error::invalid(format!("qubit {t} cannot be its own ancilla")));
        }
        if let Some(map) = coupling {
            if !connected(map, t, a) {
                return Err(Error::invalid(format!("qubits {t} and {a} are not connected")));
            }
        }
        for &role in roles(protocol) {
            let folds = if role.has_cnot() { protocol.folds() } else { vec![1] };
            for m in folds {
                let suffix = match protocol {
                    Protocol::Zne { .. } if role.has_cnot() => format!("_m{m}"),
                    _ => String::new(),
                };
                plan.push(PlannedCircuit {
                    id: format!("t{t}_a{a}_{role}{suffix}"),
                    target: t,
                    ancilla: a,
                    role,
                    fold: m,
                    circuit: role.circuit()?,
                });
            }
        }
    }
    Ok(plan)
}
