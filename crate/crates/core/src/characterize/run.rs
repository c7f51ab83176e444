//! Executing a characterization plan and assembling the per-qubit report.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::plan::{CircuitRole, PlannedCircuit, Protocol, ANCILLA, TARGET};
use super::zne::{zne_extrapolate, ZneFit, ZnePoint};
use super::{characterize_noisy_cnot, characterize_plain, solve_delta_sp, AncillaMeasurement};
use crate::circuit::NoiseModel;
use crate::counts::{CountsRecord, Observation};
use crate::error::{Error, Result};
use crate::seed::derive_seed_tagged;
use crate::sim::{exact_distribution, sample_counts, Mode};
use crate::types::{Estimate, SpamRates};

/// Supplies outcome data for planned circuits.
pub trait CountsSource {
    fn observe(&self, circuit: &PlannedCircuit) -> Result<Observation>;
}

/// Simulated device: runs planned circuits against a noise model, either
/// exactly or with seeded sampling. Each circuit gets its own seed derived
/// from the master seed and the circuit id.
#[derive(Debug, Clone)]
pub struct SimulatedDevice {
    pub noise: NoiseModel,
    pub mode: Mode,
}

impl SimulatedDevice {
    pub fn new(noise: NoiseModel, mode: Mode) -> Self {
        Self { noise, mode }
    }

    fn local_noise(&self, pc: &PlannedCircuit) -> Result<NoiseModel> {
        let mut qubits = [0; 2];
        qubits[TARGET] = pc.target;
        qubits[ANCILLA] = pc.ancilla;
        self.noise.restrict(&qubits)
    }

    /// Sampled counts for `pc`; errors in exact mode.
    pub fn counts(&self, pc: &PlannedCircuit) -> Result<CountsRecord> {
        let Mode::Shots { shots, seed } = self.mode else {
            return Err(Error::invalid("exact-mode device has no counts"));
        };
        let dist = exact_distribution(&pc.circuit, &self.local_noise(pc)?, pc.fold)?;
        let mut layout = vec![String::new(); 2];
        layout[TARGET] = format!("q{}", pc.target);
        layout[ANCILLA] = format!("q{}", pc.ancilla);
        Ok(sample_counts(&dist, shots, derive_seed_tagged(seed, &pc.id))?.with_layout(layout))
    }
}

impl CountsSource for SimulatedDevice {
    fn observe(&self, pc: &PlannedCircuit) -> Result<Observation> {
        match self.mode {
            Mode::Exact => Ok(Observation::exact(exact_distribution(
                &pc.circuit,
                &self.local_noise(pc)?,
                pc.fold,
            )?)),
            Mode::Shots { .. } => Observation::from_counts(&self.counts(pc)?),
        }
    }
}

/// Reads `<dir>/<circuit id>.json` counts files.
#[derive(Debug, Clone)]
pub struct CountsDir {
    pub dir: PathBuf,
}

impl CountsDir {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }
}

impl CountsSource for CountsDir {
    fn observe(&self, pc: &PlannedCircuit) -> Result<Observation> {
        let path = self.dir.join(format!("{}.json", pc.id));
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Missing(format!("{}: {e}", path.display())))?;
        let record: CountsRecord = serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        if record.n_qubits() != pc.circuit.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: pc.circuit.n_qubits(),
                got: record.n_qubits(),
            });
        }
        Observation::from_counts(&record)
    }
}

/// Linear fits of the four ancilla SPAM rates against the fold count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZneDetail {
    pub folds: Vec<u32>,
    /// Ancilla rates with the target as control, prepare 0 / prepare 1.
    pub cnot_ta: [ZneFit; 2],
    /// Ancilla rates with the ancilla as control, prepare 0 / prepare 1.
    pub cnot_at: [ZneFit; 2],
    /// Measured points behind `cnot_ta`.
    pub cnot_ta_points: [Vec<ZnePoint>; 2],
    /// Measured points behind `cnot_at`.
    pub cnot_at_points: [Vec<ZnePoint>; 2],
}

/// One row of the characterization report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitCharacterization {
    pub qubit: usize,
    pub label: String,
    pub ancilla: usize,
    pub method: String,
    pub delta_sp: Estimate,
    pub delta_m0: Estimate,
    pub delta_m1: Estimate,
    pub delta_spam0: Estimate,
    pub delta_spam1: Estimate,
    /// Some estimate was clamped into `[0, 0.5)`.
    pub clamped: bool,
    /// Ancilla rates the preparation error was solved from.
    pub measurement: AncillaMeasurement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zne: Option<ZneDetail>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationReport {
    pub protocol: Protocol,
    pub qubits: Vec<QubitCharacterization>,
}

type PairData = BTreeMap<(CircuitRole, u32), Observation>;

fn obs(data: &PairData, role: CircuitRole, fold: u32, pair: (usize, usize)) -> Result<&Observation> {
    data.get(&(role, fold)).ok_or_else(|| {
        Error::Missing(format!(
            "circuit {role} (fold {fold}) for target {} ancilla {}",
            pair.0, pair.1
        ))
    })
}

/// SPAM rates of `qubit` from a prepare-0 and a prepare-1 circuit.
fn spam(data: &PairData, roles: (CircuitRole, CircuitRole), fold: u32, qubit: usize, pair: (usize, usize)) -> Result<SpamRates> {
    let (d0, se0) = obs(data, roles.0, fold, pair)?.fraction(qubit, 1);
    let (d1, se1) = obs(data, roles.1, fold, pair)?.fraction(qubit, 0);
    Ok(SpamRates::new(d0, d1)?.with_se(se0, se1))
}

fn clamp_spam(v: f64) -> f64 {
    if !(0.0..1.0).contains(&v) {
        log::warn!("extrapolated SPAM rate {v} clamped");
    }
    v.clamp(0.0, 1.0 - 1e-9)
}

fn extrapolate(
    data: &PairData,
    roles: (CircuitRole, CircuitRole),
    folds: &[u32],
    pair: (usize, usize),
) -> Result<([ZneFit; 2], [Vec<ZnePoint>; 2], SpamRates)> {
    let mut pts = [Vec::new(), Vec::new()];
    for &m in folds {
        let s = spam(data, roles, m, ANCILLA, pair)?;
        pts[0].push(ZnePoint { m, value: s.delta0, se: s.se0 });
        pts[1].push(ZnePoint { m, value: s.delta1, se: s.se1 });
    }
    let fits = [zne_extrapolate(&pts[0])?, zne_extrapolate(&pts[1])?];
    let rates = SpamRates::new(clamp_spam(fits[0].intercept.value), clamp_spam(fits[1].intercept.value))?
        .with_se(fits[0].intercept.se, fits[1].intercept.se);
    Ok((fits, pts, rates))
}

fn characterize_pair(pair: (usize, usize), protocol: &Protocol, data: &PairData) -> Result<QubitCharacterization> {
    use CircuitRole::*;
    let raw_target = spam(data, (Direct00, Direct11), 1, TARGET, pair)?;
    let (measurement, zne) = match protocol {
        Protocol::Plain => (
            AncillaMeasurement {
                target_label: pair.0,
                ancilla_label: pair.1,
                spam_target: raw_target,
                spam_ancilla_plain: spam(data, (Direct00, Direct11), 1, ANCILLA, pair)?,
                spam_ancilla_cnot: spam(data, (CnotTa00, CnotTa01), 1, ANCILLA, pair)?,
            },
            None,
        ),
        Protocol::NoisyCnot => (
            AncillaMeasurement {
                target_label: pair.0,
                ancilla_label: pair.1,
                spam_target: raw_target,
                spam_ancilla_plain: spam(data, (CnotAt00, CnotAt10), 1, ANCILLA, pair)?,
                spam_ancilla_cnot: spam(data, (CnotTa00, CnotTa01), 1, ANCILLA, pair)?,
            },
            None,
        ),
        Protocol::Zne { folds } => {
            let (ta_fits, ta_points, ta) = extrapolate(data, (CnotTa00, CnotTa01), folds, pair)?;
            let (at_fits, at_points, at) = extrapolate(data, (CnotAt00, CnotAt10), folds, pair)?;
            (
                AncillaMeasurement {
                    target_label: pair.0,
                    ancilla_label: pair.1,
                    spam_target: raw_target,
                    spam_ancilla_plain: at,
                    spam_ancilla_cnot: ta,
                },
                Some(ZneDetail {
                    folds: folds.clone(),
                    cnot_ta: ta_fits,
                    cnot_at: at_fits,
                    cnot_ta_points: ta_points,
                    cnot_at_points: at_points,
                }),
            )
        }
    };
    let est = match protocol {
        Protocol::Plain => characterize_plain(&measurement)?,
        _ => characterize_noisy_cnot(&measurement, &raw_target)?,
    };
    let sp = solve_delta_sp(&measurement)?;
    Ok(QubitCharacterization {
        qubit: pair.0,
        label: format!("q{}", pair.0),
        ancilla: pair.1,
        method: protocol.name().to_string(),
        delta_sp: est.delta_sp,
        delta_m0: est.delta_m0,
        delta_m1: est.delta_m1,
        delta_spam0: raw_target.zero(),
        delta_spam1: raw_target.one(),
        clamped: est.clamped || sp.clamped,
        measurement,
        zne,
    })
}

/// Runs every circuit of `plan` through `source` and solves each pair.
/// Rows follow the order in which pairs first appear in the plan.
pub fn run_characterization(
    plan: &[PlannedCircuit],
    protocol: &Protocol,
    source: &dyn CountsSource,
) -> Result<CharacterizationReport> {
    let mut order: Vec<(usize, usize)> = Vec::new();
    let mut data: BTreeMap<(usize, usize), PairData> = BTreeMap::new();
    for pc in plan {
        let pair = (pc.target, pc.ancilla);
        if !order.contains(&pair) {
            order.push(pair);
        }
        let o = source.observe(pc)?;
        data.entry(pair).or_default().insert((pc.role, pc.fold), o);
    }
    let qubits = order
        .iter()
        .map(|&pair| characterize_pair(pair, protocol, &data[&pair]))
        .collect::<Result<Vec<_>>>()?;
    Ok(CharacterizationReport {
        protocol: protocol.clone(),
        qubits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterize::plan::build_characterization_plan;
    use crate::circuit::PauliChannel;
    use crate::types::ErrorRates;

    fn device_rates() -> Vec<ErrorRates> {
        vec![
            ErrorRates::new(0.011, 0.0005, 0.0411).unwrap(),
            ErrorRates::new(0.0101, 0.0037, 0.0297).unwrap(),
            ErrorRates::new(0.05, 0.04, 0.06).unwrap(),
        ]
    }

    fn check_exact(report: &CharacterizationReport, rates: &[ErrorRates], tol: f64) {
        for row in &report.qubits {
            let r = rates[row.qubit];
            assert!((row.delta_sp.value - r.delta_sp).abs() < tol, "{row:?}");
            assert!((row.delta_m0.value - r.delta_m0).abs() < tol, "{row:?}");
            assert!((row.delta_m1.value - r.delta_m1).abs() < tol, "{row:?}");
            let s = r.spam();
            assert!((row.delta_spam0.value - s.delta0).abs() < 1e-12);
            assert!((row.delta_spam1.value - s.delta1).abs() < 1e-12);
        }
    }

    #[test]
    fn plain_exact_recovery() {
        let rates = device_rates();
        let dev = SimulatedDevice::new(NoiseModel::from_rates(rates.clone()), Mode::Exact);
        let pairs = [(0, 1), (1, 2), (2, 1)];
        let plan = build_characterization_plan(&pairs, &Protocol::Plain, None).unwrap();
        let report = run_characterization(&plan, &Protocol::Plain, &dev).unwrap();
        assert_eq!(report.qubits.len(), 3);
        check_exact(&report, &rates, 1e-10);
    }

    #[test]
    fn noisy_cnot_exact_recovery() {
        let rates = device_rates();
        let noise = NoiseModel::from_rates(rates.clone()).with_default_cnot(PauliChannel::uniform(0.03).unwrap());
        let dev = SimulatedDevice::new(noise, Mode::Exact);
        let plan = build_characterization_plan(&[(0, 1), (2, 0)], &Protocol::NoisyCnot, None).unwrap();
        let report = run_characterization(&plan, &Protocol::NoisyCnot, &dev).unwrap();
        check_exact(&report, &rates, 1e-10);
        // The plain protocol is biased by the same noise.
        let plain_plan = build_characterization_plan(&[(0, 1)], &Protocol::Plain, None).unwrap();
        let plain = run_characterization(&plain_plan, &Protocol::Plain, &dev).unwrap();
        assert!(plain.qubits[0].delta_sp.value - 0.011 > 0.01);
    }

    #[test]
    fn sampled_is_reproducible_and_close() {
        let rates = device_rates();
        let mode = Mode::Shots { shots: 200_000, seed: 7 };
        let dev = SimulatedDevice::new(NoiseModel::from_rates(rates.clone()), mode);
        let plan = build_characterization_plan(&[(2, 1)], &Protocol::Plain, None).unwrap();
        let a = run_characterization(&plan, &Protocol::Plain, &dev).unwrap();
        let b = run_characterization(&plan, &Protocol::Plain, &dev).unwrap();
        assert_eq!(a, b);
        let row = &a.qubits[0];
        assert!(row.delta_sp.se > 0.0);
        assert!(row.delta_sp.z_score(&Estimate::exact(0.05)) < 5.0, "{row:?}");
    }

    #[test]
    fn missing_counts_reported() {
        let dir = std::env::temp_dir().join("spamsep-missing-counts-test");
        let plan = build_characterization_plan(&[(0, 1)], &Protocol::Plain, None).unwrap();
        let err = run_characterization(&plan, &Protocol::Plain, &CountsDir::new(&dir)).unwrap_err();
        assert!(matches!(err, Error::Missing(_)));
    }
}
