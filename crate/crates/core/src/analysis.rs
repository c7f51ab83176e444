//! Distribution metrics, benchmark circuits and mitigation sweeps.

use serde::{Deserialize, Serialize};

use crate::assignment::AssignmentMatrix;
use crate::characterize::{build_characterization_plan, run_characterization, CharacterizationReport, Protocol, SimulatedDevice};
use crate::circuit::{Circuit, Gate, NoiseModel};
use crate::error::{Error, Result};
use crate::mitigate::{sprm_pipeline, srm_pipeline, MitigationInputs, Mitigated};
use crate::seed::derive_seed_tagged;
use crate::sim::{exact_distribution, sample_counts, simulate_ideal, Mode};
use crate::types::{display_label, Distribution, ErrorRates, Estimate, SpamRates};

fn check_same(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    Ok(())
}

/// Squared Bhattacharyya overlap `(sum_i sqrt(p_i q_i))^2`.
pub fn fidelity(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_same(p, q)?;
    let bc: f64 = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    Ok((bc * bc).min(1.0))
}

/// Hellinger distance `sqrt(1 - sqrt(F))`.
pub fn hellinger(p: &Distribution, q: &Distribution) -> Result<f64> {
    let f = fidelity(p, q)?;
    Ok((1.0 - f.sqrt()).max(0.0).sqrt())
}

/// Two-qubit benchmark: `Ry(theta)` on both qubits, then CNOT 0 -> 1.
pub fn benchmark_circuit_2q(theta: f64) -> Circuit {
    let gates = [
        Gate::Ry { q: 0, theta },
        Gate::Ry { q: 1, theta },
        Gate::Cnot { control: 0, target: 1 },
    ];
    build(2, &gates)
}

/// Four-qubit benchmark: `Ry(theta)` on all qubits, CNOT 1 -> 2, then
/// CNOT 1 -> 0 and CNOT 2 -> 3.
pub fn benchmark_circuit_4q(theta: f64) -> Circuit {
    let mut gates: Vec<Gate> = (0..4).map(|q| Gate::Ry { q, theta }).collect();
    gates.extend([
        Gate::Cnot { control: 1, target: 2 },
        Gate::Cnot { control: 1, target: 0 },
        Gate::Cnot { control: 2, target: 3 },
    ]);
    build(4, &gates)
}

fn build(n: usize, gates: &[Gate]) -> Circuit {
    let mut c = Circuit::new(n).expect("benchmark register size is valid");
    for g in gates {
        c.push(*g).expect("benchmark gates are valid");
    }
    c
}

/// Closed-form ideal output of the two-qubit benchmark:
/// `(cos^4(t/2), sin^4(t/2), sin^2(t)/4, sin^2(t)/4)`.
pub fn ideal_distribution_2q(theta: f64) -> Distribution {
    let (s, c) = (theta / 2.0).sin_cos();
    let cross = (s * c).powi(2);
    Distribution::new(2, vec![c.powi(4), s.powi(4), cross, cross])
        .expect("closed form is normalized")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    #[serde(rename = "2q")]
    TwoQubit,
    #[serde(rename = "4q")]
    FourQubit,
}

impl Benchmark {
    pub fn circuit(&self, theta: f64) -> Circuit {
        match self {
            Benchmark::TwoQubit => benchmark_circuit_2q(theta),
            Benchmark::FourQubit => benchmark_circuit_4q(theta),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Benchmark::TwoQubit => 2,
            Benchmark::FourQubit => 4,
        }
    }
}

/// How a sweep obtains its data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum SweepMode {
    Exact,
    Sampled {
        /// Shots per characterization circuit.
        calibration_shots: u64,
        /// Shots for the target circuit and each flipped-preparation run.
        target_shots: u64,
        repetitions: u32,
    },
}

impl SweepMode {
    /// 4e6 calibration shots, 6.4e5 target shots, 10 repetitions.
    pub fn default_sampled() -> Self {
        SweepMode::Sampled {
            calibration_shots: 4_000_000,
            target_shots: 640_000,
            repetitions: 10,
        }
    }
}

/// Rates measured for every qubit of a register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Preparation and readout rates, indexed by qubit.
    pub rates: Vec<ErrorRates>,
    /// Lumped SPAM rates, indexed by qubit.
    pub spam: Vec<SpamRates>,
}

impl Calibration {
    /// Calibration equal to the noise model's own rates.
    pub fn from_noise(noise: &NoiseModel) -> Self {
        Self {
            rates: noise.per_qubit.clone(),
            spam: noise.per_qubit.iter().map(ErrorRates::spam).collect(),
        }
    }

    pub fn from_report(report: &CharacterizationReport, n_qubits: usize) -> Result<Self> {
        let mut rates = vec![None; n_qubits];
        let mut spam = vec![None; n_qubits];
        for row in &report.qubits {
            if row.qubit >= n_qubits {
                return Err(Error::invalid(format!("report qubit {} out of range", row.qubit)));
            }
            let mut r = ErrorRates::new(row.delta_sp.value, row.delta_m0.value, row.delta_m1.value)?;
            r.se_sp = row.delta_sp.se;
            r.se_m0 = row.delta_m0.se;
            r.se_m1 = row.delta_m1.se;
            rates[row.qubit] = Some(r);
            spam[row.qubit] = Some(
                SpamRates::new(row.delta_spam0.value, row.delta_spam1.value)?
                    .with_se(row.delta_spam0.se, row.delta_spam1.se),
            );
        }
        let missing = |q| Error::Missing(format!("calibration for qubit {q}"));
        Ok(Self {
            rates: rates
                .into_iter()
                .enumerate()
                .map(|(q, r)| r.ok_or_else(|| missing(q)))
                .collect::<Result<_>>()?,
            spam: spam
                .into_iter()
                .enumerate()
                .map(|(q, s)| s.ok_or_else(|| missing(q)))
                .collect::<Result<_>>()?,
        })
    }

    /// Characterizes each qubit `i` with ancilla `(i + 1) mod n`.
    pub fn measure(noise: &NoiseModel, protocol: &Protocol, mode: Mode) -> Result<Self> {
        let n = noise.n_qubits();
        if n < 2 {
            return Err(Error::invalid("calibration needs at least two qubits"));
        }
        let pairs: Vec<(usize, usize)> = (0..n).map(|q| (q, (q + 1) % n)).collect();
        let plan = build_characterization_plan(&pairs, protocol, None)?;
        let report = run_characterization(&plan, protocol, &SimulatedDevice::new(noise.clone(), mode))?;
        Self::from_report(&report, n)
    }
}

/// Raw, SRM and SPRM outputs for one circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct MitigationRun {
    pub raw: Distribution,
    pub srm: Mitigated,
    pub sprm: Mitigated,
}

fn run_target(c: &Circuit, noise: &NoiseModel, mode: Mode) -> Result<Distribution> {
    let exact = exact_distribution(c, noise, 1)?;
    match mode {
        Mode::Exact => Ok(exact),
        Mode::Shots { shots, seed } => sample_counts(&exact, shots, seed)?.to_distribution(),
    }
}

/// Runs `c` and its flipped-preparation variants, then applies both
/// mitigation schemes with `cal`. In shots mode each run draws from a seed
/// derived from the given one.
pub fn mitigate_circuit(c: &Circuit, noise: &NoiseModel, cal: &Calibration, mode: Mode) -> Result<MitigationRun> {
    let n = c.n_qubits();
    if c.measured_qubits() != (0..n).collect::<Vec<_>>() {
        return Err(Error::invalid("mitigation needs every qubit measured"));
    }
    if cal.rates.len() != n || cal.spam.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: cal.rates.len(),
        });
    }
    let sub_mode = |tag: &str| match mode {
        Mode::Exact => Mode::Exact,
        Mode::Shots { shots, seed } => Mode::Shots {
            shots,
            seed: derive_seed_tagged(seed, tag),
        },
    };
    let raw = run_target(c, noise, sub_mode("raw"))?;
    let p_flipped = (0..n)
        .map(|q| run_target(&c.with_initial_x(&[q])?, noise, sub_mode(&format!("x{q}"))))
        .collect::<Result<Vec<_>>>()?;
    let srm = srm_pipeline(&raw, &AssignmentMatrix::from_spam(&cal.spam)?)?;
    let sprm = sprm_pipeline(&MitigationInputs {
        p_raw: raw.clone(),
        p_flipped,
        rates: cal.rates.clone(),
    })?;
    Ok(MitigationRun { raw, srm, sprm })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub benchmark: Benchmark,
    pub thetas: Vec<f64>,
    pub noise: NoiseModel,
    pub mode: SweepMode,
    /// Characterization protocol used for calibration.
    pub protocol: Protocol,
    pub master_seed: u64,
}

impl SweepConfig {
    pub fn new(benchmark: Benchmark, thetas: Vec<f64>, noise: NoiseModel) -> Self {
        Self {
            benchmark,
            thetas,
            noise,
            mode: SweepMode::Exact,
            protocol: Protocol::Plain,
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub theta_values: Vec<f64>,
    /// Mean over repetitions with its standard error.
    pub fidelity_raw: Vec<Estimate>,
    pub fidelity_srm: Vec<Estimate>,
    pub fidelity_sprm: Vec<Estimate>,
    pub config: SweepConfig,
}

impl SweepResult {
    /// CSV with columns `theta,f_raw,se_raw,f_srm,se_srm,f_sprm,se_sprm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,f_raw,se_raw,f_srm,se_srm,f_sprm,se_sprm\n");
        for (k, t) in self.theta_values.iter().enumerate() {
            let (r, s, p) = (self.fidelity_raw[k], self.fidelity_srm[k], self.fidelity_sprm[k]);
            out.push_str(&format!(
                "{t:.10},{:.10},{:.10},{:.10},{:.10},{:.10},{:.10}\n",
                r.value, r.se, s.value, s.se, p.value, p.se
            ));
        }
        out
    }
}

fn mean_se(v: &[f64]) -> Estimate {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return Estimate::new(mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Estimate::new(mean, (var / n).sqrt())
}

/// Raw, SRM and SPRM fidelities against the ideal output for every angle
/// of the sweep. Sampled sweeps recalibrate on every repetition and report
/// mean and standard error.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    let n = config.benchmark.n_qubits();
    if config.noise.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: config.noise.n_qubits(),
        });
    }
    let (reps, cal_mode, target_shots) = match config.mode {
        SweepMode::Exact => (1, None, None),
        SweepMode::Sampled {
            calibration_shots,
            target_shots,
            repetitions,
        } => {
            if repetitions == 0 || calibration_shots == 0 || target_shots == 0 {
                return Err(Error::invalid("sampled sweeps need positive shots and repetitions"));
            }
            (repetitions, Some(calibration_shots), Some(target_shots))
        }
    };
    let mut f = vec![[Vec::new(), Vec::new(), Vec::new()]; config.thetas.len()];
    for rep in 0..reps {
        let cal_mode = match cal_mode {
            None => Mode::Exact,
            Some(shots) => Mode::Shots {
                shots,
                seed: derive_seed_tagged(config.master_seed, &format!("calibration/{rep}")),
            },
        };
        let cal = Calibration::measure(&config.noise, &config.protocol, cal_mode)?;
        for (k, &theta) in config.thetas.iter().enumerate() {
            let c = config.benchmark.circuit(theta);
            let ideal = simulate_ideal(&c)?;
            let mode = match target_shots {
                None => Mode::Exact,
                Some(shots) => Mode::Shots {
                    shots,
                    seed: derive_seed_tagged(config.master_seed, &format!("target/{k}/{rep}")),
                },
            };
            let run = mitigate_circuit(&c, &config.noise, &cal, mode)?;
            f[k][0].push(fidelity(&run.raw, &ideal)?);
            f[k][1].push(fidelity(&run.srm.dist, &ideal)?);
            f[k][2].push(fidelity(&run.sprm.dist, &ideal)?);
        }
    }
    Ok(SweepResult {
        theta_values: config.thetas.clone(),
        fidelity_raw: f.iter().map(|x| mean_se(&x[0])).collect(),
        fidelity_srm: f.iter().map(|x| mean_se(&x[1])).collect(),
        fidelity_sprm: f.iter().map(|x| mean_se(&x[2])).collect(),
        config: config.clone(),
    })
}

/// Preparation errors recovered on the four hardware qubits, ordered q1..q4.
pub const FOUR_QUBIT_DELTA_SP: [f64; 4] = [0.007, 0.007, 0.006, 0.029];

/// Four-qubit noise with the given preparation errors and a common readout
/// error.
pub fn four_qubit_noise(delta_sps: &[f64], delta_m0: f64, delta_m1: f64) -> Result<NoiseModel> {
    let rates = delta_sps
        .iter()
        .map(|&d| ErrorRates::new(d, delta_m0, delta_m1))
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseModel::from_rates(rates))
}

/// Per-outcome comparison of the four-qubit benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub theta: f64,
    /// Outcome labels, highest qubit leftmost, in index order.
    pub labels: Vec<String>,
    pub ideal: Vec<f64>,
    pub raw: Vec<f64>,
    pub srm: Vec<f64>,
    pub sprm: Vec<f64>,
    pub fidelity_raw: f64,
    pub fidelity_srm: f64,
    pub fidelity_sprm: f64,
}

/// Raw, SRM and SPRM histograms of the four-qubit benchmark at `theta`.
/// Calibration and target runs share `mode`'s shot count when sampled.
pub fn run_four_qubit_comparison(noise: &NoiseModel, theta: f64, mode: Mode) -> Result<HistogramReport> {
    let c = benchmark_circuit_4q(theta);
    let cal_mode = match mode {
        Mode::Exact => Mode::Exact,
        Mode::Shots { shots, seed } => Mode::Shots {
            shots,
            seed: derive_seed_tagged(seed, "calibration"),
        },
    };
    let cal = Calibration::measure(noise, &Protocol::Plain, cal_mode)?;
    let run = mitigate_circuit(&c, noise, &cal, mode)?;
    let ideal = simulate_ideal(&c)?;
    Ok(HistogramReport {
        theta,
        labels: (0..ideal.len()).map(|k| display_label(k, 4)).collect(),
        fidelity_raw: fidelity(&run.raw, &ideal)?,
        fidelity_srm: fidelity(&run.srm.dist, &ideal)?,
        fidelity_sprm: fidelity(&run.sprm.dist, &ideal)?,
        ideal: ideal.into_probs(),
        raw: run.raw.into_probs(),
        srm: run.srm.dist.into_probs(),
        sprm: run.sprm.dist.into_probs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn d(v: &[f64]) -> Distribution {
        Distribution::new(v.len().trailing_zeros() as usize, v.to_vec()).unwrap()
    }

    fn reference_noise(n: usize) -> NoiseModel {
        NoiseModel::uniform(n, ErrorRates::new(0.05, 0.04, 0.06).unwrap())
    }

    #[test]
    fn fidelity_examples() {
        assert!((fidelity(&d(&[0.3, 0.7]), &d(&[0.3, 0.7])).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(), 0.0);
        let f = fidelity(&d(&[0.5, 0.5]), &d(&[0.25, 0.75])).unwrap();
        assert!((f - 0.93301).abs() < 1e-5, "{f}");
        assert!(fidelity(&d(&[1.0, 0.0]), &d(&[1.0, 0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn hellinger_examples() {
        assert_eq!(hellinger(&d(&[0.2, 0.8]), &d(&[0.2, 0.8])).unwrap(), 0.0);
        assert!((hellinger(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn benchmark_shapes() {
        assert_eq!(benchmark_circuit_2q(0.3).gates().len(), 3);
        assert_eq!(benchmark_circuit_4q(0.3).gates().len(), 7);
        for c in [benchmark_circuit_2q(0.0), benchmark_circuit_4q(0.0)] {
            assert_eq!(simulate_ideal(&c).unwrap().probs()[0], 1.0);
        }
        let half = ideal_distribution_2q(PI / 2.0);
        assert!(half.probs().iter().all(|p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn closed_form_fidelities() {
        let cal = Calibration::from_noise(&reference_noise(2));
        let ideal0 = ideal_distribution_2q(0.0);
        let run = mitigate_circuit(&benchmark_circuit_2q(0.0), &reference_noise(2), &cal, Mode::Exact).unwrap();
        let f_srm = fidelity(&run.srm.dist, &ideal0).unwrap();
        let f_sprm = fidelity(&run.sprm.dist, &ideal0).unwrap();
        assert!((f_srm - 0.975).abs() < 1e-6, "{f_srm}");
        assert!((f_sprm - (1.0 - 4.0 / 3.0 * 0.05 * 0.05)).abs() < 1e-4, "{f_sprm}");
        let run = mitigate_circuit(&benchmark_circuit_2q(PI / 2.0), &reference_noise(2), &cal, Mode::Exact).unwrap();
        let ideal = ideal_distribution_2q(PI / 2.0);
        assert!((fidelity(&run.srm.dist, &ideal).unwrap() - 1.0).abs() < 1e-6);
        assert!((fidelity(&run.sprm.dist, &ideal).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn measured_calibration_matches_noise_in_exact_mode() {
        let noise = reference_noise(4);
        let cal = Calibration::measure(&noise, &Protocol::Plain, Mode::Exact).unwrap();
        for (a, b) in cal.rates.iter().zip(&noise.per_qubit) {
            assert!((a.delta_sp - b.delta_sp).abs() < 1e-10);
            assert!((a.delta_m1 - b.delta_m1).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_noise_sweep_is_perfect() {
        let cfg = SweepConfig::new(Benchmark::FourQubit, vec![0.0, 0.7, 2.0], NoiseModel::noiseless(4));
        let r = run_sweep(&cfg).unwrap();
        for f in r.fidelity_raw.iter().chain(&r.fidelity_srm).chain(&r.fidelity_sprm) {
            assert!((f.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_sweep_reproducible() {
        let mut cfg = SweepConfig::new(Benchmark::TwoQubit, vec![0.0, 1.0], reference_noise(2));
        cfg.mode = SweepMode::Sampled {
            calibration_shots: 10_000,
            target_shots: 5_000,
            repetitions: 3,
        };
        cfg.master_seed = 11;
        let a = run_sweep(&cfg).unwrap();
        assert_eq!(a, run_sweep(&cfg).unwrap());
        assert!(a.fidelity_srm.iter().all(|e| e.se > 0.0));
        assert_eq!(a.to_csv().lines().count(), 3);
    }

    #[test]
    fn histogram_labels_and_normalization() {
        let r = run_four_qubit_comparison(&four_qubit_noise(&FOUR_QUBIT_DELTA_SP, 0.01, 0.03).unwrap(), PI / 5.0, Mode::Exact).unwrap();
        assert_eq!(r.labels[1], "0001");
        assert_eq!(r.labels[8], "1000");
        for col in [&r.ideal, &r.raw, &r.srm, &r.sprm] {
            assert!((col.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let clean = run_four_qubit_comparison(&NoiseModel::noiseless(4), PI / 5.0, Mode::Exact).unwrap();
        assert!((clean.fidelity_srm - 1.0).abs() < 1e-12 && (clean.fidelity_sprm - 1.0).abs() < 1e-12);
    }
}
