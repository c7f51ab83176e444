//! Exact density-matrix simulation of small noisy circuits and seeded shot
//! sampling from the exact outcome distribution.
//!
//! Noise composition, in order: per-qubit noisy preparation (optionally
//! Z-twirled), gates in circuit order with every CNOT repeated `zne_fold`
//! times and its Pauli channel applied after each repetition, optional
//! Z-twirl before readout, then classical readout flips on the populations.

mod density;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _};
use serde::{Deserialize, Serialize};

pub use density::{prepare_noisy_zero, prepare_zero_state, rx, ry, x_gate, z_gate, DensityMatrix, Unitary2};

use crate::assignment::AssignmentMatrix;
use crate::circuit::{Circuit, Gate, NoiseModel};
use crate::counts::CountsRecord;
use crate::error::{Error, Result};
use crate::types::Distribution;

/// Largest register accepted by the exact simulator.
pub const MAX_EXACT_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Shots { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub mode: Mode,
    /// Number of times each CNOT is applied; must be odd.
    pub zne_fold: u32,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Exact,
            zne_fold: 1,
        }
    }
}

impl SimOptions {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn shots(shots: u64, seed: u64) -> Self {
        Self {
            mode: Mode::Shots { shots, seed },
            zne_fold: 1,
        }
    }

    pub fn with_fold(mut self, m: u32) -> Self {
        self.zne_fold = m;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.zne_fold.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "CNOT fold count must be odd, got {}",
                self.zne_fold
            )));
        }
        if let Mode::Shots { shots: 0, .. } = self.mode {
            return Err(Error::invalid("shots must be positive"));
        }
        Ok(())
    }
}

fn check_dims(c: &Circuit, noise: &NoiseModel) -> Result<()> {
    if c.n_qubits() != noise.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: c.n_qubits(),
            got: noise.n_qubits(),
        });
    }
    if c.n_qubits() > MAX_EXACT_QUBITS {
        return Err(Error::invalid(format!(
            "exact simulation supports at most {MAX_EXACT_QUBITS} qubits, got {}",
            c.n_qubits()
        )));
    }
    noise.validate()
}

/// State just before readout.
pub fn final_state(c: &Circuit, noise: &NoiseModel, zne_fold: u32) -> Result<DensityMatrix> {
    check_dims(c, noise)?;
    SimOptions::exact().with_fold(zne_fold).validate()?;
    let n = c.n_qubits();
    let prepared: Vec<DensityMatrix> = (0..n)
        .map(|q| {
            prepare_zero_state(
                noise.per_qubit[q].delta_sp,
                noise.coherent_sp.get(&q).copied(),
                noise.twirl_z,
            )
        })
        .collect();
    let mut rho = DensityMatrix::product(&prepared)?;
    for gate in c.gates() {
        match *gate {
            Gate::X { q } => rho.apply_1q(q, &x_gate()),
            Gate::Z { q } => rho.apply_1q(q, &z_gate()),
            Gate::Ry { q, theta } => rho.apply_1q(q, &ry(theta)),
            Gate::Rx { q, theta } => rho.apply_1q(q, &rx(theta)),
            Gate::Cnot { control, target } => {
                let channel = noise.channel_for(control, target);
                for _ in 0..zne_fold {
                    rho.apply_cnot(control, target);
                    if let Some(ch) = channel {
                        rho.apply_pauli_channel(control, target, ch);
                    }
                }
            }
        }
    }
    if noise.twirl_measure {
        for q in 0..n {
            rho.dephase(q);
        }
    }
    Ok(rho)
}

/// Exact outcome distribution over the measured qubits.
pub fn exact_distribution(c: &Circuit, noise: &NoiseModel, zne_fold: u32) -> Result<Distribution> {
    let rho = final_state(c, noise, zne_fold)?;
    let readout = AssignmentMatrix::from_readout(&noise.per_qubit)?;
    let observed = readout.apply(&rho.diagonal())?;
    Distribution::new(c.n_qubits(), observed)?.marginal(&c.measured_qubits())
}

/// Simulates `c` under `noise`. Exact mode returns the analytic outcome
/// distribution; shots mode returns the empirical distribution of seeded
/// samples from it.
pub fn simulate(c: &Circuit, noise: &NoiseModel, opts: &SimOptions) -> Result<Distribution> {
    opts.validate()?;
    let exact = exact_distribution(c, noise, opts.zne_fold)?;
    match opts.mode {
        Mode::Exact => Ok(exact),
        Mode::Shots { shots, seed } => sample_counts(&exact, shots, seed)?.to_distribution(),
    }
}

/// Shot counts for `c` sampled from its exact distribution.
pub fn simulate_counts(
    c: &Circuit,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    zne_fold: u32,
) -> Result<CountsRecord> {
    let exact = exact_distribution(c, noise, zne_fold)?;
    sample_counts(&exact, shots, seed)
}

/// Draws `shots` samples from `dist`, returned as counts.
///
/// The multinomial draw is done outcome by outcome with conditional
/// binomials, so the cost is independent of the shot count.
pub fn sample_counts(dist: &Distribution, shots: u64, seed: u64) -> Result<CountsRecord> {
    if shots == 0 {
        return Err(Error::EmptyCounts);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = dist.probs();
    let mut dense = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass = 1.0;
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() {
            dense[k] = remaining;
            break;
        }
        let frac = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, frac)
            .map_err(|e| Error::invalid(format!("binomial sampler: {e}")))?
            .sample(&mut rng);
        dense[k] = draw;
        remaining -= draw;
        mass -= p;
    }
    Ok(CountsRecord::from_dense(dist.n_qubits(), &dense)?.with_seed(Some(seed)))
}

/// Noise-free statevector simulation.
pub fn simulate_ideal(c: &Circuit) -> Result<Distribution> {
    if c.n_qubits() > crate::types::MAX_QUBITS {
        return Err(Error::invalid("register too large"));
    }
    let dim = 1usize << c.n_qubits();
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    psi[0] = Complex64::new(1.0, 0.0);
    for gate in c.gates() {
        match *gate {
            Gate::X { q } => apply_1q_state(&mut psi, q, &x_gate()),
            Gate::Z { q } => apply_1q_state(&mut psi, q, &z_gate()),
            Gate::Ry { q, theta } => apply_1q_state(&mut psi, q, &ry(theta)),
            Gate::Rx { q, theta } => apply_1q_state(&mut psi, q, &rx(theta)),
            Gate::Cnot { control, target } => {
                let (cb, tb) = (1 << control, 1 << target);
                for i in 0..dim {
                    if i & cb != 0 && i & tb == 0 {
                        psi.swap(i, i | tb);
                    }
                }
            }
        }
    }
    let probs = psi.iter().map(|a| a.norm_sqr()).collect();
    Distribution::new(c.n_qubits(), probs)?.marginal(&c.measured_qubits())
}

fn apply_1q_state(psi: &mut [Complex64], q: usize, u: &Unitary2) {
    let bit = 1 << q;
    for i in 0..psi.len() {
        if i & bit == 0 {
            let (a, b) = (psi[i], psi[i | bit]);
            psi[i] = u[0][0] * a + u[0][1] * b;
            psi[i | bit] = u[1][0] * a + u[1][1] * b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::PauliChannel;
    use crate::types::ErrorRates;
    use std::f64::consts::PI;

    fn bell() -> Circuit {
        Circuit::new(2)
            .unwrap()
            .with(Gate::Ry { q: 0, theta: PI / 2.0 })
            .unwrap()
            .with(Gate::Cnot { control: 0, target: 1 })
            .unwrap()
    }

    #[test]
    fn x_on_qubit_zero_is_index_one() {
        let c = Circuit::new(2).unwrap().with(Gate::X { q: 0 }).unwrap();
        let p = simulate(&c, &NoiseModel::noiseless(2), &SimOptions::exact()).unwrap();
        assert_eq!(p.probs()[1], 1.0);
        let c1 = Circuit::new(1).unwrap().with(Gate::X { q: 0 }).unwrap();
        let p1 = simulate(&c1, &NoiseModel::noiseless(1), &SimOptions::exact()).unwrap();
        assert_eq!(p1.probs(), &[0.0, 1.0]);
    }

    #[test]
    fn bell_state() {
        let p = simulate(&bell(), &NoiseModel::noiseless(2), &SimOptions::exact()).unwrap();
        let want = [0.5, 0.0, 0.0, 0.5];
        for (a, b) in p.probs().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_circuit_forward_formula() {
        let noise = NoiseModel::uniform(1, ErrorRates::new(0.05, 0.04, 0.06).unwrap());
        let p = simulate(&Circuit::new(1).unwrap(), &noise, &SimOptions::exact()).unwrap();
        assert!((p.probs()[1] - 0.085).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = Circuit::new(2).unwrap();
        assert!(matches!(
            simulate(&c, &NoiseModel::noiseless(3), &SimOptions::exact()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(simulate(&c, &NoiseModel::noiseless(2), &SimOptions::exact().with_fold(2)).is_err());
        let big = Circuit::new(13).unwrap();
        assert!(simulate(&big, &NoiseModel::noiseless(13), &SimOptions::exact()).is_err());
    }

    #[test]
    fn fold_without_noise_is_identity() {
        let noise = NoiseModel::uniform(2, ErrorRates::new(0.03, 0.02, 0.01).unwrap());
        let a = simulate(&bell(), &noise, &SimOptions::exact()).unwrap();
        let b = simulate(&bell(), &noise, &SimOptions::exact().with_fold(5)).unwrap();
        for (x, y) in a.probs().iter().zip(b.probs()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn cnot_channel_flips_target() {
        // XX-free channel: only X on target, probability 0.1
        let mut probs = [0.0; 16];
        probs[0] = 0.9;
        probs[1] = 0.1;
        let ch = PauliChannel::new(probs).unwrap();
        let noise = NoiseModel::noiseless(2).with_cnot(0, 1, ch);
        let c = Circuit::new(2).unwrap().with(Gate::Cnot { control: 0, target: 1 }).unwrap();
        let p = simulate(&c, &noise, &SimOptions::exact()).unwrap();
        assert!((p.probs()[2] - 0.1).abs() < 1e-15);
        // three noisy applications: odd number of flips
        let p3 = simulate(&c, &noise, &SimOptions::exact().with_fold(3)).unwrap();
        let want = (1.0 - 0.8f64.powi(3)) / 2.0;
        assert!((p3.probs()[2] - want).abs() < 1e-15);
    }

    #[test]
    fn measured_subset() {
        let c = Circuit::new(2)
            .unwrap()
            .with(Gate::X { q: 1 })
            .unwrap()
            .measure(vec![1])
            .unwrap();
        let p = simulate(&c, &NoiseModel::noiseless(2), &SimOptions::exact()).unwrap();
        assert_eq!(p.probs(), &[0.0, 1.0]);
        assert_eq!(simulate_ideal(&c).unwrap().probs(), &[0.0, 1.0]);
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = Distribution::new(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let a = sample_counts(&d, 10_000, 42).unwrap();
        let b = sample_counts(&d, 10_000, 42).unwrap();
        let c = sample_counts(&d, 10_000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.shots(), 10_000);
        assert_eq!(a.seed(), Some(42));
    }
}
