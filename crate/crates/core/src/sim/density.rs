use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::PauliChannel;
use crate::error::{Error, Result};
use crate::types::ErrorRates;

pub type Unitary2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense density matrix over `n_qubits`, row-major, little-endian basis
/// indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|0..0><0..0|`.
    pub fn zero_state(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        let mut entries = vec![ZERO; dim * dim];
        entries[0] = ONE;
        Self {
            n_qubits,
            dim,
            entries,
        }
    }

    /// Single-qubit matrix from its four entries.
    pub fn single(m: [[Complex64; 2]; 2]) -> Self {
        Self {
            n_qubits: 1,
            dim: 2,
            entries: vec![m[0][0], m[0][1], m[1][0], m[1][1]],
        }
    }

    /// Tensor product of single-qubit states; `states[q]` acts on qubit `q`.
    pub fn product(states: &[DensityMatrix]) -> Result<Self> {
        if states.is_empty() || states.iter().any(|s| s.n_qubits != 1) {
            return Err(Error::invalid("product state needs single-qubit factors"));
        }
        let n = states.len();
        let dim = 1 << n;
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut v = ONE;
                for (q, s) in states.iter().enumerate() {
                    v *= s.get((i >> q) & 1, (j >> q) & 1);
                    if v == ZERO {
                        break;
                    }
                }
                entries[i * dim + j] = v;
            }
        }
        Ok(Self {
            n_qubits: n,
            dim,
            entries,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Diagonal (computational-basis populations).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| {
            (i..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol)
        })
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_matrix();
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `rho -> U rho U^dagger` with `u` acting on `qubit`.
    pub fn apply_1q(&mut self, qubit: usize, u: &Unitary2) {
        let bit = 1 << qubit;
        let dim = self.dim;
        // rows: U rho
        for i in (0..dim).filter(|i| i & bit == 0) {
            for j in 0..dim {
                let a = self.entries[i * dim + j];
                let b = self.entries[(i | bit) * dim + j];
                self.entries[i * dim + j] = u[0][0] * a + u[0][1] * b;
                self.entries[(i | bit) * dim + j] = u[1][0] * a + u[1][1] * b;
            }
        }
        // columns: (U rho) U^dagger
        for i in 0..dim {
            for j in (0..dim).filter(|j| j & bit == 0) {
                let a = self.entries[i * dim + j];
                let b = self.entries[i * dim + (j | bit)];
                self.entries[i * dim + j] = a * u[0][0].conj() + b * u[0][1].conj();
                self.entries[i * dim + (j | bit)] = a * u[1][0].conj() + b * u[1][1].conj();
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1 << control, 1 << target);
        let perm = |i: usize| if i & cb != 0 { i ^ tb } else { i };
        let dim = self.dim;
        let mut out = vec![ZERO; dim * dim];
        for i in 0..dim {
            let pi = perm(i);
            for j in 0..dim {
                out[pi * dim + perm(j)] = self.entries[i * dim + j];
            }
        }
        self.entries = out;
    }

    /// `rho -> sum_a p_a P_a rho P_a` with the first Pauli label on `control`.
    pub fn apply_pauli_channel(&mut self, control: usize, target: usize, ch: &PauliChannel) {
        if ch.is_identity() {
            return;
        }
        let dim = self.dim;
        let mut out = vec![ZERO; dim * dim];
        for (a, &p) in ch.probs().iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let (pc, pt) = (a / 4, a % 4);
            let mask = flip_mask(pc, control) | flip_mask(pt, target);
            // P|k> = phase(k) |k ^ mask>
            let phase = |k: usize| pauli_phase(pc, (k >> control) & 1) * pauli_phase(pt, (k >> target) & 1);
            for i in 0..dim {
                let si = i ^ mask;
                let pi = phase(si);
                for j in 0..dim {
                    let sj = j ^ mask;
                    out[i * dim + j] += p * pi * self.entries[si * dim + sj] * phase(sj).conj();
                }
            }
        }
        self.entries = out;
    }

    /// Average of `rho` and `Z rho Z` on `qubit` (random Z twirl).
    pub fn dephase(&mut self, qubit: usize) {
        let bit = 1 << qubit;
        let dim = self.dim;
        for i in 0..dim {
            for j in 0..dim {
                if (i ^ j) & bit != 0 {
                    self.entries[i * dim + j] = ZERO;
                }
            }
        }
    }
}

fn flip_mask(pauli: usize, qubit: usize) -> usize {
    if matches!(pauli, 1 | 2) {
        1 << qubit
    } else {
        0
    }
}

fn pauli_phase(pauli: usize, bit: usize) -> Complex64 {
    match (pauli, bit) {
        (2, 0) => Complex64::new(0.0, 1.0),
        (2, _) => Complex64::new(0.0, -1.0),
        (3, 1) => Complex64::new(-1.0, 0.0),
        _ => ONE,
    }
}

pub fn x_gate() -> Unitary2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn z_gate() -> Unitary2 {
    [[ONE, ZERO], [ZERO, -ONE]]
}

/// `exp(-i theta Y / 2)`.
pub fn ry(theta: f64) -> Unitary2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

/// `exp(-i theta X / 2)`.
pub fn rx(theta: f64) -> Unitary2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
    ]
}

/// Single-qubit preparation of `|0>` with preparation error `delta`.
///
/// Without a phase the state is `(1-d)|0><0| + d|1><1|`. With
/// `coherent_phase = Some(phi)` it is the pure state
/// `sqrt(1-d)|0> + sqrt(d) e^{i phi}|1>`; twirling removes the coherences.
pub fn prepare_zero_state(delta: f64, coherent_phase: Option<f64>, twirl: bool) -> DensityMatrix {
    let off = match coherent_phase {
        Some(phi) if !twirl => {
            Complex64::from_polar((delta * (1.0 - delta)).sqrt(), -phi)
        }
        _ => ZERO,
    };
    DensityMatrix::single([
        [Complex64::new(1.0 - delta, 0.0), off],
        [off.conj(), Complex64::new(delta, 0.0)],
    ])
}

/// Incoherent noisy `|0>` preparation `(1-d_SP)|0><0| + d_SP|1><1|`.
pub fn prepare_noisy_zero(rates: &ErrorRates, twirl: bool) -> DensityMatrix {
    prepare_zero_state(rates.delta_sp, None, twirl)
}
