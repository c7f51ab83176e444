//! Tensor-product assignment (confusion) matrices.
//!
//! An n-qubit assignment matrix is kept as n column-stochastic 2x2 factors;
//! factor `q` acts on bit `q` of the outcome index. Application costs
//! O(n 2^n) and the dense 2^n x 2^n matrix is never formed.

use crate::error::{Error, Result};
use crate::types::{ErrorRates, SpamRates};

/// Determinant threshold below which a factor is treated as singular.
pub const SINGULAR_EPS: f64 = 1e-12;

/// 2x2 factor stored row-major: `m[observed][true]`.
pub type Factor = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix {
    factors: Vec<Factor>,
}

fn flip_factor(d0: f64, d1: f64) -> Factor {
    [[1.0 - d0, d1], [d0, 1.0 - d1]]
}

fn det(m: &Factor) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

impl AssignmentMatrix {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("assignment matrix needs at least one factor"));
        }
        for (q, f) in factors.iter().enumerate() {
            for col in 0..2 {
                let s = f[0][col] + f[1][col];
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "factor {q} column {col} sums to {s}"
                    )));
                }
            }
            if f.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::invalid(format!("factor {q} has entries outside [0, 1]")));
            }
            if det(f) <= SINGULAR_EPS {
                return Err(Error::Singular(format!(
                    "factor {q} has determinant {}",
                    det(f)
                )));
            }
        }
        Ok(Self { factors })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            factors: vec![[[1.0, 0.0], [0.0, 1.0]]; n_qubits],
        }
    }

    /// Readout matrix `A_M`, factor `[[1-m0, m1], [m0, 1-m1]]` per qubit.
    pub fn from_readout(rates: &[ErrorRates]) -> Result<Self> {
        for r in rates {
            r.validate()?;
        }
        Self::new(
            rates
                .iter()
                .map(|r| flip_factor(r.delta_m0, r.delta_m1))
                .collect(),
        )
    }

    /// Symmetric preparation matrix `A_SP`.
    pub fn from_preparation(rates: &[ErrorRates]) -> Result<Self> {
        for r in rates {
            r.validate()?;
        }
        Self::new(
            rates
                .iter()
                .map(|r| flip_factor(r.delta_sp, r.delta_sp))
                .collect(),
        )
    }

    /// Lumped SPAM matrix `A_SPAM` from measured SPAM rates.
    pub fn from_spam(spam: &[SpamRates]) -> Result<Self> {
        for s in spam {
            s.validate()?;
        }
        Self::new(spam.iter().map(|s| flip_factor(s.delta0, s.delta1)).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Per-qubit product `self * other`.
    pub fn compose(&self, other: &AssignmentMatrix) -> Result<Self> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits(),
                got: other.n_qubits(),
            });
        }
        let factors = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| {
                let mut m = [[0.0; 2]; 2];
                for (i, row) in m.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                    }
                }
                m
            })
            .collect();
        Self::new(factors)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        let expected = 1usize << self.n_qubits();
        if len != expected {
            return Err(Error::DimensionMismatch { expected, got: len });
        }
        Ok(())
    }

    /// Forward map `A v`.
    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values.len())?;
        let mut out = values.to_vec();
        for (q, f) in self.factors.iter().enumerate() {
            apply_factor(&mut out, q, f);
        }
        Ok(out)
    }

    /// `A^{-1} v`, applying each 2x2 inverse along its qubit axis.
    pub fn apply_inverse(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values.len())?;
        let mut out = values.to_vec();
        for (q, f) in self.factors.iter().enumerate() {
            let d = det(f);
            if d <= SINGULAR_EPS {
                return Err(Error::Singular(format!("factor {q} has determinant {d}")));
            }
            let inv = [[f[1][1] / d, -f[0][1] / d], [-f[1][0] / d, f[0][0] / d]];
            apply_factor(&mut out, q, &inv);
        }
        Ok(out)
    }
}

fn apply_factor(v: &mut [f64], qubit: usize, m: &Factor) {
    let bit = 1usize << qubit;
    for i in 0..v.len() {
        if i & bit == 0 {
            let (a, b) = (v[i], v[i | bit]);
            v[i] = m[0][0] * a + m[0][1] * b;
            v[i | bit] = m[1][0] * a + m[1][1] * b;
        }
    }
}
