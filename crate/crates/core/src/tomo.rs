//! Single-qubit state tomography with readout mitigation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assignment::AssignmentMatrix;
use crate::circuit::{Circuit, Gate, NoiseModel};
use crate::counts::{CountsRecord, Observation};
use crate::error::{Error, Result};
use crate::mitigate::apply_inverse;
use crate::seed::derive_seed_tagged;
use crate::sim::{exact_distribution, sample_counts, DensityMatrix, Mode};
use crate::types::Distribution;

/// Measurement basis of a tomography run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    /// Rotation mapping the +1 eigenstate of the basis onto |0>.
    pub fn rotation(&self) -> Option<Gate> {
        match self {
            Basis::X => Some(Gate::Ry { q: 0, theta: -std::f64::consts::FRAC_PI_2 }),
            Basis::Y => Some(Gate::Rx { q: 0, theta: std::f64::consts::FRAC_PI_2 }),
            Basis::Z => None,
        }
    }
}

/// Single-qubit circuit preparing |0> (or |1> with `prep_one`) and measuring
/// in `basis`.
pub fn tomography_circuit(basis: Basis, prep_one: bool) -> Result<Circuit> {
    let mut c = Circuit::new(1)?;
    if prep_one {
        c.push(Gate::X { q: 0 })?;
    }
    if let Some(g) = basis.rotation() {
        c.push(g)?;
    }
    Ok(c)
}

/// Basis-rotated outcome data for one qubit and its readout matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyData {
    pub x: Observation,
    pub y: Observation,
    pub z: Observation,
    pub a_m: AssignmentMatrix,
}

impl TomographyData {
    pub fn from_counts(
        counts_x: &CountsRecord,
        counts_y: &CountsRecord,
        counts_z: &CountsRecord,
        a_m: AssignmentMatrix,
    ) -> Result<Self> {
        Ok(Self {
            x: Observation::from_counts(counts_x)?,
            y: Observation::from_counts(counts_y)?,
            z: Observation::from_counts(counts_z)?,
            a_m,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.a_m.n_qubits() != 1 {
            return Err(Error::invalid("tomography needs a single-qubit readout matrix"));
        }
        for o in [&self.x, &self.y, &self.z] {
            if o.dist.n_qubits() != 1 {
                return Err(Error::invalid("tomography needs single-qubit data"));
            }
        }
        Ok(())
    }
}

/// Reconstructed state, before and after enforcing physicality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyReport {
    /// Entries as `[re, im]`, row-major.
    pub rho_raw: [[[f64; 2]; 2]; 2],
    pub rho_projected: [[[f64; 2]; 2]; 2],
    /// Readout-mitigated `(<X>, <Y>, <Z>)`.
    pub bloch: [f64; 3],
    pub bloch_se: [f64; 3],
    /// `rho_11` of the projected state.
    pub delta_sp_diag: f64,
    pub delta_sp_diag_se: f64,
}

impl TomographyReport {
    pub fn rho(&self) -> DensityMatrix {
        to_density(&self.rho_projected)
    }

    pub fn rho_raw(&self) -> DensityMatrix {
        to_density(&self.rho_raw)
    }
}

fn to_density(m: &[[[f64; 2]; 2]; 2]) -> DensityMatrix {
    let c = |i: usize, j: usize| Complex64::new(m[i][j][0], m[i][j][1]);
    DensityMatrix::single([[c(0, 0), c(0, 1)], [c(1, 0), c(1, 1)]])
}

fn from_bloch(r: [f64; 3]) -> [[[f64; 2]; 2]; 2] {
    let [x, y, z] = r;
    [
        [[(1.0 + z) / 2.0, 0.0], [x / 2.0, -y / 2.0]],
        [[x / 2.0, y / 2.0], [(1.0 - z) / 2.0, 0.0]],
    ]
}

/// Mitigated `<sigma>` and its standard error from one basis run.
fn expectation(o: &Observation, a_m: &AssignmentMatrix) -> Result<(f64, f64)> {
    let q = apply_inverse(a_m, &o.dist)?;
    let f = a_m.factors()[0];
    let scale = f[0][0] - f[0][1];
    let (_, se_one) = o.fraction(0, 1);
    Ok((q.values()[0] - q.values()[1], 2.0 * se_one / scale))
}

/// Linear-inversion reconstruction; Bloch vectors longer than 1 are scaled
/// back onto the sphere.
pub fn reconstruct(d: &TomographyData) -> Result<TomographyReport> {
    d.validate()?;
    let mut bloch = [0.0; 3];
    let mut bloch_se = [0.0; 3];
    for (k, o) in [&d.x, &d.y, &d.z].into_iter().enumerate() {
        (bloch[k], bloch_se[k]) = expectation(o, &d.a_m)?;
    }
    let norm = bloch.iter().map(|v| v * v).sum::<f64>().sqrt();
    let projected = if norm > 1.0 { bloch.map(|v| v / norm) } else { bloch };
    Ok(TomographyReport {
        rho_raw: from_bloch(bloch),
        rho_projected: from_bloch(projected),
        bloch,
        bloch_se,
        delta_sp_diag: (1.0 - projected[2]) / 2.0,
        delta_sp_diag_se: bloch_se[2] / 2.0,
    })
}

/// Tomography data for the single-qubit `noise` model. The readout matrix
/// is the model's own. In shots mode each basis gets a derived seed.
pub fn simulate_tomography(noise: &NoiseModel, prep_one: bool, mode: Mode) -> Result<TomographyData> {
    if noise.n_qubits() != 1 {
        return Err(Error::invalid("tomography simulation needs a single-qubit noise model"));
    }
    let run = |basis: Basis| -> Result<Observation> {
        let dist: Distribution = exact_distribution(&tomography_circuit(basis, prep_one)?, noise, 1)?;
        match mode {
            Mode::Exact => Ok(Observation::exact(dist)),
            Mode::Shots { shots, seed } => {
                let tag = format!("{basis:?}").to_lowercase();
                Observation::from_counts(&sample_counts(&dist, shots, derive_seed_tagged(seed, &tag))?)
            }
        }
    };
    Ok(TomographyData {
        x: run(Basis::X)?,
        y: run(Basis::Y)?,
        z: run(Basis::Z)?,
        a_m: AssignmentMatrix::from_readout(&noise.per_qubit)?,
    })
}
