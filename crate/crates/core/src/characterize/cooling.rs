//! Two-qubit algorithmic-cooling characterization with symmetric readout.
//!
//! Each qubit is measured plainly and after a CNOT onto the other qubit
//! with post-selection of '0' there. The four SPAM rates give four
//! nonlinear equations in the two preparation and two readout rates.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::MAX_RATE;

/// Residual (max-norm) accepted as a root.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Roots closer than this are treated as the same root.
pub const DISTINCT_TOL: f64 = 1e-4;

const START_GRID: [f64; 3] = [0.05, 0.15, 0.3];
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingRates {
    pub dsp1: f64,
    pub dm1: f64,
    pub dsp2: f64,
    pub dm2: f64,
}

impl CoolingRates {
    fn to_vec(self) -> Vector4<f64> {
        Vector4::new(self.dsp1, self.dm1, self.dsp2, self.dm2)
    }

    fn from_vec(v: &Vector4<f64>) -> Self {
        Self {
            dsp1: v[0],
            dm1: v[1],
            dsp2: v[2],
            dm2: v[3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.to_vec();
        if v.iter().any(|x| !(0.0..0.5).contains(x)) {
            return Err(Error::invalid(format!("cooling rates must be in [0, 0.5), got {v:?}")));
        }
        Ok(())
    }

    /// Cooling factors `(f12, f21)`.
    pub fn factors(&self) -> (f64, f64) {
        let f = |s: f64, m: f64, s_other: f64| {
            2.0 * spam(s, m) / (1.0 + (1.0 - 2.0 * s) * (1.0 - 2.0 * m) * (1.0 - 2.0 * s_other))
        };
        (f(self.dsp1, self.dm1, self.dsp2), f(self.dsp2, self.dm2, self.dsp1))
    }

    pub fn max_abs_diff(&self, other: &CoolingRates) -> f64 {
        (self.to_vec() - other.to_vec()).amax()
    }
}

/// Plain and post-selected SPAM rates of both qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingObservables {
    pub dspam1: f64,
    pub dspam2: f64,
    pub dspam1_tilde: f64,
    pub dspam2_tilde: f64,
}

impl CoolingObservables {
    fn to_vec(self) -> Vector4<f64> {
        Vector4::new(self.dspam1, self.dspam2, self.dspam1_tilde, self.dspam2_tilde)
    }

    fn from_vec(v: &Vector4<f64>) -> Self {
        Self {
            dspam1: v[0],
            dspam2: v[1],
            dspam1_tilde: v[2],
            dspam2_tilde: v[3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingSolution {
    pub dsp1: f64,
    pub dm1: f64,
    pub dsp2: f64,
    pub dm2: f64,
    pub f12: f64,
    pub f21: f64,
    /// Max-norm residual of the returned root.
    pub residual: f64,
    /// Set when starts converged to roots more than `DISTINCT_TOL` apart.
    pub non_unique: bool,
    /// Other roots found, furthest from the returned one first.
    pub alternatives: Vec<CoolingRates>,
}

impl CoolingSolution {
    pub fn rates(&self) -> CoolingRates {
        CoolingRates {
            dsp1: self.dsp1,
            dm1: self.dm1,
            dsp2: self.dsp2,
            dm2: self.dm2,
        }
    }
}

fn spam(s: f64, m: f64) -> f64 {
    s + m - 2.0 * s * m
}

fn forward_vec(x: &Vector4<f64>) -> Vector4<f64> {
    let r = CoolingRates::from_vec(x);
    let (f12, f21) = r.factors();
    Vector4::new(
        spam(r.dsp1, r.dm1),
        spam(r.dsp2, r.dm2),
        r.dsp1 * f12 + r.dm1,
        r.dsp2 * f21 + r.dm2,
    )
}

/// Observables produced by the given rates.
pub fn cooling_forward(rates: &CoolingRates) -> Result<CoolingObservables> {
    rates.validate()?;
    Ok(CoolingObservables::from_vec(&forward_vec(&rates.to_vec())))
}

fn jacobian(x: &Vector4<f64>) -> Matrix4<f64> {
    let h = 1e-7;
    let mut j = Matrix4::zeros();
    for k in 0..4 {
        let mut up = *x;
        let mut dn = *x;
        up[k] += h;
        dn[k] -= h;
        j.set_column(k, &((forward_vec(&up) - forward_vec(&dn)) / (2.0 * h)));
    }
    j
}

fn project(x: Vector4<f64>) -> Vector4<f64> {
    x.map(|v| v.clamp(0.0, MAX_RATE))
}

/// Damped Newton with box projection. Returns the final point and its
/// max-norm residual.
fn newton(start: Vector4<f64>, target: &Vector4<f64>) -> (Vector4<f64>, f64) {
    let mut x = start;
    let mut f = forward_vec(&x) - target;
    let mut norm = f.norm();
    for _ in 0..MAX_ITER {
        if f.amax() < 1e-15 {
            break;
        }
        let Some(step) = jacobian(&x).lu().solve(&(-f)) else {
            break;
        };
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-6 {
            let cand = project(x + step * lambda);
            let fc = forward_vec(&cand) - target;
            if fc.norm() < norm {
                x = cand;
                f = fc;
                norm = fc.norm();
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, f.amax())
}

/// Solves for the rates reproducing `obs`, starting Newton from every point
/// of a 3^4 grid over the physical box.
///
/// The system can have several roots in the box; all roots found are
/// reported and the one with the smallest residual is returned.
pub fn cooling_solve(obs: &CoolingObservables) -> Result<CoolingSolution> {
    let target = obs.to_vec();
    if target.iter().any(|v| !(0.0..1.0).contains(v)) {
        return Err(Error::invalid(format!("observables must be in [0, 1), got {target:?}")));
    }
    let mut roots: Vec<(Vector4<f64>, f64)> = Vec::new();
    let mut best_failed = f64::INFINITY;
    for idx in 0..81usize {
        let start = Vector4::from_fn(|k, _| START_GRID[(idx / 3usize.pow(k as u32)) % 3]);
        let (x, res) = newton(start, &target);
        if res > RESIDUAL_TOL {
            best_failed = best_failed.min(res);
            continue;
        }
        match roots.iter_mut().find(|(r, _)| (r - x).amax() < 1e-6) {
            Some(existing) if res < existing.1 => *existing = (x, res),
            Some(_) => {}
            None => roots.push((x, res)),
        }
    }
    if roots.is_empty() {
        return Err(Error::NoConvergence(format!(
            "no start converged; best residual {best_failed:e}"
        )));
    }
    let best = roots
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let (x, residual) = roots.swap_remove(best);
    let mut others: Vec<Vector4<f64>> = roots
        .into_iter()
        .map(|(r, _)| r)
        .filter(|r| (r - x).amax() > DISTINCT_TOL)
        .collect();
    others.sort_by(|a, b| (b - x).amax().total_cmp(&(a - x).amax()));
    let rates = CoolingRates::from_vec(&x);
    let (f12, f21) = rates.factors();
    if !others.is_empty() {
        log::warn!("cooling system has {} roots for {obs:?}", others.len() + 1);
    }
    Ok(CoolingSolution {
        dsp1: x[0],
        dm1: x[1],
        dsp2: x[2],
        dm2: x[3],
        f12,
        f21,
        residual,
        non_unique: !others.is_empty(),
        alternatives: others.iter().map(CoolingRates::from_vec).collect(),
    })
}
