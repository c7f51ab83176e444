//! Linear zero-noise extrapolation over CNOT fold counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Estimate;

/// A value measured with each CNOT repeated `m` times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZnePoint {
    pub m: u32,
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZneFit {
    /// Fitted value at `m = 0`.
    pub intercept: Estimate,
    pub slope: f64,
}

/// Fits `value = intercept + slope * m` by weighted least squares
/// (weights `1/se^2`, or unit weights when any `se` is zero).
pub fn zne_extrapolate(points: &[ZnePoint]) -> Result<ZneFit> {
    if points.len() < 2 {
        return Err(Error::invalid("extrapolation needs at least two points"));
    }
    if let Some(p) = points.iter().find(|p| p.m % 2 == 0) {
        return Err(Error::invalid(format!("fold counts must be odd, got {}", p.m)));
    }
    let weighted = points.iter().all(|p| p.se > 0.0);
    let w: Vec<f64> = points
        .iter()
        .map(|p| if weighted { 1.0 / (p.se * p.se) } else { 1.0 })
        .collect();
    let sw: f64 = w.iter().sum();
    let mean_x = points.iter().zip(&w).map(|(p, w)| w * p.m as f64).sum::<f64>() / sw;
    let mean_y = points.iter().zip(&w).map(|(p, w)| w * p.value).sum::<f64>() / sw;
    let sxx: f64 = points
        .iter()
        .zip(&w)
        .map(|(p, w)| w * (p.m as f64 - mean_x).powi(2))
        .sum();
    if sxx <= 0.0 {
        return Err(Error::invalid("fold counts must not all be equal"));
    }
    let sxy: f64 = points
        .iter()
        .zip(&w)
        .map(|(p, w)| w * (p.m as f64 - mean_x) * (p.value - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    // Var(intercept) = sigma^2 (1/sw + mean_x^2/sxx); sigma^2 = 1 with known
    // errors, residual variance otherwise.
    let sigma2 = if weighted {
        1.0
    } else if points.len() > 2 {
        let rss: f64 = points
            .iter()
            .map(|p| (p.value - intercept - slope * p.m as f64).powi(2))
            .sum();
        rss / (points.len() - 2) as f64
    } else {
        0.0
    };
    let se = (sigma2 * (1.0 / sw + mean_x * mean_x / sxx)).sqrt();
    Ok(ZneFit {
        intercept: Estimate::new(intercept, se),
        slope,
    })
}
