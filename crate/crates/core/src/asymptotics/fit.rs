use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::params::ServerStatus;
use crate::qbd::StationaryTable;

/// Least-squares line through `(k, ln pi_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailFit {
    /// `exp(slope)`.
    pub gamma_est: f64,
    /// Intercept of the line.
    pub log_prefactor_est: f64,
    pub k_window: (i64, i64),
    /// `max |pi_k / (prefactor gamma^k) - 1|` over the window.
    pub max_relative_deviation: f64,
}

impl TailFit {
    pub fn predict(&self, k: i64) -> f64 {
        math::exp(self.log_prefactor_est + k as f64 * math::ln(self.gamma_est))
    }
}

pub const MIN_FIT_POINTS: usize = 5;
const MIN_PROBABILITY: f64 = 1e-300;

/// Fit `ln pi(k, y, status)` for `k` in `k_min..=k_max` at fixed `y`.
pub fn tail_fit(table: &StationaryTable, y: i64, status: ServerStatus, k_min: i64, k_max: i64) -> Result<TailFit> {
    let points: Vec<(i64, f64)> = (k_min..=k_max).map(|k| (k, table.at(k, y, status))).collect();
    fit_points(&points)
}

/// Fit over explicit `(k, pi_k)` pairs.
pub fn fit_points(points: &[(i64, f64)]) -> Result<TailFit> {
    if points.iter().any(|&(_, p)| !(p > MIN_PROBABILITY)) {
        return Err(Error::EmptyWindow("fit window contains probabilities at or below 1e-300"));
    }
    let logs: Vec<(i64, f64)> = points.iter().map(|&(k, p)| (k, math::ln(p))).collect();
    fit_log_points(&logs)
}

/// Fit over `(k, ln pi_k)` pairs, for values that would underflow.
pub fn fit_log_points(points: &[(i64, f64)]) -> Result<TailFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::EmptyWindow("tail fit needs at least 5 points"));
    }
    let n = points.len() as f64;
    let mean_k = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let mean_l = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(k, l) in points {
        let dk = k as f64 - mean_k;
        sxy += dk * (l - mean_l);
        sxx += dk * dk;
    }
    let slope = sxy / sxx;
    let intercept = mean_l - slope * mean_k;
    let max_relative_deviation = points
        .iter()
        .map(|&(k, l)| (math::exp(l - intercept - slope * k as f64) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(TailFit {
        gamma_est: math::exp(slope),
        log_prefactor_est: intercept,
        k_window: (points[0].0, points[points.len() - 1].0),
        max_relative_deviation,
    })
}

/// `pi(k, Up) = w2 gamma_1^k + w3 gamma^k` for the Model 1 exact table.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoTermTail {
    pub w2: f64,
    pub w3: f64,
    pub gamma_1: f64,
    pub gamma: f64,
    /// `max |pi - w2 gamma_1^k - w3 gamma^k| / pi` over the fit window.
    pub max_relative_residual: f64,
    /// Set when the residual after removing the first term is not
    /// geometric in `gamma` to within `1e-6`.
    pub warning: bool,
}

/// `w2` is the closed prefactor; `w3` is fitted by least squares on
/// `pi(k, Up) - w2 gamma_1^k` for `k` in `0..=k_fit`.
pub fn two_term_from_values(pi_up: &[f64], w2: f64, gamma_1: f64, gamma: f64) -> TwoTermTail {
    let (mut num, mut den) = (0.0, 0.0);
    for (k, &p) in pi_up.iter().enumerate() {
        let g = math::powi(gamma, k as i64);
        num += (p - w2 * math::powi(gamma_1, k as i64)) * g;
        den += g * g;
    }
    let w3 = num / den;
    let max_relative_residual = pi_up
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let model = w2 * math::powi(gamma_1, k as i64) + w3 * math::powi(gamma, k as i64);
            ((p - model) / p).abs()
        })
        .fold(0.0, f64::max);
    TwoTermTail {
        w2,
        w3,
        gamma_1,
        gamma,
        max_relative_residual,
        warning: max_relative_residual > 1e-6,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn geometric_points_fit_exactly() {
        let pts: Vec<(i64, f64)> = (0..20).map(|k| (k, 3.0 * 0.5_f64.powi(k as i32))).collect();
        let f = fit_points(&pts).unwrap();
        assert_relative_eq!(f.gamma_est, 0.5, max_relative = 1e-14);
        assert_relative_eq!(f.predict(4), 3.0 / 16.0, max_relative = 1e-13);
        assert!(f.max_relative_deviation < 1e-13);
    }

    #[test]
    fn short_window_rejected() {
        let pts: Vec<(i64, f64)> = (0..4).map(|k| (k, 0.5_f64.powi(k as i32))).collect();
        assert!(matches!(fit_points(&pts), Err(Error::EmptyWindow(_))));
        assert!(fit_points(&[(0, 1.0), (1, 0.0), (2, 0.1), (3, 0.1), (4, 0.1)]).is_err());
    }

    #[test]
    fn two_term_recovers_weights() {
        let vals: Vec<f64> = (0..30).map(|k| 0.2 * 0.9_f64.powi(k) + 0.7 * 0.4_f64.powi(k)).collect();
        let t = two_term_from_values(&vals, 0.2, 0.9, 0.4);
        assert_relative_eq!(t.w3, 0.7, max_relative = 1e-12);
        assert!(!t.warning);
    }
}
