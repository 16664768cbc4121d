use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::params::{Model, ModelParams};
use crate::spectral;
use crate::twist;

/// Breakdown rate at which limits are evaluated numerically.
pub const SMALL_ALPHA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LimitCase {
    /// `mu p < lambda + beta`.
    ServiceBelow,
    /// `mu p > lambda + beta`.
    ServiceAbove,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LimitEntry {
    pub name: &'static str,
    /// Limit as `alpha -> 0`.
    pub stated: f64,
    /// Value at `alpha = 1e-6`.
    pub numeric: f64,
    /// `|numeric - stated|`, relative to `|stated|` when that is nonzero.
    pub gap: f64,
}

impl LimitEntry {
    fn new(name: &'static str, stated: f64, numeric: f64) -> Self {
        let diff = (numeric - stated).abs();
        LimitEntry {
            name,
            stated,
            numeric,
            gap: if stated != 0.0 { diff / stated.abs() } else { diff },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AlphaLimits {
    pub model: Model,
    pub case: LimitCase,
    pub alpha: f64,
    pub entries: Vec<LimitEntry>,
}

impl AlphaLimits {
    pub fn entry(&self, name: &str) -> Option<&LimitEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Limits of the tail constants as the breakdown rate vanishes, next to
/// their values at `alpha = 1e-6`.
///
/// The `B` entry for `mu > lambda + beta` carries the stated expression
/// `(mu - (alpha + beta)) / mu` at `alpha = 0`; its gap shows that the
/// numerical limit is `(mu - lambda - beta) / mu` instead.
pub fn alpha_limits(lambda: f64, mu: f64, beta: f64, p: f64, model: Model) -> Result<AlphaLimits> {
    let params = ModelParams::with_default_uniformization(lambda, mu, SMALL_ALPHA, beta, p, model)?;
    params.require_stable()?;
    let mp = mu * p;
    let case = if mp < lambda + beta {
        LimitCase::ServiceBelow
    } else if mp > lambda + beta {
        LimitCase::ServiceAbove
    } else {
        return Err(Error::Degenerate("degenerate case, limit split undefined (mu p = lambda + beta)"));
    };
    let below = case == LimitCase::ServiceBelow;
    let roots = spectral::characteristic_roots(&params);
    let c = params.c;
    let mut entries = Vec::new();
    entries.push(LimitEntry::new(
        "gamma_1",
        if below { lambda / mp } else { lambda / (lambda + beta) },
        roots.gamma_p,
    ));
    entries.push(LimitEntry::new(
        "gamma",
        if below { lambda / (lambda + beta) } else { lambda / mp },
        roots.gamma_secondary,
    ));
    if p == 1.0 {
        let g = roots.g_constant.expect("p = 1");
        entries.push(LimitEntry::new(
            "G",
            if below {
                lambda + beta - mu
            } else {
                beta * (mu - lambda - beta) / (lambda + beta)
            },
            g,
        ));
        let drift = twist::horizontal_drift(&params, model)?.closed_form;
        entries.push(LimitEntry::new(
            "c_times_drift",
            if below { mu - lambda } else { lambda + beta },
            c * drift,
        ));
        match model {
            Model::Model1 => {
                let pre = super::prefactors(&params, Model::Model1)?;
                let eta = pre.eta.expect("closed-form eta").value;
                let up = pre.prefactor_up.expect("closed-form prefactor");
                let down = pre.prefactor_down.expect("closed-form prefactor");
                if below {
                    entries.push(LimitEntry::new("prefactor_up_over_eta", c / (mu - lambda), up / eta));
                } else {
                    entries.push(LimitEntry::new("prefactor_up", 0.0, up));
                }
                entries.push(LimitEntry::new("prefactor_down", 0.0, down));
            }
            Model::Model2 => {
                let rates = twist::model2_twist_rates(&params)?;
                entries.push(LimitEntry::new("B", if below { 0.0 } else { (mu - beta) / mu }, rates.b));
            }
            Model::RsRd => return Err(Error::Unsupported("limits are stated for Model 1 and Model 2")),
        }
    } else if model == Model::Model1 {
        return Err(Error::InvalidParameter("p must be 1 for model1".into()));
    }
    Ok(AlphaLimits {
        model,
        case,
        alpha: SMALL_ALPHA,
        entries,
    })
}

/// Model 1 against the M/M/1 queue with the same arrivals and the
/// long-run service rate `beta mu / (alpha + beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mm1Comparison {
    pub gamma_1: f64,
    /// Geometric ratio `(alpha + beta) lambda / (beta mu)` of the M/M/1 queue.
    pub mm1_ratio: f64,
    /// `gamma_1 >= mm1_ratio`.
    pub dominance: bool,
}

pub fn mm1_comparison(params: &ModelParams) -> Result<Mm1Comparison> {
    params.require_stable()?;
    let gamma_1 = spectral::characteristic_roots(params).gamma_p;
    let mm1_ratio = params.lambda / params.effective_rate();
    Ok(Mm1Comparison {
        gamma_1,
        mm1_ratio,
        dominance: gamma_1 >= mm1_ratio,
    })
}

/// `pi_0(l) = (1 - rho) rho^l` of the matched M/M/1 queue.
pub fn mm1_stationary(params: &ModelParams, l: u32) -> f64 {
    let rho = params.lambda / params.effective_rate();
    (1.0 - rho) * crate::math::powi(rho, i64::from(l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_limits_follow_case_split() {
        let l = alpha_limits(10.0, 11.0, 10.0, 1.0, Model::Model1).unwrap();
        assert_eq!(l.case, LimitCase::ServiceBelow);
        let g = l.entry("gamma_1").unwrap();
        assert_relative_eq!(g.stated, 10.0 / 11.0);
        assert!(g.gap < 1e-5);
        let l = alpha_limits(20.0, 60.0, 1.0, 1.0, Model::Model1).unwrap();
        assert_eq!(l.case, LimitCase::ServiceAbove);
        assert_relative_eq!(l.entry("gamma_1").unwrap().stated, 20.0 / 21.0);
        assert!(l.entry("gamma_1").unwrap().gap < 1e-5);
    }

    #[test]
    fn g_limit_is_lambda_plus_beta_minus_mu() {
        let l = alpha_limits(10.0, 11.0, 10.0, 1.0, Model::Model1).unwrap();
        let g = l.entry("G").unwrap();
        assert_eq!(g.stated, 9.0);
        assert!(g.gap < 1e-4, "{g:?}");
    }

    #[test]
    fn model1_constant_limits() {
        for (lambda, mu, beta) in [(10.0, 11.0, 10.0), (20.0, 60.0, 1.0)] {
            let l = alpha_limits(lambda, mu, beta, 1.0, Model::Model1).unwrap();
            for e in &l.entries {
                assert!(e.gap < 1e-3, "{e:?}");
            }
        }
    }

    #[test]
    fn b_limit_discrepancy_is_reported() {
        let l = alpha_limits(20.0, 60.0, 1.0, 1.0, Model::Model2).unwrap();
        let b = l.entry("B").unwrap();
        assert_relative_eq!(b.numeric, 39.0 / 60.0, max_relative = 1e-5);
        assert!(b.gap > 0.3);
        let l = alpha_limits(10.0, 11.0, 10.0, 1.0, Model::Model2).unwrap();
        assert!(l.entry("B").unwrap().numeric < 1e-5);
    }

    #[test]
    fn equality_case_rejected() {
        let err = alpha_limits(10.0, 20.0, 10.0, 1.0, Model::Model1).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn mm1_examples() {
        let a = ModelParams::new(10.0, 11.0, 0.1, 10.0, 1.0, 31.1);
        let m = mm1_comparison(&a).unwrap();
        assert_relative_eq!(m.mm1_ratio, 1.01 * 10.0 / 11.0, max_relative = 1e-14);
        assert!(m.dominance);
        let b = ModelParams::new(20.0, 60.0, 0.01, 1.0, 1.0, 81.01);
        let m = mm1_comparison(&b).unwrap();
        assert_relative_eq!(m.mm1_ratio, 1.01 / 3.0, max_relative = 1e-14);
        assert!(m.dominance);
        let total: f64 = (0..2000).map(|l| mm1_stationary(&a, l)).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mm1_ratios_merge_as_alpha_vanishes() {
        let a = ModelParams::with_default_uniformization(10.0, 11.0, 1e-8, 10.0, 1.0, Model::Model1).unwrap();
        let m = mm1_comparison(&a).unwrap();
        assert!((m.gamma_1 - m.mm1_ratio).abs() < 1e-6);
    }
}
