//! Exact tail asymptotics `pi(k, .) ~ C(.) gamma^k`.
//!
//! The prefactors come from the twisted free process: with `eta` the
//! escape-weighted boundary mass, `d` the twisted drift and `phi` the
//! stationary phase law,
//! `pi(l, s) ~ eta phi(s) / (d h(l, s))`.

mod escape;
mod fit;
mod limits;
mod rsrd;
mod tandem;

pub use escape::{
    escape_from_level_one, escape_probabilities, first_passage_matrix, twisted_blocks, EscapeProbabilities,
    LevelBlocks,
};
pub use fit::{fit_log_points, fit_points, tail_fit, two_term_from_values, TailFit, TwoTermTail, MIN_FIT_POINTS};
pub use limits::{alpha_limits, mm1_comparison, mm1_stationary, AlphaLimits, LimitCase, LimitEntry, Mm1Comparison, SMALL_ALPHA};
pub use rsrd::{row_tail_sums, rs_rd_stationary};
pub use tandem::{tandem_eta, EtaOptions};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::params::{Model, ModelParams};
use crate::qbd::Model1Solution;
use crate::spectral;
use crate::twist;

/// Value of `eta` with its Monte Carlo uncertainty (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EtaEstimate {
    pub value: f64,
    pub std_error: f64,
    /// 95% confidence interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl EtaEstimate {
    fn exact(value: f64) -> Self {
        EtaEstimate {
            value,
            std_error: 0.0,
            ci_low: value,
            ci_high: value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Provenance {
    ClosedForm,
    MonteCarlo,
    ShapeOnly,
    Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailAsymptotic {
    pub model: Model,
    /// Dominant decay rate.
    pub gamma: f64,
    pub prefactor_up: Option<f64>,
    pub prefactor_down: Option<f64>,
    pub eta: Option<EtaEstimate>,
    /// `H(0, Up)`, `H(0, Down)` (Model 1).
    pub escape_probs: Option<[f64; 2]>,
    /// Twisted drift per uniformized step.
    pub drift: Option<f64>,
    /// Subdominant eigenvalue of `R` (Model 1).
    pub secondary_gamma: Option<f64>,
    /// Fitted weight of the subdominant term (Model 1).
    pub secondary_weight: Option<f64>,
    pub provenance: Provenance,
}

/// `eta` for Model 1: `sum_s pi(0, s) h(0, s) H(0, s)`.
pub fn eta_model1(params: &ModelParams) -> Result<(EtaEstimate, EscapeProbabilities)> {
    let sol = Model1Solution::solve(params)?;
    let h = twist::harmonic(params, Model::Model1)?;
    let esc = escape_probabilities(params)?;
    let value = sol.pi0[0] * h.up_weight * esc.from_zero[0] + sol.pi0[1] * h.down_weight * esc.from_zero[1];
    Ok((EtaEstimate::exact(value), esc))
}

/// `eta` for Model 1 (exact) or the tandem (Monte Carlo with default
/// options).
pub fn eta(params: &ModelParams, model: Model) -> Result<EtaEstimate> {
    match model {
        Model::Model1 => Ok(eta_model1(params)?.0),
        Model::Model2 => tandem_eta(params, &EtaOptions::default()),
        Model::RsRd => Err(Error::Unsupported("eta is defined for Model 1 and Model 2")),
    }
}

/// Tail constants with default Monte Carlo options for the tandem.
pub fn prefactors(params: &ModelParams, model: Model) -> Result<TailAsymptotic> {
    prefactors_with(params, model, &EtaOptions::default())
}

pub fn prefactors_with(params: &ModelParams, model: Model, options: &EtaOptions) -> Result<TailAsymptotic> {
    params.validate(model)?;
    params.require_stable()?;
    let roots = spectral::characteristic_roots(params);
    match model {
        Model::Model1 => {
            let (eta, esc) = eta_model1(params)?;
            let drift = twist::horizontal_drift(params, model)?.closed_form;
            let (up, down) = phase_factors(params, &roots);
            let scale = eta.value / drift;
            let tt = two_term_with(params, scale * up, TWO_TERM_WINDOW)?;
            Ok(TailAsymptotic {
                model,
                gamma: roots.gamma_p,
                prefactor_up: Some(scale * up),
                prefactor_down: Some(scale * down),
                eta: Some(eta),
                escape_probs: Some(esc.from_zero),
                drift: Some(drift),
                secondary_gamma: Some(roots.gamma_secondary),
                secondary_weight: Some(tt.w3),
                provenance: Provenance::ClosedForm,
            })
        }
        Model::Model2 if params.p == 1.0 => {
            let eta = tandem_eta(params, options)?;
            let drift = twist::horizontal_drift(params, model)?.closed_form;
            let b = twist::model2_twist_rates(params)?.b;
            let (up, down) = phase_factors(params, &roots);
            let scale = eta.value / drift * b;
            Ok(TailAsymptotic {
                model,
                gamma: roots.gamma_p,
                prefactor_up: Some(scale * up),
                prefactor_down: Some(scale * down),
                eta: Some(eta),
                escape_probs: None,
                drift: Some(drift),
                secondary_gamma: None,
                secondary_weight: None,
                provenance: Provenance::MonteCarlo,
            })
        }
        Model::Model2 => Ok(TailAsymptotic {
            model,
            gamma: roots.gamma_p,
            prefactor_up: None,
            prefactor_down: None,
            eta: None,
            escape_probs: None,
            drift: None,
            secondary_gamma: None,
            secondary_weight: None,
            provenance: Provenance::ShapeOnly,
        }),
        Model::RsRd => Err(Error::Unsupported("use rs_rd_stationary for the RS-RD network")),
    }
}

/// `phi(Up) / h(0, Up)` and `phi(Down) / h(0, Down)`, i.e.
/// `(lambda + beta - mu - alpha + sqrt(s)) / (2 G)` and `alpha / G`.
fn phase_factors(params: &ModelParams, roots: &spectral::SpectralSolution) -> (f64, f64) {
    let g = roots.g_constant.expect("p = 1");
    let dp = spectral::down_weight_denominator(params, roots.sqrt_s_p);
    (dp / (2.0 * g), params.alpha / g)
}

/// Levels used to fit the subdominant weight.
pub const TWO_TERM_WINDOW: usize = 20;

/// Two-term expansion of the Model 1 `Up` tail: `w2` is the closed
/// prefactor and `w3` is fitted on levels `0..=k_fit`.
pub fn two_term_tail(params: &ModelParams, k_fit: usize) -> Result<TwoTermTail> {
    let roots = spectral::characteristic_roots(params);
    let (eta, _) = eta_model1(params)?;
    let drift = twist::horizontal_drift(params, Model::Model1)?.closed_form;
    two_term_with(params, eta.value / drift * phase_factors(params, &roots).0, k_fit)
}

fn two_term_with(params: &ModelParams, w2: f64, k_fit: usize) -> Result<TwoTermTail> {
    let sol = Model1Solution::solve(params)?;
    let roots = spectral::characteristic_roots(params);
    let mut values = Vec::with_capacity(k_fit + 1);
    let mut v = sol.pi0;
    for _ in 0..=k_fit {
        values.push(v[0]);
        v = sol.r.left_mul(v);
    }
    Ok(two_term_from_values(&values, w2, roots.gamma_p, roots.gamma_secondary))
}
