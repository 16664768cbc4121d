//! Feynman-Kac kernel of the free process, the characteristic equation
//! for the decay rate, and the closed-form stability test.

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::math;
use crate::params::{Model, ModelParams};

/// Roots of the characteristic equation and the constants derived from
/// them.
///
/// With `t = e^theta`, the Perron root of the Feynman-Kac kernel equals one
/// at `t = 1` and at the two roots `t1 >= t2` of
/// `lambda^2 t^2 - lambda (mu p + lambda + alpha + beta) t + mu p (lambda + beta)`.
/// Only `t2` is a genuine solution; `1 / t1` is the second eigenvalue of
/// the rate matrix of the matrix-geometric solution.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralSolution {
    /// `(mu p - lambda - beta - alpha)^2 + 4 alpha mu p`, always positive.
    pub s_p: f64,
    pub sqrt_s_p: f64,
    pub t1: f64,
    pub t2: f64,
    /// Dominant decay rate `1 / t2`.
    pub gamma_p: f64,
    /// `1 / t1`; for `p = 1` the subdominant eigenvalue of the rate matrix.
    pub gamma_secondary: f64,
    /// Normalizer of the twisted phase chain, defined for `p = 1` only.
    pub g_constant: Option<f64>,
    /// Whether `t2` satisfies the sign condition that rules out the
    /// spurious root introduced by squaring.
    pub t2_valid: bool,
}

/// `lambda + beta - mu p - alpha + sqrt(s_p)`, evaluated without
/// cancellation.
///
/// Uses `s_p - (mu p + alpha - lambda - beta)^2 = 4 alpha (lambda + beta)`.
pub(crate) fn down_weight_denominator(params: &ModelParams, sqrt_s: f64) -> f64 {
    let ModelParams {
        lambda,
        mu,
        alpha,
        beta,
        p,
        ..
    } = *params;
    let q = mu * p + alpha - lambda - beta;
    if q > 0.0 {
        4.0 * alpha * (lambda + beta) / (sqrt_s + q)
    } else {
        sqrt_s - q
    }
}

/// `s_p` and its square root.
pub(crate) fn discriminant(params: &ModelParams) -> (f64, f64) {
    let ModelParams {
        lambda,
        mu,
        alpha,
        beta,
        p,
        ..
    } = *params;
    let mp = mu * p;
    let d = mp - lambda - beta - alpha;
    let s = d * d + 4.0 * alpha * mp;
    (s, math::sqrt(s))
}

pub fn characteristic_roots(params: &ModelParams) -> SpectralSolution {
    let ModelParams {
        lambda,
        mu,
        alpha,
        beta,
        p,
        ..
    } = *params;
    let mp = mu * p;
    let (s_p, sqrt_s) = discriminant(params);
    let sum = mp + lambda + alpha + beta;
    let t1 = (sum + sqrt_s) / (2.0 * lambda);
    // product of the roots is mu p (lambda + beta) / lambda^2
    let t2 = mp * (lambda + beta) / (lambda * lambda * t1);
    let g_constant = (p == 1.0).then(|| {
        let dp = down_weight_denominator(params, sqrt_s);
        dp / 2.0 + 2.0 * alpha * beta / dp
    });
    SpectralSolution {
        s_p,
        sqrt_s_p: sqrt_s,
        t1,
        t2,
        gamma_p: 1.0 / t2,
        gamma_secondary: 1.0 / t1,
        g_constant,
        t2_valid: sign_condition(params, t2) < 0.0,
    }
}

/// `2 lambda t^2 - (alpha + beta + mu p + 2 lambda) t + mu p`; negative
/// exactly when the squared-away square root equation holds with a
/// positive right-hand side.
pub fn sign_condition(params: &ModelParams, t: f64) -> f64 {
    let ModelParams {
        lambda,
        mu,
        alpha,
        beta,
        p,
        ..
    } = *params;
    let mp = mu * p;
    2.0 * lambda * t * t - (alpha + beta + mp + 2.0 * lambda) * t + mp
}

/// The cubic whose roots are `1`, `t1`, `t2` (with `mu p` in place of `mu`).
pub fn characteristic_cubic(params: &ModelParams, t: f64) -> f64 {
    let ModelParams {
        lambda,
        mu,
        alpha,
        beta,
        p,
        ..
    } = *params;
    let mp = mu * p;
    let l2 = lambda * lambda;
    l2 * t * t * t - lambda * (beta + alpha + 2.0 * lambda + mp) * t * t
        + (lambda * (alpha + 2.0 * mp + beta + lambda) + mp * beta) * t
        - mp * (lambda + beta)
}

/// Feynman-Kac kernel `K_theta(s, s') = sum_z K((0,s),(z,s')) e^{theta z}`
/// of the Model 1 free process and its Perron root.
pub fn feynman_kac(params: &ModelParams, theta: f64) -> Result<(Mat2, f64)> {
    if params.p != 1.0 {
        return Err(Error::Unsupported("the Feynman-Kac kernel is defined for Model 1 (p = 1)"));
    }
    let ModelParams {
        lambda,
        mu,
        alpha,
        beta,
        c,
        ..
    } = *params;
    let up = math::exp(theta);
    let down = math::exp(-theta);
    let k = Mat2::new(
        lambda / c * up + 1.0 - (alpha + mu + lambda) / c + mu / c * down,
        alpha / c,
        beta / c,
        lambda / c * up + 1.0 - (lambda + beta) / c,
    );
    let (largest, _) = k.real_eigenvalues()?;
    Ok((k, largest))
}

/// Both eigenvalues of `K_theta`, largest first.
pub fn feynman_kac_eigenvalues(params: &ModelParams, theta: f64) -> Result<(f64, f64)> {
    let (k, _) = feynman_kac(params, theta)?;
    k.real_eigenvalues()
}

/// How strong the stability statement is for a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StabilityKind {
    IfAndOnlyIf,
    Sufficient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Stability {
    pub stable: bool,
    /// `beta / (alpha + beta) * mu`.
    pub effective_rate: f64,
    pub kind: StabilityKind,
}

/// `lambda < beta / (alpha + beta) * mu * p`.
pub fn stability(params: &ModelParams, model: Model) -> Stability {
    let effective_rate = params.effective_rate();
    let kind = match model {
        Model::Model1 => StabilityKind::IfAndOnlyIf,
        Model::Model2 | Model::RsRd if params.p == 1.0 => StabilityKind::IfAndOnlyIf,
        _ => StabilityKind::Sufficient,
    };
    Stability {
        stable: params.lambda < effective_rate * params.p,
        effective_rate,
        kind,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params_a() -> ModelParams {
        ModelParams::new(10.0, 11.0, 0.1, 10.0, 1.0, 31.1)
    }

    fn params_b() -> ModelParams {
        ModelParams::new(20.0, 60.0, 0.01, 1.0, 1.0, 81.01)
    }

    fn params_m2() -> ModelParams {
        ModelParams::new(10.0, 30.0, 0.1, 10.0, 0.5, 80.1)
    }

    /// Bisection for a sign change of `f` on `[lo, hi]`.
    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let flo = f(lo);
        assert!(flo * f(hi) < 0.0, "no bracket");
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) < 0.0) == (flo < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Oracle roots found by bisection on the cubic.
    fn oracle_roots(p: &ModelParams) -> (f64, f64) {
        let sum = p.mu * p.p + p.lambda + p.alpha + p.beta;
        let vertex = sum / (2.0 * p.lambda);
        let w = |t| characteristic_cubic(p, t);
        let t2 = bisect(w, 1.0 + 1e-13, vertex);
        let t1 = bisect(w, vertex, sum / p.lambda);
        (t1, t2)
    }

    #[test]
    fn params_a_constants() {
        let s = characteristic_roots(&params_a());
        assert_relative_eq!(s.s_p, 87.21, max_relative = 1e-13);
        assert_relative_eq!(s.sqrt_s_p, 9.338_629, max_relative = 1e-6);
        assert_relative_eq!(s.gamma_p, 0.919_060, max_relative = 1e-6);
        assert_relative_eq!(s.gamma_secondary, 0.494_577, max_relative = 1e-6);
        assert_relative_eq!(s.g_constant.unwrap(), 9.228_972, max_relative = 1e-6);
        assert!(s.t2_valid);
        assert!(sign_condition(&params_a(), s.t1) > 0.0);

        let (t1, t2) = oracle_roots(&params_a());
        assert_relative_eq!(s.t1, t1, epsilon = 1e-10);
        assert_relative_eq!(s.t2, t2, epsilon = 1e-10);
    }

    #[test]
    fn params_b_constants() {
        let s = characteristic_roots(&params_b());
        assert_relative_eq!(s.gamma_p, 0.952_626, max_relative = 1e-6);
        assert_relative_eq!(s.gamma_secondary, 0.333_248, max_relative = 1e-6);
        // close to the alpha -> 0 limits lambda/(lambda+beta) and lambda/mu
        assert!((s.gamma_p - 20.0 / 21.0).abs() < 1e-3);
        assert!((s.gamma_secondary - 1.0 / 3.0).abs() < 1e-3);
        let (t1, t2) = oracle_roots(&params_b());
        assert_relative_eq!(s.t1, t1, epsilon = 1e-10);
        assert_relative_eq!(s.t2, t2, epsilon = 1e-10);
    }

    #[test]
    fn model2_half_feedback() {
        let s = characteristic_roots(&params_m2());
        assert_relative_eq!(s.s_p, 32.01, max_relative = 1e-13);
        assert_relative_eq!(s.gamma_p, 0.679_296, max_relative = 1e-6);
        assert!(s.g_constant.is_none());
        let (_, t2) = oracle_roots(&params_m2());
        assert_relative_eq!(s.t2, t2, epsilon = 1e-10);
    }

    #[test]
    fn cubic_vanishes_at_roots() {
        for p in [params_a(), params_b(), params_m2()] {
            let s = characteristic_roots(&p);
            let scale = p.lambda * p.lambda * s.t1.powi(3);
            assert!(characteristic_cubic(&p, 1.0).abs() < 1e-12 * scale);
            assert!(characteristic_cubic(&p, s.t1).abs() < 1e-9 * scale);
            assert!(characteristic_cubic(&p, s.t2).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn feynman_kac_at_zero_is_stochastic() {
        let (k, root) = feynman_kac(&params_a(), 0.0).unwrap();
        for r in k.row_sums() {
            assert_relative_eq!(r, 1.0, epsilon = 1e-15);
        }
        assert_relative_eq!(root, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn feynman_kac_root_selects_t2() {
        let p = params_a();
        let s = characteristic_roots(&p);
        let (_, root) = feynman_kac(&p, s.t2.ln()).unwrap();
        assert_relative_eq!(root, 1.0, epsilon = 1e-9);
        assert_relative_eq!(s.t2, 1.088_069, max_relative = 1e-6);

        // independent oracle: bisection on k1(theta) - 1 away from theta = 0
        let k1 = |theta: f64| feynman_kac(&p, theta).unwrap().1 - 1.0;
        let theta = bisect(k1, 1e-6, 0.5 * (s.t1.ln() + s.t2.ln()));
        assert_relative_eq!(theta, s.t2.ln(), epsilon = 1e-9);

        // the spurious root t1 gives a Perron root different from one,
        // the smaller eigenvalue equals one there instead
        let (large, small) = feynman_kac_eigenvalues(&p, s.t1.ln()).unwrap();
        assert!((large - 1.0).abs() > 1e-3);
        assert_relative_eq!(small, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn feynman_kac_needs_p_one() {
        assert!(feynman_kac(&params_m2(), 0.0).is_err());
    }

    #[test]
    fn stability_examples() {
        let s = stability(&params_a(), Model::Model1);
        assert!(s.stable);
        assert_relative_eq!(s.effective_rate, 10.891_089, max_relative = 1e-6);
        assert_eq!(s.kind, StabilityKind::IfAndOnlyIf);

        let unstable = ModelParams::new(11.0, 11.0, 0.1, 10.0, 1.0, 32.1);
        assert!(!stability(&unstable, Model::Model1).stable);

        let s = stability(&params_m2(), Model::Model2);
        assert!(s.stable);
        assert_relative_eq!(s.effective_rate * 0.5, 14.851_485, max_relative = 1e-6);
        assert_eq!(s.kind, StabilityKind::Sufficient);
    }

    #[test]
    fn small_alpha_keeps_precision() {
        // mu > lambda + beta: the down-weight denominator is O(alpha)
        let p = ModelParams::new(20.0, 60.0, 1e-9, 1.0, 1.0, 81.0);
        let (_, sqrt_s) = discriminant(&p);
        let dp = down_weight_denominator(&p, sqrt_s);
        // exact value 4 alpha (lambda + beta) / (2 (mu - lambda - beta)) to first order
        assert_relative_eq!(dp, 4e-9 * 21.0 / 78.0, max_relative = 1e-6);
    }
}
