//! Harmonic functions of the free processes and the h-transformed
//! ("twisted") kernels built from them.
//!
//! Under the twist the large-queue behaviour of the original chain becomes
//! typical: the twisted free process drifts to `+inf` in `x`, and its
//! phase (Markovian part) has a stationary law `phi`. The drift and `phi`
//! enter the tail constants in [`crate::asymptotics`].

use alloc::vec::Vec;

use arrayvec::ArrayVec;

use crate::error::{Error, Result};
use crate::kernels::{self, TransitionRow};
use crate::linalg::Mat2;
use crate::math;
use crate::params::{Model, ModelParams, ServerStatus, State};
use crate::spectral::{self, SpectralSolution};

/// `h(x, U) = base^x`, `h(x, D) = base^x * down_weight` for Model 1 and
/// `base^(x + y)` times the same weights for Model 2.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HarmonicFunction {
    pub model: Model,
    /// `1 / gamma_p`.
    pub base: f64,
    /// Weight of `Up` states, fixed to 1.
    pub up_weight: f64,
    pub down_weight: f64,
}

impl HarmonicFunction {
    pub fn weight(&self, status: ServerStatus) -> f64 {
        match status {
            ServerStatus::Up => self.up_weight,
            ServerStatus::Down => self.down_weight,
        }
    }

    fn exponent(&self, state: &State) -> i64 {
        match self.model {
            Model::Model1 => state.x,
            _ => state.x + state.y,
        }
    }

    pub fn eval(&self, state: &State) -> f64 {
        math::powi(self.base, self.exponent(state)) * self.weight(state.status)
    }

    /// `h(to) / h(from)` without forming either value.
    pub fn ratio(&self, from: &State, to: &State) -> f64 {
        let steps = self.exponent(to) - self.exponent(from);
        math::powi(self.base, steps) * self.weight(to.status) / self.weight(from.status)
    }
}

/// Harmonic function of the free process of Model 1 or Model 2.
pub fn harmonic(params: &ModelParams, model: Model) -> Result<HarmonicFunction> {
    if model == Model::RsRd {
        return Err(Error::Unsupported("the RS-RD network has no free process here"));
    }
    params.require_stable()?;
    let roots = spectral::characteristic_roots(params);
    let dp = spectral::down_weight_denominator(params, roots.sqrt_s_p);
    Ok(HarmonicFunction {
        model,
        base: roots.t2,
        up_weight: 1.0,
        down_weight: 2.0 * params.beta / dp,
    })
}

/// Row of the twisted free kernel `K(a, b) h(b) / h(a)`.
pub fn twisted_kernel(params: &ModelParams, state: State) -> Result<TransitionRow> {
    let h = harmonic(params, state.model)?;
    twisted_row(params, &h, state)
}

pub(crate) fn twisted_row(params: &ModelParams, h: &HarmonicFunction, state: State) -> Result<TransitionRow> {
    let free = kernels::free_kernel(params, state)?;
    let targets: ArrayVec<(State, f64), { kernels::MAX_TARGETS }> = free
        .iter()
        .map(|(to, p)| (*to, p * h.ratio(&state, to)))
        .collect();
    Ok(TransitionRow { origin: state, targets })
}

/// Twisted rates of the Model 2 tandem (`p = 1`), per uniformized step.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwistRates {
    /// Twisted arrival probability (`y -> y + 1`).
    pub lambda: f64,
    /// Server-2 service probability (`y -> y - 1`), unchanged by the twist.
    pub mu: f64,
    /// Twisted `Up -> Down` probability.
    pub alpha: f64,
    /// Twisted `Down -> Up` probability.
    pub beta: f64,
    /// `1 - lambda / mu`.
    pub b: f64,
}

impl TwistRates {
    pub fn load(&self) -> f64 {
        self.lambda / self.mu
    }
}

/// The four twisted phase rates; valid for Model 1 and Model 2 with `p = 1`.
fn twisted_phase_rates(params: &ModelParams, roots: &SpectralSolution) -> TwistRates {
    let ModelParams {
        lambda,
        mu,
        alpha,
        beta,
        c,
        ..
    } = *params;
    let dp = spectral::down_weight_denominator(params, roots.sqrt_s_p);
    // 1 - lambda t2 / mu = (sqrt(s) - q) / (2 mu) with q = lambda + beta + alpha - mu,
    // and sqrt(s)^2 - q^2 = 4 alpha mu
    let q = lambda + beta + alpha - mu;
    let b = if q > 0.0 {
        4.0 * alpha * mu / (roots.sqrt_s_p + q) / (2.0 * mu)
    } else {
        (roots.sqrt_s_p - q) / (2.0 * mu)
    };
    TwistRates {
        lambda: lambda * roots.t2 / c,
        mu: mu / c,
        alpha: 2.0 * alpha * beta / (c * dp),
        beta: dp / (2.0 * c),
        b,
    }
}

/// `lambda'`, `mu'`, `alpha'`, `beta'` and `B` of the twisted tandem.
pub fn model2_twist_rates(params: &ModelParams) -> Result<TwistRates> {
    if params.p != 1.0 {
        return Err(Error::Unsupported("twisted rates are defined for the tandem (p = 1) only"));
    }
    params.require_stable()?;
    let roots = spectral::characteristic_roots(params);
    Ok(twisted_phase_rates(params, &roots))
}

/// Stationary law of the Markovian part of the twisted free process.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum MarkovPartLaw {
    /// Model 1: two atoms.
    TwoState { up: f64, down: f64 },
    /// Model 2 tandem: `phi(y, s) = b * ratio^y * share(s)`.
    ProductForm {
        b: f64,
        ratio: f64,
        up_share: f64,
        down_share: f64,
    },
}

impl MarkovPartLaw {
    /// `phi(y, status)`; `y` is ignored for the two-state law.
    pub fn prob(&self, y: i64, status: ServerStatus) -> f64 {
        match *self {
            MarkovPartLaw::TwoState { up, down } => match status {
                ServerStatus::Up => up,
                ServerStatus::Down => down,
            },
            MarkovPartLaw::ProductForm {
                b,
                ratio,
                up_share,
                down_share,
            } => {
                if y < 0 {
                    return 0.0;
                }
                let share = match status {
                    ServerStatus::Up => up_share,
                    ServerStatus::Down => down_share,
                };
                b * math::powi(ratio, y) * share
            }
        }
    }

    /// Table of `(y, status, phi)` for `y <= y_max` plus the mass beyond it.
    pub fn table(&self, y_max: u32) -> (Vec<(i64, ServerStatus, f64)>, f64) {
        match *self {
            MarkovPartLaw::TwoState { up, down } => (
                alloc::vec![(0, ServerStatus::Up, up), (0, ServerStatus::Down, down)],
                0.0,
            ),
            MarkovPartLaw::ProductForm { ratio, .. } => {
                let rows = (0..=i64::from(y_max))
                    .flat_map(|y| ServerStatus::ALL.map(|s| (y, s, self.prob(y, s))))
                    .collect();
                (rows, math::powi(ratio, i64::from(y_max) + 1))
            }
        }
    }
}

/// `phi` for Model 1, or for Model 2 with `p = 1`.
pub fn markov_part_stationary(params: &ModelParams, model: Model) -> Result<MarkovPartLaw> {
    match model {
        Model::Model1 => {
            params.require_stable()?;
            let roots = spectral::characteristic_roots(params);
            let g = roots.g_constant.ok_or(Error::Unsupported("Model 1 needs p = 1"))?;
            let dp = spectral::down_weight_denominator(params, roots.sqrt_s_p);
            Ok(MarkovPartLaw::TwoState {
                up: dp / 2.0 / g,
                down: 2.0 * params.alpha * params.beta / dp / g,
            })
        }
        Model::Model2 => {
            let r = model2_twist_rates(params)?;
            Ok(MarkovPartLaw::ProductForm {
                b: r.b,
                ratio: r.load(),
                up_share: r.beta / (r.alpha + r.beta),
                down_share: r.alpha / (r.alpha + r.beta),
            })
        }
        Model::RsRd => Err(Error::Unsupported("the RS-RD network has no free process here")),
    }
}

/// Transition matrix of the Model 1 twisted phase chain.
pub fn model1_phase_kernel(params: &ModelParams) -> Result<Mat2> {
    params.require_stable()?;
    let roots = spectral::characteristic_roots(params);
    let r = twisted_phase_rates(params, &roots);
    Ok(Mat2::new(1.0 - r.alpha, r.alpha, r.beta, 1.0 - r.beta))
}

/// Row of the Model 2 twisted phase chain on `(y, status)`, as
/// `(y', status', probability)` with the diagonal last.
pub fn model2_phase_row(rates: &TwistRates, y: i64, status: ServerStatus) -> ArrayVec<(i64, ServerStatus, f64), 4> {
    let mut row = ArrayVec::new();
    row.push((y + 1, status, rates.lambda));
    let mut out = rates.lambda;
    if y >= 1 {
        row.push((y - 1, status, rates.mu));
        out += rates.mu;
    }
    let flip = match status {
        ServerStatus::Up => rates.alpha,
        ServerStatus::Down => rates.beta,
    };
    row.push((y, status.flipped(), flip));
    out += flip;
    row.push((y, status, 1.0 - out));
    row
}

/// Stationary horizontal drift of the twisted free process, per
/// uniformized step, computed by independent routes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HorizontalDrift {
    /// Closed-form expression.
    pub closed_form: f64,
    /// `sum_s phi(s) * E[x increment of the twisted row at s]`.
    pub phi_weighted: f64,
    /// Model 2 only: `mu' (1 - B) - mu gamma / C * beta' / (alpha' + beta')`.
    pub aggregate: Option<f64>,
}

const DRIFT_AGREEMENT: f64 = 1e-10;

fn model1_drift_closed(params: &ModelParams, roots: &SpectralSolution) -> f64 {
    let ModelParams { lambda, mu, c, .. } = *params;
    let g = roots.g_constant.expect("p = 1");
    let dp = spectral::down_weight_denominator(params, roots.sqrt_s_p);
    let two_lambda_t2 = 2.0 * lambda * roots.t2; // lambda + beta + mu + alpha - sqrt(s)
    (two_lambda_t2 / 2.0 - lambda * mu * dp / (g * two_lambda_t2)) / c
}

fn model2_drift_closed(params: &ModelParams, roots: &SpectralSolution) -> f64 {
    let ModelParams {
        lambda,
        mu,
        alpha,
        beta,
        c,
        ..
    } = *params;
    let dp = spectral::down_weight_denominator(params, roots.sqrt_s_p);
    let two_lambda_t2 = 2.0 * lambda * roots.t2;
    (two_lambda_t2 / 2.0
        - 2.0 * lambda * mu * dp * dp / (two_lambda_t2 * (4.0 * alpha * beta + dp * dp)))
        / c
}

/// Horizontal drift `d` of the twisted free process (Model 1, or Model 2
/// with `p = 1`).
///
/// Fails when the routes disagree beyond `1e-10` or the drift is not
/// positive (the tail constants need an escaping twisted process).
pub fn horizontal_drift(params: &ModelParams, model: Model) -> Result<HorizontalDrift> {
    params.require_stable()?;
    let roots = spectral::characteristic_roots(params);
    let h = harmonic(params, model)?;
    let phi = markov_part_stationary(params, model)?;
    let drift = match model {
        Model::Model1 => {
            let closed_form = model1_drift_closed(params, &roots);
            let phi_weighted = ServerStatus::ALL
                .iter()
                .map(|&s| {
                    let row = twisted_row(params, &h, State::model1(0, s))?;
                    Ok(phi.prob(0, s) * row.mean_dx())
                })
                .sum::<Result<f64>>()?;
            HorizontalDrift {
                closed_form,
                phi_weighted,
                aggregate: None,
            }
        }
        Model::Model2 => {
            let closed_form = model2_drift_closed(params, &roots);
            let rates = twisted_phase_rates(params, &roots);
            let share_up = rates.beta / (rates.alpha + rates.beta);
            let aggregate = rates.mu * (1.0 - rates.b) - params.mu * roots.gamma_p / params.c * share_up;
            // explicit sum over y <= Y0; rows with y >= 1 share one mean
            // increment, so the remainder is the geometric tail mass times it
            const Y0: i64 = 64;
            let ratio = rates.load();
            let mut phi_weighted = 0.0;
            for s in ServerStatus::ALL {
                for y in 0..=Y0 {
                    let row = twisted_row(params, &h, State::model2(0, y, s))?;
                    phi_weighted += phi.prob(y, s) * row.mean_dx();
                }
                let share = phi.prob(0, s) / rates.b;
                let far = twisted_row(params, &h, State::model2(0, Y0 + 1, s))?;
                phi_weighted += share * math::powi(ratio, Y0 + 1) * far.mean_dx();
            }
            HorizontalDrift {
                closed_form,
                phi_weighted,
                aggregate: Some(aggregate),
            }
        }
        Model::RsRd => return Err(Error::Unsupported("the RS-RD network has no free process here")),
    };
    let scale = drift.closed_form.abs().max(1e-300);
    for other in [Some(drift.phi_weighted), drift.aggregate].into_iter().flatten() {
        if (other - drift.closed_form).abs() > DRIFT_AGREEMENT * scale.max(1.0 / params.c) {
            return Err(Error::Disagreement {
                what: "horizontal drift routes",
                a: drift.closed_form,
                b: other,
            });
        }
    }
    if !(drift.closed_form > 0.0) {
        return Err(Error::NonPositiveDrift(drift.closed_form));
    }
    Ok(drift)
}

/// Everything the twist contributes to the tail constants.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwistSummary {
    pub model: Model,
    pub harmonic: HarmonicFunction,
    /// Model 2 tandem only.
    pub rates: Option<TwistRates>,
    pub phi: MarkovPartLaw,
    /// Per uniformized step.
    pub drift: f64,
    /// `C * drift`, per unit of time.
    pub drift_per_time: f64,
}

/// Twist summary for Model 1 or the Model 2 tandem.
pub fn twist_summary(params: &ModelParams, model: Model) -> Result<TwistSummary> {
    let harmonic = harmonic(params, model)?;
    let phi = markov_part_stationary(params, model)?;
    let rates = match model {
        Model::Model2 => Some(model2_twist_rates(params)?),
        _ => None,
    };
    let drift = horizontal_drift(params, model)?.closed_form;
    Ok(TwistSummary {
        model,
        harmonic,
        rates,
        phi,
        drift,
        drift_per_time: params.c * drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ServerStatus::{Down, Up};

    fn params_a() -> ModelParams {
        ModelParams::new(10.0, 11.0, 0.1, 10.0, 1.0, 31.1)
    }

    fn params_b() -> ModelParams {
        ModelParams::new(20.0, 60.0, 0.01, 1.0, 1.0, 81.01)
    }

    fn tandem_a() -> ModelParams {
        ModelParams::new(10.0, 11.0, 0.1, 10.0, 1.0, 10.0 + 22.0 + 0.1 + 10.0)
    }

    #[test]
    fn model1_harmonic_matches_linear_system() {
        let h = harmonic(&params_a(), Model::Model1).unwrap();
        assert_relative_eq!(h.base, 1.0 / 0.919_060, max_relative = 1e-6);
        assert_relative_eq!(h.down_weight, 1.096_573, max_relative = 1e-6);
        assert_eq!(h.eval(&State::model1(0, Up)), 1.0);

        // oracle: the Up-row and Down-row harmonicity conditions with
        // e^{theta_U} = 1, each solved for the Down weight
        let p = params_a();
        let g = 1.0 / h.base;
        let from_i = (p.lambda + p.mu + p.alpha - p.lambda / g - p.mu * g) / p.alpha;
        let from_ii = p.beta / (p.lambda + p.beta - p.lambda / g);
        assert_relative_eq!(h.down_weight, from_i, max_relative = 1e-9);
        assert_relative_eq!(h.down_weight, from_ii, max_relative = 1e-12);
    }

    #[test]
    fn model2_harmonic_weights() {
        let p = ModelParams::new(10.0, 30.0, 0.1, 10.0, 0.5, 80.1);
        let h = harmonic(&p, Model::Model2).unwrap();
        assert_relative_eq!(h.base, 1.0 / 0.679_296, max_relative = 1e-6);
        assert_relative_eq!(h.down_weight, 20.0 / (4.9 + 32.01_f64.sqrt()), max_relative = 1e-12);
        assert_relative_eq!(h.down_weight, 1.894_345, max_relative = 1e-6);
    }

    #[test]
    fn harmonic_requires_stability() {
        let p = ModelParams::new(11.0, 11.0, 0.1, 10.0, 1.0, 32.1);
        assert!(matches!(harmonic(&p, Model::Model1), Err(Error::Unstable { .. })));
    }

    #[test]
    fn twisted_model1_rows() {
        let p = params_a();
        let row = twisted_kernel(&p, State::model1(0, Up)).unwrap();
        assert_relative_eq!(row.prob(&State::model1(1, Up)), 0.349_861, max_relative = 1e-5);
        assert_relative_eq!(row.prob(&State::model1(-1, Up)), 0.325_069, max_relative = 1e-5);
        assert_relative_eq!(row.prob(&State::model1(0, Down)), 0.003_526, max_relative = 1e-3);
        assert_relative_eq!(row.total(), 1.0, epsilon = 1e-12);

        let row = twisted_kernel(&p, State::model1(0, Down)).unwrap();
        assert_relative_eq!(row.prob(&State::model1(0, Up)), 0.293_226, max_relative = 1e-5);
        assert_relative_eq!(row.prob(&State::model1(1, Down)), 0.349_861, max_relative = 1e-5);
        assert_relative_eq!(row.total(), 1.0, epsilon = 1e-12);

        // closed-form entries of the twisted table
        let (_, sqrt_s) = spectral::discriminant(&p);
        let sum = p.lambda + p.beta + p.mu + p.alpha;
        let right = (sum - sqrt_s) / (2.0 * p.c);
        let left = 2.0 * p.lambda * p.mu / (p.c * (sum - sqrt_s));
        let row = twisted_kernel(&p, State::model1(7, Up)).unwrap();
        assert_relative_eq!(row.prob(&State::model1(8, Up)), right, max_relative = 1e-12);
        assert_relative_eq!(row.prob(&State::model1(6, Up)), left, max_relative = 1e-12);
    }

    #[test]
    fn model1_phi() {
        let phi = markov_part_stationary(&params_a(), Model::Model1).unwrap();
        assert_relative_eq!(phi.prob(0, Up), 0.988_118, max_relative = 1e-6);
        assert_relative_eq!(phi.prob(0, Up) + phi.prob(0, Down), 1.0, epsilon = 1e-15);

        // oracle: power iteration on the twisted phase chain
        let k2 = model1_phase_kernel(&params_a()).unwrap();
        let mut v = [0.5, 0.5];
        for _ in 0..20_000 {
            v = k2.left_mul(v);
        }
        assert_relative_eq!(v[0], phi.prob(0, Up), epsilon = 1e-12);
        let moved = k2.left_mul([phi.prob(0, Up), phi.prob(0, Down)]);
        assert!((moved[0] - phi.prob(0, Up)).abs() < 1e-12);
    }

    #[test]
    fn tandem_rates() {
        let r = model2_twist_rates(&params_a()).unwrap();
        assert_relative_eq!(r.lambda, 0.349_861, max_relative = 1e-5);
        assert_relative_eq!(r.mu, 11.0 / 31.1, max_relative = 1e-14);
        assert_relative_eq!(r.alpha, 0.003_526, max_relative = 1e-3);
        assert_relative_eq!(r.beta, 0.293_226, max_relative = 1e-5);
        assert_relative_eq!(r.b, 0.010_847, max_relative = 1e-4);
        let g = spectral::characteristic_roots(&params_a()).g_constant.unwrap();
        assert_relative_eq!(params_a().c * (r.alpha + r.beta), g, max_relative = 1e-12);

        let r = model2_twist_rates(&params_b()).unwrap();
        assert_relative_eq!(r.b, 0.650_09, max_relative = 1e-5);
        assert!(model2_twist_rates(&ModelParams::new(10.0, 30.0, 0.1, 10.0, 0.5, 80.1)).is_err());
    }

    #[test]
    fn tandem_load_identity() {
        for p in [params_a(), params_b(), tandem_a()] {
            let r = model2_twist_rates(&p).unwrap();
            let gamma = spectral::characteristic_roots(&p).gamma_p;
            assert!((r.load() * gamma - p.lambda / p.mu).abs() < 1e-12);
            assert!(r.b > 0.0 && r.b < 1.0);
        }
    }

    #[test]
    fn tandem_phi_matches_power_iteration() {
        let p = tandem_a();
        let rates = model2_twist_rates(&p).unwrap();
        let phi = markov_part_stationary(&p, Model::Model2).unwrap();
        assert_relative_eq!(phi.prob(0, Up), rates.b * rates.beta / (rates.alpha + rates.beta));

        // oracle: GTH solve of the phase chain truncated at y <= 4000
        // (reflecting), compared on y <= 10
        const Y: i64 = 4000;
        let idx = |y: i64, st: ServerStatus| (y as usize) * 2 + st.index();
        let mut k = crate::linalg::BandedMatrix::zeros(2 * (Y as usize + 1), 2);
        for y in 0..=Y {
            for st in ServerStatus::ALL {
                for (ty, ts, pr) in model2_phase_row(&rates, y, st) {
                    k.add(idx(y, st), idx(ty.min(Y), ts), pr);
                }
            }
        }
        let v = k.gth_stationary().unwrap();
        for y in 0..=10 {
            for st in ServerStatus::ALL {
                assert_relative_eq!(v[idx(y, st)], phi.prob(y, st), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn tandem_product_form_balance() {
        let p = params_a();
        let rates = model2_twist_rates(&p).unwrap();
        let phi = markov_part_stationary(&p, Model::Model2).unwrap();
        for y in 1..=10_i64 {
            for s in ServerStatus::ALL {
                let mut inflow = 0.0;
                for from_y in [y - 1, y, y + 1] {
                    for from_s in ServerStatus::ALL {
                        for (ty, ts, pr) in model2_phase_row(&rates, from_y, from_s) {
                            if ty == y && ts == s {
                                inflow += phi.prob(from_y, from_s) * pr;
                            }
                        }
                    }
                }
                assert_relative_eq!(inflow, phi.prob(y, s), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn model1_drift() {
        let d = horizontal_drift(&params_a(), Model::Model1).unwrap();
        assert_relative_eq!(d.closed_form, 0.028_654, max_relative = 1e-4);
        assert_relative_eq!(d.closed_form, d.phi_weighted, epsilon = 1e-12);
        assert!(d.closed_form > 0.0);
    }

    #[test]
    fn tandem_drift_routes_agree() {
        for p in [params_a(), tandem_a(), params_b()] {
            let d = horizontal_drift(&p, Model::Model2).unwrap();
            let agg = d.aggregate.unwrap();
            assert!((d.closed_form - agg).abs() < 1e-10, "{d:?}");
            assert!((d.closed_form - d.phi_weighted).abs() < 1e-10, "{d:?}");
        }
    }

    #[test]
    fn summary_reports_time_drift() {
        let s = twist_summary(&params_a(), Model::Model1).unwrap();
        assert_relative_eq!(s.drift_per_time, 31.1 * s.drift);
        assert!(s.rates.is_none());
        let s = twist_summary(&tandem_a(), Model::Model2).unwrap();
        assert!(s.rates.is_some());
        let (table, tail) = s.phi.table(50);
        assert_eq!(table.len(), 102);
        let mass: f64 = table.iter().map(|r| r.2).sum();
        assert_relative_eq!(mass + tail, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn down_status_phase_row() {
        let rates = model2_twist_rates(&params_a()).unwrap();
        let row = model2_phase_row(&rates, 0, Down);
        assert_eq!(row.len(), 3);
        let total: f64 = row.iter().map(|r| r.2).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-15);
    }
}
