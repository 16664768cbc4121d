use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::params::{Model, ModelParams, ServerStatus, State};
use crate::qbd;
use crate::spectral;
use crate::twist;

use super::EtaEstimate;

/// Settings of the Monte Carlo estimate of the Model 2 tail constant.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EtaOptions {
    /// Truncation of the stationary solve that supplies `pi(0, y, .)`.
    pub x_max: u32,
    pub y_max: u32,
    /// Number of twisted paths.
    pub paths: usize,
    /// Level counted as escape.
    pub escape_level: i64,
    pub seed: u64,
    /// Steps after which a path is abandoned as an error.
    pub max_steps_per_path: u64,
}

impl Default for EtaOptions {
    fn default() -> Self {
        EtaOptions {
            x_max: 60,
            y_max: 60,
            paths: 20_000,
            escape_level: 100,
            seed: 1,
            max_steps_per_path: 50_000_000,
        }
    }
}

/// `eta` for the tandem: `sum_y pi(0,y,s) h(0,y,s) H(0,y,s)`.
///
/// From `(0, y, s)` the only way to leave level 0 for good is the transfer
/// to `(1, y - 1, s)`, which the twist leaves at probability `mu / C`.
/// Starting points are drawn proportionally to `pi h mu / C`, and each
/// twisted path counts as escaped once it reaches `escape_level`.
pub fn tandem_eta(params: &ModelParams, options: &EtaOptions) -> Result<EtaEstimate> {
    if params.p != 1.0 {
        return Err(Error::Unsupported("eta is available for the tandem (p = 1) only"));
    }
    params.require_stable()?;
    let roots = spectral::characteristic_roots(params);
    if !(params.lambda / (params.mu * params.p) < roots.gamma_p) {
        return Err(Error::NotConverged(alloc::format!(
            "boundary sum diverges: lambda / (mu p) = {} is not below gamma_p = {}",
            params.lambda / (params.mu * params.p),
            roots.gamma_p
        )));
    }
    let h = twist::harmonic(params, Model::Model2)?;
    let table = qbd::truncated_stationary(params, Model::Model2, options.x_max, options.y_max)?;
    let transfer = params.mu / params.c;
    let mut starts: Vec<(State, f64)> = Vec::new();
    let mut per_level = Vec::new();
    for y in 1..=i64::from(options.y_max) {
        let mut level = 0.0;
        for s in ServerStatus::ALL {
            let w = table.at(0, y, s) * h.eval(&State::model2(0, y, s)) * transfer;
            level += w;
            starts.push((State::model2(1, y - 1, s), w));
        }
        per_level.push(level);
    }
    let total: f64 = per_level.iter().sum();
    check_geometric_decay(&per_level, total)?;

    let mut rng = ChaCha20Rng::seed_from_u64(options.seed);
    let mut cumulative = Vec::with_capacity(starts.len());
    let mut acc = 0.0;
    for (_, w) in &starts {
        acc += w / total;
        cumulative.push(acc);
    }
    let mut escaped = 0usize;
    for _ in 0..options.paths {
        let u: f64 = rng.gen();
        let i = cumulative.partition_point(|&c| c <= u).min(starts.len() - 1);
        if run_twisted_path(params, &h, starts[i].0, options, &mut rng)? {
            escaped += 1;
        }
    }
    let n = options.paths as f64;
    let frac = escaped as f64 / n;
    let std_error = total * math::sqrt(frac * (1.0 - frac) / n);
    let value = total * frac;
    Ok(EtaEstimate {
        value,
        std_error,
        ci_low: (value - 1.96 * std_error).max(0.0),
        ci_high: value + 1.96 * std_error,
    })
}

/// The boundary weights must fall off geometrically before the cut.
fn check_geometric_decay(per_level: &[f64], total: f64) -> Result<()> {
    let n = per_level.len();
    if n < 8 {
        return Err(Error::NotConverged("boundary sum needs at least 8 levels".into()));
    }
    let tail = per_level[n - n / 4..].iter().sum::<f64>();
    if !(tail <= 1e-6 * total) {
        return Err(Error::NotConverged(alloc::format!(
            "boundary summand not decaying: last quarter carries {:e} of {:e}",
            tail,
            total
        )));
    }
    Ok(())
}

fn run_twisted_path(
    params: &ModelParams,
    h: &twist::HarmonicFunction,
    start: State,
    options: &EtaOptions,
    rng: &mut ChaCha20Rng,
) -> Result<bool> {
    let mut state = start;
    for _ in 0..options.max_steps_per_path {
        if state.x <= 0 {
            return Ok(false);
        }
        if state.x >= options.escape_level {
            return Ok(true);
        }
        let row = twist::twisted_row(params, h, state)?;
        state = row.sample(rng.gen());
    }
    Err(Error::NoConvergence {
        iterations: options.max_steps_per_path as usize,
        residual: f64::NAN,
    })
}
