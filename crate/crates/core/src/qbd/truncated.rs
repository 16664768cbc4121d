use crate::error::{Error, Result};
use crate::kernels;
use crate::linalg::BandedMatrix;
use crate::params::{Model, ModelParams, State};

use super::table::{lattice_index, lattice_len, StationaryTable};

/// Tail mass above which a truncated table is flagged.
pub const TAIL_WARNING_LIMIT: f64 = 1e-8;
/// Tail mass above which a truncated solve is refused.
pub const TAIL_ERROR_LIMIT: f64 = 0.01;

/// Stationary law of the chain restricted to `x <= x_max`, `y <= y_max`.
///
/// Moves that would cross the cut stay put instead, so rows remain
/// stochastic. The solve is GTH elimination on the banded kernel, which
/// keeps tiny tail probabilities accurate. The mass sitting on the cut
/// faces is reported as the tail estimate. For Model 1, `y_max` is
/// ignored.
pub fn truncated_stationary(params: &ModelParams, model: Model, x_max: u32, y_max: u32) -> Result<StationaryTable> {
    let params = params.validate(model)?;
    params.require_stable()?;
    let y_max = if model.has_second_queue() { y_max } else { 0 };
    let n = lattice_len(x_max, y_max);
    let bandwidth = 2 * (y_max as usize + 1);
    let mut kernel = BandedMatrix::zeros(n, bandwidth);
    for x in 0..=i64::from(x_max) {
        for y in 0..=i64::from(y_max) {
            for status in crate::params::ServerStatus::ALL {
                let from = State::new(model, x, y, status);
                let i = lattice_index(x_max, y_max, x, y, status).expect("inside lattice");
                for (to, p) in kernels::full_kernel(&params, from)?.iter() {
                    let j = lattice_index(x_max, y_max, to.x, to.y, to.status).unwrap_or(i);
                    kernel.add(i, j, *p);
                }
            }
        }
    }
    let probs = kernel.gth_stationary()?;
    let residual = kernel.balance_residual(&probs);
    let mut table = StationaryTable::from_parts(model, x_max, y_max, probs);
    let face: f64 = table
        .iter()
        .filter(|(s, _)| s.x == i64::from(x_max) || (y_max > 0 && s.y == i64::from(y_max)))
        .map(|(_, p)| p)
        .sum();
    if face > TAIL_ERROR_LIMIT {
        return Err(Error::TruncationTooSmall {
            tail_mass: face,
            limit: TAIL_ERROR_LIMIT,
        });
    }
    table.residual = residual;
    table.tail_mass_bound = face;
    table.truncation_warning = face > TAIL_WARNING_LIMIT;
    Ok(table)
}
