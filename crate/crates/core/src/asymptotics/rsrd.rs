use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::params::{Model, ModelParams, ServerStatus};
use crate::qbd::{self, StationaryTable};

/// Product-form law of the RS-RD network on `x <= x_max`, `y <= y_max`:
/// `(1 - rho)^2 rho^(x + y)` times the stationary status share, with
/// `rho = lambda / (mu p)`.
///
/// `residual` is the global-balance violation of this law on the RS-RD
/// kernel, measured on the interior of the box.
pub fn rs_rd_stationary(params: &ModelParams, x_max: u32, y_max: u32) -> Result<StationaryTable> {
    let params = params.validate(Model::RsRd)?;
    let rho = params.lambda / (params.mu * params.p);
    if !(rho < 1.0) {
        return Err(Error::Unstable {
            lambda: params.lambda,
            effective_rate: params.mu * params.p,
        });
    }
    let norm = (1.0 - rho) * (1.0 - rho);
    let share = |s: ServerStatus| match s {
        ServerStatus::Up => params.beta / (params.alpha + params.beta),
        ServerStatus::Down => params.alpha / (params.alpha + params.beta),
    };
    let mut probs = Vec::with_capacity((x_max as usize + 1) * (y_max as usize + 1) * 2);
    for x in 0..=i64::from(x_max) {
        for y in 0..=i64::from(y_max) {
            for s in ServerStatus::ALL {
                probs.push(norm * math::powi(rho, x + y) * share(s));
            }
        }
    }
    let mut table = StationaryTable::from_parts(Model::RsRd, x_max, y_max, probs);
    table.residual = qbd::global_balance_residual(&params, &table)?;
    table.tail_mass_bound = (1.0 - table.total()).max(0.0);
    table.truncation_warning = table.tail_mass_bound > qbd::TAIL_WARNING_LIMIT;
    Ok(table)
}

/// `P(Y >= j)` for `j = 0..=y_max` under the row `x = 0`, status `status`,
/// normalized within that row.
pub fn row_tail_sums(table: &StationaryTable, status: ServerStatus) -> Vec<f64> {
    let row: Vec<f64> = (0..=i64::from(table.y_max)).map(|y| table.at(0, y, status)).collect();
    let total: f64 = row.iter().sum();
    let mut tails = alloc::vec![0.0; row.len()];
    let mut acc = 0.0;
    for j in (0..row.len()).rev() {
        acc += row[j];
        tails[j] = acc / total;
    }
    tails
}
