//! Matrix-geometric solution of Model 1 and a truncated stationary solver
//! for every model.
//!
//! Levels are queue lengths and phases are `[Up, Down]`, in that order.

mod table;
mod truncated;

use alloc::vec::Vec;

pub use table::StationaryTable;
pub use truncated::{truncated_stationary, TAIL_ERROR_LIMIT, TAIL_WARNING_LIMIT};

use crate::error::{Error, Result};
use crate::kernels;
use crate::linalg::Mat2;
use crate::params::{Model, ModelParams};

/// Transition blocks of the Model 1 chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QbdBlocks {
    /// Level 0 to level 0.
    pub p1_0: Mat2,
    /// Level `k` to `k + 1`.
    pub p0: Mat2,
    /// Level `k` to `k` for `k >= 1`.
    pub p1: Mat2,
    /// Level `k` to `k - 1`.
    pub p2: Mat2,
}

impl QbdBlocks {
    /// The level generator `P0 + P1 + P2`.
    pub fn level_generator(&self) -> Mat2 {
        self.p0 + self.p1 + self.p2
    }
}

pub fn qbd_blocks(params: &ModelParams) -> QbdBlocks {
    let ModelParams {
        lambda,
        mu,
        alpha,
        beta,
        c,
        ..
    } = *params;
    QbdBlocks {
        p1_0: Mat2::new(1.0 - (alpha + lambda) / c, alpha / c, beta / c, 1.0 - (lambda + beta) / c),
        p0: Mat2::diag(lambda / c, lambda / c),
        p1: Mat2::new(
            1.0 - (mu + lambda + alpha) / c,
            alpha / c,
            beta / c,
            1.0 - (lambda + beta) / c,
        ),
        p2: Mat2::diag(mu / c, 0.0),
    }
}

/// `R = (lambda / mu) [[1, alpha / (lambda + beta)], [1, (alpha + mu) / (lambda + beta)]]`.
pub fn rate_matrix_closed_form(params: &ModelParams) -> Result<Mat2> {
    params.require_stable()?;
    let ModelParams {
        lambda,
        mu,
        alpha,
        beta,
        ..
    } = *params;
    let lb = lambda + beta;
    Ok(Mat2::new(1.0, alpha / lb, 1.0, (alpha + mu) / lb).scale(lambda / mu))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateMatrixSolution {
    #[cfg_attr(feature = "serde", serde(with = "mat2_serde"))]
    pub r: Mat2,
    pub eig_large: f64,
    pub eig_small: f64,
    pub iterations: usize,
    /// `max |R - (R^2 P2 + R P1 + P0)|`.
    pub residual: f64,
}

#[cfg(feature = "serde")]
mod mat2_serde {
    use crate::linalg::Mat2;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Mat2, s: S) -> Result<S::Ok, S::Error> {
        m.0.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat2, D::Error> {
        <[[f64; 2]; 2]>::deserialize(d).map(Mat2)
    }
}

pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;

fn fixed_point_map(blocks: &QbdBlocks, r: Mat2) -> Mat2 {
    r * r * blocks.p2 + r * blocks.p1 + blocks.p0
}

/// Successive substitution `R <- R^2 P2 + R P1 + P0` from `R = 0`.
pub fn rate_matrix_iterate(blocks: &QbdBlocks, tol: f64) -> Result<RateMatrixSolution> {
    rate_matrix_iterate_with(blocks, tol, DEFAULT_MAX_ITERATIONS)
}

pub fn rate_matrix_iterate_with(blocks: &QbdBlocks, tol: f64, max_iterations: usize) -> Result<RateMatrixSolution> {
    let mut r = Mat2::ZERO;
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iterations {
        let next = fixed_point_map(blocks, r);
        change = next.max_abs_diff(&r);
        r = next;
        iterations += 1;
        if change <= tol {
            let (eig_large, eig_small) = rate_matrix_spectrum(&r)?;
            return Ok(RateMatrixSolution {
                r,
                eig_large,
                eig_small,
                iterations,
                residual: fixed_point_map(blocks, r).max_abs_diff(&r),
            });
        }
    }
    Err(Error::NoConvergence {
        iterations,
        residual: change,
    })
}

/// Eigenvalues of a 2x2 matrix, largest first.
pub fn rate_matrix_spectrum(r: &Mat2) -> Result<(f64, f64)> {
    r.real_eigenvalues()
}

/// Neuts' drift test: `rho P0 1 < rho P2 1` with `rho` stationary for the
/// level generator.
pub fn neuts_stability(blocks: &QbdBlocks) -> bool {
    let rho = blocks.level_generator().two_state_stationary();
    let up: f64 = blocks.p0.left_mul(rho).iter().sum();
    let down: f64 = blocks.p2.left_mul(rho).iter().sum();
    up < down
}

/// Matrix-geometric stationary law of Model 1: `pi_k = pi_0 R^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model1Solution {
    pub r: Mat2,
    pub pi0: [f64; 2],
}

impl Model1Solution {
    pub fn solve(params: &ModelParams) -> Result<Self> {
        params.validate(Model::Model1)?;
        let r = rate_matrix_closed_form(params)?;
        let blocks = qbd_blocks(params);
        let boundary = blocks.p1_0 + r * blocks.p2;
        let (to_down, to_up) = (boundary.get(0, 1), boundary.get(1, 0));
        if !(to_down > 0.0 && to_up > 0.0) {
            return Err(Error::Singular("boundary block is reducible"));
        }
        let raw = [to_up, to_down];
        let mass = (Mat2::IDENTITY - r).inverse()?.right_mul([1.0, 1.0]);
        let norm = raw[0] * mass[0] + raw[1] * mass[1];
        Ok(Model1Solution {
            r,
            pi0: [raw[0] / norm, raw[1] / norm],
        })
    }

    /// `pi(k, .)` by repeated multiplication.
    pub fn level(&self, k: u32) -> [f64; 2] {
        (0..k).fold(self.pi0, |v, _| self.r.left_mul(v))
    }

    /// `pi(k, .) / |pi(k, .)|_1`, safe for levels where `pi` underflows.
    pub fn level_direction(&self, k: u32) -> [f64; 2] {
        let mut v = normalized(self.pi0);
        for _ in 0..k {
            v = normalized(self.r.left_mul(v));
        }
        v
    }

    /// Natural log of `pi(k, .)`, safe where `pi` underflows.
    pub fn level_ln(&self, k: u32) -> [f64; 2] {
        let mut v = self.pi0;
        let mut log_scale = 0.0;
        for _ in 0..k {
            v = self.r.left_mul(v);
            let s = v[0] + v[1];
            v = [v[0] / s, v[1] / s];
            log_scale += crate::math::ln(s);
        }
        [crate::math::ln(v[0]) + log_scale, crate::math::ln(v[1]) + log_scale]
    }

    /// `pi_k R (I - R)^{-1} 1`, the mass above level `k`.
    pub fn mass_above(&self, k: u32) -> Result<f64> {
        let beyond = self.r.left_mul(self.level(k));
        let mass = (Mat2::IDENTITY - self.r).inverse()?.right_mul([1.0, 1.0]);
        Ok(beyond[0] * mass[0] + beyond[1] * mass[1])
    }
}

fn normalized(v: [f64; 2]) -> [f64; 2] {
    let s = v[0] + v[1];
    [v[0] / s, v[1] / s]
}

/// Exact Model 1 stationary table for levels `0..=k_max`.
pub fn exact_stationary_model1(params: &ModelParams, k_max: u32) -> Result<StationaryTable> {
    let sol = Model1Solution::solve(params)?;
    let mut probs = Vec::with_capacity(2 * (k_max as usize + 1));
    let mut v = sol.pi0;
    for _ in 0..=k_max {
        probs.extend_from_slice(&v);
        v = sol.r.left_mul(v);
    }
    let mut table = StationaryTable::from_parts(Model::Model1, k_max, 0, probs);
    table.residual = global_balance_residual(params, &table)?;
    table.tail_mass_bound = sol.mass_above(k_max)?;
    table.truncation_warning = table.tail_mass_bound > TAIL_WARNING_LIMIT;
    Ok(table)
}

/// `max |(pi P)(s) - pi(s)|` over the states of `table` whose
/// predecessors all lie inside it (`x < x_max`, and `y < y_max` when the
/// model has a second queue), pushing mass forward with the full kernel.
pub fn global_balance_residual(params: &ModelParams, table: &StationaryTable) -> Result<f64> {
    let mut flow = alloc::vec![0.0; table.len()];
    for (state, p) in table.iter() {
        for (to, q) in kernels::full_kernel(params, state)?.iter() {
            if let Some(i) = table::lattice_index(table.x_max, table.y_max, to.x, to.y, to.status) {
                flow[i] += p * q;
            }
        }
    }
    let inner_y = |y: i64| table.y_max == 0 || y < i64::from(table.y_max);
    let mut worst = 0.0_f64;
    for ((state, p), f) in table.iter().zip(&flow) {
        if state.x < i64::from(table.x_max) && inner_y(state.y) {
            worst = worst.max((f - p).abs());
        }
    }
    Ok(worst)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral;
    use approx::assert_relative_eq;
    use crate::params::ServerStatus::{Down, Up};
    use crate::params::State;

    fn params_a() -> ModelParams {
        ModelParams::new(10.0, 11.0, 0.1, 10.0, 1.0, 31.1)
    }

    fn params_b() -> ModelParams {
        ModelParams::new(20.0, 60.0, 0.01, 1.0, 1.0, 81.01)
    }

    #[test]
    fn blocks_params_a() {
        let b = qbd_blocks(&params_a());
        assert_eq!(b.p0, Mat2::diag(10.0 / 31.1, 10.0 / 31.1));
        assert_eq!(b.p2, Mat2::diag(11.0 / 31.1, 0.0));
        assert_relative_eq!(b.p1.get(0, 0), 1.0 - 21.1 / 31.1, max_relative = 1e-14);
        assert_relative_eq!(b.p1.get(1, 1), 1.0 - 20.0 / 31.1, max_relative = 1e-14);
        for row in (b.p1_0 + b.p0).row_sums() {
            assert_relative_eq!(row, 1.0, epsilon = 1e-12);
        }
        for row in b.level_generator().row_sums() {
            assert_relative_eq!(row, 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!(qbd_blocks(&params_b()).p2.get(0, 0), 60.0 / 81.01);
    }

    #[test]
    fn closed_form_rate_matrix() {
        let r = rate_matrix_closed_form(&params_a()).unwrap();
        let want = Mat2::new(0.909_091, 0.004_545_45, 0.909_091, 0.504_545);
        assert!(r.max_abs_diff(&want) < 1e-6);
        assert_eq!(r.get(0, 0), r.get(1, 0));
        let r = rate_matrix_closed_form(&params_b()).unwrap();
        assert_relative_eq!(r.get(1, 1), 60.01 / 21.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn iteration_matches_closed_form() {
        for p in [params_a(), params_b()] {
            let sol = rate_matrix_iterate(&qbd_blocks(&p), 1e-15).unwrap();
            let closed = rate_matrix_closed_form(&p).unwrap();
            assert!(sol.r.max_abs_diff(&closed) < 1e-12, "{sol:?}");
            assert!(sol.residual <= 1e-12);
            let roots = spectral::characteristic_roots(&p);
            assert!((sol.eig_large - roots.gamma_p).abs() < 1e-10);
            assert!((sol.eig_small - roots.gamma_secondary).abs() < 1e-10);
        }
    }

    #[test]
    fn iteration_on_unstable_blocks() {
        let p = ModelParams::new(11.0, 11.0, 0.1, 10.0, 1.0, 32.1);
        let sol = rate_matrix_iterate(&qbd_blocks(&p), 1e-13).unwrap();
        assert!(sol.eig_large >= 1.0 - 1e-6);
        assert!(exact_stationary_model1(&p, 10).is_err());
    }

    #[test]
    fn zero_up_block_gives_zero_rate_matrix() {
        let mut b = qbd_blocks(&params_a());
        b.p0 = Mat2::ZERO;
        let sol = rate_matrix_iterate(&b, 1e-15).unwrap();
        assert_eq!(sol.r, Mat2::ZERO);
    }

    #[test]
    fn spectrum_examples() {
        let r = rate_matrix_closed_form(&params_a()).unwrap();
        let (l, s) = rate_matrix_spectrum(&r).unwrap();
        assert_relative_eq!(l, 0.919_060, max_relative = 1e-6);
        assert_relative_eq!(s, 0.494_577, max_relative = 1e-6);
        assert_eq!(rate_matrix_spectrum(&Mat2::IDENTITY).unwrap(), (1.0, 1.0));
        let (l, s) = rate_matrix_spectrum(&rate_matrix_closed_form(&params_b()).unwrap()).unwrap();
        assert_relative_eq!(l, 0.952_626, max_relative = 1e-6);
        assert_relative_eq!(s, 0.333_248, max_relative = 1e-5);
    }

    #[test]
    fn neuts_examples() {
        let b = qbd_blocks(&params_a());
        let rho = b.level_generator().two_state_stationary();
        assert_relative_eq!(b.p0.left_mul(rho).iter().sum::<f64>(), 0.321_543, max_relative = 1e-5);
        assert_relative_eq!(b.p2.left_mul(rho).iter().sum::<f64>(), 0.350_197, max_relative = 1e-5);
        assert!(neuts_stability(&b));
        assert!(neuts_stability(&qbd_blocks(&params_b())));
        // lambda = beta mu / (alpha + beta) exactly
        let p = ModelParams::new(10.0, 10.0, 1.0, 4.0, 1.0, 25.0);
        assert_eq!(p.effective_rate(), 8.0);
        let p = ModelParams::new(8.0, 10.0, 1.0, 4.0, 1.0, 23.0);
        assert!(!neuts_stability(&qbd_blocks(&p)));
    }

    #[test]
    fn exact_table_params_a() {
        let t = exact_stationary_model1(&params_a(), 600).unwrap();
        assert!(t.residual <= 1e-12, "{}", t.residual);
        let total = t.total() + t.tail_mass_bound;
        assert!((total - 1.0).abs() < 1e-10);
        let ratio = t.at(301, 0, Up) / t.at(300, 0, Up);
        assert_relative_eq!(ratio, 0.919_060, max_relative = 1e-6);
    }

    #[test]
    fn exact_ratio_law_params_b() {
        let p = params_b();
        let sol = Model1Solution::solve(&p).unwrap();
        let v = sol.level_direction(1500);
        let (_, sqrt_s) = spectral::discriminant(&p);
        let want = (p.lambda + p.beta - p.mu - p.alpha + sqrt_s) / (2.0 * p.alpha);
        assert_relative_eq!(v[0] / v[1], want, max_relative = 1e-9);
    }

    #[test]
    fn log_levels_agree_with_direct_product() {
        let sol = Model1Solution::solve(&params_a()).unwrap();
        let direct = sol.level(100);
        let ln = sol.level_ln(100);
        assert_relative_eq!(ln[0], crate::math::ln(direct[0]), max_relative = 1e-12);
        assert_relative_eq!(ln[1], crate::math::ln(direct[1]), max_relative = 1e-12);
    }

    #[test]
    fn exact_table_state_accessors() {
        let t = exact_stationary_model1(&params_a(), 5).unwrap();
        assert_eq!(t.len(), 12);
        assert_eq!(t.at(6, 0, Up), 0.0);
        assert_eq!(t.get(&State::model1(2, Down)), t.at(2, 0, Down));
        assert_eq!(t.index_of(&State::model1(1, Down)), Some(3));
    }
}
