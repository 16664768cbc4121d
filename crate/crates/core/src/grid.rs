//! Seeded random parameter sets for property checks.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::params::{default_uniformization, Model, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Every point satisfies `lambda < beta mu p / (alpha + beta)`.
    Stable,
    /// Load drawn from `[0.3, 1.7]`, so roughly a third of the points are
    /// unstable.
    Mixed,
}

/// `n` parameter sets drawn from a ChaCha20 stream seeded with `seed`.
///
/// `mu`, `alpha` and `beta` are log-uniform on `[1, 50]`, `[0.01, 5]` and
/// `[0.1, 20]`. `lambda` is the effective capacity `beta mu p / (alpha + beta)`
/// times a uniform load. For Model 1 `p = 1`; otherwise `p` is `fixed_p`
/// or uniform on `[0.3, 1]`. `C` takes its default value.
pub fn parameter_grid(n: usize, seed: u64, model: Model, kind: GridKind, fixed_p: Option<f64>) -> Vec<ModelParams> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let log_uniform = |rng: &mut ChaCha20Rng, lo: f64, hi: f64| {
        let u: f64 = rng.gen();
        crate::math::exp(crate::math::ln(lo) + u * (crate::math::ln(hi) - crate::math::ln(lo)))
    };
    (0..n)
        .map(|_| {
            let mu = log_uniform(&mut rng, 1.0, 50.0);
            let alpha = log_uniform(&mut rng, 0.01, 5.0);
            let beta = log_uniform(&mut rng, 0.1, 20.0);
            let p = match model {
                Model::Model1 => 1.0,
                _ => fixed_p.unwrap_or_else(|| rng.gen_range(0.3..=1.0)),
            };
            let load = match kind {
                GridKind::Stable => rng.gen_range(0.05..0.95),
                GridKind::Mixed => rng.gen_range(0.3..1.7),
            };
            let lambda = load * beta * mu * p / (alpha + beta);
            let c = default_uniformization(lambda, mu, alpha, beta, model).expect("positive rates");
            ModelParams::new(lambda, mu, alpha, beta, p, c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_reproducible_and_valid() {
        let a = parameter_grid(50, 3, Model::Model2, GridKind::Stable, None);
        let b = parameter_grid(50, 3, Model::Model2, GridKind::Stable, None);
        assert_eq!(a, b);
        for p in &a {
            assert!(p.validate(Model::Model2).is_ok());
            assert!(p.lambda < p.effective_rate() * p.p);
        }
    }

    #[test]
    fn mixed_grid_contains_both_kinds() {
        let g = parameter_grid(200, 5, Model::Model1, GridKind::Mixed, None);
        let stable = g.iter().filter(|p| p.lambda < p.effective_rate()).count();
        assert!(stable > 50 && stable < 180, "{stable}");
    }
}
