use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::params::{Model, ModelParams};
use crate::spectral;
use crate::twist;

/// Probabilities that the twisted Model 1 free process leaves level 0 and
/// never comes back.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EscapeProbabilities {
    /// `H(0, Up)`, `H(0, Down)`.
    pub from_zero: [f64; 2],
    /// Probabilities of never reaching level 0 from level 1.
    pub from_one: [f64; 2],
    /// Largest level of the absorbing solve that was needed.
    pub x_max: usize,
    /// `max |absorbing - first-passage|` over the two phases.
    pub method_gap: f64,
}

/// Level blocks of a skip-free chain on `Z x {Up, Down}`: `a0` up one
/// level, `a1` stay, `a2` down one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelBlocks {
    pub a0: Mat2,
    pub a1: Mat2,
    pub a2: Mat2,
}

impl LevelBlocks {
    /// Stationary mean level increment of the phase chain.
    pub fn drift(&self) -> f64 {
        let rho = (self.a0 + self.a1 + self.a2).two_state_stationary();
        self.a0.left_mul(rho).iter().sum::<f64>() - self.a2.left_mul(rho).iter().sum::<f64>()
    }
}

/// Blocks of the twisted Model 1 free process.
pub fn twisted_blocks(params: &ModelParams) -> Result<LevelBlocks> {
    params.require_stable()?;
    let roots = spectral::characteristic_roots(params);
    let h = twist::harmonic(params, Model::Model1)?;
    let kernel = twist::model1_phase_kernel(params)?;
    let right = params.lambda * roots.t2 / params.c;
    let left = params.mu / params.c / h.base;
    let a0 = Mat2::diag(right, right);
    let a2 = Mat2::diag(left, 0.0);
    let stay = Mat2::new(
        kernel.get(0, 0) - right - left,
        kernel.get(0, 1),
        kernel.get(1, 0),
        kernel.get(1, 1) - right,
    );
    Ok(LevelBlocks { a0, a1: stay, a2 })
}

const AGREEMENT: f64 = 1e-8;
const DOUBLING_TOLERANCE: f64 = 1e-10;
const START_LEVEL: usize = 1 << 10;
const MAX_LEVEL: usize = 1 << 24;

/// `H(0, .)` for the twisted Model 1 free process, by an absorbing solve
/// and by the first-passage matrix.
pub fn escape_probabilities(params: &ModelParams) -> Result<EscapeProbabilities> {
    let blocks = twisted_blocks(params)?;
    let right = blocks.a0.get(0, 0);
    let mut esc = escape_from_level_one(&blocks)?;
    esc.from_zero = [right * esc.from_one[0], right * esc.from_one[1]];
    Ok(esc)
}

/// Probabilities of never hitting level 0 from level 1, for any skip-free
/// block chain. Zero when the drift is not positive.
pub fn escape_from_level_one(blocks: &LevelBlocks) -> Result<EscapeProbabilities> {
    if !(blocks.drift() > 0.0) {
        return Ok(EscapeProbabilities {
            from_zero: [0.0; 2],
            from_one: [0.0; 2],
            x_max: 0,
            method_gap: 0.0,
        });
    }
    let passage = first_passage_matrix(blocks)?;
    let by_passage = {
        let hit = passage.row_sums();
        [1.0 - hit[0], 1.0 - hit[1]]
    };
    let mut x_max = START_LEVEL;
    let mut previous = absorbing_solve(blocks, x_max)?;
    loop {
        let next_level = x_max * 2;
        if next_level > MAX_LEVEL {
            return Err(Error::NoConvergence {
                iterations: x_max,
                residual: f64::NAN,
            });
        }
        let current = absorbing_solve(blocks, next_level)?;
        x_max = next_level;
        let change = (current[0] - previous[0]).abs().max((current[1] - previous[1]).abs());
        previous = current;
        if change <= DOUBLING_TOLERANCE {
            break;
        }
    }
    let gap = (previous[0] - by_passage[0]).abs().max((previous[1] - by_passage[1]).abs());
    if gap > AGREEMENT {
        return Err(Error::Disagreement {
            what: "escape probability (absorbing solve vs first-passage matrix)",
            a: previous[0],
            b: by_passage[0],
        });
    }
    Ok(EscapeProbabilities {
        from_zero: [0.0; 2],
        from_one: previous,
        x_max,
        method_gap: gap,
    })
}

/// Minimal solution of `G = A2 + A1 G + A0 G^2`, iterated as
/// `G <- (I - A1 - A0 G)^{-1} A2` from zero.
pub fn first_passage_matrix(blocks: &LevelBlocks) -> Result<Mat2> {
    let mut g = Mat2::ZERO;
    for it in 0..10_000_000 {
        let next = (Mat2::IDENTITY - blocks.a1 - blocks.a0 * g).inverse()? * blocks.a2;
        let change = next.max_abs_diff(&g);
        g = next;
        if change <= 1e-15 && it > 0 {
            return Ok(g);
        }
    }
    Err(Error::NoConvergence {
        iterations: 10_000_000,
        residual: (blocks.a2 + blocks.a1 * g + blocks.a0 * g * g).max_abs_diff(&g),
    })
}

/// Probability of reaching level `x_max` before level 0 from level 1.
///
/// Block elimination on `v_x = A0 v_{x+1} + A1 v_x + A2 v_{x-1}` with
/// `v_0 = 0` and `v_{x_max} = 1`.
fn absorbing_solve(blocks: &LevelBlocks, x_max: usize) -> Result<[f64; 2]> {
    let eye_minus_a1 = Mat2::IDENTITY - blocks.a1;
    // v_x = M_x v_{x+1}
    let mut m = alloc::vec::Vec::with_capacity(x_max);
    let mut prev = Mat2::ZERO;
    for _ in 1..x_max {
        let cur = (eye_minus_a1 - blocks.a2 * prev).inverse()? * blocks.a0;
        m.push(cur);
        prev = cur;
    }
    let mut v = [1.0, 1.0];
    for mx in m.iter().rev() {
        v = mx.right_mul(v);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params_a() -> ModelParams {
        ModelParams::new(10.0, 11.0, 0.1, 10.0, 1.0, 31.1)
    }

    #[test]
    fn blocks_are_stochastic() {
        let b = twisted_blocks(&params_a()).unwrap();
        for row in (b.a0 + b.a1 + b.a2).row_sums() {
            assert_relative_eq!(row, 1.0, epsilon = 1e-14);
        }
        let d = twist::horizontal_drift(&params_a(), Model::Model1).unwrap();
        assert_relative_eq!(b.drift(), d.closed_form, epsilon = 1e-14);
    }

    #[test]
    fn params_a_escape() {
        let e = escape_probabilities(&params_a()).unwrap();
        assert_relative_eq!(e.from_zero[0], 0.028_317_85, max_relative = 1e-6);
        assert_relative_eq!(e.from_zero[1], 0.056_635_71, max_relative = 1e-6);
        assert!(e.method_gap <= 1e-8);
        for h in e.from_zero {
            assert!(h > 0.0 && h < 1.0);
        }
    }

    #[test]
    fn recurrent_blocks_never_escape() {
        let b = twisted_blocks(&params_a()).unwrap();
        let flipped = LevelBlocks {
            a0: b.a2,
            a1: b.a1,
            a2: b.a0,
        };
        let e = escape_from_level_one(&flipped).unwrap();
        assert_eq!(e.from_one, [0.0, 0.0]);
    }
}
