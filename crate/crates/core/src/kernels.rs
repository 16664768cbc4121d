//! One-step transition rows of the uniformized chains.
//!
//! Rows are built on demand for a single origin state, so the infinite
//! state space is never materialized. Moves that would leave the state
//! space are folded into the diagonal.

use arrayvec::ArrayVec;

use crate::error::{Error, Result};
use crate::params::{Model, ModelParams, ServerStatus, State};

/// Largest out-degree of any chain here, diagonal included.
pub const MAX_TARGETS: usize = 6;

/// Sparse transition distribution out of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRow {
    pub origin: State,
    pub targets: ArrayVec<(State, f64), MAX_TARGETS>,
}

impl TransitionRow {
    /// Probability of moving to `to` (zero when absent).
    pub fn prob(&self, to: &State) -> f64 {
        self.targets
            .iter()
            .filter(|(s, _)| s == to)
            .map(|(_, p)| *p)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.targets.iter().map(|(_, p)| *p).sum()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Expected increment of the `x` coordinate.
    pub fn mean_dx(&self) -> f64 {
        self.targets
            .iter()
            .map(|(s, p)| (s.x - self.origin.x) as f64 * p)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(State, f64)> {
        self.targets.iter()
    }

    /// Target selected by a uniform draw `u` in `[0, 1)` (inverse CDF in
    /// row order; the last target absorbs rounding).
    pub fn sample(&self, u: f64) -> State {
        let mut acc = 0.0;
        for (s, p) in &self.targets {
            acc += p;
            if u < acc {
                return *s;
            }
        }
        self.targets.last().expect("rows are never empty").0
    }
}

/// A move in rate units: displacement, new status and rate.
#[derive(Debug, Clone, Copy)]
struct Move {
    dx: i64,
    dy: i64,
    status: ServerStatus,
    rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Boundary {
    /// Moves to `x < 0` are suppressed.
    Reflecting,
    /// The level coordinate is unrestricted.
    Free,
}

fn mv(dx: i64, dy: i64, status: ServerStatus, rate: f64) -> Move {
    Move {
        dx,
        dy,
        status,
        rate,
    }
}

/// Rate moves out of `state`, excluding the diagonal.
fn moves(params: &ModelParams, state: &State, boundary: Boundary) -> ArrayVec<Move, MAX_TARGETS> {
    let ModelParams {
        lambda,
        mu,
        alpha,
        beta,
        p,
        ..
    } = *params;
    let s = state.status;
    let server1_busy = boundary == Boundary::Free || state.x >= 1;
    let mut out = ArrayVec::new();
    match state.model {
        Model::Model1 => {
            out.push(mv(1, 0, s, lambda));
            match s {
                ServerStatus::Up => {
                    if server1_busy {
                        out.push(mv(-1, 0, s, mu));
                    }
                    out.push(mv(0, 0, ServerStatus::Down, alpha));
                }
                ServerStatus::Down => out.push(mv(0, 0, ServerStatus::Up, beta)),
            }
        }
        Model::Model2 | Model::RsRd => {
            out.push(mv(0, 1, s, lambda));
            if s == ServerStatus::Up && server1_busy {
                out.push(mv(-1, 0, s, mu * p));
                out.push(mv(-1, 1, s, mu * (1.0 - p)));
            }
            // server 2 hands its customer to server 1; under RS-RD a down
            // server 1 blocks the transfer and the customer stays put
            let blocked = state.model == Model::RsRd && s == ServerStatus::Down;
            if state.y >= 1 && !blocked {
                out.push(mv(1, -1, s, mu));
            }
            match s {
                ServerStatus::Up => out.push(mv(0, 0, ServerStatus::Down, alpha)),
                ServerStatus::Down => out.push(mv(0, 0, ServerStatus::Up, beta)),
            }
        }
    }
    out
}

fn assemble(params: &ModelParams, state: State, moves: &[Move]) -> TransitionRow {
    let mut targets = ArrayVec::new();
    let mut out_rate = 0.0;
    for m in moves.iter().filter(|m| m.rate > 0.0) {
        out_rate += m.rate;
        targets.push((state.moved(m.dx, m.dy, m.status), m.rate / params.c));
    }
    targets.push((state, 1.0 - out_rate / params.c));
    TransitionRow {
        origin: state,
        targets,
    }
}

/// Row of the chain with its boundary (`x >= 0`, `y >= 0`).
///
/// The model is taken from `state.model`; an RS-RD state yields the RS-RD
/// row, see [`rs_rd_kernel`].
pub fn full_kernel(params: &ModelParams, state: State) -> Result<TransitionRow> {
    if state.x < 0 || state.y < 0 {
        return Err(Error::InvalidState {
            model: state.model,
            state,
            reason: "full-chain states need nonnegative queue lengths",
        });
    }
    let m = moves(params, &state, Boundary::Reflecting);
    Ok(assemble(params, state, &m))
}

/// Row of the free process: the boundary at `x = 0` is removed and the
/// kernel is invariant under shifts of `x`.
pub fn free_kernel(params: &ModelParams, state: State) -> Result<TransitionRow> {
    match state.model {
        Model::RsRd => Err(Error::Unsupported("the RS-RD network has no free process here")),
        Model::Model2 if state.y < 0 => Err(Error::InvalidState {
            model: state.model,
            state,
            reason: "free Model 2 states need y >= 0",
        }),
        _ => {
            let m = moves(params, &state, Boundary::Free);
            Ok(assemble(params, state, &m))
        }
    }
}

/// Row of the comparison network: Model 2 without the server-2 service move
/// while server 1 is down.
pub fn rs_rd_kernel(params: &ModelParams, x: i64, y: i64, status: ServerStatus) -> Result<TransitionRow> {
    full_kernel(params, State::rs_rd(x, y, status))
}
