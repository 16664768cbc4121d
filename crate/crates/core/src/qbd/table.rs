use alloc::vec::Vec;

use crate::params::{Model, ServerStatus, State};

/// Stationary probabilities on the box `0 <= x <= x_max`, `0 <= y <= y_max`.
///
/// Model 1 tables have `y_max = 0`. Entries outside the box read as zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StationaryTable {
    pub model: Model,
    pub x_max: u32,
    pub y_max: u32,
    probs: Vec<f64>,
    /// Largest global-balance violation observed.
    pub residual: f64,
    /// Bound on the probability mass outside the box.
    pub tail_mass_bound: f64,
    /// Set when the tail mass exceeds `1e-8`.
    pub truncation_warning: bool,
}

impl StationaryTable {
    pub(crate) fn from_parts(model: Model, x_max: u32, y_max: u32, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), lattice_len(x_max, y_max));
        StationaryTable {
            model,
            x_max,
            y_max,
            probs,
            residual: 0.0,
            tail_mass_bound: 0.0,
            truncation_warning: false,
        }
    }

    pub fn get(&self, state: &State) -> f64 {
        self.at(state.x, state.y, state.status)
    }

    pub fn at(&self, x: i64, y: i64, status: ServerStatus) -> f64 {
        match lattice_index(self.x_max, self.y_max, x, y, status) {
            Some(i) => self.probs[i],
            None => 0.0,
        }
    }

    /// Position of `state` in [`StationaryTable::values`].
    pub fn index_of(&self, state: &State) -> Option<usize> {
        lattice_index(self.x_max, self.y_max, state.x, state.y, state.status)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn values(&self) -> &[f64] {
        &self.probs
    }

    /// All entries in lattice order (`x`, then `y`, then `Up` before `Down`).
    pub fn iter(&self) -> impl Iterator<Item = (State, f64)> + '_ {
        let model = self.model;
        let ny = self.y_max as usize + 1;
        self.probs.iter().enumerate().map(move |(i, &p)| {
            let status = ServerStatus::from_index(i % 2);
            let cell = i / 2;
            let state = State::new(model, (cell / ny) as i64, (cell % ny) as i64, status);
            (state, p)
        })
    }

    /// Marginal mass of the `Up` status.
    pub fn up_marginal(&self) -> f64 {
        self.probs.iter().step_by(2).sum()
    }

    /// `sum_{x, y} |a - b|` / 2 over the union of both boxes.
    pub fn total_variation(&self, other: &StationaryTable) -> f64 {
        let x_max = i64::from(self.x_max.max(other.x_max));
        let y_max = i64::from(self.y_max.max(other.y_max));
        let mut sum = 0.0;
        for x in 0..=x_max {
            for y in 0..=y_max {
                for s in ServerStatus::ALL {
                    sum += (self.at(x, y, s) - other.at(x, y, s)).abs();
                }
            }
        }
        0.5 * sum
    }
}

pub(crate) fn lattice_len(x_max: u32, y_max: u32) -> usize {
    (x_max as usize + 1) * (y_max as usize + 1) * 2
}

#[inline]
pub(crate) fn lattice_index(x_max: u32, y_max: u32, x: i64, y: i64, status: ServerStatus) -> Option<usize> {
    if x < 0 || y < 0 || x > i64::from(x_max) || y > i64::from(y_max) {
        return None;
    }
    Some(((x as usize) * (y_max as usize + 1) + y as usize) * 2 + status.index())
}
