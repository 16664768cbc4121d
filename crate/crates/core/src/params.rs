//! Model parameters, server status and chain states.

use alloc::format;

use crate::error::{Error, Result};

/// Which chain a state or computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Model {
    /// Single unreliable server.
    Model1,
    /// Reliable server 2 feeding unreliable server 1, with feedback `1 - p`.
    Model2,
    /// Model 2 where a down server 1 blocks the transfer from server 2
    /// (random-selection random-destination rerouting).
    RsRd,
}

impl Model {
    /// Whether states of this model carry a second queue coordinate.
    pub fn has_second_queue(self) -> bool {
        !matches!(self, Model::Model1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ServerStatus {
    Up,
    Down,
}

impl ServerStatus {
    pub const ALL: [ServerStatus; 2] = [ServerStatus::Up, ServerStatus::Down];

    /// Row/column index used by every 2x2 phase matrix (`Up` = 0).
    #[inline]
    pub fn index(self) -> usize {
        match self {
            ServerStatus::Up => 0,
            ServerStatus::Down => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            ServerStatus::Up
        } else {
            ServerStatus::Down
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            ServerStatus::Up => ServerStatus::Down,
            ServerStatus::Down => ServerStatus::Up,
        }
    }

    /// One-letter code used in the text formats.
    pub fn code(self) -> &'static str {
        match self {
            ServerStatus::Up => "U",
            ServerStatus::Down => "D",
        }
    }
}

/// A state of the embedded chain.
///
/// `x` is the queue at the unreliable server. It may be negative on free
/// processes. `y` is the queue at the reliable server and is always 0 for
/// Model 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State {
    pub model: Model,
    pub x: i64,
    pub y: i64,
    pub status: ServerStatus,
}

impl State {
    pub fn model1(x: i64, status: ServerStatus) -> Self {
        State {
            model: Model::Model1,
            x,
            y: 0,
            status,
        }
    }

    pub fn model2(x: i64, y: i64, status: ServerStatus) -> Self {
        State {
            model: Model::Model2,
            x,
            y,
            status,
        }
    }

    pub fn rs_rd(x: i64, y: i64, status: ServerStatus) -> Self {
        State {
            model: Model::RsRd,
            x,
            y,
            status,
        }
    }

    pub fn new(model: Model, x: i64, y: i64, status: ServerStatus) -> Self {
        State {
            model,
            x,
            y: if model.has_second_queue() { y } else { 0 },
            status,
        }
    }

    #[inline]
    pub(crate) fn moved(self, dx: i64, dy: i64, status: ServerStatus) -> Self {
        State {
            x: self.x + dx,
            y: self.y + dy,
            status,
            ..self
        }
    }

    /// True when the state lies in the state space of the chain with
    /// boundary (`x >= 0`, `y >= 0`).
    pub fn is_full_chain_state(&self) -> bool {
        self.x >= 0 && self.y >= 0
    }
}

/// Rates of the continuous-time model plus the uniformization constant.
///
/// Values are plain data; use [`ModelParams::validate`] before handing them
/// to anything that assumes the invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    pub lambda: f64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Probability that a customer served at the unreliable server leaves.
    pub p: f64,
    /// Uniformization constant.
    #[cfg_attr(feature = "serde", serde(rename = "C"))]
    pub c: f64,
}

fn check_rates(lambda: f64, mu: f64, alpha: f64, beta: f64) -> Result<()> {
    for (name, v) in [
        ("lambda", lambda),
        ("mu", mu),
        ("alpha", alpha),
        ("beta", beta),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be > 0")));
        }
    }
    Ok(())
}

/// Total event rate that makes every diagonal entry of the uniformized
/// kernel nonnegative.
///
/// Model 1 has at most one service active at a time. Model 2 and the
/// RS-RD network both run two services in the `Up` status.
pub fn default_uniformization(
    lambda: f64,
    mu: f64,
    alpha: f64,
    beta: f64,
    model: Model,
) -> Result<f64> {
    check_rates(lambda, mu, alpha, beta)?;
    Ok(match model {
        Model::Model1 => lambda + mu + alpha + beta,
        Model::Model2 | Model::RsRd => lambda + 2.0 * mu + alpha + beta,
    })
}

impl ModelParams {
    pub fn new(lambda: f64, mu: f64, alpha: f64, beta: f64, p: f64, c: f64) -> Self {
        ModelParams {
            lambda,
            mu,
            alpha,
            beta,
            p,
            c,
        }
    }

    /// Builds validated parameters with `C` set by [`default_uniformization`].
    pub fn with_default_uniformization(
        lambda: f64,
        mu: f64,
        alpha: f64,
        beta: f64,
        p: f64,
        model: Model,
    ) -> Result<Self> {
        let c = default_uniformization(lambda, mu, alpha, beta, model)?;
        ModelParams::new(lambda, mu, alpha, beta, p, c).validate(model)
    }

    /// Returns the parameters unchanged when every invariant holds for
    /// `model`.
    pub fn validate(self, model: Model) -> Result<Self> {
        check_rates(self.lambda, self.mu, self.alpha, self.beta)?;
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in (0, 1], got {}",
                self.p
            )));
        }
        if model == Model::Model1 && self.p != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "p must be 1 for model1, got {}",
                self.p
            )));
        }
        let required = default_uniformization(self.lambda, self.mu, self.alpha, self.beta, model)?;
        // allow for rounding when C was typed in decimal
        if !(self.c >= required * (1.0 - 1e-12)) || !self.c.is_finite() {
            let bound = match model {
                Model::Model1 => "λ+μ+α+β",
                Model::Model2 | Model::RsRd => "λ+2μ+α+β",
            };
            return Err(Error::InvalidParameter(format!(
                "C below {bound} ({} < {required})",
                self.c
            )));
        }
        Ok(self)
    }

    /// `beta / (alpha + beta) * mu`, the long-run service capacity of the
    /// unreliable server.
    pub fn effective_rate(&self) -> f64 {
        self.beta / (self.alpha + self.beta) * self.mu
    }

    /// Same parameters with a different breakdown rate; `C` is rescaled by
    /// the change in `alpha` so the slack above the minimum is preserved.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        ModelParams {
            alpha,
            c: self.c - self.alpha + alpha,
            ..*self
        }
    }

    pub(crate) fn require_stable(&self) -> Result<()> {
        if self.lambda < self.effective_rate() * self.p {
            Ok(())
        } else {
            Err(Error::Unstable {
                lambda: self.lambda,
                effective_rate: self.effective_rate() * self.p,
            })
        }
    }
}
