//! The JSON parameter schema shared by `--params` files and output metadata.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use unreliable_core::{default_uniformization, Model, ModelParams};

/// Flat parameter object:
/// `{"lambda", "mu", "alpha", "beta", "p", "C", "model"}`.
///
/// `p` defaults to 1, `model` to `model1` and `C` to the smallest admissible
/// value for the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub lambda: f64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default = "model1")]
    pub model: Model,
}

fn one() -> f64 {
    1.0
}

fn model1() -> Model {
    Model::Model1
}

impl ParamsFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Validated parameters with `C` filled in.
    pub fn resolve(&self) -> unreliable_core::Result<(ModelParams, Model)> {
        let c = match self.c {
            Some(c) => c,
            None => default_uniformization(self.lambda, self.mu, self.alpha, self.beta, self.model)?,
        };
        let params = ModelParams::new(self.lambda, self.mu, self.alpha, self.beta, self.p, c).validate(self.model)?;
        Ok((params, self.model))
    }

    pub fn from_params(params: &ModelParams, model: Model) -> Self {
        ParamsFile {
            lambda: params.lambda,
            mu: params.mu,
            alpha: params.alpha,
            beta: params.beta,
            p: params.p,
            c: Some(params.c),
            model,
        }
    }
}
