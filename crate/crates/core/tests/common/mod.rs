#![allow(dead_code)]

use proptest::prelude::*;
use unreliable_core::{default_uniformization, Model, ModelParams};

/// Parameters with `lambda = load * beta mu p / (alpha + beta)`.
pub fn params_with_load(model: Model, load: std::ops::Range<f64>, p_range: std::ops::RangeInclusive<f64>) -> impl Strategy<Value = ModelParams> {
    (1.0f64..50.0, 0.01f64..5.0, 0.1f64..20.0, load, p_range, 0.0f64..2.0).prop_map(
        move |(mu, alpha, beta, load, p, slack)| {
            let p = if model == Model::Model1 { 1.0 } else { p };
            let lambda = load * beta * mu * p / (alpha + beta);
            let c = default_uniformization(lambda, mu, alpha, beta, model).unwrap() + slack;
            ModelParams::new(lambda, mu, alpha, beta, p, c)
        },
    )
}

pub fn stable(model: Model) -> impl Strategy<Value = ModelParams> {
    params_with_load(model, 0.05..0.95, 0.3..=1.0)
}

pub fn stable_tandem() -> impl Strategy<Value = ModelParams> {
    params_with_load(Model::Model2, 0.05..0.95, 1.0..=1.0)
}

pub fn params_a() -> ModelParams {
    ModelParams::new(10.0, 11.0, 0.1, 10.0, 1.0, 31.1)
}

pub fn params_b() -> ModelParams {
    ModelParams::new(20.0, 60.0, 0.01, 1.0, 1.0, 81.01)
}
