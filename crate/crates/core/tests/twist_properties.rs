mod common;

use proptest::prelude::*;
use unreliable_core::kernels::free_kernel;
use unreliable_core::twist::{self, MarkovPartLaw};
use unreliable_core::{spectral, Model, ServerStatus, State};

fn harmonic_residual(params: &unreliable_core::ModelParams, model: Model) -> f64 {
    let h = twist::harmonic(params, model).unwrap();
    let mut worst = 0.0_f64;
    let ys: Vec<i64> = if model == Model::Model1 { vec![0] } else { (0..=20).collect() };
    for x in -20..=20 {
        for &y in &ys {
            for s in ServerStatus::ALL {
                let from = State::new(model, x, y, s);
                let row = free_kernel(params, from).unwrap();
                let kh: f64 = row.iter().map(|(to, p)| p * h.ratio(&from, to)).sum();
                worst = worst.max((kh - 1.0).abs());
            }
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn harmonic_on_lattice_model1(params in common::stable(Model::Model1)) {
        prop_assert!(harmonic_residual(&params, Model::Model1) <= 1e-10);
    }

    #[test]
    fn harmonic_on_lattice_model2(params in common::stable(Model::Model2)) {
        prop_assert!(harmonic_residual(&params, Model::Model2) <= 1e-10);
    }

    #[test]
    fn twisted_rows_sum_to_one(params in common::stable(Model::Model1), x in -10i64..10) {
        for s in ServerStatus::ALL {
            let row = twist::twisted_kernel(&params, State::model1(x, s)).unwrap();
            prop_assert!((row.total() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn model1_phi_is_stationary(params in common::stable(Model::Model1)) {
        let phi = twist::markov_part_stationary(&params, Model::Model1).unwrap();
        let MarkovPartLaw::TwoState { up, down } = phi else { unreachable!() };
        prop_assert!((up + down - 1.0).abs() <= 1e-12);
        let k2 = twist::model1_phase_kernel(&params).unwrap();
        let moved = k2.left_mul([up, down]);
        prop_assert!((moved[0] - up).abs() <= 1e-12 && (moved[1] - down).abs() <= 1e-12);
    }

    #[test]
    fn drift_is_positive(params in common::stable(Model::Model1)) {
        let d = twist::horizontal_drift(&params, Model::Model1).unwrap();
        prop_assert!(d.closed_form > 0.0);
    }

    #[test]
    fn tandem_identities(params in common::stable_tandem()) {
        let rates = twist::model2_twist_rates(&params).unwrap();
        let roots = spectral::characteristic_roots(&params);
        prop_assert!(rates.load() > 0.0 && rates.load() < 1.0);
        prop_assert!((rates.load() * roots.gamma_p - params.lambda / params.mu).abs() <= 1e-12);
        prop_assert!(rates.b > 0.0 && rates.b < 1.0);
        let g = roots.g_constant.unwrap();
        prop_assert!((params.c * (rates.alpha + rates.beta) - g).abs() <= 1e-12 * g.max(1.0));
        let d = twist::horizontal_drift(&params, Model::Model2).unwrap();
        prop_assert!(d.closed_form > 0.0);
    }
}
