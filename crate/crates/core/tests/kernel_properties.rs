mod common;

use proptest::prelude::*;
use unreliable_core::kernels::{free_kernel, full_kernel};
use unreliable_core::{Model, ServerStatus, State};

fn status() -> impl Strategy<Value = ServerStatus> {
    prop_oneof![Just(ServerStatus::Up), Just(ServerStatus::Down)]
}

fn model() -> impl Strategy<Value = Model> {
    prop_oneof![Just(Model::Model1), Just(Model::Model2), Just(Model::RsRd)]
}

proptest! {
    #[test]
    fn full_rows_are_distributions(m in model(), x in 0i64..50, y in 0i64..50, s in status(),
                                   params in common::params_with_load(Model::Model2, 0.05..1.5, 0.3..=1.0)) {
        let params = if m == Model::Model1 { unreliable_core::ModelParams { p: 1.0, ..params } } else { params };
        let y = if m == Model::Model1 { 0 } else { y };
        let row = full_kernel(&params, State::new(m, x, y, s)).unwrap();
        prop_assert!((row.total() - 1.0).abs() <= 1e-12);
        for (to, p) in row.iter() {
            prop_assert!((0.0..=1.0).contains(p));
            prop_assert!(to.is_full_chain_state());
            prop_assert!((to.x - x).abs() <= 1 && (to.y - y).abs() <= 1);
            prop_assert_eq!(to.model, m);
        }
    }

    #[test]
    fn free_rows_are_shift_invariant(x in -40i64..40, shift in -20i64..20, y in 0i64..10, s in status(),
                                     params in common::stable(Model::Model2)) {
        for (m, yy) in [(Model::Model1, 0), (Model::Model2, y)] {
            let params = if m == Model::Model1 { unreliable_core::ModelParams { p: 1.0, ..params } } else { params };
            let a = free_kernel(&params, State::new(m, x, yy, s)).unwrap();
            let b = free_kernel(&params, State::new(m, x + shift, yy, s)).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for ((sa, pa), (sb, pb)) in a.iter().zip(b.iter()) {
                prop_assert_eq!(sb.x - sa.x, shift);
                prop_assert_eq!((sa.y, sa.status), (sb.y, sb.status));
                prop_assert_eq!(pa, pb);
            }
        }
    }

    #[test]
    fn free_and_full_rows_agree_in_the_interior(x in 1i64..40, y in 1i64..40, s in status(),
                                                params in common::stable(Model::Model2)) {
        let a = free_kernel(&params, State::model2(x, y, s)).unwrap();
        let b = full_kernel(&params, State::model2(x, y, s)).unwrap();
        prop_assert_eq!(a, b);
    }
}
