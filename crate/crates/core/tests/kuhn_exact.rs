use gpfsp::kuhn::{exact_best_response_value, expected_value, exploitability, BehavioralPolicy};
use proptest::prelude::*;

// Reference values from an independent rational-arithmetic enumeration of
// every pure responder strategy.
const BR0_VS_UNIFORM: f64 = 1.0 / 2.0;
const BR1_VS_UNIFORM: f64 = 5.0 / 12.0;

#[test]
fn uniform_reference_values() {
    let u = BehavioralPolicy::uniform();
    assert!((exact_best_response_value(&u, 0).unwrap() - BR0_VS_UNIFORM).abs() < 1e-12);
    assert!((exact_best_response_value(&u, 1).unwrap() - BR1_VS_UNIFORM).abs() < 1e-12);
    let e = exploitability(&u, &u).unwrap();
    assert!((e - 11.0 / 12.0).abs() < 1e-12, "{e}");
}

fn best_pure_value(policy: &BehavioralPolicy, responder: usize) -> f64 {
    (0..64u32)
        .map(|bits| {
            let pure = BehavioralPolicy::pure(responder, bits);
            if responder == 0 {
                expected_value(&pure, policy).unwrap()
            } else {
                -expected_value(policy, &pure).unwrap()
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn policy_strategy() -> impl Strategy<Value = BehavioralPolicy> {
    prop::array::uniform12(0.0f64..=1.0).prop_map(|bets| {
        let mut p = BehavioralPolicy::uniform();
        for (row, b) in p.table.iter_mut().zip(bets) {
            *row = [1.0 - b, b];
        }
        p
    })
}

#[test]
fn best_response_equals_best_pure_strategy() {
    for policy in [BehavioralPolicy::uniform(), BehavioralPolicy::nash(0.2).unwrap()] {
        for responder in 0..2 {
            let br = exact_best_response_value(&policy, responder).unwrap();
            assert!((br - best_pure_value(&policy, responder)).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn best_response_dominates_pure(policy in policy_strategy()) {
        for responder in 0..2 {
            let br = exact_best_response_value(&policy, responder).unwrap();
            prop_assert!((br - best_pure_value(&policy, responder)).abs() < 1e-9);
        }
    }

    #[test]
    fn exploitability_nonnegative(p in policy_strategy(), q in policy_strategy()) {
        prop_assert!(exploitability(&p, &q).unwrap() >= -1e-12);
    }
}
