use artcloud_core::art2::{activation, stabilize_f1, vigilance_residual};
use artcloud_core::{Art2Network, Art2Params};
use proptest::prelude::*;

/// Nonzero vectors with entries in [0, 1].
fn pattern(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, m).prop_filter("nonzero", |v| v.iter().any(|&x| x > 1e-3))
}

fn patterns(count: usize, m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(pattern(m), 1..=count)
}

proptest! {
    #[test]
    fn activation_is_bounded_and_monotone(x in 0.0f64..2.0, dx in 0.0f64..0.5, theta in 0.01f64..1.0) {
        let fx = activation(x, theta).unwrap();
        prop_assert!(fx >= 0.0 && fx <= x + 1e-15);
        prop_assert!(activation(x + dx, theta).unwrap() >= fx);
    }

    #[test]
    fn stabilized_layers_are_unit_norm(input in pattern(12)) {
        let f1 = stabilize_f1(&input, None, &Art2Params::default()).unwrap();
        for layer in [&f1.x, &f1.u, &f1.q] {
            let n = layer.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((n - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn residual_lies_in_unit_interval(input in pattern(8), top_down in prop::collection::vec(0.0f64..10.0, 8)) {
        let params = Art2Params::default();
        let f1 = stabilize_f1(&input, None, &params).unwrap();
        let probe = f1.with_top_down(&top_down, &params).unwrap();
        let r = vigilance_residual(&probe, &params);
        prop_assert!(r > 0.0 && r <= 1.0 + 1e-12, "{}", r);
    }

    #[test]
    fn frozen_winner_is_scale_invariant(train in patterns(10, 6), probe in pattern(6), k in 0.05f64..1.0) {
        let mut net = Art2Network::new(Art2Params::default().with_rho(0.9), 6).unwrap();
        for p in &train {
            net.present(p, true).unwrap();
        }
        let scaled: Vec<f64> = probe.iter().map(|v| v * k).collect();
        prop_assume!(scaled.iter().any(|&v| v > 1e-9));
        let a = net.classify(&probe).unwrap();
        let b = net.classify(&scaled).unwrap();
        prop_assert_eq!(a.node, b.node);
    }

    #[test]
    fn training_is_deterministic(train in patterns(15, 5)) {
        let run = || {
            let mut net = Art2Network::new(Art2Params::default().with_rho(0.95), 5).unwrap();
            let labels: Vec<_> = train.iter().map(|p| net.present(p, true).unwrap().node).collect();
            (labels, net.to_json())
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn zero_vigilance_never_resets(train in patterns(20, 7)) {
        let mut net = Art2Network::new(Art2Params::default().with_rho(0.0), 7).unwrap();
        for p in &train {
            let a = net.present(p, true).unwrap();
            prop_assert_eq!(a.resets, 0);
            prop_assert_eq!(a.node, Some(0));
        }
        prop_assert_eq!(net.committed(), 1);
    }

    #[test]
    fn node_count_is_bounded_and_nondecreasing(train in patterns(25, 4), cap in 1usize..6) {
        let params = Art2Params { max_f2_nodes: cap, ..Art2Params::default().with_rho(0.99) };
        let mut net = Art2Network::new(params, 4).unwrap();
        let mut previous = 0;
        for (i, p) in train.iter().enumerate() {
            if net.present(p, true).is_err() {
                // only capacity exhaustion may stop learning
                prop_assert_eq!(net.committed(), cap);
                break;
            }
            prop_assert!(net.committed() >= previous);
            prop_assert!(net.committed() <= (i + 1).min(cap));
            previous = net.committed();
        }
    }

    #[test]
    fn frozen_classification_changes_nothing(train in patterns(8, 5), probe in pattern(5)) {
        let mut net = Art2Network::new(Art2Params::default(), 5).unwrap();
        for p in &train {
            net.present(p, true).unwrap();
        }
        let before = net.to_json();
        net.present(&probe, false).unwrap();
        prop_assert_eq!(before, net.to_json());
    }

    #[test]
    fn snapshot_round_trips(train in patterns(8, 5)) {
        let mut net = Art2Network::new(Art2Params::default().with_rho(0.97), 5).unwrap();
        for p in &train {
            net.present(p, true).unwrap();
        }
        let back = Art2Network::from_json(&net.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), net.to_json());
    }
}
