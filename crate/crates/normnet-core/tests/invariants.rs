//! Property-based invariants across modules: serialization round-trips,
//! algebra function soundness, and certificate audits of every builder.

use std::sync::Arc;

use normnet_core::activations::Registry;
use normnet_core::algebra::{compose, concat, lincomb, pad};
use normnet_core::constructors::{build_product2, build_square, build_square_auto};
use normnet_core::grid::{measure_lipschitz_empirical, EvalBox};
use normnet_core::network::{check_norm_constraint, ArchitectureCert, Layer, Network};
use normnet_core::randomized::{build_random_square, RngSpec};
use proptest::prelude::*;

fn entry(tag: &str) -> Arc<normnet_core::ActivationEntry> {
    Registry::global().resolve(tag).unwrap()
}

/// A random small bias-free ReLU network for structural property tests.
fn small_net(seed: &[f64], scale: f64) -> Network {
    let relu = entry("relu");
    let id = entry("identity");
    let l0 = Layer::uniform(
        vec![vec![seed[0], seed[1]], vec![seed[2], seed[3]]],
        vec![0.0, 0.0],
        &relu,
    );
    let l1 = Layer::uniform(vec![vec![scale, -scale]], vec![0.0], &id);
    let norm0 = seed[0].abs() + seed[1].abs();
    let norm0 = norm0.max(seed[2].abs() + seed[3].abs());
    let k = (2.0 * scale.abs()).max(1.0) * norm0.max(1.0);
    let mut constrained = vec![];
    if 2.0 * scale.abs() > 1.0 {
        constrained.push(1);
    }
    if norm0 > 1.0 {
        constrained.push(0);
    }
    Network::new(
        2,
        vec![l0, l1],
        ArchitectureCert::new(2, 1, k, constrained, 1).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialization_round_trip(
        w in prop::collection::vec(-3.0f64..3.0, 4),
        scale in -4.0f64..4.0,
    ) {
        let net = small_net(&w, scale);
        let json = net.to_json();
        let back = Network::from_json_builtin(&json).unwrap();
        prop_assert!(net.structurally_equal(&back));
        // Round-trip again: serialization is a fixed point.
        prop_assert_eq!(json, back.to_json());
    }

    #[test]
    fn lincomb_matches_pointwise_formula(
        w in prop::collection::vec(-2.0f64..2.0, 4),
        scale in -2.0f64..2.0,
        c1 in -3.0f64..3.0,
        c2 in -3.0f64..3.0,
        x in prop::collection::vec(-1.0f64..1.0, 2),
    ) {
        let a = small_net(&w, scale);
        let b = small_net(&[w[1], w[3], w[0], w[2]], -scale);
        let c = lincomb(c1, &a, c2, &b).unwrap();
        let want = c1 * a.eval_scalar(&x).unwrap() + c2 * b.eval_scalar(&x).unwrap();
        let got = c.eval_scalar(&x).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn concat_matches_pairwise_eval(
        w in prop::collection::vec(-2.0f64..2.0, 4),
        scale in -2.0f64..2.0,
        x in prop::collection::vec(-1.0f64..1.0, 2),
    ) {
        let a = small_net(&w, scale);
        let b = small_net(&[w[2], w[0], w[3], w[1]], 0.5 * scale);
        let c = concat(&a, &b).unwrap();
        let out = c.eval(&x).unwrap();
        prop_assert!((out[0] - a.eval_scalar(&x).unwrap()).abs() <= 1e-12);
        prop_assert!((out[1] - b.eval_scalar(&x).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn compose_matches_two_step(
        w in prop::collection::vec(-1.5f64..1.5, 4),
        scale in -1.5f64..1.5,
        x in prop::collection::vec(-1.0f64..1.0, 2),
    ) {
        let inner = small_net(&w, scale);
        // Outer: scalar -> scalar ReLU pair.
        let relu = entry("relu");
        let id = entry("identity");
        let outer = Network::new(
            1,
            vec![
                Layer::uniform(vec![vec![1.0], vec![-1.0]], vec![0.0, 0.0], &relu),
                Layer::uniform(vec![vec![0.7, 0.7]], vec![0.0], &id),
            ],
            ArchitectureCert::new(2, 1, 1.4, [1], 1).unwrap(),
        )
        .unwrap();
        let c = compose(&outer, &inner).unwrap();
        let want = outer.eval_scalar(&inner.eval(&x).unwrap()).unwrap();
        let got = c.eval_scalar(&x).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn padding_never_changes_values(
        w in prop::collection::vec(-2.0f64..2.0, 4),
        scale in -2.0f64..2.0,
        extra_w in 0usize..3,
        extra_l in 0usize..3,
        x in prop::collection::vec(-1.0f64..1.0, 2),
    ) {
        let net = small_net(&w, scale);
        let p = pad(&net, net.cert.width + extra_w, net.cert.depth + extra_l).unwrap();
        let a = net.eval_scalar(&x).unwrap();
        let b = p.eval_scalar(&x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn builders_pass_audits_and_lipschitz_certificates() {
    // A spread of deterministic and randomized constructions; every one
    // must pass its own certificate audit, and the measured Lipschitz
    // constant must stay below the declared budget.
    let silu = entry("silu");
    let case_a = entry("caseA");
    let mut checked = 0;
    for k in [8u64, 16, 32] {
        for alpha in [0.5, 1.0] {
            let mut nets = vec![build_square(&silu, k, alpha).unwrap().network];
            if let Ok(a) = build_product2(&silu, k, alpha) {
                nets.push(a.network);
            }
            nets.push(build_square_auto(&case_a, k, alpha).unwrap().network);
            nets.push(
                build_random_square(&silu, k, alpha, &RngSpec::new(k * 7 + 1))
                    .unwrap()
                    .network,
            );
            for net in nets {
                let report = check_norm_constraint(&net);
                assert!(report.ok, "k={k}, alpha={alpha}: {report:?}");
                let domain = if net.input_dim == 1 {
                    EvalBox::unit(1)
                } else {
                    EvalBox::symmetric(net.input_dim)
                };
                let lip = measure_lipschitz_empirical(&net, &domain, 2000, 99).unwrap();
                assert!(
                    lip <= net.cert.norm_budget + 1e-9,
                    "k={k}, alpha={alpha}: lip {lip} vs K {}",
                    net.cert.norm_budget
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 20);
}

#[test]
fn augment_preserves_values_on_random_inputs() {
    let a = build_square(&entry("silu"), 16, 1.0).unwrap().network;
    let aug = normnet_core::augment(&a).unwrap();
    for x in EvalBox::unit(1).sample(1000, 5) {
        let mut xa = x.clone();
        xa.push(1.0);
        let d = (a.eval_scalar(&x).unwrap() - aug.eval_scalar(&xa).unwrap()).abs();
        assert!(d <= 1e-12, "deviation {d}");
    }
    assert!(check_norm_constraint(&aug).ok);
}
