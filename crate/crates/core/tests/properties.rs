mod common;

use common::*;
use proptest::prelude::*;
use valign::aggregation::{aggregate, kendall_cost, Method, TiePolicy};
use valign::harness::{segment_transcript, CharHeuristic, SegmentConfig};
use valign::metrics::{
    f1_at_k, jaccard_at_k, krippendorff_alpha, rbo_at_k, AlphaConfig, RboConfig, SetDistance,
};
use valign::synth::{oracle_alpha, oracle_kemeny};
use valign::uncertainty::{bootstrap, BootstrapConfig};
use valign::{top_k, PanelMatrix, Ranking, ValueId};

const LETTERS: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

fn perm(n: usize) -> impl Strategy<Value = Ranking> {
    Just(LETTERS[..n].to_vec())
        .prop_shuffle()
        .prop_map(|v| Ranking::from_names(&v).unwrap())
}

/// A random ordering of a random subset of the letters, at least `min` long.
fn partial(min: usize) -> impl Strategy<Value = Ranking> {
    (Just(LETTERS.to_vec()).prop_shuffle(), min..=LETTERS.len())
        .prop_map(|(v, n)| Ranking::from_names(&v[..n]).unwrap())
}

fn voters(n: usize) -> impl Strategy<Value = Vec<Ranking>> {
    prop::collection::vec(perm(n), 1..7)
}

fn distance() -> impl Strategy<Value = SetDistance> {
    prop_oneof![
        Just(SetDistance::Jaccard),
        Just(SetDistance::Masi),
        Just(SetDistance::Nominal)
    ]
}

/// Panels with 2-5 experts over up to 6 interviews, some cells missing.
fn sparse_panel() -> impl Strategy<Value = PanelMatrix> {
    (2usize..6, 1usize..7)
        .prop_flat_map(|(judges, interviews)| {
            prop::collection::vec((partial(3), prop::bool::weighted(0.8)), judges * interviews)
                .prop_map(move |cells| (judges, cells))
        })
        .prop_map(|(judges, cells)| {
            let mut recs = Vec::new();
            for (i, (r, present)) in cells.into_iter().enumerate() {
                if present {
                    recs.push(expert(&format!("u{}", i / judges), &format!("j{}", i % judges), r));
                }
            }
            if recs.is_empty() {
                recs.push(expert("u0", "j0", ranking("abc")));
            }
            panel(recs)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn f1_is_a_function_of_jaccard(a in partial(3), b in partial(3), k in 1usize..4) {
        let (ta, tb) = (top_k(&a, k).unwrap(), top_k(&b, k).unwrap());
        let f1 = f1_at_k(&ta, &tb).unwrap();
        let j = jaccard_at_k(&ta, &tb).unwrap();
        prop_assert!((f1 - 2.0 * j / (1.0 + j)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&f1) && (0.0..=1.0).contains(&j));
        prop_assert_eq!(f1, f1_at_k(&tb, &ta).unwrap());
        prop_assert_eq!(j, jaccard_at_k(&tb, &ta).unwrap());
    }

    #[test]
    fn rbo_is_bounded_and_symmetric(a in partial(3), b in partial(3), p in 0.05f64..0.99) {
        let cfg = RboConfig { p, k: 3, ..RboConfig::default() };
        let ab = rbo_at_k(&a, &b, &cfg).unwrap().value;
        let ba = rbo_at_k(&b, &a, &cfg).unwrap().value;
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((rbo_at_k(&a, &a, &cfg).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aggregators_are_anonymous(vs in voters(6), method in prop_oneof![Just(Method::Kemeny), Just(Method::Borda), Just(Method::Majority)]) {
        let forward = aggregate(method, &vs, 3, TiePolicy::default()).unwrap();
        let mut rev = vs.clone();
        rev.reverse();
        let backward = aggregate(method, &rev, 3, TiePolicy::default()).unwrap();
        prop_assert_eq!(forward.ranking, backward.ranking);
    }

    #[test]
    fn aggregators_respect_unanimity(r in perm(7), n in 1usize..6) {
        let vs = vec![r.clone(); n];
        for m in Method::ALL {
            let out = aggregate(m, &vs, 3, TiePolicy::default()).unwrap();
            match m {
                Method::Majority => prop_assert_eq!(out.ranking.prefix(3).unwrap(), r.prefix(3).unwrap()),
                _ => prop_assert_eq!(&out.ranking, &r),
            }
        }
    }

    #[test]
    fn kemeny_is_optimal(vs in voters(6), lex in any::<bool>()) {
        let policy = if lex { TiePolicy::Lexicographic } else { TiePolicy::default() };
        let dp = aggregate(Method::Kemeny, &vs, 3, policy).unwrap();
        let (best, cost) = oracle_kemeny(&vs, policy).unwrap();
        prop_assert_eq!(dp.cost, Some(cost));
        prop_assert_eq!(&dp.ranking, &best);
        let borda = aggregate(Method::Borda, &vs, 3, policy).unwrap();
        prop_assert!(cost <= kendall_cost(&borda.ranking, &vs));
    }

    #[test]
    fn kemeny_handles_partial_voters(vs in prop::collection::vec(partial(2), 2..6)) {
        let dp = aggregate(Method::Kemeny, &vs, 2, TiePolicy::default()).unwrap();
        let (best, cost) = oracle_kemeny(&vs, TiePolicy::default()).unwrap();
        prop_assert_eq!(dp.cost, Some(cost));
        prop_assert_eq!(dp.ranking, best);
    }

    #[test]
    fn alpha_matches_oracle(p in sparse_panel(), d in distance(), k in 1usize..4) {
        let cols = p.expert_columns();
        let cfg = AlphaConfig { distance: d, k };
        match (krippendorff_alpha(&p, &cols, &cfg), oracle_alpha(&p, &cols, &cfg)) {
            (Ok(fast), Ok(slow)) => prop_assert!((fast.alpha - slow).abs() < 1e-12, "{} vs {}", fast.alpha, slow),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "disagree on definedness: {:?} / {:?}", a.map(|o| o.alpha), b),
        }
    }

    #[test]
    fn panel_survives_json_and_csv(p in sparse_panel()) {
        let mut json = Vec::new();
        p.write_json(&mut json).unwrap();
        prop_assert_eq!(&PanelMatrix::read_json(json.as_slice()).unwrap().records(), &p.records());
        let mut csv = Vec::new();
        p.write_csv(&mut csv).unwrap();
        prop_assert_eq!(&PanelMatrix::read_csv(csv.as_slice()).unwrap().records(), &p.records());
    }

    #[test]
    fn bootstrap_is_schedule_independent(xs in prop::collection::vec(prop::option::weighted(0.9, 0.0f64..1.0), 2..30), seed in any::<u64>()) {
        prop_assume!(xs.iter().filter(|x| x.is_some()).count() >= 2);
        let serial = BootstrapConfig { replicates: 200, confidence: 0.9, seed, parallel: false };
        let parallel = BootstrapConfig { parallel: true, ..serial };
        let a = bootstrap(&xs, &serial).unwrap();
        let b = bootstrap(&xs, &parallel).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.ci_low <= a.ci_high);
    }

    #[test]
    fn segmentation_round_trips(words in prop::collection::vec("[a-z]{1,9}", 1..400), budget in 20usize..200) {
        let mut text = String::new();
        for (i, w) in words.iter().enumerate() {
            text.push_str(w);
            text.push_str(if i % 7 == 6 { ". " } else { " " });
        }
        let cfg = SegmentConfig { budget, word_fallback: false };
        match segment_transcript(&text, &cfg, &CharHeuristic) {
            Ok(segs) => {
                let joined: String = segs.iter().map(|s| s.text.as_str()).collect();
                prop_assert_eq!(joined, text);
                for s in &segs {
                    prop_assert!(s.token_estimate <= budget);
                }
            }
            Err(e) => prop_assert!(e.to_string().contains("budget"), "{e}"),
        }
    }
}

#[test]
fn value_ids_are_normalized() {
    assert_eq!(ValueId::new("Self Direction"), ValueId::new("self-direction"));
}
