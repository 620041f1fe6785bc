mod common;

use common::criteria;
use kltl_synth::formula::{atom, parse, Formula};
use kltl_synth::oracle::ltl_eval_lasso;
use kltl_synth::word_automata::{ltl_to_nbw, ltl_to_ucw, Alphabet, Lasso};
use proptest::prelude::*;

fn ltl() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(atom("p")),
        Just(atom("q")),
        Just(atom("r")),
        Just(Formula::True),
        Just(Formula::False),
    ];
    leaf.prop_recursive(5, 14, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::next),
            inner.clone().prop_map(Formula::always),
            inner.clone().prop_map(Formula::eventually),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::until(a, b)),
        ]
    })
}

fn lasso() -> impl Strategy<Value = Lasso> {
    (
        prop::collection::vec(0u64..8, 0..4),
        prop::collection::vec(0u64..8, 1..5),
    )
        .prop_map(|(prefix, cycle)| Lasso::new(prefix, cycle))
}

fn alphabet() -> Alphabet {
    Alphabet::new(vec!["p".into(), "q".into(), "r".into()]).unwrap()
}

#[test]
fn exhaustive_small_corpus() {
    let out = criteria::word_automata(4, 4);
    assert!(out.pass, "{}", out.detail);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn ucw_matches_evaluation(f in ltl(), ws in prop::collection::vec(lasso(), 8)) {
        let ab = alphabet();
        let ucw = ltl_to_ucw(&f, &ab).unwrap();
        prop_assert!(ucw.automaton().is_complete());
        let nbw = ltl_to_nbw(&f, &ab).unwrap();
        for w in &ws {
            let truth = ltl_eval_lasso(&f, &ab, w);
            prop_assert_eq!(ucw.accepts_lasso(w), truth, "{} on {:?}", f, w);
            prop_assert_eq!(nbw.accepts_lasso(w), truth, "{} on {:?}", f, w);
        }
    }

    #[test]
    fn emptiness_matches_satisfiability_witness(f in ltl(), ws in prop::collection::vec(lasso(), 16)) {
        let ab = alphabet();
        let nbw = ltl_to_nbw(&f, &ab).unwrap();
        if ws.iter().any(|w| ltl_eval_lasso(&f, &ab, w)) {
            prop_assert!(!nbw.is_empty());
        }
    }

    #[test]
    fn display_round_trips(f in ltl()) {
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }
}
