mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use suffice::corpus::{gen_corpus, CorpusLimits, BRUTE_MAX_BITS};
use suffice::estimators::{
    intersect_params, is_valid, is_valid_level0, random_valid, saturate, truth_by_estimator, Estimator, NotionParams,
};
use suffice::fastgrow::{check_fastseq, decode_levelk, encode_levelk, make_fastseq, EndMarker, Variant};
use suffice::formulas::{brute_truth, parse_sentence};
use suffice::games::{
    build_priority_game, random_arena, solve, solve_priority, GameSpec, Outcome, Parity, Player, PriorityGameSpec,
    DEFAULT_NODE_BUDGET,
};
use suffice::experiment::priority_spec;
use suffice::oracles::{enumeration_value, parity_winner};
use suffice::rate::Rate;
use suffice::wellfounded::{bounded_wf_search, RelationSpec, Truth};

fn rate() -> impl Strategy<Value = Rate> {
    prop_oneof![
        (1u64..6).prop_map(Rate::linear),
        Just(Rate::Poly(vec![1, 0, 1])),
        (1u64..4).prop_map(|c| Rate::Poly(vec![c, 1])),
    ]
}

fn params() -> impl Strategy<Value = NotionParams> {
    (0u64..12, rate()).prop_map(|(a, r)| NotionParams::new(a, r).unwrap())
}

fn sentence_from(seed: u64) -> suffice::formulas::Sentence {
    let c = gen_corpus(seed, 1, CorpusLimits::default()).unwrap();
    c.into_iter().next().unwrap().sentence
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn rendered_sentences_reparse(seed in any::<u64>()) {
        let s = sentence_from(seed);
        let back = parse_sentence(&s.to_string()).unwrap();
        prop_assert_eq!(back.to_string(), s.to_string());
        prop_assert_eq!(brute_truth(&back, BRUTE_MAX_BITS).unwrap(), brute_truth(&s, BRUTE_MAX_BITS).unwrap());
    }

    #[test]
    fn saturation_matches_brute_force(seed in any::<u64>(), p in params()) {
        let s = sentence_from(seed);
        let e = saturate(&s, &p, None).unwrap();
        prop_assert!(is_valid(&e, &p));
        prop_assert_eq!(truth_by_estimator(&s, &e).unwrap(), brute_truth(&s, BRUTE_MAX_BITS).unwrap());
    }

    #[test]
    fn saturation_is_deterministic(seed in any::<u64>(), p in params()) {
        let s = sentence_from(seed);
        prop_assert_eq!(saturate(&s, &p, None).unwrap(), saturate(&s, &p, None).unwrap());
    }

    #[test]
    fn negation_flips_the_verdict(seed in any::<u64>(), p in params()) {
        let s = sentence_from(seed);
        let n = s.negate();
        let v = truth_by_estimator(&s, &saturate(&s, &p, None).unwrap()).unwrap();
        let w = truth_by_estimator(&n, &saturate(&n, &p, None).unwrap()).unwrap();
        prop_assert_eq!(v, !w);
    }

    #[test]
    fn intersection_is_conjunction(p in params(), q in params(), a in 0u64..80, d in 1u64..200) {
        let e = Estimator::pair(a, a + d).unwrap();
        let both = is_valid_level0(&e, &p).unwrap() && is_valid_level0(&e, &q).unwrap();
        prop_assert_eq!(is_valid_level0(&e, &intersect_params(&p, &q)).unwrap(), both);
    }

    #[test]
    fn random_estimators_are_valid_and_reparse(p in params(), level in 0u32..3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_valid(&p, level, &mut rng).unwrap();
        prop_assert!(is_valid(&e, &p));
        prop_assert_eq!(e.to_string().parse::<Estimator>().unwrap(), e);
    }

    #[test]
    fn minimal_sequences_are_valid_prefixes(r in rate(), len in 1usize..5, margin in 1u64..5) {
        for v in [Variant::Plain, Variant::Strict, Variant::Monotone] {
            let s = make_fastseq(&r, len + 1, v, margin, u64::MAX).unwrap();
            prop_assert!(check_fastseq(&s.values, &r, v).valid);
            let shorter = make_fastseq(&r, len, v, margin, u64::MAX).unwrap();
            prop_assert_eq!(&s.values[..len], &shorter.values[..]);
        }
    }

    #[test]
    fn levelk_round_trip(seed in any::<u64>()) {
        let s = common::random_levelk(seed);
        for m in [EndMarker::Terminal, EndMarker::Extensible] {
            let g = encode_levelk(&s, m).unwrap();
            prop_assert_eq!(decode_levelk(&g, s.k, m).unwrap().tree, s.tree.clone());
        }
    }

    #[test]
    fn bounded_search_is_sound_and_monotone(seed in any::<u64>(), cyclic in any::<bool>(), start in 0u64..8) {
        let r = if cyclic {
            RelationSpec::random_cyclic(seed, 8, 0.3).unwrap()
        } else {
            RelationSpec::random_dag(seed, 8, 0.3).unwrap()
        };
        let a = make_fastseq(&Rate::linear(2), 24, Variant::Plain, 1, u64::MAX).unwrap().values;
        let truth = r.ground_truth(start).status;
        let mut seen_wf = false;
        for len in 2..=a.len() {
            let wf = bounded_wf_search(&r, start, &a[..len]).is_well_founded();
            prop_assert!(!(wf && truth == Truth::IllFounded));
            prop_assert!(!(seen_wf && !wf));
            seen_wf |= wf;
        }
    }

    #[test]
    fn solver_matches_enumeration(seed in any::<u64>(), plies in 1usize..6, branching in 1usize..4) {
        let g = GameSpec::random(seed, plies, branching).unwrap();
        prop_assert_eq!(solve(&g, DEFAULT_NODE_BUDGET).unwrap().value, enumeration_value(&g, 1 << 100).unwrap());
    }

    #[test]
    fn solver_strategy_achieves_the_value(seed in any::<u64>()) {
        let g = GameSpec::random(seed, 5, 3).unwrap();
        let sol = solve(&g, DEFAULT_NODE_BUDGET).unwrap();
        // The winner's strategy (the first player's on a draw) secures the value against every reply.
        let me = sol.value.winner().unwrap_or(Player::First);
        let mut worst: Option<Outcome> = None;
        let mut stack = vec![Vec::new()];
        while let Some(h) = stack.pop() {
            if h.len() == g.horizon {
                let o = g.payoff(&h);
                let for_me = |o: Outcome| if me == Player::First { o.rank() } else { 2 - o.rank() };
                if worst.map_or(true, |w| for_me(o) < for_me(w)) {
                    worst = Some(o);
                }
                continue;
            }
            let mover = if h.len() % 2 == 0 { Player::First } else { Player::Second };
            let moves: Vec<usize> = if mover == me { vec![sol.strategy[&h]] } else { (0..g.branching(&h)).collect() };
            for m in moves {
                let mut next = h.clone();
                next.push(m);
                stack.push(next);
            }
        }
        prop_assert_eq!(worst, Some(sol.value));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn priority_games_match_parity_solver(seed in any::<u64>(), states in 1usize..6, odd in any::<bool>()) {
        let arena = random_arena(seed, states, 2, 3).unwrap();
        let wants = if odd { Parity::Odd } else { Parity::Even };
        let g = build_priority_game(priority_spec(arena.clone(), 0, wants, 1).unwrap()).unwrap();
        prop_assert_eq!(solve_priority(&g).unwrap(), parity_winner(&arena, 0, wants).unwrap());
    }

    #[test]
    fn fast_priority_solver_matches_generic(seed in any::<u64>(), states in 1usize..4) {
        let arena = random_arena(seed, states, 2, 2).unwrap();
        let timeouts = suffice::games::affine_timeouts(&[2, 5], 13).unwrap().into_iter().map(|s| s.values).collect();
        let spec = PriorityGameSpec { arena, k: 2, timeouts, start: 0, horizon: 12, first_wants: Parity::Even };
        let g = build_priority_game(spec).unwrap();
        let generic = solve(&g, DEFAULT_NODE_BUDGET).unwrap().value.winner();
        prop_assert_eq!(Some(solve_priority(&g).unwrap()), generic);
    }
}
