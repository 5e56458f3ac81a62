use super::*;
use crate::enumerate::{enumerate_feasible, random_tour};
use crate::instance::Instance;
use crate::tour::is_feasible;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FIG3: [usize; 10] = [1, 2, 3, 7, 8, 4, 5, 6, 9, 10];

fn fig3() -> Tour {
    Tour::from_sequence(&FIG3, 5).unwrap()
}

fn inst5() -> Instance {
    Instance::generate_random(5, 2024).unwrap()
}

fn full_reward(before: &Tour, after: &Tour, inst: &Instance) -> f64 {
    before.cost(inst).unwrap() - after.cost(inst).unwrap()
}

#[test]
fn n1_swaps_nodes_2_and_3() {
    let t = fig3();
    let inst = inst5();
    let moves = enumerate_moves(&t, OperatorKind::N1);
    assert!(moves.contains(&Move::N1 { a: 2, b: 3 }));
    let (next, r) = apply_move(&t, &Move::N1 { a: 2, b: 3 }, &inst).unwrap();
    assert_eq!(next.seq(), &[1, 3, 2, 7, 8, 4, 5, 6, 9, 10]);
    let c = |a, b| inst.cost(a, b);
    assert!((r - ((c(1, 2) + c(3, 7)) - (c(1, 3) + c(2, 7)))).abs() < 1e-12);
}

#[test]
fn n2_swaps_7_and_4() {
    let t = fig3();
    let inst = inst5();
    let mv = Move::N2 { a: t.position(7), b: t.position(4) };
    assert!(enumerate_moves(&t, OperatorKind::N2).contains(&mv));
    let (next, r) = apply_move(&t, &mv, &inst).unwrap();
    assert_eq!(next.seq(), &[1, 2, 3, 4, 8, 7, 5, 6, 9, 10]);
    let c = |a, b| inst.cost(a, b);
    let expected = (c(3, 7) + c(4, 5)) - (c(3, 4) + c(7, 5));
    assert!((r - expected).abs() < 1e-12);
}

#[test]
fn n3_matches_the_changed_edge_set() {
    let t = fig3();
    let inst = inst5();
    let (next, r) = apply_move(&t, &Move::N3 { i: 1, j: 2 }, &inst).unwrap();
    assert_eq!(next.seq(), &[2, 1, 3, 6, 8, 4, 5, 7, 9, 10]);
    let c = |a, b| inst.cost(a, b);
    let added = c(0, 2) + c(1, 3) + c(3, 6) + c(6, 8) + c(5, 7) + c(7, 9);
    let removed = c(0, 1) + c(2, 3) + c(3, 7) + c(7, 8) + c(5, 6) + c(6, 9);
    assert!((r - (removed - added)).abs() < 1e-12);
}

#[test]
fn b2_swaps_delivery_block_with_following_pickup_block() {
    let t = fig3();
    let inst = inst5();
    let mv = Move::B2 { d_start: 4, d_end: 5, p_start: 6, p_end: 7 };
    assert!(enumerate_moves(&t, OperatorKind::B2).contains(&mv));
    let (next, r) = apply_move(&t, &mv, &inst).unwrap();
    assert_eq!(next.seq(), &[1, 2, 3, 4, 5, 7, 8, 6, 9, 10]);
    assert!((r - full_reward(&t, &next, &inst)).abs() < 1e-12);
}

#[test]
fn b1_swaps_trailing_delivery_runs() {
    // the two trailing delivery runs {6} and {9, 10}
    let t = fig3();
    let inst = inst5();
    let mv = Move::B1 { u_start: 8, u_end: 8, v_start: 9, v_end: 10 };
    let (next, r) = apply_move(&t, &mv, &inst).unwrap();
    assert_eq!(next.seq(), &[1, 2, 3, 7, 8, 4, 5, 9, 10, 6]);
    assert!((r - full_reward(&t, &next, &inst)).abs() < 1e-12);
}

#[test]
fn b1_across_a_delivery_block_would_be_infeasible() {
    // P{1,2,3} and P{4,5} are separated by D{7,8}; swapping them as rigid
    // segments puts 7 ahead of 2, so B1 stays inside one maximal block.
    let t = fig3();
    let raw = exchange_raw(&t, 1, 3, 6, 7);
    assert!(!is_feasible(&raw, 5));
    let mv = Move::B1 { u_start: 1, u_end: 3, v_start: 6, v_end: 7 };
    assert!(matches!(validate(&t, &mv), Err(MoveError::MoveIllTyped(_))));
}

#[test]
fn single_pair_has_no_admissible_moves() {
    let t = Tour::canonical(1, &[1]).unwrap();
    for kind in OperatorKind::ADMISSIBLE {
        assert!(enumerate_moves(&t, kind).is_empty(), "{kind:?}");
    }
}

#[test]
fn validation_errors() {
    let t = fig3();
    let inst = inst5();
    assert!(matches!(apply_move(&t, &Move::N2 { a: 1, b: 4 }, &inst), Err(MoveError::MoveIllTyped(_))));
    assert!(matches!(apply_move(&t, &Move::N1 { a: 3, b: 4 }, &inst), Err(MoveError::MoveIllTyped(_))));
    assert!(matches!(apply_move(&t, &Move::N1 { a: 9, b: 11 }, &inst), Err(MoveError::MoveOutOfRange(_))));
    assert!(matches!(apply_move(&t, &Move::N1 { a: 3, b: 2 }, &inst), Err(MoveError::MoveOutOfRange(_))));
    assert!(matches!(apply_move(&t, &Move::N3 { i: 1, j: 6 }, &inst), Err(MoveError::MoveOutOfRange(_))));
    assert_eq!(apply_move(&t, &Move::Naive { a: 1, b: 2 }, &inst), Err(MoveError::NotAdmissible));
    assert!(matches!(
        apply_move(&t, &Move::B2 { d_start: 4, d_end: 6, p_start: 7, p_end: 7 }, &inst),
        Err(MoveError::MoveIllTyped(_))
    ));
}

#[test]
fn naive_swaps() {
    let inst1 = Instance::generate_random(1, 0).unwrap();
    let t1 = Tour::canonical(1, &[1]).unwrap();
    let out = apply_naive(&t1, 1, 2, &inst1).unwrap();
    assert!(!out.feasible);
    assert_eq!(out.reward, None);

    let t = fig3();
    let inst = inst5();
    let out = apply_naive(&t, 2, 3, &inst).unwrap();
    assert!(out.feasible);
    let (via_n1, r) = apply_move(&t, &Move::N1 { a: 2, b: 3 }, &inst).unwrap();
    assert_eq!(out.seq, via_n1.seq());
    assert!((out.reward.unwrap() - r).abs() < 1e-12);

    let out = apply_naive(&t, t.position(1), t.position(6), &inst).unwrap();
    assert!(!out.feasible);
    assert!(apply_naive(&t, 3, 3, &inst).is_err());
    assert!(apply_naive(&t, 3, 11, &inst).is_err());
}

#[test]
fn naive_feasibility_flag_matches_full_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inst = Instance::generate_random(6, 5).unwrap();
    for _ in 0..300 {
        let t = random_tour(6, &mut rng);
        for a in 1..=12 {
            for b in a + 1..=12 {
                let out = apply_naive(&t, a, b, &inst).unwrap();
                assert_eq!(out.feasible, is_feasible(&out.seq, 6));
            }
        }
    }
}

#[test]
fn insertion_examples() {
    let t = fig3();
    let inst = inst5();
    // reinsert (1, 6) at its own positions
    let same = Move::Insertion { i: 1, p_new: 1, d_new: 8 };
    let (next, r) = apply_insertion(&t, &same, &inst).unwrap();
    assert_eq!(next, t);
    assert!(r.abs() < 1e-12);
    assert!(insertion_as_exchanges(&t, &same).unwrap().is_empty());

    // start from the four-pair tour with (1, 6) served last, then insert it back
    let start = Tour::from_sequence(&[2, 3, 7, 8, 4, 5, 9, 10, 1, 6], 5).unwrap();
    let mv = Move::Insertion { i: 1, p_new: 1, d_new: 8 };
    let (next, _) = apply_insertion(&start, &mv, &inst).unwrap();
    assert_eq!(next.seq(), &FIG3);
    let moves = insertion_as_exchanges(&start, &mv).unwrap();
    assert!(!moves.is_empty());
    let mut cur = start.clone();
    for m in &moves {
        assert!(matches!(m.kind(), OperatorKind::N1 | OperatorKind::N2 | OperatorKind::N3));
        cur = apply_move(&cur, m, &inst).unwrap().0;
    }
    assert_eq!(cur.seq(), &FIG3);

    assert_eq!(
        apply_insertion(&t, &Move::Insertion { i: 1, p_new: 3, d_new: 3 }, &inst),
        Err(MoveError::PositionClash)
    );
    assert!(apply_insertion(&t, &Move::Insertion { i: 1, p_new: 4, d_new: 3 }, &inst).is_err());
    assert!(apply_insertion(&t, &Move::Insertion { i: 6, p_new: 1, d_new: 3 }, &inst).is_err());
}

#[test]
fn insertion_that_delays_a_pickup_is_not_expressible() {
    // [1,2,3,4] -> [1,3,2,4] moves pickup 2 behind delivery 3. No node
    // exchange can create a delivery-before-pickup relation.
    let t = Tour::from_sequence(&[1, 2, 3, 4], 2).unwrap();
    let mv = Move::Insertion { i: 2, p_new: 3, d_new: 4 };
    let inst = Instance::generate_random(2, 1).unwrap();
    assert_eq!(apply_insertion(&t, &mv, &inst).unwrap().0.seq(), &[1, 3, 2, 4]);
    assert_eq!(insertion_as_exchanges(&t, &mv), Err(MoveError::NotExpressible));
}

#[test]
fn enumerated_moves_all_validate() {
    for t in enumerate_feasible(3, 6).unwrap() {
        for kind in OperatorKind::ADMISSIBLE {
            for mv in enumerate_moves(&t, kind) {
                validate(&t, &mv).unwrap();
            }
        }
    }
}

#[test]
fn move_text_round_trip() {
    let moves = [
        Move::N1 { a: 1, b: 2 },
        Move::N2 { a: 3, b: 9 },
        Move::N3 { i: 1, j: 4 },
        Move::B1 { u_start: 1, u_end: 2, v_start: 4, v_end: 5 },
        Move::B2 { d_start: 2, d_end: 3, p_start: 5, p_end: 5 },
        Move::Naive { a: 4, b: 2 },
        Move::Insertion { i: 2, p_new: 3, d_new: 7 },
    ];
    for m in moves {
        assert_eq!(m.to_string().parse::<Move>().unwrap(), m);
    }
    assert_eq!(Move::B2 { d_start: 4, d_end: 5, p_start: 6, p_end: 7 }.to_string(), "B2 4 5 6 7");
    assert_eq!(Move::Insertion { i: 1, p_new: 1, d_new: 8 }.to_string(), "INS 1 1 8");
    assert!("N9 1 2".parse::<Move>().is_err());
}

#[test]
fn sample_best_move_exhaustive_when_k_covers() {
    let inst = Instance::generate_random(2, 77).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for t in enumerate_feasible(2, 6).unwrap() {
        for kind in OperatorKind::ADMISSIBLE {
            let moves = enumerate_moves(&t, kind);
            let got = sample_best_move(&t, kind, &inst, 1000, &mut rng);
            if moves.is_empty() {
                assert!(got.is_none());
                continue;
            }
            let best = moves
                .iter()
                .map(|m| full_reward(&t, &apply_move(&t, m, &inst).unwrap().0, &inst))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((got.unwrap().reward - best).abs() < 1e-12);
        }
    }
}

#[test]
fn sample_best_move_is_deterministic_for_a_seed() {
    let inst = Instance::generate_random(7, 3).unwrap();
    let t = random_tour(7, &mut ChaCha8Rng::seed_from_u64(8));
    let a = sample_best_move(&t, OperatorKind::N2, &inst, 4, &mut ChaCha8Rng::seed_from_u64(9));
    let b = sample_best_move(&t, OperatorKind::N2, &inst, 4, &mut ChaCha8Rng::seed_from_u64(9));
    assert_eq!(a, b);
    assert!(sample_best_move(&Tour::canonical(2, &[1, 2]).unwrap(), OperatorKind::B1, &inst, 4, &mut ChaCha8Rng::seed_from_u64(9)).is_none());
}

#[test]
fn exhaustive_feasibility_small_n() {
    for n in 1..=3 {
        for t in enumerate_feasible(n, 6).unwrap() {
            for kind in OperatorKind::ADMISSIBLE {
                for mv in enumerate_moves(&t, kind) {
                    let seq = moved_sequence(&t, &mv);
                    assert!(Tour::from_sequence(&seq, n).is_ok(), "{mv} on {t}");
                }
            }
        }
    }
}

#[test]
fn involution_of_node_exchanges() {
    let inst = Instance::generate_random(4, 9).unwrap();
    for t in enumerate_feasible(4, 6).unwrap().step_by(7) {
        for kind in [OperatorKind::N1, OperatorKind::N3] {
            for mv in enumerate_moves(&t, kind) {
                let (once, r1) = apply_move(&t, &mv, &inst).unwrap();
                let (twice, r2) = apply_move(&once, &mv, &inst).unwrap();
                assert_eq!(twice, t);
                assert!((r1 + r2).abs() < 1e-12);
            }
        }
        // the reverse of N2 swaps a pickup back behind a delivery; it is a raw swap
        for mv in enumerate_moves(&t, OperatorKind::N2) {
            let Move::N2 { a, b } = mv else { unreachable!() };
            let (once, _) = apply_move(&t, &mv, &inst).unwrap();
            assert!(validate(&once, &mv).is_err());
            let back = apply_naive(&once, a, b, &inst).unwrap();
            assert_eq!(back.seq, t.seq());
        }
    }
}

#[test]
fn involution_of_block_exchanges() {
    let inst = Instance::generate_random(4, 10).unwrap();
    for t in enumerate_feasible(4, 6).unwrap().step_by(5) {
        for mv in enumerate_moves(&t, OperatorKind::B1) {
            let Move::B1 { u_start, u_end, v_start, v_end } = mv else { unreachable!() };
            let (once, _) = apply_move(&t, &mv, &inst).unwrap();
            let (lu, lv) = (u_end - u_start + 1, v_end - v_start + 1);
            let back = Move::B1 {
                u_start,
                u_end: u_start + lv - 1,
                v_start: v_end + 1 - lu,
                v_end,
            };
            if lu == lv {
                assert_eq!(back, mv);
            }
            assert_eq!(apply_move(&once, &back, &inst).unwrap().0, t);
        }
        for mv in enumerate_moves(&t, OperatorKind::B2) {
            let Move::B2 { d_start, d_end, p_start, p_end } = mv else { unreachable!() };
            let (once, _) = apply_move(&t, &mv, &inst).unwrap();
            let (ld, lp) = (d_end - d_start + 1, p_end - p_start + 1);
            let raw = exchange_raw(&once, d_start, d_start + lp - 1, p_end + 1 - ld, p_end);
            assert_eq!(raw, t.seq());
        }
    }
}

#[test]
fn n2_condition_matches_block_order() {
    for n in 1..=3 {
        for t in enumerate_feasible(n, 6).unwrap() {
            let inst = Instance::generate_random(n, 3).unwrap();
            let bi = t.block_index();
            for a in 1..=2 * n {
                for b in 1..=2 * n {
                    if t.kind_at(a) != NodeKind::Delivery || t.kind_at(b) != NodeKind::Pickup {
                        continue;
                    }
                    let by_blocks = bi[a] < bi[b];
                    assert_eq!(a < b, by_blocks);
                    assert_eq!(validate(&t, &Move::N2 { a: a.min(b), b: a.max(b) }).is_ok(), a < b);
                    if a < b {
                        assert!(apply_naive(&t, a, b, &inst).unwrap().feasible);
                    }
                }
            }
        }
    }
}

fn node_exchange_closure(n: usize) -> usize {
    use std::collections::{HashSet, VecDeque};
    let start = Tour::canonical(n, &(1..=n).collect::<Vec<_>>()).unwrap();
    let mut seen = HashSet::from([start.seq().to_vec()]);
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        for kind in [OperatorKind::N1, OperatorKind::N2, OperatorKind::N3] {
            for mv in enumerate_moves(&t, kind) {
                let next = Tour::from_sequence(&moved_sequence(&t, &mv), n).unwrap();
                if seen.insert(next.seq().to_vec()) {
                    queue.push_back(next);
                }
            }
        }
    }
    seen.len()
}

#[test]
fn node_exchanges_reach_every_tour() {
    assert_eq!(node_exchange_closure(1), 1);
    assert_eq!(node_exchange_closure(2), 6);
    assert_eq!(node_exchange_closure(3), 90);
}

#[test]
fn exchange_paths_exist_from_canonical_tours() {
    let start = Tour::canonical(3, &[2, 3, 1]).unwrap();
    let inst = Instance::generate_random(3, 0).unwrap();
    for target in enumerate_feasible(3, 6).unwrap() {
        assert!(super::insertion::dominates(&target, &start));
        let path = super::insertion::exchanges_between(&start, &target).unwrap();
        let mut cur = start.clone();
        for m in &path {
            cur = apply_move(&cur, m, &inst).unwrap().0;
        }
        assert_eq!(cur, target);
    }
}

#[test]
fn exchange_paths_fail_only_when_pickups_move_later() {
    let from = Tour::from_sequence(&[1, 2, 3, 4], 2).unwrap();
    let to = Tour::from_sequence(&[1, 3, 2, 4], 2).unwrap();
    assert!(!super::insertion::dominates(&to, &from));
    assert!(super::insertion::exchanges_between(&from, &to).is_err());
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn random_move(t: &Tour, kind: OperatorKind, rng: &mut ChaCha8Rng) -> Option<Move> {
        use rand::seq::SliceRandom;
        enumerate_moves(t, kind).choose(rng).copied()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn moves_stay_feasible_and_rewards_match(n in 4usize..=15, seed in any::<u64>(), kind_idx in 0usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = Instance::generate_random(n, seed).unwrap();
            let t = random_tour(n, &mut rng);
            let kind = OperatorKind::from_action_index(kind_idx).unwrap();
            if let Some(mv) = random_move(&t, kind, &mut rng) {
                let (next, r) = apply_move(&t, &mv, &inst).unwrap();
                prop_assert!(Tour::from_sequence(next.seq(), n).is_ok());
                prop_assert!((r - full_reward(&t, &next, &inst)).abs() <= 1e-9);
            }
        }

        #[test]
        fn insertion_is_feasible_and_exact_where_expressible(n in 2usize..=8, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = Instance::generate_random(n, seed).unwrap();
            let t = random_tour(n, &mut rng);
            let mv = random_move(&t, OperatorKind::Insertion, &mut rng).unwrap();
            let (direct, r) = apply_insertion(&t, &mv, &inst).unwrap();
            prop_assert!(Tour::from_sequence(direct.seq(), n).is_ok());
            prop_assert!((r - full_reward(&t, &direct, &inst)).abs() <= 1e-9);
            match insertion_as_exchanges(&t, &mv) {
                Ok(path) => {
                    let mut cur = t.clone();
                    for m in &path {
                        cur = apply_move(&cur, m, &inst).unwrap().0;
                    }
                    prop_assert_eq!(cur.seq(), direct.seq());
                }
                Err(e) => prop_assert_eq!(e, MoveError::NotExpressible),
            }
        }

        #[test]
        fn blocks_alternate_and_cover(n in 1usize..=15, seed in any::<u64>()) {
            let t = random_tour(n, &mut ChaCha8Rng::seed_from_u64(seed));
            let blocks = t.maximal_blocks();
            prop_assert_eq!(blocks[0].kind, NodeKind::Pickup);
            prop_assert_eq!(blocks[0].start, 1);
            prop_assert_eq!(blocks.last().unwrap().end, 2 * n);
            for w in blocks.windows(2) {
                prop_assert!(w[0].kind != w[1].kind);
                prop_assert_eq!(w[0].end + 1, w[1].start);
            }
            let bi = t.block_index();
            for i in 1..=n {
                prop_assert!(bi[t.position(i)] < bi[t.position(n + i)]);
            }
        }
    }
}
