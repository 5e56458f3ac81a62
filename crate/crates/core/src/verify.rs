//! Self-check suites behind `pdtsp verify`.
//!
//! `Quick` runs exhaustive checks for `n <= 3`; `Full` adds randomized suites
//! up to `n = 15`. A [`Fault`] swaps in a deliberately broken variant of one
//! check so that the failure path itself can be exercised.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use itertools::Itertools;
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::enumerate::{count_feasible, enumerate_feasible, random_tour};
use crate::instance::{Instance, NodeId};
use crate::operators::{
    apply_move, apply_naive, enumerate_moves, insertion_as_exchanges, moved_sequence, Move, MoveError, OperatorKind,
};
use crate::tour::{is_feasible, NodeKind, Tour};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

/// Deliberate defects for negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Offer delivery/pickup swaps with the pickup *before* the delivery.
    N2Precondition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub id: &'static str,
    pub checks: u64,
    pub failures: u64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.failures == 0)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            let status = if s.failures == 0 { "ok  " } else { "FAIL" };
            write!(f, "{status} {:<22} {:>9} passed", s.id, s.checks - s.failures)?;
            if s.failures > 0 {
                write!(f, ", {} failed", s.failures)?;
            }
            if !s.note.is_empty() {
                write!(f, "  ({})", s.note)?;
            }
            writeln!(f)?;
        }
        write!(f, "{}", if self.passed() { "all suites passed" } else { "verification FAILED" })
    }
}

struct Suite {
    id: &'static str,
    checks: u64,
    failures: u64,
    note: String,
}

impl Suite {
    fn new(id: &'static str) -> Self {
        Self { id, checks: 0, failures: 0, note: String::new() }
    }

    fn check(&mut self, ok: bool) {
        self.checks += 1;
        self.failures += u64::from(!ok);
    }

    fn done(self) -> SuiteResult {
        SuiteResult { id: self.id, checks: self.checks, failures: self.failures, note: self.note }
    }
}

pub fn run_verify(level: Level, fault: Option<Fault>) -> VerifyReport {
    let max_n = 3;
    let mut suites = vec![
        counting(level),
        validation(max_n),
        blocks(level, max_n),
        canonical(max_n),
    ];
    for kind in OperatorKind::ADMISSIBLE {
        suites.push(operator(kind, level, max_n, fault));
    }
    suites.push(naive(level, max_n));
    suites.push(insertion(level, max_n));
    suites.push(delta(level, max_n));
    suites.push(closure());
    VerifyReport { suites }
}

fn counting(level: Level) -> SuiteResult {
    let mut s = Suite::new("counting");
    let top = if level == Level::Full { 5 } else { 3 };
    for n in 1..=top {
        let yielded = enumerate_feasible(n, 6).expect("within cap").count();
        s.check(BigUint::from(yielded) == count_feasible(n));
    }
    s.note = format!("count_feasible(2) = {}", count_feasible(2));
    s.done()
}

fn validation(max_n: usize) -> SuiteResult {
    let mut s = Suite::new("tour-validation");
    for n in 1..=max_n {
        let feasible: HashSet<Vec<NodeId>> =
            enumerate_feasible(n, 6).expect("within cap").map(|t| t.seq().to_vec()).collect();
        for perm in (1..=2 * n).permutations(2 * n) {
            s.check(Tour::from_sequence(&perm, n).is_ok() == feasible.contains(&perm));
        }
    }
    s.done()
}

fn block_checks(s: &mut Suite, t: &Tour) {
    let n = t.n();
    let blocks = t.maximal_blocks();
    let covers = blocks.first().is_some_and(|b| b.start == 1 && b.kind == NodeKind::Pickup)
        && blocks.last().is_some_and(|b| b.end == 2 * n)
        && blocks.windows(2).all(|w| w[0].kind != w[1].kind && w[0].end + 1 == w[1].start)
        && blocks.iter().all(|b| (b.start..=b.end).all(|p| t.kind_at(p) == b.kind));
    s.check(covers);
    let idx = t.block_index();
    s.check((1..=n).all(|i| idx[t.position(i)] < idx[t.position(n + i)]));
}

fn blocks(level: Level, max_n: usize) -> SuiteResult {
    let mut s = Suite::new("blocks");
    for n in 1..=max_n {
        for t in enumerate_feasible(n, 6).expect("within cap") {
            block_checks(&mut s, &t);
        }
    }
    if level == Level::Full {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let t = random_tour(rng.gen_range(1..=15), &mut rng);
            block_checks(&mut s, &t);
        }
    }
    s.done()
}

fn canonical(max_n: usize) -> SuiteResult {
    let mut s = Suite::new("canonical");
    for n in 1..=max_n {
        for order in (1..=n).permutations(n) {
            match Tour::canonical(n, &order) {
                Ok(t) => s.check((1..=n).all(|i| t.position(i) + 1 == t.position(n + i))),
                Err(_) => s.check(false),
            }
        }
    }
    s.done()
}

/// Candidate moves of `kind`, with the fault applied when requested.
fn candidates(t: &Tour, kind: OperatorKind, fault: Option<Fault>) -> Vec<Move> {
    if kind == OperatorKind::N2 && fault == Some(Fault::N2Precondition) {
        let len = 2 * t.n();
        return (1..=len)
            .filter(|&a| t.kind_at(a) == NodeKind::Delivery)
            .flat_map(|a| (1..a).filter(|&b| t.kind_at(b) == NodeKind::Pickup).map(move |b| Move::Naive { a: b, b: a }))
            .collect();
    }
    enumerate_moves(t, kind)
}

fn operator(kind: OperatorKind, level: Level, max_n: usize, fault: Option<Fault>) -> SuiteResult {
    let id = match kind {
        OperatorKind::N1 => "n1-feasibility",
        OperatorKind::N2 => "n2-feasibility",
        OperatorKind::N3 => "n3-feasibility",
        OperatorKind::B1 => "b1-feasibility",
        _ => "b2-feasibility",
    };
    let mut s = Suite::new(id);
    let mut apply = |t: &Tour, mv: &Move| {
        let seq = moved_sequence(t, mv);
        s.check(Tour::from_sequence(&seq, t.n()).is_ok());
    };
    for n in 1..=max_n {
        for t in enumerate_feasible(n, 6).expect("within cap") {
            for mv in candidates(&t, kind, fault) {
                apply(&t, &mv);
            }
        }
    }
    if level == Level::Full {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut done = 0;
        while done < 10_000 {
            let n = rng.gen_range(4..=15);
            let t = random_tour(n, &mut rng);
            if let Some(mv) = candidates(&t, kind, fault).choose(&mut rng) {
                apply(&t, mv);
                done += 1;
            }
        }
    }
    s.done()
}

fn naive(level: Level, max_n: usize) -> SuiteResult {
    let mut s = Suite::new("naive-flag");
    let top = if level == Level::Full { max_n + 2 } else { max_n };
    for n in 1..=top.min(4) {
        let inst = Instance::generate_random(n, 5).expect("n >= 1");
        for t in enumerate_feasible(n, 6).expect("within cap") {
            for a in 1..=2 * n {
                for b in a + 1..=2 * n {
                    let out = apply_naive(&t, a, b, &inst).expect("in range");
                    s.check(out.feasible == is_feasible(&out.seq, n) && out.reward.is_some() == out.feasible);
                }
            }
        }
    }
    s.done()
}

fn insertion(level: Level, max_n: usize) -> SuiteResult {
    let mut s = Suite::new("insertion");
    let mut unreachable = 0u64;
    let mut run = |t: &Tour, mv: &Move, inst: &Instance| {
        let Ok((direct, _)) = apply_move(t, mv, inst) else {
            s.check(false);
            return;
        };
        s.check(Tour::from_sequence(direct.seq(), t.n()).is_ok());
        match insertion_as_exchanges(t, mv) {
            Ok(path) => {
                let mut cur = t.clone();
                for m in &path {
                    match apply_move(&cur, m, inst) {
                        Ok((next, _)) => cur = next,
                        Err(_) => {
                            s.check(false);
                            return;
                        }
                    }
                }
                s.check(cur == direct);
            }
            Err(MoveError::NotExpressible) => unreachable += 1,
            Err(_) => s.check(false),
        }
    };
    for n in 1..=max_n {
        let inst = Instance::generate_random(n, 6).expect("n >= 1");
        for t in enumerate_feasible(n, 6).expect("within cap") {
            for mv in enumerate_moves(&t, OperatorKind::Insertion) {
                run(&t, &mv, &inst);
            }
        }
    }
    if level == Level::Full {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..1000 {
            let n = rng.gen_range(4..=8);
            let inst = Instance::generate_random(n, rng.gen()).expect("n >= 1");
            let t = random_tour(n, &mut rng);
            let mv = *enumerate_moves(&t, OperatorKind::Insertion).choose(&mut rng).expect("n >= 1");
            run(&t, &mv, &inst);
        }
    }
    s.note = format!("{unreachable} insertions move a pickup behind a delivery and have no node-exchange path");
    s.done()
}

fn delta(level: Level, max_n: usize) -> SuiteResult {
    let mut s = Suite::new("incremental-reward");
    let mut check = |t: &Tour, mv: &Move, inst: &Instance| {
        let (next, r) = apply_move(t, mv, inst).expect("enumerated");
        let full = t.cost(inst).expect("sized") - next.cost(inst).expect("sized");
        s.check((r - full).abs() <= 1e-9);
    };
    for n in 1..=max_n {
        let inst = Instance::generate_random(n, 7).expect("n >= 1");
        for t in enumerate_feasible(n, 6).expect("within cap") {
            for kind in OperatorKind::ADMISSIBLE {
                for mv in enumerate_moves(&t, kind) {
                    check(&t, &mv, &inst);
                }
            }
        }
    }
    if level == Level::Full {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mut done = 0;
        while done < 10_000 {
            let n = rng.gen_range(4..=15);
            let inst = Instance::generate_random(n, rng.gen()).expect("n >= 1");
            let t = random_tour(n, &mut rng);
            let kind = OperatorKind::ADMISSIBLE[done % 5];
            if let Some(mv) = enumerate_moves(&t, kind).choose(&mut rng) {
                check(&t, mv, &inst);
                done += 1;
            }
        }
    }
    s.done()
}

fn closure() -> SuiteResult {
    let mut s = Suite::new("node-exchange-closure");
    let mut sizes = Vec::new();
    for n in 2..=3 {
        let start = Tour::canonical(n, &(1..=n).collect::<Vec<_>>()).expect("identity order");
        let mut seen = HashSet::from([start.seq().to_vec()]);
        let mut queue = VecDeque::from([start]);
        while let Some(t) = queue.pop_front() {
            for kind in [OperatorKind::N1, OperatorKind::N2, OperatorKind::N3] {
                for mv in enumerate_moves(&t, kind) {
                    let next = Tour::from_sequence(&moved_sequence(&t, &mv), n);
                    if let Ok(next) = next {
                        if seen.insert(next.seq().to_vec()) {
                            queue.push_back(next);
                        }
                    }
                }
            }
        }
        s.check(BigUint::from(seen.len()) == count_feasible(n));
        sizes.push(seen.len().to_string());
    }
    s.note = format!("reached {} tours for n = 2, 3", sizes.join(", "));
    s.done()
}
