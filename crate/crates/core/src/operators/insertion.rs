//! Pair re-insertion and its decomposition into node exchanges.
//!
//! Write `D_z < P_w` when delivery `n+z` is visited before pickup `w`. Call
//! the set of such label pairs the precedence relation of a tour. `N1` leaves
//! it unchanged, `N2` only removes pairs from it and `N3` renames two labels.
//! A target tour is therefore reachable by node exchanges exactly when some
//! renaming of the source relation contains the target relation. Given such
//! a renaming, the target is built left to right with `N1`/`N2` moves.

use crate::instance::NodeId;
use crate::tour::Tour;

use super::{apply_move, validate, Move, MoveError};
use crate::instance::Instance;

/// Sequence after removing pair `(i, n+i)` and placing it at `p_new`, `d_new`.
pub(super) fn inserted_sequence(tour: &Tour, mv: &Move) -> Vec<NodeId> {
    let Move::Insertion { i, p_new, d_new } = *mv else {
        unreachable!("inserted_sequence called with {mv}")
    };
    let n = tour.n();
    let mut rest = tour.seq().iter().copied().filter(|&v| v != i && v != n + i);
    (1..=2 * n)
        .map(|p| {
            if p == p_new {
                i
            } else if p == d_new {
                n + i
            } else {
                rest.next().expect("2n - 2 remaining nodes")
            }
        })
        .collect()
}

/// Removes pair `(i, n+i)` and re-inserts it so that it ends up at positions
/// `p_new < d_new`. Returns the new tour and `cost(old) - cost(new)`.
pub fn apply_insertion(tour: &Tour, mv: &Move, inst: &Instance) -> Result<(Tour, f64), MoveError> {
    if !matches!(mv, Move::Insertion { .. }) {
        return Err(MoveError::MoveIllTyped(mv.to_string()));
    }
    apply_move(tour, mv, inst)
}

/// `rel[z][w]` is true when delivery `n+z` precedes pickup `w` (labels `1..=n`).
pub fn precedence_relation(tour: &Tour) -> Vec<Vec<bool>> {
    let n = tour.n();
    let mut rel = vec![vec![false; n + 1]; n + 1];
    for z in 1..=n {
        let dz = tour.position(n + z);
        for (w, cell) in rel[z].iter_mut().enumerate().skip(1) {
            *cell = dz < tour.position(w);
        }
    }
    rel
}

/// Finds `map` (target label -> source label) such that every target relation
/// pair `(a, b)` has `(map[a], map[b])` in the source relation. The identity is
/// tried first.
fn find_renaming(source: &[Vec<bool>], target: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = source.len() - 1;
    let mut map = vec![0; n + 1];
    let mut used = vec![false; n + 1];

    fn extend(
        a: usize,
        n: usize,
        source: &[Vec<bool>],
        target: &[Vec<bool>],
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if a > n {
            return true;
        }
        let candidates = std::iter::once(a).chain((1..=n).filter(|&c| c != a));
        for c in candidates {
            if used[c] {
                continue;
            }
            let consistent = (1..a).all(|b| {
                (!target[a][b] || source[c][map[b]]) && (!target[b][a] || source[map[b]][c])
            });
            if !consistent {
                continue;
            }
            map[a] = c;
            used[c] = true;
            if extend(a + 1, n, source, target, map, used) {
                return true;
            }
            used[c] = false;
        }
        false
    }

    extend(1, n, source, target, &mut map, &mut used).then_some(map)
}

/// Expresses an insertion as a sequence of `N1`, `N2` and `N3` moves.
///
/// Applying the returned moves in order to `tour` yields exactly the sequence
/// produced by [`apply_insertion`]. Fails with [`MoveError::NotExpressible`]
/// when no node-exchange path exists, which happens whenever the insertion
/// would move some pickup behind a delivery it currently follows in every
/// relabelling.
pub fn insertion_as_exchanges(tour: &Tour, mv: &Move) -> Result<Vec<Move>, MoveError> {
    if !matches!(mv, Move::Insertion { .. }) {
        return Err(MoveError::MoveIllTyped(mv.to_string()));
    }
    validate(tour, mv)?;
    let target = Tour::from_parts_unchecked(tour.n(), inserted_sequence(tour, mv));
    exchanges_between(tour, &target)
}

/// Node-exchange path from `from` to `to`, if one exists.
pub(crate) fn exchanges_between(from: &Tour, to: &Tour) -> Result<Vec<Move>, MoveError> {
    let n = from.n();
    let map = find_renaming(&precedence_relation(from), &precedence_relation(to))
        .ok_or(MoveError::NotExpressible)?;

    let mut moves = Vec::new();
    let mut work = from.seq().to_vec();
    let mut step = |work: &mut Vec<NodeId>, mv: Move| {
        let tour = Tour::from_parts_unchecked(n, std::mem::take(work));
        debug_assert!(validate(&tour, &mv).is_ok(), "{mv} invalid on {tour:?}");
        *work = super::moved_sequence(&tour, &mv);
        moves.push(mv);
    };

    // Relabel: the pair sitting where source label map[a] was must become `a`.
    // slot[c] is the label currently occupying source label c's positions.
    let mut slot: Vec<usize> = (0..=n).collect();
    for a in 1..=n {
        let b = slot[map[a]];
        if b != a {
            step(&mut work, Move::N3 { i: a.min(b), j: a.max(b) });
            for s in slot.iter_mut().skip(1) {
                if *s == a {
                    *s = b;
                } else if *s == b {
                    *s = a;
                }
            }
        }
    }

    // Left to right with N1/N2.
    let is_pickup = |v: NodeId| v >= 1 && v <= n;
    for k in 1..=2 * n {
        let t = to.at(k);
        loop {
            let q = work.iter().position(|&v| v == t).expect("node present") + 1;
            if q == k {
                break;
            }
            if is_pickup(t) {
                if (k..=q).all(|p| is_pickup(work[p - 1])) {
                    step(&mut work, Move::N1 { a: k, b: q });
                } else {
                    let mut s = q;
                    while s > k && is_pickup(work[s - 2]) {
                        s -= 1;
                    }
                    if s < q {
                        step(&mut work, Move::N1 { a: s, b: q });
                    }
                    step(&mut work, Move::N2 { a: s - 1, b: s });
                }
            } else if (k..=q).all(|p| !is_pickup(work[p - 1])) {
                step(&mut work, Move::N1 { a: k, b: q });
            } else {
                debug_assert!(false, "relation containment violated at position {k}");
                return Err(MoveError::NotExpressible);
            }
        }
    }
    debug_assert_eq!(work, to.seq());
    Ok(moves)
}

/// True when the node kinds at positions `1..=p` of `to` include at least as
/// many pickups as those of `from`, for every `p`. Necessary for reachability.
#[cfg(test)]
pub(crate) fn dominates(to: &Tour, from: &Tour) -> bool {
    to.pickup_profile().iter().zip(from.pickup_profile()).all(|(a, b)| *a >= b)
}
