//! Counting and exhaustive enumeration of feasible tours.
//!
//! Every feasible tour arises exactly once from a pickup permutation
//! `(i1, ..., in)` by inserting deliveries back to front: `n+in` goes after
//! `in` (one slot), `n+i(n-1)` into one of the three slots after `i(n-1)`, and
//! so on, giving `1 * 3 * ... * (2n-1)` tours per permutation.

use itertools::Itertools;
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::instance::NodeId;
use crate::tour::Tour;

/// Default upper bound on `n` for exhaustive enumeration (`12!/2^6 = 7,484,400` tours).
pub const DEFAULT_ENUMERATION_CAP: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("n = {n} exceeds the enumeration cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("n must be at least 1")]
    InvalidSize,
}

fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::from(1u32), |acc, v| acc * BigUint::from(v))
}

/// Number of Hamiltonian cycles through the depot, feasible or not: `(2n)!`.
pub fn count_all(n: usize) -> BigUint {
    factorial(2 * n)
}

/// Number of feasible tours: `(2n)! / 2^n`.
pub fn count_feasible(n: usize) -> BigUint {
    count_all(n) >> n
}

/// Iterator over every feasible tour for `n` pairs, each exactly once.
pub fn enumerate_feasible(n: usize, cap: usize) -> Result<FeasibleTours, EnumerationError> {
    FeasibleTours::new(n, cap, None)
}

/// The subset of [`enumerate_feasible`] whose first visited node is `first`.
/// The subsets for `first = 1..=n` partition the full enumeration.
pub fn enumerate_feasible_from(
    n: usize,
    first: NodeId,
    cap: usize,
) -> Result<FeasibleTours, EnumerationError> {
    FeasibleTours::new(n, cap, Some(first))
}

/// See [`enumerate_feasible`].
pub struct FeasibleTours {
    n: usize,
    first: Option<NodeId>,
    perms: Box<dyn Iterator<Item = Vec<NodeId>> + Send>,
    perm: Option<Vec<NodeId>>,
    slots: Vec<usize>,
}

impl FeasibleTours {
    fn new(n: usize, cap: usize, first: Option<NodeId>) -> Result<Self, EnumerationError> {
        if n == 0 || first.is_some_and(|f| f == 0 || f > n) {
            return Err(EnumerationError::InvalidSize);
        }
        if n > cap {
            return Err(EnumerationError::TooLarge { n, cap });
        }
        let rest: Vec<NodeId> = (1..=n).filter(|&i| Some(i) != first).collect();
        let k = rest.len();
        let mut perms: Box<dyn Iterator<Item = Vec<NodeId>> + Send> =
            Box::new(rest.into_iter().permutations(k));
        let perm = perms.next().map(|p| match first {
            Some(f) => std::iter::once(f).chain(p).collect(),
            None => p,
        });
        Ok(Self { n, first, perms, perm, slots: vec![0; n] })
    }

    /// Radix of slot counter `k`: the number of admissible positions for the
    /// delivery of the `k`-th pickup in the permutation.
    fn radix(&self, k: usize) -> usize {
        2 * (self.n - k) - 1
    }

    fn advance(&mut self) {
        for k in (0..self.n).rev() {
            self.slots[k] += 1;
            if self.slots[k] < self.radix(k) {
                return;
            }
            self.slots[k] = 0;
        }
        self.perm = self.perms.next().map(|p| match self.first {
            Some(f) => std::iter::once(f).chain(p).collect(),
            None => p,
        });
    }
}

/// Decodes a pickup permutation and per-pickup slot choices into a tour
/// sequence. `slots[k] < 2(n-k) - 1`.
pub(crate) fn decode(perm: &[NodeId], slots: &[usize]) -> Vec<NodeId> {
    let n = perm.len();
    let mut seq = Vec::with_capacity(2 * n);
    seq.extend_from_slice(perm);
    for k in (0..n).rev() {
        // pickup perm[k] still sits at index k: all inserted deliveries follow it
        seq.insert(k + 1 + slots[k], n + perm[k]);
    }
    seq
}

impl Iterator for FeasibleTours {
    type Item = Tour;

    fn next(&mut self) -> Option<Tour> {
        let perm = self.perm.as_ref()?;
        let seq = decode(perm, &self.slots);
        let tour = Tour::from_parts_unchecked(self.n, seq);
        self.advance();
        Some(tour)
    }
}

/// A feasible tour drawn uniformly at random.
pub fn random_tour<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Tour {
    let mut perm: Vec<NodeId> = (1..=n).collect();
    perm.shuffle(rng);
    let slots: Vec<usize> = (0..n).map(|k| rng.gen_range(0..2 * (n - k) - 1)).collect();
    Tour::from_parts_unchecked(n, decode(&perm, &slots))
}

/// A canonical (one request at a time) tour with a uniformly shuffled order.
pub fn random_canonical<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Tour {
    let mut order: Vec<NodeId> = (1..=n).collect();
    order.shuffle(rng);
    Tour::canonical(n, &order).expect("shuffled order is a permutation")
}
