//! Eleven pairs, each holding one heavy and one normal coin.
//!
//! One representative per pair is sorted with the eleven-coin strategy. If
//! the representatives are not all alike, each pair follows its
//! representative. If they are, the strategy notices one weighing early and
//! the last weighing compares a representative with its own partner.

use std::sync::Arc;

use crate::coin::{CoinId, FakeSet};
use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisSet, Semantics};
use crate::strategies::builtin;
use crate::tree::{DecisionTree, Leaf, Node};
use crate::weighing::{Outcome, Pan, Weighing};

pub const PAIRS: usize = 11;

/// The strategy for `pairs` given as (representative, partner).
pub fn corollary1_tree(pairs: &[(CoinId, CoinId); PAIRS]) -> Result<DecisionTree> {
    let mut ids: Vec<CoinId> = pairs.iter().flat_map(|&(r, p)| [r, p]).collect();
    ids.sort();
    ids.dedup();
    if ids.len() != 2 * PAIRS || ids[0].0 == 0 {
        return Err(Error::PreconditionViolated("pairs must use 22 distinct coins".into()));
    }
    let universe = ids[ids.len() - 1].0;
    crate::coin::check_universe(universe)?;

    let base = builtin::repaired("alg1", Semantics::Sort)?;
    let reps = FakeSet(pairs.iter().fold(0, |m, (r, _)| m | r.bit()));
    let partners = FakeSet(pairs.iter().fold(0, |m, (_, p)| m | p.bit()));
    let to_rep = |c: CoinId| pairs[(c.0 - 1) as usize].0;
    let lift = |local: FakeSet| {
        let heavy_reps = local.coins().fold(0, |m, c| m | to_rep(c).bit());
        let light_partners = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| !local.contains(CoinId(*i as u32 + 1)))
            .fold(0, |m, (_, (_, p))| m | p.bit());
        FakeSet(heavy_reps | light_partners)
    };
    let mapped = base.relabel(universe, &to_rep, &|l| match l {
        Leaf::Classified(s) => Leaf::Classified(lift(s)),
        Leaf::Uniform => Leaf::Uniform,
    })?;

    // First node on the all-balanced path where only the alike cases remain.
    let mut h = HypothesisSet::all(PAIRS as u32, Semantics::Sort)?;
    let mut node = base.root().clone();
    let mut path = Vec::new();
    while !h.is_uniform_only() {
        let Some(w) = node.weighing().cloned() else {
            return Err(Error::PreconditionViolated("base strategy never isolates the alike case".into()));
        };
        h = h.refine(&w, Outcome::Balanced);
        node = node.child(Outcome::Balanced).cloned().ok_or_else(|| Error::MalformedTree(path.clone()))?;
        path.push(0);
    }
    let (rep, partner) = pairs[0];
    let last = Node::internal(
        Weighing::new(Pan::new([rep], 0), Pan::new([partner], 0))?,
        [
            None,
            Some(Node::leaf(Leaf::Classified(partners))),
            Some(Node::leaf(Leaf::Classified(reps))),
        ],
    );
    mapped.replace_at(&path, Arc::clone(&last))
}

/// Representatives `1..=11`, partner of `i` is `i + 11`.
pub fn standard_pairs() -> [(CoinId, CoinId); PAIRS] {
    std::array::from_fn(|i| (CoinId(i as u32 + 1), CoinId(i as u32 + 12)))
}

/// Every way of choosing the heavy coin of each pair.
pub fn orientations(pairs: &[(CoinId, CoinId); PAIRS]) -> Result<HypothesisSet> {
    let universe = pairs.iter().map(|&(r, p)| r.0.max(p.0)).max().unwrap_or(1);
    let members = (0..1u64 << PAIRS).map(|o| {
        FakeSet(pairs.iter().enumerate().fold(0, |m, (i, &(r, p))| {
            m | if o >> i & 1 == 1 { r.bit() } else { p.bit() }
        }))
    });
    HypothesisSet::from_members(universe, Semantics::Exact, members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::verify_tree_on;

    #[test]
    fn all_orientations() {
        let pairs = standard_pairs();
        let t = corollary1_tree(&pairs).unwrap();
        let r = verify_tree_on(&t, &orientations(&pairs).unwrap());
        assert!(r.is_correct(), "{r}");
        assert!(t.depth() <= 7);
        let all_reps = FakeSet((1 << 11) - 1);
        assert_eq!(t.run(all_reps).unwrap().leaf, Leaf::Classified(all_reps));
    }
}
