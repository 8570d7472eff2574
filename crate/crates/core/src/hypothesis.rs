//! Sets of heavy-coin hypotheses still consistent with observed outcomes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coin::{check_universe, FakeSet};
use crate::error::{Error, Result};
use crate::tree::Leaf;
use crate::weighing::{Outcome, Weighing};

/// How hypotheses are told apart at the leaves.
///
/// `Exact` needs every subset identified, which in general requires extra
/// known-normal coins. `Sort` only partitions the coins into the two weight
/// classes, so "no coin heavy" and "every coin heavy" are the same answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    Exact,
    Sort,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Exact => "exact",
            Semantics::Sort => "sort",
        })
    }
}

impl FromStr for Semantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Semantics> {
        match s {
            "exact" => Ok(Semantics::Exact),
            "sort" | "sortclasses" => Ok(Semantics::Sort),
            other => Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!("unknown semantics {other:?}"),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HypothesisSet {
    universe: u32,
    semantics: Semantics,
    members: Vec<FakeSet>,
}

impl HypothesisSet {
    /// All `2^n` subsets of an `n`-coin universe.
    pub fn all(universe: u32, semantics: Semantics) -> Result<HypothesisSet> {
        check_universe(universe)?;
        if universe > 30 {
            return Err(Error::UniverseTooLarge(universe));
        }
        let members = (0..(1u64 << universe)).map(FakeSet).collect();
        Ok(HypothesisSet {
            universe,
            semantics,
            members,
        })
    }

    pub fn from_members<I>(universe: u32, semantics: Semantics, members: I) -> Result<HypothesisSet>
    where
        I: IntoIterator<Item = FakeSet>,
    {
        check_universe(universe)?;
        let mut members: Vec<FakeSet> = members.into_iter().collect();
        if let Some(bad) = members.iter().find(|s| !s.fits(universe)) {
            return Err(Error::FakeSetOutOfRange {
                bits: bad.bits(),
                universe,
            });
        }
        members.sort_unstable();
        members.dedup();
        Ok(HypothesisSet {
            universe,
            semantics,
            members,
        })
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn members(&self) -> &[FakeSet] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: FakeSet) -> bool {
        self.members.binary_search(&s).is_ok()
    }

    pub fn full(&self) -> FakeSet {
        FakeSet::full(self.universe)
    }

    /// Whether `s` is one of the two single-weight configurations.
    pub fn is_uniform_member(&self, s: FakeSet) -> bool {
        s.is_empty() || s == self.full()
    }

    /// Contains at least one of the two single-weight configurations.
    pub fn touches_uniform(&self) -> bool {
        self.members.first() == Some(&FakeSet::EMPTY) || self.members.last() == Some(&self.full())
    }

    /// Non-empty and made only of single-weight configurations.
    pub fn is_uniform_only(&self) -> bool {
        !self.members.is_empty() && self.members.iter().all(|&s| self.is_uniform_member(s))
    }

    /// Number of answers the leaves must distinguish.
    pub fn class_count(&self) -> usize {
        let merged = self.semantics == Semantics::Sort
            && self.members.len() >= 2
            && self.members[0].is_empty()
            && *self.members.last().unwrap() == self.full();
        self.members.len() - usize::from(merged)
    }

    /// The leaf naming this set, when it is a single class.
    pub fn leaf(&self) -> Option<Leaf> {
        if self.class_count() != 1 {
            return None;
        }
        if self.semantics == Semantics::Sort && self.is_uniform_only() {
            Some(Leaf::Uniform)
        } else {
            Some(Leaf::Classified(self.members[0]))
        }
    }

    /// Whether `leaf` is a correct answer for hypothesis `s`.
    pub fn leaf_accepts(&self, leaf: Leaf, s: FakeSet) -> bool {
        match leaf {
            Leaf::Classified(x) => x == s,
            Leaf::Uniform => self.semantics == Semantics::Sort && self.is_uniform_member(s),
        }
    }

    /// `{ s ∈ self | weigh(s, w) = o }`.
    pub fn refine(&self, w: &Weighing, o: Outcome) -> HypothesisSet {
        let members = self
            .members
            .iter()
            .copied()
            .filter(|&s| w.outcome_unchecked(s) == o)
            .collect();
        HypothesisSet {
            members,
            ..*self
        }
    }

    /// The three refinements of `self` by `w`, indexed by outcome digit.
    pub fn split(&self, w: &Weighing) -> [HypothesisSet; 3] {
        let mut parts: [Vec<FakeSet>; 3] = Default::default();
        for &s in &self.members {
            parts[w.outcome_unchecked(s).digit() as usize].push(s);
        }
        parts.map(|members| HypothesisSet {
            members,
            ..*self
        })
    }
}

/// Filters `h` down to the hypotheses for which `w` yields `o`.
///
/// An empty result means the outcome history is inconsistent.
pub fn refine(h: &HypothesisSet, w: &Weighing, o: Outcome) -> HypothesisSet {
    h.refine(w, o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weighing::Pan;
    use proptest::prelude::*;

    #[test]
    fn refine_examples() {
        let h = HypothesisSet::from_members(3, Semantics::Exact, [FakeSet::EMPTY]).unwrap();
        let w = Weighing::coins(&[1], &[2]).unwrap();
        assert_eq!(refine(&h, &w, Outcome::Balanced).members(), &[FakeSet::EMPTY]);

        let all = HypothesisSet::all(3, Semantics::Exact).unwrap();
        let w = Weighing::new(Pan::of(&[1]), Pan::new([], 1)).unwrap();
        let heavy1 = refine(&all, &w, Outcome::LeftHeavier);
        assert_eq!(heavy1.members(), &[FakeSet(1), FakeSet(3), FakeSet(5), FakeSet(7)]);

        let h = HypothesisSet::from_members(3, Semantics::Exact, [FakeSet(1), FakeSet(2)]).unwrap();
        let w = Weighing::coins(&[1], &[2]).unwrap();
        assert!(refine(&h, &w, Outcome::Balanced).is_empty());
    }

    #[test]
    fn sort_semantics_merges_uniform_pair() {
        let h = HypothesisSet::all(4, Semantics::Sort).unwrap();
        assert_eq!(h.class_count(), 15);
        let u = HypothesisSet::from_members(4, Semantics::Sort, [FakeSet::EMPTY, FakeSet(15)]).unwrap();
        assert_eq!(u.leaf(), Some(Leaf::Uniform));
        let e = HypothesisSet::from_members(4, Semantics::Exact, [FakeSet::EMPTY, FakeSet(15)]).unwrap();
        assert_eq!(e.leaf(), None);
    }

    #[test]
    fn out_of_range_member_rejected() {
        assert!(HypothesisSet::from_members(3, Semantics::Exact, [FakeSet(8)]).is_err());
    }

    proptest! {
        #[test]
        fn refinements_partition(left in 0u64..(1 << 6), right in 0u64..(1 << 6), refs in 0u32..3) {
            let right = right & !left;
            let lp = Pan::new(FakeSet(left).coins(), 0);
            let mut rp = Pan::new(FakeSet(right).coins(), 0);
            let mut lp = lp;
            // balance with references on the lighter side
            let (l, r) = (lp.size(), rp.size());
            if l < r { lp.refs = r - l + refs; rp.refs = refs } else { rp.refs = l - r + refs; lp.refs = refs }
            let w = Weighing::new(lp, rp).unwrap();
            let h = HypothesisSet::all(6, Semantics::Sort).unwrap();
            let parts = h.split(&w);
            let total: usize = parts.iter().map(|p| p.len()).sum();
            prop_assert_eq!(total, h.len());
            for (d, part) in parts.iter().enumerate() {
                prop_assert_eq!(part, &h.refine(&w, Outcome::from_digit(d as u8).unwrap()));
            }
        }
    }
}
