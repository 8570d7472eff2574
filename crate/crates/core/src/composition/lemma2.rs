//! Extending a `k`-weighing strategy on a set `A` by three more coins at the
//! cost of two extra weighings.
//!
//! The first `k - 1` weighings of the given strategy are kept. Wherever they
//! leave at most three candidate answers `Γ` for `A`, the last weighing is
//! replaced by a three-weighing finisher that resolves `Γ` and the three new
//! coins together. Finishers are found by search on a small projected
//! problem: a few coins of `A` that tell the members of `Γ` apart, the three
//! new coins, and optionally one coin known to be normal and one known to be
//! heavy.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::coin::{CoinId, FakeSet};
use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisSet, Semantics};
use crate::search::{RefSupply, SearchOutcome, SearchProblem, Solver, WeighingPolicy};
use crate::tree::{DecisionTree, Leaf, Node};
use crate::weighing::Outcome;

/// Weighings a finisher may use.
pub const FINISHER_DEPTH: u32 = 3;

/// How the candidate answers left for `A` relate to each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FinisherKind {
    /// One answer left for `A`: only the new coins are unknown.
    GammaOne,
    /// Two answers, told apart by whether `x` is heavy.
    GammaTwo { x: CoinId },
    /// Three answers that look like `{x}`, `{y}` and neither on the pair.
    DeltaPlain { x: CoinId, y: CoinId },
    /// `{x}`, `{y}` and both, with both belonging to the last answer.
    DeltaProduct { x: CoinId, y: CoinId },
    /// `{x}`, `{z}` and both, with both belonging to an earlier answer.
    DeltaDoubleProduct { x: CoinId, z: CoinId },
    /// Neither, `{y}` and both: a chain that may need a reference coin.
    DeltaTail { y: CoinId, z: CoinId, needs_ref: bool },
}

impl fmt::Display for FinisherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FinisherKind::GammaOne => write!(f, "one answer"),
            FinisherKind::GammaTwo { x } => write!(f, "two answers split by {x}"),
            FinisherKind::DeltaPlain { x, y } => write!(f, "{{{x}}}, {{{y}}}, {{}}"),
            FinisherKind::DeltaProduct { x, y } => write!(f, "{{{x}}}, {{{y}}}, {{{x},{y}}}"),
            FinisherKind::DeltaDoubleProduct { x, z } => write!(f, "{{{x}}}, {{{z}}}, {{{x},{z}}} (product first)"),
            FinisherKind::DeltaTail { y, z, needs_ref } => {
                write!(f, "{{}}, {{{y}}}, {{{y},{z}}}")?;
                if needs_ref {
                    write!(f, " with a reference coin")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinisherCase {
    pub kind: FinisherKind,
    /// The finisher as it appears in the extended tree.
    pub finisher: DecisionTree,
}

#[derive(Clone, Debug)]
pub struct Lemma2Extension {
    pub tree: DecisionTree,
    /// Where each finisher was attached, by outcome path.
    pub finishers: Vec<(Vec<u8>, FinisherCase)>,
}

impl Lemma2Extension {
    pub fn count(&self, pred: impl Fn(&FinisherKind) -> bool) -> usize {
        self.finishers.iter().filter(|(_, c)| pred(&c.kind)).count()
    }
}

/// Extends `f` (a strategy over coins `1..=|A|`) by the coins `b`.
pub fn lemma2_extend(f: &DecisionTree, b: [CoinId; 3], semantics: Semantics) -> Result<DecisionTree> {
    Ok(lemma2_extend_detailed(f, b, semantics)?.tree)
}

pub fn lemma2_extend_detailed(f: &DecisionTree, b: [CoinId; 3], semantics: Semantics) -> Result<Lemma2Extension> {
    let a = f.universe();
    let mut sorted = b;
    sorted.sort();
    if sorted[0].0 <= a || sorted[0] == sorted[1] || sorted[1] == sorted[2] {
        return Err(Error::PreconditionViolated(format!(
            "new coins must be distinct and outside 1..={a}"
        )));
    }
    let universe = sorted[2].0;
    crate::coin::check_universe(universe)?;
    let k = f.depth();
    if k == 0 {
        return Err(Error::PreconditionViolated("strategy makes no weighings".into()));
    }
    let mut builder = Builder {
        a,
        b,
        universe,
        cut: k - 1,
        semantics,
        solver: Solver::default(),
        finishers: Vec::new(),
        cache: HashMap::new(),
    };
    let h = HypothesisSet::all(a, semantics)?;
    let root = builder
        .build(f.root(), &h, 0, &mut Vec::new())?
        .ok_or_else(|| Error::PreconditionViolated("no hypotheses".into()))?;
    Ok(Lemma2Extension {
        tree: DecisionTree::new(universe, root)?,
        finishers: builder.finishers,
    })
}

struct Builder {
    a: u32,
    b: [CoinId; 3],
    universe: u32,
    cut: u32,
    semantics: Semantics,
    solver: Solver,
    finishers: Vec<(Vec<u8>, FinisherCase)>,
    cache: HashMap<Vec<FakeSet>, (FinisherKind, Arc<Node>)>,
}

impl Builder {
    fn build(&mut self, node: &Arc<Node>, h: &HypothesisSet, used: u32, path: &mut Vec<u8>) -> Result<Option<Arc<Node>>> {
        if h.is_empty() {
            return Ok(None);
        }
        match node.as_ref() {
            Node::Internal { weighing, children } if used < self.cut => {
                let next = used + u32::from(!weighing.is_noop());
                let parts = h.split(weighing);
                let mut out: [Option<Arc<Node>>; 3] = Default::default();
                for o in Outcome::ALL {
                    let i = o.digit() as usize;
                    if let Some(child) = &children[i] {
                        path.push(o.digit());
                        out[i] = self.build(child, &parts[i], next, path)?;
                        path.pop();
                    } else if !parts[i].is_empty() {
                        return Err(Error::MalformedTree(path.clone()));
                    }
                }
                Ok(Some(Node::internal(weighing.clone(), out)))
            }
            _ => self.finish(h, path).map(Some),
        }
    }

    fn finish(&mut self, gamma: &HypothesisSet, path: &[u8]) -> Result<Arc<Node>> {
        if gamma.class_count() > 3 {
            return Err(Error::PreconditionViolated(format!(
                "{} candidate answers at {} after {} weighings",
                gamma.class_count(),
                crate::error::fmt_path(path),
                self.cut
            )));
        }
        let (kind, node) = match self.cache.get(gamma.members()) {
            Some(hit) => hit.clone(),
            None => {
                let solved = self.solve_case(gamma, path)?;
                self.cache.insert(gamma.members().to_vec(), solved.clone());
                solved
            }
        };
        self.finishers.push((
            path.to_vec(),
            FinisherCase {
                kind,
                finisher: DecisionTree::new(self.universe, node.clone())?,
            },
        ));
        Ok(node)
    }

    fn solve_case(&mut self, gamma: &HypothesisSet, path: &[u8]) -> Result<(FinisherKind, Arc<Node>)> {
        let members = gamma.members();
        let (designated, mut kind) = designate(members, self.a, gamma.class_count());
        let in_none = |c: u32| members.iter().all(|s| !s.contains(CoinId(c)));
        let in_all = |c: u32| members.iter().all(|s| s.contains(CoinId(c)));
        let spare = |pred: &dyn Fn(u32) -> bool| (1..=self.a).find(|&c| !designated.contains(&c) && pred(c));
        let normal = if self.semantics == Semantics::Sort { spare(&in_none) } else { None };
        let heavy = spare(&in_all);

        // Projected coin i + 1 stands for actual coin `actual[i]`.
        let mut actual: Vec<u32> = designated.clone();
        actual.extend(self.b.iter().map(|c| c.0));
        actual.extend(normal);
        actual.extend(heavy);
        let d = designated.len() as u32;
        let mut lift: HashMap<FakeSet, FakeSet> = HashMap::new();
        for &x in members {
            for t in 0..8u64 {
                let mut proj = 0u64;
                for (i, &c) in designated.iter().enumerate() {
                    if x.contains(CoinId(c)) {
                        proj |= 1 << i;
                    }
                }
                proj |= t << d;
                if heavy.is_some() {
                    proj |= 1 << (actual.len() - 1);
                }
                let mut real = x.bits();
                for (j, c) in self.b.iter().enumerate() {
                    if t >> j & 1 == 1 {
                        real |= c.bit();
                    }
                }
                lift.insert(FakeSet(proj), FakeSet(real));
            }
        }
        let full_a = FakeSet::full(self.a);
        let uniform = self.semantics == Semantics::Sort && gamma.contains(FakeSet::EMPTY) && gamma.contains(full_a);
        let proj_semantics = if uniform { Semantics::Sort } else { Semantics::Exact };
        let hyp = HypothesisSet::from_members(actual.len() as u32, proj_semantics, lift.keys().copied())?;
        let problem = SearchProblem {
            hypotheses: hyp,
            depth: FINISHER_DEPTH,
            policy: WeighingPolicy::with_refs(match self.semantics {
                Semantics::Exact => RefSupply::Unlimited,
                Semantics::Sort => RefSupply::Limited(0),
            }),
            uniform_by: uniform.then_some(FINISHER_DEPTH - 1),
        };
        let tree = match self.solver.solve(&problem)? {
            SearchOutcome::Found(t) => t,
            SearchOutcome::Infeasible => return Err(Error::FinisherInfeasible(path.to_vec())),
        };
        let coin_map = |c: CoinId| CoinId(actual[(c.0 - 1) as usize]);
        let leaf_map = |l: Leaf| match l {
            Leaf::Classified(p) => Leaf::Classified(lift[&p]),
            Leaf::Uniform => Leaf::Uniform,
        };
        let lifted = tree.relabel(self.universe, &coin_map, &leaf_map)?;
        if let FinisherKind::DeltaTail { needs_ref, .. } = &mut kind {
            let mut uses = false;
            lifted.visit(|_, n| {
                if let Some(w) = n.weighing() {
                    uses |= w.uses_refs()
                        || normal.is_some_and(|e| w.left.coins.contains(&CoinId(e)) || w.right.coins.contains(&CoinId(e)));
                }
            });
            *needs_ref = uses;
        }
        Ok((kind, lifted.root().clone()))
    }
}

fn pattern(s: FakeSet, coins: &[u32]) -> u8 {
    coins
        .iter()
        .enumerate()
        .fold(0, |p, (i, &c)| p | (u8::from(s.contains(CoinId(c))) << i))
}

fn injective(members: &[FakeSet], coins: &[u32]) -> bool {
    let mut seen = [false; 8];
    members.iter().all(|&s| !std::mem::replace(&mut seen[pattern(s, coins) as usize], true))
}

/// Picks the coins of `A` that tell the candidate answers apart and names the case.
fn designate(members: &[FakeSet], a: u32, classes: usize) -> (Vec<u32>, FinisherKind) {
    let id = CoinId;
    if members.len() == 1 {
        return (Vec::new(), FinisherKind::GammaOne);
    }
    if members.len() == 2 {
        let (x, y) = (members[0], members[1]);
        let only = |p: FakeSet, q: FakeSet| (1..=a).find(|&c| p.contains(id(c)) && !q.contains(id(c)));
        let c = only(x, y).or_else(|| only(y, x)).expect("distinct members differ somewhere");
        let kind = if classes == 1 {
            FinisherKind::GammaOne
        } else {
            FinisherKind::GammaTwo { x: id(c) }
        };
        return (vec![c], kind);
    }
    if members.len() == 3 {
        let pairs: Vec<[u32; 2]> = (1..=a).flat_map(|c1| (c1 + 1..=a).map(move |c2| [c1, c2])).collect();
        let shape = |p: &[u32; 2]| {
            let pats: Vec<u8> = members.iter().map(|&s| pattern(s, p)).collect();
            (pats[0] != pats[1] && pats[1] != pats[2] && pats[0] != pats[2]).then_some(pats)
        };
        // Prefer coins private to two answers, then a shared pair, then a chain.
        if let Some(p) = pairs.iter().find(|p| shape(p).is_some_and(|pats| !pats.contains(&3))) {
            return (p.to_vec(), FinisherKind::DeltaPlain { x: id(p[0]), y: id(p[1]) });
        }
        if let Some(p) = pairs.iter().find(|p| shape(p).is_some_and(|pats| !pats.contains(&0))) {
            let pats = shape(p).unwrap();
            let kind = if pats[2] == 3 {
                FinisherKind::DeltaProduct { x: id(p[0]), y: id(p[1]) }
            } else {
                FinisherKind::DeltaDoubleProduct { x: id(p[0]), z: id(p[1]) }
            };
            return (p.to_vec(), kind);
        }
        if let Some(p) = pairs.iter().find(|p| shape(p).is_some()) {
            let pats = shape(p).unwrap();
            let (y, z) = if pats.contains(&1) { (p[0], p[1]) } else { (p[1], p[0]) };
            return (
                p.to_vec(),
                FinisherKind::DeltaTail {
                    y: id(y),
                    z: id(z),
                    needs_ref: false,
                },
            );
        }
    }
    // Four members: the merged single-weight class plus others.
    let coins: Vec<u32> = (1..=a).collect();
    for size in 1..=3usize.min(coins.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let pick: Vec<u32> = idx.iter().map(|&i| coins[i]).collect();
            if injective(members, &pick) {
                let kind = match pick.as_slice() {
                    [x] => FinisherKind::GammaTwo { x: id(*x) },
                    [x, y, ..] => FinisherKind::DeltaPlain { x: id(*x), y: id(*y) },
                    [] => FinisherKind::GammaOne,
                };
                return (pick, kind);
            }
            // Next combination.
            let mut i = size;
            while i > 0 && idx[i - 1] == coins.len() - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    unreachable!("three coins always separate four distinct sets on eleven coins")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::synthesize_base;
    use crate::strategies::verify_tree;

    #[test]
    fn small_base_extends_to_seven_coins() {
        for sem in [Semantics::Exact, Semantics::Sort] {
            let f = synthesize_base(4, sem).unwrap();
            let k = f.depth();
            let ext = lemma2_extend_detailed(&f, [CoinId(5), CoinId(6), CoinId(7)], sem).unwrap();
            let r = verify_tree(&ext.tree, sem);
            assert!(r.is_correct(), "{sem}: {r}");
            assert!(ext.tree.depth() <= k + 2);
        }
    }

    #[test]
    fn single_answer_appends_three_coin_strategy() {
        let f = synthesize_base(1, Semantics::Exact).unwrap();
        let ext = lemma2_extend_detailed(&f, [CoinId(2), CoinId(3), CoinId(4)], Semantics::Exact).unwrap();
        assert_eq!(ext.finishers.len(), 1);
        assert_eq!(ext.finishers[0].1.kind, FinisherKind::GammaTwo { x: CoinId(1) });
        assert!(verify_tree(&ext.tree, Semantics::Exact).is_correct());
    }

    #[test]
    fn rejects_overlapping_coins() {
        let f = synthesize_base(4, Semantics::Exact).unwrap();
        assert!(matches!(
            lemma2_extend(&f, [CoinId(4), CoinId(5), CoinId(6)], Semantics::Exact),
            Err(Error::PreconditionViolated(_))
        ));
    }
}
