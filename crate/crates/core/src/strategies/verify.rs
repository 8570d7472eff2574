use std::fmt;

use serde::Serialize;

use crate::coin::FakeSet;
use crate::hypothesis::{HypothesisSet, Semantics};
use crate::tree::{DecisionTree, Leaf, Node};
use crate::weighing::Outcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefectKind {
    /// A leaf gives the wrong answer for some hypotheses reaching it.
    Misclassified,
    /// Hypotheses reach a branch that has no node.
    MissingChild,
    /// The stored weighing is unbalanced, overlapping or names unknown coins.
    InvalidWeighing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Defect {
    pub path: Vec<u8>,
    pub kind: DefectKind,
    /// Hypotheses that end up wrong because of this defect.
    pub cases: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub semantics: Semantics,
    pub total_cases: usize,
    pub correct: usize,
    /// Most non-empty weighings used by any hypothesis.
    pub max_depth: u32,
    /// Weighings after which the hypotheses sharing the empty set's path are
    /// all single-weight configurations; `None` if that never happens.
    pub uniform_resolved_by: Option<u32>,
    /// Largest number of consistent classes at any node reached after `i` weighings.
    pub classes_by_depth: Vec<usize>,
    pub defects: Vec<Defect>,
}

impl VerificationReport {
    pub fn is_correct(&self) -> bool {
        self.correct == self.total_cases && self.defects.is_empty()
    }

    pub fn incorrect(&self) -> usize {
        self.total_cases - self.correct
    }

    /// Largest class count at nodes reached after `depth` weighings.
    pub fn classes_at(&self, depth: u32) -> usize {
        self.classes_by_depth.get(depth as usize).copied().unwrap_or(0)
    }

    pub fn defect_paths(&self) -> Vec<Vec<u8>> {
        self.defects.iter().map(|d| d.path.clone()).collect()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} correct, depth {}", self.correct, self.total_cases, self.max_depth)?;
        if let Some(u) = self.uniform_resolved_by {
            write!(f, ", uniform resolved by {u}")?;
        }
        if !self.defects.is_empty() {
            write!(f, ", {} defects", self.defects.len())?;
        }
        Ok(())
    }
}

/// Checks `tree` against every fake set of its universe.
pub fn verify_tree(tree: &DecisionTree, semantics: Semantics) -> VerificationReport {
    let h = HypothesisSet::all(tree.universe(), semantics)
        .expect("exhaustive verification needs a universe of at most 30 coins");
    verify_tree_on(tree, &h)
}

/// Checks `tree` against the hypotheses in `h`.
pub fn verify_tree_on(tree: &DecisionTree, h: &HypothesisSet) -> VerificationReport {
    let mut report = VerificationReport {
        semantics: h.semantics(),
        total_cases: h.len(),
        correct: 0,
        max_depth: 0,
        uniform_resolved_by: None,
        classes_by_depth: Vec::new(),
        defects: Vec::new(),
    };
    let mut path = Vec::new();
    walk(tree.root(), h, 0, &mut path, tree.universe(), &mut report);
    report.uniform_resolved_by = uniform_resolution(tree, h);
    report
}

fn walk(node: &Node, h: &HypothesisSet, used: u32, path: &mut Vec<u8>, universe: u32, r: &mut VerificationReport) {
    if h.is_empty() {
        return;
    }
    let level = used as usize;
    if r.classes_by_depth.len() <= level {
        r.classes_by_depth.resize(level + 1, 0);
    }
    r.classes_by_depth[level] = r.classes_by_depth[level].max(h.class_count());
    match node {
        Node::Leaf(leaf) => {
            r.max_depth = r.max_depth.max(used);
            let ok = h.members().iter().filter(|&&s| h.leaf_accepts(*leaf, s)).count();
            r.correct += ok;
            if ok < h.len() {
                r.defects.push(Defect {
                    path: path.clone(),
                    kind: DefectKind::Misclassified,
                    cases: h.len() - ok,
                });
            }
        }
        Node::Internal { weighing, children } => {
            if weighing.validate(universe).is_err() {
                r.defects.push(Defect {
                    path: path.clone(),
                    kind: DefectKind::InvalidWeighing,
                    cases: h.len(),
                });
                return;
            }
            let next = used + u32::from(!weighing.is_noop());
            for (o, part) in Outcome::ALL.iter().zip(h.split(weighing)) {
                if part.is_empty() {
                    continue;
                }
                path.push(o.digit());
                match &children[o.digit() as usize] {
                    Some(child) => walk(child, &part, next, path, universe, r),
                    None => {
                        r.max_depth = r.max_depth.max(next);
                        r.defects.push(Defect {
                            path: path.clone(),
                            kind: DefectKind::MissingChild,
                            cases: part.len(),
                        })
                    }
                }
                path.pop();
            }
        }
    }
}

/// Weighings along the empty set's path until only single-weight
/// configurations remain consistent.
fn uniform_resolution(tree: &DecisionTree, h: &HypothesisSet) -> Option<u32> {
    if !h.touches_uniform() {
        return None;
    }
    let probe = if h.contains(FakeSet::EMPTY) { FakeSet::EMPTY } else { h.full() };
    let mut node = tree.root();
    let mut h = h.clone();
    let mut used = 0;
    loop {
        if h.is_uniform_only() {
            return Some(used);
        }
        let Node::Internal { weighing, children } = node.as_ref() else {
            return None;
        };
        weighing.validate(tree.universe()).ok()?;
        let o = weighing.outcome_by(|c| probe.contains(c));
        h = h.refine(weighing, o);
        used += u32::from(!weighing.is_noop());
        node = children[o.digit() as usize].as_ref()?;
    }
}

/// Shorthand used by tests and the command line: the tree's answer for `s` is right.
pub fn classifies(tree: &DecisionTree, semantics: Semantics, s: FakeSet) -> bool {
    match tree.run(s) {
        Ok(run) => match run.leaf {
            Leaf::Classified(x) => x == s,
            Leaf::Uniform => semantics == Semantics::Sort && (s.is_empty() || s == FakeSet::full(tree.universe())),
        },
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Node;
    use crate::weighing::{Pan, Weighing};

    fn one_coin() -> DecisionTree {
        let w = Weighing::new(Pan::of(&[1]), Pan::new([], 1)).unwrap();
        let root = Node::internal(
            w,
            [Some(Node::leaf(Leaf::Classified(FakeSet(0)))), None, Some(Node::leaf(Leaf::Classified(FakeSet(1))))],
        );
        DecisionTree::new(1, root).unwrap()
    }

    #[test]
    fn one_coin_exact() {
        let r = verify_tree(&one_coin(), Semantics::Exact);
        assert_eq!((r.correct, r.total_cases, r.max_depth), (2, 2, 1));
        assert!(r.is_correct());
        assert_eq!(r.to_string(), "2/2 correct, depth 1, uniform resolved by 0");
    }

    #[test]
    fn missing_child_is_reported() {
        let t = one_coin();
        let t = DecisionTree::new(
            1,
            Node::internal(t.root().weighing().unwrap().clone(), [t.root().child(Outcome::Balanced).cloned(), None, None]),
        )
        .unwrap();
        let r = verify_tree(&t, Semantics::Exact);
        assert_eq!(r.correct, 1);
        assert_eq!(r.defects[0].kind, DefectKind::MissingChild);
        assert_eq!(r.defects[0].path, vec![2]);
    }
}
