//! Adaptive weighing strategies as ternary decision trees.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use crate::coin::{check_universe, CoinId, FakeSet};
use crate::error::{Error, Result};
use crate::weighing::{Outcome, Weighing};

/// What a strategy reports at the end of a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Leaf {
    /// Exactly these coins are heavy.
    Classified(FakeSet),
    /// All coins weigh the same; which class they belong to is unknown.
    Uniform,
}

impl fmt::Display for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Leaf::Classified(s) => write!(f, "{s}"),
            Leaf::Uniform => f.write_str("~"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    /// Children are indexed by outcome digit; `None` marks an unreachable branch.
    Internal {
        weighing: Weighing,
        children: [Option<Arc<Node>>; 3],
    },
    Leaf(Leaf),
}

impl Node {
    pub fn leaf(leaf: Leaf) -> Arc<Node> {
        Arc::new(Node::Leaf(leaf))
    }

    pub fn internal(weighing: Weighing, children: [Option<Arc<Node>>; 3]) -> Arc<Node> {
        Arc::new(Node::Internal { weighing, children })
    }

    pub fn weighing(&self) -> Option<&Weighing> {
        match self {
            Node::Internal { weighing, .. } => Some(weighing),
            Node::Leaf(_) => None,
        }
    }

    pub fn child(&self, o: Outcome) -> Option<&Arc<Node>> {
        match self {
            Node::Internal { children, .. } => children[o.digit() as usize].as_ref(),
            Node::Leaf(_) => None,
        }
    }

    /// Longest root-to-leaf path, counting only non-empty weighings.
    pub fn depth(&self) -> u32 {
        match self {
            Node::Leaf(_) => 0,
            Node::Internal { weighing, children } => {
                let below = children.iter().flatten().map(|c| c.depth()).max().unwrap_or(0);
                below + u32::from(!weighing.is_noop())
            }
        }
    }

    fn relabel(&self, coins: &dyn Fn(CoinId) -> CoinId, leaves: &dyn Fn(Leaf) -> Leaf) -> Arc<Node> {
        match self {
            Node::Leaf(l) => Node::leaf(leaves(*l)),
            Node::Internal { weighing, children } => Node::internal(
                weighing.relabel(coins),
                children
                    .clone()
                    .map(|c| c.map(|c| c.relabel(coins, leaves))),
            ),
        }
    }
}

/// Result of running a strategy against one hypothesis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub leaf: Leaf,
    pub path: Vec<Outcome>,
    pub weighings_used: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionTree {
    universe: u32,
    root: Arc<Node>,
}

impl DecisionTree {
    pub fn new(universe: u32, root: Arc<Node>) -> Result<DecisionTree> {
        check_universe(universe)?;
        Ok(DecisionTree { universe, root })
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn root(&self) -> &Arc<Node> {
        &self.root
    }

    pub fn depth(&self) -> u32 {
        self.root.depth()
    }

    /// Follows the outcomes `s` produces until a leaf.
    pub fn run(&self, s: FakeSet) -> Result<Run> {
        if !s.fits(self.universe) {
            return Err(Error::FakeSetOutOfRange {
                bits: s.bits(),
                universe: self.universe,
            });
        }
        let mut node = &self.root;
        let mut path = Vec::new();
        let mut used = 0;
        loop {
            match node.as_ref() {
                Node::Leaf(leaf) => {
                    return Ok(Run {
                        leaf: *leaf,
                        path,
                        weighings_used: used,
                    })
                }
                Node::Internal { weighing, children } => {
                    let o = crate::weighing::weigh(s, weighing)?;
                    path.push(o);
                    used += u32::from(!weighing.is_noop());
                    node = children[o.digit() as usize]
                        .as_ref()
                        .ok_or_else(|| Error::MalformedTree(digits(&path)))?;
                }
            }
        }
    }

    pub fn node_at(&self, path: &[u8]) -> Option<&Arc<Node>> {
        let mut node = &self.root;
        for &d in path {
            node = node.child(Outcome::from_digit(d).ok()?)?;
        }
        Some(node)
    }

    /// Visits every node in depth-first order with its outcome path.
    pub fn visit(&self, mut f: impl FnMut(&[u8], &Node)) {
        fn go(node: &Node, path: &mut Vec<u8>, f: &mut dyn FnMut(&[u8], &Node)) {
            f(path, node);
            if let Node::Internal { children, .. } = node {
                for (d, c) in children.iter().enumerate() {
                    if let Some(c) = c {
                        path.push(d as u8);
                        go(c, path, f);
                        path.pop();
                    }
                }
            }
        }
        go(&self.root, &mut Vec::new(), &mut f);
    }

    /// Returns a copy with the subtree at `path` replaced.
    pub fn replace_at(&self, path: &[u8], subtree: Arc<Node>) -> Result<DecisionTree> {
        fn go(node: &Arc<Node>, path: &[u8], full: &[u8], subtree: Arc<Node>) -> Result<Arc<Node>> {
            let Some((&d, rest)) = path.split_first() else {
                return Ok(subtree);
            };
            match node.as_ref() {
                Node::Internal { weighing, children } => {
                    let mut children = children.clone();
                    let slot = children.get_mut(d as usize).ok_or(Error::InvalidOutcome(d))?;
                    let child = match slot {
                        Some(c) => go(c, rest, full, subtree)?,
                        None if rest.is_empty() => subtree,
                        None => return Err(Error::MalformedTree(full[..full.len() - rest.len()].to_vec())),
                    };
                    *slot = Some(child);
                    Ok(Node::internal(weighing.clone(), children))
                }
                Node::Leaf(_) => Err(Error::MalformedTree(full[..full.len() - path.len()].to_vec())),
            }
        }
        Ok(DecisionTree {
            universe: self.universe,
            root: go(&self.root, path, path, subtree)?,
        })
    }

    /// Renames coins and rewrites leaves, producing a tree over `universe`.
    pub fn relabel(
        &self,
        universe: u32,
        coins: &dyn Fn(CoinId) -> CoinId,
        leaves: &dyn Fn(Leaf) -> Leaf,
    ) -> Result<DecisionTree> {
        DecisionTree::new(universe, self.root.relabel(coins, leaves))
    }

    /// Graphviz rendering; edges carry the outcome symbols.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", name.replace('"', "'"));
        let _ = writeln!(out, "  node [fontname=\"monospace\"];");
        let mut ids = 0usize;
        fn go(node: &Node, ids: &mut usize, out: &mut String) -> usize {
            let me = *ids;
            *ids += 1;
            match node {
                Node::Leaf(l) => {
                    let _ = writeln!(out, "  n{me} [shape=box, label=\"{l}\"];");
                }
                Node::Internal { weighing, children } => {
                    let _ = writeln!(out, "  n{me} [shape=ellipse, label=\"{weighing}\"];");
                    for (d, c) in children.iter().enumerate() {
                        if let Some(c) = c {
                            let child = go(c, ids, out);
                            let sym = Outcome::from_digit(d as u8).unwrap().symbol();
                            let _ = writeln!(out, "  n{me} -> n{child} [label=\"{sym}\"];");
                        }
                    }
                }
            }
            me
        }
        go(&self.root, &mut ids, &mut out);
        out.push_str("}\n");
        out
    }
}

/// Runs `tree` against the hypothesis `s`.
pub fn run_strategy(tree: &DecisionTree, s: FakeSet) -> Result<Run> {
    tree.run(s)
}

pub(crate) fn digits(path: &[Outcome]) -> Vec<u8> {
    path.iter().map(|o| o.digit()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weighing::Pan;

    fn one_coin_tree() -> DecisionTree {
        let w = Weighing::new(Pan::of(&[1]), Pan::new([], 1)).unwrap();
        let root = Node::internal(
            w,
            [
                Some(Node::leaf(Leaf::Classified(FakeSet(0)))),
                None,
                Some(Node::leaf(Leaf::Classified(FakeSet(1)))),
            ],
        );
        DecisionTree::new(1, root).unwrap()
    }

    #[test]
    fn runs_single_weighing() {
        let t = one_coin_tree();
        let r = t.run(FakeSet(1)).unwrap();
        assert_eq!(r.leaf, Leaf::Classified(FakeSet(1)));
        assert_eq!(r.path, vec![Outcome::LeftHeavier]);
        assert_eq!(r.weighings_used, 1);
        assert_eq!(t.depth(), 1);
        assert!(t.run(FakeSet(2)).is_err());
    }

    #[test]
    fn missing_child_is_malformed() {
        let w = Weighing::coins(&[1], &[2]).unwrap();
        let root = Node::internal(w, [Some(Node::leaf(Leaf::Uniform)), None, None]);
        let t = DecisionTree::new(2, root).unwrap();
        assert_eq!(t.run(FakeSet(1)).unwrap_err(), Error::MalformedTree(vec![2]));
    }

    #[test]
    fn noop_is_not_counted() {
        let root = Node::internal(Weighing::noop(), [Some(Node::leaf(Leaf::Uniform)), None, None]);
        let t = DecisionTree::new(2, root).unwrap();
        let r = t.run(FakeSet(3)).unwrap();
        assert_eq!(r.weighings_used, 0);
        assert_eq!(r.path.len(), 1);
        assert_eq!(t.depth(), 0);
    }

    #[test]
    fn replace_and_dot() {
        let t = one_coin_tree();
        let t2 = t.replace_at(&[2], Node::leaf(Leaf::Uniform)).unwrap();
        assert_eq!(t2.run(FakeSet(1)).unwrap().leaf, Leaf::Uniform);
        let t3 = t.replace_at(&[1], Node::leaf(Leaf::Uniform)).unwrap();
        assert!(t3.node_at(&[1]).is_some());
        let dot = t.to_dot("one");
        assert!(dot.contains("{1}:{e}"));
        assert!(dot.contains("label=\">\""));
    }
}
