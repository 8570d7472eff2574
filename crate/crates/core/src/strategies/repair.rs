use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisSet, Semantics};
use crate::search::{RefSupply, SearchLimits, SearchProblem, SearchOutcome, Solver, WeighingPolicy};
use crate::tree::{DecisionTree, Node};
use crate::weighing::Outcome;

use super::verify::VerificationReport;

#[derive(Clone, Debug)]
pub struct RepairOptions {
    /// Most weighings any path may use.
    pub budget: u32,
    /// Weighings by which the single-weight configurations must be isolated.
    pub uniform_by: Option<u32>,
    pub limits: SearchLimits,
}

impl RepairOptions {
    pub fn new(budget: u32) -> RepairOptions {
        RepairOptions {
            budget,
            uniform_by: None,
            limits: SearchLimits::default(),
        }
    }
}

/// A repaired tree and the paths whose subtrees were rebuilt.
#[derive(Clone, Debug)]
pub struct Repair {
    pub tree: DecisionTree,
    pub rebuilt: Vec<Vec<u8>>,
}

/// Rebuilds the defective subtrees listed in `report` within `budget` weighings.
pub fn repair_tree(tree: &DecisionTree, report: &VerificationReport, budget: u32) -> Result<DecisionTree> {
    Ok(repair_tree_with(tree, report, &RepairOptions::new(budget))?.tree)
}

pub fn repair_tree_with(tree: &DecisionTree, report: &VerificationReport, opts: &RepairOptions) -> Result<Repair> {
    if report.defects.is_empty() {
        return Ok(Repair {
            tree: tree.clone(),
            rebuilt: Vec::new(),
        });
    }
    let h = HypothesisSet::all(tree.universe(), report.semantics)?;
    let policy = WeighingPolicy::with_refs(match report.semantics {
        Semantics::Exact => RefSupply::Unlimited,
        Semantics::Sort => RefSupply::Limited(0),
    });
    let mut fixer = Fixer {
        defects: report.defect_paths(),
        opts,
        policy,
        solver: Solver::new(opts.limits),
        rebuilt: Vec::new(),
    };
    let root = fixer.fix(tree.root(), &h, &mut Vec::new(), 0)?;
    Ok(Repair {
        tree: DecisionTree::new(tree.universe(), root)?,
        rebuilt: fixer.rebuilt,
    })
}

struct Fixer<'a> {
    defects: Vec<Vec<u8>>,
    opts: &'a RepairOptions,
    policy: WeighingPolicy,
    solver: Solver,
    rebuilt: Vec<Vec<u8>>,
}

impl Fixer<'_> {
    fn on_defect_path(&self, path: &[u8]) -> bool {
        self.defects.iter().any(|d| d.starts_with(path))
    }

    fn synthesize(&mut self, h: &HypothesisSet, path: &[u8], used: u32) -> Result<Option<Arc<Node>>> {
        let Some(depth) = self.opts.budget.checked_sub(used) else {
            return Ok(None);
        };
        let uniform_by = match self.opts.uniform_by {
            Some(u) if u < used => {
                if h.touches_uniform() && !h.is_uniform_only() {
                    return Ok(None);
                }
                None
            }
            Some(u) => Some(u - used),
            None => None,
        };
        let p = SearchProblem {
            hypotheses: h.clone(),
            depth,
            policy: self.policy,
            uniform_by,
        };
        Ok(match self.solver.solve(&p)? {
            SearchOutcome::Found(t) => {
                self.rebuilt.push(path.to_vec());
                Some(t.root().clone())
            }
            SearchOutcome::Infeasible => None,
        })
    }

    fn fix(&mut self, node: &Arc<Node>, h: &HypothesisSet, path: &mut Vec<u8>, used: u32) -> Result<Arc<Node>> {
        if h.is_empty() || !self.on_defect_path(path) {
            return Ok(node.clone());
        }
        if let Node::Internal { weighing, children } = node.as_ref() {
            if weighing.validate(h.universe()).is_ok() {
                let next = used + u32::from(!weighing.is_noop());
                let parts = h.split(weighing);
                let mut rebuilt = children.clone();
                let mark = self.rebuilt.len();
                let mut ok = true;
                for o in Outcome::ALL {
                    let i = o.digit() as usize;
                    if parts[i].is_empty() {
                        continue;
                    }
                    path.push(o.digit());
                    let child = match &children[i] {
                        Some(c) => self.fix(c, &parts[i], path, next).ok(),
                        None => self.synthesize(&parts[i], path, next)?,
                    };
                    path.pop();
                    match child {
                        Some(c) => rebuilt[i] = Some(c),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    return Ok(Node::internal(weighing.clone(), rebuilt));
                }
                self.rebuilt.truncate(mark);
            }
        }
        self.synthesize(h, path, used)?
            .ok_or_else(|| Error::IrreparableNode(path.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::FakeSet;
    use crate::strategies::verify::verify_tree;
    use crate::tree::Leaf;
    use crate::weighing::Weighing;

    #[test]
    fn clean_tree_is_returned_unchanged() {
        let t = crate::search::solve(&SearchProblem::exact(2, 2).unwrap()).unwrap().tree().unwrap();
        let r = verify_tree(&t, Semantics::Exact);
        assert_eq!(repair_tree(&t, &r, 2).unwrap(), t);
    }

    #[test]
    fn noop_root_with_no_budget_is_irreparable() {
        let t = DecisionTree::new(
            2,
            Node::internal(Weighing::noop(), [Some(Node::leaf(Leaf::Classified(FakeSet(0)))), None, None]),
        )
        .unwrap();
        let r = verify_tree(&t, Semantics::Exact);
        assert_eq!(repair_tree(&t, &r, 0).unwrap_err(), Error::IrreparableNode(vec![]));
        let fixed = repair_tree(&t, &r, 2).unwrap();
        assert!(verify_tree(&fixed, Semantics::Exact).is_correct());
    }
}
