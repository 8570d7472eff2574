//! Step-by-step execution of a plan for a person at a balance.

use std::sync::Arc;

use serde::Serialize;

use crate::composition::plan::{plan, CompositePlan, PlanResult, PlanRunner, Record, Step};
use crate::error::{Error, Result};
use crate::hypothesis::Semantics;
use crate::tree::DecisionTree;
use crate::weighing::{Outcome, Pan};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Next {
    Weigh {
        left: Pan,
        right: Pan,
        /// 1-based count of weighings asked so far, this one included.
        weighing_index: u32,
    },
    Done {
        done: bool,
        result: String,
        fakes: Option<Vec<u32>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    AwaitingOutcome,
    Finished,
}

#[derive(Clone, Debug, Serialize)]
pub struct SessionState {
    pub n: u32,
    pub semantics: Semantics,
    pub status: Status,
    pub next: Next,
    pub history: Vec<Record>,
}

#[derive(Clone, Debug)]
pub struct Session {
    runner: PlanRunner,
}

impl Session {
    pub fn for_coins(n: u32, semantics: Semantics) -> Result<Session> {
        Session::for_plan(Arc::new(plan(n, semantics)?))
    }

    pub fn for_tree(tree: DecisionTree, semantics: Semantics, name: &str) -> Result<Session> {
        Session::for_plan(Arc::new(CompositePlan::single(tree, semantics, name)))
    }

    pub fn for_plan(plan: Arc<CompositePlan>) -> Result<Session> {
        Ok(Session {
            runner: PlanRunner::new(plan, true)?,
        })
    }

    pub fn plan(&self) -> &CompositePlan {
        self.runner.plan()
    }

    pub fn step(&self) -> Option<&Step> {
        self.runner.next_step()
    }

    pub fn result(&self) -> Option<&PlanResult> {
        self.runner.result()
    }

    pub fn is_finished(&self) -> bool {
        self.runner.result().is_some()
    }

    pub fn next(&self) -> Next {
        match (self.runner.next_step(), self.runner.result()) {
            (Some(step), _) => Next::Weigh {
                left: step.weighing.left.clone(),
                right: step.weighing.right.clone(),
                weighing_index: self.runner.asked() + 1,
            },
            (None, result) => {
                let result = result.expect("a runner without a step is finished");
                Next::Done {
                    done: true,
                    result: result.to_string(),
                    fakes: match result {
                        PlanResult::Uniform => None,
                        PlanResult::Fakes(c) => Some(c.iter().map(|c| c.0).collect()),
                    },
                }
            }
        }
    }

    /// Applies an outcome. A contradictory outcome leaves the session unchanged.
    pub fn submit(&mut self, outcome: Outcome) -> Result<Next> {
        self.runner.submit(outcome)?;
        Ok(self.next())
    }

    /// Accepts `<`, `=` or `>`.
    pub fn submit_symbol(&mut self, symbol: &str) -> Result<Next> {
        let mut chars = symbol.trim().chars();
        match (chars.next().and_then(Outcome::from_symbol), chars.next()) {
            (Some(o), None) => self.submit(o),
            _ => Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!("expected one of <, =, >, got {symbol:?}"),
            }),
        }
    }

    pub fn history(&self) -> &[Record] {
        self.runner.history()
    }

    pub fn state(&self) -> SessionState {
        SessionState {
            n: self.plan().n,
            semantics: self.plan().semantics,
            status: if self.is_finished() { Status::Finished } else { Status::AwaitingOutcome },
            next: self.next(),
            history: self.history().to_vec(),
        }
    }

    /// The instruction shown to the person weighing.
    pub fn prompt(&self) -> String {
        match self.next() {
            Next::Weigh { left, right, weighing_index } => {
                format!("weighing {weighing_index}: put coins {left} on the left pan, {right} on the right")
            }
            Next::Done { result, .. } => result,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::{CoinId, FakeSet};

    fn answer(session: &mut Session, s: FakeSet) -> u32 {
        let mut asked = 0;
        while let Some(step) = session.step() {
            let o = step.weighing.outcome_by(|c| s.contains(c));
            session.submit(o).unwrap();
            asked += 1;
        }
        asked
    }

    #[test]
    fn eleven_coin_session() {
        let mut s = Session::for_coins(11, Semantics::Sort).unwrap();
        assert_eq!(s.prompt(), "weighing 1: put coins {1,2,3} on the left pan, {4,5,6} on the right");
        answer(&mut s, FakeSet(1));
        assert_eq!(s.result(), Some(&PlanResult::Fakes(vec![CoinId(1)])));
    }

    #[test]
    fn all_balanced_is_uniform() {
        let mut s = Session::for_coins(11, Semantics::Sort).unwrap();
        while !s.is_finished() {
            s.submit_symbol("=").unwrap();
        }
        assert_eq!(s.prompt(), "all coins uniform");
    }

    #[test]
    fn contradiction_keeps_state() {
        let mut rejected = 0;
        for bits in (0..2048u64).step_by(97) {
            let truth = FakeSet(bits);
            let mut s = Session::for_coins(11, Semantics::Sort).unwrap();
            while let Some(step) = s.step() {
                let right = step.weighing.outcome_by(|c| truth.contains(c));
                for o in Outcome::ALL.into_iter().filter(|&o| o != right) {
                    let before = (s.state().history.len(), s.prompt());
                    let mut probe = s.clone();
                    if let Err(e) = probe.submit(o) {
                        assert!(matches!(e, Error::Contradiction(_)));
                        assert_eq!((probe.state().history.len(), probe.prompt()), before);
                        rejected += 1;
                    }
                }
                s.submit(right).unwrap();
            }
            assert_eq!(s.result(), Some(&crate::composition::plan::expected_result(11, Semantics::Sort, |c| truth.contains(c))));
        }
        assert!(rejected > 0);
    }
}
