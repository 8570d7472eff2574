//! Plans for any number of coins built from blocks of at most eleven.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::bounds;
use crate::coin::{CoinId, FakeSet};
use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisSet, Semantics};
use crate::search::synthesize_base;
use crate::strategies::builtin;
use crate::tree::{DecisionTree, Leaf, Node};
use crate::weighing::{Outcome, Pan, Weighing};

use super::lemma2::lemma2_extend;

pub const BLOCK: u32 = 11;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum StageStrategy {
    /// One of the shipped eleven-coin tables, repaired.
    Table { name: String },
    /// A searched strategy for a block of fewer than eleven coins.
    Base { coins: u32 },
    /// An eleven-coin table extended by three coins.
    Lemma2 { table: String },
    /// A strategy supplied by the caller.
    Custom { name: String },
}

impl fmt::Display for StageStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StageStrategy::Table { name } => write!(f, "{name}"),
            StageStrategy::Base { coins } => write!(f, "searched {coins}-coin strategy"),
            StageStrategy::Lemma2 { table } => write!(f, "{table} extended by 3 coins"),
            StageStrategy::Custom { name } => write!(f, "{name}"),
        }
    }
}

/// A group of coins handled by one strategy; local coin `i` is `coins[i - 1]`.
#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub coins: Vec<CoinId>,
    pub strategy: StageStrategy,
    /// Weighings set aside for this stage, including the comparison that
    /// follows when a sorting stage finds its coins alike.
    pub weighings: u32,
    #[serde(skip)]
    pub tree: Arc<DecisionTree>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Splice {
    /// Index of the eleven-coin block that absorbs the remainder.
    pub block: usize,
    pub coins: Vec<CoinId>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositePlan {
    pub n: u32,
    pub semantics: Semantics,
    /// Eleven-coin blocks, in execution order.
    pub blocks: Vec<Vec<CoinId>>,
    pub remainder: Vec<CoinId>,
    pub splice: Option<Splice>,
    pub stages: Vec<Stage>,
    pub total_weighings: u32,
    pub bound: u32,
    /// Sorting plans settle alike groups by comparing them with a coin from
    /// a group already found to hold both kinds.
    pub borrows_normal_coins: bool,
}

type TreeCache = Mutex<HashMap<(String, Semantics), Arc<DecisionTree>>>;

fn cached_tree(key: &str, semantics: Semantics, build: impl FnOnce() -> Result<DecisionTree>) -> Result<Arc<DecisionTree>> {
    static CACHE: OnceLock<TreeCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(key.to_string(), semantics)) {
        return Ok(t.clone());
    }
    let t = Arc::new(build()?);
    cache.lock().unwrap().insert((key.to_string(), semantics), t.clone());
    Ok(t)
}

/// The eleven-coin table extended by coins 12, 13 and 14.
pub fn spliced_block(semantics: Semantics) -> Result<Arc<DecisionTree>> {
    cached_tree("lemma2:alg1", semantics, || {
        let f = builtin::repaired("alg1", semantics)?;
        lemma2_extend(&f, [CoinId(12), CoinId(13), CoinId(14)], semantics)
    })
}

fn ids(from: u32, to: u32) -> Vec<CoinId> {
    (from..=to).map(CoinId).collect()
}

/// Splits `n` coins into eleven-coin blocks and a remainder. Three left-over
/// coins ride on the last block; any other remainder gets its own strategy.
pub fn plan(n: u32, semantics: Semantics) -> Result<CompositePlan> {
    if n == 0 {
        return Err(Error::PreconditionViolated("a plan needs at least one coin".into()));
    }
    let m = n / BLOCK;
    let r = n % BLOCK;
    let table = |coins: Vec<CoinId>| -> Result<Stage> {
        Ok(Stage {
            coins,
            strategy: StageStrategy::Table { name: "alg1".into() },
            weighings: builtin::BUDGET,
            tree: cached_tree("alg1", semantics, || builtin::repaired("alg1", semantics))?,
        })
    };
    let blocks: Vec<Vec<CoinId>> = (0..m).map(|j| ids(j * BLOCK + 1, (j + 1) * BLOCK)).collect();
    let remainder = ids(m * BLOCK + 1, n);
    let mut stages = Vec::new();
    let mut splice = None;
    if r == 3 && m > 0 {
        for b in &blocks[..blocks.len() - 1] {
            stages.push(table(b.clone())?);
        }
        let mut coins = blocks[blocks.len() - 1].clone();
        coins.extend(&remainder);
        stages.push(Stage {
            coins,
            strategy: StageStrategy::Lemma2 { table: "alg1".into() },
            weighings: builtin::BUDGET + 2,
            tree: spliced_block(semantics)?,
        });
        splice = Some(Splice {
            block: blocks.len() - 1,
            coins: remainder.clone(),
        });
    } else {
        for b in &blocks {
            stages.push(table(b.clone())?);
        }
        if r > 0 {
            let tree = cached_tree(&format!("base:{r}"), semantics, || synthesize_base(r, semantics))?;
            let allotted = (bounds::upper(r as u64) as u32).max(tree.depth());
            stages.push(Stage {
                coins: remainder.clone(),
                strategy: StageStrategy::Base { coins: r },
                weighings: allotted,
                tree,
            });
        }
    }
    let total_weighings = stages.iter().map(|s| s.weighings).sum();
    Ok(CompositePlan {
        n,
        semantics,
        blocks,
        remainder,
        splice,
        borrows_normal_coins: semantics == Semantics::Sort && stages.len() > 1,
        stages,
        total_weighings,
        bound: bounds::upper(n as u64) as u32,
    })
}

impl CompositePlan {
    /// A plan that runs one given strategy over coins `1..=universe`.
    pub fn single(tree: DecisionTree, semantics: Semantics, name: &str) -> CompositePlan {
        let n = tree.universe();
        let depth = tree.depth();
        CompositePlan {
            n,
            semantics,
            blocks: Vec::new(),
            remainder: Vec::new(),
            splice: None,
            stages: vec![Stage {
                coins: ids(1, n),
                strategy: StageStrategy::Custom { name: name.into() },
                weighings: depth,
                tree: Arc::new(tree),
            }],
            total_weighings: depth,
            bound: bounds::upper(n as u64) as u32,
            borrows_normal_coins: false,
        }
    }

    pub fn within_bound(&self) -> bool {
        self.total_weighings <= self.bound
    }

    pub fn header(&self) -> String {
        if self.within_bound() {
            format!("{} weighings (bound {})", self.total_weighings, self.bound)
        } else if self.n == 3 && self.semantics == Semantics::Exact {
            format!(
                "{} weighings (exceeds ⌈7n/11⌉ = {}; known exception g(3) = 3)",
                self.total_weighings, self.bound
            )
        } else {
            format!("{} weighings (exceeds bound {})", self.total_weighings, self.bound)
        }
    }

    pub fn describe(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for (i, s) in self.stages.iter().enumerate() {
            let first = s.coins.first().map_or(0, |c| c.0);
            let last = s.coins.last().map_or(0, |c| c.0);
            let _ = writeln!(
                out,
                "stage {}: coins {first}-{last}, {}, {} weighings",
                i + 1,
                s.strategy,
                s.weighings
            );
        }
        if self.borrows_normal_coins {
            out.push_str("alike groups are compared with a coin from a group holding both kinds\n");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

/// What a finished plan reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanResult {
    /// Every coin weighs the same.
    Uniform,
    /// Exactly these coins are heavy.
    Fakes(Vec<CoinId>),
}

impl fmt::Display for PlanResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanResult::Uniform => f.write_str("all coins uniform"),
            PlanResult::Fakes(c) => {
                let parts: Vec<String> = c.iter().map(|c| c.to_string()).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
        }
    }
}

/// Why the runner asks for a weighing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    /// A weighing of the current stage's strategy.
    Strategy,
    /// A coin of an alike group against a coin known to be normal.
    GroupVsNormal,
    /// A coin of an alike group against a coin of an earlier alike group.
    GroupVsPending,
    /// The earlier alike group against a coin known to be normal.
    PendingVsNormal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub stage: usize,
    pub kind: StepKind,
    pub weighing: Weighing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Record {
    pub step: Step,
    pub outcome: Outcome,
    /// The outcome followed from earlier answers and was not asked.
    pub forced: bool,
}

#[derive(Clone, Debug)]
struct Running {
    node: Arc<Node>,
    h: Option<HypothesisSet>,
}

/// Executes a plan one weighing at a time.
#[derive(Clone, Debug)]
pub struct PlanRunner {
    plan: Arc<CompositePlan>,
    track: bool,
    stage: usize,
    running: Option<Running>,
    current: Option<Step>,
    heavy: Vec<CoinId>,
    /// Coins of alike groups whose weight is not known yet; all equal.
    pending: Vec<CoinId>,
    banked: bool,
    known_normal: Option<CoinId>,
    history: Vec<Record>,
    result: Option<PlanResult>,
    asked: u32,
}

impl PlanRunner {
    /// With `track` set, each stage keeps its consistent hypotheses so that
    /// impossible answers are rejected and determined weighings are skipped.
    pub fn new(plan: Arc<CompositePlan>, track: bool) -> Result<PlanRunner> {
        let mut r = PlanRunner {
            plan,
            track,
            stage: 0,
            running: None,
            current: None,
            heavy: Vec::new(),
            pending: Vec::new(),
            banked: false,
            known_normal: None,
            history: Vec::new(),
            result: None,
            asked: 0,
        };
        r.advance()?;
        Ok(r)
    }

    pub fn plan(&self) -> &CompositePlan {
        &self.plan
    }

    pub fn next_step(&self) -> Option<&Step> {
        self.current.as_ref()
    }

    pub fn result(&self) -> Option<&PlanResult> {
        self.result.as_ref()
    }

    pub fn history(&self) -> &[Record] {
        &self.history
    }

    /// Weighings actually asked for.
    pub fn asked(&self) -> u32 {
        self.asked
    }

    /// Records the outcome of the pending weighing.
    pub fn submit(&mut self, outcome: Outcome) -> Result<()> {
        let Some(step) = self.current.clone() else {
            return Err(Error::PreconditionViolated("the plan is finished".into()));
        };
        match step.kind {
            StepKind::Strategy => {
                let run = self.running.as_mut().expect("strategy step has a stage");
                let Node::Internal { weighing, children } = run.node.as_ref() else {
                    unreachable!("strategy step sits on a weighing")
                };
                let refined = match &run.h {
                    Some(h) => {
                        let r = h.refine(weighing, outcome);
                        if r.is_empty() {
                            return Err(Error::Contradiction(outcome.symbol()));
                        }
                        Some(r)
                    }
                    None => None,
                };
                let next = children[outcome.digit() as usize]
                    .clone()
                    .ok_or(Error::Contradiction(outcome.symbol()))?;
                run.h = refined;
                run.node = next;
            }
            StepKind::GroupVsNormal | StepKind::PendingVsNormal => {
                // The left coin is never lighter than a normal coin.
                if outcome == Outcome::LeftLighter {
                    return Err(Error::Contradiction(outcome.symbol()));
                }
                let group = self.group_of(&step);
                if outcome == Outcome::LeftHeavier {
                    self.heavy.extend(group);
                }
                if step.kind == StepKind::PendingVsNormal {
                    self.pending.clear();
                }
            }
            StepKind::GroupVsPending => {
                let group = self.group_of(&step);
                let left = step.weighing.left.coins[0];
                let right = step.weighing.right.coins[0];
                match outcome {
                    Outcome::Balanced => self.pending.extend(group),
                    Outcome::LeftHeavier => {
                        self.heavy.extend(group);
                        self.pending.clear();
                        self.known_normal = Some(right);
                    }
                    Outcome::LeftLighter => {
                        self.heavy.append(&mut self.pending);
                        self.known_normal = Some(left);
                    }
                }
            }
        }
        self.asked += 1;
        self.history.push(Record {
            step,
            outcome,
            forced: false,
        });
        self.current = None;
        self.advance()
    }

    fn group_of(&self, step: &Step) -> Vec<CoinId> {
        match step.kind {
            StepKind::PendingVsNormal => self.pending.clone(),
            _ => self.plan.stages[step.stage].coins.clone(),
        }
    }

    fn global(&self, stage: usize, w: &Weighing) -> Weighing {
        let coins = &self.plan.stages[stage].coins;
        let map = |p: &Pan| Pan::new(p.coins.iter().map(|c| coins[(c.0 - 1) as usize]), p.refs);
        Weighing {
            left: map(&w.left),
            right: map(&w.right),
        }
    }

    fn compare(&mut self, stage: usize, kind: StepKind, left: CoinId, right: CoinId) {
        self.current = Some(Step {
            stage,
            kind,
            weighing: Weighing {
                left: Pan::new([left], 0),
                right: Pan::new([right], 0),
            },
        });
    }

    fn advance(&mut self) -> Result<()> {
        loop {
            if self.stage >= self.plan.stages.len() {
                self.finish();
                return Ok(());
            }
            let index = self.stage;
            if self.running.is_none() {
                let tree = &self.plan.stages[index].tree;
                let h = match self.track {
                    true => Some(HypothesisSet::all(tree.universe(), self.plan.semantics)?),
                    false => None,
                };
                self.running = Some(Running {
                    node: tree.root().clone(),
                    h,
                });
            }
            let run = self.running.as_ref().unwrap();
            let node = run.node.clone();
            let settled = run.h.as_ref().and_then(|h| h.leaf());
            let (weighing, children) = match (node.as_ref(), settled) {
                (_, Some(leaf)) | (&Node::Leaf(leaf), None) => {
                    self.running = None;
                    if self.close_stage(leaf) {
                        return Ok(());
                    }
                    continue;
                }
                (Node::Internal { weighing, children }, None) => (weighing, children),
            };
            // A weighing whose outcome is already determined is not asked.
            let forced = match &run.h {
                Some(h) => {
                    let parts = h.split(weighing);
                    let live: Vec<usize> = (0..3).filter(|&i| !parts[i].is_empty()).collect();
                    match live[..] {
                        [i] => Some((i, Some(parts[i].clone()))),
                        _ => None,
                    }
                }
                None => weighing.is_noop().then_some((0, None)),
            };
            let step = Step {
                stage: index,
                kind: StepKind::Strategy,
                weighing: self.global(index, weighing),
            };
            let Some((i, part)) = forced else {
                self.current = Some(step);
                return Ok(());
            };
            let next = children[i].clone().ok_or_else(|| Error::MalformedTree(Vec::new()))?;
            let run = self.running.as_mut().unwrap();
            if part.is_some() {
                run.h = part;
            }
            run.node = next;
            if !step.weighing.is_noop() {
                self.history.push(Record {
                    step,
                    outcome: Outcome::from_digit(i as u8)?,
                    forced: true,
                });
            }
        }
    }

    /// Books a finished stage; returns true if a comparison is now pending.
    fn close_stage(&mut self, leaf: Leaf) -> bool {
        let coins = self.plan.stages[self.stage].coins.clone();
        let stage = self.stage;
        self.stage += 1;
        match leaf {
            Leaf::Classified(s) => {
                let heavy: Vec<CoinId> = s.coins().map(|c| coins[(c.0 - 1) as usize]).collect();
                let mixed = !heavy.is_empty() && heavy.len() < coins.len();
                if self.plan.semantics == Semantics::Sort && !mixed {
                    return self.close_alike(stage, coins);
                }
                if mixed && self.known_normal.is_none() {
                    self.known_normal = coins.iter().find(|c| !heavy.contains(c)).copied();
                }
                self.heavy.extend(heavy);
                if self.plan.semantics == Semantics::Sort && !self.pending.is_empty() {
                    let (p, e) = (self.pending[0], self.known_normal.unwrap());
                    self.compare(stage, StepKind::PendingVsNormal, p, e);
                    return true;
                }
                false
            }
            Leaf::Uniform => self.close_alike(stage, coins),
        }
    }

    fn close_alike(&mut self, stage: usize, coins: Vec<CoinId>) -> bool {
        let (kind, right) = if let Some(e) = self.known_normal {
            (StepKind::GroupVsNormal, e)
        } else if let Some(&p) = self.pending.first() {
            (StepKind::GroupVsPending, p)
        } else {
            self.pending = coins;
            self.banked = true;
            return false;
        };
        self.compare(stage, kind, coins[0], right);
        true
    }

    fn finish(&mut self) {
        if self.result.is_some() {
            return;
        }
        // Groups still pending were never told apart from anything else.
        self.heavy.sort();
        self.heavy.dedup();
        let alike = self.heavy.is_empty() || self.heavy.len() as u32 == self.plan.n;
        self.result = Some(if self.plan.semantics == Semantics::Sort && alike {
            PlanResult::Uniform
        } else {
            PlanResult::Fakes(self.heavy.clone())
        });
    }
}

/// Runs `plan` against a hidden assignment of heavy coins.
pub fn run_plan(plan: &Arc<CompositePlan>, is_heavy: impl Fn(CoinId) -> bool) -> Result<(PlanResult, u32)> {
    let mut r = PlanRunner::new(plan.clone(), false)?;
    while let Some(step) = r.next_step() {
        let o = step.weighing.outcome_by(&is_heavy);
        r.submit(o)?;
    }
    Ok((r.result().cloned().expect("finished"), r.asked()))
}

/// The answer a correct plan must give.
pub fn expected_result(n: u32, semantics: Semantics, is_heavy: impl Fn(CoinId) -> bool) -> PlanResult {
    let heavy: Vec<CoinId> = (1..=n).map(CoinId).filter(|&c| is_heavy(c)).collect();
    if semantics == Semantics::Sort && (heavy.is_empty() || heavy.len() as u32 == n) {
        PlanResult::Uniform
    } else {
        PlanResult::Fakes(heavy)
    }
}

impl From<FakeSet> for PlanResult {
    fn from(s: FakeSet) -> Self {
        PlanResult::Fakes(s.coins().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_layouts() {
        let p = plan(22, Semantics::Exact).unwrap();
        assert_eq!((p.blocks.len(), p.total_weighings), (2, 14));
        let p = plan(25, Semantics::Exact).unwrap();
        assert_eq!((p.blocks.len(), p.remainder.len(), p.total_weighings), (2, 3, 16));
        assert_eq!(p.splice.as_ref().unwrap().block, 1);
        let p = plan(3, Semantics::Exact).unwrap();
        assert_eq!(p.total_weighings, 3);
        assert_eq!(p.header(), "3 weighings (exceeds ⌈7n/11⌉ = 2; known exception g(3) = 3)");
        assert_eq!(plan(11, Semantics::Sort).unwrap().header(), "7 weighings (bound 7)");
    }

    #[test]
    fn small_plans_exhaustive() {
        for sem in [Semantics::Exact, Semantics::Sort] {
            for n in [1u32, 2, 4, 12, 13] {
                let p = Arc::new(plan(n, sem).unwrap());
                for bits in 0..1u64 << n {
                    let heavy = |c: CoinId| bits >> (c.0 - 1) & 1 == 1;
                    let (got, used) = run_plan(&p, heavy).unwrap();
                    assert_eq!(got, expected_result(n, sem, heavy), "n={n} {sem} {bits:b}");
                    assert!(used <= p.total_weighings);
                }
            }
        }
    }
}
