//! Depth-bounded adversarial search for weighing strategies.
//!
//! A node is a set of hypotheses still consistent with the outcomes so far.
//! Weighings are generated up to coin symmetries of that set: two coins whose
//! transposition maps the set onto itself are interchangeable, so only the
//! number of coins taken from each such class matters.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use crate::bounds;
use crate::coin::{full_mask, CoinId, FakeSet};
use crate::error::{Error, Result};
use crate::hypothesis::{HypothesisSet, Semantics};
use crate::tree::{DecisionTree, Node};
use crate::weighing::{Pan, Weighing};

/// Known-normal coins available besides the universe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RefSupply {
    Unlimited,
    Limited(u32),
}

impl RefSupply {
    fn count(self) -> u32 {
        match self {
            RefSupply::Unlimited => u32::MAX,
            RefSupply::Limited(k) => k,
        }
    }
}

/// Which weighings the search may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WeighingPolicy {
    pub refs: RefSupply,
    /// Coins that may go on a pan; `None` allows the whole universe.
    pub allowed: Option<FakeSet>,
    /// Largest pan, counting reference coins.
    pub max_pan: Option<u32>,
}

impl WeighingPolicy {
    pub fn with_refs(refs: RefSupply) -> WeighingPolicy {
        WeighingPolicy {
            refs,
            allowed: None,
            max_pan: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchProblem {
    pub hypotheses: HypothesisSet,
    pub depth: u32,
    pub policy: WeighingPolicy,
    /// The single-weight configurations must be isolated after at most this
    /// many weighings on their path.
    pub uniform_by: Option<u32>,
}

impl SearchProblem {
    /// All fake sets over `n` coins, reference coins on hand.
    pub fn exact(n: u32, depth: u32) -> Result<SearchProblem> {
        Ok(SearchProblem {
            hypotheses: HypothesisSet::all(n, Semantics::Exact)?,
            depth,
            policy: WeighingPolicy::with_refs(RefSupply::Unlimited),
            uniform_by: None,
        })
    }

    /// Sorting `n` coins with no outside reference coins.
    pub fn sort(n: u32, depth: u32) -> Result<SearchProblem> {
        Ok(SearchProblem {
            hypotheses: HypothesisSet::all(n, Semantics::Sort)?,
            depth,
            policy: WeighingPolicy::with_refs(RefSupply::Limited(0)),
            uniform_by: None,
        })
    }

    pub fn for_semantics(n: u32, depth: u32, semantics: Semantics) -> Result<SearchProblem> {
        match semantics {
            Semantics::Exact => SearchProblem::exact(n, depth),
            Semantics::Sort => SearchProblem::sort(n, depth),
        }
    }

    pub fn uniform_by(mut self, u: u32) -> SearchProblem {
        self.uniform_by = Some(u);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(DecisionTree),
    /// No strategy exists within the depth under the weighing policy.
    Infeasible,
}

impl SearchOutcome {
    pub fn tree(self) -> Option<DecisionTree> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            SearchOutcome::Infeasible => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, SearchOutcome::Found(_))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
    pub memo: bool,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_nodes: Some(50_000_000),
            max_time: None,
            memo: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub memo_hits: u64,
    pub elapsed: Duration,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct MemoKey {
    policy: WeighingPolicy,
    universe: u32,
    semantics: Semantics,
    members: Vec<FakeSet>,
    uniform_left: Option<u32>,
}

/// Reusable solver; the memo is shared by every problem it is given.
pub struct Solver {
    limits: SearchLimits,
    stats: SearchStats,
    solved: HashMap<(MemoKey, u32), Option<Arc<Node>>>,
    /// Largest depth at which a node is known to be unsolvable.
    refuted: HashMap<MemoKey, u32>,
    started: Instant,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(SearchLimits::default())
    }
}

struct Class {
    coins: Vec<u32>,
    /// Every coin of the class is heavy in exactly the same hypotheses.
    identical: bool,
}

struct Candidate {
    score: (usize, usize, u32, usize),
    left: u64,
    right: u64,
}

struct Ctx<'a> {
    policy: WeighingPolicy,
    universe: u32,
    semantics: Semantics,
    h: &'a HypothesisSet,
}

impl Solver {
    pub fn new(limits: SearchLimits) -> Solver {
        Solver {
            limits,
            stats: SearchStats::default(),
            solved: HashMap::new(),
            refuted: HashMap::new(),
            started: Instant::now(),
        }
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    pub fn solve(&mut self, p: &SearchProblem) -> Result<SearchOutcome> {
        if p.hypotheses.is_empty() {
            return Err(Error::PreconditionViolated("empty hypothesis set".into()));
        }
        self.started = Instant::now();
        let found = self.node(&p.hypotheses, p.depth, p.uniform_by, &p.policy);
        self.stats.elapsed = self.started.elapsed();
        Ok(match found? {
            Some(root) => SearchOutcome::Found(DecisionTree::new(p.hypotheses.universe(), root)?),
            None => SearchOutcome::Infeasible,
        })
    }

    fn tick(&mut self) -> Result<()> {
        self.stats.nodes_expanded += 1;
        let over_nodes = self.limits.max_nodes.is_some_and(|m| self.stats.nodes_expanded > m);
        let over_time = self.stats.nodes_expanded % 256 == 0
            && self.limits.max_time.is_some_and(|t| self.started.elapsed() > t);
        if over_nodes || over_time {
            return Err(Error::BudgetExceeded {
                nodes: self.stats.nodes_expanded,
                elapsed_ms: self.started.elapsed().as_millis(),
            });
        }
        Ok(())
    }

    fn node(
        &mut self,
        h: &HypothesisSet,
        depth: u32,
        uniform_left: Option<u32>,
        policy: &WeighingPolicy,
    ) -> Result<Option<Arc<Node>>> {
        let classes = h.class_count();
        if let Some(leaf) = h.leaf() {
            return Ok(Some(Node::leaf(leaf)));
        }
        if depth == 0 || classes as u64 > 3u64.saturating_pow(depth) {
            return Ok(None);
        }
        let uniform_left = uniform_left.filter(|&u| h.touches_uniform() && u < depth);
        if uniform_left == Some(0) && !h.is_uniform_only() {
            return Ok(None);
        }
        let key = MemoKey {
            policy: *policy,
            universe: h.universe(),
            semantics: h.semantics(),
            members: if self.limits.memo { h.members().to_vec() } else { Vec::new() },
            uniform_left,
        };
        if self.limits.memo {
            if let Some(hit) = self.solved.get(&(key.clone(), depth)) {
                self.stats.memo_hits += 1;
                return Ok(hit.clone());
            }
            if self.refuted.get(&key).is_some_and(|&d| d >= depth) {
                self.stats.memo_hits += 1;
                return Ok(None);
            }
        }
        self.tick()?;
        let ctx = Ctx {
            policy: *policy,
            universe: h.universe(),
            semantics: h.semantics(),
            h,
        };
        let candidates = candidates(&ctx, depth, uniform_left);
        let mut result = None;
        'next: for c in candidates {
            let w = concretize(&ctx, c.left, c.right);
            let parts = h.split(&w);
            let mut order: Vec<usize> = (0..3).filter(|&i| !parts[i].is_empty()).collect();
            order.sort_by_key(|&i| std::cmp::Reverse(parts[i].class_count()));
            let mut children: [Option<Arc<Node>>; 3] = Default::default();
            for i in order {
                let child_u = uniform_left.map(|u| u.saturating_sub(1));
                match self.node(&parts[i], depth - 1, child_u, policy)? {
                    Some(n) => children[i] = Some(n),
                    None => continue 'next,
                }
            }
            result = Some(Node::internal(w, children));
            break;
        }
        if self.limits.memo {
            match &result {
                Some(_) => {
                    self.solved.insert((key, depth), result.clone());
                }
                None => {
                    let e = self.refuted.entry(key).or_insert(depth);
                    *e = (*e).max(depth);
                }
            }
        }
        Ok(result)
    }
}

/// Splits the usable coins into interchangeable classes; coins that are
/// never heavy are returned separately as fillers.
fn coin_classes(ctx: &Ctx) -> (Vec<Class>, Vec<u32>) {
    let members = ctx.h.members();
    let allowed = ctx.policy.allowed.map_or(full_mask(ctx.universe), |a| a.bits() & full_mask(ctx.universe));
    let union = members.iter().fold(0u64, |m, s| m | s.bits());
    let mut fillers = Vec::new();
    let mut classes: Vec<Class> = Vec::new();
    let mut sorted: Vec<u64> = members.iter().map(|s| s.bits()).collect();
    sorted.sort_unstable();
    let contains = |x: u64| sorted.binary_search(&x).is_ok();
    for c in 1..=ctx.universe {
        let bit = 1u64 << (c - 1);
        if allowed & bit == 0 {
            continue;
        }
        if union & bit == 0 {
            fillers.push(c);
            continue;
        }
        let mut placed = false;
        for class in classes.iter_mut() {
            let rep = 1u64 << (class.coins[0] - 1);
            let both = rep | bit;
            let mut identical = true;
            let swappable = sorted.iter().all(|&s| {
                let m = s & both;
                if m == 0 || m == both {
                    return true;
                }
                identical = false;
                contains(s ^ both)
            });
            if swappable {
                class.coins.push(c);
                class.identical &= identical;
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(Class {
                coins: vec![c],
                identical: true,
            });
        }
    }
    (classes, fillers)
}

fn class_options(class: &Class) -> Vec<(u32, u32)> {
    let c = class.coins.len() as u32;
    let mut opts = vec![(0, 0)];
    for size in 1..=c {
        if class.identical {
            opts.push((size, 0));
            opts.push((0, size));
        } else {
            for l in (0..=size).rev() {
                opts.push((l, size - l));
            }
        }
    }
    opts
}

fn take(coins: &[u32], skip: u32, n: u32) -> u64 {
    coins[skip as usize..(skip + n) as usize]
        .iter()
        .fold(0, |m, &c| m | 1u64 << (c - 1))
}

fn candidates(ctx: &Ctx, depth: u32, uniform_left: Option<u32>) -> Vec<Candidate> {
    let (classes, fillers) = coin_classes(ctx);
    let filler_supply = (fillers.len() as u64 + ctx.policy.refs.count() as u64).min(u32::MAX as u64) as u32;
    let options: Vec<Vec<(u32, u32)>> = classes.iter().map(class_options).collect();
    let cap = 3usize.pow(depth - 1);
    let members = ctx.h.members();
    let full = ctx.h.full().bits();
    let sort = ctx.semantics == Semantics::Sort;
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut out = Vec::new();
    let mut index = 0usize;
    let mut choice = vec![0usize; classes.len()];
    let mut outcome = vec![0u8; members.len()];
    loop {
        // Assemble the current choice.
        let (mut left, mut right, mut lc, mut rc) = (0u64, 0u64, 0u32, 0u32);
        for (i, &k) in choice.iter().enumerate() {
            let (l, r) = options[i][k];
            left |= take(&classes[i].coins, 0, l);
            right |= take(&classes[i].coins, l, r);
            lc += l;
            rc += r;
        }
        let diff = lc.abs_diff(rc);
        let pan = lc.max(rc);
        let ok = lc + rc > 0
            && diff <= filler_supply
            && ctx.policy.max_pan.is_none_or(|m| pan <= m);
        if ok {
            index += 1;
            let mut counts = [0usize; 3];
            let mut uniform_in = [0u8; 3];
            let mut first_nonzero = 0u8;
            for (j, s) in members.iter().enumerate() {
                let s = s.bits();
                let a = (s & left).count_ones();
                let b = (s & right).count_ones();
                let o = match a.cmp(&b) {
                    std::cmp::Ordering::Equal => 0u8,
                    std::cmp::Ordering::Less => 1,
                    std::cmp::Ordering::Greater => 2,
                };
                if first_nonzero == 0 && o != 0 {
                    first_nonzero = o;
                }
                outcome[j] = o;
                counts[o as usize] += 1;
                if s == 0 {
                    uniform_in[o as usize] |= 1;
                }
                if s == full {
                    uniform_in[o as usize] |= 2;
                }
            }
            let informative = counts.iter().filter(|&&c| c > 0).count() >= 2;
            let classes_of = |o: usize| counts[o] - usize::from(sort && uniform_in[o] == 3);
            let branch = [classes_of(0), classes_of(1), classes_of(2)];
            let fits = branch.iter().all(|&c| c <= cap);
            let uniform_ok = match uniform_left {
                Some(1) => (0..3).all(|o| {
                    uniform_in[o] == 0 || counts[o] == (uniform_in[o] & 1) as usize + (uniform_in[o] >> 1) as usize
                }),
                _ => true,
            };
            if informative && fits && uniform_ok {
                let mut sig = outcome.clone();
                if first_nonzero == 2 {
                    for d in sig.iter_mut() {
                        if *d != 0 {
                            *d = 3 - *d;
                        }
                    }
                }
                if seen.insert(sig) {
                    let worst = *branch.iter().max().unwrap();
                    let spread = branch.iter().map(|c| c * c).sum();
                    out.push(Candidate {
                        score: (worst, spread, pan, index),
                        left,
                        right,
                    });
                }
            }
        }
        // Advance the odometer.
        let mut i = 0;
        loop {
            if i == choice.len() {
                out.sort_by_key(|c| c.score);
                return out;
            }
            choice[i] += 1;
            if choice[i] < options[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Turns pan masks into a weighing, topping up the lighter pan with
/// never-heavy coins first and reference coins after that.
fn concretize(ctx: &Ctx, left: u64, right: u64) -> Weighing {
    let (_, fillers) = coin_classes(ctx);
    let lc = left.count_ones();
    let rc = right.count_ones();
    let need = lc.abs_diff(rc) as usize;
    let from_coins = need.min(fillers.len());
    let refs = (need - from_coins) as u32;
    let pad = fillers[..from_coins].iter().map(|&c| CoinId(c));
    let coins_of = |m: u64| (1..=ctx.universe).filter(move |c| m >> (c - 1) & 1 == 1).map(CoinId);
    if lc >= rc {
        Weighing {
            left: Pan::new(coins_of(left), 0),
            right: Pan::new(coins_of(right).chain(pad), refs),
        }
    } else {
        Weighing {
            left: Pan::new(coins_of(left).chain(pad), refs),
            right: Pan::new(coins_of(right), 0),
        }
    }
}

/// Searches with default limits.
pub fn solve(p: &SearchProblem) -> Result<SearchOutcome> {
    Solver::default().solve(p)
}

fn least_depth(n: u32, d_max: u32, semantics: Semantics, early_uniform: bool) -> Result<Option<u32>> {
    let mut solver = Solver::default();
    for d in 0..=d_max {
        let mut p = SearchProblem::for_semantics(n, d, semantics)?;
        if early_uniform {
            p = p.uniform_by(d.saturating_sub(1));
        }
        if solver.solve(&p)?.is_feasible() {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Fewest weighings that identify every fake set of `n` coins with reference
/// coins on hand, or `None` if more than `d_max` are needed.
pub fn g_exact(n: u32, d_max: u32) -> Result<Option<u32>> {
    least_depth(n, d_max, Semantics::Exact, false)
}

/// Fewest weighings that sort `n` coins without reference coins.
pub fn gbar_exact(n: u32, d_max: u32) -> Result<Option<u32>> {
    least_depth(n, d_max, Semantics::Sort, false)
}

/// Fewest weighings that sort `n` coins without reference coins while also
/// recognising the single-weight case one weighing before the end.
pub fn gbar_early_uniform(n: u32, d_max: u32) -> Result<Option<u32>> {
    least_depth(n, d_max, Semantics::Sort, true)
}

/// A strategy for `n ≤ 11` coins within `⌈7n/11⌉` weighings, three for
/// three coins with reference coins. Sorting strategies also isolate the
/// single-weight case one weighing early (not possible for three coins).
pub fn synthesize_base(n: u32, semantics: Semantics) -> Result<DecisionTree> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, Semantics), DecisionTree>>> = OnceLock::new();
    if !(1..=11).contains(&n) {
        return Err(Error::PreconditionViolated(format!("base strategies cover 1..=11 coins, not {n}")));
    }
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(n, semantics)) {
        return Ok(t.clone());
    }
    let tree = if n == 11 {
        crate::strategies::builtin::repaired("alg1", semantics)?
    } else {
        let mut d = bounds::upper(n as u64) as u32;
        if n == 3 && semantics == Semantics::Exact {
            d = 3;
        }
        let mut p = SearchProblem::for_semantics(n, d, semantics)?;
        if semantics == Semantics::Sort && n != 3 && d > 0 {
            p = p.uniform_by(d - 1);
        }
        match solve(&p)? {
            SearchOutcome::Found(t) => t,
            SearchOutcome::Infeasible => {
                return Err(Error::PreconditionViolated(format!(
                    "no {semantics} strategy for {n} coins within {d} weighings"
                )))
            }
        }
    };
    cache.lock().unwrap().insert((n, semantics), tree.clone());
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::verify::verify_tree_on;

    fn checked(p: &SearchProblem) -> Option<DecisionTree> {
        let t = solve(p).unwrap().tree()?;
        let r = verify_tree_on(&t, &p.hypotheses);
        assert!(r.is_correct(), "{r}");
        assert!(t.depth() <= p.depth);
        if let (Some(u), Some(got)) = (p.uniform_by, r.uniform_resolved_by) {
            assert!(got <= u);
        }
        Some(t)
    }

    #[test]
    fn one_coin_one_weighing() {
        let t = checked(&SearchProblem::exact(1, 1).unwrap()).unwrap();
        assert_eq!(t.root().weighing().unwrap().to_string(), "{1}:{e}");
    }

    #[test]
    fn three_coins_need_three() {
        assert!(!solve(&SearchProblem::exact(3, 2).unwrap()).unwrap().is_feasible());
        assert!(checked(&SearchProblem::exact(3, 3).unwrap()).is_some());
    }

    #[test]
    fn small_g_values() {
        assert_eq!(g_exact(1, 5).unwrap(), Some(1));
        assert_eq!(g_exact(2, 5).unwrap(), Some(2));
        assert_eq!(g_exact(3, 5).unwrap(), Some(3));
        assert_eq!(g_exact(4, 5).unwrap(), Some(3));
    }

    #[test]
    fn small_gbar_values() {
        assert_eq!(gbar_exact(1, 3).unwrap(), Some(0));
        assert_eq!(gbar_exact(2, 3).unwrap(), Some(1));
        // Three coins sort in two weighings; it is the early uniform
        // detection that costs a third.
        assert_eq!(gbar_exact(3, 3).unwrap(), Some(2));
        assert_eq!(gbar_early_uniform(3, 3).unwrap(), Some(3));
        assert_eq!(gbar_early_uniform(2, 3).unwrap(), Some(2));
    }

    #[test]
    fn memo_is_transparent() {
        for n in 1..=4 {
            for sem in [Semantics::Exact, Semantics::Sort] {
                for d in 1..=3 {
                    let p = SearchProblem::for_semantics(n, d, sem).unwrap();
                    let on = solve(&p).unwrap();
                    let off = Solver::new(SearchLimits { memo: false, ..Default::default() }).solve(&p).unwrap();
                    assert_eq!(on, off, "n={n} {sem} d={d}");
                }
            }
        }
    }

    #[test]
    fn feasibility_is_monotone() {
        for n in 1..=4 {
            let mut seen = false;
            for d in 0..=4 {
                let f = solve(&SearchProblem::exact(n, d).unwrap()).unwrap().is_feasible();
                assert!(!seen || f);
                seen |= f;
            }
        }
    }

    #[test]
    fn budget_exceeded_is_an_error() {
        let p = SearchProblem::exact(5, 4).unwrap();
        let limits = SearchLimits { max_nodes: Some(2), ..Default::default() };
        assert!(matches!(Solver::new(limits).solve(&p), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn pair_product_finisher() {
        // {x}, {y} or both, times anything on three fresh coins.
        let mut members = Vec::new();
        for xy in [0b01u64, 0b10, 0b11] {
            for t in 0..8u64 {
                members.push(FakeSet(xy | t << 2));
            }
        }
        let h = HypothesisSet::from_members(5, Semantics::Exact, members).unwrap();
        let p = SearchProblem {
            hypotheses: h,
            depth: 3,
            policy: WeighingPolicy::with_refs(RefSupply::Unlimited),
            uniform_by: None,
        };
        assert!(checked(&p).is_some());
    }

    #[test]
    fn every_sort_base_case_fits() {
        for n in [1, 2, 4, 5, 6] {
            let d = bounds::upper(n as u64) as u32;
            let p = SearchProblem::sort(n, d).unwrap().uniform_by(d.saturating_sub(1));
            assert!(checked(&p).is_some(), "n={n}");
        }
    }
}
