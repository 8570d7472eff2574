//! Acceptance checks. Each criterion prints one PASS or FAIL line; the
//! process exits nonzero if any fails.
//!
//! Trees are checked with the oracle below, which simulates the balance
//! directly and does not use the library's verifier or hypothesis sets.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weighwright::bounds::{lower_g, lower_gbar, upper};
use weighwright::composition::plan::{plan, PlanResult, PlanRunner};
use weighwright::composition::{corollary1_tree, lemma2_extend_detailed, standard_pairs};
use weighwright::search::{g_exact, gbar_early_uniform, gbar_exact, solve, SearchOutcome, SearchProblem};
use weighwright::strategies::builtin;
use weighwright::{CoinId, DecisionTree, Leaf, Node, Outcome, Semantics, Weighing};

const SEMANTICS: [Semantics; 2] = [Semantics::Sort, Semantics::Exact];

// ---------------------------------------------------------------- oracle

fn digit(w: &Weighing, heavy: u64) -> Result<u8, String> {
    let side = |coins: &[CoinId]| coins.iter().filter(|c| heavy >> (c.0 - 1) & 1 == 1).count();
    let (l, r) = (w.left.coins.len() as u32 + w.left.refs, w.right.coins.len() as u32 + w.right.refs);
    if l != r {
        return Err(format!("unbalanced weighing {w}"));
    }
    let (hl, hr) = (side(&w.left.coins), side(&w.right.coins));
    Ok(if hl == hr {
        0
    } else if hl < hr {
        1
    } else {
        2
    })
}

fn is_noop(w: &Weighing) -> bool {
    w.left.coins.is_empty() && w.right.coins.is_empty() && w.left.refs == 0 && w.right.refs == 0
}

/// Outcome digits of counted weighings, and the leaf reached.
fn walk(tree: &DecisionTree, heavy: u64) -> Result<(Vec<u8>, Leaf), String> {
    let mut node: &Arc<Node> = tree.root();
    let mut digits = Vec::new();
    loop {
        match node.as_ref() {
            Node::Leaf(leaf) => return Ok((digits, *leaf)),
            Node::Internal { weighing, children } => {
                let d = digit(weighing, heavy)?;
                if !is_noop(weighing) {
                    digits.push(d);
                }
                node = children[d as usize]
                    .as_ref()
                    .ok_or_else(|| format!("no branch for {heavy:#b} after {digits:?}"))?;
            }
        }
    }
}

fn expected_leaf(heavy: u64, n: u32, sem: Semantics) -> Leaf {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    if sem == Semantics::Sort && (heavy == 0 || heavy == full) {
        Leaf::Uniform
    } else {
        Leaf::Classified(weighwright::FakeSet(heavy))
    }
}

struct Audit {
    paths: Vec<(u64, Vec<u8>)>,
    depth: usize,
    wrong: usize,
}

fn audit(tree: &DecisionTree, n: u32, sem: Semantics, cases: impl IntoIterator<Item = u64>) -> Result<Audit, String> {
    let mut a = Audit {
        paths: Vec::new(),
        depth: 0,
        wrong: 0,
    };
    for s in cases {
        let (digits, leaf) = walk(tree, s)?;
        if leaf != expected_leaf(s, n, sem) {
            a.wrong += 1;
        }
        a.depth = a.depth.max(digits.len());
        a.paths.push((s, digits));
    }
    Ok(a)
}

fn audit_all(tree: &DecisionTree, n: u32, sem: Semantics) -> Result<Audit, String> {
    audit(tree, n, sem, 0..1u64 << n)
}

/// Class key: in sorting, no coins heavy and all coins heavy are one class.
fn class(s: u64, n: u32, sem: Semantics) -> u64 {
    if sem == Semantics::Sort && s == (1u64 << n) - 1 {
        0
    } else {
        s
    }
}

/// Fewest counted weighings after which every case sharing the all-equal
/// prefix is one of the two single-weight sets.
fn uniform_after(a: &Audit, n: u32) -> Option<usize> {
    let full = (1u64 << n) - 1;
    let zero = &a.paths.iter().find(|(s, _)| *s == 0)?.1;
    (0..=zero.len()).find(|&k| {
        a.paths
            .iter()
            .filter(|(_, p)| p.len() >= k && p[..k] == zero[..k])
            .all(|(s, _)| *s == 0 || *s == full)
    })
}

/// Largest number of classes sharing one outcome prefix of length `k`.
fn classes_at(a: &Audit, k: usize, n: u32, sem: Semantics) -> usize {
    let mut groups: HashMap<&[u8], BTreeSet<u64>> = HashMap::new();
    for (s, p) in &a.paths {
        if p.len() >= k {
            groups.entry(&p[..k]).or_default().insert(class(*s, n, sem));
        }
    }
    groups.values().map(BTreeSet::len).max().unwrap_or(0)
}

// ---------------------------------------------------------------- criteria

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn encoded_tables() -> Verdict {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("raw-reports");
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for name in builtin::NAMES {
        for sem in SEMANTICS {
            let t = Instant::now();
            let r = builtin::repair(name, sem).map_err(|e| format!("{name} {sem}: {e}"))?;
            let elapsed = t.elapsed();
            let raw = serde_json::to_string_pretty(&r.raw).map_err(|e| e.to_string())?;
            std::fs::write(dir.join(format!("{name}-{sem}.json")), raw).map_err(|e| e.to_string())?;
            let a = audit_all(&r.tree, 11, sem)?;
            if a.wrong > 0 || a.paths.len() != 2048 || a.depth > 7 {
                return Err(format!("{name} {sem}: {} wrong, depth {}", a.wrong, a.depth));
            }
            if elapsed >= Duration::from_secs(1) {
                return Err(format!("{name} {sem}: repair took {elapsed:?}"));
            }
            notes.push(format!(
                "{name}/{sem}: raw {}/2048, {} rebuilt, {:.0?}",
                r.raw.correct,
                r.rebuilt.len(),
                elapsed
            ));
        }
    }
    Ok(format!("2048/2048 at depth <= 7 [{}]; raw reports in {}", notes.join("; "), dir.display()))
}

fn sixth_weighing_uniformity() -> Verdict {
    let mut worst = 0;
    for name in builtin::NAMES {
        for sem in SEMANTICS {
            let tree = builtin::repaired(name, sem).map_err(|e| e.to_string())?;
            let a = audit_all(&tree, 11, sem)?;
            let k = uniform_after(&a, 11).ok_or_else(|| format!("{name} {sem}: never isolated"))?;
            if k > 6 {
                return Err(format!("{name} {sem}: single-weight case isolated only after {k}"));
            }
            worst = worst.max(k);
        }
    }
    Ok(format!("single-weight case isolated after at most {worst} weighings on all six trees"))
}

fn depth_six_classes() -> Verdict {
    let mut worst = 0;
    for name in builtin::NAMES {
        for sem in SEMANTICS {
            let tree = builtin::repaired(name, sem).map_err(|e| e.to_string())?;
            let a = audit_all(&tree, 11, sem)?;
            let c = classes_at(&a, 6, 11, sem);
            if c > 3 {
                return Err(format!("{name} {sem}: {c} classes at a depth-6 node"));
            }
            worst = worst.max(c);
        }
    }
    Ok(format!("at most {worst} classes at any depth-6 node"))
}

fn timed<T>(f: impl FnOnce() -> T) -> Result<T, String> {
    let t = Instant::now();
    let v = f();
    if t.elapsed() > Duration::from_secs(60) {
        return Err(format!("search took {:?}", t.elapsed()));
    }
    Ok(v)
}

/// Solves, then checks the tree with the oracle and that one fewer weighing is infeasible.
fn confirm(n: u32, d: u32, sem: Semantics, early: bool) -> Result<(), String> {
    let problem = |d: u32| {
        let p = SearchProblem::for_semantics(n, d, sem).unwrap();
        if early && d > 0 {
            p.uniform_by(d - 1)
        } else {
            p
        }
    };
    let tree = match timed(|| solve(&problem(d)))?.map_err(|e| e.to_string())? {
        SearchOutcome::Found(t) => t,
        SearchOutcome::Infeasible => return Err(format!("n={n} {sem} depth {d} infeasible")),
    };
    let a = audit_all(&tree, n, sem)?;
    if a.wrong > 0 || a.depth > d as usize {
        return Err(format!("n={n} {sem}: {} wrong, depth {}", a.wrong, a.depth));
    }
    if early && n > 1 && uniform_after(&a, n).is_none_or(|k| k + 1 > d as usize) {
        return Err(format!("n={n}: single-weight case not isolated early"));
    }
    if d > 0 && matches!(timed(|| solve(&problem(d - 1)))?.map_err(|e| e.to_string())?, SearchOutcome::Found(_)) {
        return Err(format!("n={n} {sem}: depth {} also feasible", d - 1));
    }
    Ok(())
}

fn small_values() -> Verdict {
    let err = |e: weighwright::Error| e.to_string();
    let mut g = Vec::new();
    for (n, want) in [(1, 1), (2, 2), (3, 3), (4, 3)] {
        let got = timed(|| g_exact(n, 6))?.map_err(err)?;
        if got != Some(want) {
            return Err(format!("g({n}) = {got:?}, expected {want}"));
        }
        confirm(n, want, Semantics::Exact, false)?;
        g.push(format!("g({n})={want}"));
    }
    let early3 = timed(|| gbar_early_uniform(3, 5))?.map_err(err)?;
    if early3 != Some(3) {
        return Err(format!("gbar(3) with early uniformity = {early3:?}"));
    }
    confirm(3, 3, Semantics::Sort, true)?;
    let plain3 = timed(|| gbar_exact(3, 5))?.map_err(err)?;
    let mut bars = Vec::new();
    for n in [1u32, 2, 4, 5, 6] {
        let bound = upper(n as u64) as u32;
        let got = timed(|| gbar_early_uniform(n, bound))?.map_err(err)?;
        let d = got.ok_or_else(|| format!("gbar({n}) with early uniformity exceeds {bound}"))?;
        confirm(n, d, Semantics::Sort, true)?;
        bars.push(format!("{n}:{d}<={bound}"));
    }
    Ok(format!(
        "{}; gbar(3)=3 with early uniformity (without it: {}); early gbar(n) {}",
        g.join(" "),
        plain3.map_or("none".into(), |d| d.to_string()),
        bars.join(" ")
    ))
}

fn lemma2_composite() -> Verdict {
    let b = [CoinId(12), CoinId(13), CoinId(14)];
    let mut notes = Vec::new();
    for name in builtin::NAMES {
        for sem in SEMANTICS {
            let f = builtin::repaired(name, sem).map_err(|e| e.to_string())?;
            let t = Instant::now();
            let ext = lemma2_extend_detailed(&f, b, sem).map_err(|e| format!("{name} {sem}: {e}"))?;
            let elapsed = t.elapsed();
            let a = audit_all(&ext.tree, 14, sem)?;
            if a.wrong > 0 || a.depth > 9 {
                return Err(format!("{name} {sem}: {} wrong, depth {}", a.wrong, a.depth));
            }
            if elapsed > Duration::from_secs(30) {
                return Err(format!("{name} {sem}: took {elapsed:?}"));
            }
            notes.push(format!("{name}/{sem} depth {} {:.0?}", a.depth, elapsed));
        }
    }
    Ok(format!("16384/16384 correct, bound 9 [{}]", notes.join("; ")))
}

fn run_with_oracle(runner: &mut PlanRunner, heavy: u64) -> Result<u32, String> {
    let mut asked = 0;
    while let Some(step) = runner.next_step() {
        let d = digit(&step.weighing, heavy)?;
        if !is_noop(&step.weighing) {
            asked += 1;
        }
        runner
            .submit(Outcome::from_digit(d).unwrap())
            .map_err(|e| format!("runner rejected a true outcome: {e}"))?;
    }
    Ok(asked)
}

fn composition_bound() -> Verdict {
    for sem in SEMANTICS {
        for n in 1..=200u32 {
            let p = plan(n, sem).map_err(|e| format!("plan({n}, {sem}): {e}"))?;
            let bound = upper(n as u64) as u32;
            let ok = p.total_weighings <= bound || (n == 3 && sem == Semantics::Exact && p.total_weighings == 3);
            if !ok {
                return Err(format!("plan({n}, {sem}) uses {} > {bound}", p.total_weighings));
            }
        }
    }

    let n = 25u32;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2025);
    let mut checked = 0;
    for sem in SEMANTICS {
        let p = Arc::new(plan(n, sem).map_err(|e| e.to_string())?);
        let full = (1u64 << n) - 1;
        let tail = p.remainder.iter().fold(0u64, |acc, c| acc | 1 << (c.0 - 1));
        let mut cases = vec![0, full, tail, full ^ tail];
        for i in 0..n {
            cases.extend([1 << i, full ^ 1 << i]);
        }
        cases.extend((0..100_000).map(|_| rng.gen::<u64>() & full));

        for &heavy in &cases {
            let mut runner = PlanRunner::new(p.clone(), false).map_err(|e| e.to_string())?;
            let asked = run_with_oracle(&mut runner, heavy)?;
            let want = match expected_leaf(heavy, n, sem) {
                Leaf::Uniform => PlanResult::Uniform,
                Leaf::Classified(_) => PlanResult::Fakes((1..=n).filter(|c| heavy >> (c - 1) & 1 == 1).map(CoinId).collect()),
            };
            let got = runner.result().cloned().ok_or("runner did not finish")?;
            if got != want {
                return Err(format!("n=25 {sem}: got {got}, expected {want}"));
            }
            if asked > p.total_weighings {
                return Err(format!("n=25 {sem}: asked {asked} > {}", p.total_weighings));
            }
            checked += 1;
        }
    }
    Ok(format!(
        "plan(n) <= ceil(7n/11) for n <= 200 except g(3)=3; n=25: {checked} runs, 0 misclassified"
    ))
}

fn corollary() -> Verdict {
    let pairs = standard_pairs();
    let tree = corollary1_tree(&pairs).map_err(|e| e.to_string())?;
    let cases = (0..1u64 << 11).map(|mask| {
        (0..11).fold(0u64, |acc, i| {
            let (rep, partner) = pairs[i];
            let coin = if mask >> i & 1 == 1 { partner } else { rep };
            acc | 1 << (coin.0 - 1)
        })
    });
    let a = audit(&tree, 22, Semantics::Exact, cases)?;
    if a.wrong > 0 || a.depth > 7 {
        return Err(format!("{} wrong, depth {}", a.wrong, a.depth));
    }
    Ok(format!("2048/2048 orientations, depth {}", a.depth))
}

fn bounds() -> Verdict {
    if (lower_g(11), lower_gbar(11), upper(11)) != (7, 7, 7) {
        return Err(format!("n=11: {} {} {}", lower_g(11), lower_gbar(11), upper(11)));
    }
    // Exact reference for small n: 3^k against 2^n and 2^n - 1 in big integers.
    use num_bigint::BigUint;
    for n in 1..=1500u64 {
        let two = BigUint::from(1u32) << n;
        let least = |target: &BigUint| {
            let mut k = 0;
            let mut p = BigUint::from(1u32);
            while &p < target {
                p *= 3u32;
                k += 1;
            }
            k
        };
        let g = least(&two);
        let gbar = least(&(two.clone() - 1u32));
        if lower_g(n) != g || lower_gbar(n) != gbar || upper(n) != (7 * n).div_ceil(11) {
            return Err(format!("n={n}: got {} {} {}", lower_g(n), lower_gbar(n), upper(n)));
        }
    }
    for n in 1..=1_000_000u64 {
        if !(lower_gbar(n) <= lower_g(n) && lower_g(n) <= upper(n)) {
            return Err(format!("sandwich fails at n={n}"));
        }
    }
    Ok("lower_g(11)=lower_gbar(11)=upper(11)=7; exact for n <= 1500; sandwich for n <= 10^6".into())
}

fn search_soundness() -> Verdict {
    let mut found = 0;
    for sem in SEMANTICS {
        for n in 1..=5u32 {
            for d in 0..=4u32 {
                for early in [false, true] {
                    if early && (sem == Semantics::Exact || d == 0) {
                        continue;
                    }
                    let mut p = SearchProblem::for_semantics(n, d, sem).map_err(|e| e.to_string())?;
                    if early {
                        p = p.uniform_by(d - 1);
                    }
                    if let SearchOutcome::Found(t) = solve(&p).map_err(|e| e.to_string())? {
                        let a = audit_all(&t, n, sem)?;
                        if a.wrong > 0 || a.depth > d as usize {
                            return Err(format!("n={n} d={d} {sem}: {} wrong, depth {}", a.wrong, a.depth));
                        }
                        if early && n > 1 && uniform_after(&a, n).is_none_or(|k| k >= d as usize) {
                            return Err(format!("n={n} d={d}: single-weight case late"));
                        }
                        found += 1;
                    }
                }
            }
        }
    }
    let three = solve(&SearchProblem::exact(3, 2).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if !matches!(three, SearchOutcome::Infeasible) {
        return Err("solve(3, 2, exact) found a tree".into());
    }
    Ok(format!("{found} solved trees pass the oracle; solve(3, 2, exact) infeasible"))
}

fn main() {
    // `cargo test` passes harness flags; a filter that excludes this target skips it.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let criteria: [Criterion; 9] = [
        ("encoded tables", encoded_tables),
        ("sixth-weighing uniformity", sixth_weighing_uniformity),
        ("depth-6 classes", depth_six_classes),
        ("small values by search", small_values),
        ("three-coin extension", lemma2_composite),
        ("composition bound", composition_bound),
        ("paired orientations", corollary),
        ("bounds", bounds),
        ("search soundness", search_soundness),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail} ({:.1?})", t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of 9 criteria pass", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
