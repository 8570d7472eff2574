//! The three shipped 11-coin tables.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::hypothesis::Semantics;
use crate::tree::DecisionTree;

use super::repair::{repair_tree_with, RepairOptions};
use super::table::StrategyTable;
use super::text::{import_text, ImportOptions};
use super::verify::{verify_tree, VerificationReport};

pub const NAMES: [&str; 3] = ["alg1", "alg2", "alg3"];

/// Weighings every shipped table is meant to fit in.
pub const BUDGET: u32 = 7;

pub fn json(name: &str) -> Option<&'static str> {
    Some(match name {
        "alg1" => include_str!("../../data/alg1.json"),
        "alg2" => include_str!("../../data/alg2.json"),
        "alg3" => include_str!("../../data/alg3.json"),
        _ => return None,
    })
}

/// The source text the JSON tables were imported from.
pub fn text(name: &str) -> Option<&'static str> {
    Some(match name {
        "alg1" => include_str!("../../data/tables/alg1.txt"),
        "alg2" => include_str!("../../data/tables/alg2.txt"),
        "alg3" => include_str!("../../data/tables/alg3.txt"),
        _ => return None,
    })
}

pub fn import(name: &str) -> Result<StrategyTable> {
    let src = text(name).ok_or_else(|| Error::UnknownStrategy(name.into()))?;
    import_text(src, &ImportOptions::new(name, Semantics::Sort))
}

pub fn table(name: &str) -> Result<StrategyTable> {
    let src = json(name).ok_or_else(|| Error::UnknownStrategy(name.into()))?;
    StrategyTable::from_json(src)
}

/// The tree exactly as transcribed.
pub fn raw_tree(name: &str) -> Result<DecisionTree> {
    table(name)?.to_tree()
}

#[derive(Clone, Debug)]
pub struct Repaired {
    pub raw: VerificationReport,
    pub rebuilt: Vec<Vec<u8>>,
    pub tree: DecisionTree,
    pub report: VerificationReport,
}

/// Options used for the shipped tables: seven weighings, and when sorting
/// the single-weight case isolated after six.
pub fn repair_options(semantics: Semantics) -> RepairOptions {
    let mut opts = RepairOptions::new(BUDGET);
    if semantics == Semantics::Sort {
        opts.uniform_by = Some(BUDGET - 1);
    }
    opts
}

/// Verifies, repairs and re-verifies a shipped table.
pub fn repair(name: &str, semantics: Semantics) -> Result<Repaired> {
    let raw_tree = raw_tree(name)?;
    let raw = verify_tree(&raw_tree, semantics);
    let fixed = repair_tree_with(&raw_tree, &raw, &repair_options(semantics))?;
    let report = verify_tree(&fixed.tree, semantics);
    Ok(Repaired {
        raw,
        rebuilt: fixed.rebuilt,
        tree: fixed.tree,
        report,
    })
}

/// The repaired tree, cached per table and semantics.
pub fn repaired(name: &str, semantics: Semantics) -> Result<DecisionTree> {
    static CACHE: OnceLock<Mutex<HashMap<(String, Semantics), DecisionTree>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(name.to_string(), semantics)) {
        return Ok(t.clone());
    }
    let r = repair(name, semantics)?;
    if !r.report.is_correct() {
        return Err(Error::IrreparableNode(r.report.defects[0].path.clone()));
    }
    cache.lock().unwrap().insert((name.to_string(), semantics), r.tree.clone());
    Ok(r.tree)
}
