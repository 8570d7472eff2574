use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coin::{check_universe, FakeSet};
use crate::error::{Error, Result};
use crate::hypothesis::Semantics;
use crate::tree::{DecisionTree, Leaf, Node};
use crate::weighing::{Pan, Weighing};

/// Outcome digits from the root, first weighing first.
pub type Path = Vec<u8>;

/// Irregularities found while loading or importing a table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableNote {
    pub path: Path,
    pub kind: NoteKind,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoteKind {
    /// The same key was given twice; the later row won.
    DuplicateKey,
    /// A printed weighing key was rebuilt from its row position in a complete block.
    KeyRecovered,
    /// A printed weighing key disagrees with its row position and was dropped.
    KeyConflict,
    /// A weighing key has the wrong number of digits for its block.
    ArityMismatch,
    /// A short classification key was padded with trailing `=` digits.
    ShortLeafKey,
    /// A classification row sits on a prefix that also has a weighing.
    ShadowedLeaf,
}

impl fmt::Display for NoteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).unwrap();
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

/// Flat form of a strategy: a weighing per outcome prefix and a
/// classification per terminal prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyTable {
    pub name: String,
    pub universe: u32,
    pub semantics: Semantics,
    pub weighings: BTreeMap<Path, Weighing>,
    pub outcomes: BTreeMap<Path, Leaf>,
    pub notes: Vec<TableNote>,
}

#[derive(Serialize, Deserialize)]
struct StrategyFile {
    name: String,
    universe: u32,
    semantics: Semantics,
    nodes: Vec<NodeRow>,
    leaves: Vec<LeafRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notes: Vec<TableNote>,
}

#[derive(Serialize, Deserialize)]
struct NodeRow {
    path: Path,
    left: Pan,
    right: Pan,
}

#[derive(Serialize, Deserialize)]
struct LeafRow {
    path: Path,
    class: ClassValue,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    uniform: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ClassValue {
    Set(u64),
    Word(String),
}

fn has_prefix<V>(map: &BTreeMap<Path, V>, prefix: &[u8]) -> bool {
    map.range(prefix.to_vec()..)
        .next()
        .is_some_and(|(k, _)| k.starts_with(prefix))
}

fn has_strict_prefix<V>(map: &BTreeMap<Path, V>, prefix: &[u8]) -> bool {
    map.range(prefix.to_vec()..)
        .find(|(k, _)| k.len() > prefix.len() || !k.starts_with(prefix))
        .is_some_and(|(k, _)| k.starts_with(prefix))
}

impl StrategyTable {
    pub fn new(name: impl Into<String>, universe: u32, semantics: Semantics) -> StrategyTable {
        StrategyTable {
            name: name.into(),
            universe,
            semantics,
            weighings: BTreeMap::new(),
            outcomes: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn root_weighing(&self) -> Option<&Weighing> {
        self.weighings.get(&Vec::new())
    }

    pub fn weighing(&self, path: &[u8]) -> Option<&Weighing> {
        self.weighings.get(path)
    }

    pub(crate) fn insert_weighing(&mut self, path: Path, w: Weighing) {
        if self.weighings.insert(path.clone(), w).is_some() {
            self.notes.push(TableNote {
                path,
                kind: NoteKind::DuplicateKey,
                detail: "weighing".into(),
            });
        }
    }

    pub(crate) fn insert_outcome(&mut self, path: Path, leaf: Leaf) {
        if self.outcomes.insert(path.clone(), leaf).is_some() {
            self.notes.push(TableNote {
                path,
                kind: NoteKind::DuplicateKey,
                detail: "classification".into(),
            });
        }
    }

    pub fn notes_of(&self, kind: NoteKind) -> usize {
        self.notes.iter().filter(|n| n.kind == kind).count()
    }

    /// Parses the JSON strategy document.
    pub fn from_json(text: &str) -> Result<StrategyTable> {
        let file: StrategyFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        check_universe(file.universe)?;
        let bad_path = |p: &Path| p.iter().any(|&d| d > 2);
        let mut table = StrategyTable::new(file.name, file.universe, file.semantics);
        table.notes = file.notes;
        for row in file.nodes {
            if bad_path(&row.path) {
                return Err(parse_err(format!("outcome digit outside 0..=2 in node path {:?}", row.path)));
            }
            table.insert_weighing(row.path, Weighing { left: row.left, right: row.right });
        }
        for row in file.leaves {
            if bad_path(&row.path) {
                return Err(parse_err(format!("outcome digit outside 0..=2 in leaf path {:?}", row.path)));
            }
            let leaf = match row.class {
                ClassValue::Word(w) if w == "uniform" => Leaf::Uniform,
                ClassValue::Word(w) => return Err(parse_err(format!("unknown class {w:?}"))),
                ClassValue::Set(_) if row.uniform => Leaf::Uniform,
                ClassValue::Set(bits) => {
                    let s = FakeSet(bits);
                    if !s.fits(table.universe) {
                        return Err(Error::FakeSetOutOfRange {
                            bits,
                            universe: table.universe,
                        });
                    }
                    Leaf::Classified(s)
                }
            };
            table.insert_outcome(row.path, leaf);
        }
        if table.outcomes.is_empty() {
            return Err(Error::EmptyTable);
        }
        let shadowed: Vec<Path> = table
            .outcomes
            .keys()
            .filter(|p| table.weighings.contains_key(*p))
            .cloned()
            .collect();
        for path in shadowed {
            table.notes.push(TableNote {
                path,
                kind: NoteKind::ShadowedLeaf,
                detail: String::new(),
            });
        }
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        let file = StrategyFile {
            name: self.name.clone(),
            universe: self.universe,
            semantics: self.semantics,
            nodes: self
                .weighings
                .iter()
                .map(|(p, w)| NodeRow {
                    path: p.clone(),
                    left: w.left.clone(),
                    right: w.right.clone(),
                })
                .collect(),
            leaves: self
                .outcomes
                .iter()
                .map(|(p, l)| LeafRow {
                    path: p.clone(),
                    class: match l {
                        Leaf::Classified(s) => ClassValue::Set(s.bits()),
                        Leaf::Uniform => ClassValue::Set(FakeSet::full(self.universe).bits()),
                    },
                    uniform: *l == Leaf::Uniform,
                })
                .collect(),
            notes: self.notes.clone(),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("table serializes");
        out.push('\n');
        out
    }

    /// Flattens a tree into table rows.
    pub fn from_tree(name: impl Into<String>, semantics: Semantics, tree: &DecisionTree) -> StrategyTable {
        let mut table = StrategyTable::new(name, tree.universe(), semantics);
        tree.visit(|path, node| match node {
            Node::Internal { weighing, .. } => {
                table.weighings.insert(path.to_vec(), weighing.clone());
            }
            Node::Leaf(l) => {
                table.outcomes.insert(path.to_vec(), *l);
            }
        });
        table
    }

    /// Rebuilds the adaptive tree the rows describe.
    ///
    /// A prefix with a weighing becomes an internal node; a prefix with only a
    /// classification becomes a leaf. Branches without rows below them are
    /// left empty.
    pub fn to_tree(&self) -> Result<DecisionTree> {
        fn build(t: &StrategyTable, path: &mut Path) -> Result<Option<Arc<Node>>> {
            if let Some(w) = t.weighings.get(path.as_slice()) {
                let mut children: [Option<Arc<Node>>; 3] = Default::default();
                for (d, slot) in children.iter_mut().enumerate() {
                    path.push(d as u8);
                    if has_prefix(&t.weighings, path) || has_prefix(&t.outcomes, path) {
                        *slot = build(t, path)?;
                    }
                    path.pop();
                }
                return Ok(Some(Node::internal(w.clone(), children)));
            }
            if has_strict_prefix(&t.outcomes, path) || has_strict_prefix(&t.weighings, path) {
                return Err(Error::MissingWeighing(path.clone()));
            }
            Ok(t.outcomes.get(path.as_slice()).map(|l| Node::leaf(*l)))
        }
        let root = build(self, &mut Vec::new())?.ok_or(Error::EmptyTable)?;
        DecisionTree::new(self.universe, root)
    }
}

/// Loads a strategy table from its JSON document.
pub fn load_table(json: &str) -> Result<StrategyTable> {
    StrategyTable::from_json(json)
}

/// Builds the decision tree a table describes.
pub fn table_to_tree(table: &StrategyTable) -> Result<DecisionTree> {
    table.to_tree()
}

fn parse_err(message: String) -> Error {
    Error::Parse {
        line: 0,
        column: 0,
        message,
    }
}
