//! Importer for the plain-text table layout: block headers such as
//! `The 3-th weighing`, rows `w(d,..) = {..}:{..}` and `f(d,..) = int`.

use std::sync::OnceLock;

use regex::Regex;

use super::table::{NoteKind, Path, StrategyTable, TableNote};
use crate::coin::FakeSet;
use crate::error::{Error, Result};
use crate::hypothesis::Semantics;
use crate::tree::Leaf;
use crate::weighing::Weighing;

#[derive(Clone, Debug)]
pub struct ImportOptions {
    pub name: String,
    pub universe: u32,
    pub semantics: Semantics,
    /// Rebuild weighing keys from row order inside complete blocks.
    pub recover_positional: bool,
    /// Pad classification keys shorter than the deepest block with `=` digits.
    pub pad_short_leaf_keys: bool,
}

impl ImportOptions {
    pub fn new(name: impl Into<String>, semantics: Semantics) -> ImportOptions {
        ImportOptions {
            name: name.into(),
            universe: 11,
            semantics,
            recover_positional: true,
            pad_short_leaf_keys: true,
        }
    }
}

fn row_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?P<kind>[wWf])\((?P<key>[0-9,\s]*)\)\s*=\s*(?P<val>\{[^}]*\}\s*:\s*\{[^}]*\}|[0-9]+)")
            .unwrap()
    })
}

fn header_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)the\s+(\d+)-?\w*\s+weighing").unwrap())
}

fn clean(line: &str) -> String {
    line.replace("\\{", "{")
        .replace("\\}", "}")
        .replace("\\)", ")")
        .replace("\\(", "(")
        .replace('$', " ")
}

fn parse_key(text: &str, line: usize) -> Result<Path> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<u8>() {
            Ok(d) if d <= 2 => Ok(d),
            _ => Err(Error::Parse {
                line,
                column: 1,
                message: format!("bad outcome digit {t:?}"),
            }),
        })
        .collect()
}

/// Base-3 digits of `index`, least significant first.
fn positional_key(mut index: usize, arity: usize) -> Path {
    let mut key = Vec::with_capacity(arity);
    for _ in 0..arity {
        key.push((index % 3) as u8);
        index /= 3;
    }
    key
}

fn is_subsequence(short: &[u8], long: &[u8]) -> bool {
    let mut it = long.iter();
    short.iter().all(|d| it.any(|x| x == d))
}

struct Block {
    /// 1-based block number from the header, if one was seen.
    number: Option<usize>,
    rows: Vec<(usize, Path, Weighing)>,
}

/// Parses table text into a strategy table, recording every irregularity.
pub fn import_text(text: &str, opts: &ImportOptions) -> Result<StrategyTable> {
    let mut blocks = vec![Block { number: None, rows: Vec::new() }];
    let mut leaves: Vec<(usize, Path, u64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = clean(raw);
        if let Some(cap) = header_regex().captures(&line) {
            blocks.push(Block {
                number: cap[1].parse().ok(),
                rows: Vec::new(),
            });
            continue;
        }
        for cap in row_regex().captures_iter(&line) {
            let column = cap.get(0).unwrap().start() + 1;
            let key = parse_key(&cap["key"], line_no)?;
            let val = &cap["val"];
            if cap["kind"].eq_ignore_ascii_case("w") {
                let w: Weighing = val.parse().map_err(|e| match e {
                    Error::Parse { message, .. } => Error::Parse {
                        line: line_no,
                        column,
                        message,
                    },
                    other => other,
                })?;
                w.validate(opts.universe)?;
                blocks.last_mut().unwrap().rows.push((line_no, key, w));
            } else {
                let v: u64 = val.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    column,
                    message: format!("bad class value {val:?}"),
                })?;
                leaves.push((line_no, key, v));
            }
        }
    }

    let mut table = StrategyTable::new(opts.name.clone(), opts.universe, opts.semantics);
    let mut depth = 0;
    for block in blocks {
        let Some(k) = block.number else {
            for (_, key, w) in block.rows {
                depth = depth.max(key.len() + 1);
                table.insert_weighing(key, w);
            }
            continue;
        };
        depth = depth.max(k);
        let arity = k - 1;
        let complete = 3usize.checked_pow(arity as u32) == Some(block.rows.len());
        for (pos, (line, key, w)) in block.rows.into_iter().enumerate() {
            if opts.recover_positional && complete {
                let expected = positional_key(pos, arity);
                if key == expected {
                    table.insert_weighing(key, w);
                } else if is_subsequence(&key, &expected) {
                    table.notes.push(TableNote {
                        path: expected.clone(),
                        kind: NoteKind::KeyRecovered,
                        detail: format!("line {line}: printed {}", fmt_key(&key)),
                    });
                    table.insert_weighing(expected, w);
                } else {
                    table.notes.push(TableNote {
                        path: key.clone(),
                        kind: NoteKind::KeyConflict,
                        detail: format!("line {line}: row {pos} of block {k}"),
                    });
                }
            } else if key.len() == arity {
                table.insert_weighing(key, w);
            } else {
                table.notes.push(TableNote {
                    path: key,
                    kind: NoteKind::ArityMismatch,
                    detail: format!("line {line}: block {k} expects {arity} digits"),
                });
            }
        }
    }

    let full = FakeSet::full(opts.universe);
    for (line, mut key, v) in leaves {
        let set = FakeSet(v);
        if !set.fits(opts.universe) {
            return Err(Error::FakeSetOutOfRange {
                bits: v,
                universe: opts.universe,
            });
        }
        if key.len() < depth && opts.pad_short_leaf_keys {
            table.notes.push(TableNote {
                path: key.clone(),
                kind: NoteKind::ShortLeafKey,
                detail: format!("line {line}"),
            });
            key.resize(depth, 0);
        } else if key.len() > depth && depth > 0 {
            table.notes.push(TableNote {
                path: key,
                kind: NoteKind::ArityMismatch,
                detail: format!("line {line}: {depth} weighings deep"),
            });
            continue;
        }
        let leaf = if opts.semantics == Semantics::Sort && (set.is_empty() || set == full) {
            Leaf::Uniform
        } else {
            Leaf::Classified(set)
        };
        table.insert_outcome(key, leaf);
    }
    if table.outcomes.is_empty() {
        return Err(Error::EmptyTable);
    }
    Ok(table)
}

fn fmt_key(key: &[u8]) -> String {
    crate::error::fmt_path(key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positional_keys_little_endian() {
        assert_eq!(positional_key(0, 2), vec![0, 0]);
        assert_eq!(positional_key(1, 2), vec![1, 0]);
        assert_eq!(positional_key(5, 2), vec![2, 1]);
    }

    #[test]
    fn subsequence() {
        assert!(is_subsequence(&[0, 2], &[0, 1, 2]));
        assert!(!is_subsequence(&[2, 0], &[0, 1, 2]));
    }

    #[test]
    fn small_text_table() {
        let text = "The 1-th weighing\n$$W(\\) = \\{1\\}:\\{2\\}$$\nMap\n$f(0) = 3$\t$f(1) = 2$\t$f(2) = 1$\n";
        let t = import_text(text, &ImportOptions { universe: 2, ..ImportOptions::new("t", Semantics::Sort) }).unwrap();
        assert_eq!(t.root_weighing().unwrap().to_string(), "{1}:{2}");
        assert_eq!(t.outcomes[&vec![0]], Leaf::Uniform);
        assert_eq!(t.outcomes[&vec![2]], Leaf::Classified(FakeSet(1)));
        let tree = t.to_tree().unwrap();
        assert_eq!(tree.depth(), 1);
    }

    #[test]
    fn short_keys_are_padded_and_noted() {
        let text = "The 1-th weighing\nw() = {1}:{2}\nThe 2-th weighing\nw(0) = {}:{}\nw(1) = {}:{}\nw(2) = {}:{}\nf(2) = 1\n";
        let t = import_text(text, &ImportOptions { universe: 2, ..ImportOptions::new("t", Semantics::Exact) }).unwrap();
        assert_eq!(t.notes_of(NoteKind::ShortLeafKey), 1);
        assert!(t.outcomes.contains_key(&vec![2, 0]));
    }

    #[test]
    fn only_weighings_is_empty() {
        let err = import_text("w() = {}:{}", &ImportOptions::new("t", Semantics::Sort)).unwrap_err();
        assert_eq!(err, Error::EmptyTable);
    }

    #[test]
    fn bad_digit_reports_line() {
        let err = import_text("w() = {1}:{2}\nf(3) = 1", &ImportOptions::new("t", Semantics::Sort)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
