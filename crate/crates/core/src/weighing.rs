//! Balance weighings and their outcomes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coin::{CoinId, FakeSet};
use crate::error::{Error, Result};

/// One side of the balance: unknown coins plus known-normal reference coins.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pan {
    pub coins: Vec<CoinId>,
    #[serde(default)]
    pub refs: u32,
}

impl Pan {
    /// Builds a pan; coin labels are sorted and duplicates dropped.
    pub fn new<I: IntoIterator<Item = CoinId>>(coins: I, refs: u32) -> Pan {
        let mut coins: Vec<CoinId> = coins.into_iter().collect();
        coins.sort_unstable();
        coins.dedup();
        Pan { coins, refs }
    }

    pub fn of(coins: &[u32]) -> Pan {
        Pan::new(coins.iter().copied().map(CoinId), 0)
    }

    pub fn size(&self) -> u32 {
        self.coins.len() as u32 + self.refs
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    pub fn mask(&self) -> u64 {
        self.coins.iter().fold(0, |m, c| m | c.bit())
    }

    fn heavy_count(&self, s: FakeSet) -> u32 {
        (self.mask() & s.bits()).count_ones()
    }

    fn relabel(&self, map: &dyn Fn(CoinId) -> CoinId) -> Pan {
        Pan::new(self.coins.iter().map(|&c| map(c)), self.refs)
    }
}

impl fmt::Display for Pan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.coins.iter().map(|c| c.to_string()).collect();
        parts.extend((0..self.refs).map(|_| "e".to_string()));
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A weighing of the left pan against the right pan.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Weighing {
    pub left: Pan,
    pub right: Pan,
}

impl Weighing {
    /// Builds a weighing and checks the pans are disjoint and equally loaded.
    pub fn new(left: Pan, right: Pan) -> Result<Weighing> {
        let w = Weighing { left, right };
        w.check_pans()?;
        Ok(w)
    }

    /// `{a..}:{b..}` without reference coins.
    pub fn coins(left: &[u32], right: &[u32]) -> Result<Weighing> {
        Weighing::new(Pan::of(left), Pan::of(right))
    }

    /// The empty weighing; always balances and is not counted.
    pub fn noop() -> Weighing {
        Weighing::default()
    }

    pub fn is_noop(&self) -> bool {
        self.left.is_empty() && self.right.is_empty()
    }

    pub fn uses_refs(&self) -> bool {
        self.left.refs > 0 || self.right.refs > 0
    }

    pub(crate) fn check_pans(&self) -> Result<()> {
        if let Some(c) = self.left.coins.iter().find(|c| self.right.coins.contains(c)) {
            return Err(Error::OverlappingPans(*c));
        }
        if self.left.size() != self.right.size() {
            return Err(Error::UnbalancedPans {
                left: self.left.size(),
                right: self.right.size(),
            });
        }
        Ok(())
    }

    /// Full validity check against a coin universe `1..=n`.
    pub fn validate(&self, universe: u32) -> Result<()> {
        self.check_pans()?;
        for &coin in self.left.coins.iter().chain(&self.right.coins) {
            if coin.0 == 0 || coin.0 > universe {
                return Err(Error::CoinOutOfRange { coin, universe });
            }
        }
        Ok(())
    }

    pub fn max_coin(&self) -> Option<CoinId> {
        self.left.coins.iter().chain(&self.right.coins).max().copied()
    }

    pub fn mirrored(&self) -> Weighing {
        Weighing {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }

    /// Renames every coin through `map`; reference counts are kept.
    pub fn relabel(&self, map: &dyn Fn(CoinId) -> CoinId) -> Weighing {
        Weighing {
            left: self.left.relabel(map),
            right: self.right.relabel(map),
        }
    }

    /// Outcome for an arbitrary heavy-coin predicate (coins beyond 64 allowed).
    pub fn outcome_by(&self, is_heavy: impl Fn(CoinId) -> bool) -> Outcome {
        let l = self.left.coins.iter().filter(|&&c| is_heavy(c)).count();
        let r = self.right.coins.iter().filter(|&&c| is_heavy(c)).count();
        Outcome::compare(l as u32, r as u32)
    }

    pub(crate) fn outcome_unchecked(&self, s: FakeSet) -> Outcome {
        Outcome::compare(self.left.heavy_count(s), self.right.heavy_count(s))
    }
}

impl fmt::Display for Weighing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.left, self.right)
    }
}

impl FromStr for Weighing {
    type Err = Error;

    /// Parses `{1,2,e}:{3,4,5}`; each `e` is one reference coin.
    fn from_str(s: &str) -> Result<Weighing> {
        let bad = |message: &str| Error::Parse {
            line: 1,
            column: 1,
            message: format!("{message} in weighing {s:?}"),
        };
        let (l, r) = s.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let pan = |text: &str| -> Result<Pan> {
            let inner = text
                .trim()
                .strip_prefix('{')
                .and_then(|t| t.strip_suffix('}'))
                .ok_or_else(|| bad("pan must be braced"))?;
            let mut coins = Vec::new();
            let mut refs = 0;
            for tok in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                if tok == "e" {
                    refs += 1;
                } else {
                    let v: u32 = tok.parse().map_err(|_| bad("bad coin label"))?;
                    coins.push(CoinId(v));
                }
            }
            Ok(Pan::new(coins, refs))
        };
        Weighing::new(pan(l)?, pan(r)?)
    }
}

/// Result of one weighing, with the digit convention 0 "=", 1 "<", 2 ">".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Outcome {
    Balanced = 0,
    LeftLighter = 1,
    LeftHeavier = 2,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Balanced, Outcome::LeftLighter, Outcome::LeftHeavier];

    pub fn digit(self) -> u8 {
        self as u8
    }

    pub fn from_digit(d: u8) -> Result<Outcome> {
        match d {
            0 => Ok(Outcome::Balanced),
            1 => Ok(Outcome::LeftLighter),
            2 => Ok(Outcome::LeftHeavier),
            other => Err(Error::InvalidOutcome(other)),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Outcome::Balanced => '=',
            Outcome::LeftLighter => '<',
            Outcome::LeftHeavier => '>',
        }
    }

    pub fn from_symbol(c: char) -> Option<Outcome> {
        match c {
            '=' => Some(Outcome::Balanced),
            '<' => Some(Outcome::LeftLighter),
            '>' => Some(Outcome::LeftHeavier),
            _ => None,
        }
    }

    pub fn mirrored(self) -> Outcome {
        match self {
            Outcome::Balanced => Outcome::Balanced,
            Outcome::LeftLighter => Outcome::LeftHeavier,
            Outcome::LeftHeavier => Outcome::LeftLighter,
        }
    }

    fn compare(left_heavy: u32, right_heavy: u32) -> Outcome {
        match left_heavy.cmp(&right_heavy) {
            std::cmp::Ordering::Equal => Outcome::Balanced,
            std::cmp::Ordering::Less => Outcome::LeftLighter,
            std::cmp::Ordering::Greater => Outcome::LeftHeavier,
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.symbol().encode_utf8(&mut [0; 4]))
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Outcome, D::Error> {
        let s = String::deserialize(deserializer)?;
        let mut chars = s.chars();
        match (chars.next().and_then(Outcome::from_symbol), chars.next()) {
            (Some(o), None) => Ok(o),
            _ => Err(serde::de::Error::custom(format!("expected one of <, =, >, got {s:?}"))),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Simulates `w` when exactly the coins of `s` are heavy.
///
/// Reference coins contribute no heavy weight. Pans of unequal size are
/// rejected: the result would depend on the unknown weight difference.
pub fn weigh(s: FakeSet, w: &Weighing) -> Result<Outcome> {
    w.check_pans()?;
    Ok(w.outcome_unchecked(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::encode_subset;

    fn set(v: &[u32]) -> FakeSet {
        encode_subset(v.iter().copied().map(CoinId)).unwrap()
    }

    #[test]
    fn weigh_examples() {
        let w = Weighing::coins(&[1, 2, 3], &[4, 5, 6]).unwrap();
        assert_eq!(weigh(set(&[1, 2, 6, 7]), &w).unwrap(), Outcome::LeftHeavier);
        assert_eq!(weigh(FakeSet::EMPTY, &w).unwrap(), Outcome::Balanced);
        let w = Weighing::coins(&[5, 7, 9], &[6, 8, 10]).unwrap();
        assert_eq!(weigh(set(&[5]), &w).unwrap(), Outcome::LeftHeavier);
        assert_eq!(weigh(set(&[8]), &w).unwrap(), Outcome::LeftLighter);
    }

    #[test]
    fn noop_balances() {
        assert_eq!(weigh(set(&[1, 2]), &Weighing::noop()).unwrap(), Outcome::Balanced);
        assert!(Weighing::noop().is_noop());
    }

    #[test]
    fn unbalanced_and_overlapping_pans_are_rejected() {
        let w = Weighing {
            left: Pan::of(&[1, 2]),
            right: Pan::of(&[3]),
        };
        assert_eq!(weigh(FakeSet::EMPTY, &w), Err(Error::UnbalancedPans { left: 2, right: 1 }));
        assert_eq!(
            Weighing::coins(&[1, 2], &[2, 3]).unwrap_err(),
            Error::OverlappingPans(CoinId(2))
        );
    }

    #[test]
    fn reference_coins_count_as_normal() {
        let w = Weighing::new(Pan::of(&[1]), Pan::new([], 1)).unwrap();
        assert_eq!(weigh(set(&[1]), &w).unwrap(), Outcome::LeftHeavier);
        assert_eq!(weigh(set(&[2]), &w).unwrap(), Outcome::Balanced);
    }

    #[test]
    fn display_and_parse() {
        let w: Weighing = "{1,2,e}:{3,4,5}".parse().unwrap();
        assert_eq!(w.left.refs, 1);
        assert_eq!(w.to_string(), "{1,2,e}:{3,4,5}");
        assert_eq!("{}:{}".parse::<Weighing>().unwrap(), Weighing::noop());
        assert!("{1}:{2,3}".parse::<Weighing>().is_err());
    }

    #[test]
    fn complement_mirrors_outcomes() {
        // pans of equal size without references: complementing the heavy set swaps < and >
        let n = 11;
        let weighings = [
            Weighing::coins(&[1, 2, 3], &[4, 5, 6]).unwrap(),
            Weighing::coins(&[1, 5, 7, 9], &[2, 6, 8, 10]).unwrap(),
            Weighing::coins(&[11], &[3]).unwrap(),
        ];
        for w in &weighings {
            for s in 0..(1u64 << n) {
                let s = FakeSet(s);
                let o = weigh(s, w).unwrap();
                assert_eq!(weigh(s.complement(n), w).unwrap(), o.mirrored());
            }
        }
    }
}
