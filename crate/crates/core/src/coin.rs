//! Coin labels and heavy-coin subsets.
//!
//! A subset of the coins `1..=n` is stored as the integer `Σ 2^(a-1)` over its
//! members, the same encoding the printed strategy tables use for their
//! classification column.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest coin universe a single decision tree can address.
pub const MAX_UNIVERSE: u32 = 64;

/// A 1-based coin label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoinId(pub u32);

impl CoinId {
    pub fn index(self) -> u32 {
        self.0
    }

    pub(crate) fn bit(self) -> u64 {
        debug_assert!(self.0 >= 1 && self.0 <= MAX_UNIVERSE);
        1u64 << (self.0 - 1)
    }
}

impl fmt::Display for CoinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for CoinId {
    fn from(value: u32) -> Self {
        CoinId(value)
    }
}

/// The set of heavy coins, bit `i - 1` set iff coin `i` is heavy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FakeSet(pub u64);

impl FakeSet {
    pub const EMPTY: FakeSet = FakeSet(0);

    /// Every coin of an `n`-coin universe.
    pub fn full(n: u32) -> FakeSet {
        FakeSet(full_mask(n))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, coin: CoinId) -> bool {
        coin.0 >= 1 && coin.0 <= MAX_UNIVERSE && self.0 & coin.bit() != 0
    }

    pub fn with(self, coin: CoinId) -> FakeSet {
        FakeSet(self.0 | coin.bit())
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn complement(self, n: u32) -> FakeSet {
        FakeSet(!self.0 & full_mask(n))
    }

    pub fn fits(self, n: u32) -> bool {
        self.0 & !full_mask(n) == 0
    }

    pub fn is_subset(self, other: FakeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn coins(self) -> impl Iterator<Item = CoinId> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let low = rest.trailing_zeros();
            rest &= rest - 1;
            Some(CoinId(low + 1))
        })
    }
}

impl fmt::Display for FakeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.coins().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

pub(crate) fn full_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Encodes a set of coins as `Σ 2^(a-1)`.
pub fn encode_subset<I>(coins: I) -> Result<FakeSet>
where
    I: IntoIterator<Item = CoinId>,
{
    let mut bits = 0u64;
    for coin in coins {
        if coin.0 == 0 || coin.0 > MAX_UNIVERSE {
            return Err(Error::CoinOutOfRange {
                coin,
                universe: MAX_UNIVERSE,
            });
        }
        bits |= coin.bit();
    }
    Ok(FakeSet(bits))
}

/// Inverse of [`encode_subset`]; coins come back in increasing order.
pub fn decode_subset(set: FakeSet) -> Vec<CoinId> {
    set.coins().collect()
}

pub(crate) fn check_universe(n: u32) -> Result<()> {
    if n == 0 || n > MAX_UNIVERSE {
        Err(Error::UniverseTooLarge(n))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> Vec<CoinId> {
        v.iter().copied().map(CoinId).collect()
    }

    #[test]
    fn table_encoding_examples() {
        assert_eq!(encode_subset(ids(&[1, 2, 6, 7])).unwrap(), FakeSet(99));
        assert_eq!(encode_subset(ids(&[])).unwrap(), FakeSet(0));
        assert_eq!(encode_subset(ids(&(1..=11).collect::<Vec<_>>())).unwrap(), FakeSet(2047));
        assert_eq!(decode_subset(FakeSet(99)), ids(&[1, 2, 6, 7]));
    }

    #[test]
    fn coin_zero_is_rejected() {
        assert!(encode_subset(ids(&[0])).is_err());
        assert!(encode_subset(ids(&[65])).is_err());
    }

    #[test]
    fn round_trip_exhaustive_to_16() {
        for x in 0u64..(1 << 16) {
            let set = FakeSet(x);
            assert_eq!(encode_subset(decode_subset(set)).unwrap(), set);
        }
    }

    #[test]
    fn display_lists_members() {
        assert_eq!(FakeSet(99).to_string(), "{1,2,6,7}");
        assert_eq!(FakeSet::EMPTY.to_string(), "{}");
        assert_eq!(FakeSet(99).complement(7), FakeSet(0b0011100));
    }
}
