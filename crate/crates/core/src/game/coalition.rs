use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest player count a [`Coalition`] can index.
pub const MAX_PLAYERS: usize = 64;

/// A subset of players stored as a 64-bit bitset; bit `p` is player `p`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coalition(u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub const fn from_bits(bits: u64) -> Self {
        Coalition(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// The grand coalition of an `n`-player game.
    pub fn grand(n: usize) -> Self {
        assert!(n <= MAX_PLAYERS, "at most {MAX_PLAYERS} players");
        if n == MAX_PLAYERS {
            Coalition(u64::MAX)
        } else {
            Coalition((1u64 << n) - 1)
        }
    }

    pub fn singleton(p: usize) -> Self {
        assert!(p < MAX_PLAYERS);
        Coalition(1u64 << p)
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Result<Self> {
        let mut bits = 0u64;
        for p in members {
            if p >= MAX_PLAYERS {
                return Err(Error::InvalidInput(format!(
                    "player index {p} exceeds coalition width {MAX_PLAYERS}"
                )));
            }
            bits |= 1 << p;
        }
        Ok(Coalition(bits))
    }

    pub fn contains(self, p: usize) -> bool {
        p < MAX_PLAYERS && self.0 >> p & 1 == 1
    }

    pub fn with(self, p: usize) -> Self {
        Coalition(self.0 | 1 << p)
    }

    pub fn without(self, p: usize) -> Self {
        Coalition(self.0 & !(1 << p))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        Coalition(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        Coalition(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        Coalition(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// True when every member index is below `n`.
    pub fn fits(self, n: usize) -> bool {
        self.is_subset(Coalition::grand(n))
    }

    pub fn members(self) -> Members {
        Members(self.0)
    }

    /// All `2^n` coalitions, starting with the empty one.
    pub fn all(n: usize) -> impl Iterator<Item = Coalition> {
        assert!(n < MAX_PLAYERS);
        (0..1u64 << n).map(Coalition)
    }

    pub fn all_nonempty(n: usize) -> impl Iterator<Item = Coalition> {
        Self::all(n).skip(1)
    }

    /// All subsets of `self`, including the empty set and `self`.
    pub fn subsets(self) -> Subsets {
        Subsets {
            mask: self.0,
            next: Some(0),
        }
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.members().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<usize> for Coalition {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        iter.into_iter().fold(Coalition::EMPTY, Coalition::with)
    }
}

/// Member indices in increasing order.
#[derive(Clone)]
pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let p = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

/// Submask enumeration in increasing numeric order.
pub struct Subsets {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = Coalition;

    fn next(&mut self) -> Option<Coalition> {
        let cur = self.next?;
        self.next = if cur == self.mask {
            None
        } else {
            Some((cur | !self.mask).wrapping_add(1) & self.mask)
        };
        Some(Coalition(cur))
    }
}

/// Serde adapter writing a list of coalitions as lists of member indices.
pub mod serde_members {
    use super::Coalition;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Coalition], s: S) -> std::result::Result<S::Ok, S::Error> {
        let lists: Vec<Vec<usize>> = v.iter().map(|c| c.members().collect()).collect();
        lists.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Coalition>, D::Error> {
        Vec::<Vec<usize>>::deserialize(d)?
            .into_iter()
            .map(|m| Coalition::from_members(m).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_grand_are_distinct() {
        assert_ne!(Coalition::EMPTY, Coalition::grand(3));
        assert_eq!(Coalition::grand(3).len(), 3);
        assert!(Coalition::EMPTY.is_empty());
        assert_eq!(Coalition::grand(64).len(), 64);
    }

    #[test]
    fn members_round_trip() {
        let s = Coalition::from_members([0, 3, 7]).unwrap();
        assert_eq!(s.members().collect::<Vec<_>>(), vec![0, 3, 7]);
        assert_eq!(s.to_string(), "{0,3,7}");
        assert!(Coalition::from_members([64]).is_err());
    }

    #[test]
    fn subsets_enumerates_all_submasks() {
        let s = Coalition::from_members([1, 4, 5]).unwrap();
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|t| t.is_subset(s)));
        assert_eq!(subs[0], Coalition::EMPTY);
        assert_eq!(*subs.last().unwrap(), s);
    }
}
