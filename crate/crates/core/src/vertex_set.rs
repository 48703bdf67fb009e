//! Fixed-width vertex bit sets.
//!
//! Every vertex subset in the crate (codegree queries, matchings, absorber
//! sets, extremal witnesses) is a [`VertexSet`]. The width is fixed at
//! [`MAX_VERTICES`] bits so the type is `Copy` and hashable; hypergraph
//! constructors reject larger vertex counts.

use std::fmt;
use std::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest supported vertex count.
pub const MAX_VERTICES: usize = 512;

const WORDS: usize = MAX_VERTICES / 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VertexSet([u64; WORDS]);

impl VertexSet {
    pub const fn empty() -> Self {
        VertexSet([0; WORDS])
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_VERTICES, "vertex count {n} exceeds {MAX_VERTICES}");
        let mut s = Self::empty();
        for w in 0..n / 64 {
            s.0[w] = u64::MAX;
        }
        if !n.is_multiple_of(64) {
            s.0[n / 64] = (1u64 << (n % 64)) - 1;
        }
        s
    }

    pub fn singleton(v: u32) -> Self {
        let mut s = Self::empty();
        s.insert(v);
        s
    }

    #[inline]
    pub fn insert(&mut self, v: u32) {
        let v = v as usize;
        assert!(v < MAX_VERTICES, "vertex {v} exceeds {MAX_VERTICES}");
        self.0[v >> 6] |= 1 << (v & 63);
    }

    #[inline]
    pub fn remove(&mut self, v: u32) {
        let v = v as usize;
        if v < MAX_VERTICES {
            self.0[v >> 6] &= !(1 << (v & 63));
        }
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        let v = v as usize;
        v < MAX_VERTICES && self.0[v >> 6] & (1 << (v & 63)) != 0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a & !b == 0)
    }

    #[inline]
    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a & b == 0)
    }

    /// Size of the intersection without materialising it.
    #[inline]
    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn min(&self) -> Option<u32> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| (i * 64) as u32 + w.trailing_zeros())
    }

    pub fn max(&self) -> Option<u32> {
        self.0
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| (i * 64) as u32 + 63 - w.leading_zeros())
    }

    /// Members in ascending order.
    pub fn iter(&self) -> Iter<'_> {
        Iter {
            set: self,
            word: 0,
            bits: self.0[0],
        }
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }
}

pub struct Iter<'a> {
    set: &'a VertexSet,
    word: usize,
    bits: u64,
}

impl Iterator for Iter<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        loop {
            if self.bits != 0 {
                let tz = self.bits.trailing_zeros();
                self.bits &= self.bits - 1;
                return Some((self.word * 64) as u32 + tz);
            }
            self.word += 1;
            if self.word >= WORDS {
                return None;
            }
            self.bits = self.set.0[self.word];
        }
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = u32;
    type IntoIter = Iter<'a>;
    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl FromIterator<u32> for VertexSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut s = Self::empty();
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl<'a> FromIterator<&'a u32> for VertexSet {
    fn from_iter<I: IntoIterator<Item = &'a u32>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

macro_rules! bitop {
    ($tr:ident, $f:ident, $tra:ident, $fa:ident, $op:expr) => {
        impl $tr for VertexSet {
            type Output = VertexSet;
            #[inline]
            fn $f(mut self, rhs: VertexSet) -> VertexSet {
                self.$fa(rhs);
                self
            }
        }
        impl $tra for VertexSet {
            #[inline]
            fn $fa(&mut self, rhs: VertexSet) {
                for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
                    *a = $op(*a, *b);
                }
            }
        }
    };
}

bitop!(BitOr, bitor, BitOrAssign, bitor_assign, |a: u64, b: u64| a
    | b);
bitop!(
    BitAnd,
    bitand,
    BitAndAssign,
    bitand_assign,
    |a: u64, b: u64| a & b
);
bitop!(Sub, sub, SubAssign, sub_assign, |a: u64, b: u64| a & !b);

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let ids = Vec::<u32>::deserialize(d)?;
        if let Some(&v) = ids.iter().find(|&&v| v as usize >= MAX_VERTICES) {
            return Err(serde::de::Error::custom(format!(
                "vertex {v} exceeds {MAX_VERTICES}"
            )));
        }
        Ok(ids.into_iter().collect())
    }
}
