//! Dense index sets used for world and event extensions.

use alloc::vec::Vec;
use core::fmt;

use smallvec::SmallVec;

const WORD: usize = 64;

/// A set of indices `0..len` stored as a bit vector.
///
/// Sets up to 128 elements live inline, which covers every model the
/// fuzz harness produces (including products of products).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: SmallVec<[u64; 2]>,
}

/// Extension of a formula: a set of world indices.
pub type WorldSet = BitSet;

impl BitSet {
    pub fn empty(len: usize) -> Self {
        BitSet {
            len,
            words: SmallVec::from_elem(0, len.div_ceil(WORD)),
        }
    }

    pub fn full(len: usize) -> Self {
        let mut set = BitSet::empty(len);
        for w in set.words.iter_mut() {
            *w = !0;
        }
        set.trim();
        set
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = BitSet::empty(len);
        for i in indices {
            set.insert(i);
        }
        set
    }

    /// The subset of `0..len` whose members are the set bits of `mask`.
    /// Only meaningful for `len <= 64`.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        debug_assert!(len <= WORD);
        let mut set = BitSet::empty(len);
        if len > 0 {
            set.words[0] = mask;
        }
        set.trim();
        set
    }

    fn trim(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Size of the universe, not the number of members.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / WORD] & (1 << (i % WORD)) != 0
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "index {i} outside universe of {}", self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.len {
            self.words[i / WORD] &= !(1 << (i % WORD));
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= *b;
        }
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= *b;
        }
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= !*b;
        }
    }

    pub fn complement(&self) -> BitSet {
        let mut out = self.clone();
        for w in out.words.iter_mut() {
            *w = !*w;
        }
        out.trim();
        out
    }

    pub fn union(&self, other: &BitSet) -> BitSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn intersection(&self, other: &BitSet) -> BitSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn difference(&self, other: &BitSet) -> BitSet {
        let mut out = self.clone();
        out.difference_with(other);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Every subset of `self`, in bit-counting order over the members
    /// (the n-th subset contains the members selected by the bits of n).
    pub fn subsets(&self) -> Subsets {
        let members = self.to_vec();
        assert!(members.len() < WORD, "too many members to enumerate subsets");
        Subsets {
            universe: self.len,
            total: 1u64 << members.len(),
            next: 0,
            members,
        }
    }
}

pub struct Subsets {
    universe: usize,
    members: Vec<usize>,
    next: u64,
    total: u64,
}

impl Iterator for Subsets {
    type Item = BitSet;

    fn next(&mut self) -> Option<BitSet> {
        if self.next >= self.total {
            return None;
        }
        let n = self.next;
        self.next += 1;
        let mut set = BitSet::empty(self.universe);
        for (bit, &m) in self.members.iter().enumerate() {
            if n & (1 << bit) != 0 {
                set.insert(m);
            }
        }
        Some(set)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn complement_respects_universe() {
        let s = BitSet::from_indices(70, [0, 65]);
        let c = s.complement();
        assert_eq!(c.count(), 68);
        assert!(!c.contains(65));
        assert!(c.contains(69));
        assert!(!c.contains(70));
    }

    #[test]
    fn subsets_in_counting_order() {
        let s = BitSet::from_indices(4, [1, 3]);
        let all: Vec<_> = s.subsets().map(|x| x.to_vec()).collect();
        assert_eq!(all, [vec![], vec![1], vec![3], vec![1, 3]]);
    }

    #[test]
    fn empty_universe() {
        let s = BitSet::full(0);
        assert!(s.is_empty());
        assert!(s.is_full());
        assert_eq!(s.subsets().count(), 1);
    }
}
