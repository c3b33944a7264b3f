//! Subsets of a structure's universe as canonical bit vectors.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

/// A finite set of universe indices, stored as a bit vector.
///
/// Trailing zero words are always trimmed, so equality does not depend on
/// the size of the universe the subset was built for. The [`Ord`] impl is
/// numeric: a subset compares like the integer whose binary digits are its
/// membership bits.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Subset {
    words: SmallVec<[u64; 1]>,
}

impl Subset {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The full universe `0..n`.
    pub fn full(n: usize) -> Self {
        Self::from_indices(0..n)
    }

    /// Subset whose membership bits are the bits of `mask`.
    pub fn from_mask(mask: u64) -> Self {
        let mut s = Subset { words: SmallVec::from_elem(mask, 1) };
        s.trim();
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(items: I) -> Self {
        let mut s = Subset::empty();
        for i in items {
            s.insert(i);
        }
        s
    }

    /// The subset as a single word, if every member is below 64.
    pub fn to_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn insert(&mut self, i: usize) {
        let (w, b) = (i / 64, i % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn remove(&mut self, i: usize) {
        let (w, b) = (i / 64, i % 64);
        if w < self.words.len() {
            self.words[w] &= !(1 << b);
            self.trim();
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        let (w, b) = (i / 64, i % 64);
        w < self.words.len() && self.words[w] & (1 << b) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn least(&self) -> Option<usize> {
        self.iter().next()
    }

    /// True when every member is below `n`.
    pub fn within(&self, n: usize) -> bool {
        self.iter().all(|i| i < n)
    }

    pub fn is_subset(&self, other: &Subset) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn union(&self, other: &Subset) -> Subset {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn symmetric_difference(&self, other: &Subset) -> Subset {
        self.zip_with(other, |a, b| a ^ b)
    }

    /// Image of the subset under a permutation given as an image table.
    pub fn map(&self, perm: &[usize]) -> Subset {
        Subset::from_indices(self.iter().map(|i| perm[i]))
    }

    fn zip_with(&self, other: &Subset, f: impl Fn(u64, u64) -> u64) -> Subset {
        let len = self.words.len().max(other.words.len());
        let mut words = SmallVec::with_capacity(len);
        for i in 0..len {
            let a = self.words.get(i).copied().unwrap_or(0);
            let b = other.words.get(i).copied().unwrap_or(0);
            words.push(f(a, b));
        }
        let mut s = Subset { words };
        s.trim();
        s
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

impl Ord for Subset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.words
            .len()
            .cmp(&other.words.len())
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<usize> for Subset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Subset::from_indices(iter)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl serde::Serialize for Subset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}
