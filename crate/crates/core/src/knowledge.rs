//! Fixed-width bit-sets over environment states.

use std::fmt;

use smallvec::SmallVec;

/// A set of environment states. All sets in one model share a width.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Knowledge(SmallVec<[u64; 2]>);

fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl Knowledge {
    pub fn empty(n: usize) -> Self {
        Knowledge(SmallVec::from_elem(0, words_for(n)))
    }

    pub fn full(n: usize) -> Self {
        let mut k = Self::empty(n);
        for i in 0..n {
            k.insert(i);
        }
        k
    }

    pub fn from_iter(n: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut k = Self::empty(n);
        for i in items {
            k.insert(i);
        }
        k
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.get(i / 64).is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_subset(&self, other: &Knowledge) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &Knowledge) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &Knowledge) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a &= b;
        }
    }

    pub fn union(&self, other: &Knowledge) -> Knowledge {
        let mut k = self.clone();
        k.union_with(other);
        k
    }

    pub fn intersection(&self, other: &Knowledge) -> Knowledge {
        let mut k = self.clone();
        k.intersect_with(other);
        k
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + bit)
            })
        })
    }
}

impl fmt::Debug for Knowledge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
