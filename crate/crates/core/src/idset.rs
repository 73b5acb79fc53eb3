//! Dense bitset over point, plane or line ids.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IdSet {
    universe: usize,
    words: Vec<u64>,
}

impl IdSet {
    pub fn new(universe: usize) -> IdSet {
        IdSet {
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> IdSet {
        let mut s = IdSet::new(universe);
        for id in 0..universe {
            s.insert(id as u32);
        }
        s
    }

    pub fn from_ids<I: IntoIterator<Item = u32>>(universe: usize, ids: I) -> IdSet {
        let mut s = IdSet::new(universe);
        for id in ids {
            s.insert(id);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, id: u32) -> bool {
        let i = id as usize;
        i < self.universe && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    /// Returns true if the id was not already present.
    #[inline]
    pub fn insert(&mut self, id: u32) -> bool {
        let i = id as usize;
        assert!(
            i < self.universe,
            "id {i} outside universe {}",
            self.universe
        );
        let (w, b) = (i / 64, 1u64 << (i % 64));
        let fresh = self.words[w] & b == 0;
        self.words[w] |= b;
        fresh
    }

    #[inline]
    pub fn remove(&mut self, id: u32) -> bool {
        let i = id as usize;
        if i >= self.universe {
            return false;
        }
        let (w, b) = (i / 64, 1u64 << (i % 64));
        let present = self.words[w] & b != 0;
        self.words[w] &= !b;
        present
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Ids in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros();
                w &= w - 1;
                Some((wi * 64) as u32 + bit)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }

    fn check_universe(&self, other: &IdSet) {
        assert_eq!(self.universe, other.universe, "set universes differ");
    }

    pub fn union(&self, other: &IdSet) -> IdSet {
        self.check_universe(other);
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &IdSet) -> IdSet {
        self.check_universe(other);
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &IdSet) -> IdSet {
        self.check_universe(other);
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn symmetric_difference(&self, other: &IdSet) -> IdSet {
        self.check_universe(other);
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn complement(&self) -> IdSet {
        let mut s = self.clone();
        for w in s.words.iter_mut() {
            *w = !*w;
        }
        s.clear_padding();
        s
    }

    pub fn is_subset(&self, other: &IdSet) -> bool {
        self.check_universe(other);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &IdSet) -> bool {
        self.check_universe(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    fn zip_with(&self, other: &IdSet, f: impl Fn(u64, u64) -> u64) -> IdSet {
        IdSet {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn clear_padding(&mut self) {
        let tail = self.universe % 64;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }
}

impl fmt::Debug for IdSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IdSet({}/{}) ", self.len(), self.universe)?;
        f.debug_set().entries(self.iter().take(16)).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn complement_respects_universe() {
        let s = IdSet::from_ids(70, [0, 5, 69]);
        let c = s.complement();
        assert_eq!(c.len(), 67);
        assert!(!c.contains(69));
        assert!(!c.contains(70));
        assert_eq!(c.complement(), s);
    }

    proptest! {
        #[test]
        fn set_algebra_matches_btreeset(
            a in proptest::collection::btree_set(0u32..200, 0..80),
            b in proptest::collection::btree_set(0u32..200, 0..80),
        ) {
            let (sa, sb) = (IdSet::from_ids(200, a.iter().copied()), IdSet::from_ids(200, b.iter().copied()));
            prop_assert_eq!(sa.len(), a.len());
            prop_assert_eq!(sa.to_vec(), a.iter().copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.union(&sb).to_vec(), a.union(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.intersection(&sb).to_vec(), a.intersection(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.difference(&sb).to_vec(), a.difference(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.is_subset(&sb), a.is_subset(&b));
            prop_assert_eq!(sa.is_disjoint(&sb), a.is_disjoint(&b));
        }
    }
}
