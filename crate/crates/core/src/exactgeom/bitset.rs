use alloc::vec;
use alloc::vec::Vec;

/// Fixed-width bit set used for incidence (zero) sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub(crate) fn new(bits: usize) -> Self {
        Self { words: vec![0; bits.div_ceil(64)] }
    }

    #[inline]
    pub(crate) fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub(crate) fn intersection(&self, o: &BitSet) -> BitSet {
        BitSet { words: self.words.iter().zip(&o.words).map(|(a, b)| a & b).collect() }
    }

    #[inline]
    pub(crate) fn intersection_len(&self, o: &BitSet) -> usize {
        self.words.iter().zip(&o.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    #[inline]
    pub(crate) fn is_subset_of(&self, o: &BitSet) -> bool {
        self.words.iter().zip(&o.words).all(|(a, b)| a & !b == 0)
    }
}
