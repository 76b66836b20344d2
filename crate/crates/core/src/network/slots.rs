//! Per-link spectrum occupancy bitmap.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotMap {
    words: Vec<u64>,
    len: usize,
}

impl SlotMap {
    pub fn new(len: usize) -> Self {
        SlotMap {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_set(&self, slot: usize) -> bool {
        slot < self.len && self.words[slot / 64] & (1 << (slot % 64)) != 0
    }

    /// Marks a slot used. Returns false if it was already used or out of range.
    pub fn set(&mut self, slot: usize) -> bool {
        if slot >= self.len || self.is_set(slot) {
            return false;
        }
        self.words[slot / 64] |= 1 << (slot % 64);
        true
    }

    /// Frees a slot. Returns false if it was not in use.
    pub fn clear(&mut self, slot: usize) -> bool {
        if !self.is_set(slot) {
            return false;
        }
        self.words[slot / 64] &= !(1 << (slot % 64));
        true
    }

    /// Lowest free slot at or above `from`.
    pub fn first_free_from(&self, from: usize) -> Option<usize> {
        let mut slot = from;
        while slot < self.len {
            let word = self.words[slot / 64] | ((1u64 << (slot % 64)) - 1);
            if word != u64::MAX {
                let idx = (slot / 64) * 64 + word.trailing_ones() as usize;
                return (idx < self.len).then_some(idx);
            }
            slot = (slot / 64 + 1) * 64;
        }
        None
    }

    pub fn count_used(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn used(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&s| self.is_set(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_clear_and_search() {
        let mut m = SlotMap::new(130);
        assert_eq!(m.first_free_from(0), Some(0));
        for s in 0..70 {
            assert!(m.set(s));
        }
        assert!(!m.set(3));
        assert_eq!(m.first_free_from(0), Some(70));
        assert!(m.clear(10));
        assert!(!m.clear(10));
        assert_eq!(m.first_free_from(0), Some(10));
        assert_eq!(m.first_free_from(11), Some(70));
        for s in 70..130 {
            m.set(s);
        }
        assert_eq!(m.first_free_from(11), None);
        assert_eq!(m.count_used(), 129);
        assert!(!m.set(130));
    }

    #[test]
    fn matches_linear_scan() {
        let mut m = SlotMap::new(200);
        let mut shadow = [false; 200];
        let mut x: u64 = 12345;
        for _ in 0..2000 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let slot = (x >> 33) as usize % 200;
            if shadow[slot] {
                m.clear(slot);
            } else {
                m.set(slot);
            }
            shadow[slot] = !shadow[slot];
            let from = (x >> 20) as usize % 200;
            let expect = (from..200).find(|&s| !shadow[s]);
            assert_eq!(m.first_free_from(from), expect);
        }
    }
}
