use std::fmt;

/// Index of a ground atom in a [`GroundTask`](crate::annotated_model::GroundTask).
pub type FactId = u32;
/// Index of a ground action in a [`GroundTask`](crate::annotated_model::GroundTask).
pub type ActionId = u32;

/// A set of ground atoms, stored as a bitset over the task's fact universe.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct State {
    words: Vec<u64>,
}

impl State {
    pub fn empty(num_facts: usize) -> Self {
        State {
            words: vec![0; num_facts.div_ceil(64)],
        }
    }

    pub fn from_facts(num_facts: usize, facts: impl IntoIterator<Item = FactId>) -> Self {
        let mut s = State::empty(num_facts);
        for f in facts {
            s.insert(f);
        }
        s
    }

    fn grow(&mut self, f: FactId) {
        let w = f as usize / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
    }

    pub fn insert(&mut self, f: FactId) {
        self.grow(f);
        self.words[f as usize / 64] |= 1 << (f % 64);
    }

    pub fn remove(&mut self, f: FactId) {
        if let Some(w) = self.words.get_mut(f as usize / 64) {
            *w &= !(1 << (f % 64));
        }
    }

    pub fn contains(&self, f: FactId) -> bool {
        self.words
            .get(f as usize / 64)
            .is_some_and(|w| w & (1 << (f % 64)) != 0)
    }

    pub fn contains_all(&self, facts: &[FactId]) -> bool {
        facts.iter().all(|&f| self.contains(f))
    }

    pub fn is_subset(&self, other: &State) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = FactId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64u32)
                .filter(move |b| w & (1 << b) != 0)
                .map(move |b| (i as u32) * 64 + b)
        })
    }

    pub fn to_vec(&self) -> Vec<FactId> {
        self.iter().collect()
    }

    pub fn union_with(&mut self, other: &State) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_operations() {
        let mut s = State::from_facts(130, [1, 64, 129]);
        assert!(s.contains(64) && !s.contains(63));
        assert_eq!(s.to_vec(), vec![1, 64, 129]);
        s.remove(64);
        assert_eq!(s.len(), 2);
        let t = State::from_facts(130, [1, 129, 5]);
        assert!(s.is_subset(&t));
        assert!(!t.is_subset(&s));
        s.union_with(&t);
        assert_eq!(s.to_vec(), vec![1, 5, 129]);
    }
}
