use std::fmt;

/// A set of search levels (1-based depths), stored as a bitset.
///
/// Used for conflict sets and for the explanations attached to pruned values.
#[derive(Clone, Default)]
pub struct LevelSet {
    words: Vec<u64>,
}

impl LevelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(level: u32) -> Self {
        let mut s = Self::new();
        s.insert(level);
        s
    }

    pub fn insert(&mut self, level: u32) {
        let (w, b) = ((level / 64) as usize, level % 64);
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn remove(&mut self, level: u32) {
        let (w, b) = ((level / 64) as usize, level % 64);
        if let Some(word) = self.words.get_mut(w) {
            *word &= !(1 << b);
        }
    }

    pub fn contains(&self, level: u32) -> bool {
        let (w, b) = ((level / 64) as usize, level % 64);
        self.words.get(w).is_some_and(|word| word & (1 << b) != 0)
    }

    pub fn union_with(&mut self, other: &LevelSet) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Deepest level in the set.
    pub fn max(&self) -> Option<u32> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i as u32 * 64 + 63 - w.leading_zeros())
    }

    /// Drops every level `>= level`.
    pub fn truncate_from(&mut self, level: u32) {
        let (w, b) = ((level / 64) as usize, level % 64);
        if w < self.words.len() {
            self.words[w] &= (1u64 << b) - 1;
            for word in &mut self.words[w + 1..] {
                *word = 0;
            }
        }
    }

    pub fn is_subset(&self, other: &LevelSet) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, &w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64).filter(move |b| w & (1 << b) != 0).map(move |b| i as u32 * 64 + b)
        })
    }
}

impl PartialEq for LevelSet {
    fn eq(&self, other: &Self) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }
}

impl Eq for LevelSet {}

impl FromIterator<u32> for LevelSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut s = LevelSet::new();
        for l in iter {
            s.insert(l);
        }
        s
    }
}

impl fmt::Debug for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
