use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::csp::{Problem, ValueId, VarId};
use crate::levels::LevelSet;

/// Current domains with an explanation for every eliminated value.
///
/// Removals are trailed so a search can restore any earlier state with
/// [`DomainState::undo`].
#[derive(Clone, Debug)]
pub struct DomainState {
    present: Vec<Vec<bool>>,
    sizes: Vec<usize>,
    explanations: Vec<Vec<LevelSet>>,
    causes: Vec<Vec<Option<usize>>>,
    trail: Vec<(u32, u32)>,
}

impl DomainState {
    pub fn new(problem: &Problem) -> Self {
        Self::from_sizes(&problem.domains().iter().map(Vec::len).collect::<Vec<_>>())
    }

    pub fn from_sizes(sizes: &[usize]) -> Self {
        DomainState {
            present: sizes.iter().map(|&d| vec![true; d]).collect(),
            sizes: sizes.to_vec(),
            explanations: sizes.iter().map(|&d| vec![LevelSet::new(); d]).collect(),
            causes: sizes.iter().map(|&d| vec![None; d]).collect(),
            trail: Vec::new(),
        }
    }

    pub fn contains(&self, var: VarId, val: ValueId) -> bool {
        self.has(var.index(), val.index())
    }

    pub fn size(&self, var: VarId) -> usize {
        self.sizes[var.index()]
    }

    pub fn values(&self, var: VarId) -> Vec<ValueId> {
        self.present_values(var.index()).map(|a| ValueId(a as u32)).collect()
    }

    /// Why `val` was eliminated, or `None` while it is still present.
    pub fn explanation(&self, var: VarId, val: ValueId) -> Option<&LevelSet> {
        (!self.contains(var, val)).then(|| &self.explanations[var.index()][val.index()])
    }

    /// Index of the constraint that eliminated `val`, if a constraint did.
    pub fn cause(&self, var: VarId, val: ValueId) -> Option<usize> {
        self.causes[var.index()][val.index()]
    }

    /// Removes `val`; returns false if it was already gone.
    pub fn remove(&mut self, var: VarId, val: ValueId, cause: Option<usize>, explanation: LevelSet) -> bool {
        self.remove_raw(var.index(), val.index(), cause, explanation)
    }

    /// Reduces the domain of `var` to `val`, blaming `level` for the rest.
    pub fn instantiate(&mut self, var: VarId, val: ValueId, level: u32) {
        let x = var.index();
        for a in 0..self.present[x].len() {
            if a != val.index() && self.present[x][a] {
                self.remove_raw(x, a, None, LevelSet::singleton(level));
            }
        }
    }

    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    /// Restores every value removed since `mark`.
    pub fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (x, a) = self.trail.pop().unwrap();
            let (x, a) = (x as usize, a as usize);
            self.present[x][a] = true;
            self.sizes[x] += 1;
            self.explanations[x][a].clear();
            self.causes[x][a] = None;
        }
    }

    /// Hash of the current domains, for checking that undo is exact.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.present.hash(&mut h);
        h.finish()
    }

    pub(crate) fn has(&self, x: usize, a: usize) -> bool {
        self.present[x][a]
    }

    pub(crate) fn size_of(&self, x: usize) -> usize {
        self.sizes[x]
    }

    pub(crate) fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub(crate) fn present_values(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.present[x].iter().enumerate().filter(|(_, &p)| p).map(|(a, _)| a)
    }

    pub(crate) fn removed_explanation(&self, x: usize, a: usize) -> &LevelSet {
        &self.explanations[x][a]
    }

    /// Union of the explanations of every eliminated value of `x`.
    pub(crate) fn pruned_explanation(&self, x: usize, into: &mut LevelSet) {
        for (a, &p) in self.present[x].iter().enumerate() {
            if !p {
                into.union_with(&self.explanations[x][a]);
            }
        }
    }

    pub(crate) fn remove_raw(&mut self, x: usize, a: usize, cause: Option<usize>, explanation: LevelSet) -> bool {
        if !self.present[x][a] {
            return false;
        }
        self.present[x][a] = false;
        self.sizes[x] -= 1;
        self.explanations[x][a] = explanation;
        self.causes[x][a] = cause;
        self.trail.push((x as u32, a as u32));
        true
    }
}
