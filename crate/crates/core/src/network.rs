//! Constraints compiled to index form for the solvers' inner loops.

use std::collections::HashSet;

use crate::csp::{Problem, Relation};

const DENSE_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone)]
pub(crate) enum Kind {
    Table {
        tuples: Vec<Vec<u32>>,
        set: HashSet<Vec<u32>>,
        strides: Vec<usize>,
        dense: Option<Vec<bool>>,
        /// `supports[pos][value]` lists the tuples with that value at that position.
        supports: Vec<Vec<Vec<u32>>>,
    },
    NotEqual {
        /// `same[side][a]`: index of the equal value in the other variable's domain.
        same: [Vec<Option<u32>>; 2],
    },
    Letter {
        letters: [Vec<Option<u8>>; 2],
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub scope: Vec<usize>,
    pub kind: Kind,
}

impl Compiled {
    pub fn allows(&self, vals: &[u32]) -> bool {
        match &self.kind {
            Kind::Table { set, strides, dense, .. } => match dense {
                Some(d) => d[vals.iter().zip(strides).map(|(&v, &s)| v as usize * s).sum::<usize>()],
                None => set.contains(vals),
            },
            Kind::NotEqual { same } => same[0][vals[0] as usize] != Some(vals[1]),
            Kind::Letter { letters } => match (letters[0][vals[0] as usize], letters[1][vals[1] as usize]) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            },
        }
    }

    pub fn position(&self, var: usize) -> Option<usize> {
        self.scope.iter().position(|&v| v == var)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Network {
    pub dom_sizes: Vec<usize>,
    pub constraints: Vec<Compiled>,
    pub var_constraints: Vec<Vec<usize>>,
    pub degree: Vec<usize>,
}

impl Network {
    pub fn new(problem: &Problem) -> Network {
        let n = problem.n();
        let dom_sizes: Vec<usize> = problem.domains().iter().map(Vec::len).collect();
        let mut var_constraints = vec![Vec::new(); n];
        let constraints: Vec<Compiled> = problem
            .constraints()
            .iter()
            .enumerate()
            .map(|(ci, c)| {
                let scope: Vec<usize> = c.scope().iter().map(|v| v.index()).collect();
                for &v in &scope {
                    var_constraints[v].push(ci);
                }
                let kind = match c.relation() {
                    Relation::Extensional(set) => {
                        let tuples: Vec<Vec<u32>> =
                            set.iter().map(|t| t.iter().map(|a| a.0).collect()).collect();
                        let mut strides = vec![1usize; scope.len()];
                        let mut product = 1usize;
                        for i in (0..scope.len()).rev() {
                            strides[i] = product;
                            product = product.saturating_mul(dom_sizes[scope[i]].max(1));
                        }
                        let dense = (product <= DENSE_LIMIT).then(|| {
                            let mut d = vec![false; product];
                            for t in &tuples {
                                d[t.iter().zip(&strides).map(|(&v, &s)| v as usize * s).sum::<usize>()] =
                                    true;
                            }
                            d
                        });
                        let mut supports: Vec<Vec<Vec<u32>>> =
                            scope.iter().map(|&v| vec![Vec::new(); dom_sizes[v]]).collect();
                        for (ti, t) in tuples.iter().enumerate() {
                            for (p, &a) in t.iter().enumerate() {
                                supports[p][a as usize].push(ti as u32);
                            }
                        }
                        let set = tuples.iter().cloned().collect();
                        Kind::Table { tuples, set, strides, dense, supports }
                    }
                    Relation::NotEqual => {
                        let (x, y) = (c.scope()[0], c.scope()[1]);
                        let side = |from, to| {
                            problem
                                .domain(from)
                                .iter()
                                .map(|v| problem.value_id(to, v).map(|a| a.0))
                                .collect::<Vec<_>>()
                        };
                        Kind::NotEqual { same: [side(x, y), side(y, x)] }
                    }
                    Relation::LetterEquality { pos_a, pos_b } => {
                        let (x, y) = (c.scope()[0], c.scope()[1]);
                        let letters = |v, pos| {
                            problem.domain(v).iter().map(|w| w.letter_at(pos)).collect::<Vec<_>>()
                        };
                        Kind::Letter { letters: [letters(x, *pos_a), letters(y, *pos_b)] }
                    }
                };
                Compiled { scope, kind }
            })
            .collect();
        let degree = var_constraints.iter().map(Vec::len).collect();
        Network { dom_sizes, constraints, var_constraints, degree }
    }

    pub fn n(&self) -> usize {
        self.dom_sizes.len()
    }
}
