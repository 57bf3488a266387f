//! Crossword puzzles as CSPs: one variable per slot, words as values.
//!
//! Crossing slots must agree on the shared letter and no word may be used
//! twice. The duplicate rule only needs slots of equal length.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::csp::{Problem, VarId};
use crate::error::{CspError, Result};

/// The 5x5 grid with two blocked cells in the top right and bottom left corners.
pub const FIGURE7_GRID: &str = include_str!("../../data/figure7.grid");

/// Small bundled grids, by name.
pub const SMALL_GRIDS: &[(&str, &str)] = &[
    ("figure7", FIGURE7_GRID),
    ("strip", include_str!("../../data/strip.grid")),
    ("square2", include_str!("../../data/square2.grid")),
    ("ring3", include_str!("../../data/ring3.grid")),
    ("diamond4", include_str!("../../data/diamond4.grid")),
];

/// A small English word list (lengths 3 to 6), one word per line.
pub const TEST_DICTIONARY: &str = include_str!("../../data/words.txt");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, `true` for a blocked cell.
    pub blocked: Vec<bool>,
}

impl Grid {
    pub fn is_open(&self, row: usize, col: usize) -> bool {
        !self.blocked[row * self.cols + col]
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let line: String = (0..self.cols).map(|c| if self.is_open(r, c) { '.' } else { '#' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Across,
    Down,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub orientation: Orientation,
    /// (row, column) of the first letter.
    pub start: (usize, usize),
    pub length: usize,
    pub cells: Vec<(usize, usize)>,
}

impl Slot {
    /// Variable name: `A{row}_{col}` or `D{row}_{col}`.
    pub fn name(&self) -> String {
        let tag = match self.orientation {
            Orientation::Across => 'A',
            Orientation::Down => 'D',
        };
        format!("{tag}{}_{}", self.start.0, self.start.1)
    }
}

/// Parses `.` (open) and `#` (blocked) rows. Blank trailing lines are ignored.
pub fn parse_grid(text: &str) -> Result<Grid> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let end = lines.iter().rposition(|l| !l.trim().is_empty()).map_or(0, |i| i + 1);
    let lines = &lines[..end];
    if lines.is_empty() {
        return Err(CspError::Parse("grid has no rows".into()));
    }
    let cols = lines[0].chars().count();
    let mut blocked = Vec::with_capacity(lines.len() * cols);
    for (r, line) in lines.iter().enumerate() {
        if line.chars().count() != cols {
            return Err(CspError::Parse(format!(
                "grid row {} has {} cells, expected {cols}",
                r + 1,
                line.chars().count()
            )));
        }
        for (c, ch) in line.chars().enumerate() {
            match ch {
                '.' => blocked.push(false),
                '#' => blocked.push(true),
                _ => return Err(CspError::Parse(format!("unexpected `{ch}` at row {}, column {}", r + 1, c + 1))),
            }
        }
    }
    if blocked.iter().all(|&b| b) {
        return Err(CspError::Parse("grid has no open cell".into()));
    }
    Ok(Grid { rows: lines.len(), cols, blocked })
}

/// Maximal runs of at least two open cells: across slots row by row, then
/// down slots column by column.
pub fn slots(grid: &Grid) -> Vec<Slot> {
    let mut out = Vec::new();
    let mut runs = |outer: usize, inner: usize, cell: &dyn Fn(usize, usize) -> (usize, usize), o: Orientation| {
        for a in 0..outer {
            let mut b = 0;
            while b < inner {
                let (r, c) = cell(a, b);
                if !grid.is_open(r, c) {
                    b += 1;
                    continue;
                }
                let start = b;
                while b < inner && {
                    let (r, c) = cell(a, b);
                    grid.is_open(r, c)
                } {
                    b += 1;
                }
                if b - start >= 2 {
                    let cells: Vec<_> = (start..b).map(|i| cell(a, i)).collect();
                    out.push(Slot { orientation: o, start: cells[0], length: cells.len(), cells });
                }
            }
        }
    };
    runs(grid.rows, grid.cols, &|r, c| (r, c), Orientation::Across);
    runs(grid.cols, grid.rows, &|c, r| (r, c), Orientation::Down);
    out
}

/// Keeps words made only of `a`-`z`, first occurrence wins. Returns the kept
/// words and the number of dropped entries.
pub fn normalize_dictionary<S: AsRef<str>>(words: &[S]) -> (Vec<String>, usize) {
    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    let mut dropped = 0;
    for w in words {
        let w = w.as_ref().trim();
        if w.is_empty() {
            continue;
        }
        if !w.bytes().all(|b| b.is_ascii_lowercase()) {
            dropped += 1;
            continue;
        }
        if seen.insert(w) {
            kept.push(w.to_string());
        }
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} dictionary entries with characters outside a-z");
    }
    (kept, dropped)
}

/// Splits a one-word-per-line dictionary file.
pub fn parse_dictionary(text: &str) -> Vec<String> {
    normalize_dictionary(&text.lines().collect::<Vec<_>>()).0
}

/// The bundled word list, normalized.
pub fn test_dictionary() -> Vec<String> {
    parse_dictionary(TEST_DICTIONARY)
}

/// Builds the crossword CSP for `grid` over `dictionary`.
///
/// A slot with no word of its length gets an empty domain; the problem is then
/// legal but insoluble.
pub fn build_crossword<S: AsRef<str>>(grid: &Grid, dictionary: &[S]) -> Result<Problem> {
    let (words, _) = normalize_dictionary(dictionary);
    if words.is_empty() {
        return Err(CspError::Parameter("dictionary has no usable words".into()));
    }
    let slots = slots(grid);
    let mut b = Problem::builder();
    let mut ids: Vec<VarId> = Vec::with_capacity(slots.len());
    for s in &slots {
        let domain: Vec<String> = words.iter().filter(|w| w.len() == s.length).cloned().collect();
        ids.push(b.variable(s.name(), domain)?);
    }
    // Which down slot covers each cell, and at which offset.
    let mut down_at = vec![None; grid.rows * grid.cols];
    for (i, s) in slots.iter().enumerate().filter(|(_, s)| s.orientation == Orientation::Down) {
        for (off, &(r, c)) in s.cells.iter().enumerate() {
            down_at[r * grid.cols + c] = Some((i, off));
        }
    }
    for (i, s) in slots.iter().enumerate().filter(|(_, s)| s.orientation == Orientation::Across) {
        for (off, &(r, c)) in s.cells.iter().enumerate() {
            if let Some((j, doff)) = down_at[r * grid.cols + c] {
                b.letter_equality(ids[i], ids[j], off, doff)?;
            }
        }
    }
    for i in 0..slots.len() {
        for j in i + 1..slots.len() {
            if slots[i].length == slots[j].length {
                b.not_equal(ids[i], ids[j])?;
            }
        }
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{enumerate_solutions, Relation};

    fn kinds(p: &Problem) -> (usize, usize) {
        let letters = p.constraints().iter().filter(|c| matches!(c.relation(), Relation::LetterEquality { .. })).count();
        let ne = p.constraints().iter().filter(|c| matches!(c.relation(), Relation::NotEqual)).count();
        (letters, ne)
    }

    #[test]
    fn figure7_counts() {
        let g = parse_grid(FIGURE7_GRID).unwrap();
        let p = build_crossword(&g, &test_dictionary()).unwrap();
        assert_eq!(p.n(), 10);
        assert_eq!(kinds(&p), (21, 13));
        let a1 = p.var("A1_0").unwrap();
        assert_eq!(p.degree(a1), 8);
    }

    #[test]
    fn slot_order_is_across_then_down() {
        let g = parse_grid(FIGURE7_GRID).unwrap();
        let names: Vec<_> = slots(&g).iter().map(Slot::name).collect();
        assert_eq!(names, ["A0_0", "A1_0", "A2_0", "A3_0", "A4_2", "D0_0", "D0_1", "D0_2", "D1_3", "D1_4"]);
    }

    #[test]
    fn strip_has_one_slot() {
        let g = parse_grid("..\n").unwrap();
        let p = build_crossword(&g, &["ab", "cd"]).unwrap();
        assert_eq!((p.n(), p.m()), (1, 0));
        assert_eq!(enumerate_solutions(&p, None).len(), 2);
    }

    #[test]
    fn two_by_two_over_ab_ba() {
        // Four slots of length two share a two-word pool, so the pairwise
        // not-equal constraints leave nothing.
        let g = parse_grid("..\n..\n").unwrap();
        let p = build_crossword(&g, &["ab", "ba"]).unwrap();
        assert_eq!(p.n(), 4);
        assert_eq!(kinds(&p), (4, 6));
        assert_eq!(enumerate_solutions(&p, None).len(), 0);
    }

    #[test]
    fn malformed_grids_fail() {
        assert!(parse_grid("..\n.\n").is_err());
        assert!(parse_grid("#x\n").is_err());
        assert!(parse_grid("##\n").is_err());
        assert!(parse_grid("").is_err());
    }

    #[test]
    fn normalization_drops_and_dedupes() {
        let (w, dropped) = normalize_dictionary(&["cat", "Dog", "cat", "it's", "ox"]);
        assert_eq!(w, ["cat", "ox"]);
        assert_eq!(dropped, 2);
    }

    #[test]
    fn missing_length_gives_empty_domain() {
        let g = parse_grid("...\n").unwrap();
        let p = build_crossword(&g, &["ab"]).unwrap();
        assert!(p.domain(VarId(0)).is_empty());
        assert!(enumerate_solutions(&p, None).is_empty());
    }
}
