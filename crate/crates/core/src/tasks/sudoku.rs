use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{example_rng, Example, Task, TaskError};
use crate::group::GroupExpr;

/// Symmetries of 9×9 Sudoku acting on `(row, column, digit)`: band and row
/// permutations, stack and column permutations, relabelling of digits.
pub const SUDOKU_GROUP: &str = "(S3 wr S3) * (S3 wr S3) * S9";

pub fn sudoku_group() -> GroupExpr {
    SUDOKU_GROUP.parse().expect("constant expression")
}

/// Digits `0..9` in row-major order.
pub type Board = [u8; 81];

/// How many cells to mask per board.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaskSpec {
    Fixed(usize),
    /// Uniform count in the inclusive range.
    Range(usize, usize),
}

impl MaskSpec {
    fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        match *self {
            MaskSpec::Fixed(k) => k,
            MaskSpec::Range(lo, hi) => rng.gen_range(lo..=hi),
        }
    }

    pub fn validate(&self, max: usize) -> Result<(), TaskError> {
        let ok = match *self {
            MaskSpec::Fixed(k) => k <= max,
            MaskSpec::Range(lo, hi) => lo <= hi && hi <= max,
        };
        if ok {
            Ok(())
        } else {
            Err(TaskError::Spec(format!("mask {self:?} outside 0..={max}")))
        }
    }
}

impl FromStr for MaskSpec {
    type Err = TaskError;

    /// `31` or `31..42`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TaskError::Spec(format!("bad mask spec '{s}'"));
        if let Some((a, b)) = s.split_once("..") {
            let lo = a.trim().parse().map_err(|_| bad())?;
            let hi = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
            Ok(MaskSpec::Range(lo, hi))
        } else {
            Ok(MaskSpec::Fixed(s.trim().parse().map_err(|_| bad())?))
        }
    }
}

fn candidates(board: &Board, cell: usize) -> u16 {
    let (r, c) = (cell / 9, cell % 9);
    let (br, bc) = (r / 3 * 3, c / 3 * 3);
    let mut used = 0u16;
    for i in 0..9 {
        for x in [board[r * 9 + i], board[i * 9 + c], board[(br + i / 3) * 9 + bc + i % 3]] {
            if x != EMPTY {
                used |= 1 << x;
            }
        }
    }
    !used & 0x1ff
}

const EMPTY: u8 = u8::MAX;

fn fill<R: Rng>(board: &mut Board, rng: &mut R) -> bool {
    let Some(cell) = board.iter().position(|&x| x == EMPTY) else {
        return true;
    };
    let mut digits: Vec<u8> = (0..9).collect();
    digits.shuffle(rng);
    let allowed = candidates(board, cell);
    for d in digits {
        if allowed & (1 << d) != 0 {
            board[cell] = d;
            if fill(board, rng) {
                return true;
            }
        }
    }
    board[cell] = EMPTY;
    false
}

/// Row, column and box all-different.
pub fn is_valid_board(values: &[usize]) -> bool {
    if values.len() != 81 || values.iter().any(|&x| x >= 9) {
        return false;
    }
    let unit_ok = |cells: &mut dyn Iterator<Item = usize>| {
        let mut seen = 0u16;
        for cell in cells {
            seen |= 1 << values[cell];
        }
        seen == 0x1ff
    };
    (0..9).all(|i| {
        unit_ok(&mut (0..9).map(|j| i * 9 + j))
            && unit_ok(&mut (0..9).map(|j| j * 9 + i))
            && unit_ok(&mut (0..9).map(|j| (i / 3 * 3 + j / 3) * 9 + i % 3 * 3 + j % 3))
    })
}

/// Counts completions of a partial board, stopping at `limit`.
pub fn solve_count(board: &mut Board, limit: usize) -> usize {
    let mut best: Option<(usize, u16)> = None;
    for cell in 0..81 {
        if board[cell] == EMPTY {
            let cand = candidates(board, cell);
            if best.map_or(true, |(_, b)| cand.count_ones() < b.count_ones()) {
                best = Some((cell, cand));
            }
        }
    }
    let Some((cell, cand)) = best else {
        return 1;
    };
    let mut total = 0;
    for d in 0..9u8 {
        if cand & (1 << d) != 0 {
            board[cell] = d;
            total += solve_count(board, limit - total);
            if total >= limit {
                break;
            }
        }
    }
    board[cell] = EMPTY;
    total
}

/// Number of completions of the givens of `ex` (up to `limit`); more than
/// one means the masked board is ambiguous.
pub fn count_completions(ex: &Example, limit: usize) -> usize {
    let values = ex.values().expect("validated example");
    let given = ex.given_blocks();
    let mut board = [EMPTY; 81];
    for i in 0..81 {
        if given[i] {
            board[i] = values[i] as u8;
        }
    }
    solve_count(&mut board, limit)
}

/// Random filled boards with `mask` cells hidden. Uniqueness of the
/// completion is not enforced.
pub fn sudoku_generate(count: usize, mask: MaskSpec, seed: u64) -> Vec<Example> {
    (0..count)
        .into_par_iter()
        .map(|idx| {
            let mut rng = example_rng(seed, idx);
            let mut board = [EMPTY; 81];
            assert!(fill(&mut board, &mut rng), "an empty board always fills");
            let hidden = mask.draw(&mut rng).min(81);
            let mut cells: Vec<usize> = (0..81).collect();
            cells.shuffle(&mut rng);
            let mut given = [true; 81];
            for &c in &cells[..hidden] {
                given[c] = false;
            }
            let values: Vec<usize> = board.iter().map(|&d| d as usize).collect();
            Example::from_values(Task::Sudoku9, &values, &given)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{generator_set, orbits, pair_orbits};

    #[test]
    fn generated_boards_are_valid() {
        let data = sudoku_generate(30, MaskSpec::Fixed(0), 1);
        for ex in &data {
            ex.validate().unwrap();
            assert!(is_valid_board(&ex.values().unwrap()));
            assert_eq!(ex.masked_count(), 0);
        }
        assert_ne!(data[0], data[1]);
    }

    #[test]
    fn mask_counts_follow_the_range() {
        let data = sudoku_generate(200, MaskSpec::Range(31, 42), 2);
        let counts: Vec<usize> = data.iter().map(|e| 81 - e.masked_count()).collect();
        assert!(counts.iter().all(|&g| (39..=50).contains(&g)));
        assert_eq!(*counts.iter().min().unwrap(), 39);
        assert_eq!(*counts.iter().max().unwrap(), 50);
    }

    #[test]
    fn same_seed_same_data() {
        assert_eq!(
            sudoku_generate(5, MaskSpec::Fixed(31), 3),
            sudoku_generate(5, MaskSpec::Fixed(31), 3)
        );
        assert_ne!(
            sudoku_generate(5, MaskSpec::Fixed(31), 3),
            sudoku_generate(5, MaskSpec::Fixed(31), 4)
        );
    }

    #[test]
    fn group_has_eighteen_basis_elements_and_one_orbit() {
        let g = sudoku_group();
        assert_eq!(g.degree(), 729);
        assert_eq!(g.basis_dim(), 18);
        let gens = generator_set(&g, 729).unwrap();
        assert_eq!(orbits(&gens).len(), 1);
        assert_eq!(pair_orbits(&gens).num_cells(), 18);
    }

    #[test]
    fn generators_preserve_validity() {
        let gens = generator_set(&sudoku_group(), 729).unwrap();
        let data = sudoku_generate(100, MaskSpec::Fixed(0), 5);
        for ex in &data {
            for g in gens.gens() {
                let mut moved = vec![false; 729];
                for i in 0..729 {
                    moved[g.apply(i)] = ex.bits[i];
                }
                let out = Example {
                    task: Task::Sudoku9,
                    bits: moved,
                    mask: ex.mask.clone(),
                };
                assert!(is_valid_board(&out.values().unwrap()));
            }
        }
    }

    #[test]
    fn completion_counting() {
        let ex = sudoku_generate(1, MaskSpec::Fixed(20), 6).remove(0);
        assert!(count_completions(&ex, 2) >= 1);
        let empty = Example::from_values(Task::Sudoku9, &[0; 81], &[false; 81]);
        assert_eq!(count_completions(&empty, 5), 5);
    }

    #[test]
    fn mask_spec_parsing() {
        assert_eq!("31..42".parse::<MaskSpec>().unwrap(), MaskSpec::Range(31, 42));
        assert_eq!("31..=42".parse::<MaskSpec>().unwrap(), MaskSpec::Range(31, 42));
        assert_eq!("21".parse::<MaskSpec>().unwrap(), MaskSpec::Fixed(21));
        assert!("x".parse::<MaskSpec>().is_err());
        assert!(MaskSpec::Range(40, 82).validate(81).is_err());
    }
}
