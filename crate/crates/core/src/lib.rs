//! Symmetry-aware differentiable MAXSAT layers.
//!
//! The crate is organised bottom-up:
//!
//! * [`group`]: permutation-group expressions, generators, pair-orbit bases
//!   and Reynolds projection.
//! * [`symfind`]: discovery of a group expression and conjugating permutation
//!   under which a matrix is approximately equivariant.
//! * [`solver`]: the coordinate-descent relaxation with its backward pass, in
//!   plain (`C = SᵀS`) and symmetric (`C = Σ θ_α B_α`) parametrisations.
//! * [`tasks`]: Sudoku and Rubik's-cube datasets, encodings and metrics.
//! * [`pipeline`]: training loops, the automatic-symmetry procedure and the
//!   discovery benchmark.
//! * [`cli`]: the command-line front end.

pub mod cli;
pub mod group;
pub mod pipeline;
pub mod solver;
pub mod symfind;
pub mod tasks;
