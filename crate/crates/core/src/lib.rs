//! Reasoning engine for first-order logic extended with concepts.

pub mod kernel;
pub mod parser;
pub mod typecheck;
pub mod structures;
pub mod evaluator;
pub mod grounder;
pub mod solver;
pub mod cli;
