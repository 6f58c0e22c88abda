//! Preprocessing for quadratic unconstrained binary optimization (QUBO).
//!
//! The objective is maximized:
//! `x_o = offset + sum_i c_i x_i + sum_{i<j} d_ij x_i x_j` over binary `x`,
//! with variables numbered from 1. [`engine::run_to_fixed_point`] fixes,
//! substitutes and pair-assigns variables using rules that always keep at
//! least one optimal solution, and returns the smaller problem together with a
//! map back to full solutions.

pub mod engine;
pub mod generator;
pub mod io;
pub mod model;
pub mod oracle;
pub mod rules;
pub mod state;

pub use engine::{
    reconstruct_solution, run_to_fixed_point, verify_fixed_point, EngineOptions, Reduction,
    ReductionLog, SolutionMap,
};
pub use generator::{generate_instance, GeneratorSpec};
pub use model::{Coeff, ModelError, QuboInstance};
pub use oracle::{brute_force_solve, check_equivalence};
pub use rules::{RuleId, RuleVerdict};
pub use state::ReductionState;
