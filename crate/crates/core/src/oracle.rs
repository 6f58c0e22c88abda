//! Exhaustive solver for small instances and a soundness checker for
//! reductions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{reconstruct_solution, EngineError, SolutionMap};
use crate::model::{assignment_from_mask, Coeff, QuboInstance};

pub const DEFAULT_N_LIMIT: usize = 24;
/// Most optima listed before the list is truncated.
pub const OPTIMA_CAP: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{n} variables exceed the enumeration limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("no assignment satisfies the filter")]
    Infeasible,
    #[error(transparent)]
    Map(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub optimum: Coeff,
    /// Optimal assignments in enumeration order, `x[k-1]` for variable `k`.
    pub optima: Vec<Vec<u8>>,
    /// More optima exist than were listed.
    pub overflow: bool,
    pub evaluated_count: u64,
}

pub fn brute_force_solve(instance: &QuboInstance, n_limit: usize) -> Result<OracleResult, OracleError> {
    brute_force_solve_where(instance, n_limit, |_| true)
}

/// Like [`brute_force_solve`] but only over assignments accepted by `keep`.
pub fn brute_force_solve_where(
    instance: &QuboInstance,
    n_limit: usize,
    keep: impl Fn(&[u8]) -> bool,
) -> Result<OracleResult, OracleError> {
    let n = instance.n();
    if n > n_limit || n >= 64 {
        return Err(OracleError::TooLarge { n, limit: n_limit });
    }
    let adj = instance.adjacency();
    // gain[k]: change in value from switching variable k+1 on
    let mut gain: Vec<Coeff> = instance.linear_coeffs().to_vec();
    let mut x = vec![0u8; n];
    let mut value = instance.offset();
    let mut best: Option<Coeff> = None;
    let mut optima: Vec<u64> = Vec::new();
    let mut overflow = false;
    let mut mask = 0u64;
    let total = 1u64 << n;

    let mut step = 0u64;
    loop {
        if keep(&x) {
            match best {
                Some(b) if value < b => {}
                Some(b) if value == b => {
                    if optima.len() < OPTIMA_CAP {
                        optima.push(mask);
                    } else {
                        overflow = true;
                    }
                }
                _ => {
                    best = Some(value);
                    optima.clear();
                    optima.push(mask);
                    overflow = false;
                }
            }
        }
        step += 1;
        if step == total {
            break;
        }
        let k = step.trailing_zeros() as usize;
        let sign = if x[k] == 0 { 1 } else { -1 };
        value += sign * gain[k];
        x[k] ^= 1;
        mask ^= 1 << k;
        for &(j, d) in &adj[k] {
            gain[j - 1] += sign * d;
        }
    }
    let optimum = best.ok_or(OracleError::Infeasible)?;
    Ok(OracleResult {
        optimum,
        optima: optima.into_iter().map(|m| assignment_from_mask(m, n)).collect(),
        overflow,
        evaluated_count: total,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Optimal assignment of the survivors.
    pub reduced_assignment: Vec<u8>,
    pub reconstructed: Vec<u8>,
    /// Value of `reconstructed` on the original instance.
    pub original_value: Coeff,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub passed: bool,
    pub original_optimum: Coeff,
    pub reduced_optimum: Coeff,
    /// Reduced optima pushed through the map and re-evaluated.
    pub checked: usize,
    pub counterexample: Option<Counterexample>,
    pub message: String,
}

/// Compares the optimum of `original` with that of `reduced` (in original
/// numbering) and checks every reduced optimum reconstructs to an optimum of
/// `original`.
pub fn check_equivalence(
    original: &QuboInstance,
    reduced: &QuboInstance,
    map: &SolutionMap,
    n_limit: usize,
) -> Result<EquivalenceReport, OracleError> {
    let orig = brute_force_solve(original, n_limit)?;
    let mut survivor = vec![false; reduced.n() + 1];
    for &v in &map.survivors {
        if v <= reduced.n() {
            survivor[v] = true;
        }
    }
    let stray = (1..=reduced.n()).find(|&v| {
        !survivor[v]
            && (reduced.linear(v) != 0 || reduced.edges().any(|(i, j, _)| i == v || j == v))
    });
    let compact = map.compact(reduced);
    let red = brute_force_solve(&compact, n_limit)?;
    let mut report = EquivalenceReport {
        passed: true,
        original_optimum: orig.optimum,
        reduced_optimum: red.optimum,
        checked: 0,
        counterexample: None,
        message: String::new(),
    };
    if let Some(v) = stray {
        report.passed = false;
        report.message = format!("variable {v} has terms in the reduced instance but is not a survivor");
        return Ok(report);
    }
    for y in &red.optima {
        let x = reconstruct_solution(map, y)?;
        let value = original.evaluate(&x).expect("reconstruction covers every variable");
        report.checked += 1;
        if value != orig.optimum || red.optimum != orig.optimum {
            report.passed = false;
            report.message = if red.optimum != orig.optimum {
                format!("optimum {} of the original but {} after reduction", orig.optimum, red.optimum)
            } else {
                format!("reconstructed optimum scores {value} against {}", orig.optimum)
            };
            report.counterexample = Some(Counterexample {
                reduced_assignment: y.clone(),
                reconstructed: x,
                original_value: value,
            });
            return Ok(report);
        }
    }
    report.message = format!("optimum {} preserved; {} optima reconstructed", orig.optimum, report.checked);
    Ok(report)
}
