//! Browser bindings for the demo page. Exports take instance text and
//! return JSON strings.

use std::collections::BTreeMap;

use qubo_prep::engine::{reconstruct_solution, run_to_fixed_point, EngineOptions};
use qubo_prep::generator::{design_row, generate_instance, GeneratorSpec};
use qubo_prep::io::{format_instance, parse_instance};
use qubo_prep::oracle::brute_force_solve;
use qubo_prep::rules::Conclusion;
use qubo_prep::Coeff;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest problem the page will enumerate.
pub const SOLVE_LIMIT: usize = 22;
const EVENTS_SHOWN: usize = 200;

#[derive(Serialize)]
struct Event {
    pass: usize,
    rule: &'static str,
    effect: String,
    residual: bool,
}

#[derive(Serialize)]
struct ReduceOutput {
    n: usize,
    survivors: usize,
    percent: f64,
    offset_before: Coeff,
    offset_after: Coeff,
    pass_drops: Vec<usize>,
    firings: BTreeMap<&'static str, usize>,
    events: Vec<Event>,
    events_total: usize,
    reduced: String,
}

#[derive(Serialize)]
struct SolveOutput {
    optimum: Coeff,
    assignment: String,
    solved_size: usize,
    evaluated: u64,
}

fn effect(c: &Conclusion) -> String {
    match *c {
        Conclusion::Fix { var, value } => format!("x{var} = {value}"),
        Conclusion::PairFix { i, vi, h, vh } => format!("x{i} = {vi}, x{h} = {vh}"),
        Conclusion::SubstituteEqual { i, h } => format!("x{h} = x{i}"),
        Conclusion::SubstituteComplement { i, h } => format!("x{h} = 1 - x{i}"),
        Conclusion::Inequality(q) => format!("{:?} on x{}, x{}", q.kind, q.i, q.h),
    }
}

pub fn generate_text(n: usize, edges: usize, row: usize, seed: u64) -> Result<String, String> {
    let row = design_row(row).map_err(|e| e.to_string())?;
    let spec = GeneratorSpec::from_row(&row, n, edges, seed);
    let q = generate_instance(&spec).map_err(|e| e.to_string())?;
    Ok(format_instance(&q))
}

pub fn reduce_text(text: &str, residual: bool) -> Result<String, String> {
    let q = parse_instance(text).map_err(|e| e.to_string())?;
    let opts = EngineOptions {
        enable_residual: residual,
        ..EngineOptions::default()
    };
    let r = run_to_fixed_point(&q, &opts).map_err(|e| e.to_string())?;
    let n = q.n();
    let survivors = r.map.survivors.len();
    let out = ReduceOutput {
        n,
        survivors,
        percent: if n == 0 { 0.0 } else { (n - survivors) as f64 * 100.0 / n as f64 },
        offset_before: q.offset(),
        offset_after: r.reduced.offset(),
        pass_drops: r.log.passes.iter().map(|p| p.dropped).collect(),
        firings: r.log.per_rule_counts.iter().map(|(k, v)| (k.label(), *v)).collect(),
        events: r
            .log
            .events
            .iter()
            .take(EVENTS_SHOWN)
            .map(|e| Event {
                pass: e.pass,
                rule: e.verdict.rule.label(),
                effect: effect(&e.verdict.conclusion),
                residual: e.residual,
            })
            .collect(),
        events_total: r.log.events.len(),
        reduced: format_instance(&r.reduced),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

pub fn solve_text(text: &str, preprocess: bool) -> Result<String, String> {
    let q = parse_instance(text).map_err(|e| e.to_string())?;
    let (optimum, x, solved_size, evaluated) = if preprocess {
        let r = run_to_fixed_point(&q, &EngineOptions::default()).map_err(|e| e.to_string())?;
        let rest = r.map.compact(&r.reduced);
        let opt = brute_force_solve(&rest, SOLVE_LIMIT).map_err(|e| e.to_string())?;
        let x = reconstruct_solution(&r.map, &opt.optima[0]).map_err(|e| e.to_string())?;
        (opt.optimum, x, rest.n(), opt.evaluated_count)
    } else {
        let opt = brute_force_solve(&q, SOLVE_LIMIT).map_err(|e| e.to_string())?;
        (opt.optimum, opt.optima[0].clone(), q.n(), opt.evaluated_count)
    };
    let out = SolveOutput {
        optimum,
        assignment: x.iter().map(|b| char::from(b'0' + b)).collect(),
        solved_size,
        evaluated,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn generate(n: usize, edges: usize, row: usize, seed: u32) -> Result<String, JsError> {
    generate_text(n, edges, row, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn reduce(text: &str, residual: bool) -> Result<String, JsError> {
    reduce_text(text, residual).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn solve(text: &str, preprocess: bool) -> Result<String, JsError> {
    solve_text(text, preprocess).map_err(|e| JsError::new(&e))
}
