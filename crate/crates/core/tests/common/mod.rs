#![allow(dead_code)]

use qubo_prep::engine::{EngineOptions, LogEvent};
use qubo_prep::rules::{self, Conclusion, RuleVerdict};
use qubo_prep::state::ReductionState;
use qubo_prep::{Coeff, QuboInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sweep instance: n in [2, 18], coefficients in [-10, 10], each pair an
/// edge with a per-instance probability in [0.1, 0.9].
pub fn sweep_instance(seed: u64) -> QuboInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=18usize);
    random_instance(&mut rng, n, 10)
}

pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, bound: Coeff) -> QuboInstance {
    let density = rng.gen_range(0.1..=0.9);
    let linear = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            if rng.gen_bool(density) {
                let mut d = 0;
                while d == 0 {
                    d = rng.gen_range(-bound..=bound);
                }
                edges.push(((i, j), d));
            }
        }
    }
    QuboInstance::from_parts(linear, edges, 0)
}

pub fn inst(linear: Vec<Coeff>, edges: &[((usize, usize), Coeff)]) -> QuboInstance {
    QuboInstance::from_parts(linear, edges.iter().copied(), 0)
}

/// Every verdict of every rule on the state, pair rules only where neither
/// endpoint can be fixed (their precondition).
pub fn all_verdicts(state: &ReductionState) -> Vec<RuleVerdict> {
    let mut out = Vec::new();
    let free: Vec<usize> = state.free_vars().collect();
    for &i in &free {
        out.extend(rules::rule_fix_one(state, i));
        out.extend(rules::rule_fix_zero(state, i));
    }
    for &i in &free {
        for (h, _) in state.neighbors(i) {
            if h < i || rules::rule_fix(state, i).is_some() || rules::rule_fix(state, h).is_some() {
                continue;
            }
            out.extend(rules::derive_pair_inequalities(state, i, h));
            out.extend(rules::rule_complement_pair(state, i, h));
            out.extend(rules::rule_equal_pair(state, i, h));
            out.extend(rules::rule_pair_zero(state, i, h));
            out.extend(rules::rule_pair_one_zero(state, i, h));
            out.extend(rules::rule_pair_zero_one(state, i, h));
            out.extend(rules::rule_pair_one(state, i, h));
        }
    }
    out
}

/// Re-applies logged events to a fresh state, calling `before` ahead of each.
pub fn replay(
    instance: &QuboInstance,
    events: &[LogEvent],
    options: &EngineOptions,
    mut before: impl FnMut(&ReductionState, &RuleVerdict),
) -> ReductionState {
    let mut s = ReductionState::new(instance);
    s.set_complement_neighbor_update(options.complement_neighbor_update);
    for e in events {
        before(&s, &e.verdict);
        match e.verdict.conclusion {
            Conclusion::Fix { var, value } => s.apply_fix(var, value).unwrap(),
            Conclusion::PairFix { i, vi, h, vh } => {
                s.apply_fix(i, vi).unwrap();
                s.apply_fix(h, vh).unwrap();
            }
            Conclusion::SubstituteEqual { i, h } => s.apply_substitution_equal(i, h).unwrap(),
            Conclusion::SubstituteComplement { i, h } => {
                s.apply_substitution_complement(i, h).unwrap()
            }
            Conclusion::Inequality(_) => {}
        }
    }
    s
}
