//! Multi-pass scan that applies the rules until nothing more fires.
//!
//! Each pass walks the i-Group of the node list. A node is first tested for
//! fixing; if it survives it is paired with its neighbors already in the
//! h-Group, where pair assignments (3.x) and then substitutions (2.5/2.6) are
//! tried. During passes the substitutions are only tested with both conditions
//! drawn from the same row. Once a pass drops nothing, a residual sweep tests
//! the mixed combinations, and any hit restarts the passes.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Coeff, QuboInstance};
use crate::rules::{
    self, Conclusion, RuleId, RuleVerdict, StrongFlags,
};
use crate::state::{ReductionState, Recorded};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("max_passes must be at least 1")]
    ZeroPasses,
    #[error("rule {0:?} cannot appear in the pair rule order")]
    NotAPairRule(RuleId),
    #[error("reduced solution has {got} values for {expected} survivors")]
    SurvivorCount { expected: usize, got: usize },
    #[error("variable {0} could not be resolved from the solution map")]
    Unresolved(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineOptions {
    pub max_passes: Option<usize>,
    /// Pair rules tried on each `(i, h)`; any of 3.1, 3.2, 3.3, 3.4, 2.5, 2.6.
    pub rule_order: Vec<RuleId>,
    pub enable_residual: bool,
    pub emit_inequalities: bool,
    /// Count pair visits per pass and flag any pair seen twice in one pass.
    pub track_pair_visits: bool,
    #[doc(hidden)]
    #[serde(skip, default = "yes")]
    pub complement_neighbor_update: bool,
}

fn yes() -> bool {
    true
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            max_passes: None,
            rule_order: vec![
                RuleId::R3_1,
                RuleId::R3_2,
                RuleId::R3_3,
                RuleId::R3_4,
                RuleId::R2_5,
                RuleId::R2_6,
            ],
            enable_residual: true,
            emit_inequalities: false,
            track_pair_visits: false,
            complement_neighbor_update: true,
        }
    }
}

impl EngineOptions {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.max_passes == Some(0) {
            return Err(EngineError::ZeroPasses);
        }
        for &r in &self.rule_order {
            if !matches!(
                r,
                RuleId::R3_1 | RuleId::R3_2 | RuleId::R3_3 | RuleId::R3_4 | RuleId::R2_5 | RuleId::R2_6
            ) {
                return Err(EngineError::NotAPairRule(r));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEvent {
    pub pass: usize,
    pub verdict: RuleVerdict,
    pub live_after: usize,
    /// Found by the residual sweep rather than during a pass.
    pub residual: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub pass: usize,
    pub verdict: RuleVerdict,
    pub m_bound: Coeff,
    /// State clock when the inequality was derived.
    pub snapshot: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassSummary {
    pub pass: usize,
    /// Nodes taken as `i` during the pass.
    pub examined: usize,
    pub dropped: usize,
    pub live_after: usize,
    /// The pass stopped at the recorded cutoff before exhausting the i-Group.
    pub stopped_at_cutoff: bool,
    pub pair_visits: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionLog {
    pub events: Vec<LogEvent>,
    pub inequality_records: Vec<InequalityRecord>,
    pub per_rule_counts: BTreeMap<RuleId, usize>,
    pub passes: Vec<PassSummary>,
    pub residual_substitutions: usize,
    /// Pairs seen more than once within a single pass (only with `track_pair_visits`).
    pub duplicate_pair_visits: u64,
    /// Every pair probe as `(pass, i, h, events applied so far)`, only with
    /// `track_pair_visits`.
    #[serde(default)]
    pub pair_trace: Vec<(usize, usize, usize, usize)>,
}

impl ReductionLog {
    pub fn pass_count(&self) -> usize {
        self.passes.len()
    }

    /// Variables removed, per rule.
    pub fn dropped_by_rule(&self) -> BTreeMap<RuleId, usize> {
        let mut out = BTreeMap::new();
        for e in &self.events {
            *out.entry(e.verdict.rule).or_insert(0) += e.verdict.conclusion.dropped();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Identity {
    SameAs(usize),
    ComplementOf(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionMap {
    pub n: usize,
    pub assignments: Vec<(usize, u8)>,
    pub identities: Vec<(usize, Identity)>,
    pub survivors: Vec<usize>,
}

impl SolutionMap {
    pub fn from_state(state: &ReductionState) -> Self {
        let mut assignments = Vec::new();
        let mut identities = Vec::new();
        for r in state.history() {
            match *r {
                Recorded::Fixed { var, value } => assignments.push((var, value)),
                Recorded::Same { var, of } => identities.push((var, Identity::SameAs(of))),
                Recorded::Complement { var, of } => {
                    identities.push((var, Identity::ComplementOf(of)))
                }
            }
        }
        Self {
            n: state.n(),
            assignments,
            identities,
            survivors: state.free_vars().collect(),
        }
    }

    /// The reduced instance restricted to the survivors, numbered densely in
    /// survivor order.
    pub fn compact(&self, reduced: &QuboInstance) -> QuboInstance {
        reduced.renumbered(&self.survivors)
    }

    /// Inverse of [`compact`](Self::compact): moves a survivor-numbered
    /// instance back to the original numbering.
    pub fn expand(&self, compact: &QuboInstance) -> QuboInstance {
        let mut out = QuboInstance::new(self.n);
        out.set_offset(compact.offset());
        for (k, &v) in self.survivors.iter().enumerate() {
            out.set_linear(v, compact.linear(k + 1));
        }
        for (a, b, d) in compact.edges() {
            out.set_quadratic(self.survivors[a - 1], self.survivors[b - 1], d);
        }
        out
    }
}

/// Extends an assignment of the survivors (in `map.survivors` order) to all
/// original variables.
pub fn reconstruct_solution(map: &SolutionMap, reduced_solution: &[u8]) -> Result<Vec<u8>, EngineError> {
    if reduced_solution.len() != map.survivors.len() {
        return Err(EngineError::SurvivorCount {
            expected: map.survivors.len(),
            got: reduced_solution.len(),
        });
    }
    let mut x: Vec<Option<u8>> = vec![None; map.n + 1];
    for (&v, &val) in map.survivors.iter().zip(reduced_solution) {
        x[v] = Some(val);
    }
    for &(v, val) in &map.assignments {
        x[v] = Some(val);
    }
    // a referent is either a survivor, fixed, or eliminated later
    for &(v, id) in map.identities.iter().rev() {
        x[v] = Some(match id {
            Identity::SameAs(r) => x[r].ok_or(EngineError::Unresolved(v))?,
            Identity::ComplementOf(r) => 1 - x[r].ok_or(EngineError::Unresolved(v))?,
        });
    }
    (1..=map.n)
        .map(|v| x[v].ok_or(EngineError::Unresolved(v)))
        .collect()
}

/// Per-variable strongly-holds flags and the lists built from them.
#[derive(Debug, Clone, Default)]
pub struct ResidualScheduler {
    pub flags: Vec<StrongFlags>,
    pub a_list: Vec<usize>,
    pub b_list: Vec<usize>,
    pub ab_list: Vec<usize>,
    pub c_list: Vec<usize>,
    pub d_list: Vec<usize>,
    pub cd_list: Vec<usize>,
}

impl ResidualScheduler {
    pub fn build(state: &ReductionState) -> Self {
        let mut s = Self {
            flags: vec![StrongFlags::default(); state.n() + 1],
            ..Self::default()
        };
        let mut order: Vec<usize> = state.nodes().survivors().collect();
        order.sort_unstable();
        for i in order {
            let f = rules::strong_flags(state, i);
            s.flags[i] = f;
            if f.a {
                s.a_list.push(i);
            }
            if f.b {
                s.b_list.push(i);
            }
            if f.a || f.b {
                s.ab_list.push(i);
            }
            if f.c {
                s.c_list.push(i);
            }
            if f.d {
                s.d_list.push(i);
            }
            if f.c || f.d {
                s.cd_list.push(i);
            }
        }
        s
    }

    /// First Rule 2.5 or 2.6 verdict reachable through a mixed combination:
    /// (A at one end, B at the other) for 2.5, (C, C) or (D, D) for 2.6.
    pub fn find(&self, state: &ReductionState) -> Option<RuleVerdict> {
        for &i in &self.ab_list {
            let fi = self.flags[i];
            for (h, d) in state.neighbors(i) {
                let fh = self.flags[h];
                if d < 0 && ((fi.a && fh.b) || (fi.b && fh.a)) && fixing_silent(state, i, h) {
                    if let Some(v) = rules::rule_complement_pair(state, i, h) {
                        return Some(v);
                    }
                }
            }
        }
        for &i in &self.cd_list {
            let fi = self.flags[i];
            for (h, d) in state.neighbors(i) {
                let fh = self.flags[h];
                if d > 0 && ((fi.c && fh.c) || (fi.d && fh.d)) && fixing_silent(state, i, h) {
                    if let Some(v) = rules::rule_equal_pair(state, i, h) {
                        return Some(v);
                    }
                }
            }
        }
        None
    }
}

fn fixing_silent(state: &ReductionState, i: usize, h: usize) -> bool {
    rules::rule_fix(state, i).is_none() && rules::rule_fix(state, h).is_none()
}

/// The first reducing rule that applies anywhere, by a naive sweep over all
/// free variables and edges.
pub fn find_applicable(state: &ReductionState) -> Option<RuleVerdict> {
    for i in state.free_vars() {
        if let Some(v) = rules::rule_fix(state, i) {
            return Some(v);
        }
    }
    for i in state.free_vars() {
        for (h, _) in state.neighbors(i) {
            if h < i {
                continue;
            }
            let found = rules::rule_pair_zero(state, i, h)
                .or_else(|| rules::rule_pair_one_zero(state, i, h))
                .or_else(|| rules::rule_pair_zero_one(state, i, h))
                .or_else(|| rules::rule_pair_one(state, i, h))
                .or_else(|| rules::rule_complement_pair(state, i, h))
                .or_else(|| rules::rule_equal_pair(state, i, h));
            if found.is_some() {
                return found;
            }
        }
    }
    None
}

/// True when no fixing, pair-assignment or substitution rule fires anywhere.
pub fn verify_fixed_point(state: &ReductionState) -> bool {
    find_applicable(state).is_none()
}

/// Every inequality derivable on the current state, with its penalty bound.
pub fn mine_inequalities(state: &ReductionState) -> Vec<InequalityRecord> {
    let mut out = Vec::new();
    for i in state.free_vars() {
        for (h, _) in state.neighbors(i) {
            if h > i {
                for v in rules::derive_pair_inequalities(state, i, h) {
                    out.push(InequalityRecord {
                        pass: 0,
                        m_bound: rules::m_lower_bound(state, &v).expect("pair verdict"),
                        verdict: v,
                        snapshot: state.clock(),
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Reduction {
    /// Surviving problem in original variable numbering.
    pub reduced: QuboInstance,
    pub log: ReductionLog,
    pub map: SolutionMap,
}

pub fn run_to_fixed_point(instance: &QuboInstance, options: &EngineOptions) -> Result<Reduction, EngineError> {
    let mut state = ReductionState::new(instance);
    let log = reduce_state(&mut state, options)?;
    Ok(Reduction {
        reduced: state.working_instance(),
        map: SolutionMap::from_state(&state),
        log,
    })
}

/// Runs the engine on an existing state, leaving the state at the end result.
pub fn reduce_state(state: &mut ReductionState, options: &EngineOptions) -> Result<ReductionLog, EngineError> {
    options.validate()?;
    state.set_complement_neighbor_update(options.complement_neighbor_update);
    let mut runner = Runner::new(state, options);
    runner.run();
    Ok(runner.log)
}

/// Runs a single pass over the current i-Group.
pub fn run_first_pass(state: &mut ReductionState, options: &EngineOptions) -> Result<ReductionLog, EngineError> {
    options.validate()?;
    state.set_complement_neighbor_update(options.complement_neighbor_update);
    let mut runner = Runner::new(state, options);
    runner.pass = 1;
    runner.run_pass();
    Ok(runner.log)
}

enum PairOutcome {
    Nothing,
    BothFixed,
    Substituted,
}

struct Runner<'a> {
    state: &'a mut ReductionState,
    opts: &'a EngineOptions,
    log: ReductionLog,
    last_exam: Vec<Option<u64>>,
    pass: usize,
    seen: HashSet<(usize, usize)>,
    pair_visits: u64,
}

impl<'a> Runner<'a> {
    fn new(state: &'a mut ReductionState, opts: &'a EngineOptions) -> Self {
        let n = state.n();
        Self {
            state,
            opts,
            log: ReductionLog::default(),
            last_exam: vec![None; n + 1],
            pass: 0,
            seen: HashSet::new(),
            pair_visits: 0,
        }
    }

    fn run(&mut self) {
        loop {
            loop {
                if self.opts.max_passes.is_some_and(|m| self.pass >= m) {
                    return;
                }
                self.pass += 1;
                if self.run_pass() == 0 {
                    break;
                }
                self.state.nodes_mut().begin_pass();
            }
            if !self.opts.enable_residual || self.state.live() == 0 {
                return;
            }
            let scheduler = ResidualScheduler::build(self.state);
            let Some(v) = scheduler.find(self.state) else {
                return;
            };
            self.apply(v, true);
            self.log.residual_substitutions += 1;
            self.state.nodes_mut().restart();
        }
    }

    /// One pass; returns the number of variables dropped.
    fn run_pass(&mut self) -> usize {
        let live_before = self.state.live();
        let mut examined = 0;
        self.seen.clear();
        self.pair_visits = 0;
        let mut stopped_at_cutoff = false;
        loop {
            let c = self.state.nodes().cursor();
            if c.i_loc > c.i_loc_end {
                break;
            }
            if c.i_loc > c.end_loc {
                stopped_at_cutoff = true;
                break;
            }
            let i = self.state.nodes().at(c.i_loc);
            examined += 1;
            self.examine(i);
        }
        let dropped = live_before - self.state.live();
        self.log.passes.push(PassSummary {
            pass: self.pass,
            examined,
            dropped,
            live_after: self.state.live(),
            stopped_at_cutoff,
            pair_visits: self.pair_visits,
        });
        dropped
    }

    fn needs_exam(&self, v: usize) -> bool {
        self.last_exam[v].is_none_or(|t| self.state.touched(v) > t)
    }

    /// Applies Rules 1.0/2.0 to `v`; true if `v` was fixed.
    fn try_fix(&mut self, v: usize) -> bool {
        self.last_exam[v] = Some(self.state.clock());
        match rules::rule_fix(self.state, v) {
            Some(verdict) => {
                self.apply(verdict, false);
                true
            }
            None => false,
        }
    }

    fn examine(&mut self, i: usize) {
        let live_before = self.state.live();
        if self.try_fix(i) {
            return;
        }
        let nodes = self.state.nodes();
        let mut partners: Vec<(usize, usize)> = self
            .state
            .neighbors(i)
            .filter(|&(h, _)| nodes.in_h_group(h))
            .map(|(h, _)| (nodes.position(h), h))
            .collect();
        partners.sort_unstable();

        for (_, h) in partners {
            if !self.state.is_free(h) || self.state.d(i, h) == 0 {
                continue;
            }
            if self.needs_exam(h) && self.try_fix(h) {
                // i's row changed with h's removal
                if self.try_fix(i) {
                    return;
                }
                continue;
            }
            self.pair_visits += 1;
            if self.opts.track_pair_visits {
                if !self.seen.insert((i.min(h), i.max(h))) {
                    self.log.duplicate_pair_visits += 1;
                }
                self.log.pair_trace.push((self.pass, i, h, self.log.events.len()));
            }
            match self.try_pair(i, h) {
                PairOutcome::Nothing => {}
                PairOutcome::BothFixed => return,
                PairOutcome::Substituted => break,
            }
        }
        let nodes = self.state.nodes_mut();
        nodes.transfer_current();
        if self.state.live() < live_before {
            // i changed after some of its pairs were judged
            self.state.nodes_mut().mark_next_end();
        }
    }

    fn try_pair(&mut self, i: usize, h: usize) -> PairOutcome {
        for &rule in &self.opts.rule_order {
            let v = match rule {
                RuleId::R2_5 => rules::rule_complement_pair_reduced(self.state, i, h),
                RuleId::R2_6 => rules::rule_equal_pair_reduced(self.state, i, h),
                r => rules::apply_pair_rule(self.state, r, i, h),
            };
            if let Some(v) = v {
                let both = matches!(v.conclusion, Conclusion::PairFix { .. });
                self.apply(v, false);
                return if both {
                    PairOutcome::BothFixed
                } else {
                    PairOutcome::Substituted
                };
            }
        }
        if self.opts.emit_inequalities {
            for v in rules::derive_pair_inequalities(self.state, i, h) {
                self.log.inequality_records.push(InequalityRecord {
                    pass: self.pass,
                    m_bound: rules::m_lower_bound(self.state, &v).expect("pair verdict"),
                    verdict: v,
                    snapshot: self.state.clock(),
                });
            }
        }
        PairOutcome::Nothing
    }

    fn apply(&mut self, v: RuleVerdict, residual: bool) {
        let st = &mut *self.state;
        let res = match v.conclusion {
            Conclusion::Fix { var, value } => st.apply_fix(var, value),
            Conclusion::PairFix { i, vi, h, vh } => st.apply_fix(i, vi).and_then(|_| st.apply_fix(h, vh)),
            Conclusion::SubstituteEqual { i, h } => st.apply_substitution_equal(i, h),
            Conclusion::SubstituteComplement { i, h } => st.apply_substitution_complement(i, h),
            Conclusion::Inequality(_) => Ok(()),
        };
        if let Err(e) = res {
            panic!("engine applied {v:?} to an invalid state: {e}");
        }
        *self.log.per_rule_counts.entry(v.rule).or_insert(0) += 1;
        self.log.events.push(LogEvent {
            pass: self.pass,
            verdict: v,
            live_after: self.state.live(),
            residual,
        });
    }
}
