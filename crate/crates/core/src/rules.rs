//! Fixing, inequality, substitution and pair-assignment rules.
//!
//! Every rule is a pure function of a [`ReductionState`]. Conditions are
//! evaluated in exact integer arithmetic so that the non-strict form ("some
//! optimum") and the strict form ("every optimum") can be told apart; the
//! latter is reported as `unique`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Coeff, QuboInstance};
use crate::state::ReductionState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleId {
    R1_0,
    R2_0,
    R1_1,
    R1_1p,
    R2_1,
    R2_1p,
    R1_2,
    R1_2p,
    R2_2,
    R2_2p,
    R2_5,
    R2_6,
    R3_1,
    R3_2,
    R3_3,
    R3_4,
}

impl RuleId {
    pub const ALL: [RuleId; 16] = [
        RuleId::R1_0,
        RuleId::R2_0,
        RuleId::R1_1,
        RuleId::R1_1p,
        RuleId::R2_1,
        RuleId::R2_1p,
        RuleId::R1_2,
        RuleId::R1_2p,
        RuleId::R2_2,
        RuleId::R2_2p,
        RuleId::R2_5,
        RuleId::R2_6,
        RuleId::R3_1,
        RuleId::R3_2,
        RuleId::R3_3,
        RuleId::R3_4,
    ];

    /// Rules whose verdicts change the problem (the rest only mine inequalities).
    pub const REDUCING: [RuleId; 8] = [
        RuleId::R1_0,
        RuleId::R2_0,
        RuleId::R2_5,
        RuleId::R2_6,
        RuleId::R3_1,
        RuleId::R3_2,
        RuleId::R3_3,
        RuleId::R3_4,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RuleId::R1_0 => "1.0",
            RuleId::R2_0 => "2.0",
            RuleId::R1_1 => "1.1",
            RuleId::R1_1p => "1.1'",
            RuleId::R2_1 => "2.1",
            RuleId::R2_1p => "2.1'",
            RuleId::R1_2 => "1.2",
            RuleId::R1_2p => "1.2'",
            RuleId::R2_2 => "2.2",
            RuleId::R2_2p => "2.2'",
            RuleId::R2_5 => "2.5",
            RuleId::R2_6 => "2.6",
            RuleId::R3_1 => "3.1",
            RuleId::R3_2 => "3.2",
            RuleId::R3_3 => "3.3",
            RuleId::R3_4 => "3.4",
        }
    }

    pub fn is_inequality(self) -> bool {
        matches!(
            self,
            RuleId::R1_1
                | RuleId::R1_1p
                | RuleId::R2_1
                | RuleId::R2_1p
                | RuleId::R1_2
                | RuleId::R1_2p
                | RuleId::R2_2
                | RuleId::R2_2p
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InequalityKind {
    /// x_i + x_h <= 1
    AtMostOne,
    /// x_i + x_h >= 1
    AtLeastOne,
    /// x_i <= x_h
    ILeH,
    /// x_h <= x_i
    HLeI,
}

impl InequalityKind {
    pub fn holds(self, xi: u8, xh: u8) -> bool {
        match self {
            InequalityKind::AtMostOne => xi + xh <= 1,
            InequalityKind::AtLeastOne => xi + xh >= 1,
            InequalityKind::ILeH => xi <= xh,
            InequalityKind::HLeI => xh <= xi,
        }
    }

    /// The same constraint with the roles of `i` and `h` exchanged.
    pub fn swapped(self) -> Self {
        match self {
            InequalityKind::ILeH => InequalityKind::HLeI,
            InequalityKind::HLeI => InequalityKind::ILeH,
            k => k,
        }
    }
}

/// A two-variable inequality with `i < h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Inequality {
    pub kind: InequalityKind,
    pub i: usize,
    pub h: usize,
}

impl Inequality {
    /// Builds the canonical form of `kind` stated over `(i, h)` in that order.
    pub fn new(kind: InequalityKind, i: usize, h: usize) -> Self {
        if i < h {
            Self { kind, i, h }
        } else {
            Self {
                kind: kind.swapped(),
                i: h,
                h: i,
            }
        }
    }

    /// Checks the inequality on a full assignment (`x[k-1]` is variable `k`).
    pub fn satisfied_by(&self, x: &[u8]) -> bool {
        self.kind.holds(x[self.i - 1], x[self.h - 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conclusion {
    Fix { var: usize, value: u8 },
    PairFix { i: usize, vi: u8, h: usize, vh: u8 },
    /// `x_h = x_i`; `h` is eliminated.
    SubstituteEqual { i: usize, h: usize },
    /// `x_h = 1 - x_i`; `h` is eliminated.
    SubstituteComplement { i: usize, h: usize },
    Inequality(Inequality),
}

impl Conclusion {
    /// Whether a full assignment agrees with the conclusion.
    pub fn consistent_with(&self, x: &[u8]) -> bool {
        match *self {
            Conclusion::Fix { var, value } => x[var - 1] == value,
            Conclusion::PairFix { i, vi, h, vh } => x[i - 1] == vi && x[h - 1] == vh,
            Conclusion::SubstituteEqual { i, h } => x[i - 1] == x[h - 1],
            Conclusion::SubstituteComplement { i, h } => x[i - 1] + x[h - 1] == 1,
            Conclusion::Inequality(q) => q.satisfied_by(x),
        }
    }

    /// Variables removed from the problem when the conclusion is applied.
    pub fn dropped(&self) -> usize {
        match self {
            Conclusion::Fix { .. }
            | Conclusion::SubstituteEqual { .. }
            | Conclusion::SubstituteComplement { .. } => 1,
            Conclusion::PairFix { .. } => 2,
            Conclusion::Inequality(_) => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleVerdict {
    pub rule: RuleId,
    pub conclusion: Conclusion,
    pub unique: bool,
    /// `(i, h)` as probed, for pair rules.
    pub pair: Option<(usize, usize)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule {0:?} has no penalty bound")]
    NoBound(RuleId),
    #[error("penalty M = {m} must exceed the bound {bound}")]
    PenaltyTooSmall { m: Coeff, bound: Coeff },
    #[error("variables {0} and {1} do not form a pair of distinct variables in range")]
    BadPair(usize, usize),
}

/// Range of `V(x_i) = c_i + sum_j d_ij x_j` over all neighbor assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleEvaluation {
    pub min_v: Coeff,
    pub max_v: Coeff,
}

impl RuleEvaluation {
    pub fn of(state: &ReductionState, i: usize) -> Self {
        let c = state.c(i);
        Self {
            min_v: c + state.d_minus(i),
            max_v: c + state.d_plus(i),
        }
    }

    /// Range of `V(x_i)` once `x_h = 1` is fixed, for an edge of value `d`.
    pub fn given_one(self, d: Coeff) -> Self {
        if d < 0 {
            Self { min_v: self.min_v, max_v: self.max_v + d }
        } else {
            Self { min_v: self.min_v + d, max_v: self.max_v }
        }
    }

    /// Range of `V(x_i)` once `x_h = 0` is fixed, for an edge of value `d`.
    pub fn given_zero(self, d: Coeff) -> Self {
        if d < 0 {
            Self { min_v: self.min_v - d, max_v: self.max_v }
        } else {
            Self { min_v: self.min_v, max_v: self.max_v - d }
        }
    }
}

fn verdict(rule: RuleId, conclusion: Conclusion, unique: bool, pair: Option<(usize, usize)>) -> RuleVerdict {
    RuleVerdict {
        rule,
        conclusion,
        unique,
        pair,
    }
}

/// Rule 1.0: `c_i + D_i^- >= 0` makes `x_i = 1` optimal.
pub fn rule_fix_one(state: &ReductionState, i: usize) -> Option<RuleVerdict> {
    let v = state.c(i) + state.d_minus(i);
    (v >= 0).then(|| verdict(RuleId::R1_0, Conclusion::Fix { var: i, value: 1 }, v > 0, None))
}

/// Rule 2.0: `c_i + D_i^+ <= 0` makes `x_i = 0` optimal.
pub fn rule_fix_zero(state: &ReductionState, i: usize) -> Option<RuleVerdict> {
    let v = state.c(i) + state.d_plus(i);
    (v <= 0).then(|| verdict(RuleId::R2_0, Conclusion::Fix { var: i, value: 0 }, v < 0, None))
}

/// Rules 1.0 and 2.0. Both fire only on an isolated variable with `c_i = 0`,
/// which is then set to 0.
pub fn rule_fix(state: &ReductionState, i: usize) -> Option<RuleVerdict> {
    match (rule_fix_one(state, i), rule_fix_zero(state, i)) {
        (Some(_), Some(zero)) => Some(zero),
        (one, zero) => one.or(zero),
    }
}

// Row-local condition values for an edge of value `d` seen from `i`.
// For d < 0: `ge1` is the (A) quantity, `le1` the (B) quantity.
// For d > 0: `le0` is the (C) quantity, `ge0` the (D) quantity.
struct Side {
    c: Coeff,
    dm: Coeff,
    dp: Coeff,
}

impl Side {
    fn of(state: &ReductionState, i: usize) -> Self {
        Self {
            c: state.c(i),
            dm: state.d_minus(i),
            dp: state.d_plus(i),
        }
    }
    /// `c - d + D^-`, tested `>= 0`: rules 1.2 (d < 0)
    fn a(&self, d: Coeff) -> Coeff {
        self.c - d + self.dm
    }
    /// `c + d + D^+`, tested `<= 0`: rule 2.1 (d < 0)
    fn b(&self, d: Coeff) -> Coeff {
        self.c + d + self.dp
    }
    /// `c - d + D^+`, tested `<= 0`: rule 2.2 (d > 0)
    fn cc(&self, d: Coeff) -> Coeff {
        self.c - d + self.dp
    }
    /// `c + d + D^-`, tested `>= 0`: rule 1.1 (d > 0)
    fn dd(&self, d: Coeff) -> Coeff {
        self.c + d + self.dm
    }
}

/// Rules 1.1, 1.1', 2.1, 2.1', 1.2, 1.2', 2.2 and 2.2' on the edge `(i, h)`.
pub fn derive_pair_inequalities(state: &ReductionState, i: usize, h: usize) -> Vec<RuleVerdict> {
    let d = state.d(i, h);
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    let (si, sh) = (Side::of(state, i), Side::of(state, h));
    let mut push = |rule, kind, value: Coeff, ge: bool| {
        let holds = if ge { value >= 0 } else { value <= 0 };
        if holds {
            let strict = value != 0;
            let conclusion = Conclusion::Inequality(Inequality::new(kind, i, h));
            out.push(verdict(rule, conclusion, strict, Some((i, h))));
        }
    };
    if d > 0 {
        push(RuleId::R1_1, InequalityKind::HLeI, si.dd(d), true);
        push(RuleId::R1_1p, InequalityKind::ILeH, sh.dd(d), true);
        push(RuleId::R2_2, InequalityKind::ILeH, si.cc(d), false);
        push(RuleId::R2_2p, InequalityKind::HLeI, sh.cc(d), false);
    } else {
        push(RuleId::R2_1, InequalityKind::AtMostOne, si.b(d), false);
        push(RuleId::R2_1p, InequalityKind::AtMostOne, sh.b(d), false);
        push(RuleId::R1_2, InequalityKind::AtLeastOne, si.a(d), true);
        push(RuleId::R1_2p, InequalityKind::AtLeastOne, sh.a(d), true);
    }
    out
}

/// Which constituent conditions of Rule 2.5 or 2.6 hold, and strictly so.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SubstitutionTerms {
    /// Conditions (A1)/(C1) and (A2)/(C2), as (holds, strict).
    pub first: [(bool, bool); 2],
    /// Conditions (B1)/(D1) and (B2)/(D2).
    pub second: [(bool, bool); 2],
}

impl SubstitutionTerms {
    fn fires(&self) -> bool {
        (self.first[0].0 || self.first[1].0) && (self.second[0].0 || self.second[1].0)
    }

    fn unique(&self) -> bool {
        (self.first[0].1 || self.first[1].1) && (self.second[0].1 || self.second[1].1)
    }

    /// Same-side combinations only: (1 and 1) or (2 and 2).
    fn fires_same_side(&self) -> bool {
        (self.first[0].0 && self.second[0].0) || (self.first[1].0 && self.second[1].0)
    }
}

fn ge(v: Coeff) -> (bool, bool) {
    (v >= 0, v > 0)
}

fn le(v: Coeff) -> (bool, bool) {
    (v <= 0, v < 0)
}

pub fn complement_terms(state: &ReductionState, i: usize, h: usize) -> Option<SubstitutionTerms> {
    let d = state.d(i, h);
    if d >= 0 {
        return None;
    }
    let (si, sh) = (Side::of(state, i), Side::of(state, h));
    Some(SubstitutionTerms {
        first: [ge(si.a(d)), ge(sh.a(d))],
        second: [le(si.b(d)), le(sh.b(d))],
    })
}

pub fn equal_terms(state: &ReductionState, i: usize, h: usize) -> Option<SubstitutionTerms> {
    let d = state.d(i, h);
    if d <= 0 {
        return None;
    }
    let (si, sh) = (Side::of(state, i), Side::of(state, h));
    Some(SubstitutionTerms {
        first: [le(si.cc(d)), ge(sh.dd(d))],
        second: [ge(si.dd(d)), le(sh.cc(d))],
    })
}

/// Rule 2.5: `x_i + x_h = 1`, eliminating `h`.
pub fn rule_complement_pair(state: &ReductionState, i: usize, h: usize) -> Option<RuleVerdict> {
    let t = complement_terms(state, i, h)?;
    t.fires().then(|| {
        verdict(RuleId::R2_5, Conclusion::SubstituteComplement { i, h }, t.unique(), Some((i, h)))
    })
}

/// Rule 2.6: `x_i = x_h`, eliminating `h`.
pub fn rule_equal_pair(state: &ReductionState, i: usize, h: usize) -> Option<RuleVerdict> {
    let t = equal_terms(state, i, h)?;
    t.fires().then(|| {
        verdict(RuleId::R2_6, Conclusion::SubstituteEqual { i, h }, t.unique(), Some((i, h)))
    })
}

/// Rule 2.5 restricted to conditions taken from one row: (A1 and B1) or (A2 and B2).
pub fn rule_complement_pair_reduced(state: &ReductionState, i: usize, h: usize) -> Option<RuleVerdict> {
    let t = complement_terms(state, i, h)?;
    t.fires_same_side().then(|| {
        verdict(RuleId::R2_5, Conclusion::SubstituteComplement { i, h }, t.unique(), Some((i, h)))
    })
}

/// Rule 2.6 restricted to conditions taken from one row: (C1 and D1) or (C2 and D2).
pub fn rule_equal_pair_reduced(state: &ReductionState, i: usize, h: usize) -> Option<RuleVerdict> {
    let t = equal_terms(state, i, h)?;
    t.fires_same_side().then(|| {
        verdict(RuleId::R2_6, Conclusion::SubstituteEqual { i, h }, t.unique(), Some((i, h)))
    })
}

/// Rule 3.1: both zero.
pub fn rule_pair_zero(state: &ReductionState, i: usize, h: usize) -> Option<RuleVerdict> {
    let d = state.d(i, h);
    if d <= 0 {
        return None;
    }
    let v = state.c(i) + state.c(h) - d + state.d_plus(i) + state.d_plus(h);
    (v <= 0).then(|| {
        verdict(RuleId::R3_1, Conclusion::PairFix { i, vi: 0, h, vh: 0 }, v < 0, Some((i, h)))
    })
}

/// Rule 3.2: `x_i = 1, x_h = 0`. Called with `(h, i)` it is Rule 3.3.
pub fn rule_pair_one_zero(state: &ReductionState, i: usize, h: usize) -> Option<RuleVerdict> {
    let d = state.d(i, h);
    if d >= 0 {
        return None;
    }
    let v = -state.c(i) + state.c(h) + d - state.d_minus(i) + state.d_plus(h);
    (v <= 0).then(|| {
        verdict(RuleId::R3_2, Conclusion::PairFix { i, vi: 1, h, vh: 0 }, v < 0, Some((i, h)))
    })
}

/// Rule 3.3 in its own orientation: `x_i = 0, x_h = 1`.
pub fn rule_pair_zero_one(state: &ReductionState, i: usize, h: usize) -> Option<RuleVerdict> {
    rule_pair_one_zero(state, h, i).map(|v| RuleVerdict {
        rule: RuleId::R3_3,
        conclusion: Conclusion::PairFix { i, vi: 0, h, vh: 1 },
        pair: Some((i, h)),
        ..v
    })
}

/// Rule 3.4: both one.
pub fn rule_pair_one(state: &ReductionState, i: usize, h: usize) -> Option<RuleVerdict> {
    let d = state.d(i, h);
    if d <= 0 {
        return None;
    }
    let v = -state.c(i) - state.c(h) - d - state.d_minus(i) - state.d_minus(h);
    (v <= 0).then(|| {
        verdict(RuleId::R3_4, Conclusion::PairFix { i, vi: 1, h, vh: 1 }, v < 0, Some((i, h)))
    })
}

/// Evaluates one pair rule by id on `(i, h)`.
pub fn apply_pair_rule(state: &ReductionState, rule: RuleId, i: usize, h: usize) -> Option<RuleVerdict> {
    match rule {
        RuleId::R3_1 => rule_pair_zero(state, i, h),
        RuleId::R3_2 => rule_pair_one_zero(state, i, h),
        RuleId::R3_3 => rule_pair_zero_one(state, i, h),
        RuleId::R3_4 => rule_pair_one(state, i, h),
        RuleId::R2_5 => rule_complement_pair(state, i, h),
        RuleId::R2_6 => rule_equal_pair(state, i, h),
        _ => None,
    }
}

/// Lower bound that a penalty `M` must exceed to enforce the verdict's
/// inequality through [`penalty_rewrite`].
pub fn m_lower_bound(state: &ReductionState, v: &RuleVerdict) -> Result<Coeff, RuleError> {
    let Some((i, h)) = v.pair else {
        return Err(RuleError::NoBound(v.rule));
    };
    let pos = |x: Coeff| x.max(0);
    let up = |k: usize| pos(state.c(k) + state.d_plus(k));
    let down = |k: usize| pos(-(state.c(k) + state.d_minus(k)));
    let (ci, ch) = (state.c(i), state.c(h));
    let (dmi, dmh, dpi, dph) = (
        state.d_minus(i),
        state.d_minus(h),
        state.d_plus(i),
        state.d_plus(h),
    );
    Ok(match v.rule {
        RuleId::R2_1 | RuleId::R2_2 => up(i),
        RuleId::R2_1p | RuleId::R2_2p => up(h),
        RuleId::R1_1 | RuleId::R1_2 => down(i),
        RuleId::R1_1p | RuleId::R1_2p => down(h),
        RuleId::R3_1 => pos(ci + ch + dpi + dph),
        RuleId::R3_2 => pos(-ci + ch - dmi + dph),
        RuleId::R3_3 => pos(ci - ch + dpi - dmh),
        RuleId::R3_4 => pos(-ci - ch - dmi - dmh),
        RuleId::R2_5 => {
            let t = complement_terms(state, i, h).ok_or(RuleError::NoBound(v.rule))?;
            let parts = [(t.first[0].0, down(i)), (t.first[1].0, down(h)), (t.second[0].0, up(i)), (t.second[1].0, up(h))];
            parts.iter().filter(|p| p.0).map(|p| p.1).max().unwrap_or(0)
        }
        RuleId::R2_6 => {
            let t = equal_terms(state, i, h).ok_or(RuleError::NoBound(v.rule))?;
            let parts = [(t.first[0].0, up(i)), (t.first[1].0, down(h)), (t.second[0].0, down(i)), (t.second[1].0, up(h))];
            parts.iter().filter(|p| p.0).map(|p| p.1).max().unwrap_or(0)
        }
        RuleId::R1_0 | RuleId::R2_0 => return Err(RuleError::NoBound(v.rule)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PenaltyMode {
    /// Overwrite the affected coefficients with `±M`.
    Replace,
    /// Add `-M` times the violation indicator to the objective.
    Add,
}

/// Rewrites `instance` so that violating `ineq` costs a penalty `m`.
pub fn penalty_rewrite(
    instance: &QuboInstance,
    ineq: Inequality,
    m: Coeff,
    bound: Coeff,
    mode: PenaltyMode,
) -> Result<QuboInstance, RuleError> {
    let Inequality { kind, i, h } = ineq;
    if i == h || i == 0 || h == 0 || i > instance.n() || h > instance.n() {
        return Err(RuleError::BadPair(i, h));
    }
    if m <= bound {
        return Err(RuleError::PenaltyTooSmall { m, bound });
    }
    let mut out = instance.clone();
    match (mode, kind) {
        (PenaltyMode::Replace, InequalityKind::AtMostOne) => out.set_quadratic(i, h, -m),
        (PenaltyMode::Replace, InequalityKind::HLeI) => {
            out.set_linear(h, -m);
            out.set_quadratic(i, h, m);
        }
        (PenaltyMode::Replace, InequalityKind::ILeH) => {
            out.set_linear(i, -m);
            out.set_quadratic(i, h, m);
        }
        (PenaltyMode::Replace, InequalityKind::AtLeastOne) => {
            out.set_linear(i, m);
            out.set_linear(h, m);
            out.set_quadratic(i, h, -m);
            out.set_offset(instance.offset() + m);
        }
        // x_i x_h
        (PenaltyMode::Add, InequalityKind::AtMostOne) => out.add_quadratic(i, h, -m),
        // x_h (1 - x_i)
        (PenaltyMode::Add, InequalityKind::HLeI) => {
            out.add_linear(h, -m);
            out.add_quadratic(i, h, m);
        }
        // x_i (1 - x_h)
        (PenaltyMode::Add, InequalityKind::ILeH) => {
            out.add_linear(i, -m);
            out.add_quadratic(i, h, m);
        }
        // (1 - x_i)(1 - x_h)
        (PenaltyMode::Add, InequalityKind::AtLeastOne) => {
            out.add_linear(i, m);
            out.add_linear(h, m);
            out.add_quadratic(i, h, -m);
            out.set_offset(instance.offset() - m);
        }
    }
    Ok(out)
}

/// Whether each of the (A), (B), (C), (D) conditions holds at the row's
/// extreme edge value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StrongFlags {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
}

pub fn strong_flags(state: &ReductionState, i: usize) -> StrongFlags {
    let s = Side::of(state, i);
    let min = state.min_d(i).map(|e| e.value);
    let max = state.max_d(i).map(|e| e.value);
    StrongFlags {
        a: min.is_some_and(|m| s.a(m) >= 0),
        b: min.is_some_and(|m| s.b(m) <= 0),
        c: max.is_some_and(|m| s.cc(m) <= 0),
        d: max.is_some_and(|m| s.dd(m) >= 0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::ReductionState;

    fn state(linear: Vec<Coeff>, edges: &[((usize, usize), Coeff)]) -> ReductionState {
        ReductionState::new(&QuboInstance::from_parts(linear, edges.iter().copied(), 0))
    }

    fn rules_of(v: &[RuleVerdict]) -> Vec<RuleId> {
        v.iter().map(|v| v.rule).collect()
    }

    #[test]
    fn fix_one_cases() {
        let v = rule_fix_one(&state(vec![5], &[]), 1).unwrap();
        assert_eq!(v.conclusion, Conclusion::Fix { var: 1, value: 1 });
        assert!(v.unique);
        assert!(rule_fix_one(&state(vec![1, 1], &[((1, 2), -2)]), 1).is_none());
        let v = rule_fix_one(&state(vec![2, 0], &[((1, 2), -2)]), 1).unwrap();
        assert!(!v.unique);
    }

    #[test]
    fn fix_zero_cases() {
        let v = rule_fix_zero(&state(vec![-5], &[]), 1).unwrap();
        assert_eq!(v.conclusion, Conclusion::Fix { var: 1, value: 0 });
        assert!(v.unique);
        assert!(rule_fix_zero(&state(vec![-1, -1], &[((1, 2), 2)]), 1).is_none());
        assert!(!rule_fix_zero(&state(vec![0], &[]), 1).unwrap().unique);
    }

    #[test]
    fn inequalities_negative_edge() {
        let s = state(vec![1, 1], &[((1, 2), -2)]);
        let v = derive_pair_inequalities(&s, 1, 2);
        assert_eq!(rules_of(&v), [RuleId::R2_1, RuleId::R2_1p, RuleId::R1_2, RuleId::R1_2p]);
        let kinds: Vec<_> = v
            .iter()
            .map(|v| match v.conclusion {
                Conclusion::Inequality(q) => q.kind,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(
            kinds,
            [
                InequalityKind::AtMostOne,
                InequalityKind::AtMostOne,
                InequalityKind::AtLeastOne,
                InequalityKind::AtLeastOne
            ]
        );
    }

    #[test]
    fn inequalities_positive_edge() {
        let s = state(vec![-1, -1], &[((1, 2), 2)]);
        let v = derive_pair_inequalities(&s, 1, 2);
        // 1.1 and 1.1' hold (-1 + 2 + 0 >= 0); so do 2.2 and 2.2' (-1 - 2 + 2 <= 0)
        assert_eq!(rules_of(&v), [RuleId::R1_1, RuleId::R1_1p, RuleId::R2_2, RuleId::R2_2p]);
        let c = |k: usize| v[k].conclusion;
        assert_eq!(c(0), Conclusion::Inequality(Inequality::new(InequalityKind::HLeI, 1, 2)));
        assert_eq!(c(1), Conclusion::Inequality(Inequality::new(InequalityKind::ILeH, 1, 2)));
        assert!(derive_pair_inequalities(&state(vec![1, 1], &[]), 1, 2).is_empty());
    }

    #[test]
    fn inequality_canonical_orientation() {
        let q = Inequality::new(InequalityKind::ILeH, 5, 2);
        assert_eq!(q, Inequality { kind: InequalityKind::HLeI, i: 2, h: 5 });
        let mut x = vec![0; 5];
        x[4] = 1;
        // x_5 <= x_2 fails
        assert!(!q.satisfied_by(&x));
    }

    #[test]
    fn complement_pair_cases() {
        let v = rule_complement_pair(&state(vec![1, 1], &[((1, 2), -2)]), 1, 2).unwrap();
        assert_eq!(v.conclusion, Conclusion::SubstituteComplement { i: 1, h: 2 });
        assert!(rule_complement_pair(&state(vec![1, 1], &[((1, 2), -1)]), 1, 2).is_some());
        assert!(rule_complement_pair(&state(vec![1, 1], &[((1, 2), 1)]), 1, 2).is_none());
    }

    #[test]
    fn equal_pair_cases() {
        let v = rule_equal_pair(&state(vec![-1, -1], &[((1, 2), 2)]), 1, 2).unwrap();
        assert_eq!(v.conclusion, Conclusion::SubstituteEqual { i: 1, h: 2 });
        assert!(rule_equal_pair(&state(vec![-1, -1], &[((1, 2), 1)]), 1, 2).is_some());
        assert!(rule_equal_pair(&state(vec![-1, -1], &[((1, 2), -1)]), 1, 2).is_none());
    }

    #[test]
    fn pair_zero_cases() {
        let v = rule_pair_zero(&state(vec![-2, -2], &[((1, 2), 3)]), 1, 2).unwrap();
        assert_eq!(v.conclusion, Conclusion::PairFix { i: 1, vi: 0, h: 2, vh: 0 });
        assert!(v.unique);
        assert!(!rule_pair_zero(&state(vec![-1, -1], &[((1, 2), 2)]), 1, 2).unwrap().unique);
        assert!(rule_pair_zero(&state(vec![-1, -1], &[((1, 2), 4)]), 1, 2).is_none());
    }

    #[test]
    fn pair_one_zero_cases() {
        let s = state(vec![2, 1], &[((1, 2), -3)]);
        let v = rule_pair_one_zero(&s, 1, 2).unwrap();
        assert_eq!(v.conclusion, Conclusion::PairFix { i: 1, vi: 1, h: 2, vh: 0 });
        assert!(rule_pair_one_zero(&s, 2, 1).is_none());
        let v = rule_pair_one_zero(&state(vec![1, 1], &[((1, 2), -2)]), 1, 2).unwrap();
        assert!(!v.unique);
        // the mirrored form reports 3.3 in the probe's own orientation
        let v = rule_pair_zero_one(&s, 2, 1).unwrap();
        assert_eq!(v.rule, RuleId::R3_3);
        assert_eq!(v.conclusion, Conclusion::PairFix { i: 2, vi: 0, h: 1, vh: 1 });
    }

    #[test]
    fn pair_one_cases() {
        let v = rule_pair_one(&state(vec![-1, -1], &[((1, 2), 3)]), 1, 2).unwrap();
        assert_eq!(v.conclusion, Conclusion::PairFix { i: 1, vi: 1, h: 2, vh: 1 });
        assert!(v.unique);
        assert!(!rule_pair_one(&state(vec![-1, -1], &[((1, 2), 2)]), 1, 2).unwrap().unique);
        assert!(rule_pair_one(&state(vec![-3, -3], &[((1, 2), 2)]), 1, 2).is_none());
    }

    #[test]
    fn bounds() {
        let s = state(vec![1, 1], &[((1, 2), -2)]);
        let v = derive_pair_inequalities(&s, 1, 2);
        assert_eq!(m_lower_bound(&s, &v[0]), Ok(1));
        assert_eq!(m_lower_bound(&s, &v[2]), Ok(1));
        let fix = rule_fix_one(&state(vec![5], &[]), 1).unwrap();
        assert_eq!(m_lower_bound(&s, &fix), Err(RuleError::NoBound(RuleId::R1_0)));
        let s = state(vec![-3, 1], &[((1, 2), -2)]);
        let v = derive_pair_inequalities(&s, 1, 2);
        // 2.1: -3 - 2 + 0 <= 0; bound Max(0, -3 + 0) = 0
        assert_eq!(v[0].rule, RuleId::R2_1);
        assert_eq!(m_lower_bound(&s, &v[0]), Ok(0));
    }

    #[test]
    fn penalty_replace_matches_printed_edits() {
        let q = QuboInstance::from_parts(vec![1, 1], [((1, 2), -2)], 0);
        let at_most = Inequality::new(InequalityKind::AtMostOne, 1, 2);
        let p = penalty_rewrite(&q, at_most, 2, 1, PenaltyMode::Replace).unwrap();
        assert_eq!(p, q);
        let at_least = Inequality::new(InequalityKind::AtLeastOne, 1, 2);
        let p = penalty_rewrite(&q, at_least, 2, 1, PenaltyMode::Replace).unwrap();
        assert_eq!((p.linear(1), p.linear(2), p.quadratic(1, 2), p.offset()), (2, 2, -2, 2));
        assert_eq!(
            penalty_rewrite(&q, at_most, 1, 1, PenaltyMode::Replace),
            Err(RuleError::PenaltyTooSmall { m: 1, bound: 1 })
        );
    }

    #[test]
    fn penalty_add_forms() {
        let q = QuboInstance::from_parts(vec![1, -1], [((1, 2), 3)], 5);
        for kind in [
            InequalityKind::AtMostOne,
            InequalityKind::AtLeastOne,
            InequalityKind::ILeH,
            InequalityKind::HLeI,
        ] {
            let ineq = Inequality::new(kind, 1, 2);
            let p = penalty_rewrite(&q, ineq, 10, 0, PenaltyMode::Add).unwrap();
            for mask in 0..4u64 {
                let x = crate::model::assignment_from_mask(mask, 2);
                let base = q.evaluate(&x).unwrap();
                let expect = if ineq.satisfied_by(&x) { base } else { base - 10 };
                assert_eq!(p.evaluate(&x).unwrap(), expect, "{kind:?} {x:?}");
            }
        }
    }

    #[test]
    fn strong_flags_single_edge() {
        let s = state(vec![1, 1], &[((1, 2), -2)]);
        let f = strong_flags(&s, 1);
        assert!(f.a && f.b && !f.c && !f.d);
        let s = state(vec![-1, -1], &[((1, 2), 2)]);
        let f = strong_flags(&s, 1);
        assert!(!f.a && !f.b && f.c && f.d);
    }

    #[test]
    fn evaluation_ranges() {
        let s = state(vec![1, 0, 0], &[((1, 2), -2), ((1, 3), 3)]);
        let e = RuleEvaluation::of(&s, 1);
        assert_eq!((e.min_v, e.max_v), (-1, 4));
        assert_eq!(e.given_one(-2), RuleEvaluation { min_v: -1, max_v: 2 });
        assert_eq!(e.given_zero(3), RuleEvaluation { min_v: -1, max_v: 1 });
        assert!(e.min_v <= e.max_v);
    }
}
