//! Mutable working state of a reduction run.
//!
//! [`ReductionState`] owns a working copy of the instance and keeps, for every
//! free variable `i`, the sums `D_i^-`/`D_i^+` of its negative/positive edge
//! values and the extreme edges `MaxD_i`/`MinD_i` with their neighbors. All
//! coefficient updates (fixing a variable, substituting `x_h = x_i` or
//! `x_h = 1 - x_i`) go through this module so that those quantities stay
//! exact without recomputation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Coeff, QuboInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateError {
    #[error("variable {0} is not free")]
    NotFree(usize),
    #[error("substitution needs two distinct variables, got {0} twice")]
    SameVariable(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarStatus {
    Free,
    FixedZero,
    FixedOne,
    /// `x = x_i`
    SameAs(usize),
    /// `x = 1 - x_i`
    ComplementOf(usize),
}

/// An extreme edge value of a row and the neighbor it leads to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeExtreme {
    pub value: Coeff,
    pub neighbor: usize,
}

/// Positions into the node list. Positions are 1-based; the h-Group is empty
/// when `h_loc1 > h_loc_end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanCursor {
    pub i_loc: usize,
    pub i_loc_end: usize,
    pub h_loc1: usize,
    pub h_loc_end: usize,
    pub end_loc: usize,
    pub next_end_loc: usize,
}

/// Sentinel for an `end_loc` that never stops a pass.
pub const LARGE: usize = usize::MAX;

/// The ordered node list split into an h-Group (`h_loc1..=h_loc_end`) and an
/// i-Group (`i_loc..=i_loc_end`). The h-Group always lies before `i_loc`.
#[derive(Debug, Clone)]
pub struct NodeList {
    list: Vec<usize>,
    /// Position of each variable, 0 once dropped.
    pos: Vec<usize>,
    cursor: ScanCursor,
}

impl NodeList {
    fn new(n: usize) -> Self {
        let mut list = vec![0; n + 1];
        let mut pos = vec![0; n + 1];
        for k in 1..=n {
            list[k] = k;
            pos[k] = k;
        }
        Self {
            list,
            pos,
            cursor: ScanCursor {
                i_loc: 1,
                i_loc_end: n,
                h_loc1: 1,
                h_loc_end: 0,
                end_loc: LARGE,
                next_end_loc: 0,
            },
        }
    }

    pub fn cursor(&self) -> ScanCursor {
        self.cursor
    }

    pub fn at(&self, loc: usize) -> usize {
        self.list[loc]
    }

    /// Node under examination, if the i-Group is not exhausted.
    pub fn current(&self) -> Option<usize> {
        let c = &self.cursor;
        (c.i_loc <= c.i_loc_end).then(|| self.list[c.i_loc])
    }

    pub fn in_h_group(&self, var: usize) -> bool {
        let p = self.pos[var];
        p != 0 && self.cursor.h_loc1 <= p && p <= self.cursor.h_loc_end
    }

    /// Location of `var` in the list, 0 once dropped.
    pub fn position(&self, var: usize) -> usize {
        self.pos[var]
    }

    pub fn contains(&self, var: usize) -> bool {
        self.pos[var] != 0
    }

    pub fn h_group(&self) -> &[usize] {
        let c = &self.cursor;
        if c.h_loc1 > c.h_loc_end {
            &[]
        } else {
            &self.list[c.h_loc1..=c.h_loc_end]
        }
    }

    pub fn i_group(&self) -> &[usize] {
        let c = &self.cursor;
        if c.i_loc > c.i_loc_end {
            &[]
        } else {
            &self.list[c.i_loc..=c.i_loc_end]
        }
    }

    /// Remaining nodes, h-Group first.
    pub fn survivors(&self) -> impl Iterator<Item = usize> + '_ {
        self.h_group().iter().chain(self.i_group()).copied()
    }

    fn remove(&mut self, var: usize) {
        let p = self.pos[var];
        debug_assert!(p != 0, "node {var} dropped twice");
        let c = &mut self.cursor;
        if p == c.i_loc && c.i_loc <= c.i_loc_end {
            c.i_loc += 1;
        } else if c.h_loc1 <= p && p <= c.h_loc_end {
            let h1 = self.list[c.h_loc1];
            self.list[p] = h1;
            self.pos[h1] = p;
            c.h_loc1 += 1;
        } else {
            debug_assert!(c.i_loc < p && p <= c.i_loc_end);
            let last = self.list[c.i_loc_end];
            self.list[p] = last;
            self.pos[last] = p;
            c.i_loc_end -= 1;
        }
        self.pos[var] = 0;
        c.next_end_loc = c.h_loc_end;
        c.end_loc = LARGE;
    }

    /// Moves the current i-Group node to the end of the h-Group.
    pub(crate) fn transfer_current(&mut self) {
        let c = &mut self.cursor;
        let node = self.list[c.i_loc];
        c.h_loc_end += 1;
        self.list[c.h_loc_end] = node;
        self.pos[node] = c.h_loc_end;
        c.i_loc += 1;
    }

    /// Records the current end of the h-Group as the cutoff for the next pass.
    pub(crate) fn mark_next_end(&mut self) {
        self.cursor.next_end_loc = self.cursor.h_loc_end;
    }

    /// Turns the h-Group into the next i-Group; `end_loc` takes the recorded cutoff.
    pub(crate) fn begin_pass(&mut self) {
        let c = &mut self.cursor;
        debug_assert!(c.i_loc > c.i_loc_end, "i-Group not exhausted");
        c.i_loc = c.h_loc1;
        c.i_loc_end = c.h_loc_end;
        c.h_loc_end = c.h_loc1 - 1;
        c.end_loc = c.next_end_loc;
    }

    /// Lays out all surviving nodes as a fresh i-Group with no cutoff.
    pub(crate) fn restart(&mut self) {
        let survivors: Vec<usize> = self.survivors().collect();
        for (k, &v) in survivors.iter().enumerate() {
            self.list[k + 1] = v;
            self.pos[v] = k + 1;
        }
        self.cursor = ScanCursor {
            i_loc: 1,
            i_loc_end: survivors.len(),
            h_loc1: 1,
            h_loc_end: 0,
            end_loc: LARGE,
            next_end_loc: 0,
        };
    }
}

/// One recorded reduction step, in application order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recorded {
    Fixed { var: usize, value: u8 },
    Same { var: usize, of: usize },
    Complement { var: usize, of: usize },
}

#[derive(Debug, Clone)]
pub struct ReductionState {
    n: usize,
    linear: Vec<Coeff>,
    adj: Vec<BTreeMap<usize, Coeff>>,
    offset: Coeff,
    d_minus: Vec<Coeff>,
    d_plus: Vec<Coeff>,
    max_d: Vec<Option<EdgeExtreme>>,
    min_d: Vec<Option<EdgeExtreme>>,
    status: Vec<VarStatus>,
    nodes: NodeList,
    live: usize,
    clock: u64,
    touched: Vec<u64>,
    history: Vec<Recorded>,
    complement_neighbor_update: bool,
}

impl ReductionState {
    pub fn new(instance: &QuboInstance) -> Self {
        let n = instance.n();
        let mut linear = vec![0; n + 1];
        linear[1..].copy_from_slice(instance.linear_coeffs());
        let mut adj = vec![BTreeMap::new(); n + 1];
        for (i, j, d) in instance.edges() {
            adj[i].insert(j, d);
            adj[j].insert(i, d);
        }
        let mut state = Self {
            n,
            linear,
            adj,
            offset: instance.offset(),
            d_minus: vec![0; n + 1],
            d_plus: vec![0; n + 1],
            max_d: vec![None; n + 1],
            min_d: vec![None; n + 1],
            status: vec![VarStatus::Free; n + 1],
            nodes: NodeList::new(n),
            live: n,
            clock: 0,
            touched: vec![0; n + 1],
            history: Vec::new(),
            complement_neighbor_update: true,
        };
        for i in 1..=n {
            let (neg, pos) = state.adj[i].values().fold((0, 0), |(neg, pos), &d| {
                if d < 0 {
                    (neg + d, pos)
                } else {
                    (neg, pos + d)
                }
            });
            state.d_minus[i] = neg;
            state.d_plus[i] = pos;
            state.recompute_row_extremes(i);
        }
        state
    }

    /// Disables the `c_j += d_hj` neighbor term of the complement substitution.
    /// Only useful to demonstrate that the term is required.
    #[doc(hidden)]
    pub fn set_complement_neighbor_update(&mut self, enabled: bool) {
        self.complement_neighbor_update = enabled;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> Coeff {
        self.offset
    }

    pub fn c(&self, i: usize) -> Coeff {
        self.linear[i]
    }

    /// Current `d_ih`, zero when there is no edge.
    pub fn d(&self, i: usize, h: usize) -> Coeff {
        self.adj[i].get(&h).copied().unwrap_or(0)
    }

    pub fn d_minus(&self, i: usize) -> Coeff {
        self.d_minus[i]
    }

    pub fn d_plus(&self, i: usize) -> Coeff {
        self.d_plus[i]
    }

    pub fn max_d(&self, i: usize) -> Option<EdgeExtreme> {
        self.max_d[i]
    }

    pub fn min_d(&self, i: usize) -> Option<EdgeExtreme> {
        self.min_d[i]
    }

    pub fn status(&self, i: usize) -> VarStatus {
        self.status[i]
    }

    pub fn is_free(&self, i: usize) -> bool {
        self.status[i] == VarStatus::Free
    }

    /// Number of free variables.
    pub fn live(&self) -> usize {
        self.live
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, Coeff)> + '_ {
        self.adj[i].iter().map(|(&j, &d)| (j, d))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn free_vars(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.n).filter(|&i| self.is_free(i))
    }

    pub fn nodes(&self) -> &NodeList {
        &self.nodes
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut NodeList {
        &mut self.nodes
    }

    /// Monotone counter bumped by every applied reduction.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    /// Clock value of the last change to `c_i` or row `i`.
    pub fn touched(&self, i: usize) -> u64 {
        self.touched[i]
    }

    pub fn history(&self) -> &[Recorded] {
        &self.history
    }

    /// Free part of the working problem, in original variable numbering.
    pub fn working_instance(&self) -> QuboInstance {
        let mut linear = vec![0; self.n];
        for i in self.free_vars() {
            linear[i - 1] = self.linear[i];
        }
        let edges: Vec<_> = (1..=self.n)
            .flat_map(|i| {
                self.adj[i]
                    .iter()
                    .filter(move |(&j, _)| i < j)
                    .map(move |(&j, &d)| ((i, j), d))
            })
            .collect();
        QuboInstance::from_parts(linear, edges, self.offset)
    }

    fn check_free(&self, i: usize) -> Result<(), StateError> {
        if i == 0 || i > self.n || !self.is_free(i) {
            return Err(StateError::NotFree(i));
        }
        Ok(())
    }

    /// Fixes `x_i = value`, folding its terms into the neighbors and the offset.
    pub fn apply_fix(&mut self, i: usize, value: u8) -> Result<(), StateError> {
        self.check_free(i)?;
        self.clock += 1;
        let row = std::mem::take(&mut self.adj[i]);
        for (&j, &d) in &row {
            self.adj[j].remove(&i);
            self.edge_changed(j, i, d, 0);
            if value == 1 {
                self.linear[j] += d;
            }
            self.touched[j] = self.clock;
        }
        if value == 1 {
            self.offset += self.linear[i];
        }
        self.status[i] = if value == 1 {
            VarStatus::FixedOne
        } else {
            VarStatus::FixedZero
        };
        self.history.push(Recorded::Fixed { var: i, value });
        self.retire(i);
        Ok(())
    }

    /// Eliminates `h` through `x_h = 1 - x_i`.
    pub fn apply_substitution_complement(&mut self, i: usize, h: usize) -> Result<(), StateError> {
        self.check_pair(i, h)?;
        self.clock += 1;
        let ch = self.linear[h];
        self.offset += ch;
        self.linear[i] -= ch;
        let row = std::mem::take(&mut self.adj[h]);
        for (&j, &dhj) in &row {
            self.adj[j].remove(&h);
            self.edge_changed(j, h, dhj, 0);
            self.touched[j] = self.clock;
            if j == i {
                // d_ih x_i (1 - x_i) vanishes on binaries
                continue;
            }
            // d_hj (1 - x_i) x_j = d_hj x_j - d_hj x_i x_j
            if self.complement_neighbor_update {
                self.linear[j] += dhj;
            }
            let old = self.d(i, j);
            self.set_edge(i, j, old - dhj);
        }
        self.touched[i] = self.clock;
        self.status[h] = VarStatus::ComplementOf(i);
        self.history.push(Recorded::Complement { var: h, of: i });
        self.retire(h);
        Ok(())
    }

    /// Eliminates `h` through `x_h = x_i`.
    pub fn apply_substitution_equal(&mut self, i: usize, h: usize) -> Result<(), StateError> {
        self.check_pair(i, h)?;
        self.clock += 1;
        let dih = self.d(i, h);
        self.linear[i] += self.linear[h] + dih;
        let row = std::mem::take(&mut self.adj[h]);
        for (&j, &dhj) in &row {
            self.adj[j].remove(&h);
            self.edge_changed(j, h, dhj, 0);
            self.touched[j] = self.clock;
            if j == i {
                continue;
            }
            let old = self.d(i, j);
            self.set_edge(i, j, old + dhj);
        }
        self.touched[i] = self.clock;
        self.status[h] = VarStatus::SameAs(i);
        self.history.push(Recorded::Same { var: h, of: i });
        self.retire(h);
        Ok(())
    }

    fn check_pair(&self, i: usize, h: usize) -> Result<(), StateError> {
        if i == h {
            return Err(StateError::SameVariable(i));
        }
        self.check_free(i)?;
        self.check_free(h)
    }

    fn retire(&mut self, v: usize) {
        self.d_minus[v] = 0;
        self.d_plus[v] = 0;
        self.max_d[v] = None;
        self.min_d[v] = None;
        self.touched[v] = self.clock;
        self.nodes.remove(v);
        self.live -= 1;
    }

    fn set_edge(&mut self, a: usize, b: usize, new: Coeff) {
        let old = self.d(a, b);
        if old == new {
            return;
        }
        if new == 0 {
            self.adj[a].remove(&b);
            self.adj[b].remove(&a);
        } else {
            self.adj[a].insert(b, new);
            self.adj[b].insert(a, new);
        }
        self.edge_changed(a, b, old, new);
        self.edge_changed(b, a, old, new);
    }

    /// Incremental D-sum and extreme repair for row `j` after edge `(j, k)`
    /// went from `old` to `new` (zero meaning absent).
    fn edge_changed(&mut self, j: usize, k: usize, old: Coeff, new: Coeff) {
        if old < 0 {
            self.d_minus[j] -= old;
        } else {
            self.d_plus[j] -= old;
        }
        if new < 0 {
            self.d_minus[j] += new;
        } else {
            self.d_plus[j] += new;
        }

        match self.max_d[j] {
            Some(e) if e.neighbor == k => {
                if new >= e.value {
                    self.max_d[j] = Some(EdgeExtreme { value: new, neighbor: k });
                } else {
                    self.max_d[j] = self.scan_max(j);
                }
            }
            Some(e) => {
                if new > e.value {
                    self.max_d[j] = Some(EdgeExtreme { value: new, neighbor: k });
                }
            }
            None => {
                if new > 0 {
                    self.max_d[j] = Some(EdgeExtreme { value: new, neighbor: k });
                }
            }
        }
        match self.min_d[j] {
            Some(e) if e.neighbor == k => {
                if new <= e.value {
                    self.min_d[j] = Some(EdgeExtreme { value: new, neighbor: k });
                } else {
                    self.min_d[j] = self.scan_min(j);
                }
            }
            Some(e) => {
                if new < e.value {
                    self.min_d[j] = Some(EdgeExtreme { value: new, neighbor: k });
                }
            }
            None => {
                if new < 0 {
                    self.min_d[j] = Some(EdgeExtreme { value: new, neighbor: k });
                }
            }
        }
    }

    fn scan_max(&self, j: usize) -> Option<EdgeExtreme> {
        let mut best: Option<EdgeExtreme> = None;
        for (&k, &d) in &self.adj[j] {
            if d > 0 && best.is_none_or(|b| d > b.value) {
                best = Some(EdgeExtreme { value: d, neighbor: k });
            }
        }
        best
    }

    fn scan_min(&self, j: usize) -> Option<EdgeExtreme> {
        let mut best: Option<EdgeExtreme> = None;
        for (&k, &d) in &self.adj[j] {
            if d < 0 && best.is_none_or(|b| d < b.value) {
                best = Some(EdgeExtreme { value: d, neighbor: k });
            }
        }
        best
    }

    /// Recomputes `MaxD_j`/`MinD_j` from the row.
    pub fn recompute_row_extremes(&mut self, j: usize) {
        self.max_d[j] = self.scan_max(j);
        self.min_d[j] = self.scan_min(j);
    }

    /// Compares every maintained quantity against a from-scratch computation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut live = 0;
        for i in 1..=self.n {
            if !self.is_free(i) {
                if !self.adj[i].is_empty() {
                    return Err(format!("retired variable {i} still has edges"));
                }
                if self.nodes.contains(i) {
                    return Err(format!("retired variable {i} still listed"));
                }
                continue;
            }
            live += 1;
            if !self.nodes.contains(i) {
                return Err(format!("free variable {i} missing from node list"));
            }
            let (mut neg, mut pos) = (0, 0);
            for (&j, &d) in &self.adj[i] {
                if d == 0 {
                    return Err(format!("zero edge ({i}, {j}) stored"));
                }
                if !self.is_free(j) {
                    return Err(format!("edge ({i}, {j}) leads to retired variable"));
                }
                if self.adj[j].get(&i) != Some(&d) {
                    return Err(format!("edge ({i}, {j}) is not symmetric"));
                }
                if d < 0 {
                    neg += d;
                } else {
                    pos += d;
                }
            }
            if neg != self.d_minus[i] || pos != self.d_plus[i] {
                return Err(format!(
                    "row {i}: D-/D+ = {}/{} but recomputed {neg}/{pos}",
                    self.d_minus[i], self.d_plus[i]
                ));
            }
            let check = |kept: Option<EdgeExtreme>, fresh: Option<EdgeExtreme>, what: &str| {
                match (kept, fresh) {
                    (None, None) => Ok(()),
                    (Some(k), Some(f)) if k.value == f.value && self.d(i, k.neighbor) == k.value => {
                        Ok(())
                    }
                    _ => Err(format!("row {i}: {what} {kept:?} but recomputed {fresh:?}")),
                }
            };
            check(self.max_d[i], self.scan_max(i), "MaxD")?;
            check(self.min_d[i], self.scan_min(i), "MinD")?;
        }
        if live != self.live {
            return Err(format!("live count {} but {live} free", self.live));
        }
        let listed: Vec<usize> = self.nodes.survivors().collect();
        if listed.len() != live {
            return Err(format!("node list holds {} entries for {live} free", listed.len()));
        }
        Ok(())
    }
}
