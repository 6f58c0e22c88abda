//! Sparse QUBO instances in the maximization convention.
//!
//! An instance stores the linear coefficients `c_i`, the combined quadratic
//! coefficients `d_ij = c_ij + c_ji` over unordered pairs, and a constant
//! offset. Variables are numbered `1..=n`, matching the text format. An
//! assignment is a slice of `n` bits where `x[k - 1]` is the value of
//! variable `k`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact integer coefficient type used by every rule comparison.
pub type Coeff = i64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("entry #{entry} ({i}, {j}, {value}) references a variable outside 1..={n}")]
    IndexOutOfRange {
        entry: usize,
        i: usize,
        j: usize,
        value: Coeff,
        n: usize,
    },
    #[error("assignment has {got} values, expected {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("assignment value {value} for variable {var} is not binary")]
    NonBinary { var: usize, value: u8 },
    #[error("ising coupling ({i}, {i}) = {value} on the diagonal")]
    DiagonalCoupling { i: usize, value: Coeff },
    #[error("ising field vector has {got} entries, expected {expected}")]
    FieldLength { expected: usize, got: usize },
    #[error("coefficient overflow while accumulating entry #{entry}")]
    Overflow { entry: usize },
}

/// A QUBO instance: maximize `offset + sum c_i x_i + sum_{i<j} d_ij x_i x_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuboInstance {
    n: usize,
    /// `linear[k - 1]` is `c_k`.
    linear: Vec<Coeff>,
    /// Canonical `(i, j)` with `i < j`; zero values are never stored.
    quadratic: BTreeMap<(usize, usize), Coeff>,
    offset: Coeff,
}

impl QuboInstance {
    /// All-zero instance on `n` variables.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            linear: vec![0; n],
            quadratic: BTreeMap::new(),
            offset: 0,
        }
    }

    /// Accumulates matrix entries `(i, j, value)`. Diagonal entries feed `c_i`;
    /// `(i, j)` and `(j, i)` both feed `d_ij`.
    pub fn from_triplets<I>(n: usize, entries: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (usize, usize, Coeff)>,
    {
        let mut inst = Self::new(n);
        for (entry, (i, j, value)) in entries.into_iter().enumerate() {
            if i == 0 || j == 0 || i > n || j > n {
                return Err(ModelError::IndexOutOfRange {
                    entry,
                    i,
                    j,
                    value,
                    n,
                });
            }
            if i == j {
                let c = &mut inst.linear[i - 1];
                *c = c.checked_add(value).ok_or(ModelError::Overflow { entry })?;
            } else {
                let key = canonical(i, j);
                let d = inst.quadratic.entry(key).or_insert(0);
                *d = d.checked_add(value).ok_or(ModelError::Overflow { entry })?;
            }
        }
        inst.quadratic.retain(|_, v| *v != 0);
        Ok(inst)
    }

    /// Builds an instance from already-combined parts. Zero entries are dropped.
    ///
    /// Panics if a pair is not in range or lies on the diagonal.
    pub fn from_parts(
        linear: Vec<Coeff>,
        quadratic: impl IntoIterator<Item = ((usize, usize), Coeff)>,
        offset: Coeff,
    ) -> Self {
        let n = linear.len();
        let mut inst = Self {
            n,
            linear,
            quadratic: BTreeMap::new(),
            offset,
        };
        for ((i, j), v) in quadratic {
            assert!(i != j && (1..=n).contains(&i) && (1..=n).contains(&j));
            inst.add_quadratic(i, j, v);
        }
        inst
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> Coeff {
        self.offset
    }

    /// `c_i` for `i` in `1..=n`.
    pub fn linear(&self, i: usize) -> Coeff {
        self.linear[i - 1]
    }

    pub fn linear_coeffs(&self) -> &[Coeff] {
        &self.linear
    }

    /// `d_ij`, zero when the pair has no edge.
    pub fn quadratic(&self, i: usize, j: usize) -> Coeff {
        if i == j {
            return 0;
        }
        self.quadratic.get(&canonical(i, j)).copied().unwrap_or(0)
    }

    /// Edges in ascending canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Coeff)> + '_ {
        self.quadratic.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn num_edges(&self) -> usize {
        self.quadratic.len()
    }

    pub fn nonzero_linear(&self) -> usize {
        self.linear.iter().filter(|c| **c != 0).count()
    }

    pub fn set_offset(&mut self, offset: Coeff) {
        self.offset = offset;
    }

    pub fn set_linear(&mut self, i: usize, value: Coeff) {
        self.linear[i - 1] = value;
    }

    pub fn add_linear(&mut self, i: usize, value: Coeff) {
        self.linear[i - 1] += value;
    }

    /// Sets `d_ij`; a zero value removes the edge.
    pub fn set_quadratic(&mut self, i: usize, j: usize, value: Coeff) {
        let key = canonical(i, j);
        if value == 0 {
            self.quadratic.remove(&key);
        } else {
            self.quadratic.insert(key, value);
        }
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, value: Coeff) {
        let v = self.quadratic(i, j) + value;
        self.set_quadratic(i, j, v);
    }

    /// Adjacency lists `(neighbor, d)` indexed by `variable - 1`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, Coeff)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, j, v) in self.edges() {
            adj[i - 1].push((j, v));
            adj[j - 1].push((i, v));
        }
        adj
    }

    /// Objective value of a total assignment, offset included.
    pub fn evaluate(&self, x: &[u8]) -> Result<Coeff, ModelError> {
        if x.len() != self.n {
            return Err(ModelError::AssignmentLength {
                expected: self.n,
                got: x.len(),
            });
        }
        if let Some((k, &value)) = x.iter().enumerate().find(|(_, v)| **v > 1) {
            return Err(ModelError::NonBinary { var: k + 1, value });
        }
        let mut total = self.offset;
        for (c, &xi) in self.linear.iter().zip(x) {
            if xi == 1 {
                total += c;
            }
        }
        for (i, j, d) in self.edges() {
            if x[i - 1] == 1 && x[j - 1] == 1 {
                total += d;
            }
        }
        Ok(total)
    }

    /// Restricts the instance to `keep` (ascending or not), renumbering the
    /// kept variables densely in the given order.
    pub fn renumbered(&self, keep: &[usize]) -> QuboInstance {
        let mut new_id = vec![0usize; self.n + 1];
        for (k, &v) in keep.iter().enumerate() {
            new_id[v] = k + 1;
        }
        let linear = keep.iter().map(|&v| self.linear(v)).collect();
        let quadratic: Vec<_> = self
            .edges()
            .filter(|&(i, j, _)| new_id[i] != 0 && new_id[j] != 0)
            .map(|(i, j, v)| ((new_id[i], new_id[j]), v))
            .collect();
        QuboInstance::from_parts(linear, quadratic, self.offset)
    }
}

/// Converts `maximize sum h_i s_i + sum_{i<j} J_ij s_i s_j` over spins
/// `s in {-1, 1}^n` to a QUBO through `s_i = 2 x_i - 1`.
///
/// `couplings` lists `(i, j, J_ij)` over unordered pairs; repeated pairs add up.
pub fn ising_to_qubo(
    n: usize,
    fields: &[Coeff],
    couplings: &[(usize, usize, Coeff)],
) -> Result<QuboInstance, ModelError> {
    if fields.len() != n {
        return Err(ModelError::FieldLength {
            expected: n,
            got: fields.len(),
        });
    }
    let mut inst = QuboInstance::new(n);
    let mut offset = 0;
    for (k, &h) in fields.iter().enumerate() {
        inst.add_linear(k + 1, 2 * h);
        offset -= h;
    }
    for (entry, &(i, j, coupling)) in couplings.iter().enumerate() {
        if i == 0 || j == 0 || i > n || j > n {
            return Err(ModelError::IndexOutOfRange {
                entry,
                i,
                j,
                value: coupling,
                n,
            });
        }
        if i == j {
            if coupling != 0 {
                return Err(ModelError::DiagonalCoupling { i, value: coupling });
            }
            continue;
        }
        // J (2x_i - 1)(2x_j - 1) = 4J x_i x_j - 2J x_i - 2J x_j + J
        inst.add_quadratic(i, j, 4 * coupling);
        inst.add_linear(i, -2 * coupling);
        inst.add_linear(j, -2 * coupling);
        offset += coupling;
    }
    inst.set_offset(offset);
    Ok(inst)
}

pub(crate) fn canonical(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Bits of `mask` as an assignment of length `n` (bit `k` is variable `k + 1`).
pub fn assignment_from_mask(mask: u64, n: usize) -> Vec<u8> {
    (0..n).map(|k| ((mask >> k) & 1) as u8).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> QuboInstance {
        QuboInstance::from_triplets(2, [(1, 1, 3), (2, 2, -2), (1, 2, 1), (2, 1, 1)]).unwrap()
    }

    #[test]
    fn triplets_accumulate_into_combined_form() {
        let q = small();
        assert_eq!(q.linear(1), 3);
        assert_eq!(q.linear(2), -2);
        assert_eq!(q.quadratic(1, 2), 2);
        assert_eq!(q.quadratic(2, 1), 2);
        assert_eq!(q.offset(), 0);
    }

    #[test]
    fn empty_and_cancelling_entries() {
        let q = QuboInstance::from_triplets(3, []).unwrap();
        assert_eq!(q.num_edges(), 0);
        assert_eq!(q.linear_coeffs(), &[0, 0, 0]);
        let q = QuboInstance::from_triplets(2, [(1, 2, 1), (1, 2, -1)]).unwrap();
        assert_eq!(q.num_edges(), 0);
    }

    #[test]
    fn out_of_range_names_entry() {
        let err = QuboInstance::from_triplets(2, [(1, 1, 1), (1, 3, 4)]).unwrap_err();
        assert_eq!(
            err,
            ModelError::IndexOutOfRange {
                entry: 1,
                i: 1,
                j: 3,
                value: 4,
                n: 2
            }
        );
        assert!(QuboInstance::from_triplets(2, [(0, 1, 1)]).is_err());
    }

    #[test]
    fn evaluate_table() {
        let q = small();
        // brute-force table: (0,0)=0 (1,0)=3 (0,1)=-2 (1,1)=3-2+2=3
        assert_eq!(q.evaluate(&[0, 0]).unwrap(), 0);
        assert_eq!(q.evaluate(&[1, 0]).unwrap(), 3);
        assert_eq!(q.evaluate(&[0, 1]).unwrap(), -2);
        assert_eq!(q.evaluate(&[1, 1]).unwrap(), 3);
    }

    #[test]
    fn evaluate_rejects_partial_and_nonbinary() {
        let q = small();
        assert!(matches!(
            q.evaluate(&[1]),
            Err(ModelError::AssignmentLength { .. })
        ));
        assert!(matches!(
            q.evaluate(&[1, 2]),
            Err(ModelError::NonBinary { var: 2, value: 2 })
        ));
    }

    #[test]
    fn zero_assignment_gives_offset() {
        let mut q = small();
        q.set_offset(11);
        assert_eq!(q.evaluate(&[0, 0]).unwrap(), 11);
    }

    fn ising_value(fields: &[Coeff], couplings: &[(usize, usize, Coeff)], s: &[i64]) -> Coeff {
        let mut v: i64 = fields.iter().zip(s).map(|(h, s)| h * s).sum();
        for &(i, j, c) in couplings {
            v += c * s[i - 1] * s[j - 1];
        }
        v
    }

    #[test]
    fn ising_single_spin() {
        let q = ising_to_qubo(1, &[1], &[]).unwrap();
        assert_eq!(q.linear(1), 2);
        assert_eq!(q.offset(), -1);
        assert_eq!(q.evaluate(&[0]).unwrap(), -1);
        assert_eq!(q.evaluate(&[1]).unwrap(), 1);
        let q = ising_to_qubo(1, &[0], &[]).unwrap();
        assert_eq!(q, QuboInstance::new(1));
    }

    #[test]
    fn ising_coupled_pair() {
        let q = ising_to_qubo(2, &[0, 0], &[(1, 2, 1)]).unwrap();
        assert_eq!(q.quadratic(1, 2), 4);
        assert_eq!(q.linear(1), -2);
        assert_eq!(q.linear(2), -2);
        assert_eq!(q.offset(), 1);
        for mask in 0..4u64 {
            let x = assignment_from_mask(mask, 2);
            let s: Vec<i64> = x.iter().map(|&b| 2 * b as i64 - 1).collect();
            assert_eq!(q.evaluate(&x).unwrap(), ising_value(&[0, 0], &[(1, 2, 1)], &s));
        }
    }

    #[test]
    fn ising_rejects_diagonal() {
        assert!(matches!(
            ising_to_qubo(2, &[0, 0], &[(1, 1, 3)]),
            Err(ModelError::DiagonalCoupling { i: 1, value: 3 })
        ));
    }

    #[test]
    fn renumbered_keeps_only_listed_variables() {
        let q = QuboInstance::from_parts(vec![1, 2, 3], [((1, 3), 5), ((1, 2), 4)], 7);
        let r = q.renumbered(&[3, 1]);
        assert_eq!(r.n(), 2);
        assert_eq!(r.linear(1), 3);
        assert_eq!(r.linear(2), 1);
        assert_eq!(r.quadratic(1, 2), 5);
        assert_eq!(r.offset(), 7);
    }
}
