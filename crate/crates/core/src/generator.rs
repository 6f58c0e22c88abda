//! Random benchmark instances with outlier coefficients and hub structure.
//!
//! Randomness comes from ChaCha8 seeded through `seed_from_u64`; every draw is
//! a `u64` range so the output does not depend on the platform word size.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Coeff, QuboInstance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("{edges} edges cannot connect {n} variables")]
    TooFewEdges { n: usize, edges: usize },
    #[error("{edges} edges exceed the {max} pairs of {n} variables")]
    TooManyEdges { n: usize, edges: usize, max: usize },
    #[error("{name} = {value} is outside [0, 1]")]
    BadFraction { name: &'static str, value: f64 },
    #[error("upper bound and multipliers must be positive")]
    BadMagnitude,
    #[error("design row {0} does not exist (rows are 1..=16)")]
    UnknownRow(usize),
}

/// One row of the 16-run fractional factorial design. Percentages are whole numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignRow {
    pub id: usize,
    pub upper_bound: Coeff,
    pub linear_multiplier: Coeff,
    pub quadratic_multiplier: Coeff,
    pub pct_large_quadratic: u32,
    pub pct_large_linear: u32,
    pub pct_nonzero_linear: u32,
}

/// Low and high settings of the six factors, in row field order.
pub const FACTOR_LEVELS: [(u32, u32); 6] = [(10, 100), (5, 10), (10, 20), (5, 15), (10, 20), (5, 25)];

const DESIGN: [[u32; 6]; 16] = [
    [10, 10, 20, 5, 10, 25],
    [100, 10, 20, 15, 20, 25],
    [10, 5, 20, 15, 10, 5],
    [100, 5, 20, 5, 20, 5],
    [10, 10, 10, 5, 20, 5],
    [100, 10, 10, 15, 10, 5],
    [10, 5, 10, 15, 20, 25],
    [100, 5, 10, 5, 10, 25],
    [100, 5, 10, 15, 20, 5],
    [10, 5, 10, 5, 10, 5],
    [100, 10, 10, 5, 20, 25],
    [10, 10, 10, 15, 10, 25],
    [100, 5, 20, 15, 10, 25],
    [10, 5, 20, 5, 20, 25],
    [100, 10, 20, 5, 10, 5],
    [10, 10, 20, 15, 20, 5],
];

impl DesignRow {
    pub fn factors(&self) -> [u32; 6] {
        [
            self.upper_bound as u32,
            self.linear_multiplier as u32,
            self.quadratic_multiplier as u32,
            self.pct_large_quadratic,
            self.pct_large_linear,
            self.pct_nonzero_linear,
        ]
    }
}

pub fn design_table() -> Vec<DesignRow> {
    DESIGN
        .iter()
        .enumerate()
        .map(|(k, f)| DesignRow {
            id: k + 1,
            upper_bound: f[0] as Coeff,
            linear_multiplier: f[1] as Coeff,
            quadratic_multiplier: f[2] as Coeff,
            pct_large_quadratic: f[3],
            pct_large_linear: f[4],
            pct_nonzero_linear: f[5],
        })
        .collect()
}

pub fn design_row(id: usize) -> Result<DesignRow, GeneratorError> {
    if (1..=16).contains(&id) {
        Ok(design_table()[id - 1])
    } else {
        Err(GeneratorError::UnknownRow(id))
    }
}

/// A named problem size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeConfig {
    pub id: String,
    pub n: usize,
    pub edges: usize,
}

impl SizeConfig {
    pub fn new(id: &str, n: usize, edges: usize) -> Self {
        Self { id: id.to_string(), n, edges }
    }
}

pub fn paper_sizes() -> Vec<SizeConfig> {
    vec![
        SizeConfig::new("1000L", 1000, 5000),
        SizeConfig::new("1000H", 1000, 10000),
        SizeConfig::new("5000L", 5000, 25000),
        SizeConfig::new("5000H", 5000, 50000),
        SizeConfig::new("10000L", 10000, 100000),
        SizeConfig::new("10000H", 10000, 500000),
    ]
}

pub fn desk_sizes() -> Vec<SizeConfig> {
    vec![SizeConfig::new("100L", 100, 500), SizeConfig::new("100H", 100, 1000)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub upper_bound: Coeff,
    pub linear_multiplier: Coeff,
    pub quadratic_multiplier: Coeff,
    pub pct_quadratic_multiplied: f64,
    pub pct_linear_multiplied: f64,
    pub pct_nonzero_linear: f64,
    pub n: usize,
    pub target_edges: usize,
    pub hub_fraction: f64,
    /// Share of the edges that touch a hub.
    pub hub_edge_share: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn from_row(row: &DesignRow, n: usize, target_edges: usize, seed: u64) -> Self {
        Self {
            upper_bound: row.upper_bound,
            linear_multiplier: row.linear_multiplier,
            quadratic_multiplier: row.quadratic_multiplier,
            pct_quadratic_multiplied: f64::from(row.pct_large_quadratic) / 100.0,
            pct_linear_multiplied: f64::from(row.pct_large_linear) / 100.0,
            pct_nonzero_linear: f64::from(row.pct_nonzero_linear) / 100.0,
            n,
            target_edges,
            hub_fraction: 0.01,
            hub_edge_share: 0.3,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        for (name, value) in [
            ("pct_quadratic_multiplied", self.pct_quadratic_multiplied),
            ("pct_linear_multiplied", self.pct_linear_multiplied),
            ("pct_nonzero_linear", self.pct_nonzero_linear),
            ("hub_fraction", self.hub_fraction),
            ("hub_edge_share", self.hub_edge_share),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GeneratorError::BadFraction { name, value });
            }
        }
        if self.upper_bound < 1 || self.linear_multiplier < 1 || self.quadratic_multiplier < 1 {
            return Err(GeneratorError::BadMagnitude);
        }
        let max = pair_count(self.n);
        if self.target_edges > max {
            return Err(GeneratorError::TooManyEdges {
                n: self.n,
                edges: self.target_edges,
                max,
            });
        }
        if self.target_edges + 1 < self.n {
            return Err(GeneratorError::TooFewEdges {
                n: self.n,
                edges: self.target_edges,
            });
        }
        Ok(())
    }

    pub fn hub_count(&self) -> usize {
        exact_count(self.hub_fraction, self.n, true)
    }

    /// Comment lines recording the spec, for instance file headers.
    pub fn describe(&self) -> Vec<String> {
        vec![
            format!(
                "n {} edges {} seed {}",
                self.n, self.target_edges, self.seed
            ),
            format!(
                "upper_bound {} linear_multiplier {} quadratic_multiplier {}",
                self.upper_bound, self.linear_multiplier, self.quadratic_multiplier
            ),
            format!(
                "pct_quadratic_multiplied {} pct_linear_multiplied {} pct_nonzero_linear {}",
                self.pct_quadratic_multiplied, self.pct_linear_multiplied, self.pct_nonzero_linear
            ),
            format!(
                "hub_fraction {} hub_edge_share {}",
                self.hub_fraction, self.hub_edge_share
            ),
        ]
    }
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// `floor(frac * k)`, or the ceiling when `ceil` is set, tolerant of float noise.
fn exact_count(frac: f64, k: usize, ceil: bool) -> usize {
    let x = frac * k as f64;
    let v = if ceil { (x - 1e-9).ceil() } else { (x + 1e-9).floor() };
    (v.max(0.0) as usize).min(k)
}

fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    rng.gen_range(0..n as u64) as usize
}

/// First `k` entries of `items` become a uniform random `k`-subset.
fn partial_shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T], k: usize) {
    for t in 0..k.min(items.len()) {
        let r = t + below(rng, items.len() - t);
        items.swap(t, r);
    }
}

fn choose(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    partial_shuffle(rng, &mut idx, k);
    idx.truncate(k);
    idx
}

fn nonzero(rng: &mut ChaCha8Rng, bound: Coeff) -> Coeff {
    let mag = rng.gen_range(1..=bound as u64) as Coeff;
    if rng.gen_range(0..2u64) == 0 {
        -mag
    } else {
        mag
    }
}

fn canon(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

struct EdgeSet {
    list: Vec<(usize, usize)>,
    seen: HashSet<(usize, usize)>,
}

impl EdgeSet {
    fn insert(&mut self, a: usize, b: usize) -> bool {
        let e = canon(a, b);
        if a != b && self.seen.insert(e) {
            self.list.push(e);
            true
        } else {
            false
        }
    }
}

/// Adds `target` new pairs from a pool of `capacity`, by rejection while
/// the pool is sparse and by enumeration otherwise.
fn sample_pairs(
    rng: &mut ChaCha8Rng,
    edges: &mut EdgeSet,
    target: usize,
    capacity: usize,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> (usize, usize),
    enumerate: impl Fn() -> Vec<(usize, usize)>,
) {
    if target == 0 {
        return;
    }
    if target * 2 <= capacity {
        let mut added = 0;
        while added < target {
            let (a, b) = draw(rng);
            if edges.insert(a, b) {
                added += 1;
            }
        }
    } else {
        let mut pool: Vec<_> = enumerate()
            .into_iter()
            .map(|(a, b)| canon(a, b))
            .filter(|e| !edges.seen.contains(e))
            .collect();
        partial_shuffle(rng, &mut pool, target);
        for &(a, b) in &pool[..target] {
            edges.insert(a, b);
        }
    }
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

/// Makes the graph connected while keeping the edge count: drops one
/// non-tree edge per extra component and links the components in a chain.
fn repair_connectivity(rng: &mut ChaCha8Rng, n: usize, edges: &mut EdgeSet) {
    let mut parent: Vec<usize> = (0..=n).collect();
    let mut in_tree = vec![false; edges.list.len()];
    for (k, &(a, b)) in edges.list.iter().enumerate() {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            in_tree[k] = true;
        }
    }
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n + 1];
    for v in 1..=n {
        let r = find(&mut parent, v);
        if slot[r] == usize::MAX {
            slot[r] = members.len();
            members.push(Vec::new());
        }
        members[slot[r]].push(v);
    }
    let extra = members.len() - 1;
    if extra == 0 {
        return;
    }
    let mut spare: Vec<usize> = (0..edges.list.len()).filter(|&k| !in_tree[k]).collect();
    partial_shuffle(rng, &mut spare, extra);
    let mut drop = spare[..extra].to_vec();
    drop.sort_unstable();
    for &k in drop.iter().rev() {
        let e = edges.list.remove(k);
        edges.seen.remove(&e);
    }
    for w in members.windows(2) {
        let a = w[0][below(rng, w[0].len())];
        let b = w[1][below(rng, w[1].len())];
        edges.insert(a, b);
    }
}

pub fn generate_instance(spec: &GeneratorSpec) -> Result<QuboInstance, GeneratorError> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut edges = EdgeSet {
        list: Vec::with_capacity(spec.target_edges),
        seen: HashSet::with_capacity(spec.target_edges),
    };

    if n >= 2 {
        let hub_n = spec.hub_count();
        let mut order: Vec<usize> = (1..=n).collect();
        partial_shuffle(&mut rng, &mut order, hub_n);
        let (hubs, rest) = order.split_at(hub_n);
        let mut is_hub = vec![false; n + 1];
        for &h in hubs {
            is_hub[h] = true;
        }

        let plain_cap = pair_count(rest.len());
        let hub_cap = pair_count(n) - plain_cap;
        let mut hub_target = exact_count(spec.hub_edge_share, spec.target_edges, false).min(hub_cap);
        let mut plain_target = spec.target_edges - hub_target;
        if plain_target > plain_cap {
            plain_target = plain_cap;
            hub_target = spec.target_edges - plain_target;
        }

        sample_pairs(
            &mut rng,
            &mut edges,
            hub_target,
            hub_cap,
            |r| {
                let h = hubs[below(r, hubs.len())];
                let mut o = 1 + below(r, n - 1);
                if o >= h {
                    o += 1;
                }
                (h, o)
            },
            || {
                let mut all = Vec::new();
                for &h in hubs {
                    for (o, &hub) in is_hub.iter().enumerate().skip(1) {
                        if o != h && !(hub && o < h) {
                            all.push((h, o));
                        }
                    }
                }
                all
            },
        );
        sample_pairs(
            &mut rng,
            &mut edges,
            plain_target,
            plain_cap,
            |r| (rest[below(r, rest.len())], rest[below(r, rest.len())]),
            || {
                let mut all = Vec::new();
                for (k, &a) in rest.iter().enumerate() {
                    for &b in &rest[k + 1..] {
                        all.push((a, b));
                    }
                }
                all
            },
        );
        repair_connectivity(&mut rng, n, &mut edges);
    }

    let u = spec.upper_bound;
    let mut weights: Vec<Coeff> = edges.list.iter().map(|_| nonzero(&mut rng, u)).collect();
    let k = exact_count(spec.pct_quadratic_multiplied, weights.len(), false);
    for idx in choose(&mut rng, weights.len(), k) {
        weights[idx] *= spec.quadratic_multiplier;
    }

    let mut linear = vec![0; n];
    let nz = choose(&mut rng, n, exact_count(spec.pct_nonzero_linear, n, false));
    for &v in &nz {
        linear[v] = nonzero(&mut rng, u);
    }
    let k = exact_count(spec.pct_linear_multiplied, nz.len(), false);
    for t in choose(&mut rng, nz.len(), k) {
        linear[nz[t]] *= spec.linear_multiplier;
    }

    Ok(QuboInstance::from_parts(
        linear,
        edges.list.into_iter().zip(weights),
        0,
    ))
}

#[derive(Debug, Clone)]
pub struct TaggedInstance {
    pub size_id: String,
    pub row_id: usize,
    pub spec: GeneratorSpec,
    pub instance: QuboInstance,
}

/// Seed of the instance at position `index` of a suite.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Cross product of sizes and design rows, sizes outermost.
pub fn generate_benchmark_suite(
    sizes: &[SizeConfig],
    rows: &[DesignRow],
    seed: u64,
) -> Result<Vec<TaggedInstance>, GeneratorError> {
    let mut out = Vec::with_capacity(sizes.len() * rows.len());
    for (si, size) in sizes.iter().enumerate() {
        for row in rows {
            let index = (si * 16 + row.id) as u64;
            let spec = GeneratorSpec::from_row(row, size.n, size.edges, derive_seed(seed, index));
            out.push(TaggedInstance {
                size_id: size.id.clone(),
                row_id: row.id,
                instance: generate_instance(&spec)?,
                spec,
            });
        }
    }
    Ok(out)
}

/// Number of connected components of the instance's edge graph.
pub fn component_count(instance: &QuboInstance) -> usize {
    let n = instance.n();
    let mut parent: Vec<usize> = (0..=n).collect();
    let mut count = n;
    for (a, b, _) in instance.edges() {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            count -= 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let t = design_table();
        assert_eq!(t.len(), 16);
        assert_eq!(t[0].factors(), [10, 10, 20, 5, 10, 25]);
        assert_eq!(t[15].factors(), [10, 10, 20, 15, 20, 5]);
        assert_eq!(t[7].factors(), [100, 5, 10, 5, 10, 25]);
        for row in &t {
            for (f, (lo, hi)) in row.factors().iter().zip(FACTOR_LEVELS) {
                assert!(*f == lo || *f == hi);
            }
        }
        assert_eq!(design_row(17), Err(GeneratorError::UnknownRow(17)));
    }

    #[test]
    fn design_is_balanced() {
        // every factor sits at its high level in exactly half of the runs
        let t = design_table();
        for (k, (_, hi)) in FACTOR_LEVELS.iter().enumerate() {
            assert_eq!(t.iter().filter(|r| r.factors()[k] == *hi).count(), 8);
        }
    }

    #[test]
    fn small_boundary_instance() {
        let mut spec = GeneratorSpec::from_row(&design_table()[0], 4, 3, 9);
        spec.pct_nonzero_linear = 1.0;
        let q = generate_instance(&spec).unwrap();
        assert_eq!(q.num_edges(), 3);
        assert_eq!(component_count(&q), 1);
        assert_eq!(q.nonzero_linear(), 4);
    }

    #[test]
    fn complete_graph_and_errors() {
        let spec = GeneratorSpec::from_row(&design_table()[1], 6, 15, 1);
        assert_eq!(generate_instance(&spec).unwrap().num_edges(), 15);
        let spec = GeneratorSpec::from_row(&design_table()[1], 6, 16, 1);
        assert!(matches!(generate_instance(&spec), Err(GeneratorError::TooManyEdges { .. })));
        let spec = GeneratorSpec::from_row(&design_table()[1], 6, 4, 1);
        assert_eq!(
            generate_instance(&spec),
            Err(GeneratorError::TooFewEdges { n: 6, edges: 4 })
        );
    }

    #[test]
    fn suite_shapes() {
        let rows = design_table();
        let suite = generate_benchmark_suite(&desk_sizes(), &rows, 7).unwrap();
        assert_eq!(suite.len(), 32);
        assert_eq!(suite[17].size_id, "100H");
        assert_eq!(suite[17].row_id, 2);
        assert!(generate_benchmark_suite(&desk_sizes(), &[], 7).unwrap().is_empty());
        assert_eq!(paper_sizes().len() * rows.len(), 96);
    }

    #[test]
    fn exact_counts() {
        assert_eq!(exact_count(0.01, 1000, true), 10);
        assert_eq!(exact_count(0.25, 1000, false), 250);
        assert_eq!(exact_count(0.15, 500, false), 75);
        assert_eq!(exact_count(0.1, 250, false), 25);
    }
}
