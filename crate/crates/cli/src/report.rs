use std::collections::BTreeMap;
use std::fmt::Write as _;

use qubo_prep::engine::{Reduction, SolutionMap};
use qubo_prep::rules::{Conclusion, RuleId};
use qubo_prep::{Coeff, ReductionLog};
use serde::{Deserialize, Serialize};

/// What `reduce` writes next to the reduced instance: everything needed to
/// rebuild full solutions, plus the firing log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReductionDoc {
    pub source: String,
    pub original_offset: Coeff,
    pub reduced_offset: Coeff,
    /// The reduced file numbers survivors 1..k in `map.survivors` order.
    pub renumbered: bool,
    pub map: SolutionMap,
    pub log: ReductionLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassRow {
    pub pass: usize,
    pub dropped: usize,
    pub live_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub n: usize,
    pub survivors: usize,
    pub percent_reduction: f64,
    pub original_offset: Coeff,
    pub reduced_offset: Coeff,
    pub pass_count: usize,
    pub residual_substitutions: usize,
    pub firings: BTreeMap<RuleId, usize>,
    pub removed_by_rule: BTreeMap<RuleId, usize>,
    pub passes: Vec<PassRow>,
    /// Mined inequalities by kind; empty unless they were requested.
    pub inequalities: BTreeMap<String, usize>,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn new(instance: &str, original_offset: Coeff, r: &Reduction, wall_time_ms: f64) -> Self {
        let n = r.map.n;
        let survivors = r.map.survivors.len();
        let mut inequalities = BTreeMap::new();
        for rec in &r.log.inequality_records {
            if let Conclusion::Inequality(q) = rec.verdict.conclusion {
                *inequalities.entry(format!("{:?}", q.kind)).or_insert(0) += 1;
            }
        }
        Self {
            instance: instance.to_string(),
            n,
            survivors,
            percent_reduction: percent(n - survivors, n),
            original_offset,
            reduced_offset: r.reduced.offset(),
            pass_count: r.log.pass_count(),
            residual_substitutions: r.log.residual_substitutions,
            firings: r.log.per_rule_counts.clone(),
            removed_by_rule: r.log.dropped_by_rule(),
            passes: r
                .log
                .passes
                .iter()
                .map(|p| PassRow {
                    pass: p.pass,
                    dropped: p.dropped,
                    live_after: p.live_after,
                })
                .collect(),
            inequalities,
            wall_time_ms,
        }
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "instance    {}", self.instance);
        let _ = writeln!(
            s,
            "variables   {} -> {} ({:.2}% reduced)",
            self.n, self.survivors, self.percent_reduction
        );
        let _ = writeln!(s, "offset      {} -> {}", self.original_offset, self.reduced_offset);
        let _ = writeln!(
            s,
            "passes      {} (residual substitutions {})",
            self.pass_count, self.residual_substitutions
        );
        let _ = writeln!(s, "time        {:.1} ms", self.wall_time_ms);
        if !self.firings.is_empty() {
            let _ = writeln!(s, "\n{:<6} {:>8} {:>8} {:>8}", "rule", "firings", "removed", "percent");
            for (rule, count) in &self.firings {
                let removed = self.removed_by_rule.get(rule).copied().unwrap_or(0);
                let _ = writeln!(
                    s,
                    "{:<6} {:>8} {:>8} {:>7.2}%",
                    rule.label(),
                    count,
                    removed,
                    percent(removed, self.n)
                );
            }
        }
        if !self.passes.is_empty() {
            let _ = writeln!(s, "\n{:<6} {:>8} {:>8}", "pass", "removed", "live");
            for p in &self.passes {
                let _ = writeln!(s, "{:<6} {:>8} {:>8}", p.pass, p.dropped, p.live_after);
            }
        }
        if !self.inequalities.is_empty() {
            let _ = writeln!(s, "\ninequalities");
            for (kind, count) in &self.inequalities {
                let _ = writeln!(s, "  {kind:<11} {count}");
            }
        }
        s
    }
}

pub fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 * 100.0 / whole as f64
    }
}

/// Totals over several runs: mean reduction and the share of all variables
/// each rule removed.
pub fn summary(reports: &[RunReport]) -> String {
    let mut s = String::new();
    let total: usize = reports.iter().map(|r| r.n).sum();
    let mean = reports.iter().map(|r| r.percent_reduction).sum::<f64>() / reports.len().max(1) as f64;
    let complete = reports.iter().filter(|r| r.n > 0 && r.survivors == 0).count();
    let _ = writeln!(s, "runs        {}", reports.len());
    let _ = writeln!(s, "mean        {mean:.2}% reduced ({complete} completely)");
    let mut removed: BTreeMap<RuleId, usize> = BTreeMap::new();
    for r in reports {
        for (rule, k) in &r.removed_by_rule {
            *removed.entry(*rule).or_insert(0) += k;
        }
    }
    let _ = writeln!(s, "\n{:<6} {:>8} {:>8}", "rule", "removed", "percent");
    for (rule, k) in &removed {
        let _ = writeln!(s, "{:<6} {:>8} {:>7.2}%", rule.label(), k, percent(*k, total));
    }
    s
}
