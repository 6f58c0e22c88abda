mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{all_verdicts, random_instance, replay};
use qubo_prep::engine::{run_to_fixed_point, EngineOptions};
use qubo_prep::oracle::brute_force_solve;
use qubo_prep::rules::RuleId;
use qubo_prep::state::ReductionState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WANTED: usize = 100;

// Samples small instances until every rule has fired on WANTED of them,
// checking each verdict against the optima of the state it fired on.
#[test]
fn every_rule_is_sound_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut seen: BTreeMap<RuleId, usize> = BTreeMap::new();
    let opts = EngineOptions::default();
    let mut sampled = 0;
    while RuleId::ALL.iter().any(|r| seen.get(r).copied().unwrap_or(0) < WANTED) {
        sampled += 1;
        assert!(sampled <= 200_000, "coverage stalled: {seen:?}");
        let n = rng.gen_range(2..=12);
        let q = random_instance(&mut rng, n, 10);
        let r = run_to_fixed_point(&q, &opts).unwrap();
        let mut fired = BTreeSet::new();
        let mut check = |st: &ReductionState| {
            let verdicts = all_verdicts(st);
            if verdicts.is_empty() {
                return;
            }
            let opt = brute_force_solve(&st.working_instance(), 24).unwrap();
            for v in verdicts {
                fired.insert(v.rule);
                let ok = opt.optima.iter().filter(|x| v.conclusion.consistent_with(x)).count();
                assert!(ok > 0, "{v:?} misses every optimum of {q:?}");
                if v.unique {
                    assert_eq!(ok, opt.optima.len(), "{v:?} is strict but misses optima of {q:?}");
                }
            }
        };
        let last = replay(&q, &r.log.events, &opts, |st, _| check(st));
        check(&last);
        for rule in fired {
            *seen.entry(rule).or_insert(0) += 1;
        }
    }
    eprintln!("{sampled} instances sampled; firings per rule {seen:?}");
}
