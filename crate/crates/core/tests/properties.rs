use std::collections::BTreeSet;
use std::sync::OnceLock;

use proptest::prelude::*;
use twoway::analysis::loops;
use twoway::corpus::{self, Entry};
use twoway::flow::{compose, flow_of, FlowTable, PaddedRun};
use twoway::monoid::{generate_monoid, FlowMonoid};
use twoway::runner::pump_order_violations;
use twoway::*;

/// Widest cross by brute force over all ways to pick the two position sets.
fn naive_cross_width(origin: &[usize]) -> usize {
    let m = origin.len();
    let mut best = 0;
    let mut assign = vec![0u8; m];
    loop {
        let first: Vec<usize> = (0..m).filter(|&x| assign[x] == 1).collect();
        let second: Vec<usize> = (0..m).filter(|&x| assign[x] == 2).collect();
        let ordered = match (first.last(), second.first()) {
            (Some(&a), Some(&b)) => a < b,
            _ => false,
        };
        if ordered {
            let o1: BTreeSet<usize> = first.iter().map(|&x| origin[x]).collect();
            let o2: BTreeSet<usize> = second.iter().map(|&x| origin[x]).collect();
            if o1.iter().next() > o2.iter().next_back() {
                best = best.max(o1.len().min(o2.len()));
            }
        }
        // next assignment in base 3
        let mut i = 0;
        while i < m && assign[i] == 2 {
            assign[i] = 0;
            i += 1;
        }
        if i == m {
            return best;
        }
        assign[i] += 1;
    }
}

fn pair_strategy() -> impl Strategy<Value = SynchronizedPair> {
    (1usize..=5).prop_flat_map(|n| {
        prop::collection::vec(1..=n, 0..=10).prop_map(move |origin| SynchronizedPair {
            input: "a".repeat(n),
            output: "x".repeat(origin.len()),
            origin,
        })
    })
}

fn bounded_entries() -> Vec<&'static Entry> {
    corpus::bounded().collect()
}

fn monoids() -> &'static Vec<(TwoWayTransducer, FlowMonoid)> {
    static M: OnceLock<Vec<(TwoWayTransducer, FlowMonoid)>> = OnceLock::new();
    M.get_or_init(|| {
        bounded_entries()
            .into_iter()
            .map(|e| {
                let t = e.transducer();
                let m = generate_monoid(&t, e.visits.unwrap(), 200_000).unwrap();
                (t, m)
            })
            .collect()
    })
}

/// A corpus machine, an input, and one of its runs (if any).
fn run_strategy() -> impl Strategy<Value = (usize, Vec<char>, usize)> {
    (0..bounded_entries().len()).prop_flat_map(|i| {
        let alphabet = bounded_entries()[i].transducer().input_alphabet().to_vec();
        (Just(i), prop::collection::vec(prop::sample::select(alphabet), 0..=5), any::<usize>())
    })
}

fn pick_run(i: usize, w: &[char], pick: usize) -> Option<(TwoWayTransducer, Run)> {
    let e = bounded_entries()[i];
    let t = e.transducer();
    let runs = enumerate_runs(&t, w, RunBudget::visits(e.visits.unwrap())).unwrap().runs;
    if runs.is_empty() {
        return None;
    }
    let r = runs[pick % runs.len()].clone();
    Some((t, r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cross_width_matches_brute_force(p in pair_strategy()) {
        let c = cross_width(&p);
        prop_assert_eq!(c.width, naive_cross_width(&p.origin));
        // the reported cross is a real one
        prop_assert_eq!(c.first.len(), c.width);
        if c.width > 0 {
            prop_assert!(c.first.last() < c.second.first());
            let lo = c.first.iter().map(|&x| p.origin[x - 1]).min();
            let hi = c.second.iter().map(|&x| p.origin[x - 1]).max();
            prop_assert!(lo > hi);
        }
    }
}

proptest! {
    #[test]
    fn cross_width_zero_iff_order_preserving(p in pair_strategy()) {
        prop_assert_eq!(cross_width(&p).width == 0, is_order_preserving(&p));
    }

    #[test]
    fn pairs_round_trip_through_json(p in pair_strategy()) {
        let s = serde_json::to_string(&p).unwrap();
        let back: SynchronizedPair = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn flows_are_homomorphic((i, w, pick) in run_strategy(), a in 0usize..100, b in 0usize..100, c in 0usize..100) {
        if let Some((t, r)) = pick_run(i, &w, pick) {
            let last = w.len() + 2;
            let mut cuts = [a % (last + 1), b % (last + 1), c % (last + 1)];
            cuts.sort();
            let [lo, mid, hi] = cuts;
            let f = flow_of(&t, &r, Interval::new(lo, mid)).unwrap().flow();
            let g = flow_of(&t, &r, Interval::new(mid, hi)).unwrap().flow();
            let fg = flow_of(&t, &r, Interval::new(lo, hi)).unwrap().flow();
            prop_assert_eq!(compose(&f, &g), fg);
        }
    }

    #[test]
    fn run_flows_are_canonical((i, w, pick) in run_strategy(), a in 0usize..100, b in 0usize..100) {
        if let Some((t, r)) = pick_run(i, &w, pick) {
            let last = w.len() + 2;
            let (lo, hi) = ((a % (last + 1)).min(b % (last + 1)), (a % (last + 1)).max(b % (last + 1)));
            let f = flow_of(&t, &r, Interval::new(lo, hi)).unwrap();
            prop_assert_eq!(f.graph.check(), Ok(()));
            prop_assert_eq!(f.graph.clone().canonical(), f.graph.clone());
            prop_assert_eq!(f.witnesses.len(), f.graph.edges.len());
        }
    }

    #[test]
    fn composition_is_associative(i in 0usize..100, a in any::<usize>(), b in any::<usize>(), c in any::<usize>()) {
        let (_, m) = &monoids()[i % monoids().len()];
        let n = m.len();
        let (x, y, z) = (m.element(a % n), m.element(b % n), m.element(c % n));
        prop_assert_eq!(compose(&compose(x, y), z), compose(x, &compose(y, z)));
    }

    #[test]
    fn pumping_keeps_order((i, w, pick) in run_strategy(), l in any::<usize>(), times in 2usize..=3) {
        if let Some((t, r)) = pick_run(i, &w, pick) {
            let p = PaddedRun::new(&t, &r).unwrap();
            let mut table = FlowTable::new(&p);
            let ls = loops(&p, &mut table);
            if !ls.is_empty() {
                let loop_ = ls[l % ls.len()];
                let pumped = pump_run(&t, &r, loop_, times).unwrap();
                prop_assert!(pumped.is_successful());
                prop_assert_eq!(pumped.input().len(), r.input().len() + (times - 1) * loop_.len());
                let stretched = Interval::new(loop_.lo, loop_.hi + (times - 1) * loop_.len());
                prop_assert_eq!(flow_of(&t, &pumped, stretched).unwrap().graph, table.get(loop_).graph.clone());
                prop_assert_eq!(pump_order_violations(&t, &r, loop_, times).unwrap(), Vec::<String>::new());
            }
        }
    }

    #[test]
    fn normalization_is_idempotent(w in prop::collection::vec(prop::sample::select(vec!['a', 'b', 'c']), 0..=3), pick in any::<usize>()) {
        let t = corpus::multipass();
        let runs = enumerate_runs(&t, &w, RunBudget { visit_bound: 5, step_bound: 200, run_cap: 500 }).unwrap().runs;
        if !runs.is_empty() {
            let r = &runs[pick % runs.len()];
            let s = normalize_run(&t, r).unwrap();
            prop_assert!(s.is_successful());
            prop_assert!(is_k_visit(&s, t.num_transitions()));
            prop_assert!(s.max_visits() <= r.max_visits());
            prop_assert_eq!(normalize_run(&t, &s).unwrap(), s.clone());
            // the normalized output is a scattered subword of the original
            let mut rest = r.output().chars().collect::<Vec<_>>().into_iter();
            prop_assert!(s.output().chars().all(|c| rest.any(|d| d == c)));
        }
    }
}
