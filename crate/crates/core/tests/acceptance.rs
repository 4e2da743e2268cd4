//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use twoway::analysis::{find_inversion, loops};
use twoway::corpus::{self, Entry};
use twoway::factorization::{
    build_factorization_tree, build_retargeting, check_lemmas, letter_sequence, verify_retargeting, verify_tree, Constants,
    Invariant,
};
use twoway::flow::{compose, flow_of, Flow, FlowTable, PaddedRun};
use twoway::monoid::{generate_monoid, realize, FlowMonoid, DEFAULT_MONOID_CAP};
use twoway::runner::pump_order_violations;
use twoway::sparsity::{k_sparse_bounded_check, normalize_run, SparsityVerdict};
use twoway::*;

const MAX_LEN: usize = 6;

struct Machine {
    entry: &'static Entry,
    t: TwoWayTransducer,
    k: usize,
    monoid: FlowMonoid,
    runs: Vec<Run>,
}

impl Machine {
    fn inversion_free(&self) -> bool {
        self.entry.resynchronizable == Some(true)
    }
}

fn words(alphabet: &[char], max_len: usize) -> Vec<Vec<char>> {
    twoway::sparsity::words_up_to(alphabet, max_len).collect()
}

fn load() -> Vec<Machine> {
    corpus::bounded()
        .map(|entry| {
            let t = entry.transducer();
            let k = entry.visits.unwrap();
            let monoid = generate_monoid(&t, k, DEFAULT_MONOID_CAP).unwrap();
            let mut runs = Vec::new();
            for w in words(t.input_alphabet(), MAX_LEN) {
                let set = enumerate_runs(&t, &w, RunBudget::visits(k)).unwrap();
                assert!(!set.truncated, "{}: run enumeration truncated on {:?}", entry.name, w);
                runs.extend(set.runs);
            }
            Machine { entry, t, k, monoid, runs }
        })
        .collect()
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn data(name: &str) -> SynchronizedPair {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn named_examples(_: &[Machine]) -> Outcome {
    let mut notes = Vec::new();
    for (name, expected) in [("last_to_front", true), ("swap_halves", false), ("reverse", false)] {
        let t = corpus::get(name).unwrap().transducer();
        let (d, m) = decide_resynchronizable(&t, 3, DEFAULT_MONOID_CAP).map_err(|e| format!("{name}: {e}"))?;
        ensure(d.resynchronizable == expected, || format!("{name}: answered {}", d.resynchronizable))?;
        if !expected {
            let w = d.witness.as_ref().ok_or_else(|| format!("{name}: no witness"))?;
            ensure(w.quintuple.verify(&m), || format!("{name}: witness quintuple does not verify"))?;
            ensure(find_inversion(&t, &w.run).unwrap().is_some(), || format!("{name}: witness run has no inversion"))?;
            notes.push(format!("{name}=NO (witness on {:?})", w.run.input_string()));
        } else {
            notes.push(format!("{name}=YES"));
        }
    }
    Ok(notes.join(", "))
}

fn reference_pairs(_: &[Machine]) -> Outcome {
    let left = data("baca_crossing.json");
    let right = data("baca_resync.json");
    left.check().map_err(|e| e.to_string())?;
    right.check().map_err(|e| e.to_string())?;
    let w = cross_width(&left).width;
    ensure(w == 1, || format!("cross-width of the left pair is {w}"))?;
    ensure(is_order_preserving(&right), || "right pair is not order-preserving".into())?;
    ensure(!is_order_preserving(&left), || "left pair is order-preserving".into())?;
    let tr = max_traversal(&left, &right).map_err(|e| e.to_string())?;
    ensure(tr == 1, || format!("max traversal is {tr}"))?;
    // the left pair is the origin graph of the last-letter-to-front machine
    let t = corpus::last_to_front();
    let runs = enumerate_runs(&t, &['b', 'a', 'c', 'a'], RunBudget::visits(3)).unwrap().runs;
    let pairs: Vec<SynchronizedPair> = runs.iter().map(|r| origin_graph(&t, r).unwrap()).collect();
    ensure(pairs == vec![left.clone()], || format!("machine produces {pairs:?}"))?;
    Ok(format!("cross-width 1, right order-preserving, max traversal 1, {left} reproduced"))
}

fn oracle_equivalence(ms: &[Machine]) -> Outcome {
    ensure(ms.len() >= 10, || format!("only {} machines", ms.len()))?;
    let mut yes = 0;
    for m in ms {
        let symbolic = has_inversion_symbolic(&m.t, &m.monoid);
        let concrete = m.runs.iter().find(|r| find_inversion(&m.t, r).unwrap().is_some());
        ensure(symbolic.is_some() == concrete.is_some(), || {
            format!(
                "{}: symbolic {}, concrete {}",
                m.entry.name,
                symbolic.is_some(),
                concrete.map_or("none".into(), |r| r.input_string())
            )
        })?;
        if let Some(q) = symbolic {
            let r = realize(&m.t, &m.monoid, &q.pumped_word(1)).map_err(|e| e.to_string())?;
            ensure(find_inversion(&m.t, &r).unwrap().is_some(), || format!("{}: realized witness has no inversion", m.entry.name))?;
        } else {
            yes += 1;
        }
        ensure(m.entry.resynchronizable == Some(concrete.is_none()), || format!("{}: corpus label disagrees", m.entry.name))?;
    }
    Ok(format!("{} machines agree ({} inversion-free), inputs up to length {MAX_LEN}", ms.len(), yes))
}

fn flow_algebra(ms: &[Machine]) -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let with_runs: Vec<&Machine> = ms.iter().filter(|m| !m.runs.is_empty()).collect();
    let samples = 1500;
    for _ in 0..samples {
        let m = with_runs[rng.gen_range(0..with_runs.len())];
        let r = &m.runs[rng.gen_range(0..m.runs.len())];
        let last = r.input().len() + 2;
        let mut cuts = [rng.gen_range(0..=last), rng.gen_range(0..=last), rng.gen_range(0..=last)];
        cuts.sort();
        let f = |lo, hi| flow_of(&m.t, r, Interval::new(lo, hi)).unwrap().flow();
        let whole = f(cuts[0], cuts[2]);
        ensure(compose(&f(cuts[0], cuts[1]), &f(cuts[1], cuts[2])) == whole, || {
            format!("{}: homomorphism fails on {:?} at {cuts:?}", m.entry.name, r.input_string())
        })?;
    }
    for _ in 0..samples {
        let m = &ms[rng.gen_range(0..ms.len())].monoid;
        let e = |rng: &mut StdRng| m.element(rng.gen_range(0..m.len())).clone();
        let (x, y, z) = (e(&mut rng), e(&mut rng), e(&mut rng));
        ensure(compose(&compose(&x, &y), &z) == compose(&x, &compose(&y, &z)), || "associativity fails".into())?;
    }
    let mut sizes = Vec::new();
    for m in ms {
        let bound = Constants::new(m.t.num_states(), m.k).m;
        ensure(BigUint::from(m.monoid.len()) <= bound, || format!("{}: monoid of {} exceeds {bound}", m.entry.name, m.monoid.len()))?;
        ensure(m.monoid.elements().iter().any(Flow::is_bottom), || format!("{}: no ⊥", m.entry.name))?;
        sizes.push(format!("{}={}", m.entry.name, m.monoid.len()));
    }
    Ok(format!("{samples} homomorphism and {samples} associativity samples; monoid sizes {}", sizes.join(" ")))
}

fn pumping(ms: &[Machine]) -> Outcome {
    let mut checked = 0;
    for m in ms {
        for r in m.runs.iter().filter(|r| r.input().len() <= 5) {
            let p = PaddedRun::new(&m.t, r).unwrap();
            let mut table = FlowTable::new(&p);
            for i in loops(&p, &mut table) {
                if !table.get(i).graph.edges.iter().any(|e| e.is_straight()) {
                    continue;
                }
                for n in [2, 3] {
                    let pumped = pump_run(&m.t, r, i, n).map_err(|e| format!("{}: {e}", m.entry.name))?;
                    let again = Run::from_parts(&m.t, pumped.input(), pumped.configs().to_vec(), pumped.transitions().to_vec());
                    ensure(again.map(|a| a.is_successful()).unwrap_or(false), || format!("{}: pumped run does not revalidate", m.entry.name))?;
                    let v = pump_order_violations(&m.t, r, i, n).unwrap();
                    ensure(v.is_empty(), || format!("{} on {:?}, loop {i}, n={n}: {}", m.entry.name, r.input_string(), v[0]))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} (run, loop, n) instances on inputs up to length 5"))
}

fn cross_width_growth(ms: &[Machine]) -> Outcome {
    let t2 = corpus::swap_halves();
    for n in 1..=4 {
        let w: Vec<char> = std::iter::repeat('a').take(n).chain(['#']).chain(std::iter::repeat('b').take(n)).collect();
        let runs = enumerate_runs(&t2, &w, RunBudget::visits(3)).unwrap().runs;
        ensure(!runs.is_empty(), || format!("no run on a^{n}#b^{n}"))?;
        for r in &runs {
            let c = cross_width(&origin_graph(&t2, r).unwrap()).width;
            ensure(c == n, || format!("cross-width {c} on a^{n}#b^{n}"))?;
        }
    }
    let mut witnesses = 0;
    for m in ms.iter().filter(|m| !m.inversion_free()) {
        let q = has_inversion_symbolic(&m.t, &m.monoid).ok_or_else(|| format!("{}: no witness", m.entry.name))?;
        for n in [2, 3] {
            let r = realize(&m.t, &m.monoid, &q.pumped_word(n)).map_err(|e| e.to_string())?;
            let c = cross_width(&origin_graph(&m.t, &r).unwrap()).width;
            ensure(c >= n, || format!("{}: pumped {n} times gives cross-width {c}", m.entry.name))?;
        }
        witnesses += 1;
    }
    Ok(format!("a^n#b^n has cross-width n for n=1..4; {witnesses} NO witnesses pumped to cross-width >= n for n=2,3"))
}

fn retargeting(ms: &[Machine]) -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for threshold in [0, 1, 2] {
        let mut failed = 0;
        let mut first = None;
        for m in ms.iter().filter(|m| m.inversion_free()) {
            for r in &m.runs {
                let seq = letter_sequence(&m.t, r).unwrap();
                let tree = build_factorization_tree(&seq, &m.monoid).map_err(|e| e.to_string())?;
                let ret = build_retargeting(&m.t, r, &tree, threshold).map_err(|e| e.to_string())?;
                let v = verify_retargeting(&m.t, r, &tree, &ret, threshold).unwrap();
                checked += 1;
                if !v.is_empty() {
                    failed += 1;
                    first.get_or_insert_with(|| format!("{} on {:?}: {}", m.entry.name, r.input_string(), v[0].detail));
                }
            }
        }
        if failed > 0 {
            failures.push(format!("T={threshold}: {failed} runs fail, e.g. {}", first.unwrap()));
        }
    }
    // injected faults
    let t = corpus::copier();
    let m = generate_monoid(&t, 1, DEFAULT_MONOID_CAP).unwrap();
    let r = enumerate_runs(&t, &['a', 'b', 'a', 'b'], RunBudget::visits(1)).unwrap().runs.remove(0);
    let tree = build_factorization_tree(&letter_sequence(&t, &r).unwrap(), &m).unwrap();
    let ret = build_retargeting(&t, &r, &tree, 0).unwrap();
    let top = ret.levels.len() - 1;
    let mut swapped = ret.clone();
    swapped.levels[top].swap(0, 3);
    swapped.target.swap(0, 3);
    let v = verify_retargeting(&t, &r, &tree, &swapped, 0).unwrap();
    ensure(v.iter().any(|v| v.invariant == Invariant::Ordered), || "swapped targets not flagged".into())?;
    let mut outside = ret.clone();
    outside.levels[0][0] = Some(4);
    let v = verify_retargeting(&t, &r, &tree, &outside, 0).unwrap();
    ensure(v.iter().any(|v| v.invariant == Invariant::Confined), || "target outside its interval not flagged".into())?;
    if failures.is_empty() {
        Ok(format!("{checked} (run, threshold) instances verified; injected faults flagged"))
    } else {
        Err(failures.join("; "))
    }
}

fn trees(ms: &[Machine]) -> Outcome {
    let mut checked = 0;
    let mut tallest = 0;
    for m in ms {
        for r in &m.runs {
            let seq = letter_sequence(&m.t, r).unwrap();
            let tree = build_factorization_tree(&seq, &m.monoid).map_err(|e| format!("{}: {e}", m.entry.name))?;
            let problems = verify_tree(&tree, &seq, &m.monoid);
            ensure(problems.is_empty(), || format!("{} on {:?}: {}", m.entry.name, r.input_string(), problems[0]))?;
            let fold = seq.iter().skip(1).fold(seq[0].clone(), |a, f| compose(&a, f));
            ensure(m.monoid.element(tree.node(tree.root).label) == &fold, || format!("{}: root label is not the product", m.entry.name))?;
            ensure(fold.is_accepting(), || format!("{}: product of a run is not accepting", m.entry.name))?;
            ensure(tree.height() <= 3 * m.monoid.len(), || format!("{}: height {}", m.entry.name, tree.height()))?;
            tallest = tallest.max(tree.height());
            checked += 1;
        }
    }
    Ok(format!("{checked} trees valid, tallest {tallest}"))
}

fn sparsity(_: &[Machine]) -> Outcome {
    for name in ["copier", "swap_halves"] {
        let t = corpus::get(name).unwrap().transducer();
        let v = k_sparse_bounded_check(&t, 1, 5).unwrap();
        ensure(v == SparsityVerdict::SparseUpToBound { max_len: 5 }, || format!("{name}: {v:?}"))?;
    }
    let t = corpus::multipass();
    let witness = match k_sparse_bounded_check(&t, 1, 3).unwrap() {
        SparsityVerdict::NotSparse { input, .. } => input,
        v => return Err(format!("multipass: {v:?}")),
    };
    ensure(witness.chars().count() <= 3, || format!("witness {witness:?} too long"))?;
    let mut normalized = 0;
    for e in corpus::ENTRIES {
        let t = e.transducer();
        let bound = e.visits.unwrap_or(5);
        for w in words(t.input_alphabet(), 4) {
            let set = enumerate_runs(&t, &w, RunBudget { visit_bound: bound, step_bound: 200, run_cap: 2000 }).unwrap();
            for r in &set.runs {
                let s = normalize_run(&t, r).map_err(|e| e.to_string())?;
                ensure(s.is_successful(), || format!("{}: normalized run not successful", e.name))?;
                ensure(is_k_visit(&s, t.num_transitions().max(1)), || format!("{}: normalized run not |Δ|-visit", e.name))?;
                ensure(normalize_run(&t, &s).unwrap() == s, || format!("{}: normalization not idempotent", e.name))?;
                normalized += 1;
            }
        }
    }
    Ok(format!("copier and swap_halves sparse up to 5; multipass not sparse on {witness:?}; {normalized} runs normalized"))
}

fn lemmas(ms: &[Machine]) -> Outcome {
    let mut instances = 0;
    for threshold in [1, 2] {
        for m in ms.iter().filter(|m| m.inversion_free()) {
            for r in &m.runs {
                let rep = check_lemmas(&m.t, r, threshold).map_err(|e| format!("{}: {e}", m.entry.name))?;
                ensure(rep.ok(), || {
                    let c = &rep.counterexamples[0];
                    format!("{} on {:?}, threshold {threshold}: {}: {}", m.entry.name, r.input_string(), c.lemma, c.detail)
                })?;
                instances += rep.checked.values().sum::<usize>();
            }
        }
    }
    Ok(format!("{instances} lemma instances, no counterexample"))
}

type Criterion = (usize, &'static str, fn(&[Machine]) -> Outcome);

fn main() {
    let start = Instant::now();
    let machines = load();
    eprintln!(
        "loaded {} machines, {} runs in {:.1?}",
        machines.len(),
        machines.iter().map(|m| m.runs.len()).sum::<usize>(),
        start.elapsed()
    );
    let criteria: [Criterion; 10] = [
        (1, "named examples decided", named_examples),
        (2, "reference pairs reproduced", reference_pairs),
        (3, "symbolic and concrete inversion search agree", oracle_equivalence),
        (4, "flow algebra", flow_algebra),
        (5, "pumping keeps run order", pumping),
        (6, "cross-width growth", cross_width_growth),
        (7, "retargeting verified", retargeting),
        (8, "factorization trees", trees),
        (9, "sparsity and normalization", sparsity),
        (10, "lemma suite", lemmas),
    ];
    let mut failed = 0;
    for (n, name, check) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&machines))).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail} ({:.1?})", t.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {n:>2} {name}: {detail} ({:.1?})", t.elapsed());
            }
        }
    }
    println!("{} of 10 criteria pass", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
