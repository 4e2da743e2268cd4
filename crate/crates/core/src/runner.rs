//! Enumerating runs, visit bounds, pumping loops.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::flow::{edge_run_order, is_idempotent, FlowGraph, PaddedRun, flow_of_padded};
use crate::machine::{padded_symbol, Reading, StateId, Symbol, TransitionId, TwoWayTransducer};
use crate::run::{Configuration, Interval, Run};

/// Limits for [`enumerate_runs`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunBudget {
    /// Maximal number of configurations at one cut.
    pub visit_bound: usize,
    /// Maximal number of steps of one run.
    pub step_bound: usize,
    /// Maximal number of runs returned.
    pub run_cap: usize,
}

impl Default for RunBudget {
    fn default() -> Self {
        RunBudget { visit_bound: 3, step_bound: 10_000, run_cap: 10_000 }
    }
}

impl RunBudget {
    pub fn visits(visit_bound: usize) -> Self {
        RunBudget { visit_bound, ..Default::default() }
    }
}

#[derive(Clone, Debug)]
pub struct RunSet {
    pub runs: Vec<Run>,
    /// Set when the step bound or the run cap cut the search short.
    pub truncated: bool,
}

/// Configurations of `t` on one input, as a graph. Node `(q, c)` has index
/// `c * |Q| + q`; only cuts `1..=n + 1` carry edges.
pub struct ConfigGraph {
    pub input_len: usize,
    num_states: usize,
    /// `(from, to, transition)`.
    pub edges: Vec<(usize, usize, TransitionId)>,
    pub out: Vec<Vec<usize>>,
    pub inc: Vec<Vec<usize>>,
}

impl ConfigGraph {
    pub fn new(t: &TwoWayTransducer, input: &[char]) -> ConfigGraph {
        let n = input.len();
        let nq = t.num_states();
        let size = (n + 2) * nq;
        let mut g = ConfigGraph { input_len: n, num_states: nq, edges: Vec::new(), out: vec![Vec::new(); size], inc: vec![Vec::new(); size] };
        for cut in 1..=n + 1 {
            for q in 0..nq {
                let a = padded_symbol(input, t.reading(q).read_position(cut));
                for id in t.outgoing_on(q, a) {
                    if !t.is_live(id) {
                        continue;
                    }
                    let to = Configuration::new(t.transition(id).target, t.next_cut(id, cut));
                    let (u, v) = (g.index(Configuration::new(q, cut)), g.index(to));
                    g.out[u].push(g.edges.len());
                    g.inc[v].push(g.edges.len());
                    g.edges.push((u, v, id));
                }
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn index(&self, c: Configuration) -> usize {
        c.cut * self.num_states + c.state
    }

    pub fn config(&self, i: usize) -> Configuration {
        Configuration::new(i % self.num_states, i / self.num_states)
    }

    pub fn initial(&self, t: &TwoWayTransducer) -> Vec<usize> {
        t.initial_states().map(|q| self.index(Configuration::new(q, 1))).collect()
    }

    pub fn accepting(&self, t: &TwoWayTransducer) -> Vec<usize> {
        t.final_states().map(|q| self.index(Configuration::new(q, self.input_len + 1))).collect()
    }

    fn closure(&self, from: &[usize], forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = from.to_vec();
        for &s in from {
            seen[s] = true;
        }
        while let Some(u) = stack.pop() {
            let adj = if forward { &self.out[u] } else { &self.inc[u] };
            for &e in adj {
                let v = if forward { self.edges[e].1 } else { self.edges[e].0 };
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    pub fn reachable(&self, from: &[usize]) -> Vec<bool> {
        self.closure(from, true)
    }

    pub fn coreachable(&self, to: &[usize]) -> Vec<bool> {
        self.closure(to, false)
    }
}

/// All successful runs of `t` on `input` within the budget.
///
/// Runs are produced in a fixed order (depth-first, transitions in
/// declaration order). Branches that can no longer reach a final
/// configuration are not explored.
pub fn enumerate_runs(t: &TwoWayTransducer, input: &[char], budget: RunBudget) -> Result<RunSet> {
    t.check_input(input)?;
    let n = input.len();
    let graph = ConfigGraph::new(t, input);
    let alive = graph.coreachable(&graph.accepting(t));
    let mut out = RunSet { runs: Vec::new(), truncated: false };
    let is_final = |c: Configuration| c.cut == n + 1 && t.is_final(c.state);

    for q0 in t.initial_states() {
        let c0 = Configuration::new(q0, 1);
        if !alive[graph.index(c0)] || budget.visit_bound == 0 {
            continue;
        }
        let mut visits = vec![0usize; n + 2];
        visits[1] = 1;
        let mut configs = vec![c0];
        let mut trans: Vec<TransitionId> = Vec::new();
        // per depth: outgoing edges of the config and the next one to try
        let mut stack: Vec<(usize, usize)> = vec![(graph.index(c0), 0)];
        if is_final(c0) && !record(&mut out, t, input, &configs, &trans, budget.run_cap)? {
            return Ok(out);
        }
        while let Some(top) = stack.last_mut() {
            let (u, i) = *top;
            if i >= graph.out[u].len() {
                stack.pop();
                let c = configs.pop().unwrap();
                visits[c.cut] -= 1;
                trans.pop();
                continue;
            }
            top.1 += 1;
            let (_, v, id) = graph.edges[graph.out[u][i]];
            let next = graph.config(v);
            if !alive[v] || visits[next.cut] >= budget.visit_bound {
                continue;
            }
            if trans.len() >= budget.step_bound {
                out.truncated = true;
                continue;
            }
            visits[next.cut] += 1;
            configs.push(next);
            trans.push(id);
            stack.push((v, 0));
            if is_final(next) && !record(&mut out, t, input, &configs, &trans, budget.run_cap)? {
                return Ok(out);
            }
        }
    }
    Ok(out)
}

// Returns false once the cap is hit.
fn record(
    out: &mut RunSet,
    t: &TwoWayTransducer,
    input: &[char],
    configs: &[Configuration],
    trans: &[TransitionId],
    cap: usize,
) -> Result<bool> {
    if out.runs.len() >= cap {
        out.truncated = true;
        return Ok(false);
    }
    out.runs.push(Run::from_parts(t, input, configs.to_vec(), trans.to_vec())?);
    Ok(true)
}

pub fn is_k_visit(r: &Run, k: usize) -> bool {
    r.max_visits() <= k
}

/// What a prefix `⊢u` lets the machine do at the cut right after it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct LeftContext {
    /// Right-reading states in which a run first reaches the cut.
    entry: BTreeSet<StateId>,
    /// `(p, q)`: from left-reading `p` at the cut, the prefix returns in `q`.
    back: BTreeSet<(StateId, StateId)>,
}

/// What a suffix `v⊣` lets the machine do from the cut right before it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct RightContext {
    /// `(q, p)`: from right-reading `q` at the cut, the suffix returns in `p`.
    fwd: BTreeSet<(StateId, StateId)>,
    /// Right-reading states from which the suffix alone reaches acceptance.
    exit: BTreeSet<StateId>,
    /// Empty suffix: the cut is the last one, final states accept here.
    last: bool,
}

fn left_base(t: &TwoWayTransducer) -> LeftContext {
    let mut back = BTreeSet::new();
    for tr in t.transitions() {
        if tr.read == Symbol::LeftMark && t.reading(tr.source) == Reading::Left && t.reading(tr.target) == Reading::Right {
            back.insert((tr.source, tr.target));
        }
    }
    LeftContext { entry: t.initial_states().collect(), back }
}

// Right-reading states reached at the next cut from `starts` at this cut.
fn left_closure(t: &TwoWayTransducer, s: &LeftContext, a: Symbol, starts: &[StateId]) -> BTreeSet<StateId> {
    let mut seen = vec![false; t.num_states()];
    let mut stack = starts.to_vec();
    let mut out = BTreeSet::new();
    while let Some(x) = stack.pop() {
        if std::mem::replace(&mut seen[x], true) {
            continue;
        }
        match t.reading(x) {
            Reading::Left => stack.extend(s.back.iter().filter(|b| b.0 == x).map(|b| b.1)),
            Reading::Right => {
                for id in t.outgoing_on(x, a) {
                    let z = t.transition(id).target;
                    match t.reading(z) {
                        Reading::Right => {
                            out.insert(z);
                        }
                        Reading::Left => stack.push(z),
                    }
                }
            }
        }
    }
    out
}

fn left_extend(t: &TwoWayTransducer, s: &LeftContext, a: Symbol) -> LeftContext {
    let entry = left_closure(t, s, a, &s.entry.iter().copied().collect::<Vec<_>>());
    let mut back = BTreeSet::new();
    for p in (0..t.num_states()).filter(|&p| t.reading(p) == Reading::Left) {
        for id in t.outgoing_on(p, a) {
            let z = t.transition(id).target;
            match t.reading(z) {
                Reading::Right => {
                    back.insert((p, z));
                }
                Reading::Left => {
                    for q in left_closure(t, s, a, &[z]) {
                        back.insert((p, q));
                    }
                }
            }
        }
    }
    LeftContext { entry, back }
}

fn right_base(t: &TwoWayTransducer) -> RightContext {
    let mut fwd = BTreeSet::new();
    for tr in t.transitions() {
        if tr.read == Symbol::RightMark && t.reading(tr.source) == Reading::Right && t.reading(tr.target) == Reading::Left {
            fwd.insert((tr.source, tr.target));
        }
    }
    RightContext { fwd, exit: BTreeSet::new(), last: true }
}

fn right_extend(t: &TwoWayTransducer, s: &RightContext, a: Symbol) -> RightContext {
    let mut fwd = BTreeSet::new();
    let mut exit = BTreeSet::new();
    for q in (0..t.num_states()).filter(|&q| t.reading(q) == Reading::Right) {
        // states at the next cut
        let mut seen = vec![false; t.num_states()];
        let mut stack = Vec::new();
        for id in t.outgoing_on(q, a) {
            let z = t.transition(id).target;
            match t.reading(z) {
                Reading::Right => stack.push(z),
                Reading::Left => {
                    fwd.insert((q, z));
                }
            }
        }
        while let Some(x) = stack.pop() {
            if std::mem::replace(&mut seen[x], true) {
                continue;
            }
            if (s.last && t.is_final(x)) || s.exit.contains(&x) {
                exit.insert(q);
            }
            match t.reading(x) {
                Reading::Right => stack.extend(s.fwd.iter().filter(|f| f.0 == x).map(|f| f.1)),
                Reading::Left => {
                    for id in t.outgoing_on(x, a) {
                        let z = t.transition(id).target;
                        match t.reading(z) {
                            Reading::Right => stack.push(z),
                            Reading::Left => {
                                fwd.insert((q, z));
                            }
                        }
                    }
                }
            }
        }
    }
    RightContext { fwd, exit, last: false }
}

/// Contexts reachable from `base` by extension, each with a shortest word.
fn saturate<C: Clone + Eq + std::hash::Hash>(
    base: C,
    letters: &[Symbol],
    cap: usize,
    extend: impl Fn(&C, Symbol) -> C,
) -> Result<Vec<(C, Vec<char>)>> {
    let mut index: HashMap<C, usize> = HashMap::new();
    let mut all = vec![(base.clone(), Vec::new())];
    index.insert(base, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for &a in letters {
            let next = extend(&all[i].0, a);
            if index.contains_key(&next) {
                continue;
            }
            if all.len() >= cap {
                return Err(Error::BoundExceeded { what: "context summaries", cap });
            }
            let Symbol::Letter(c) = a else { unreachable!() };
            let mut w = all[i].1.clone();
            w.push(c);
            index.insert(next.clone(), all.len());
            all.push((next, w));
            queue.push_back(all.len() - 1);
        }
    }
    Ok(all)
}

/// An input and cut where some successful run needs more than `k` visits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisitWitness {
    pub input: String,
    pub cut: usize,
    /// `None` when visits at that cut are unbounded.
    pub visits: Option<usize>,
}

pub const DEFAULT_CONTEXT_CAP: usize = 200_000;

/// Whether every successful run of `t`, on every input, visits each cut at
/// most `k` times.
pub fn check_all_runs_k_visit(t: &TwoWayTransducer, k: usize) -> Result<bool> {
    Ok(k_visit_witness(t, k, DEFAULT_CONTEXT_CAP)?.is_none())
}

/// Like [`check_all_runs_k_visit`], returning a violating input and cut.
///
/// A run restricted to one cut is a path through the cut's states: it
/// alternates between excursions to the right (summarized by the suffix)
/// and to the left (summarized by the prefix). The check enumerates every
/// reachable (prefix, suffix) summary pair and looks for a useful path of
/// more than `k` states, or a useful cycle.
pub fn k_visit_witness(t: &TwoWayTransducer, k: usize, cap: usize) -> Result<Option<VisitWitness>> {
    let letters: Vec<Symbol> = t.input_alphabet().iter().map(|&a| Symbol::Letter(a)).collect();
    let lefts = saturate(left_base(t), &letters, cap, |s, a| left_extend(t, s, a))?;
    let rights = saturate(right_base(t), &letters, cap, |s, a| right_extend(t, s, a))?;
    let nq = t.num_states();
    for (s, u) in &lefts {
        for (r, v) in &rights {
            let mut succ: Vec<Vec<StateId>> = vec![Vec::new(); nq];
            for &(q, p) in &r.fwd {
                succ[q].push(p);
            }
            for &(p, q) in &s.back {
                succ[p].push(q);
            }
            let accepting = |x: StateId| (r.last && t.is_final(x)) || (t.reading(x) == Reading::Right && r.exit.contains(&x));
            // useful = reachable from entry and co-reachable to acceptance
            let mut reach = vec![false; nq];
            let mut stack: Vec<StateId> = s.entry.iter().copied().collect();
            while let Some(x) = stack.pop() {
                if !std::mem::replace(&mut reach[x], true) {
                    stack.extend(succ[x].iter().copied());
                }
            }
            let mut co = vec![false; nq];
            let mut changed = true;
            while changed {
                changed = false;
                for x in 0..nq {
                    if !co[x] && (accepting(x) || succ[x].iter().any(|&y| co[y])) {
                        co[x] = true;
                        changed = true;
                    }
                }
            }
            let useful: Vec<bool> = (0..nq).map(|x| reach[x] && co[x]).collect();
            let witness = |visits| VisitWitness {
                input: u.iter().chain(v.iter()).collect(),
                cut: u.len() + 1,
                visits,
            };
            // longest useful path ending in an accepting state, by memoized DFS
            let mut longest: Vec<Option<usize>> = vec![None; nq];
            let mut on_stack = vec![false; nq];
            let mut cyclic = false;
            fn dfs(
                x: usize,
                succ: &[Vec<usize>],
                useful: &[bool],
                accepting: &dyn Fn(usize) -> bool,
                longest: &mut [Option<usize>],
                on_stack: &mut [bool],
                cyclic: &mut bool,
            ) -> usize {
                if let Some(l) = longest[x] {
                    return l;
                }
                on_stack[x] = true;
                let mut best = if accepting(x) { 1 } else { 0 };
                for &y in &succ[x] {
                    if !useful[y] {
                        continue;
                    }
                    if on_stack[y] {
                        *cyclic = true;
                        continue;
                    }
                    let l = dfs(y, succ, useful, accepting, longest, on_stack, cyclic);
                    if l > 0 {
                        best = best.max(l + 1);
                    }
                }
                on_stack[x] = false;
                longest[x] = Some(best);
                best
            }
            let mut most = 0;
            for &x in &s.entry {
                if useful[x] {
                    most = most.max(dfs(x, &succ, &useful, &accepting, &mut longest, &mut on_stack, &mut cyclic));
                }
            }
            if cyclic {
                return Ok(Some(witness(None)));
            }
            if most > k {
                return Ok(Some(witness(Some(most))));
            }
        }
    }
    Ok(None)
}

/// Repeats the loop `interval` of `r` `times` times.
///
/// The run is cut into the subruns left of, inside, and right of the
/// interval; copies of the inside subruns are glued in the order dictated
/// by the flows, and the result is re-checked step by step.
pub fn pump_run(t: &TwoWayTransducer, r: &Run, interval: Interval, times: usize) -> Result<Run> {
    let n = r.input().len();
    if interval.is_empty() || interval.lo < 1 || interval.hi > n + 1 {
        return Err(Error::InvalidInterval { lo: interval.lo, hi: interval.hi, last: n + 1 });
    }
    if times == 0 {
        return Err(Error::InvalidRun("pumping count must be positive".into()));
    }
    let p = PaddedRun::new(t, r)?;
    let left = flow_of_padded(&p, Interval::new(0, interval.lo))?;
    let mid = flow_of_padded(&p, interval)?;
    let right = flow_of_padded(&p, Interval::new(interval.hi, n + 2))?;
    if !is_idempotent(&mid.flow()) {
        return Err(Error::NotALoop { lo: interval.lo, hi: interval.hi });
    }
    let mut parts: Vec<&FlowGraph> = vec![&left.graph];
    parts.extend(std::iter::repeat(&mid.graph).take(times));
    parts.push(&right.graph);
    let witness = |f: usize| {
        if f == 0 {
            &left.witnesses
        } else if f <= times {
            &mid.witnesses
        } else {
            &right.witnesses
        }
    };
    let mut trans = Vec::new();
    for (f, e) in edge_run_order(&parts)? {
        let w = witness(f)[e];
        trans.extend(p.steps[w.start..w.end].iter().filter_map(|s| s.real).map(|k| r.transitions()[k]));
    }
    let (lo, hi) = (interval.lo - 1, interval.hi - 1);
    let w = r.input();
    let mut input = w[..lo].to_vec();
    for _ in 0..times {
        input.extend_from_slice(&w[lo..hi]);
    }
    input.extend_from_slice(&w[hi..]);
    let pumped = Run::from_transitions(t, &input, r.configs()[0], trans)?;
    if !pumped.is_successful() {
        return Err(Error::InvalidRun("pumped run is not successful".into()));
    }
    Ok(pumped)
}

/// Pumping keeps run order: for every edge `f` of the flows left and right
/// of the loop `interval` and every straight edge `e` of the loop flow, the
/// subrun of `f` comes before that of `e` in `r` exactly when it comes
/// before every copy of `e` in the pumped run. Returns the violations.
pub fn pump_order_violations(t: &TwoWayTransducer, r: &Run, interval: Interval, times: usize) -> Result<Vec<String>> {
    let pumped = pump_run(t, r, interval, times)?;
    let n = r.input().len();
    let len = interval.len();
    let p = PaddedRun::new(t, r)?;
    let q = PaddedRun::new(t, &pumped)?;
    let outer = [Interval::new(0, interval.lo), Interval::new(interval.hi, n + 2)];
    let outer_pumped = [Interval::new(0, interval.lo), Interval::new(interval.hi + (times - 1) * len, n + 2 + (times - 1) * len)];
    let mid = flow_of_padded(&p, interval)?;
    let copies = (0..times)
        .map(|k| flow_of_padded(&q, Interval::new(interval.lo + k * len, interval.hi + k * len)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (side, (&o, &o2)) in outer.iter().zip(&outer_pumped).enumerate() {
        let f = flow_of_padded(&p, o)?;
        let f2 = flow_of_padded(&q, o2)?;
        if f.graph != f2.graph {
            out.push(format!("flow of {o} changed by pumping"));
            continue;
        }
        for (fi, wf) in f.witnesses.iter().enumerate() {
            for (ei, e) in mid.graph.edges.iter().enumerate() {
                if !e.is_straight() {
                    continue;
                }
                let before = wf.start < mid.witnesses[ei].start;
                for (k, c) in copies.iter().enumerate() {
                    if c.graph != mid.graph {
                        out.push(format!("copy {k} of {interval} has a different flow"));
                        continue;
                    }
                    if (f2.witnesses[fi].start < c.witnesses[ei].start) != before {
                        out.push(format!(
                            "edge {fi} {} of the {} flow and copy {} of straight edge {ei} swap order",
                            f.graph.edges[fi].kind(),
                            ["left", "right"][side],
                            k + 1
                        ));
                    }
                }
            }
        }
    }
    Ok(out)
}
