//! Inversions, the resynchronizability decision, cross-width, traversals.
//!
//! An inversion of a run is a pair of loops `I < I'` with productive
//! straight edges `e` in `I` and `e'` in `I'` such that the subrun behind
//! `e'` comes first. A bounded-visit transducer admits an order-preserving
//! resynchronization exactly when none of its successful runs has one.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{compose_traced, edge_run_order, is_idempotent, Edge, Flow, FlowGraph, FlowTable, Node, PaddedRun, Subrun};
use crate::machine::{Symbol, TwoWayTransducer};
use crate::monoid::{generate_monoid, realize, FlowMonoid};
use crate::run::{Interval, Run, SynchronizedPair};
use crate::runner::check_all_runs_k_visit;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Inversion {
    /// The left loop and its productive straight edge.
    pub first: Interval,
    pub first_edge: Edge,
    pub first_subrun: Subrun,
    /// The right loop, whose edge is traversed earlier.
    pub second: Interval,
    pub second_edge: Edge,
    pub second_subrun: Subrun,
}

/// Loops of a run: non-empty intervals of real positions with an
/// idempotent flow.
pub fn loops(p: &PaddedRun, table: &mut FlowTable) -> Vec<Interval> {
    let n = p.input_len;
    let mut out = Vec::new();
    for lo in 1..=n {
        for hi in lo + 1..=n + 1 {
            let i = Interval::new(lo, hi);
            if is_idempotent(&table.get(i).flow()) {
                out.push(i);
            }
        }
    }
    out
}

fn productive_straight(g: &FlowGraph) -> impl Iterator<Item = usize> + '_ {
    g.edges.iter().enumerate().filter(|(_, e)| e.productive && e.is_straight()).map(|(i, _)| i)
}

/// First inversion of a successful run, if any (by left loop, then right
/// loop, then edges).
pub fn find_inversion(t: &TwoWayTransducer, r: &Run) -> Result<Option<Inversion>> {
    let p = PaddedRun::new(t, r)?;
    let mut table = FlowTable::new(&p);
    let ls = loops(&p, &mut table);
    for &a in &ls {
        for &b in ls.iter().filter(|b| a.hi <= b.lo) {
            let fa = table.get(a).clone();
            let fb = table.get(b).clone();
            for e in productive_straight(&fa.graph) {
                for e2 in productive_straight(&fb.graph) {
                    if fb.witnesses[e2].start < fa.witnesses[e].start {
                        return Ok(Some(Inversion {
                            first: a,
                            first_edge: fa.graph.edges[e],
                            first_subrun: fa.witnesses[e],
                            second: b,
                            second_edge: fb.graph.edges[e2],
                            second_subrun: fb.witnesses[e2],
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// A flow whose edges remember which marked edges they pass through.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Marked {
    graph: FlowGraph,
    marks: Vec<Vec<u8>>,
}

fn extend_marked(x: &Marked, y: &FlowGraph, mark: Option<(usize, u8)>) -> Option<Marked> {
    let (graph, traces) = compose_traced(&x.graph, y)?;
    let marks = traces
        .iter()
        .map(|tr| {
            let mut m = Vec::new();
            for &(part, e) in tr {
                if part == 0 {
                    m.extend_from_slice(&x.marks[e]);
                } else if mark.is_some_and(|(me, _)| me == e) {
                    m.push(mark.unwrap().1);
                }
            }
            m
        })
        .collect();
    Some(Marked { graph, marks })
}

/// One stage of the symbolic search: deduplicated marked flows, each with
/// the stage-local way it was reached.
struct Stage<P> {
    items: Vec<(Marked, P)>,
    index: HashMap<Marked, usize>,
}

impl<P> Stage<P> {
    fn new() -> Self {
        Stage { items: Vec::new(), index: HashMap::new() }
    }

    fn add(&mut self, m: Marked, p: P) -> Option<usize> {
        if self.index.contains_key(&m) {
            return None;
        }
        self.index.insert(m.clone(), self.items.len());
        self.items.push((m, p));
        Some(self.items.len() - 1)
    }
}

/// Words of the five parts `F1 · E · F2 · E' · F3` of a symbolic witness,
/// as generator indices of the monoid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Quintuple {
    pub parts: [Vec<usize>; 5],
    /// Edge of `E` and of `E'` (canonical indices).
    pub edge: usize,
    pub edge2: usize,
}

impl Quintuple {
    /// The generator word with both loops repeated `n` times.
    pub fn pumped_word(&self, n: usize) -> Vec<usize> {
        let mut w = self.parts[0].clone();
        for _ in 0..n {
            w.extend_from_slice(&self.parts[1]);
        }
        w.extend_from_slice(&self.parts[2]);
        for _ in 0..n {
            w.extend_from_slice(&self.parts[3]);
        }
        w.extend_from_slice(&self.parts[4]);
        w
    }

    pub fn flows(&self, m: &FlowMonoid) -> [FlowGraph; 5] {
        let prod = |w: &[usize]| -> FlowGraph {
            let mut it = w.iter().map(|&g| m.generators[g].graph.clone());
            let first = it.next().expect("non-empty part");
            it.fold(first, |a, b| compose_traced(&a, &b).expect("part has a product").0)
        };
        [
            prod(&self.parts[0]),
            prod(&self.parts[1]),
            if self.parts[2].is_empty() { FlowGraph::identity(&prod(&self.parts[1]).right) } else { prod(&self.parts[2]) },
            prod(&self.parts[3]),
            prod(&self.parts[4]),
        ]
    }

    /// Re-checks the witness by ordering the edges of the juxtaposition.
    pub fn verify(&self, m: &FlowMonoid) -> bool {
        let f = self.flows(m);
        let parts: Vec<&FlowGraph> = f.iter().collect();
        let Ok(order) = edge_run_order(&parts) else { return false };
        let at = |flow: usize, e: usize| order.iter().position(|&x| x == (flow, e));
        matches!((at(1, self.edge), at(3, self.edge2)), (Some(a), Some(b)) if b < a)
            && f[1].edges[self.edge].productive
            && f[3].edges[self.edge2].productive
    }
}

fn is_inner(g: &FlowGraph) -> bool {
    !g.mentions_virtual()
}

/// Searches the monoid for an accepting product `F1·E·F2·E'·F3` with
/// idempotent `E`, `E'` whose marked productive straight edges are
/// traversed in the wrong order.
pub fn has_inversion_symbolic(t: &TwoWayTransducer, m: &FlowMonoid) -> Option<Quintuple> {
    let _ = t;
    let inner_gens: Vec<usize> = (0..m.generators.len()).filter(|&g| matches!(m.generators[g].letter, Symbol::Letter(_))).collect();
    let end_gens: Vec<usize> = (0..m.generators.len()).filter(|&g| m.generators[g].letter == Symbol::RightMark).collect();
    let mut idem = Vec::new();
    for (i, f) in m.elements().iter().enumerate() {
        if let Flow::Graph(g) = f {
            if is_inner(g) && productive_straight(g).next().is_some() && is_idempotent(f) {
                idem.push(i);
            }
        }
    }
    let lefts: Vec<usize> = (0..m.len()).filter(|&i| m.element(i).graph().is_some_and(|g| g.left == [Node::START] && g.right.iter().all(|n| !n.is_virtual()))).collect();

    // stage 1: F1 · E with e marked
    let mut s1: Stage<(usize, usize, usize)> = Stage::new();
    for &l in &lefts {
        let lg = m.element(l).graph().unwrap();
        let lm = Marked { graph: lg.clone(), marks: vec![Vec::new(); lg.edges.len()] };
        for &e in &idem {
            let eg = m.element(e).graph().unwrap();
            for edge in productive_straight(eg) {
                if let Some(x) = extend_marked(&lm, eg, Some((edge, 1))) {
                    s1.add(x, (l, e, edge));
                }
            }
        }
    }
    // stage 2: · F2, closed under inner letters; parent is (stage, index)
    let mut s2: Stage<(bool, usize, usize)> = Stage::new();
    let mut queue = VecDeque::new();
    for (i, (x, _)) in s1.items.iter().enumerate() {
        if let Some(j) = s2.add(x.clone(), (true, i, usize::MAX)) {
            queue.push_back(j);
        }
    }
    while let Some(j) = queue.pop_front() {
        for &g in &inner_gens {
            if let Some(y) = extend_marked(&s2.items[j].0, &m.generators[g].graph, None) {
                if let Some(k) = s2.add(y, (false, j, g)) {
                    queue.push_back(k);
                }
            }
        }
    }
    // stage 3: · E' with e' marked
    let mut s3: Stage<(usize, usize, usize)> = Stage::new();
    for (j, (x, _)) in s2.items.iter().enumerate() {
        for &e in &idem {
            let eg = m.element(e).graph().unwrap();
            for edge in productive_straight(eg) {
                if let Some(y) = extend_marked(x, eg, Some((edge, 2))) {
                    s3.add(y, (j, e, edge));
                }
            }
        }
    }
    // stage 4: · F3, inner letters then ⊣
    let mut s4: Stage<(bool, usize, usize)> = Stage::new();
    let mut queue = VecDeque::new();
    for (i, (x, _)) in s3.items.iter().enumerate() {
        if let Some(j) = s4.add(x.clone(), (true, i, usize::MAX)) {
            queue.push_back(j);
        }
    }
    let mut found = None;
    'search: while let Some(j) = queue.pop_front() {
        for &g in &end_gens {
            if let Some(y) = extend_marked(&s4.items[j].0, &m.generators[g].graph, None) {
                if y.graph.is_accepting() && y.marks[0] == [2, 1] {
                    found = Some((j, g));
                    break 'search;
                }
            }
        }
        for &g in &inner_gens {
            if let Some(y) = extend_marked(&s4.items[j].0, &m.generators[g].graph, None) {
                if let Some(k) = s4.add(y, (false, j, g)) {
                    queue.push_back(k);
                }
            }
        }
    }
    let (j4, last) = found?;

    // unwind the stages into generator words
    let unwind = |stage: &Stage<(bool, usize, usize)>, mut j: usize| -> (usize, Vec<usize>) {
        let mut w = Vec::new();
        loop {
            let (root, parent, g) = stage.items[j].1;
            if root {
                w.reverse();
                return (parent, w);
            }
            w.push(g);
            j = parent;
        }
    };
    let (j3, mut f3) = unwind(&s4, j4);
    f3.push(last);
    let (j2, e2, edge2) = s3.items[j3].1;
    let (j1, f2) = unwind(&s2, j2);
    let (l, e, edge) = s1.items[j1].1;
    Some(Quintuple {
        parts: [m.word(l).to_vec(), m.word(e).to_vec(), f2, m.word(e2).to_vec(), f3],
        edge,
        edge2,
    })
}

/// A concrete run with an inversion, found through the monoid.
#[derive(Clone, Debug)]
pub struct InversionWitness {
    pub quintuple: Quintuple,
    pub run: Run,
    pub inversion: Inversion,
}

#[derive(Clone, Debug)]
pub struct Decision {
    pub resynchronizable: bool,
    pub monoid_size: usize,
    pub witness: Option<InversionWitness>,
}

/// Decides whether a `k`-visit transducer has an order-preserving
/// resynchronization with bounded traversal.
///
/// Fails with [`Error::NotKVisit`] when some run needs more than `k` visits.
pub fn decide_resynchronizable(t: &TwoWayTransducer, k: usize, cap: usize) -> Result<(Decision, FlowMonoid)> {
    if !check_all_runs_k_visit(t, k)? {
        return Err(Error::NotKVisit { k });
    }
    let m = generate_monoid(t, k, cap)?;
    let Some(q) = has_inversion_symbolic(t, &m) else {
        return Ok((Decision { resynchronizable: true, monoid_size: m.len(), witness: None }, m));
    };
    if !q.verify(&m) {
        return Err(Error::InvalidRun("symbolic witness fails the run-order check".into()));
    }
    let run = realize(t, &m, &q.pumped_word(1))?;
    let inversion = find_inversion(t, &run)?
        .ok_or_else(|| Error::InvalidRun("realized witness run has no inversion".into()))?;
    let witness = InversionWitness { quintuple: q, run, inversion };
    Ok((Decision { resynchronizable: false, monoid_size: m.len(), witness: Some(witness) }, m))
}

/// A cross of width `width`: every output position in `first` precedes
/// every one in `second`, and every origin in `first` is larger than every
/// origin in `second`. Positions are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cross {
    pub width: usize,
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

/// Maximal width of a cross of the pair, counting distinct origins.
///
/// Any cross is separated by an output split point and an origin
/// threshold, so it suffices to try all of those.
pub fn cross_width(p: &SynchronizedPair) -> Cross {
    let m = p.origin.len();
    let n = p.input_len().max(1);
    let mut best = Cross { width: 0, first: Vec::new(), second: Vec::new() };
    for split in 1..m {
        for theta in 1..n {
            let mut hi: Vec<(usize, usize)> = Vec::new();
            let mut seen = BTreeSet::new();
            for (x, &o) in p.origin[..split].iter().enumerate() {
                if o > theta && seen.insert(o) {
                    hi.push((x + 1, o));
                }
            }
            let mut lo: Vec<(usize, usize)> = Vec::new();
            let mut seen = BTreeSet::new();
            for (x, &o) in p.origin[split..].iter().enumerate() {
                if o <= theta && seen.insert(o) {
                    lo.push((split + x + 1, o));
                }
            }
            let w = hi.len().min(lo.len());
            if w > best.width {
                best = Cross {
                    width: w,
                    first: hi[..w].iter().map(|&(x, _)| x).collect(),
                    second: lo[..w].iter().map(|&(x, _)| x).collect(),
                };
            }
        }
    }
    best
}

pub fn is_order_preserving(p: &SynchronizedPair) -> bool {
    p.origin.windows(2).all(|w| w[0] <= w[1])
}

/// Source origins that traverse input position `y'`, split by direction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Traversal {
    pub position: usize,
    pub left_to_right: BTreeSet<usize>,
    pub right_to_left: BTreeSet<usize>,
}

impl Traversal {
    pub fn count(&self) -> usize {
        self.left_to_right.union(&self.right_to_left).count()
    }
}

/// For each input position `y'`, the origins `y` moved across it: left to
/// right when `y ≤ y' < z`, right to left when `z < y' ≤ y`, for some
/// output position moved from `y` to `z`.
pub fn traversals(source: &SynchronizedPair, target: &SynchronizedPair) -> Result<Vec<Traversal>> {
    source.same_words(target)?;
    let n = source.input_len();
    let mut out: Vec<Traversal> = (1..=n).map(|y| Traversal { position: y, ..Default::default() }).collect();
    for (&y, &z) in source.origin.iter().zip(&target.origin) {
        if y < z {
            for t in &mut out[y - 1..(z - 1).min(n)] {
                t.left_to_right.insert(y);
            }
        } else if z < y {
            for t in &mut out[z..y.min(n)] {
                t.right_to_left.insert(y);
            }
        }
    }
    Ok(out)
}

pub fn max_traversal(source: &SynchronizedPair, target: &SynchronizedPair) -> Result<usize> {
    Ok(traversals(source, target)?.iter().map(Traversal::count).max().unwrap_or(0))
}
