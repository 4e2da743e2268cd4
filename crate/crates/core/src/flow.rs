//! Flows: what a run does inside an interval of its input.
//!
//! A flow has an ordered list of vertices on each border (the visits of the
//! run at the left and right cut, in run order) and one edge per maximal
//! subrun inside the interval. Each vertex is the endpoint of exactly one
//! edge. Sources are right-reading vertices on the left and left-reading
//! ones on the right; targets are the other two.
//!
//! Runs are padded before their flows are taken: a virtual `START` vertex
//! sits at cut 0 and feeds the initial configuration while reading `⊢`; a
//! virtual `END` vertex sits at cut `n + 2` and is reached while reading
//! `⊣`. A left-reading final state is always entered by a `⊣` U-turn; that
//! U-turn becomes the edge into `END` itself. With this padding every run
//! has the single-edge flow `START → END` on the whole padded input, and
//! flows compose along concatenation of intervals.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::machine::{Reading, StateId, TwoWayTransducer};
use crate::run::{Interval, Run};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Label {
    Start,
    State(StateId),
    End,
}

/// A border vertex: a state label plus its reading direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Node {
    pub label: Label,
    pub reading: Reading,
}

impl Node {
    pub fn state(t: &TwoWayTransducer, q: StateId) -> Node {
        Node { label: Label::State(q), reading: t.reading(q) }
    }

    pub const START: Node = Node { label: Label::Start, reading: Reading::Right };
    pub const END: Node = Node { label: Label::End, reading: Reading::Right };

    pub fn is_virtual(&self) -> bool {
        matches!(self.label, Label::Start | Label::End)
    }

    pub fn name(&self, t: &TwoWayTransducer) -> String {
        match self.label {
            Label::Start => "START".into(),
            Label::End => "END".into(),
            Label::State(q) => t.state_name(q).into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Side {
    L,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Vertex {
    pub side: Side,
    pub index: usize,
}

impl Vertex {
    pub fn l(index: usize) -> Vertex {
        Vertex { side: Side::L, index }
    }

    pub fn r(index: usize) -> Vertex {
        Vertex { side: Side::R, index }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.side, self.index + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Edge {
    pub from: Vertex,
    pub to: Vertex,
    pub productive: bool,
}

impl Edge {
    /// Crosses the interval (`LR` or `RL`).
    pub fn is_straight(&self) -> bool {
        self.from.side != self.to.side
    }

    pub fn kind(&self) -> &'static str {
        match (self.from.side, self.to.side) {
            (Side::L, Side::L) => "LL",
            (Side::L, Side::R) => "LR",
            (Side::R, Side::L) => "RL",
            (Side::R, Side::R) => "RR",
        }
    }
}

/// A flow other than ⊥, in canonical form (edges sorted by source).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FlowGraph {
    pub left: Vec<Node>,
    pub right: Vec<Node>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Flow {
    Bottom,
    Graph(FlowGraph),
}

fn is_source(side: Side, n: &Node) -> bool {
    matches!((side, n.reading), (Side::L, Reading::Right) | (Side::R, Reading::Left))
}

impl FlowGraph {
    pub fn side(&self, s: Side) -> &[Node] {
        match s {
            Side::L => &self.left,
            Side::R => &self.right,
        }
    }

    pub fn node(&self, v: Vertex) -> &Node {
        &self.side(v.side)[v.index]
    }

    /// Identity on a single cut: every vertex is passed straight through.
    pub fn identity(nodes: &[Node]) -> FlowGraph {
        let edges = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| match n.reading {
                Reading::Right => Edge { from: Vertex::l(i), to: Vertex::r(i), productive: false },
                Reading::Left => Edge { from: Vertex::r(i), to: Vertex::l(i), productive: false },
            })
            .collect();
        FlowGraph { left: nodes.to_vec(), right: nodes.to_vec(), edges }.canonical()
    }

    /// Sorts edges; returns the permutation applied (new position → old).
    fn canonicalize(&mut self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.edges.len()).collect();
        perm.sort_by_key(|&i| self.edges[i].from);
        self.edges = perm.iter().map(|&i| self.edges[i]).collect();
        perm
    }

    pub fn canonical(mut self) -> FlowGraph {
        self.canonicalize();
        self
    }

    /// Structural invariants: each vertex ends exactly one edge, edges run
    /// from sources to targets, edges are sorted.
    pub fn check(&self) -> std::result::Result<(), String> {
        let mut seen_l = vec![0u8; self.left.len()];
        let mut seen_r = vec![0u8; self.right.len()];
        for e in &self.edges {
            for v in [e.from, e.to] {
                let slot = match v.side {
                    Side::L => seen_l.get_mut(v.index),
                    Side::R => seen_r.get_mut(v.index),
                };
                match slot {
                    Some(c) => *c += 1,
                    None => return Err(format!("edge endpoint {v} out of range")),
                }
            }
            if !is_source(e.from.side, self.node(e.from)) {
                return Err(format!("edge starts at non-source {}", e.from));
            }
            if is_source(e.to.side, self.node(e.to)) {
                return Err(format!("edge ends at source {}", e.to));
            }
            if e.from == e.to {
                return Err(format!("loop at {}", e.from));
            }
        }
        if let Some(i) = seen_l.iter().position(|&c| c != 1) {
            return Err(format!("L{} is the endpoint of {} edges", i + 1, seen_l[i]));
        }
        if let Some(i) = seen_r.iter().position(|&c| c != 1) {
            return Err(format!("R{} is the endpoint of {} edges", i + 1, seen_r[i]));
        }
        if self.edges.windows(2).any(|w| w[0].from >= w[1].from) {
            return Err("edges are not in canonical order".into());
        }
        Ok(())
    }

    /// Edge leaving each vertex (sources only), per side.
    fn out_index(&self) -> (Vec<usize>, Vec<usize>) {
        let mut l = vec![usize::MAX; self.left.len()];
        let mut r = vec![usize::MAX; self.right.len()];
        for (i, e) in self.edges.iter().enumerate() {
            match e.from.side {
                Side::L => l[e.from.index] = i,
                Side::R => r[e.from.index] = i,
            }
        }
        (l, r)
    }

    pub fn mentions_virtual(&self) -> bool {
        self.left.iter().chain(&self.right).any(Node::is_virtual)
    }

    /// Single edge `START → END`: the flow of a whole successful run.
    pub fn is_accepting(&self) -> bool {
        self.left == [Node::START] && self.right == [Node::END] && self.edges.len() == 1
    }
}

impl Flow {
    pub fn graph(&self) -> Option<&FlowGraph> {
        match self {
            Flow::Bottom => None,
            Flow::Graph(g) => Some(g),
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Flow::Bottom)
    }

    pub fn is_accepting(&self) -> bool {
        self.graph().is_some_and(FlowGraph::is_accepting)
    }
}

/// One edge of a glued pair, listed as the edges it is made of, in path
/// order. `0` refers to the left operand and `1` to the right one.
pub type Trace = Vec<(u8, usize)>;

/// Glues `f` and `g` along their common border.
///
/// Returns `None` when the borders differ or a cycle closes (⊥). Otherwise
/// the product's vertices and, per product edge, its trace. The product
/// is not yet canonical.
pub fn glue(f: &FlowGraph, g: &FlowGraph) -> Option<(Vec<(Vertex, Vertex)>, Vec<Trace>)> {
    if f.right != g.left {
        return None;
    }
    let (f_out_l, f_out_r) = f.out_index();
    let (g_out_l, g_out_r) = g.out_index();
    let mut ends = Vec::new();
    let mut traces = Vec::new();
    let mut used = 0usize;
    let mut start = |part: u8, v: Vertex, ends: &mut Vec<(Vertex, Vertex)>| -> Option<()> {
        let mut trace = Vec::new();
        let (mut part, mut e) = match (part, v.side) {
            (0, _) => (0u8, f_out_l[v.index]),
            _ => (1u8, g_out_r[v.index]),
        };
        loop {
            trace.push((part, e));
            used += 1;
            if trace.len() > f.edges.len() + g.edges.len() {
                return None;
            }
            let edge = if part == 0 { &f.edges[e] } else { &g.edges[e] };
            match (part, edge.to.side) {
                (0, Side::L) => {
                    ends.push((v, Vertex::l(edge.to.index)));
                    break;
                }
                (1, Side::R) => {
                    ends.push((v, Vertex::r(edge.to.index)));
                    break;
                }
                (0, Side::R) => {
                    part = 1;
                    e = g_out_l[edge.to.index];
                }
                _ => {
                    part = 0;
                    e = f_out_r[edge.to.index];
                }
            }
            if e == usize::MAX {
                return None;
            }
        }
        traces.push(trace);
        Some(())
    };
    // Sources of the product: right-reading on f's left, left-reading on g's right.
    for (i, n) in f.left.iter().enumerate() {
        if n.reading == Reading::Right {
            start(0, Vertex::l(i), &mut ends)?;
        }
    }
    for (i, n) in g.right.iter().enumerate() {
        if n.reading == Reading::Left {
            start(1, Vertex::r(i), &mut ends)?;
        }
    }
    if used != f.edges.len() + g.edges.len() {
        return None;
    }
    Some((ends, traces))
}

/// Glues and canonicalizes; traces are permuted along with the edges.
pub fn compose_traced(f: &FlowGraph, g: &FlowGraph) -> Option<(FlowGraph, Vec<Trace>)> {
    let (ends, traces) = glue(f, g)?;
    let edges = ends
        .iter()
        .zip(&traces)
        .map(|(&(from, to), tr)| Edge {
            from,
            to,
            productive: tr.iter().any(|&(p, e)| if p == 0 { f.edges[e].productive } else { g.edges[e].productive }),
        })
        .collect();
    let mut h = FlowGraph { left: f.left.clone(), right: g.right.clone(), edges };
    let perm = h.canonicalize();
    let traces = perm.into_iter().map(|i| traces[i].clone()).collect();
    Some((h, traces))
}

/// Product of two flows; ⊥ is absorbing.
pub fn compose(f: &Flow, g: &Flow) -> Flow {
    match (f, g) {
        (Flow::Graph(f), Flow::Graph(g)) => match compose_traced(f, g) {
            Some((h, _)) => Flow::Graph(h),
            None => Flow::Bottom,
        },
        _ => Flow::Bottom,
    }
}

pub fn is_idempotent(f: &Flow) -> bool {
    !f.is_bottom() && compose(f, f) == *f
}

/// One step of a padded run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PaddedStep {
    /// Padded position read.
    pub read: usize,
    pub productive: bool,
    /// Index of the real step, `None` for the virtual entry/exit.
    pub real: Option<usize>,
}

/// A successful run with the virtual `START`/`END` vertices added.
#[derive(Clone, Debug)]
pub struct PaddedRun {
    pub nodes: Vec<(Node, usize)>,
    pub steps: Vec<PaddedStep>,
    pub input_len: usize,
}

impl PaddedRun {
    pub fn new(t: &TwoWayTransducer, r: &Run) -> Result<PaddedRun> {
        if !r.is_successful() {
            return Err(Error::NotSuccessful);
        }
        let n = r.input().len();
        let mut nodes = vec![(Node::START, 0)];
        let mut steps = vec![PaddedStep { read: 0, productive: false, real: None }];
        for (k, c) in r.configs().iter().enumerate() {
            nodes.push((Node::state(t, c.state), c.cut));
            if k < r.len() {
                steps.push(PaddedStep {
                    read: r.read_position(t, k),
                    productive: !r.step_output(k).is_empty(),
                    real: Some(k),
                });
            }
        }
        let last = *r.configs().last().unwrap();
        match t.reading(last.state) {
            Reading::Right => {
                nodes.push((Node::END, n + 2));
                steps.push(PaddedStep { read: n + 1, productive: false, real: None });
            }
            Reading::Left => {
                // entered by a `⊣` U-turn: that step now ends in END
                *nodes.last_mut().unwrap() = (Node::END, n + 2);
            }
        }
        Ok(PaddedRun { nodes, steps, input_len: n })
    }

    /// Last padded cut (`n + 2`).
    pub fn last_cut(&self) -> usize {
        self.input_len + 2
    }
}

/// Padded steps `start..end` of a run: the subrun behind one flow edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Subrun {
    pub start: usize,
    pub end: usize,
}

/// A flow of a concrete run with the subrun witnessing each edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessedFlow {
    pub graph: FlowGraph,
    pub witnesses: Vec<Subrun>,
}

impl WitnessedFlow {
    pub fn flow(&self) -> Flow {
        Flow::Graph(self.graph.clone())
    }
}

/// Flow of the padded run on `interval` (padded positions, `hi ≤ n + 2`).
pub fn flow_of_padded(p: &PaddedRun, interval: Interval) -> Result<WitnessedFlow> {
    let (lo, hi) = (interval.lo, interval.hi);
    if hi > p.last_cut() {
        return Err(Error::InvalidInterval { lo, hi, last: p.last_cut() });
    }
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut vertex = vec![None; p.nodes.len()];
    for (k, &(node, cut)) in p.nodes.iter().enumerate() {
        if cut == lo {
            vertex[k] = Some(Vertex::l(left.len()));
            left.push(node);
        }
        if cut == hi && lo != hi {
            vertex[k] = Some(Vertex::r(right.len()));
            right.push(node);
        }
    }
    if lo == hi {
        let g = FlowGraph::identity(&left);
        let at: Vec<usize> = (0..p.nodes.len()).filter(|&k| vertex[k].is_some()).collect();
        let witnesses = g
            .edges
            .iter()
            .map(|e| {
                let k = at[e.from.index];
                Subrun { start: k, end: k }
            })
            .collect();
        return Ok(WitnessedFlow { graph: g, witnesses });
    }
    let mut edges = Vec::new();
    let mut witnesses = Vec::new();
    let mut k = 0;
    while k < p.steps.len() {
        if !interval.contains(p.steps[k].read) {
            k += 1;
            continue;
        }
        let start = k;
        let mut productive = false;
        while k < p.steps.len() && interval.contains(p.steps[k].read) {
            productive |= p.steps[k].productive;
            k += 1;
        }
        let (from, to) = match (vertex[start], vertex[k]) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::InvalidRun(format!("subrun {start}..{k} does not start and end on the border of {interval}"))),
        };
        edges.push(Edge { from, to, productive });
        witnesses.push(Subrun { start, end: k });
    }
    let mut graph = FlowGraph { left, right, edges };
    let perm = graph.canonicalize();
    let witnesses = perm.into_iter().map(|i| witnesses[i]).collect();
    debug_assert_eq!(graph.check(), Ok(()));
    Ok(WitnessedFlow { graph, witnesses })
}

/// Flow of a successful run on an interval of padded positions.
pub fn flow_of(t: &TwoWayTransducer, r: &Run, interval: Interval) -> Result<WitnessedFlow> {
    flow_of_padded(&PaddedRun::new(t, r)?, interval)
}

/// Position of an edge inside a juxtaposition: `(flow index, edge index)`.
pub type EdgeRef = (usize, usize);

/// Orders the edges of a juxtaposition `f_0 f_1 … f_{k-1}` as a run would
/// traverse them.
///
/// Starting at the first left vertex, paths are followed through the
/// inner borders; when a path reaches an outer border, the next one starts
/// at the following vertex of that border. Fails when the traversal does
/// not cover every edge exactly once.
pub fn edge_run_order(flows: &[&FlowGraph]) -> Result<Vec<EdgeRef>> {
    let k = flows.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    for w in flows.windows(2) {
        if w[0].right != w[1].left {
            return Err(Error::NotTotallyOrdered);
        }
    }
    let group = |g: usize| -> &[Node] {
        if g < k {
            &flows[g].left
        } else {
            &flows[k - 1].right
        }
    };
    let outs: Vec<(Vec<usize>, Vec<usize>)> = flows.iter().map(|f| f.out_index()).collect();
    let total: usize = flows.iter().map(|f| f.edges.len()).sum();
    let mut seen: Vec<Vec<bool>> = flows.iter().map(|f| vec![false; f.edges.len()]).collect();
    let mut order = Vec::with_capacity(total);

    let mut cur = if group(0).is_empty() { None } else { Some((0usize, 0usize)) };
    while let Some((g, v)) = cur {
        let node = group(g)[v];
        let outer_ok = match (g, node.reading) {
            (0, Reading::Right) => true,
            (0, _) => false,
            (x, Reading::Left) if x == k => true,
            (x, _) if x == k => false,
            _ => true,
        };
        if !outer_ok {
            return Err(Error::NotTotallyOrdered);
        }
        let (mut g, mut v) = (g, v);
        loop {
            let reading = group(g)[v].reading;
            let (f, e) = match reading {
                Reading::Right if g < k => (g, outs[g].0[v]),
                Reading::Left if g > 0 => (g - 1, outs[g - 1].1[v]),
                _ => return Err(Error::NotTotallyOrdered),
            };
            if e == usize::MAX || seen[f][e] {
                return Err(Error::NotTotallyOrdered);
            }
            seen[f][e] = true;
            order.push((f, e));
            let to = flows[f].edges[e].to;
            (g, v) = match to.side {
                Side::L => (f, to.index),
                Side::R => (f + 1, to.index),
            };
            if g == 0 || g == k {
                break;
            }
        }
        cur = if v + 1 < group(g).len() { Some((g, v + 1)) } else { None };
    }
    if order.len() != total {
        return Err(Error::NotTotallyOrdered);
    }
    Ok(order)
}

/// Label-level display, e.g. `[q0 p q1 | q0 p q1] L1→R1* R2→L2 L3→R3`
/// with `*` marking productive edges.
pub fn describe(t: &TwoWayTransducer, f: &Flow) -> String {
    let g = match f {
        Flow::Bottom => return "⊥".into(),
        Flow::Graph(g) => g,
    };
    let names = |ns: &[Node]| ns.iter().map(|n| n.name(t)).collect::<Vec<_>>().join(" ");
    let mut s = format!("[{} | {}]", names(&g.left), names(&g.right));
    for e in &g.edges {
        s.push_str(&format!(" {}→{}{}", e.from, e.to, if e.productive { "*" } else { "" }));
    }
    s
}

/// Cache of interval flows of one run.
pub struct FlowTable<'a> {
    padded: &'a PaddedRun,
    cache: HashMap<Interval, WitnessedFlow>,
}

impl<'a> FlowTable<'a> {
    pub fn new(padded: &'a PaddedRun) -> Self {
        FlowTable { padded, cache: HashMap::new() }
    }

    pub fn get(&mut self, i: Interval) -> &WitnessedFlow {
        let p = self.padded;
        self.cache.entry(i).or_insert_with(|| flow_of_padded(p, i).expect("interval in range"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::runner::{enumerate_runs, RunBudget};

    fn runs(t: &TwoWayTransducer, w: &str) -> Vec<Run> {
        let w: Vec<char> = w.chars().collect();
        enumerate_runs(t, &w, RunBudget::default()).unwrap().runs
    }

    #[test]
    fn reverse_flow_in_the_middle() {
        let t = corpus::reverse();
        let r = &runs(&t, "ab")[0];
        let f = flow_of(&t, r, Interval::new(2, 3)).unwrap();
        assert_eq!(f.graph.left.len(), 3);
        assert_eq!(f.graph.right.len(), 3);
        assert_eq!(f.graph.edges.len(), 3);
        let kinds: Vec<_> = f.graph.edges.iter().map(|e| (e.kind(), e.productive)).collect();
        assert_eq!(kinds, vec![("LR", false), ("LR", false), ("RL", true)]);
        assert_eq!(f.graph.check(), Ok(()));
        assert!(is_idempotent(&f.flow()));
    }

    #[test]
    fn whole_run_is_accepting() {
        for e in corpus::bounded() {
            let t = e.transducer();
            for r in runs(&t, "ab") {
                let f = flow_of(&t, &r, Interval::new(0, 4)).unwrap();
                assert!(f.graph.is_accepting(), "{}: {}", e.name, describe(&t, &f.flow()));
            }
        }
    }

    #[test]
    fn empty_interval_is_identity() {
        let t = corpus::reverse();
        let r = &runs(&t, "ab")[0];
        let f = flow_of(&t, r, Interval::new(2, 2)).unwrap();
        assert_eq!(f.graph, FlowGraph::identity(&f.graph.left));
        let g = flow_of(&t, r, Interval::new(1, 2)).unwrap().flow();
        assert_eq!(compose(&g, &f.flow()), g);
    }

    #[test]
    fn label_mismatch_is_bottom() {
        let t = corpus::reverse();
        let r = &runs(&t, "ab")[0];
        let a = flow_of(&t, r, Interval::new(0, 1)).unwrap().flow();
        assert_eq!(compose(&a, &a), Flow::Bottom);
        assert_eq!(compose(&Flow::Bottom, &a), Flow::Bottom);
    }

    #[test]
    fn cycles_are_bottom() {
        // one right-reading and one left-reading vertex on each side, wired
        // into a closed loop through the middle border
        let q = Node { label: Label::State(0), reading: Reading::Right };
        let p = Node { label: Label::State(1), reading: Reading::Left };
        let f = FlowGraph {
            left: vec![q],
            right: vec![q, p, q],
            edges: vec![
                Edge { from: Vertex::l(0), to: Vertex::r(0), productive: false },
                Edge { from: Vertex::r(1), to: Vertex::r(2), productive: false },
            ],
        };
        let g = FlowGraph {
            left: vec![q, p, q],
            right: vec![q],
            edges: vec![
                Edge { from: Vertex::l(0), to: Vertex::l(1), productive: false },
                Edge { from: Vertex::l(2), to: Vertex::r(0), productive: false },
            ],
        };
        assert_eq!(f.check(), Ok(()));
        assert_eq!(g.check(), Ok(()));
        assert!(compose(&Flow::Graph(f.clone()), &Flow::Graph(g.clone())).graph().is_some());
        let h = FlowGraph {
            left: vec![q, p, q],
            right: vec![q],
            edges: vec![
                Edge { from: Vertex::l(0), to: Vertex::r(0), productive: false },
                Edge { from: Vertex::l(2), to: Vertex::l(1), productive: false },
            ],
        };
        assert_eq!(h.check(), Ok(()));
        // f's R2→R3 and h's L3→L2 close a cycle
        assert_eq!(compose(&Flow::Graph(f), &Flow::Graph(h)), Flow::Bottom);
    }

    #[test]
    fn run_order_of_reverse() {
        let t = corpus::reverse();
        let r = &runs(&t, "ab")[0];
        let p = PaddedRun::new(&t, r).unwrap();
        let parts: Vec<_> = [(0, 2), (2, 3), (3, 4)]
            .iter()
            .map(|&(a, b)| flow_of_padded(&p, Interval::new(a, b)).unwrap())
            .collect();
        let graphs: Vec<&FlowGraph> = parts.iter().map(|w| &w.graph).collect();
        let order = edge_run_order(&graphs).unwrap();
        let starts: Vec<usize> = order.iter().map(|&(f, e)| parts[f].witnesses[e].start).collect();
        let mut sorted = starts.clone();
        sorted.sort_unstable();
        assert_eq!(starts, sorted);
        assert_eq!(order.len(), graphs.iter().map(|g| g.edges.len()).sum::<usize>());
    }
}
