//! Letter flows and the flow monoid they generate.
//!
//! A letter flow is the flow a run can have on a single padded position.
//! Only flows that a run could actually traverse are produced: starting at
//! the first left vertex, each edge lands on the border and the next edge
//! starts at the following vertex of that border. Flows of products of
//! letter flows then cover exactly the flows of runs on words.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::flow::{compose, edge_run_order, Edge, Flow, FlowGraph, Label, Node, Side, Vertex};
use crate::machine::{Reading, StateId, Symbol, TransitionId, TwoWayTransducer};
use crate::run::{Configuration, Run};

/// A flow on one padded letter, with the transition behind each edge.
/// Virtual edges (into `START`'s successor, into `END` from a right-reading
/// final state) carry `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LetterFlow {
    pub letter: Symbol,
    pub graph: FlowGraph,
    pub transitions: Vec<Option<TransitionId>>,
}

struct Builder<'a> {
    t: &'a TwoWayTransducer,
    letter: Symbol,
    k: usize,
    left: Vec<Node>,
    right: Vec<Node>,
    edges: Vec<(Edge, Option<TransitionId>)>,
    out: Vec<LetterFlow>,
}

impl Builder<'_> {
    fn states(&self, reading: Reading) -> Vec<StateId> {
        (0..self.t.num_states())
            .filter(|&q| self.t.reading(q) == reading)
            .filter(|&q| {
                self.t.outgoing_on(q, self.letter).next().is_some()
                    || self.letter == Symbol::RightMark && self.t.is_final(q)
            })
            .collect()
    }

    fn record(&mut self) {
        let mut perm: Vec<usize> = (0..self.edges.len()).collect();
        perm.sort_by_key(|&i| self.edges[i].0.from);
        let graph = FlowGraph {
            left: self.left.clone(),
            right: self.right.clone(),
            edges: perm.iter().map(|&i| self.edges[i].0).collect(),
        };
        debug_assert_eq!(graph.check(), Ok(()));
        if self.out.iter().all(|f| f.graph != graph) {
            let transitions = perm.iter().map(|&i| self.edges[i].1).collect();
            self.out.push(LetterFlow { letter: self.letter, graph, transitions });
        }
    }

    /// Adds `node` on `side` as the target of an edge from `from`, then
    /// carries on from the vertex after it.
    fn land(&mut self, from: Vertex, side: Side, node: Node, productive: bool, id: Option<TransitionId>) {
        let len = match side {
            Side::L => self.left.len(),
            Side::R => self.right.len(),
        };
        if len >= self.k {
            return;
        }
        let to = Vertex { side, index: len };
        match side {
            Side::L => self.left.push(node),
            Side::R => self.right.push(node),
        }
        self.edges.push((Edge { from, to, productive }, id));
        match side {
            Side::R => {
                self.record();
                if node.label != Label::End {
                    self.open(Side::R);
                }
            }
            Side::L => self.open(Side::L),
        }
        self.edges.pop();
        match side {
            Side::L => self.left.pop(),
            Side::R => self.right.pop(),
        };
    }

    /// Opens a new source vertex at the end of `side`.
    fn open(&mut self, side: Side) {
        let (reading, len) = match side {
            Side::L => (Reading::Right, self.left.len()),
            Side::R => (Reading::Left, self.right.len()),
        };
        if len >= self.k || self.letter == Symbol::RightMark && side == Side::R {
            return;
        }
        for q in self.states(reading) {
            let node = Node::state(self.t, q);
            match side {
                Side::L => self.left.push(node),
                Side::R => self.right.push(node),
            }
            self.fire(Vertex { side, index: len }, q);
            match side {
                Side::L => self.left.pop(),
                Side::R => self.right.pop(),
            };
        }
    }

    /// Tries every transition out of source vertex `v` labelled `q`.
    fn fire(&mut self, v: Vertex, q: StateId) {
        let t = self.t;
        if self.letter == Symbol::RightMark && t.is_final(q) && t.reading(q) == Reading::Right {
            self.land(v, Side::R, Node::END, false, None);
        }
        for id in t.outgoing_on(q, self.letter).collect::<Vec<_>>() {
            if !t.is_live(id) {
                continue;
            }
            let tr = t.transition(id);
            let z = tr.target;
            let productive = !tr.output.is_empty();
            let side = match t.reading(z) {
                Reading::Right => Side::R,
                Reading::Left => Side::L,
            };
            // only U-turns fire on ⊣; one into a final state may end the run
            if self.letter == Symbol::RightMark && t.is_final(z) {
                self.land(v, Side::R, Node::END, productive, Some(id));
            }
            self.land(v, side, Node::state(t, z), productive, Some(id));
        }
    }
}

/// All traversable flows of `t` on letter `a` with at most `k` vertices
/// per side. Each flow appears once, with one choice of transitions.
pub fn letter_flows(t: &TwoWayTransducer, a: Symbol, k: usize) -> Vec<LetterFlow> {
    let mut b = Builder { t, letter: a, k, left: Vec::new(), right: Vec::new(), edges: Vec::new(), out: Vec::new() };
    if k == 0 {
        return b.out;
    }
    match a {
        Symbol::LeftMark => {
            b.left.push(Node::START);
            for q in t.initial_states() {
                b.land(Vertex::l(0), Side::R, Node::state(t, q), false, None);
            }
        }
        _ => b.open(Side::L),
    }
    b.out
}

/// The monoid generated by the letter flows of `t`, with ⊥.
#[derive(Clone, Debug)]
pub struct FlowMonoid {
    pub k: usize,
    pub generators: Vec<LetterFlow>,
    elements: Vec<Flow>,
    index: HashMap<Flow, usize>,
    /// A shortest generator word for each element.
    words: Vec<Vec<usize>>,
}

impl FlowMonoid {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Flow] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Flow {
        &self.elements[i]
    }

    pub fn find(&self, f: &Flow) -> Option<usize> {
        self.index.get(f).copied()
    }

    pub fn contains(&self, f: &Flow) -> bool {
        self.index.contains_key(f)
    }

    pub fn word(&self, i: usize) -> &[usize] {
        &self.words[i]
    }

    /// Padded letters spelled by the shortest word of element `i`.
    pub fn letters(&self, i: usize) -> Vec<Symbol> {
        self.words[i].iter().map(|&g| self.generators[g].letter).collect()
    }

    /// Element index of a product, if it lies in the monoid.
    pub fn multiply(&self, i: usize, j: usize) -> Option<usize> {
        self.find(&compose(&self.elements[i], &self.elements[j]))
    }
}

pub const DEFAULT_MONOID_CAP: usize = 200_000;

/// Closes the letter flows of `t` (at most `k` vertices per side) under
/// composition. Elements are found breadth-first, so the recorded words
/// are shortest.
pub fn generate_monoid(t: &TwoWayTransducer, k: usize, cap: usize) -> Result<FlowMonoid> {
    let mut generators = Vec::new();
    for a in t.padded_alphabet() {
        generators.extend(letter_flows(t, a, k));
    }
    let mut m = FlowMonoid { k, generators, elements: Vec::new(), index: HashMap::new(), words: Vec::new() };
    let mut queue = VecDeque::new();
    let add = |m: &mut FlowMonoid, f: Flow, word: Vec<usize>, queue: &mut VecDeque<usize>| -> Result<()> {
        if m.index.contains_key(&f) {
            return Ok(());
        }
        if m.elements.len() >= cap {
            return Err(Error::BoundExceeded { what: "monoid elements", cap });
        }
        m.index.insert(f.clone(), m.elements.len());
        m.elements.push(f);
        m.words.push(word);
        queue.push_back(m.elements.len() - 1);
        Ok(())
    };
    for g in 0..m.generators.len() {
        let f = Flow::Graph(m.generators[g].graph.clone());
        add(&mut m, f, vec![g], &mut queue)?;
    }
    while let Some(i) = queue.pop_front() {
        for g in 0..m.generators.len() {
            let f = match &m.elements[i] {
                Flow::Bottom => continue,
                Flow::Graph(x) => compose(&Flow::Graph(x.clone()), &Flow::Graph(m.generators[g].graph.clone())),
            };
            let mut w = m.words[i].clone();
            w.push(g);
            add(&mut m, f, w, &mut queue)?;
        }
    }
    Ok(m)
}

/// The run spelled by a sequence of generators whose product is accepting.
///
/// The letter flows are laid side by side and traversed in run order; each
/// edge is one transition.
pub fn realize(t: &TwoWayTransducer, m: &FlowMonoid, word: &[usize]) -> Result<Run> {
    let parts: Vec<&FlowGraph> = word.iter().map(|&g| &m.generators[g].graph).collect();
    let first = parts.first().ok_or_else(|| Error::InvalidRun("empty word".into()))?;
    if first.left != [Node::START] || parts.last().unwrap().right != [Node::END] {
        return Err(Error::InvalidRun("word does not span a whole padded input".into()));
    }
    let order = edge_run_order(&parts)?;
    let q0 = match first.node(first.edges[0].to).label {
        Label::State(q) => q,
        _ => return Err(Error::InvalidRun("no initial state".into())),
    };
    let trans: Vec<TransitionId> = order.iter().filter_map(|&(f, e)| m.generators[word[f]].transitions[e]).collect();
    let input: Vec<char> = word
        .iter()
        .filter_map(|&g| match m.generators[g].letter {
            Symbol::Letter(c) => Some(c),
            _ => None,
        })
        .collect();
    Run::from_transitions(t, &input, Configuration::new(q0, 1), trans)
}
