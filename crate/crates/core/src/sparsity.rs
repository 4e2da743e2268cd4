//! Vertical loops of unrestricted two-way transducers: the cycle
//! equivalence on tagged transitions, bounded sparsity, and normalization
//! of runs.
//!
//! A tagged transition `(t, y)` is a transition taken at input position `y`
//! (`0` and `n + 1` for the endmarkers) by some successful run. On a fixed
//! input these are exactly the edges of the trimmed configuration graph;
//! two of them are equivalent when a run can cycle between them, i.e. when
//! both lie in one strongly connected component.

use std::collections::{BTreeSet, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::machine::{TransitionId, TwoWayTransducer};
use crate::run::{origin_graph, Run, SynchronizedPair};
use crate::runner::ConfigGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TaggedTransition {
    pub transition: TransitionId,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TaggedClass {
    pub members: Vec<TaggedTransition>,
    pub productive: Vec<TaggedTransition>,
    /// Leftmost position of a member.
    pub anchor: usize,
}

impl TaggedClass {
    /// Distinct positions of the productive members.
    pub fn productive_positions(&self) -> BTreeSet<usize> {
        self.productive.iter().map(|m| m.position).collect()
    }
}

/// Tagged transitions of one input, grouped into cycle classes.
pub struct TaggedEquivalence {
    pub input: Vec<char>,
    pub classes: Vec<TaggedClass>,
    class_of: HashMap<TaggedTransition, usize>,
    graph: ConfigGraph,
    /// Graph edge of each tagged transition.
    edge_of: HashMap<TaggedTransition, usize>,
}

impl TaggedEquivalence {
    pub fn class_of(&self, x: TaggedTransition) -> Option<&TaggedClass> {
        self.class_of.get(&x).map(|&c| &self.classes[c])
    }

    pub fn members(&self) -> impl Iterator<Item = TaggedTransition> + '_ {
        self.classes.iter().flat_map(|c| c.members.iter().copied())
    }

    /// `a ⪯ b`: some run starts with `a` and ends with `b`.
    pub fn precedes(&self, a: TaggedTransition, b: TaggedTransition) -> bool {
        let (Some(&ea), Some(&eb)) = (self.edge_of.get(&a), self.edge_of.get(&b)) else { return false };
        ea == eb || self.graph.reachable(&[self.graph.edges[ea].1])[self.graph.edges[eb].0]
    }

    fn tag(&self, t: &TwoWayTransducer, e: usize) -> TaggedTransition {
        tag(t, &self.graph, e)
    }
}

fn tag(t: &TwoWayTransducer, g: &ConfigGraph, e: usize) -> TaggedTransition {
    let (from, _, id) = g.edges[e];
    let c = g.config(from);
    TaggedTransition { transition: id, position: t.reading(c.state).read_position(c.cut) }
}

/// Edges of the configuration graph that lie on some successful run.
fn trimmed(t: &TwoWayTransducer, g: &ConfigGraph) -> Vec<usize> {
    let fwd = g.reachable(&g.initial(t));
    let bwd = g.coreachable(&g.accepting(t));
    (0..g.edges.len()).filter(|&e| fwd[g.edges[e].0] && bwd[g.edges[e].1]).collect()
}

pub fn tagged_equivalence(t: &TwoWayTransducer, input: &[char]) -> Result<TaggedEquivalence> {
    t.check_input(input)?;
    let g = ConfigGraph::new(t, input);
    let live = trimmed(t, &g);
    let mut h: DiGraph<usize, ()> = DiGraph::new();
    let mut node = HashMap::new();
    for &e in &live {
        for v in [g.edges[e].0, g.edges[e].1] {
            node.entry(v).or_insert_with(|| h.add_node(v));
        }
        h.add_edge(node[&g.edges[e].0], node[&g.edges[e].1], ());
    }
    let mut component = HashMap::new();
    for (i, scc) in tarjan_scc(&h).into_iter().enumerate() {
        for v in scc {
            component.insert(h[v], i);
        }
    }
    // edges inside one component share a class; the others are alone
    let mut by_component: HashMap<usize, usize> = HashMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &e in &live {
        let (a, b) = (component[&g.edges[e].0], component[&g.edges[e].1]);
        if a == b {
            let c = *by_component.entry(a).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[c].push(e);
        } else {
            classes.push(vec![e]);
        }
    }
    let mut class_of = HashMap::new();
    let mut edge_of = HashMap::new();
    let classes = classes
        .into_iter()
        .enumerate()
        .map(|(i, edges)| {
            let mut members: Vec<TaggedTransition> = edges.iter().map(|&e| tag(t, &g, e)).collect();
            for (&e, &m) in edges.iter().zip(&members) {
                class_of.insert(m, i);
                edge_of.insert(m, e);
            }
            members.sort();
            let productive = members.iter().copied().filter(|m| !t.transition(m.transition).output.is_empty()).collect();
            let anchor = members.iter().map(|m| m.position).min().unwrap();
            TaggedClass { members, productive, anchor }
        })
        .collect();
    Ok(TaggedEquivalence { input: input.to_vec(), classes, class_of, graph: g, edge_of })
}

/// A class with more than `k` productive tagged transitions, if any.
pub fn k_sparse_on_input(t: &TwoWayTransducer, input: &[char], k: usize) -> Result<Option<TaggedClass>> {
    let eq = tagged_equivalence(t, input)?;
    Ok(eq.classes.into_iter().filter(|c| c.productive.len() > k).max_by_key(|c| c.productive.len()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SparsityVerdict {
    SparseUpToBound { max_len: usize },
    NotSparse { input: String, class: TaggedClass },
}

/// Inputs over `alphabet` in length-lexicographic order, up to `max_len`.
pub fn words_up_to(alphabet: &[char], max_len: usize) -> impl Iterator<Item = Vec<char>> + '_ {
    let mut frontier = vec![Vec::new()];
    let mut len = 0;
    let mut i = 0;
    std::iter::from_fn(move || loop {
        if i < frontier.len() {
            i += 1;
            return Some(frontier[i - 1].clone());
        }
        if len == max_len || alphabet.is_empty() {
            return None;
        }
        len += 1;
        i = 0;
        frontier = frontier.iter().flat_map(|w| alphabet.iter().map(move |&a| [w.as_slice(), &[a]].concat())).collect();
    })
}

/// Checks `k`-sparsity on every input up to `max_len`, returning the first
/// violating input.
pub fn k_sparse_bounded_check(t: &TwoWayTransducer, k: usize, max_len: usize) -> Result<SparsityVerdict> {
    for w in words_up_to(t.input_alphabet(), max_len) {
        if let Some(class) = k_sparse_on_input(t, &w, k)? {
            return Ok(SparsityVerdict::NotSparse { input: w.iter().collect(), class });
        }
    }
    Ok(SparsityVerdict::SparseUpToBound { max_len })
}

/// The run with every maximal vertical loop cut out, from left to right: from
/// each configuration the run jumps to its last occurrence. The result
/// visits every configuration at most once.
pub fn normalize_run(t: &TwoWayTransducer, r: &Run) -> Result<Run> {
    if !r.is_successful() {
        return Err(Error::NotSuccessful);
    }
    let configs = r.configs();
    let mut last = HashMap::new();
    for (i, c) in configs.iter().enumerate() {
        last.insert(*c, i);
    }
    let mut trans = Vec::new();
    let mut i = last[&configs[0]];
    while i < r.len() {
        trans.push(r.transitions()[i]);
        i = last[&configs[i + 1]];
    }
    Run::from_transitions(t, r.input(), configs[0], trans)
}

/// Breadth-first path of edges from any of `from` to `to`.
fn shortest_path(g: &ConfigGraph, allowed: &[bool], from: &[usize], to: usize) -> Option<Vec<usize>> {
    let mut pred: HashMap<usize, Option<usize>> = from.iter().map(|&v| (v, None)).collect();
    let mut queue: VecDeque<usize> = from.iter().copied().collect();
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = Vec::new();
            let mut v = u;
            while let Some(Some(e)) = pred.get(&v) {
                path.push(*e);
                v = g.edges[*e].0;
            }
            path.reverse();
            return Some(path);
        }
        for &e in &g.out[u] {
            let v = g.edges[e].1;
            if allowed[e] && !pred.contains_key(&v) {
                pred.insert(v, Some(e));
                queue.push_back(v);
            }
        }
    }
    None
}

/// A successful run whose output has a cross of width at least `n`, built
/// from a class with productive members at `2n` distinct positions: the run
/// takes one productive member per position in decreasing position order.
pub fn sparsity_cross_witness(t: &TwoWayTransducer, input: &[char], n: usize) -> Result<Option<(Run, SynchronizedPair)>> {
    let eq = tagged_equivalence(t, input)?;
    let g = &eq.graph;
    let mut allowed = vec![false; g.edges.len()];
    for &e in eq.edge_of.values() {
        allowed[e] = true;
    }
    let Some(class) = eq.classes.iter().find(|c| c.productive_positions().len() >= 2 * n) else { return Ok(None) };
    let mut picks: Vec<usize> = Vec::new();
    let mut seen = BTreeSet::new();
    for m in class.productive.iter().rev() {
        if seen.insert(m.position) {
            picks.push(eq.edge_of[m]);
        }
    }
    picks.sort_by_key(|&e| std::cmp::Reverse(eq.tag(t, e).position));
    picks.truncate(2 * n);
    let mut path = Vec::new();
    let mut at = g.initial(t);
    for &e in &picks {
        let Some(p) = shortest_path(g, &allowed, &at, g.edges[e].0) else { return Ok(None) };
        path.extend(p);
        path.push(e);
        at = vec![g.edges[e].1];
    }
    let accepting = g.accepting(t);
    let Some(tail) = accepting.iter().filter_map(|&f| shortest_path(g, &allowed, &at, f)).min_by_key(Vec::len) else { return Ok(None) };
    path.extend(tail);
    let start = if path.is_empty() { at[0] } else { g.edges[path[0]].0 };
    let trans = path.iter().map(|&e| g.edges[e].2).collect();
    let run = Run::from_transitions(t, input, g.config(start), trans)?;
    let pair = origin_graph(t, &run)?;
    Ok(Some((run, pair)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::cross_width;
    use crate::corpus;
    use crate::runner::{enumerate_runs, is_k_visit, RunBudget};

    fn chars(w: &str) -> Vec<char> {
        w.chars().collect()
    }

    #[test]
    fn copier_classes_are_singletons() {
        let t = corpus::copier();
        let eq = tagged_equivalence(&t, &chars("ab")).unwrap();
        assert!(eq.classes.iter().all(|c| c.members.len() == 1 && c.productive.len() <= 1));
        assert_eq!(eq.classes.iter().filter(|c| c.productive.len() == 1).count(), 2);
        let m: Vec<_> = eq.members().collect();
        assert!(eq.precedes(m[0], m[0]));
        assert_eq!(k_sparse_on_input(&t, &chars("abba"), 1).unwrap(), None);
    }

    #[test]
    fn self_loop_class() {
        let t = corpus::get("uturn_loop").unwrap().transducer();
        let eq = tagged_equivalence(&t, &chars("a")).unwrap();
        let looped: Vec<_> = eq.classes.iter().filter(|c| c.members.len() > 1).collect();
        assert_eq!(looped.len(), 1);
        assert_eq!(looped[0].productive.len(), 1);
        assert_eq!(looped[0].productive[0].position, 1);
        assert_eq!(looped[0].anchor, 0);
    }

    #[test]
    fn multipass_is_not_sparse() {
        let t = corpus::multipass();
        let eq = tagged_equivalence(&t, &chars("ab")).unwrap();
        assert!(eq.classes.iter().any(|c| c.productive_positions().len() >= 2));
        let c = k_sparse_on_input(&t, &chars("abc"), 2).unwrap().unwrap();
        assert_eq!(c.productive.len(), 3);
        match k_sparse_bounded_check(&t, 1, 3).unwrap() {
            SparsityVerdict::NotSparse { input, .. } => assert!(input.len() <= 2, "{input}"),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn one_way_and_bounded_machines_are_sparse() {
        for name in ["copier", "swap_halves", "last_to_front"] {
            let t = corpus::get(name).unwrap().transducer();
            assert_eq!(k_sparse_bounded_check(&t, 1, 4).unwrap(), SparsityVerdict::SparseUpToBound { max_len: 4 }, "{name}");
        }
        assert_eq!(k_sparse_on_input(&corpus::last_to_front(), &chars("aba"), 1).unwrap(), None);
    }

    #[test]
    fn normalization() {
        let t = corpus::multipass();
        let w = chars("ab");
        let runs = enumerate_runs(&t, &w, RunBudget { visit_bound: 9, step_bound: 100, run_cap: 1000 }).unwrap().runs;
        assert!(runs.iter().any(|r| r.max_visits() > 3));
        for r in &runs {
            let s = normalize_run(&t, r).unwrap();
            assert!(s.is_successful());
            assert_eq!(normalize_run(&t, &s).unwrap(), s);
            assert!(is_k_visit(&s, t.num_transitions()));
            assert!(s.max_visits() <= r.max_visits());
        }
        let c = corpus::copier();
        let r = &enumerate_runs(&c, &w, RunBudget::default()).unwrap().runs[0];
        assert_eq!(&normalize_run(&c, r).unwrap(), r);
    }

    #[test]
    fn self_loop_is_excised() {
        let t = corpus::get("uturn_loop").unwrap().transducer();
        let w = chars("a");
        let runs = enumerate_runs(&t, &w, RunBudget { visit_bound: 7, step_bound: 100, run_cap: 100 }).unwrap().runs;
        let long = runs.iter().max_by_key(|r| r.len()).unwrap();
        let short = runs.iter().min_by_key(|r| r.len()).unwrap();
        assert!(long.len() > short.len());
        assert_eq!(&normalize_run(&t, long).unwrap(), short);
    }

    #[test]
    fn unbounded_sparsity_gives_wide_crosses() {
        let t = corpus::multipass();
        for n in 2..=3 {
            let w: Vec<char> = "abcabc".chars().take(2 * n).collect();
            let (run, pair) = sparsity_cross_witness(&t, &w, n).unwrap().unwrap();
            assert!(run.is_successful());
            assert!(cross_width(&pair).width >= n, "{pair}");
        }
        assert!(sparsity_cross_witness(&corpus::copier(), &chars("abab"), 1).unwrap().is_none());
    }

    #[test]
    fn words_in_order() {
        let w: Vec<String> = words_up_to(&['a', 'b'], 2).map(|w| w.into_iter().collect()).collect();
        assert_eq!(w, ["", "a", "b", "aa", "ab", "ba", "bb"]);
    }
}
