//! Factorization trees over the flow monoid, dominant output intervals and
//! the level-by-level retargeting of origins of an inversion-free run.
//!
//! Output positions are 1-based and output intervals are half-open
//! `[lo, hi)`. Tree intervals are padded input positions (`0` is `⊢`).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigUint;
use serde::Serialize;

use crate::analysis::{find_inversion, is_order_preserving, loops};
use crate::error::{Error, Result};
use crate::flow::{compose, flow_of_padded, is_idempotent, Flow, FlowTable, PaddedRun};
use crate::machine::TwoWayTransducer;
use crate::monoid::FlowMonoid;
use crate::run::{origin_graph, Interval, Run, SynchronizedPair};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    /// Padded input positions spanned by the leaves below.
    pub interval: Interval,
    /// Monoid element index of the label.
    pub label: usize,
    pub children: Vec<usize>,
    pub height: usize,
}

/// An ordered tree whose leaves are the letter flows of a sequence and whose
/// inner nodes are products; nodes with more than two children have equal
/// idempotent children.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorizationTree {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
}

impl FactorizationTree {
    pub fn height(&self) -> usize {
        self.nodes[self.root].height
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    /// Leaves from left to right.
    pub fn leaves(&self) -> Vec<usize> {
        self.level(0)
    }

    /// Nodes at level `l`: the maximal nodes of height at most `l`, from
    /// left to right. They partition the root interval.
    pub fn level(&self, l: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            if self.nodes[i].height <= l {
                out.push(i);
            } else {
                stack.extend(self.nodes[i].children.iter().rev());
            }
        }
        out
    }

    pub fn is_idempotent_node(&self, i: usize) -> bool {
        self.nodes[i].children.len() > 2
    }
}

/// Flows of the single padded positions `0, …, n + 1` of a run.
pub fn letter_sequence(t: &TwoWayTransducer, r: &Run) -> Result<Vec<Flow>> {
    let p = PaddedRun::new(t, r)?;
    (0..=p.input_len + 1).map(|i| Ok(flow_of_padded(&p, Interval::new(i, i + 1))?.flow())).collect()
}

struct Builder<'a> {
    m: &'a FlowMonoid,
    labels: Vec<usize>,
    products: HashMap<(usize, usize), usize>,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn outside(&self) -> Error {
        Error::BoundExceeded { what: "monoid elements (product outside the generated monoid)", cap: self.m.len() }
    }

    fn product(&mut self, lo: usize, hi: usize) -> Result<usize> {
        if hi == lo + 1 {
            return Ok(self.labels[lo]);
        }
        if let Some(&p) = self.products.get(&(lo, hi)) {
            return Ok(p);
        }
        let head = self.product(lo, hi - 1)?;
        let p = self.m.multiply(head, self.labels[hi - 1]).ok_or_else(|| self.outside())?;
        self.products.insert((lo, hi), p);
        Ok(p)
    }

    fn is_idempotent(&self, e: usize) -> bool {
        self.m.multiply(e, e) == Some(e)
    }

    /// Cut points of `[lo, hi)` into the most blocks of product `e`.
    fn split_into(&mut self, lo: usize, hi: usize, e: usize) -> Result<Option<Vec<usize>>> {
        // best[j]: most blocks covering [lo, j), with the previous cut
        let mut best: Vec<Option<(usize, usize)>> = vec![None; hi + 1];
        best[lo] = Some((0, lo));
        for j in lo + 1..=hi {
            for i in lo..j {
                let Some((count, _)) = best[i] else { continue };
                if self.product(i, j)? == e && best[j].map_or(true, |(c, _)| c < count + 1) {
                    best[j] = Some((count + 1, i));
                }
            }
        }
        let Some(_) = best[hi] else { return Ok(None) };
        let mut cuts = vec![hi];
        let mut j = hi;
        while j > lo {
            j = best[j].unwrap().1;
            cuts.push(j);
        }
        cuts.reverse();
        Ok(Some(cuts))
    }

    fn build(&mut self, lo: usize, hi: usize) -> Result<usize> {
        if hi == lo + 1 {
            self.nodes.push(TreeNode { interval: Interval::new(lo, hi), label: self.labels[lo], children: vec![], height: 0 });
            return Ok(self.nodes.len() - 1);
        }
        let mut grouping: Option<Vec<usize>> = None;
        for j in lo + 1..hi {
            let e = self.product(lo, j)?;
            if !self.is_idempotent(e) {
                continue;
            }
            if let Some(cuts) = self.split_into(lo, hi, e)? {
                if cuts.len() > 3 && grouping.as_ref().map_or(true, |g| g.len() < cuts.len()) {
                    grouping = Some(cuts);
                }
            }
        }
        let cuts = grouping.unwrap_or_else(|| vec![lo, (lo + hi) / 2, hi]);
        let mut children = Vec::new();
        for w in cuts.windows(2) {
            children.push(self.build(w[0], w[1])?);
        }
        let height = 1 + children.iter().map(|&c| self.nodes[c].height).max().unwrap();
        let label = self.product(lo, hi)?;
        self.nodes.push(TreeNode { interval: Interval::new(lo, hi), label, children, height });
        Ok(self.nodes.len() - 1)
    }
}

/// A factorization tree over `seq` (positions `0..seq.len()`).
///
/// Each range is grouped into the most blocks of one idempotent product
/// when there are at least three, and split in half otherwise.
pub fn build_factorization_tree(seq: &[Flow], m: &FlowMonoid) -> Result<FactorizationTree> {
    if seq.is_empty() {
        return Err(Error::TreeMismatch("empty sequence".into()));
    }
    let labels = seq
        .iter()
        .map(|f| m.find(f).ok_or(Error::BoundExceeded { what: "monoid elements (letter flow outside the generated monoid)", cap: m.len() }))
        .collect::<Result<Vec<_>>>()?;
    let mut b = Builder { m, labels, products: HashMap::new(), nodes: Vec::new() };
    let root = b.build(0, seq.len())?;
    Ok(FactorizationTree { nodes: b.nodes, root })
}

/// Problems of a tree over `seq`; empty when the tree is valid.
pub fn verify_tree(tree: &FactorizationTree, seq: &[Flow], m: &FlowMonoid) -> Vec<String> {
    let mut out = Vec::new();
    let leaves = tree.leaves();
    if leaves.len() != seq.len() {
        out.push(format!("{} leaves for a sequence of {}", leaves.len(), seq.len()));
    }
    for (i, (&l, f)) in leaves.iter().zip(seq).enumerate() {
        let node = &tree.nodes[l];
        if node.interval != Interval::new(i, i + 1) {
            out.push(format!("leaf {i} spans {}", node.interval));
        }
        if m.element(node.label) != f {
            out.push(format!("leaf {i} is not labelled by its letter flow"));
        }
    }
    for (i, node) in tree.nodes.iter().enumerate() {
        if node.children.is_empty() {
            if node.height != 0 {
                out.push(format!("leaf {i} has height {}", node.height));
            }
            continue;
        }
        if node.children.len() == 1 {
            out.push(format!("node {i} has a single child"));
        }
        let kids: Vec<&TreeNode> = node.children.iter().map(|&c| &tree.nodes[c]).collect();
        let product = kids.iter().skip(1).fold(m.element(kids[0].label).clone(), |acc, k| compose(&acc, m.element(k.label)));
        if &product != m.element(node.label) {
            out.push(format!("node {i} is not labelled by the product of its children"));
        }
        if kids.len() > 2 {
            let e = kids[0].label;
            if kids.iter().any(|k| k.label != e) || !is_idempotent(m.element(e)) {
                out.push(format!("node {i} has {} children that are not one idempotent", kids.len()));
            }
        }
        let contiguous = kids.windows(2).all(|w| w[0].interval.hi == w[1].interval.lo);
        if !contiguous || kids[0].interval.lo != node.interval.lo || kids.last().unwrap().interval.hi != node.interval.hi {
            out.push(format!("node {i} does not span the union of its children"));
        }
        let height = 1 + kids.iter().map(|k| k.height).max().unwrap();
        if node.height != height {
            out.push(format!("node {i} has height {} instead of {height}", node.height));
        }
    }
    if tree.nodes[tree.root].interval != Interval::new(0, seq.len()) {
        out.push(format!("root spans {}", tree.nodes[tree.root].interval));
    }
    if tree.height() > 3 * m.len() {
        out.push(format!("height {} exceeds 3·{}", tree.height(), m.len()));
    }
    out
}

/// The constants of the construction, computed exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constants {
    pub k: usize,
    /// Bound on the size of the flow monoid: `(|Q|·(2K+1))^{2K} + 1`.
    pub m: BigUint,
    /// Largeness threshold `M^{2K}`.
    pub c: BigUint,
    /// Bound on tree heights, `3·M`.
    pub h: BigUint,
}

impl Constants {
    pub fn new(num_states: usize, k: usize) -> Constants {
        let e = 2 * k as u32;
        let m = BigUint::from(num_states * (2 * k + 1)).pow(e) + 1u32;
        let c = m.pow(e);
        let h = &m * 3u32;
        Constants { k, m, c, h }
    }
}

/// Maximal output intervals whose origins all lie in `within` (real
/// positions).
fn blocks(origin: &[usize], within: Interval) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut x = 0;
    while x < origin.len() {
        if !within.contains(origin[x]) {
            x += 1;
            continue;
        }
        let start = x;
        while x < origin.len() && within.contains(origin[x]) {
            x += 1;
        }
        out.push(Interval::new(start + 1, x + 1));
    }
    out
}

fn distinct(origin: &[usize], b: Interval) -> usize {
    origin[b.lo - 1..b.hi - 1].iter().collect::<BTreeSet<_>>().len()
}

/// Smallest output interval containing every block of `within` with more
/// than `threshold` distinct origins.
fn dominant(origin: &[usize], within: Interval, threshold: usize) -> Option<Interval> {
    let large: Vec<Interval> = blocks(origin, within).into_iter().filter(|&b| distinct(origin, b) > threshold).collect();
    Some(Interval::new(large.first()?.lo, large.last()?.hi))
}

fn real_interval(r: &Run, i: Interval) -> Result<()> {
    let n = r.input().len();
    if i.lo < 1 || i.hi > n + 1 {
        return Err(Error::InvalidInterval { lo: i.lo, hi: i.hi, last: n + 1 });
    }
    Ok(())
}

/// Output blocks of the input interval `i` (real positions), in output
/// order.
pub fn output_blocks(t: &TwoWayTransducer, r: &Run, i: Interval) -> Result<Vec<Interval>> {
    real_interval(r, i)?;
    Ok(blocks(&origin_graph(t, r)?.origin, i))
}

/// Dominant output interval of `i`: from the first to the last output
/// block with more than `threshold` distinct origins; `None` if there is
/// no such block.
pub fn dominant_output_interval(t: &TwoWayTransducer, r: &Run, i: Interval, threshold: usize) -> Result<Option<Interval>> {
    real_interval(r, i)?;
    Ok(dominant(&origin_graph(t, r)?.origin, i, threshold))
}

/// Real positions of a padded interval, clipped to `[1, n]`.
fn clip(i: Interval, n: usize) -> Interval {
    let lo = i.lo.clamp(1, n + 1);
    Interval::new(lo, i.hi.clamp(lo, n + 1))
}

/// Target origins chosen level by level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Retargeting {
    pub source: SynchronizedPair,
    /// `levels[l][x - 1]`: target (padded position) of output position `x`
    /// at level `l`, if defined there.
    pub levels: Vec<Vec<Option<usize>>>,
    /// Final targets, clamped to real positions; positions undefined at the
    /// top level go to position 1.
    pub target: Vec<usize>,
    /// Output positions claimed by the dominant intervals of two nodes of
    /// the same level: `(level, position)`.
    pub conflicts: Vec<(usize, usize)>,
}

impl Retargeting {
    pub fn pair(&self) -> SynchronizedPair {
        SynchronizedPair { input: self.source.input.clone(), output: self.source.output.clone(), origin: self.target.clone() }
    }

    /// `(output position, source origin, target origin)` for every position.
    pub fn entries(&self) -> Vec<(usize, usize, usize)> {
        self.source.origin.iter().zip(&self.target).enumerate().map(|(x, (&y, &z))| (x + 1, y, z)).collect()
    }
}

fn check_spans(tree: &FactorizationTree, n: usize) -> Result<()> {
    let root = tree.nodes[tree.root].interval;
    if root != Interval::new(0, n + 2) {
        return Err(Error::TreeMismatch(format!("root spans {root}, the padded input is [0, {})", n + 2)));
    }
    let leaves = tree.leaves().len();
    if leaves != n + 2 {
        return Err(Error::TreeMismatch(format!("{leaves} leaves for {} padded positions", n + 2)));
    }
    Ok(())
}

/// Dominant interval of every tree node.
fn node_dominants(tree: &FactorizationTree, origin: &[usize], n: usize, threshold: usize) -> Vec<Option<Interval>> {
    tree.nodes.iter().map(|p| dominant(origin, clip(p.interval, n), threshold)).collect()
}

/// Retargets the origins of an inversion-free run along `tree`.
///
/// Leaves send their dominant interval to their own position. A new node
/// keeps the targets inside its children's dominant intervals and sends the
/// rest of its own to a border of a child interval: before, between or
/// after the children's dominant intervals for binary nodes; for
/// idempotent nodes, to the end of the child interval on the left or the
/// start of the one on the right, depending on the side of the source
/// origin.
pub fn build_retargeting(t: &TwoWayTransducer, r: &Run, tree: &FactorizationTree, threshold: usize) -> Result<Retargeting> {
    if find_inversion(t, r)?.is_some() {
        return Err(Error::HasInversion);
    }
    let n = r.input().len();
    check_spans(tree, n)?;
    let source = origin_graph(t, r)?;
    let origin = &source.origin;
    let bout = node_dominants(tree, origin, n, threshold);
    let mut conflicts = Vec::new();
    let mut levels = Vec::new();
    let mut current: Vec<Option<usize>> = vec![None; origin.len()];
    for l in 0..=tree.height() {
        for p in tree.level(l) {
            let node = &tree.nodes[p];
            if node.height != l {
                continue;
            }
            let Some(b) = bout[p] else { continue };
            let kids = &node.children;
            for x in b.lo..b.hi {
                if kids.iter().any(|&c| bout[c].is_some_and(|d| d.contains(x))) {
                    continue;
                }
                let z = if kids.is_empty() {
                    node.interval.lo
                } else if kids.len() == 2 {
                    let (p1, p2) = (&tree.nodes[kids[0]], &tree.nodes[kids[1]]);
                    match (bout[kids[0]], bout[kids[1]]) {
                        (Some(b1), _) if x < b1.lo => p1.interval.lo,
                        (_, Some(b2)) if x >= b2.hi => p2.interval.last(),
                        _ => p1.interval.last(),
                    }
                } else {
                    let before = kids.iter().rposition(|&c| bout[c].is_some_and(|d| d.hi <= x));
                    let after = kids.iter().position(|&c| bout[c].is_some_and(|d| d.lo > x));
                    let last = |k: usize| tree.nodes[kids[k]].interval.last();
                    let first = |k: usize| tree.nodes[kids[k]].interval.lo;
                    match (before, after) {
                        (Some(k), Some(k2)) => {
                            if origin[x - 1] <= last(k) {
                                last(k)
                            } else {
                                first(k2)
                            }
                        }
                        (Some(k), None) => last(k),
                        (None, Some(k2)) => first(k2),
                        (None, None) => last(0),
                    }
                };
                if current[x - 1].is_some() {
                    conflicts.push((l, x));
                    continue;
                }
                current[x - 1] = Some(z);
            }
        }
        levels.push(current.clone());
    }
    let target = current.iter().map(|z| z.unwrap_or(1).clamp(1, n.max(1))).collect();
    Ok(Retargeting { source, levels, target, conflicts })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Invariant {
    /// Defined positions are exactly the dominant intervals of the level.
    Defined,
    /// Targets stay in the interval of the node owning the position.
    Confined,
    /// Targets inside one node interval are ordered like the output.
    Ordered,
    /// Few source origins are moved to one target.
    Bounded,
    /// Positions stay defined at higher levels.
    Monotone,
    /// The final pair is total, order-preserving and agrees with the top level.
    Root,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub level: usize,
    pub invariant: Invariant,
    pub detail: String,
}

/// Checks the level invariants of a retargeting: (a) defined set, (b)
/// confinement, (c) order inside node intervals, (d) at most `l·4·K·threshold`
/// moved sources per target at level `l` (K = the run's visit bound), and
/// that the final pair is order-preserving.
pub fn verify_retargeting(
    t: &TwoWayTransducer,
    r: &Run,
    tree: &FactorizationTree,
    ret: &Retargeting,
    threshold: usize,
) -> Result<Vec<Violation>> {
    let n = r.input().len();
    check_spans(tree, n)?;
    let source = origin_graph(t, r)?;
    ret.source.same_words(&source)?;
    if ret.source.origin != source.origin {
        return Err(Error::MismatchedPair("source origins differ from the run".into()));
    }
    if ret.levels.len() != tree.height() + 1 {
        return Err(Error::TreeMismatch(format!("{} levels for a tree of height {}", ret.levels.len(), tree.height())));
    }
    let origin = &source.origin;
    let len = origin.len();
    if ret.levels.iter().any(|v| v.len() != len) || ret.target.len() != len {
        return Err(Error::MismatchedPair("retargeting has the wrong number of output positions".into()));
    }
    let k = r.max_visits();
    let bout = node_dominants(tree, origin, n, threshold);
    let mut out = Vec::new();
    let mut bad = |level, invariant, detail: String| out.push(Violation { level, invariant, detail });
    for (l, targets) in ret.levels.iter().enumerate() {
        let nodes = tree.level(l);
        let owner: Vec<Option<usize>> =
            (1..=len).map(|x| nodes.iter().copied().find(|&p| bout[p].is_some_and(|b| b.contains(x)))).collect();
        for x in 1..=len {
            match (owner[x - 1], targets[x - 1]) {
                (Some(_), None) => bad(l, Invariant::Defined, format!("position {x} is undefined")),
                (None, Some(_)) => bad(l, Invariant::Defined, format!("position {x} is outside every dominant interval")),
                (Some(p), Some(z)) if !tree.nodes[p].interval.contains(z) => {
                    bad(l, Invariant::Confined, format!("position {x} is sent to {z} outside {}", tree.nodes[p].interval))
                }
                _ => {}
            }
            if l > 0 && ret.levels[l - 1][x - 1].is_some() && targets[x - 1].is_none() {
                bad(l, Invariant::Monotone, format!("position {x} is no longer defined"));
            }
        }
        for &p in &nodes {
            let i = tree.nodes[p].interval;
            let mut prev: Option<(usize, usize)> = None;
            for x in 1..=len {
                let Some(z) = targets[x - 1].filter(|&z| i.contains(z)) else { continue };
                if let Some((x0, z0)) = prev {
                    if z < z0 {
                        bad(l, Invariant::Ordered, format!("positions {x0} < {x} are sent to {z0} > {z} inside {i}"));
                    }
                }
                prev = Some((x, z));
            }
        }
        let mut moved: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (x, z) in targets.iter().enumerate() {
            if let Some(z) = *z {
                if z != origin[x] {
                    moved.entry(z).or_default().insert(origin[x]);
                }
            }
        }
        let bound = l * 4 * k * threshold;
        for (z, ys) in moved {
            if ys.len() > bound {
                bad(l, Invariant::Bounded, format!("{} source origins are moved to {z} (bound {bound})", ys.len()));
            }
        }
    }
    let top = ret.levels.last().unwrap();
    for x in 0..len {
        if let Some(z) = top[x] {
            if ret.target[x] != z.clamp(1, n.max(1)) {
                bad(tree.height(), Invariant::Root, format!("position {} ends at {} instead of {z}", x + 1, ret.target[x]));
            }
        }
    }
    if !ret.target.iter().all(|&z| (1..=n.max(1)).contains(&z)) {
        bad(tree.height(), Invariant::Root, "a final target is not an input position".into());
    }
    if !is_order_preserving(&ret.pair()) {
        bad(tree.height(), Invariant::Root, format!("final pair {} is not order-preserving", ret.pair()));
    }
    Ok(out)
}

/// A statement about blocks and dominant intervals that failed on a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub lemma: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    /// Instances checked per statement.
    pub checked: BTreeMap<&'static str, usize>,
    pub counterexamples: Vec<Counterexample>,
}

impl LemmaReport {
    pub fn ok(&self) -> bool {
        self.counterexamples.is_empty()
    }

    fn tick(&mut self, lemma: &'static str) {
        *self.checked.entry(lemma).or_default() += 1;
    }

    fn fail(&mut self, lemma: &'static str, detail: String) {
        self.counterexamples.push(Counterexample { lemma, detail });
    }
}

pub const LARGE_BLOCK_LOOP: &str = "large-block-loop";
pub const BLOCK_ORDER: &str = "block-order";
pub const BINARY_GAP: &str = "binary-gap";
pub const IDEMPOTENT_DECOMPOSITION: &str = "idempotent-decomposition";
pub const SINGLE_PRODUCTIVE_EDGE: &str = "single-productive-edge";

fn real_intervals(n: usize) -> impl Iterator<Item = Interval> {
    (1..=n).flat_map(move |lo| (lo + 1..=n + 1).map(move |hi| Interval::new(lo, hi)))
}

/// Output range `[lo, hi)` of each padded step.
fn step_outputs(p: &PaddedRun, r: &Run) -> Vec<(usize, usize)> {
    let mut x = 1;
    p.steps
        .iter()
        .map(|s| {
            let w = s.real.map_or(0, |k| r.step_output(k).chars().count());
            x += w;
            (x - w, x)
        })
        .collect()
}

/// Every block of an interval with more than `threshold` origins meets the
/// output of a productive straight edge of a loop inside the interval.
fn large_block_loop(report: &mut LemmaReport, p: &PaddedRun, r: &Run, table: &mut FlowTable, origin: &[usize], threshold: usize) {
    let ls = loops(p, table);
    let ranges = step_outputs(p, r);
    for i in real_intervals(p.input_len) {
        for b in blocks(origin, i) {
            if distinct(origin, b) <= threshold {
                continue;
            }
            report.tick(LARGE_BLOCK_LOOP);
            let found = ls.iter().filter(|j| i.lo <= j.lo && j.hi <= i.hi).any(|&j| {
                let f = table.get(j);
                f.graph.edges.iter().zip(&f.witnesses).any(|(e, w)| {
                    e.productive && e.is_straight() && (w.start..w.end).any(|s| ranges[s].0 < b.hi && b.lo < ranges[s].1)
                })
            });
            if !found {
                report.fail(LARGE_BLOCK_LOOP, format!("block {b} of {i} meets no productive straight edge of a loop inside {i}"));
            }
        }
    }
}

/// The large-block-loop statement alone; it does not need inversion-freeness.
pub fn check_large_block_loop(t: &TwoWayTransducer, r: &Run, threshold: usize) -> Result<LemmaReport> {
    let p = PaddedRun::new(t, r)?;
    let mut table = FlowTable::new(&p);
    let origin = origin_graph(t, r)?.origin;
    let mut report = LemmaReport::default();
    large_block_loop(&mut report, &p, r, &mut table, &origin, threshold);
    Ok(report)
}

/// Can the output interval `seg` be cut into consecutive (possibly empty)
/// gaps `J_k` for `k` in `ks`, each with origins in `I_k ∪ I_{k+1}` and at
/// most `bound` distinct origins?
fn gaps_fit(origin: &[usize], seg: Interval, ks: std::ops::Range<usize>, pieces: &[Interval], bound: usize) -> bool {
    let ks: Vec<usize> = ks.collect();
    if ks.is_empty() {
        return seg.is_empty();
    }
    let fits = |k: usize, s: usize, e: usize| {
        let j = Interval::new(s, e);
        j.is_empty() || {
            let inside = (s..e).all(|x| pieces[k].contains(origin[x - 1]) || pieces[k + 1].contains(origin[x - 1]));
            inside && distinct(origin, j) <= bound
        }
    };
    // reach[i]: positions seg.lo..reach covered by the first i gaps
    let mut reach: Vec<bool> = (seg.lo..=seg.hi).map(|x| x == seg.lo).collect();
    for &k in &ks {
        let mut next = vec![false; reach.len()];
        for s in 0..reach.len() {
            if reach[s] {
                for e in s..reach.len() {
                    if fits(k, seg.lo + s, seg.lo + e) {
                        next[e] = true;
                    }
                }
            }
        }
        reach = next;
    }
    *reach.last().unwrap()
}

/// Checks the block statements on every choice of intervals of an
/// inversion-free run, with `threshold` as the largeness threshold and the
/// run's visit bound as K:
///
/// - `large-block-loop`: a large block of `I` meets a productive straight
///   edge of a loop inside `I`;
/// - `block-order`: large blocks of `I1 < I2` are ordered the same way;
/// - `binary-gap`: `bout(I1·I2)` minus `bout(I1) ∪ bout(I2)` has at most
///   `4K·threshold` origins;
/// - `idempotent-decomposition`: for a loop `I = I1⋯In` with equal flows,
///   `bout(I) = B1 J1 B2 ⋯ Jn-1 Bn` with `Bk = bout(Ik)` and gaps `Jk` with
///   origins in `Ik ∪ Ik+1` and at most `2K·threshold` of them;
/// - `single-productive-edge`: the flow of a loop has at most one
///   productive straight edge, and it is left-to-right.
pub fn check_lemmas(t: &TwoWayTransducer, r: &Run, threshold: usize) -> Result<LemmaReport> {
    if find_inversion(t, r)?.is_some() {
        return Err(Error::HasInversion);
    }
    let p = PaddedRun::new(t, r)?;
    let mut table = FlowTable::new(&p);
    let origin = origin_graph(t, r)?.origin;
    let n = p.input_len;
    let k = r.max_visits();
    let mut report = LemmaReport::default();
    large_block_loop(&mut report, &p, r, &mut table, &origin, threshold);

    let intervals: Vec<Interval> = real_intervals(n).collect();
    for &i1 in &intervals {
        for &i2 in intervals.iter().filter(|i2| i1.hi <= i2.lo) {
            for b1 in blocks(&origin, i1).into_iter().filter(|&b| distinct(&origin, b) > threshold) {
                for b2 in blocks(&origin, i2).into_iter().filter(|&b| distinct(&origin, b) > threshold) {
                    report.tick(BLOCK_ORDER);
                    if b1.hi > b2.lo {
                        report.fail(BLOCK_ORDER, format!("large block {b1} of {i1} does not precede large block {b2} of {i2}"));
                    }
                }
            }
        }
    }

    for &i in &intervals {
        for m in i.lo + 1..i.hi {
            report.tick(BINARY_GAP);
            let Some(b) = dominant(&origin, i, threshold) else { continue };
            let parts = [dominant(&origin, Interval::new(i.lo, m), threshold), dominant(&origin, Interval::new(m, i.hi), threshold)];
            let rest: BTreeSet<usize> =
                (b.lo..b.hi).filter(|&x| !parts.iter().flatten().any(|d| d.contains(x))).map(|x| origin[x - 1]).collect();
            if rest.len() > 4 * k * threshold {
                report.fail(BINARY_GAP, format!("bout{i} outside the children split at {m} has {} origins", rest.len()));
            }
        }
    }

    for &i in &loops(&p, &mut table) {
        let f = table.get(i).graph.clone();
        let straight: Vec<_> = f.edges.iter().filter(|e| e.productive && e.is_straight()).collect();
        report.tick(SINGLE_PRODUCTIVE_EDGE);
        if straight.len() > 1 || straight.iter().any(|e| e.kind() != "LR") {
            let kinds: Vec<_> = straight.iter().map(|e| e.kind()).collect();
            report.fail(SINGLE_PRODUCTIVE_EDGE, format!("loop {i} has productive straight edges {kinds:?}"));
        }
        for pieces in decompositions(i, &f, &mut table) {
            report.tick(IDEMPOTENT_DECOMPOSITION);
            if let Err(why) = idempotent_decomposition(&origin, i, &pieces, threshold, 2 * k * threshold) {
                let shown: Vec<String> = pieces.iter().map(|p| p.to_string()).collect();
                report.fail(IDEMPOTENT_DECOMPOSITION, format!("{i} = {}: {why}", shown.join("·")));
            }
        }
    }
    Ok(report)
}

/// Splits of `i` into at least two intervals whose flows all equal `f`.
fn decompositions(i: Interval, f: &crate::flow::FlowGraph, table: &mut FlowTable) -> Vec<Vec<Interval>> {
    fn go(lo: usize, i: Interval, f: &crate::flow::FlowGraph, table: &mut FlowTable, acc: &mut Vec<Interval>, out: &mut Vec<Vec<Interval>>) {
        if lo == i.hi {
            if acc.len() >= 2 {
                out.push(acc.clone());
            }
            return;
        }
        for hi in lo + 1..=i.hi {
            let j = Interval::new(lo, hi);
            if &table.get(j).graph == f {
                acc.push(j);
                go(hi, i, f, table, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(i.lo, i, f, table, &mut Vec::new(), &mut out);
    out
}

fn idempotent_decomposition(origin: &[usize], i: Interval, pieces: &[Interval], threshold: usize, bound: usize) -> std::result::Result<(), String> {
    let bs: Vec<Option<Interval>> = pieces.iter().map(|&p| dominant(origin, p, threshold)).collect();
    let Some(d) = dominant(origin, i, threshold) else {
        return match bs.iter().position(Option::is_some) {
            Some(k) => Err(format!("bout{} is non-empty but bout{i} is empty", pieces[k])),
            None => Ok(()),
        };
    };
    let full: Vec<(usize, Interval)> = bs.iter().enumerate().filter_map(|(k, b)| b.map(|b| (k, b))).collect();
    for &(k, b) in &full {
        if b.lo < d.lo || b.hi > d.hi {
            return Err(format!("bout{} = {b} is not inside bout{i} = {d}", pieces[k]));
        }
    }
    for w in full.windows(2) {
        if w[0].1.hi > w[1].1.lo {
            return Err(format!("bout{} = {} does not precede bout{} = {}", pieces[w[0].0], w[0].1, pieces[w[1].0], w[1].1));
        }
    }
    // segments between consecutive non-empty dominant intervals, with the
    // gaps that have to cover them
    let mut segments = Vec::new();
    let (mut at, mut k0) = (d.lo, 0);
    for &(k, b) in &full {
        segments.push((Interval::new(at, b.lo), k0..k));
        at = b.hi;
        k0 = k;
    }
    segments.push((Interval::new(at, d.hi), k0..pieces.len() - 1));
    for (seg, ks) in segments {
        if !gaps_fit(origin, seg, ks.clone(), pieces, bound) {
            return Err(format!("output {seg} cannot be split into gaps J{}..J{} with origins in adjacent pieces and at most {bound} origins each", ks.start + 1, ks.end));
        }
    }
    Ok(())
}
