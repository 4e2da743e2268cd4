//! Runs, synchronized pairs and intervals.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::{padded_symbol, StateId, TransitionId, TwoWayTransducer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Configuration {
    pub state: StateId,
    pub cut: usize,
}

impl Configuration {
    pub fn new(state: StateId, cut: usize) -> Self {
        Configuration { state, cut }
    }
}

/// A half-open interval `[lo, hi)` of padded input positions.
///
/// Position 0 is `⊢` and `n + 1` is `⊣`; the interval is bordered by cuts
/// `lo` and `hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Self {
        assert!(lo <= hi, "interval [{lo}, {hi}) is reversed");
        Interval { lo, hi }
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.lo <= pos && pos < self.hi
    }

    /// Last position, for non-empty intervals.
    pub fn last(&self) -> usize {
        self.hi - 1
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

/// A sequence of configurations linked by transitions.
///
/// Construction re-checks every step against the machine, so a `Run`
/// value is always consistent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    input: Vec<char>,
    configs: Vec<Configuration>,
    transitions: Vec<TransitionId>,
    outputs: Vec<String>,
    successful: bool,
}

impl Run {
    /// Builds a run from its configurations and transitions, checking
    /// each step.
    pub fn from_parts(
        t: &TwoWayTransducer,
        input: &[char],
        configs: Vec<Configuration>,
        transitions: Vec<TransitionId>,
    ) -> Result<Run> {
        t.check_input(input)?;
        if configs.len() != transitions.len() + 1 {
            return Err(Error::InvalidRun(format!(
                "{} configurations for {} transitions",
                configs.len(),
                transitions.len()
            )));
        }
        let n = input.len();
        for c in &configs {
            if c.state >= t.num_states() || c.cut == 0 || c.cut > n + 1 {
                return Err(Error::InvalidRun(format!("configuration {c:?} out of range")));
            }
        }
        for (k, &id) in transitions.iter().enumerate() {
            if id >= t.num_transitions() {
                return Err(Error::InvalidRun(format!("unknown transition {id}")));
            }
            let tr = t.transition(id);
            let c = configs[k];
            if tr.source != c.state {
                return Err(Error::InvalidRun(format!("step {k}: transition {id} does not leave state {}", t.state_name(c.state))));
            }
            let j = t.reading(c.state).read_position(c.cut);
            if tr.read != padded_symbol(input, j) {
                return Err(Error::InvalidRun(format!("step {k}: transition {id} reads {} but position {j} holds {}", tr.read, padded_symbol(input, j))));
            }
            let next = Configuration::new(tr.target, t.next_cut(id, c.cut));
            if next != configs[k + 1] {
                return Err(Error::InvalidRun(format!("step {k}: expected {next:?}, found {:?}", configs[k + 1])));
            }
        }
        let first = configs[0];
        let last = *configs.last().unwrap();
        let successful = first.cut == 1
            && t.is_initial(first.state)
            && last.cut == n + 1
            && t.is_final(last.state);
        let outputs = transitions.iter().map(|&id| t.transition(id).output.clone()).collect();
        Ok(Run { input: input.to_vec(), configs, transitions, outputs, successful })
    }

    /// Builds a run by firing `transitions` from `start`.
    pub fn from_transitions(
        t: &TwoWayTransducer,
        input: &[char],
        start: Configuration,
        transitions: Vec<TransitionId>,
    ) -> Result<Run> {
        let mut configs = vec![start];
        let mut c = start;
        for &id in &transitions {
            if id >= t.num_transitions() {
                return Err(Error::InvalidRun(format!("unknown transition {id}")));
            }
            if c.cut == 0 || c.cut > input.len() + 1 {
                return Err(Error::InvalidRun(format!("configuration {c:?} out of range")));
            }
            c = Configuration::new(t.transition(id).target, t.next_cut(id, c.cut));
            configs.push(c);
        }
        Run::from_parts(t, input, configs, transitions)
    }

    pub fn input(&self) -> &[char] {
        &self.input
    }

    pub fn input_string(&self) -> String {
        self.input.iter().collect()
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn transitions(&self) -> &[TransitionId] {
        &self.transitions
    }

    /// Output word of step `k`.
    pub fn step_output(&self, k: usize) -> &str {
        &self.outputs[k]
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn is_successful(&self) -> bool {
        self.successful
    }

    /// Padded position read by step `k`.
    pub fn read_position(&self, t: &TwoWayTransducer, k: usize) -> usize {
        let c = self.configs[k];
        t.reading(c.state).read_position(c.cut)
    }

    pub fn output(&self) -> String {
        self.outputs.concat()
    }

    /// Number of configurations at each cut `0..=n + 1` (cut 0 is never used).
    pub fn visit_counts(&self) -> Vec<usize> {
        let mut v = vec![0; self.input.len() + 2];
        for c in &self.configs {
            v[c.cut] += 1;
        }
        v
    }

    pub fn max_visits(&self) -> usize {
        self.visit_counts().into_iter().max().unwrap_or(0)
    }
}

/// An input word, an output word and an origin for each output position.
///
/// Positions are 1-based in `origin`, as in the JSON form
/// `{"input": "baca", "output": "abac", "origin": [4, 1, 2, 3]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SynchronizedPair {
    pub input: String,
    pub output: String,
    pub origin: Vec<usize>,
}

impl SynchronizedPair {
    /// Checks lengths and origin ranges.
    pub fn new(input: &str, output: &str, origin: Vec<usize>) -> Result<Self> {
        let p = SynchronizedPair { input: input.into(), output: output.into(), origin };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        let m = self.output.chars().count();
        if self.origin.len() != m {
            return Err(Error::InvalidPair(format!(
                "{} origins for an output of length {m}",
                self.origin.len()
            )));
        }
        let top = self.input_len().max(1);
        if let Some(o) = self.origin.iter().find(|&&o| o == 0 || o > top) {
            return Err(Error::InvalidPair(format!("origin {o} outside 1..={top}")));
        }
        Ok(())
    }

    pub fn input_len(&self) -> usize {
        self.input.chars().count()
    }

    pub fn output_len(&self) -> usize {
        self.origin.len()
    }

    /// Same words, different origins.
    pub fn with_origins(&self, origin: Vec<usize>) -> Result<Self> {
        SynchronizedPair::new(&self.input, &self.output, origin)
    }

    pub fn same_words(&self, other: &SynchronizedPair) -> Result<()> {
        if self.input != other.input || self.output != other.output {
            return Err(Error::MismatchedPair(format!(
                "({}, {}) vs ({}, {})",
                self.input, self.output, other.input, other.output
            )));
        }
        Ok(())
    }
}

impl fmt::Display for SynchronizedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {{", self.input, self.output)?;
        for (x, o) in self.origin.iter().enumerate() {
            if x > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}↦{}", x + 1, o)?;
        }
        f.write_str("})")
    }
}

/// Origin of every output letter of `r`.
///
/// Output produced while reading `⊢` or `⊣` is attributed to the nearest
/// real position (1 or `n`). On an empty input every origin is 1.
pub fn origin_graph(t: &TwoWayTransducer, r: &Run) -> Result<SynchronizedPair> {
    if !r.is_successful() {
        return Err(Error::NotSuccessful);
    }
    let n = r.input().len();
    let mut origin = Vec::new();
    for k in 0..r.len() {
        let j = r.read_position(t, k).clamp(1, n.max(1));
        origin.extend(std::iter::repeat(j).take(r.step_output(k).chars().count()));
    }
    Ok(SynchronizedPair { input: r.input_string(), output: r.output(), origin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn reverse_run_on_ab() {
        let t = corpus::reverse();
        let w: Vec<char> = "ab".chars().collect();
        let q0 = t.state_index("q0").unwrap();
        let ids = |s: &[(&str, &str)]| -> Vec<TransitionId> {
            s.iter()
                .map(|&(q, a)| {
                    let q = t.state_index(q).unwrap();
                    t.outgoing(q)
                        .iter()
                        .copied()
                        .find(|&i| t.transition(i).read.to_string() == a)
                        .unwrap()
                })
                .collect()
        };
        let tr = ids(&[("q0", "a"), ("q0", "b"), ("q0", "-|"), ("p", "b"), ("p", "a"), ("p", "|-"), ("q1", "a"), ("q1", "b")]);
        let r = Run::from_transitions(&t, &w, Configuration::new(q0, 1), tr).unwrap();
        assert!(r.is_successful());
        assert_eq!(r.visit_counts()[1..].to_vec(), vec![3, 3, 3]);
        let p = origin_graph(&t, &r).unwrap();
        assert_eq!(p, SynchronizedPair::new("ab", "ba", vec![2, 1]).unwrap());
    }

    #[test]
    fn from_parts_rejects_bad_steps() {
        let t = corpus::copier();
        let w: Vec<char> = "ab".chars().collect();
        let a = t.outgoing_on(0, crate::Symbol::Letter('a')).next().unwrap();
        let bad = Run::from_parts(&t, &w, vec![Configuration::new(0, 1), Configuration::new(0, 2), Configuration::new(0, 3)], vec![a, a]);
        assert!(matches!(bad, Err(Error::InvalidRun(_))));
        let partial = Run::from_parts(&t, &w, vec![Configuration::new(0, 1), Configuration::new(0, 2)], vec![a]).unwrap();
        assert!(!partial.is_successful());
        assert_eq!(origin_graph(&t, &partial), Err(Error::NotSuccessful));
    }

    #[test]
    fn pair_checks() {
        assert!(SynchronizedPair::new("ab", "x", vec![3]).is_err());
        assert!(SynchronizedPair::new("ab", "xy", vec![1]).is_err());
        let p = SynchronizedPair::new("baca", "abac", vec![4, 1, 2, 3]).unwrap();
        assert_eq!(p.to_string(), "(baca, abac, {1↦4, 2↦1, 3↦2, 4↦3})");
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"input":"baca","output":"abac","origin":[4,1,2,3]}"#);
    }
}
