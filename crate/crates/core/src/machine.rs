//! Two-way transducers with right- and left-reading states.
//!
//! A right-reading state at cut `c` reads the letter at position `c`, a
//! left-reading one reads position `c - 1`. The direction of the target
//! state decides where the head ends up, which gives four move shapes:
//!
//! | source | target | reads  | next cut |
//! |--------|--------|--------|----------|
//! | right  | right  | `c`    | `c + 1`  |
//! | right  | left   | `c`    | `c`      |
//! | left   | right  | `c - 1`| `c`      |
//! | left   | left   | `c - 1`| `c - 1`  |
//!
//! Positions are padded: `0` holds `⊢`, `1..=n` the input, `n + 1` holds `⊣`.
//! Cuts range over `1..=n + 1`.
//!
//! Machines come in two forms. [`TransducerDef`] is the name-based document
//! form and may be broken; [`TwoWayTransducer`] is indexed and always valid.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type StateId = usize;
pub type TransitionId = usize;

/// A letter of the padded input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    LeftMark,
    Letter(char),
    RightMark,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::LeftMark => f.write_str("|-"),
            Symbol::Letter(a) => write!(f, "{a}"),
            Symbol::RightMark => f.write_str("-|"),
        }
    }
}

/// Reading direction of a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reading {
    Right,
    Left,
}

impl Reading {
    /// Position read by a state with this direction standing at `cut`.
    pub fn read_position(self, cut: usize) -> usize {
        match self {
            Reading::Right => cut,
            Reading::Left => cut - 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDef {
    pub name: String,
    pub reading: Reading,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionDef {
    pub source: String,
    pub read: Symbol,
    pub output: String,
    pub target: String,
}

/// Document form of a transducer, states referenced by name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransducerDef {
    pub input_alphabet: Vec<char>,
    pub output_alphabet: Vec<char>,
    pub states: Vec<StateDef>,
    pub initial: Vec<String>,
    pub final_states: Vec<String>,
    pub transitions: Vec<TransitionDef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Issue {
    DuplicateState { name: String },
    UnknownState { name: String, context: String },
    InitialNotRightReading { name: String },
    ReservedLetter { letter: char },
    DuplicateLetter { letter: char },
    LetterNotInAlphabet { letter: char, transition: usize },
    OutputNotInAlphabet { letter: char, transition: usize },
    DuplicateTransition { transition: usize },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::DuplicateState { name } => write!(f, "state {name:?} declared twice"),
            Issue::UnknownState { name, context } => {
                write!(f, "unknown state {name:?} in {context}")
            }
            Issue::InitialNotRightReading { name } => {
                write!(f, "initial state {name:?} must be right-reading")
            }
            Issue::ReservedLetter { letter } => {
                write!(f, "letter {letter:?} is reserved and cannot be declared")
            }
            Issue::DuplicateLetter { letter } => write!(f, "letter {letter:?} declared twice"),
            Issue::LetterNotInAlphabet { letter, transition } => {
                write!(f, "transition {transition} reads {letter:?}, not in the input alphabet")
            }
            Issue::OutputNotInAlphabet { letter, transition } => {
                write!(f, "transition {transition} outputs {letter:?}, not in the output alphabet")
            }
            Issue::DuplicateTransition { transition } => {
                write!(f, "transition {transition} is a duplicate")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

fn is_reserved(c: char) -> bool {
    c.is_whitespace() || matches!(c, ',' | '⊢' | '⊣')
}

/// Structural checks on a document-form transducer.
pub fn validate_transducer(def: &TransducerDef) -> ValidationReport {
    let mut issues = Vec::new();
    let mut readings = HashMap::new();
    for s in &def.states {
        if readings.insert(s.name.as_str(), s.reading).is_some() {
            issues.push(Issue::DuplicateState { name: s.name.clone() });
        }
    }
    let mut seen = BTreeSet::new();
    for &a in &def.input_alphabet {
        if is_reserved(a) {
            issues.push(Issue::ReservedLetter { letter: a });
        } else if !seen.insert(a) {
            issues.push(Issue::DuplicateLetter { letter: a });
        }
    }
    let output: BTreeSet<char> = def.output_alphabet.iter().copied().collect();

    let check = |name: &str, context: String, issues: &mut Vec<Issue>| {
        if !readings.contains_key(name) {
            issues.push(Issue::UnknownState { name: name.to_string(), context });
        }
    };
    for q in &def.initial {
        check(q, "initial states".into(), &mut issues);
        if readings.get(q.as_str()) == Some(&Reading::Left) {
            issues.push(Issue::InitialNotRightReading { name: q.clone() });
        }
    }
    for q in &def.final_states {
        check(q, "final states".into(), &mut issues);
    }
    let mut dup = BTreeSet::new();
    for (i, t) in def.transitions.iter().enumerate() {
        check(&t.source, format!("transition {i}"), &mut issues);
        check(&t.target, format!("transition {i}"), &mut issues);
        if let Symbol::Letter(a) = t.read {
            if !seen.contains(&a) {
                issues.push(Issue::LetterNotInAlphabet { letter: a, transition: i });
            }
        }
        for b in t.output.chars() {
            if !output.contains(&b) {
                issues.push(Issue::OutputNotInAlphabet { letter: b, transition: i });
            }
        }
        if !dup.insert((&t.source, t.read, &t.output, &t.target)) {
            issues.push(Issue::DuplicateTransition { transition: i });
        }
    }
    ValidationReport { issues }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Transition {
    pub source: StateId,
    pub read: Symbol,
    pub output: String,
    pub target: StateId,
}

/// A validated two-way transducer with indexed states.
#[derive(Clone, Debug)]
pub struct TwoWayTransducer {
    input_alphabet: Vec<char>,
    output_alphabet: Vec<char>,
    names: Vec<String>,
    readings: Vec<Reading>,
    initial: Vec<bool>,
    finals: Vec<bool>,
    transitions: Vec<Transition>,
    by_source: Vec<Vec<TransitionId>>,
}

impl TwoWayTransducer {
    pub fn from_def(def: &TransducerDef) -> Result<Self> {
        let report = validate_transducer(def);
        if !report.is_valid() {
            return Err(Error::InvalidTransducer(report.to_string()));
        }
        let index: HashMap<&str, StateId> =
            def.states.iter().enumerate().map(|(i, s)| (s.name.as_str(), i)).collect();
        let n = def.states.len();
        let mut initial = vec![false; n];
        for q in &def.initial {
            initial[index[q.as_str()]] = true;
        }
        let mut finals = vec![false; n];
        for q in &def.final_states {
            finals[index[q.as_str()]] = true;
        }
        let transitions: Vec<Transition> = def
            .transitions
            .iter()
            .map(|t| Transition {
                source: index[t.source.as_str()],
                read: t.read,
                output: t.output.clone(),
                target: index[t.target.as_str()],
            })
            .collect();
        let mut by_source = vec![Vec::new(); n];
        for (i, t) in transitions.iter().enumerate() {
            by_source[t.source].push(i);
        }
        let mut input_alphabet = def.input_alphabet.clone();
        input_alphabet.sort_unstable();
        let mut output_alphabet = def.output_alphabet.clone();
        output_alphabet.sort_unstable();
        output_alphabet.dedup();
        Ok(TwoWayTransducer {
            input_alphabet,
            output_alphabet,
            names: def.states.iter().map(|s| s.name.clone()).collect(),
            readings: def.states.iter().map(|s| s.reading).collect(),
            initial,
            finals,
            transitions,
            by_source,
        })
    }

    pub fn to_def(&self) -> TransducerDef {
        let name = |q: StateId| self.names[q].clone();
        TransducerDef {
            input_alphabet: self.input_alphabet.clone(),
            output_alphabet: self.output_alphabet.clone(),
            states: (0..self.num_states())
                .map(|q| StateDef { name: name(q), reading: self.readings[q] })
                .collect(),
            initial: self.initial_states().map(name).collect(),
            final_states: self.final_states().map(name).collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionDef {
                    source: name(t.source),
                    read: t.read,
                    output: t.output.clone(),
                    target: name(t.target),
                })
                .collect(),
        }
    }

    pub fn input_alphabet(&self) -> &[char] {
        &self.input_alphabet
    }

    pub fn output_alphabet(&self) -> &[char] {
        &self.output_alphabet
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.names[q]
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn reading(&self, q: StateId) -> Reading {
        self.readings[q]
    }

    pub fn is_initial(&self, q: StateId) -> bool {
        self.initial[q]
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals[q]
    }

    pub fn initial_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.num_states()).filter(|&q| self.initial[q])
    }

    pub fn final_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.num_states()).filter(|&q| self.finals[q])
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, id: TransitionId) -> &Transition {
        &self.transitions[id]
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn outgoing(&self, q: StateId) -> &[TransitionId] {
        &self.by_source[q]
    }

    /// Transitions leaving `q` that read `a`.
    pub fn outgoing_on(&self, q: StateId, a: Symbol) -> impl Iterator<Item = TransitionId> + '_ {
        self.by_source[q].iter().copied().filter(move |&t| self.transitions[t].read == a)
    }

    /// Cut reached when `t` fires from `cut`.
    pub fn next_cut(&self, t: TransitionId, cut: usize) -> usize {
        let t = &self.transitions[t];
        match (self.readings[t.source], self.readings[t.target]) {
            (Reading::Right, Reading::Right) => cut + 1,
            (Reading::Left, Reading::Left) => cut - 1,
            _ => cut,
        }
    }

    /// Whether `t` can ever fire: moving right across `⊣` or left across `⊢`
    /// would leave the cut range.
    pub fn is_live(&self, t: TransitionId) -> bool {
        let t = &self.transitions[t];
        !matches!(
            (t.read, self.readings[t.source], self.readings[t.target]),
            (Symbol::RightMark, Reading::Right, Reading::Right)
                | (Symbol::LeftMark, Reading::Left, Reading::Left)
        )
    }

    /// Letters of the padded alphabet: `⊢`, the input letters, `⊣`.
    pub fn padded_alphabet(&self) -> Vec<Symbol> {
        let mut v = vec![Symbol::LeftMark];
        v.extend(self.input_alphabet.iter().map(|&a| Symbol::Letter(a)));
        v.push(Symbol::RightMark);
        v
    }

    /// Checks that every letter of `input` is in the input alphabet.
    pub fn check_input(&self, input: &[char]) -> Result<()> {
        match input.iter().find(|a| self.input_alphabet.binary_search(a).is_err()) {
            Some(&a) => Err(Error::UnknownLetter(a)),
            None => Ok(()),
        }
    }

    /// Transitions grouped by the letter they read.
    pub fn by_letter(&self) -> BTreeMap<Symbol, Vec<TransitionId>> {
        let mut m: BTreeMap<Symbol, Vec<TransitionId>> = BTreeMap::new();
        for (i, t) in self.transitions.iter().enumerate() {
            m.entry(t.read).or_default().push(i);
        }
        m
    }
}

/// Letter at padded position `j` of `input`.
pub fn padded_symbol(input: &[char], j: usize) -> Symbol {
    if j == 0 {
        Symbol::LeftMark
    } else if j == input.len() + 1 {
        Symbol::RightMark
    } else {
        Symbol::Letter(input[j - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn copier() -> TransducerDef {
        TransducerDef {
            input_alphabet: vec!['a', 'b'],
            output_alphabet: vec!['a', 'b'],
            states: vec![StateDef { name: "q0".into(), reading: Reading::Right }],
            initial: vec!["q0".into()],
            final_states: vec!["q0".into()],
            transitions: ['a', 'b']
                .iter()
                .map(|&a| TransitionDef {
                    source: "q0".into(),
                    read: Symbol::Letter(a),
                    output: a.to_string(),
                    target: "q0".into(),
                })
                .collect(),
        }
    }

    #[test]
    fn copier_is_valid() {
        assert!(validate_transducer(&copier()).is_valid());
        let t = TwoWayTransducer::from_def(&copier()).unwrap();
        assert_eq!(t.num_states(), 1);
        assert_eq!(t.outgoing_on(0, Symbol::Letter('a')).count(), 1);
        assert_eq!(t.to_def(), copier());
    }

    #[test]
    fn unknown_state_is_reported() {
        let mut def = copier();
        def.transitions[0].target = "q9".into();
        let report = validate_transducer(&def);
        assert_eq!(report.issues.len(), 1);
        assert!(matches!(&report.issues[0], Issue::UnknownState { name, .. } if name == "q9"));
        assert!(TwoWayTransducer::from_def(&def).is_err());
    }

    #[test]
    fn left_reading_initial_is_rejected() {
        let mut def = copier();
        def.states[0].reading = Reading::Left;
        assert_eq!(
            validate_transducer(&def).issues,
            vec![Issue::InitialNotRightReading { name: "q0".into() }]
        );
    }

    #[test]
    fn letters_are_checked() {
        let mut def = copier();
        def.transitions[0].read = Symbol::Letter('z');
        def.transitions[1].output = "x".into();
        let issues = validate_transducer(&def).issues;
        assert!(issues.contains(&Issue::LetterNotInAlphabet { letter: 'z', transition: 0 }));
        assert!(issues.contains(&Issue::OutputNotInAlphabet { letter: 'x', transition: 1 }));
    }

    #[test]
    fn move_shapes() {
        let mut def = copier();
        def.states.push(StateDef { name: "p".into(), reading: Reading::Left });
        for (s, t) in [("q0", "p"), ("p", "q0"), ("p", "p")] {
            def.transitions.push(TransitionDef {
                source: s.into(),
                read: Symbol::Letter('a'),
                output: String::new(),
                target: t.into(),
            });
        }
        let t = TwoWayTransducer::from_def(&def).unwrap();
        assert_eq!(t.next_cut(0, 3), 4);
        assert_eq!(t.next_cut(2, 3), 3);
        assert_eq!(t.next_cut(3, 3), 3);
        assert_eq!(t.next_cut(4, 3), 2);
        assert_eq!(Reading::Left.read_position(3), 2);
    }

    #[test]
    fn padded_positions() {
        let w: Vec<char> = "ab".chars().collect();
        assert_eq!(padded_symbol(&w, 0), Symbol::LeftMark);
        assert_eq!(padded_symbol(&w, 2), Symbol::Letter('b'));
        assert_eq!(padded_symbol(&w, 3), Symbol::RightMark);
    }
}
