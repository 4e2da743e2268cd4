//! Plain-text transducer documents.
//!
//! ```text
//! # moves the last letter to the front
//! input: a b c
//! output: a b c
//! right: q0 q1 q2 q3
//! left: p
//! initial: q0
//! final: q3
//! q0, a -> , q0
//! q0, a -> a, q1
//! q1, -| -> , p
//! ```
//!
//! A transition line is `source, letter -> output, target`. The letter is a
//! single character or one of the endmarkers `|-` / `-|` (also `⊢` / `⊣`);
//! an empty output is written as nothing, `ε` or `_`. Lines whose first
//! non-blank character is `#` are comments, so `#` can still be a letter.

use std::fmt::Write as _;

use thiserror::Error;

use crate::machine::{validate_transducer, Issue, Reading, StateDef, Symbol, TransducerDef, TransitionDef, TwoWayTransducer};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, message: message.into() }
}

fn parse_letter(tok: &str, line: usize) -> Result<Symbol, ParseError> {
    match tok {
        "|-" | "⊢" => Ok(Symbol::LeftMark),
        "-|" | "⊣" => Ok(Symbol::RightMark),
        _ => {
            let mut cs = tok.chars();
            match (cs.next(), cs.next()) {
                (Some(a), None) => Ok(Symbol::Letter(a)),
                _ => Err(syntax(line, format!("expected a single letter, found {tok:?}"))),
            }
        }
    }
}

fn parse_word(tok: &str) -> String {
    match tok {
        "ε" | "_" => String::new(),
        _ => tok.to_string(),
    }
}

/// Parses a document into its name-based form without validating it.
pub fn parse_def(src: &str) -> Result<TransducerDef, ParseError> {
    parse_lines(src).map(|(def, _)| def)
}

/// The definition and the line of every transition.
fn parse_lines(src: &str) -> Result<(TransducerDef, Vec<usize>), ParseError> {
    let mut def = TransducerDef::default();
    let mut lines = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        if let Some((lhs, rhs)) = s.split_once("->") {
            let (source, letter) = lhs
                .split_once(',')
                .ok_or_else(|| syntax(line, "expected `source, letter` before `->`"))?;
            let (out, target) = rhs
                .rsplit_once(',')
                .ok_or_else(|| syntax(line, "expected `output, target` after `->`"))?;
            let (source, target) = (source.trim(), target.trim());
            if source.is_empty() || target.is_empty() {
                return Err(syntax(line, "missing state name"));
            }
            let out = out.trim();
            if out.chars().any(char::is_whitespace) {
                return Err(syntax(line, "output word contains whitespace"));
            }
            def.transitions.push(TransitionDef {
                source: source.into(),
                read: parse_letter(letter.trim(), line)?,
                output: parse_word(out),
                target: target.into(),
            });
            lines.push(line);
            continue;
        }
        let (key, rest) = s
            .split_once(':')
            .ok_or_else(|| syntax(line, format!("unrecognised line {s:?}")))?;
        let items = rest.split_whitespace();
        match key.trim() {
            "input" | "output" => {
                let mut letters = Vec::new();
                for tok in items {
                    match parse_letter(tok, line)? {
                        Symbol::Letter(a) => letters.push(a),
                        _ => return Err(syntax(line, "endmarkers cannot be declared")),
                    }
                }
                if key.trim() == "input" {
                    def.input_alphabet.extend(letters);
                } else {
                    def.output_alphabet.extend(letters);
                }
            }
            "right" => def.states.extend(items.map(|n| StateDef { name: n.into(), reading: Reading::Right })),
            "left" => def.states.extend(items.map(|n| StateDef { name: n.into(), reading: Reading::Left })),
            "initial" => def.initial.extend(items.map(String::from)),
            "final" => def.final_states.extend(items.map(String::from)),
            other => return Err(syntax(line, format!("unknown declaration {other:?}"))),
        }
    }
    Ok((def, lines))
}

/// Parses and validates a document. Validation issues about a transition
/// name its line.
pub fn parse_transducer(src: &str) -> Result<TwoWayTransducer, ParseError> {
    let (def, lines) = parse_lines(src)?;
    let report = validate_transducer(&def);
    if !report.is_valid() {
        let msgs: Vec<String> = report
            .issues
            .iter()
            .map(|issue| match issue {
                Issue::LetterNotInAlphabet { transition, .. }
                | Issue::OutputNotInAlphabet { transition, .. }
                | Issue::DuplicateTransition { transition } => format!("line {}: {issue}", lines[*transition]),
                _ => issue.to_string(),
            })
            .collect();
        return Err(ParseError::Invalid(msgs.join("; ")));
    }
    TwoWayTransducer::from_def(&def).map_err(|e| ParseError::Invalid(e.to_string()))
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Renders a definition back to document text.
pub fn render_def(def: &TransducerDef) -> String {
    let mut s = String::new();
    let states = |r: Reading| join(def.states.iter().filter(|q| q.reading == r).map(|q| &q.name));
    let _ = writeln!(s, "input: {}", join(&def.input_alphabet));
    let _ = writeln!(s, "output: {}", join(&def.output_alphabet));
    let _ = writeln!(s, "right: {}", states(Reading::Right));
    let _ = writeln!(s, "left: {}", states(Reading::Left));
    let _ = writeln!(s, "initial: {}", join(&def.initial));
    let _ = writeln!(s, "final: {}", join(&def.final_states));
    for t in &def.transitions {
        let _ = writeln!(s, "{}, {} -> {}, {}", t.source, t.read, t.output, t.target);
    }
    s
}

pub fn render_transducer(t: &TwoWayTransducer) -> String {
    render_def(&t.to_def())
}
