//! Hand-built machines used by the tests, the acceptance suite and the CLI
//! examples. Sources live in `corpus/*.tw`.

use crate::machine::TwoWayTransducer;
use crate::text::parse_transducer;

pub struct Entry {
    pub name: &'static str,
    pub source: &'static str,
    /// Every successful run visits each cut at most this many times;
    /// `None` when visits are unbounded.
    pub visits: Option<usize>,
    /// Expected answer of the one-way resynchronizability decision.
    pub resynchronizable: Option<bool>,
}

impl Entry {
    pub fn transducer(&self) -> TwoWayTransducer {
        parse_transducer(self.source).unwrap_or_else(|e| panic!("corpus/{}.tw: {e}", self.name))
    }
}

macro_rules! entry {
    ($name:literal, $visits:expr, $resync:expr) => {
        Entry {
            name: $name,
            source: include_str!(concat!("../corpus/", $name, ".tw")),
            visits: $visits,
            resynchronizable: $resync,
        }
    };
}

pub const ENTRIES: &[Entry] = &[
    entry!("copier", Some(1), Some(true)),
    entry!("erase_a", Some(1), Some(true)),
    entry!("last_to_front", Some(3), Some(true)),
    entry!("first_to_back", Some(3), Some(true)),
    entry!("three_pass_copier", Some(3), Some(true)),
    entry!("echo_previous", Some(3), Some(true)),
    entry!("swap_pairs", Some(3), Some(true)),
    entry!("swap_halves", Some(3), Some(false)),
    entry!("reverse", Some(3), Some(false)),
    entry!("duplicate", Some(3), Some(false)),
    entry!("copy_or_reverse", Some(3), Some(false)),
    entry!("multipass", None, None),
    entry!("uturn_loop", None, None),
];

pub fn get(name: &str) -> Option<&'static Entry> {
    ENTRIES.iter().find(|e| e.name == name)
}

/// Machines whose runs have a known visit bound.
pub fn bounded() -> impl Iterator<Item = &'static Entry> {
    ENTRIES.iter().filter(|e| e.visits.is_some())
}

fn load(name: &str) -> TwoWayTransducer {
    get(name).expect("corpus entry").transducer()
}

pub fn copier() -> TwoWayTransducer {
    load("copier")
}

pub fn reverse() -> TwoWayTransducer {
    load("reverse")
}

/// `wa ↦ aw`.
pub fn last_to_front() -> TwoWayTransducer {
    load("last_to_front")
}

/// `u#v ↦ vu`.
pub fn swap_halves() -> TwoWayTransducer {
    load("swap_halves")
}

pub fn multipass() -> TwoWayTransducer {
    load("multipass")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_parses() {
        for e in ENTRIES {
            let t = e.transducer();
            assert!(t.num_states() > 0, "{}", e.name);
        }
        assert!(bounded().count() >= 10);
    }
}
