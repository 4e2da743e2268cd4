//! Two-way word transducers under origin semantics.
//!
//! A run of a two-way transducer does not only produce an output word: every
//! output letter comes from a position of the input, its *origin*. This
//! crate enumerates runs and their origin graphs, summarizes runs by flows,
//! and decides whether a bounded-visit transducer can be resynchronized
//! into an order-preserving (one-way) one.
//!
//! ```
//! use twoway::{corpus, origin_graph, enumerate_runs, RunBudget};
//!
//! let t = corpus::reverse();
//! let input: Vec<char> = "ab".chars().collect();
//! let runs = enumerate_runs(&t, &input, RunBudget::visits(3)).unwrap();
//! let pair = origin_graph(&t, &runs.runs[0]).unwrap();
//! assert_eq!(pair.output, "ba");
//! assert_eq!(pair.origin, vec![2, 1]);
//! ```

pub mod analysis;
pub mod corpus;
pub mod dot;
pub mod error;
pub mod factorization;
pub mod flow;
pub mod machine;
pub mod monoid;
pub mod run;
pub mod runner;
pub mod sparsity;
pub mod text;

pub use error::{Error, Result};
pub use flow::{compose, edge_run_order, flow_of, is_idempotent, Flow, FlowGraph};
pub use machine::{validate_transducer, Reading, Symbol, TransducerDef, TwoWayTransducer};
pub use run::{origin_graph, Configuration, Interval, Run, SynchronizedPair};
pub use runner::{check_all_runs_k_visit, enumerate_runs, is_k_visit, pump_run, RunBudget, RunSet};
pub use text::{parse_transducer, render_transducer};
pub use analysis::{cross_width, decide_resynchronizable, find_inversion, has_inversion_symbolic, is_order_preserving, max_traversal, traversals};
pub use factorization::{build_factorization_tree, build_retargeting, check_lemmas, verify_retargeting, Constants, FactorizationTree};
pub use monoid::{generate_monoid, FlowMonoid};
pub use sparsity::{k_sparse_bounded_check, normalize_run, tagged_equivalence, SparsityVerdict};
