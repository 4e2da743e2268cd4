//! `twoway`: command-line front end.
//!
//! Exit codes: 0 for YES / clean, 1 for NO / violations, 2 for usage and
//! input errors, 3 when a bound or cap is exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use twoway::analysis::{loops, Quintuple};
use twoway::dot::{flow_to_dot, juxtaposition_to_dot, transducer_to_dot, tree_to_dot};
use twoway::factorization::{letter_sequence, verify_tree, Retargeting, Violation};
use twoway::flow::{describe, FlowTable, PaddedRun};
use twoway::monoid::DEFAULT_MONOID_CAP;
use twoway::runner::pump_order_violations;
use twoway::*;

#[derive(Parser)]
#[command(name = "twoway", version, about = "Analyze two-way word transducers under origin semantics")]
struct Cli {
    /// Machine-readable JSON output
    #[arg(long, global = true)]
    json: bool,
    /// Write a Graphviz rendering to this file
    #[arg(long, global = true, value_name = "PATH")]
    dot: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Limits {
    /// Visit bound: maximal number of configurations per cut
    #[arg(short = 'k', default_value_t = 3)]
    k: usize,
    /// Maximal number of runs enumerated per input
    #[arg(long, default_value_t = RunBudget::default().run_cap)]
    max_runs: usize,
    /// Maximal number of steps of one run
    #[arg(long, default_value_t = RunBudget::default().step_bound)]
    max_steps: usize,
}

impl Limits {
    fn budget(&self) -> RunBudget {
        RunBudget { visit_bound: self.k, step_bound: self.max_steps, run_cap: self.max_runs }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the successful runs on a word and print their origin graphs
    Run {
        file: PathBuf,
        word: String,
        #[command(flatten)]
        limits: Limits,
    },
    /// Print the flow of each run on the padded interval [lo, hi)
    Flows {
        file: PathBuf,
        word: String,
        lo: usize,
        hi: usize,
        #[command(flatten)]
        limits: Limits,
        /// Run whose flow goes to the DOT file
        #[arg(long, default_value_t = 0)]
        run: usize,
    },
    /// Generate the flow monoid and compare its size with the bound
    Monoid {
        file: PathBuf,
        #[arg(short = 'k')]
        k: usize,
        /// Maximal number of monoid elements
        #[arg(long, default_value_t = DEFAULT_MONOID_CAP)]
        cap: usize,
    },
    /// Decide whether the machine has an order-preserving resynchronization
    DecideOneway {
        file: PathBuf,
        #[arg(short = 'k')]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_MONOID_CAP)]
        cap: usize,
    },
    /// Cross-width of a pair (or an array of pairs) in JSON
    Crosswidth { pairs: PathBuf },
    /// How many origins are moved across each input position
    Traversal { source: PathBuf, target: PathBuf },
    /// Pump the interval [lo, hi) of each run n times
    Pump {
        file: PathBuf,
        word: String,
        lo: usize,
        hi: usize,
        #[arg(short = 'n')]
        n: usize,
        #[command(flatten)]
        limits: Limits,
    },
    /// Factorization tree, order-preserving retargeting and its verification
    Factorize {
        file: PathBuf,
        word: String,
        #[arg(short = 'k')]
        k: usize,
        #[arg(long, default_value_t = 1)]
        threshold: usize,
        #[arg(long, default_value_t = DEFAULT_MONOID_CAP)]
        cap: usize,
        /// Run whose tree goes to the DOT file
        #[arg(long, default_value_t = 0)]
        run: usize,
    },
    /// Check K-sparsity on all inputs up to a length
    Sparsity {
        file: PathBuf,
        #[arg(short = 'k')]
        k: usize,
        #[arg(long)]
        max_len: usize,
    },
}

/// What a subcommand reports: text, JSON, and whether the verdict is clean.
struct Report {
    text: String,
    json: Value,
    clean: bool,
}

impl Report {
    fn clean(text: String, json: Value) -> Report {
        Report { text, json, clean: true }
    }
}

/// Errors that map to exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn load(path: &Path) -> anyhow::Result<TwoWayTransducer> {
    let src = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_transducer(&src).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_pairs(path: &Path) -> anyhow::Result<Vec<SynchronizedPair>> {
    let src = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&src).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let pairs: Vec<SynchronizedPair> = match v {
        Value::Array(_) => serde_json::from_value(v),
        _ => serde_json::from_value(v).map(|p| vec![p]),
    }
    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    for p in &pairs {
        p.check().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    Ok(pairs)
}

fn one_pair(path: &Path) -> anyhow::Result<SynchronizedPair> {
    let mut pairs = load_pairs(path)?;
    if pairs.len() != 1 {
        return Err(usage(format!("{}: expected a single pair", path.display())));
    }
    Ok(pairs.remove(0))
}

fn word(t: &TwoWayTransducer, w: &str) -> anyhow::Result<Vec<char>> {
    let w: Vec<char> = w.chars().collect();
    t.check_input(&w).map_err(|e| usage(e.to_string()))?;
    Ok(w)
}

fn runs(t: &TwoWayTransducer, w: &[char], budget: RunBudget) -> anyhow::Result<Vec<Run>> {
    let set = enumerate_runs(t, w, budget)?;
    if set.truncated {
        return Err(Error::BoundExceeded { what: "runs or steps (raise --max-runs / --max-steps)", cap: budget.run_cap }.into());
    }
    if w.is_empty() && set.runs.iter().any(|r| !r.output().is_empty()) {
        eprintln!("warning: output on the empty input has no real origin; origins are reported as 1");
    }
    Ok(set.runs)
}

fn interval(lo: usize, hi: usize, n: usize) -> anyhow::Result<Interval> {
    if lo > hi || hi > n + 2 {
        return Err(usage(format!("interval [{lo}, {hi}) is not within the padded input [0, {})", n + 2)));
    }
    Ok(Interval::new(lo, hi))
}

fn write_dot(path: &Option<PathBuf>, dot: impl FnOnce() -> Option<String>) -> anyhow::Result<()> {
    if let Some(path) = path {
        let dot = dot().ok_or_else(|| anyhow!("nothing to draw"))?;
        fs::write(path, dot).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run_json(t: &TwoWayTransducer, r: &Run) -> Value {
    let configs: Vec<Value> = r.configs().iter().map(|c| json!({ "state": t.state_name(c.state), "cut": c.cut })).collect();
    json!({
        "input": r.input_string(),
        "output": r.output(),
        "configurations": configs,
        "max_visits": r.max_visits(),
        "origin": origin_graph(t, r).ok().map(|p| p.origin),
    })
}

fn run_text(t: &TwoWayTransducer, r: &Run) -> String {
    r.configs().iter().map(|c| format!("({}, {})", t.state_name(c.state), c.cut)).collect::<Vec<_>>().join(" ")
}

fn cmd_run(t: &TwoWayTransducer, w: &str, limits: &Limits) -> anyhow::Result<Report> {
    let w = word(t, w)?;
    let rs = runs(t, &w, limits.budget())?;
    let mut text = format!("{} successful run(s)\n", rs.len());
    for (i, r) in rs.iter().enumerate() {
        text += &format!("run {i}: {}\n  {}\n", origin_graph(t, r)?, run_text(t, r));
    }
    let json = json!({ "runs": rs.iter().map(|r| run_json(t, r)).collect::<Vec<_>>() });
    Ok(Report::clean(text, json))
}

fn cmd_flows(t: &TwoWayTransducer, w: &str, lo: usize, hi: usize, limits: &Limits, pick: usize, dot: &Option<PathBuf>) -> anyhow::Result<Report> {
    let w = word(t, w)?;
    let i = interval(lo, hi, w.len())?;
    let rs = runs(t, &w, limits.budget())?;
    let mut text = String::new();
    let mut out = Vec::new();
    let mut flows = Vec::new();
    for (k, r) in rs.iter().enumerate() {
        let f = flow_of(t, r, i)?.flow();
        let idem = is_idempotent(&f);
        text += &format!("run {k}: {}{}\n", describe(t, &f), if idem { " (idempotent)" } else { "" });
        out.push(json!({ "run": k, "flow": f, "description": describe(t, &f), "idempotent": idem }));
        flows.push(f);
    }
    if dot.is_some() && pick >= flows.len() {
        return Err(usage(format!("--run {pick}: only {} run(s)", flows.len())));
    }
    write_dot(dot, || flows.get(pick).map(|f| flow_to_dot(t, f)))?;
    Ok(Report::clean(text, json!({ "interval": i, "flows": out })))
}

fn cmd_monoid(t: &TwoWayTransducer, k: usize, cap: usize) -> anyhow::Result<Report> {
    let m = generate_monoid(t, k, cap)?;
    let bound = Constants::new(t.num_states(), k).m;
    let idempotents = m.elements().iter().filter(|f| is_idempotent(f)).count();
    let accepting = m.elements().iter().filter(|f| f.is_accepting()).count();
    let text = format!(
        "monoid size {} (bound M = {bound})\ngenerators {}, idempotents {idempotents}, accepting {accepting}\n",
        m.len(),
        m.generators.len()
    );
    let json = json!({
        "size": m.len(),
        "bound": bound.to_string(),
        "generators": m.generators.len(),
        "idempotents": idempotents,
        "accepting": accepting,
    });
    Ok(Report::clean(text, json))
}

fn quintuple_json(m: &FlowMonoid, q: &Quintuple) -> Value {
    let letters = |w: &[usize]| w.iter().map(|&g| m.generators[g].letter.to_string()).collect::<Vec<_>>();
    json!({
        "parts": q.parts.iter().map(|p| letters(p)).collect::<Vec<_>>(),
        "edge": q.edge,
        "edge2": q.edge2,
    })
}

fn cmd_decide(t: &TwoWayTransducer, k: usize, cap: usize, dot: &Option<PathBuf>) -> anyhow::Result<Report> {
    let (d, m) = decide_resynchronizable(t, k, cap).map_err(|e| match e {
        Error::NotKVisit { .. } => usage(format!("{e}; try a larger -k")),
        e => e.into(),
    })?;
    let Some(w) = d.witness else {
        // nothing to witness: draw the machine itself
        write_dot(dot, || Some(transducer_to_dot(t)))?;
        let json = json!({ "verdict": "YES", "monoid_size": d.monoid_size });
        return Ok(Report::clean(format!("YES\nmonoid size {}\n", d.monoid_size), json));
    };
    let pair = origin_graph(t, &w.run)?;
    let cross = cross_width(&pair);
    let q = quintuple_json(&m, &w.quintuple);
    let inv = &w.inversion;
    let text = format!(
        "NO\nmonoid size {}\nwitness: F1 E F2 E' F3 = {}\nrun on {:?}: {pair}\ninversion: loops {} and {}; the edge in {} is traversed first\ncross-width {}\n",
        d.monoid_size,
        q["parts"].as_array().unwrap().iter().map(|p| format!("[{}]", p.as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect::<String>())).collect::<Vec<_>>().join(" "),
        w.run.input_string(),
        inv.first,
        inv.second,
        inv.second,
        cross.width,
    );
    let flows = w.quintuple.flows(&m);
    write_dot(dot, || Some(juxtaposition_to_dot(t, &flows.iter().collect::<Vec<_>>())))?;
    let json = json!({
        "verdict": "NO",
        "monoid_size": d.monoid_size,
        "quintuple": q,
        "run": run_json(t, &w.run),
        "inversion": inv,
        "cross": cross,
    });
    Ok(Report { text, json, clean: false })
}

fn cmd_crosswidth(path: &Path) -> anyhow::Result<Report> {
    let pairs = load_pairs(path)?;
    let crosses: Vec<_> = pairs.iter().map(cross_width).collect();
    let text = crosses.iter().map(|c| format!("{}\n", c.width)).collect();
    let json = json!(pairs.iter().zip(&crosses).map(|(p, c)| json!({ "pair": p, "cross": c })).collect::<Vec<_>>());
    Ok(Report::clean(text, json))
}

fn cmd_traversal(src: &Path, tgt: &Path) -> anyhow::Result<Report> {
    let (s, d) = (one_pair(src)?, one_pair(tgt)?);
    let tr = traversals(&s, &d).map_err(|e| usage(e.to_string()))?;
    let max = tr.iter().map(|t| t.count()).max().unwrap_or(0);
    let mut text = format!("max traversal {max}\n");
    for t in &tr {
        let list = |s: &std::collections::BTreeSet<usize>| s.iter().map(|y| y.to_string()).collect::<Vec<_>>().join(",");
        text += &format!("  position {}: {} (rightward {{{}}}, leftward {{{}}})\n", t.position, t.count(), list(&t.left_to_right), list(&t.right_to_left));
    }
    Ok(Report::clean(text, json!({ "max": max, "traversals": tr })))
}

fn cmd_pump(t: &TwoWayTransducer, w: &str, lo: usize, hi: usize, n: usize, limits: &Limits) -> anyhow::Result<Report> {
    let w = word(t, w)?;
    let i = interval(lo, hi, w.len())?;
    let rs = runs(t, &w, limits.budget())?;
    let mut text = String::new();
    let mut out = Vec::new();
    let mut clean = true;
    for (k, r) in rs.iter().enumerate() {
        let p = PaddedRun::new(t, r)?;
        let mut table = FlowTable::new(&p);
        if !loops(&p, &mut table).contains(&i) {
            clean = false;
            text += &format!("run {k}: {i} is not a loop\n");
            out.push(json!({ "run": k, "loop": false }));
            continue;
        }
        let pumped = pump_run(t, r, i, n)?;
        let violations = pump_order_violations(t, r, i, n)?;
        clean &= violations.is_empty();
        text += &format!("run {k}: {}\n", origin_graph(t, &pumped)?);
        for v in &violations {
            text += &format!("  violation: {v}\n");
        }
        out.push(json!({ "run": k, "loop": true, "pumped": run_json(t, &pumped), "violations": violations }));
    }
    Ok(Report { text, json: json!({ "interval": i, "times": n, "runs": out }), clean })
}

fn tree_text(tree: &FactorizationTree, m: &FlowMonoid, at: usize, depth: usize, out: &mut String) {
    let node = tree.node(at);
    let kind = match node.children.len() {
        0 => "leaf",
        2 if !tree.is_idempotent_node(at) => "binary",
        _ => "idempotent",
    };
    out.push_str(&format!("{}{} {kind} #{}{}\n", "  ".repeat(depth + 1), node.interval, node.label, if is_idempotent(m.element(node.label)) { " (idempotent)" } else { "" }));
    for &c in &node.children {
        tree_text(tree, m, c, depth + 1, out);
    }
}

fn retargeting_text(ret: &Retargeting, vs: &[Violation]) -> String {
    let mut s = String::from("  retargeting (output position: origin → target):");
    for (x, y, z) in ret.entries() {
        s += &format!(" {x}:{y}→{z}");
    }
    s += &format!("\n  target {}\n", ret.pair());
    if !ret.conflicts.is_empty() {
        s += &format!("  conflicts (level, position): {:?}\n", ret.conflicts);
    }
    if vs.is_empty() {
        s += "  verified: clean\n";
    }
    for v in vs {
        s += &format!("  violation at level {} ({:?}): {}\n", v.level, v.invariant, v.detail);
    }
    s
}

fn cmd_factorize(t: &TwoWayTransducer, w: &str, k: usize, threshold: usize, cap: usize, pick: usize, dot: &Option<PathBuf>) -> anyhow::Result<Report> {
    let w = word(t, w)?;
    let m = generate_monoid(t, k, cap)?;
    let rs = runs(t, &w, RunBudget::visits(k))?;
    let mut text = String::new();
    let mut out = Vec::new();
    let mut clean = true;
    let mut trees = Vec::new();
    for (i, r) in rs.iter().enumerate() {
        let seq = letter_sequence(t, r)?;
        let tree = build_factorization_tree(&seq, &m)?;
        let problems = verify_tree(&tree, &seq, &m);
        text += &format!("run {i}: {}\n  tree of height {}\n", origin_graph(t, r)?, tree.height());
        tree_text(&tree, &m, tree.root, 0, &mut text);
        for p in &problems {
            text += &format!("  invalid tree: {p}\n");
        }
        clean &= problems.is_empty();
        let mut j = json!({ "run": run_json(t, r), "tree": tree, "tree_problems": problems });
        match build_retargeting(t, r, &tree, threshold) {
            Ok(ret) => {
                let vs = verify_retargeting(t, r, &tree, &ret, threshold)?;
                clean &= vs.is_empty();
                text += &retargeting_text(&ret, &vs);
                j["retargeting"] = json!(ret);
                j["violations"] = json!(vs);
            }
            Err(Error::HasInversion) => {
                clean = false;
                text += "  the run has an inversion: no order-preserving retargeting\n";
                j["inversion"] = json!(find_inversion(t, r)?);
            }
            Err(e) => return Err(e.into()),
        }
        out.push(j);
        trees.push(tree);
    }
    if dot.is_some() && pick >= trees.len() {
        return Err(usage(format!("--run {pick}: only {} run(s)", trees.len())));
    }
    write_dot(dot, || trees.get(pick).map(|tr| tree_to_dot(tr, Some(&m))))?;
    Ok(Report { text, json: json!({ "threshold": threshold, "monoid_size": m.len(), "runs": out }), clean })
}

fn cmd_sparsity(t: &TwoWayTransducer, k: usize, max_len: usize) -> anyhow::Result<Report> {
    let v = k_sparse_bounded_check(t, k, max_len)?;
    let (text, clean) = match &v {
        SparsityVerdict::SparseUpToBound { max_len } => (format!("SPARSE ({k}-sparse on every input up to length {max_len})\n"), true),
        SparsityVerdict::NotSparse { input, class } => (
            format!(
                "NOT_SPARSE on {input:?}: a class of {} tagged transitions has productive members at positions {:?}\n",
                class.members.len(),
                class.productive_positions()
            ),
            false,
        ),
    };
    Ok(Report { text, json: json!(v), clean })
}

fn dispatch(cli: &Cli) -> anyhow::Result<Report> {
    let dot = &cli.dot;
    match &cli.command {
        Command::Run { file, word, limits } => cmd_run(&load(file)?, word, limits),
        Command::Flows { file, word, lo, hi, limits, run } => cmd_flows(&load(file)?, word, *lo, *hi, limits, *run, dot),
        Command::Monoid { file, k, cap } => cmd_monoid(&load(file)?, *k, *cap),
        Command::DecideOneway { file, k, cap } => cmd_decide(&load(file)?, *k, *cap, dot),
        Command::Crosswidth { pairs } => cmd_crosswidth(pairs),
        Command::Traversal { source, target } => cmd_traversal(source, target),
        Command::Pump { file, word, lo, hi, n, limits } => cmd_pump(&load(file)?, word, *lo, *hi, *n, limits),
        Command::Factorize { file, word, k, threshold, cap, run } => {
            cmd_factorize(&load(file)?, word, *k, *threshold, *cap, *run, dot)
        }
        Command::Sparsity { file, k, max_len } => cmd_sparsity(&load(file)?, *k, *max_len),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.is::<Usage>() {
        return 2;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::BoundExceeded { .. }) => 3,
        Some(Error::UnknownLetter(_) | Error::InvalidInterval { .. } | Error::NotALoop { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report.json).expect("reports serialize"));
            } else {
                print!("{}", report.text);
            }
            ExitCode::from(if report.clean { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
