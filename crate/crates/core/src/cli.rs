//! Command-line driver: configuration, the four commands, and text / JSON /
//! DOT rendering of their results.
//!
//! Exit codes: 0 success, 2 bad input, 3 unfolding budget or global limit
//! exceeded (an annotation-safety violation).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::bta::{
    annotate, annotate_min_memo, letters, parse_entry, parse_marks, parse_pred_id,
    propagate_division, unsafe_classes, Annotation, Division,
};
use crate::closure::{close, idempotents, loop_classes, GraphSet, LoopClass};
use crate::lincons::{parse_relations, LinError, RelationTable};
use crate::norm::NormSpec;
use crate::pe::{run_query, specialize, PeError, QueryResult, SpecializeOptions, Specialized, DEFAULT_BUDGET};
use crate::scg::{build_graphs, build_graphs_rp, Label, ScgError, SizeChangeGraph};
use crate::syntax::{parse_goal, parse_program, parse_term, PredId, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CommandKind {
    /// Annotate predicates unfold/memo and report the final division.
    Analyze,
    /// Emit size-change graphs.
    Graphs,
    /// Analyze, then specialize the program for `--goal`.
    Specialize,
    /// Run `--goal` against the program with a depth bound.
    Run,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphSelection {
    Base,
    Closure,
    Idempotent,
}

impl GraphSelection {
    fn as_str(self) -> &'static str {
        match self {
            GraphSelection::Base => "base",
            GraphSelection::Closure => "closure",
            GraphSelection::Idempotent => "idempotent",
        }
    }
}

#[derive(Clone, Debug, Parser)]
#[command(name = "sct-pe", version, about = "Size-change binding-time analysis and offline partial evaluation")]
#[command(group(ArgGroup::new("div").args(["division", "entry"])))]
#[command(group(ArgGroup::new("which").args(["base", "closure", "idempotent"])))]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: CommandKind,
    /// Program file.
    #[arg(long)]
    pub program: PathBuf,
    /// Division file (`pred/arity: s,d,...` per line).
    #[arg(long)]
    pub division: Option<PathBuf>,
    /// Entry division, propagated to the rest of the program.
    #[arg(long, value_name = "PRED/ARITY: s|d,...")]
    pub entry: Option<String>,
    /// `term_size`, `list_length`, or a norm file.
    #[arg(long, default_value = "term_size")]
    pub norm: String,
    /// Memo one predicate per unsafe loop class only.
    #[arg(long)]
    pub min_memo: bool,
    /// Inter-argument size relations of completely unfoldable predicates.
    #[arg(long)]
    pub relations: Option<PathBuf>,
    /// Predicates declared completely unfoldable.
    #[arg(long, value_delimiter = ',', value_name = "PRED/ARITY,...")]
    pub unfoldable: Vec<String>,
    /// Leave declared-unfoldable predicates out of loop detection.
    #[arg(long)]
    pub trust_unfoldable: bool,
    /// Generalize with mgg at the global level even for bounded norms.
    #[arg(long)]
    pub force_mgg: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Unfolding steps allowed per local tree.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    /// Entry atom (specialize) or conjunction (run).
    #[arg(long)]
    pub goal: Option<String>,
    /// Hand-written marks (`pred/arity: unfold|memo` per line) replacing the
    /// analysis result.
    #[arg(long)]
    pub marks: Option<PathBuf>,
    /// Resolution depth bound for `run`.
    #[arg(long, default_value_t = 10_000)]
    pub depth: usize,
    /// graphs: one graph per clause body atom.
    #[arg(long)]
    pub base: bool,
    /// graphs: the closure under concatenation.
    #[arg(long)]
    pub closure: bool,
    /// graphs: idempotent graphs of the closure (the default).
    #[arg(long)]
    pub idempotent: bool,
}

impl RunConfig {
    /// A configuration with every option at its default.
    pub fn new(command: CommandKind, program: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            program: program.into(),
            division: None,
            entry: None,
            norm: "term_size".into(),
            min_memo: false,
            relations: None,
            unfoldable: Vec::new(),
            trust_unfoldable: false,
            force_mgg: false,
            format: Format::Text,
            out: None,
            budget: DEFAULT_BUDGET,
            goal: None,
            marks: None,
            depth: 10_000,
            base: false,
            closure: false,
            idempotent: false,
        }
    }

    pub fn selection(&self) -> GraphSelection {
        if self.base {
            GraphSelection::Base
        } else if self.closure {
            GraphSelection::Closure
        } else {
            GraphSelection::Idempotent
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

fn input(msg: impl ToString) -> CliError {
    CliError::Input(msg.to_string())
}

impl From<PeError> for CliError {
    fn from(e: PeError) -> Self {
        match e {
            PeError::BudgetExhausted { .. } | PeError::GlobalLimit(_) => CliError::Budget(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ScgError> for CliError {
    fn from(e: ScgError) -> Self {
        match e {
            ScgError::Relation(LinError::TooComplex(_)) => CliError::Budget(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, CliError> {
    parse_program(&read(path)?).map_err(|e| input(format!("{}:{e}", path.display())))
}

pub fn resolve_norm(sel: &str) -> Result<NormSpec, CliError> {
    match sel {
        "term_size" => Ok(NormSpec::term_size()),
        "list_length" => Ok(NormSpec::list_length()),
        path => {
            let p = Path::new(path);
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or(path);
            NormSpec::parse(name, &read(p)?).map_err(|e| input(format!("{path}: {e}")))
        }
    }
}

fn resolve_division(cfg: &RunConfig, p: &Program) -> Result<Division, CliError> {
    if let Some(path) = &cfg.division {
        let d = Division::parse(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
        let missing: Vec<String> = p
            .predicates()
            .iter()
            .filter(|q| !d.contains(q))
            .map(|q| q.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(input(format!(
                "{}: no division for {}",
                path.display(),
                missing.join(", ")
            )));
        }
        Ok(d)
    } else if let Some(lit) = &cfg.entry {
        let (entry, bts) = parse_entry(lit).map_err(|e| input(format!("--entry: {e}")))?;
        propagate_division(p, &entry, &bts).map_err(|e| input(format!("--entry: {e}")))
    } else {
        Err(input("a division is required: pass --division or --entry"))
    }
}

fn unfoldable_set(cfg: &RunConfig) -> Result<BTreeSet<PredId>, CliError> {
    cfg.unfoldable
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_pred_id(s).ok_or_else(|| input(format!("--unfoldable: bad predicate `{s}`"))))
        .collect()
}

/// The improvements to apply on top of the baseline analysis.
#[derive(Clone, Debug, Default)]
pub struct AnalysisOptions {
    pub min_memo: bool,
    /// Success relations; `Some` (even empty) enables right-propagation.
    pub relations: Option<RelationTable>,
    pub unfoldable: BTreeSet<PredId>,
    pub trust_unfoldable: bool,
}

/// Everything computed before annotation.
pub struct Graphs {
    pub program: Program,
    pub norm: NormSpec,
    pub base: Vec<SizeChangeGraph>,
    pub closure: GraphSet,
    pub idempotent: Vec<SizeChangeGraph>,
    pub classes: Vec<LoopClass>,
    pub warnings: Vec<String>,
}

pub fn graphs_for(program: Program, norm: NormSpec, opts: &AnalysisOptions) -> Result<Graphs, CliError> {
    let mut warnings = Vec::new();
    let base = if opts.relations.is_some() || !opts.unfoldable.is_empty() {
        let empty = RelationTable::new();
        let rels = opts.relations.as_ref().unwrap_or(&empty);
        let rp = build_graphs_rp(&program, &norm, &opts.unfoldable, rels)?;
        warnings.extend(rp.warnings);
        rp.graphs
    } else {
        build_graphs(&program, &norm)
    };
    let looping: Vec<SizeChangeGraph> = if opts.trust_unfoldable {
        base.iter()
            .filter(|g| !opts.unfoldable.contains(g.source()) && !opts.unfoldable.contains(g.target()))
            .cloned()
            .collect()
    } else {
        base.clone()
    };
    let closure = close(looping);
    let idempotent = idempotents(&closure).expect("closed");
    let classes = loop_classes(&idempotent);
    Ok(Graphs {
        program,
        norm,
        base,
        closure,
        idempotent,
        classes,
        warnings,
    })
}

/// Baseline or memo-minimizing annotation of `g.program` under `d`.
pub fn annotate_graphs(g: &Graphs, d: &Division, opts: &AnalysisOptions) -> Result<Annotation, CliError> {
    let a = if opts.min_memo {
        annotate_min_memo(&g.program, &g.classes, d, &g.norm)
    } else {
        annotate(&g.program, &g.idempotent, d, &g.norm)
    };
    a.map_err(input)
}

fn options(cfg: &RunConfig) -> Result<AnalysisOptions, CliError> {
    let relations = match &cfg.relations {
        Some(path) => Some(
            parse_relations(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    Ok(AnalysisOptions {
        min_memo: cfg.min_memo,
        relations,
        unfoldable: unfoldable_set(cfg)?,
        trust_unfoldable: cfg.trust_unfoldable,
    })
}

pub fn compute_graphs(cfg: &RunConfig) -> Result<Graphs, CliError> {
    let program = load_program(&cfg.program)?;
    let norm = resolve_norm(&cfg.norm)?;
    graphs_for(program, norm, &options(cfg)?)
}

pub struct Analysis {
    pub graphs: Graphs,
    pub annotation: Annotation,
}

pub fn analyze(cfg: &RunConfig) -> Result<Analysis, CliError> {
    let opts = options(cfg)?;
    let program = load_program(&cfg.program)?;
    let norm = resolve_norm(&cfg.norm)?;
    let graphs = graphs_for(program, norm, &opts)?;
    let d = resolve_division(cfg, &graphs.program)?;
    let annotation = if let Some(path) = &cfg.marks {
        let marks = parse_marks(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
        Annotation::from_marks(&graphs.program, marks, d, &graphs.norm)
    } else {
        annotate_graphs(&graphs, &d, &opts)?
    };
    Ok(Analysis { graphs, annotation })
}

fn pred_names<'a>(ps: impl IntoIterator<Item = &'a PredId>) -> Vec<String> {
    ps.into_iter().map(|p| p.to_string()).collect()
}

#[derive(Serialize)]
struct JsonEdge {
    from: usize,
    to: usize,
    label: &'static str,
}

#[derive(Serialize)]
struct JsonGraph {
    idset: Vec<String>,
    source: String,
    target: String,
    edges: Vec<JsonEdge>,
}

impl From<&SizeChangeGraph> for JsonGraph {
    fn from(g: &SizeChangeGraph) -> Self {
        JsonGraph {
            idset: g.idset().iter().map(|i| i.to_string()).collect(),
            source: g.source().to_string(),
            target: g.target().to_string(),
            edges: g
                .edges()
                .map(|(from, to, l)| JsonEdge {
                    from,
                    to,
                    label: match l {
                        Label::Strict => "strict",
                        Label::NonStrict => "nonstrict",
                    },
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct JsonClass {
    idset: Vec<String>,
    predicates: Vec<String>,
    #[serde(rename = "unsafe")]
    is_unsafe: bool,
}

#[derive(Serialize)]
struct GraphCounts {
    base: usize,
    closure: usize,
    idempotent: usize,
}

#[derive(Serialize)]
struct Settings {
    min_memo: bool,
    relations: Option<String>,
    unfoldable: Vec<String>,
    trust_unfoldable: bool,
    force_mgg: bool,
    marks: Option<String>,
}

#[derive(Serialize)]
struct AnalyzeReport {
    command: &'static str,
    program: String,
    norm: String,
    settings: Settings,
    marks: BTreeMap<String, &'static str>,
    division: BTreeMap<String, Vec<String>>,
    requires_mgg: bool,
    loop_classes: Vec<JsonClass>,
    graph_counts: GraphCounts,
    rounds: usize,
    diagnostics: Vec<String>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct GraphsReport {
    command: &'static str,
    program: String,
    norm: String,
    selection: &'static str,
    graphs: Vec<JsonGraph>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct JsonEntry {
    name: String,
    atom: String,
}

#[derive(Serialize)]
struct SpecializeReport {
    command: &'static str,
    program: String,
    goal: String,
    entry: String,
    use_mgg: bool,
    global: Vec<JsonEntry>,
    clauses: Vec<String>,
    marks: BTreeMap<String, &'static str>,
}

#[derive(Serialize)]
struct RunReport {
    command: &'static str,
    program: String,
    goal: String,
    depth: usize,
    answers: Vec<BTreeMap<String, String>>,
    cutoff: bool,
}

fn to_json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn settings(cfg: &RunConfig) -> Settings {
    Settings {
        min_memo: cfg.min_memo,
        relations: cfg.relations.as_ref().map(|p| p.display().to_string()),
        unfoldable: cfg.unfoldable.clone(),
        trust_unfoldable: cfg.trust_unfoldable,
        force_mgg: cfg.force_mgg,
        marks: cfg.marks.as_ref().map(|p| p.display().to_string()),
    }
}

fn marks_map(a: &Annotation) -> BTreeMap<String, &'static str> {
    a.marks.iter().map(|(p, m)| (p.to_string(), m.as_str())).collect()
}

fn no_dot(what: &str) -> CliError {
    input(format!("dot output is only available for graphs, not {what}"))
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.format == Format::Dot {
        return Err(no_dot("analyze"));
    }
    let Analysis { graphs: g, annotation: a } = analyze(cfg)?;
    let bad: Vec<&BTreeSet<_>> = unsafe_classes(&g.classes, &a.division)
        .into_iter()
        .map(|c| &c.idset)
        .collect();
    let classes: Vec<JsonClass> = g
        .classes
        .iter()
        .map(|c| JsonClass {
            idset: c.idset.iter().map(|i| i.to_string()).collect(),
            predicates: pred_names(&c.predicates),
            is_unsafe: bad.contains(&&c.idset),
        })
        .collect();
    if cfg.format == Format::Json {
        let report = AnalyzeReport {
            command: "analyze",
            program: cfg.program.display().to_string(),
            norm: g.norm.name().to_string(),
            settings: settings(cfg),
            marks: marks_map(&a),
            division: a
                .division
                .iter()
                .map(|(p, v)| (p.to_string(), v.iter().map(|b| b.letter().to_string()).collect()))
                .collect(),
            requires_mgg: a.requires_mgg,
            loop_classes: classes,
            graph_counts: GraphCounts {
                base: g.base.len(),
                closure: g.closure.len(),
                idempotent: g.idempotent.len(),
            },
            rounds: a.rounds,
            diagnostics: a.diagnostics.clone(),
            warnings: g.warnings.clone(),
        };
        return Ok(to_json(&report));
    }
    let mut s = String::new();
    let _ = writeln!(s, "norm: {}", g.norm.name());
    let _ = writeln!(s, "requires mgg: {}", if a.requires_mgg { "yes" } else { "no" });
    let _ = writeln!(s, "marks:");
    for (p, m) in &a.marks {
        let _ = writeln!(s, "  {p}: {m}");
    }
    let _ = writeln!(s, "division:");
    for (p, v) in a.division.iter() {
        let _ = writeln!(s, "  {p}: {}", letters(v));
    }
    let _ = writeln!(s, "loop classes:");
    for c in &classes {
        let _ = writeln!(
            s,
            "  {{{}}}: {}{}",
            c.idset.join(","),
            c.predicates.join(", "),
            if c.is_unsafe { " (unsafe)" } else { "" }
        );
    }
    let _ = writeln!(
        s,
        "graphs: {} base, {} in closure, {} idempotent",
        g.base.len(),
        g.closure.len(),
        g.idempotent.len()
    );
    for line in a.diagnostics.iter().chain(&g.warnings) {
        let _ = writeln!(s, "% {line}");
    }
    Ok(s)
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders graphs as one DOT cluster each: argument positions are nodes,
/// strict edges solid, non-strict dashed, and the caption is the idset.
pub fn render_dot(graphs: &[SizeChangeGraph]) -> String {
    let mut s = String::from("digraph scg {\n  rankdir=LR;\n  node [shape=circle];\n");
    if graphs.is_empty() {
        s.push_str("  label=\"no graphs\";\n");
    }
    for (n, g) in graphs.iter().enumerate() {
        let _ = writeln!(s, "  subgraph cluster_{n} {{");
        let caption = format!("{}: {} -> {}", g.idset_string(), g.source(), g.target());
        let _ = writeln!(s, "    label={};", dot_quote(&caption));
        for i in 1..=g.source().arity {
            let _ = writeln!(s, "    g{n}_s{i} [label={}];", dot_quote(&format!("{}{i}", g.source().name)));
        }
        for j in 1..=g.target().arity {
            let _ = writeln!(s, "    g{n}_t{j} [label={}];", dot_quote(&format!("{}{j}", g.target().name)));
        }
        for (i, j, l) in g.edges() {
            let style = match l {
                Label::Strict => "solid",
                Label::NonStrict => "dashed",
            };
            let _ = writeln!(s, "    g{n}_s{i} -> g{n}_t{j} [style={style}, label={}];", dot_quote(l.symbol()));
        }
        s.push_str("  }\n");
    }
    s.push_str("}\n");
    s
}

pub fn cmd_graphs(cfg: &RunConfig) -> Result<String, CliError> {
    let g = compute_graphs(cfg)?;
    let sel = cfg.selection();
    let chosen: &[SizeChangeGraph] = match sel {
        GraphSelection::Base => &g.base,
        GraphSelection::Closure => g.closure.graphs(),
        GraphSelection::Idempotent => &g.idempotent,
    };
    Ok(match cfg.format {
        Format::Dot => render_dot(chosen),
        Format::Json => to_json(&GraphsReport {
            command: "graphs",
            program: cfg.program.display().to_string(),
            norm: g.norm.name().to_string(),
            selection: sel.as_str(),
            graphs: chosen.iter().map(JsonGraph::from).collect(),
            note: chosen.is_empty().then_some("no graphs"),
            warnings: g.warnings,
        }),
        Format::Text => {
            if chosen.is_empty() {
                "% no graphs\n".to_string()
            } else {
                chosen.iter().map(|g| format!("{g}\n")).collect()
            }
        }
    })
}

fn goal_of(cfg: &RunConfig) -> Result<&str, CliError> {
    cfg.goal
        .as_deref()
        .ok_or_else(|| input("this command needs --goal"))
}

pub fn cmd_specialize(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.format == Format::Dot {
        return Err(no_dot("specialize"));
    }
    let goal = goal_of(cfg)?;
    let entry = parse_term(goal).map_err(|e| input(format!("--goal: {e}")))?;
    let Analysis { graphs: g, annotation: a } = analyze(cfg)?;
    let opts = SpecializeOptions {
        budget: cfg.budget,
        force_mgg: cfg.force_mgg,
        ..Default::default()
    };
    let s: Specialized = specialize(&g.program, &a, &g.norm, &entry, &opts)?;
    if cfg.format == Format::Json {
        return Ok(to_json(&SpecializeReport {
            command: "specialize",
            program: cfg.program.display().to_string(),
            goal: goal.to_string(),
            entry: s.entry.to_string(),
            use_mgg: s.use_mgg,
            global: s
                .global
                .iter()
                .map(|(atom, name)| JsonEntry {
                    name: name.to_string(),
                    atom: atom.to_string(),
                })
                .collect(),
            clauses: s.program.clauses().iter().map(|c| c.to_string()).collect(),
            marks: marks_map(&a),
        }));
    }
    Ok(s.to_string())
}

pub fn cmd_run(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.format == Format::Dot {
        return Err(no_dot("run"));
    }
    let goal_text = goal_of(cfg)?;
    let program = load_program(&cfg.program)?;
    let goal = parse_goal(goal_text).map_err(|e| input(format!("--goal: {e}")))?;
    let QueryResult { answers, cutoff } = run_query(&program, &goal, cfg.depth);
    let answers: Vec<BTreeMap<String, String>> = answers
        .iter()
        .map(|s| s.iter().map(|(v, t)| (v.clone(), t.to_string())).collect())
        .collect();
    if cfg.format == Format::Json {
        return Ok(to_json(&RunReport {
            command: "run",
            program: cfg.program.display().to_string(),
            goal: goal_text.to_string(),
            depth: cfg.depth,
            answers,
            cutoff,
        }));
    }
    let mut s = String::new();
    for a in &answers {
        if a.is_empty() {
            s.push_str("true\n");
        } else {
            let parts: Vec<String> = a.iter().map(|(v, t)| format!("{v} = {t}")).collect();
            let _ = writeln!(s, "{}", parts.join(", "));
        }
    }
    if answers.is_empty() {
        s.push_str("no\n");
    }
    if cutoff {
        let _ = writeln!(s, "% depth bound {} reached; answers may be incomplete", cfg.depth);
    }
    Ok(s)
}

pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    match cfg.command {
        CommandKind::Analyze => cmd_analyze(cfg),
        CommandKind::Graphs => cmd_graphs(cfg),
        CommandKind::Specialize => cmd_specialize(cfg),
        CommandKind::Run => cmd_run(cfg),
    }
}

/// Runs `cfg`, writing the result to `--out` or standard output and
/// errors to standard error. Returns the exit code.
pub fn main_with(cfg: &RunConfig) -> i32 {
    let result = execute(cfg).and_then(|text| match &cfg.out {
        Some(path) => fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
