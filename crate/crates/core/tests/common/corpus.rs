//! The hand corpus and the analysis configurations it is run under.

use std::path::{Path, PathBuf};

use sct_pe::bta::{parse_entry, propagate_division, Annotation, Division};
use sct_pe::cli::{annotate_graphs, graphs_for, AnalysisOptions};
use sct_pe::lincons::{parse_relations, RelationTable};
use sct_pe::norm::NormSpec;
use sct_pe::pe::{run_query_with, specialize, Specialized, SpecializeOptions};
use sct_pe::syntax::{parse_program, parse_term, PredId, Program, Term};

use super::gen::RandomCase;
use super::oracle::normalized_answers;

pub const DEPTH: usize = 10_000;
/// Total resolution steps per query before a run counts as non-terminating.
pub const MAX_STEPS: usize = 50_000;

/// Runs `f` on a thread with a large stack: runaway queries build terms
/// thousands of levels deep before the depth bound stops them.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(f)
        .unwrap()
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn read_corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap()
}

pub enum DivisionSource {
    Entry(&'static str),
    File(&'static str),
}

pub struct Case {
    pub file: &'static str,
    pub division: DivisionSource,
    pub relations: Option<&'static str>,
    pub unfoldable: &'static [&'static str],
    pub goal: &'static str,
    pub queries: &'static [&'static str],
}

pub const CASES: &[Case] = &[
    Case {
        file: "inclist.pl",
        division: DivisionSource::Entry("incList/3: d,s,d"),
        relations: None,
        unfoldable: &[],
        goal: "incList(L, s(0), R)",
        queries: &[
            "incList([0, s(0)], s(0), R)",
            "incList(L, s(0), [s(0)])",
            "incList([a], s(0), R)",
        ],
    },
    Case {
        file: "inclist.pl",
        division: DivisionSource::File("inclist.div"),
        relations: None,
        unfoldable: &[],
        goal: "incList(L, s(s(0)), R)",
        queries: &["incList([0, 0, s(0)], s(s(0)), R)"],
    },
    Case {
        file: "rp.pl",
        division: DivisionSource::File("rp.div"),
        relations: Some("rp.rel"),
        unfoldable: &["q/2"],
        goal: "p(s(s(0)))",
        queries: &[],
    },
    Case {
        file: "append.pl",
        division: DivisionSource::Entry("app/3: s,d,d"),
        relations: None,
        unfoldable: &[],
        goal: "app([a, b], L, R)",
        queries: &["app([a, b], [c], R)", "app([a, b], L, [a, b, c, d])"],
    },
    Case {
        file: "append.pl",
        division: DivisionSource::Entry("rev/2: s,d"),
        relations: None,
        unfoldable: &[],
        goal: "rev([a, b, c], R)",
        queries: &["rev([a, b, c], [c, b, a])"],
    },
    Case {
        file: "power.pl",
        division: DivisionSource::Entry("power/3: s,s,d"),
        relations: None,
        unfoldable: &[],
        goal: "power(s(s(0)), s(s(0)), R)",
        queries: &["power(s(s(0)), s(s(0)), s(s(s(s(0)))))"],
    },
    Case {
        file: "path.pl",
        division: DivisionSource::Entry("path/2: s,d"),
        relations: None,
        unfoldable: &[],
        goal: "path(a, Z)",
        queries: &["path(a, d)", "path(a, a)"],
    },
    Case {
        file: "ackermann.pl",
        division: DivisionSource::Entry("ack/3: s,s,d"),
        relations: None,
        unfoldable: &[],
        goal: "ack(s(0), s(0), R)",
        queries: &[],
    },
    Case {
        file: "length.pl",
        division: DivisionSource::Entry("len/2: s,d"),
        relations: None,
        unfoldable: &[],
        goal: "len([a, b], N)",
        queries: &["len([a, b], s(s(0)))"],
    },
    Case {
        file: "length.pl",
        division: DivisionSource::Entry("member/2: d,s"),
        relations: None,
        unfoldable: &[],
        goal: "member(X, [a, b, c])",
        queries: &["member(b, [a, b, c])"],
    },
    Case {
        file: "length.pl",
        division: DivisionSource::Entry("last/2: s,d"),
        relations: None,
        unfoldable: &[],
        goal: "last([a, b], X)",
        queries: &[],
    },
    Case {
        file: "facts.pl",
        division: DivisionSource::Entry("color/1: d"),
        relations: None,
        unfoldable: &[],
        goal: "color(C)",
        queries: &["color(red)"],
    },
    Case {
        file: "facts.pl",
        division: DivisionSource::Entry("likes/2: d,d"),
        relations: None,
        unfoldable: &[],
        goal: "likes(X, Y)",
        queries: &[],
    },
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Config {
    Baseline,
    MinMemo,
    RightPropagation,
    ListLengthMgg,
}

impl Config {
    pub const ALL: [Config; 4] = [
        Config::Baseline,
        Config::MinMemo,
        Config::RightPropagation,
        Config::ListLengthMgg,
    ];

    pub fn norm(self) -> NormSpec {
        match self {
            Config::ListLengthMgg => NormSpec::list_length(),
            _ => NormSpec::term_size(),
        }
    }

    pub fn options(self, relations: Option<RelationTable>, unfoldable: &[PredId]) -> AnalysisOptions {
        AnalysisOptions {
            min_memo: self == Config::MinMemo,
            relations: match self {
                Config::RightPropagation => Some(relations.unwrap_or_default()),
                _ => None,
            },
            unfoldable: if self == Config::RightPropagation {
                unfoldable.iter().cloned().collect()
            } else {
                Default::default()
            },
            trust_unfoldable: false,
        }
    }
}

/// A program ready for analysis: the program, its division, the entry atom
/// and the queries to compare.
pub struct Prepared {
    pub name: String,
    pub program: Program,
    pub division: Division,
    pub relations: Option<RelationTable>,
    pub unfoldable: Vec<PredId>,
    pub goal: Term,
    pub queries: Vec<Term>,
}

pub fn prepare(c: &Case) -> Prepared {
    let program = parse_program(&read_corpus(c.file)).unwrap();
    let division = match c.division {
        DivisionSource::Entry(lit) => {
            let (p, bts) = parse_entry(lit).unwrap();
            propagate_division(&program, &p, &bts).unwrap()
        }
        DivisionSource::File(f) => Division::parse(&read_corpus(f)).unwrap(),
    };
    let goal = parse_term(c.goal).unwrap();
    let mut queries = vec![goal.clone()];
    queries.extend(c.queries.iter().map(|q| parse_term(q).unwrap()));
    Prepared {
        name: format!("{} [{}]", c.file, c.goal),
        program,
        division,
        relations: c.relations.map(|r| parse_relations(&read_corpus(r)).unwrap()),
        unfoldable: c
            .unfoldable
            .iter()
            .map(|s| sct_pe::bta::parse_pred_id(s).unwrap())
            .collect(),
        goal,
        queries,
    }
}

pub fn prepare_random(r: &RandomCase) -> Prepared {
    Prepared {
        name: format!("random seed {}", r.seed),
        division: propagate_division(&r.program, &r.entry, &r.entry_div).unwrap(),
        program: r.program.clone(),
        relations: None,
        unfoldable: Vec::new(),
        goal: r.goal.clone(),
        queries: r.queries.clone(),
    }
}

pub fn annotate_in(p: &Prepared, cfg: Config) -> Result<Annotation, String> {
    let opts = cfg.options(p.relations.clone(), &p.unfoldable);
    let g = graphs_for(p.program.clone(), cfg.norm(), &opts).map_err(|e| e.to_string())?;
    annotate_graphs(&g, &p.division, &opts).map_err(|e| e.to_string())
}

pub fn specialize_in(p: &Prepared, cfg: Config) -> Result<(Annotation, Specialized), String> {
    let ann = annotate_in(p, cfg)?;
    let sp = specialize(&p.program, &ann, &cfg.norm(), &p.goal, &SpecializeOptions::default())
        .map_err(|e| format!("{}: {e}", p.name))?;
    Ok((ann, sp))
}

/// Compares answers of every query on the original and residual programs.
/// Queries whose original run is cut off are skipped; returns how many were
/// compared.
pub fn check_answers(p: &Prepared, sp: &Specialized) -> Result<usize, String> {
    let name = sp.entry.functor().unwrap().name;
    let mut compared = 0;
    for q in &p.queries {
        let vars = q.vars();
        let orig = run_query_with(&p.program, std::slice::from_ref(q), DEPTH, MAX_STEPS);
        if orig.cutoff {
            continue;
        }
        let rq = Term::app(name.clone(), q.args().to_vec());
        let res = run_query_with(&sp.program, std::slice::from_ref(&rq), DEPTH, MAX_STEPS);
        if res.cutoff {
            return Err(format!("{}: residual run of {q} cut off", p.name));
        }
        let (a, b) = (normalized_answers(&orig, &vars), normalized_answers(&res, &vars));
        if a != b {
            return Err(format!(
                "{}: answers of {q} differ\n  original: {a:?}\n  residual: {b:?}",
                p.name
            ));
        }
        compared += 1;
    }
    Ok(compared)
}
