//! Binding-time analysis: divisions, termination and quasi-termination
//! checks over idempotent size-change graphs, and unfold/memo annotation
//! (baseline and loop-class memo minimization).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use log::debug;
use thiserror::Error;

use crate::closure::LoopClass;
use crate::norm::{boundedness, Boundedness, NormSpec};
use crate::scg::{Label, SizeChangeGraph};
use crate::syntax::{PredId, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BindingTime {
    Static,
    Dynamic,
}

impl BindingTime {
    pub fn letter(self) -> char {
        match self {
            BindingTime::Static => 's',
            BindingTime::Dynamic => 'd',
        }
    }

    pub fn is_static(self) -> bool {
        self == BindingTime::Static
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mark {
    Unfold,
    Memo,
}

impl Mark {
    pub fn as_str(self) -> &'static str {
        match self {
            Mark::Unfold => "unfold",
            Mark::Memo => "memo",
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BtaError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("predicate {0} is not defined in the program")]
    UnknownPredicate(PredId),
    #[error("{pred} given {got} binding times")]
    ArityMismatch { pred: PredId, got: usize },
    #[error("division has no entry for {0}")]
    MissingPredicate(PredId),
}

/// Static/dynamic classification of every argument position, one list per
/// predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Division {
    map: BTreeMap<PredId, Vec<BindingTime>>,
}

impl Division {
    pub fn new() -> Self {
        Division::default()
    }

    /// Every predicate of `p`, all arguments static.
    pub fn all_static(p: &Program) -> Self {
        let map = p
            .predicates()
            .iter()
            .map(|q| (q.clone(), vec![BindingTime::Static; q.arity]))
            .collect();
        Division { map }
    }

    pub fn insert(&mut self, p: PredId, bts: Vec<BindingTime>) -> Result<(), BtaError> {
        if bts.len() != p.arity {
            return Err(BtaError::ArityMismatch {
                got: bts.len(),
                pred: p,
            });
        }
        self.map.insert(p, bts);
        Ok(())
    }

    pub fn get(&self, p: &PredId) -> Option<&[BindingTime]> {
        self.map.get(p).map(|v| v.as_slice())
    }

    pub fn contains(&self, p: &PredId) -> bool {
        self.map.contains_key(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PredId, &[BindingTime])> {
        self.map.iter().map(|(p, v)| (p, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Whether argument `i` (1-based) of `p` is static. Unknown positions
    /// count as dynamic.
    pub fn is_static(&self, p: &PredId, i: usize) -> bool {
        self.map
            .get(p)
            .and_then(|v| v.get(i.wrapping_sub(1)))
            .is_some_and(|b| b.is_static())
    }

    pub fn total_args(&self) -> usize {
        self.map.values().map(Vec::len).sum()
    }

    pub fn dynamic_count(&self) -> usize {
        self.map
            .values()
            .flatten()
            .filter(|b| !b.is_static())
            .count()
    }

    /// True when every position static here is static in `other` as well.
    pub fn at_most_as_static_as(&self, other: &Division) -> bool {
        self.map.iter().all(|(p, v)| match other.map.get(p) {
            Some(w) => v.iter().zip(w).all(|(a, b)| !a.is_static() || b.is_static()),
            None => false,
        })
    }

    fn set_dynamic(&mut self, p: &PredId, i: usize) -> bool {
        match self.map.get_mut(p).and_then(|v| v.get_mut(i - 1)) {
            Some(b) if b.is_static() => {
                *b = BindingTime::Dynamic;
                true
            }
            _ => false,
        }
    }

    /// Parses a division file: one `pred/arity: s,d,...` entry per line,
    /// each ending in `.`; `%` starts a comment.
    pub fn parse(text: &str) -> Result<Division, BtaError> {
        let mut d = Division::new();
        for (line, content) in entry_lines(text) {
            let (p, bts) = parse_entry(&content).map_err(|message| BtaError::Syntax { line, message })?;
            if d.contains(&p) {
                return Err(BtaError::Syntax {
                    line,
                    message: format!("duplicate entry for {p}"),
                });
            }
            d.insert(p, bts)?;
        }
        Ok(d)
    }
}

impl fmt::Display for Division {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, v) in &self.map {
            writeln!(f, "{p}: {}.", letters(v))?;
        }
        Ok(())
    }
}

pub fn letters(bts: &[BindingTime]) -> String {
    bts.iter()
        .map(|b| b.letter().to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Non-empty, comment-stripped lines with the trailing `.` removed.
fn entry_lines(text: &str) -> impl Iterator<Item = (usize, String)> + '_ {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('%').next().unwrap_or("").trim();
        if content.is_empty() {
            None
        } else {
            Some((i + 1, content.to_string()))
        }
    })
}

pub fn parse_pred_id(s: &str) -> Option<PredId> {
    let (name, arity) = s.trim().rsplit_once('/')?;
    let name = name.trim();
    if name.is_empty() {
        return None;
    }
    Some(PredId::new(name, arity.trim().parse().ok()?))
}

fn split_entry(s: &str) -> Result<(PredId, &str), String> {
    let s = s.trim();
    let s = s.strip_suffix('.').unwrap_or(s);
    let (lhs, rhs) = s
        .split_once(':')
        .ok_or_else(|| "expected `pred/arity: ...`".to_string())?;
    let p = parse_pred_id(lhs).ok_or_else(|| format!("bad predicate `{}`", lhs.trim()))?;
    Ok((p, rhs.trim()))
}

/// Parses one `pred/arity: s,d,...` entry (trailing `.` optional).
pub fn parse_entry(s: &str) -> Result<(PredId, Vec<BindingTime>), String> {
    let (p, rhs) = split_entry(s)?;
    let bts = if rhs.is_empty() {
        Vec::new()
    } else {
        rhs.split(',')
            .map(|x| match x.trim() {
                "s" => Ok(BindingTime::Static),
                "d" => Ok(BindingTime::Dynamic),
                other => Err(format!("expected `s` or `d`, found `{other}`")),
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    if bts.len() != p.arity {
        return Err(format!("{p} given {} binding times", bts.len()));
    }
    Ok((p, bts))
}

/// Parses a hand-written marks file: `pred/arity: unfold.` or
/// `pred/arity: memo.` per line.
pub fn parse_marks(text: &str) -> Result<BTreeMap<PredId, Mark>, BtaError> {
    let mut marks = BTreeMap::new();
    for (line, content) in entry_lines(text) {
        let err = |message: String| BtaError::Syntax { line, message };
        let (p, rhs) = split_entry(&content).map_err(err)?;
        let m = match rhs {
            "unfold" => Mark::Unfold,
            "memo" => Mark::Memo,
            other => return Err(err(format!("expected `unfold` or `memo`, found `{other}`"))),
        };
        if marks.insert(p.clone(), m).is_some() {
            return Err(err(format!("duplicate entry for {p}")));
        }
    }
    Ok(marks)
}

/// Result of binding-time analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    pub marks: BTreeMap<PredId, Mark>,
    pub division: Division,
    pub requires_mgg: bool,
    pub diagnostics: Vec<String>,
    /// Rounds of the termination/reclassification fixpoint.
    pub rounds: usize,
}

impl Annotation {
    /// An annotation with user-supplied marks; predicates of `p` left out
    /// of `marks` default to memo.
    pub fn from_marks(
        p: &Program,
        marks: BTreeMap<PredId, Mark>,
        division: Division,
        n: &NormSpec,
    ) -> Annotation {
        let mut all: BTreeMap<PredId, Mark> =
            p.predicates().iter().map(|q| (q.clone(), Mark::Memo)).collect();
        all.extend(marks);
        Annotation {
            marks: all,
            division,
            requires_mgg: needs_mgg(p, n),
            diagnostics: Vec::new(),
            rounds: 0,
        }
    }

    /// Predicates outside the mark table are treated as memo.
    pub fn mark(&self, p: &PredId) -> Mark {
        self.marks.get(p).copied().unwrap_or(Mark::Memo)
    }

    pub fn unfold_set(&self) -> BTreeSet<PredId> {
        self.with_mark(Mark::Unfold)
    }

    pub fn memo_set(&self) -> BTreeSet<PredId> {
        self.with_mark(Mark::Memo)
    }

    fn with_mark(&self, m: Mark) -> BTreeSet<PredId> {
        self.marks
            .iter()
            .filter(|(_, &x)| x == m)
            .map(|(p, _)| p.clone())
            .collect()
    }
}

fn needs_mgg(p: &Program, n: &NormSpec) -> bool {
    boundedness(n, p.signature()) == Boundedness::PossiblyUnbounded
}

/// Makes every body argument dynamic when it mentions a variable that no
/// static head argument binds, until nothing changes.
fn close_division(p: &Program, d: &mut Division) {
    loop {
        let mut changed = false;
        for c in p.clauses() {
            let hp = c.head_pred();
            let mut bound = BTreeSet::new();
            for (i, a) in c.head().args().iter().enumerate() {
                if d.is_static(&hp, i + 1) {
                    bound.extend(a.vars());
                }
            }
            for b in c.body() {
                let q = b.functor().expect("atom");
                for (k, a) in b.args().iter().enumerate() {
                    if d.is_static(&q, k + 1) && a.vars().iter().any(|v| !bound.contains(v)) {
                        changed |= d.set_dynamic(&q, k + 1);
                    }
                }
            }
        }
        if !changed {
            return;
        }
    }
}

/// Propagates reclassifications: a body argument becomes dynamic when it
/// mentions a variable that occurs in a head argument static in `orig` but
/// dynamic in `d`, and in no head argument still static.
fn close_reclassified(p: &Program, orig: &Division, d: &mut Division) {
    loop {
        let mut changed = false;
        for c in p.clauses() {
            let hp = c.head_pred();
            let mut bound = BTreeSet::new();
            let mut tainted = BTreeSet::new();
            for (i, a) in c.head().args().iter().enumerate() {
                if d.is_static(&hp, i + 1) {
                    bound.extend(a.vars());
                } else if orig.is_static(&hp, i + 1) {
                    tainted.extend(a.vars());
                }
            }
            if tainted.is_empty() {
                continue;
            }
            for b in c.body() {
                let q = b.functor().expect("atom");
                for (k, a) in b.args().iter().enumerate() {
                    let hit = a.vars().iter().any(|v| tainted.contains(v) && !bound.contains(v));
                    if hit {
                        changed |= d.set_dynamic(&q, k + 1);
                    }
                }
            }
        }
        if !changed {
            return;
        }
    }
}

/// Monovariant division reached from `entry` called with `entry_div`.
/// Predicates not reachable from the entry stay all-static.
pub fn propagate_division(
    p: &Program,
    entry: &PredId,
    entry_div: &[BindingTime],
) -> Result<Division, BtaError> {
    if !p.is_defined(entry) {
        return Err(BtaError::UnknownPredicate(entry.clone()));
    }
    let mut d = Division::all_static(p);
    d.insert(entry.clone(), entry_div.to_vec())?;
    close_division(p, &mut d);
    Ok(d)
}

/// Whether `g` has a strict self-edge `i ≻ i` on an argument static in `d`.
pub fn graph_terminates(g: &SizeChangeGraph, d: &Division) -> bool {
    g.edges()
        .any(|(i, j, l)| i == j && l == Label::Strict && d.is_static(g.source(), i))
}

fn check_covered<'a>(
    idem: impl IntoIterator<Item = &'a SizeChangeGraph>,
    d: &Division,
) -> Result<(), BtaError> {
    for g in idem {
        if !d.contains(g.source()) {
            return Err(BtaError::MissingPredicate(g.source().clone()));
        }
    }
    Ok(())
}

/// Predicates of `d` whose every idempotent self-graph terminates.
pub fn terminating_preds(
    idem: &[SizeChangeGraph],
    d: &Division,
) -> Result<BTreeSet<PredId>, BtaError> {
    check_covered(idem, d)?;
    let mut out: BTreeSet<PredId> = d.iter().map(|(p, _)| p.clone()).collect();
    for g in idem.iter().filter(|g| g.is_self_loop()) {
        if !graph_terminates(g, d) {
            out.remove(g.source());
        }
    }
    Ok(out)
}

/// Makes dynamic every argument of a non-terminating predicate that has no
/// incoming edge in one of its idempotent self-graphs. Returns the new
/// division and one diagnostic per reclassified argument.
pub fn quasi_check(
    idem: &[SizeChangeGraph],
    d: &Division,
    terminating: &BTreeSet<PredId>,
) -> (Division, Vec<String>) {
    let mut out = d.clone();
    let mut diags = Vec::new();
    for g in idem.iter().filter(|g| g.is_self_loop()) {
        let p = g.source();
        if terminating.contains(p) {
            continue;
        }
        for i in 1..=p.arity {
            if g.edges().all(|(_, j, _)| j != i) && out.set_dynamic(p, i) {
                diags.push(format!(
                    "{p}: argument {i} reclassified dynamic (no incoming edge in {})",
                    g.idset_string()
                ));
            }
        }
    }
    (out, diags)
}

struct Pipeline {
    division: Division,
    terminating: BTreeSet<PredId>,
    diagnostics: Vec<String>,
    rounds: usize,
}

fn check_total(p: &Program, d: &Division) -> Result<(), BtaError> {
    for q in p.predicates() {
        if !d.contains(q) {
            return Err(BtaError::MissingPredicate(q.clone()));
        }
    }
    Ok(())
}

/// Termination, quasi-termination and propagation of reclassified
/// arguments, iterated jointly. Arguments only become dynamic, so this
/// stops. The given division itself is trusted: a static argument bound by
/// an atom to its left (e.g. a completely unfoldable one) is kept.
fn pipeline(p: &Program, idem: &[SizeChangeGraph], d: &Division) -> Result<Pipeline, BtaError> {
    check_total(p, d)?;
    check_covered(idem, d)?;
    let mut div = d.clone();
    let mut diagnostics = Vec::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let t = terminating_preds(idem, &div)?;
        let (mut next, diags) = quasi_check(idem, &div, &t);
        diagnostics.extend(diags);
        let before = next.dynamic_count();
        close_reclassified(p, d, &mut next);
        if next.dynamic_count() > before {
            diagnostics.push(format!(
                "{} argument(s) reclassified dynamic by propagation",
                next.dynamic_count() - before
            ));
        }
        if next == div {
            debug!("division fixpoint after {rounds} round(s)");
            for g in idem.iter().filter(|g| g.is_self_loop()) {
                if !graph_terminates(g, &div) {
                    diagnostics.push(format!(
                        "{}: loop {} has no strict self-edge on a static argument",
                        g.source(),
                        g.idset_string()
                    ));
                }
            }
            return Ok(Pipeline {
                division: div,
                terminating: t,
                diagnostics,
                rounds,
            });
        }
        div = next;
    }
}

/// Baseline annotation: unfold exactly the predicates that terminate under
/// the final division, memo the rest.
pub fn annotate(
    p: &Program,
    idem: &[SizeChangeGraph],
    d: &Division,
    n: &NormSpec,
) -> Result<Annotation, BtaError> {
    let r = pipeline(p, idem, d)?;
    let marks = p
        .predicates()
        .iter()
        .map(|q| {
            let m = if r.terminating.contains(q) {
                Mark::Unfold
            } else {
                Mark::Memo
            };
            (q.clone(), m)
        })
        .collect();
    Ok(Annotation {
        marks,
        division: r.division,
        requires_mgg: needs_mgg(p, n),
        diagnostics: r.diagnostics,
        rounds: r.rounds,
    })
}

/// Loop classes containing a member graph that fails the termination
/// condition under `d`.
pub fn unsafe_classes<'a>(classes: &'a [LoopClass], d: &Division) -> Vec<&'a LoopClass> {
    classes
        .iter()
        .filter(|c| c.members.iter().any(|g| !graph_terminates(g, d)))
        .collect()
}

/// Greedy hitting set: repeatedly take the predicate occurring in the most
/// uncovered sets, least predicate first on ties.
pub fn greedy_hitting_set(sets: &[&BTreeSet<PredId>]) -> BTreeSet<PredId> {
    let mut chosen = BTreeSet::new();
    let mut uncovered: Vec<&BTreeSet<PredId>> = sets.to_vec();
    while !uncovered.is_empty() {
        let mut counts: BTreeMap<&PredId, usize> = BTreeMap::new();
        for s in &uncovered {
            for q in s.iter() {
                *counts.entry(q).or_default() += 1;
            }
        }
        // Max count; BTreeMap order makes the first maximum the least name.
        let Some((best, _)) = counts
            .into_iter()
            .fold(None, |acc: Option<(&PredId, usize)>, (q, c)| match acc {
                Some((_, bc)) if bc >= c => acc,
                _ => Some((q, c)),
            })
        else {
            break; // only empty sets remain
        };
        let best = best.clone();
        uncovered.retain(|s| !s.contains(&best));
        chosen.insert(best);
    }
    chosen
}

/// Memo only one predicate per unsafe loop class, choosing a small hitting
/// set; every other predicate is unfolded.
pub fn annotate_min_memo(
    p: &Program,
    classes: &[LoopClass],
    d: &Division,
    n: &NormSpec,
) -> Result<Annotation, BtaError> {
    let idem: Vec<SizeChangeGraph> = classes.iter().flat_map(|c| c.members.clone()).collect();
    let r = pipeline(p, &idem, d)?;
    let bad = unsafe_classes(classes, &r.division);
    let sets: Vec<&BTreeSet<PredId>> = bad.iter().map(|c| &c.predicates).collect();
    let memo = greedy_hitting_set(&sets);
    let mut diagnostics = r.diagnostics;
    for c in &bad {
        let names: Vec<String> = c.predicates.iter().map(|q| q.to_string()).collect();
        diagnostics.push(format!(
            "unsafe loop class {} over {}",
            c.idset_string(),
            names.join(", ")
        ));
    }
    for q in &memo {
        diagnostics.push(format!("memo {q} chosen by hitting set"));
    }
    let marks = p
        .predicates()
        .iter()
        .map(|q| {
            let m = if memo.contains(q) {
                Mark::Memo
            } else {
                Mark::Unfold
            };
            (q.clone(), m)
        })
        .collect();
    Ok(Annotation {
        marks,
        division: r.division,
        requires_mgg: needs_mgg(p, n),
        diagnostics,
        rounds: r.rounds,
    })
}
