//! Linear constraints over size variables and a rational entailment check.
//!
//! Every size variable is implicitly non-negative. Satisfiability is decided
//! by Fourier–Motzkin elimination over exact rationals, keeping track of
//! strict versus non-strict bounds; a model is reconstructed by
//! back-substitution whenever the system is feasible. Rational entailment is
//! sound for integer entailment because the rationals admit more models.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::norm::{norm_of, NormSpec, SizeExpr};
use crate::syntax::{PredId, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `expr >= 0`
    Ge,
    /// `expr > 0`
    Gt,
    /// `expr = 0`
    Eq,
}

/// `expr rel 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinConstraint {
    pub expr: SizeExpr,
    pub rel: Relation,
}

impl LinConstraint {
    pub fn new(expr: SizeExpr, rel: Relation) -> Self {
        LinConstraint { expr, rel }
    }

    pub fn ge(expr: SizeExpr) -> Self {
        LinConstraint::new(expr, Relation::Ge)
    }

    pub fn gt(expr: SizeExpr) -> Self {
        LinConstraint::new(expr, Relation::Gt)
    }

    pub fn eq(expr: SizeExpr) -> Self {
        LinConstraint::new(expr, Relation::Eq)
    }

    pub fn holds(&self, assignment: &impl Fn(&str) -> i64) -> bool {
        let v = self.expr.eval(assignment);
        match self.rel {
            Relation::Ge => v >= 0,
            Relation::Gt => v > 0,
            Relation::Eq => v == 0,
        }
    }

    pub fn holds_rational(&self, model: &BTreeMap<String, BigRational>) -> bool {
        let v = eval_rational(&self.expr, model);
        match self.rel {
            Relation::Ge => !v.is_negative(),
            Relation::Gt => v.is_positive(),
            Relation::Eq => v.is_zero(),
        }
    }
}

impl fmt::Display for LinConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.rel {
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
        };
        write!(f, "{} {op} 0", self.expr)
    }
}

fn eval_rational(e: &SizeExpr, model: &BTreeMap<String, BigRational>) -> BigRational {
    e.coeffs().iter().fold(
        BigRational::from_integer(BigInt::from(e.constant_part())),
        |acc, (v, c)| {
            let x = model.get(v).cloned().unwrap_or_else(BigRational::zero);
            acc + x * BigRational::from_integer(BigInt::from(*c))
        },
    )
}

/// A conjunction of linear constraints; all variables are non-negative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintStore {
    constraints: Vec<LinConstraint>,
}

impl ConstraintStore {
    pub fn new() -> Self {
        ConstraintStore::default()
    }

    pub fn from_constraints(cs: impl IntoIterator<Item = LinConstraint>) -> Self {
        let mut s = ConstraintStore::new();
        for c in cs {
            s.push(c);
        }
        s
    }

    /// Adds a constraint unless it is already present.
    pub fn push(&mut self, c: LinConstraint) {
        if !self.constraints.contains(&c) {
            self.constraints.push(c);
        }
    }

    pub fn extend(&mut self, other: &ConstraintStore) {
        for c in &other.constraints {
            self.push(c.clone());
        }
    }

    pub fn constraints(&self) -> &[LinConstraint] {
        &self.constraints
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.constraints
            .iter()
            .flat_map(|c| c.expr.vars().cloned())
            .collect()
    }

    /// Evaluates the conjunction (without the implicit non-negativity).
    pub fn holds(&self, assignment: &impl Fn(&str) -> i64) -> bool {
        self.constraints.iter().all(|c| c.holds(assignment))
    }

    pub fn holds_rational(&self, model: &BTreeMap<String, BigRational>) -> bool {
        model.values().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| c.holds_rational(model))
    }

    /// Highest `A<i>` placeholder index mentioned, if any.
    fn max_placeholder(&self) -> Option<usize> {
        self.vars().iter().filter_map(|v| placeholder_index(v)).max()
    }
}

impl fmt::Display for ConstraintStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.constraints.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

pub fn placeholder(i: usize) -> String {
    format!("A{i}")
}

fn placeholder_index(v: &str) -> Option<usize> {
    v.strip_prefix('A')?.parse().ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinError {
    #[error("constraint system too complex: {0}")]
    TooComplex(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("placeholder A{index} out of range for {pred}")]
    PlaceholderOutOfRange { pred: PredId, index: usize },
    #[error("relation for {pred} used with an atom of arity {got}")]
    ArityMismatch { pred: PredId, got: usize },
}

/// Inter-argument size relations keyed by predicate. Each store ranges over
/// placeholders `A1..An`, one per argument position.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelationTable {
    entries: BTreeMap<PredId, ConstraintStore>,
}

impl RelationTable {
    pub fn new() -> Self {
        RelationTable::default()
    }

    pub fn get(&self, p: &PredId) -> Option<&ConstraintStore> {
        self.entries.get(p)
    }

    pub fn insert(&mut self, p: PredId, store: ConstraintStore) -> Result<(), LinError> {
        if let Some(index) = store.max_placeholder().filter(|i| *i > p.arity) {
            return Err(LinError::PlaceholderOutOfRange { pred: p, index });
        }
        self.entries.entry(p).or_default().extend(&store);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PredId, &ConstraintStore)> {
        self.entries.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum RelTok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
}

fn lex_relations(text: &str) -> Result<Vec<(RelTok, usize)>, LinError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('%').next().unwrap_or("");
        let mut chars = content.chars().peekable();
        while let Some(c) = chars.next() {
            let tok = match c {
                c if c.is_whitespace() => continue,
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut s = String::from(c);
                    while let Some(&n) = chars.peek() {
                        if n.is_ascii_alphanumeric() || n == '_' {
                            s.push(n);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    RelTok::Ident(s)
                }
                c if c.is_ascii_digit() => {
                    let mut s = String::from(c);
                    while let Some(&n) = chars.peek().filter(|n| n.is_ascii_digit()) {
                        s.push(n);
                        chars.next();
                    }
                    RelTok::Int(s.parse().map_err(|_| LinError::Syntax {
                        line,
                        message: format!("integer `{s}` out of range"),
                    })?)
                }
                '>' | '<' if chars.peek() == Some(&'=') => {
                    chars.next();
                    RelTok::Sym(if c == '>' { ">=" } else { "<=" })
                }
                '>' => RelTok::Sym(">"),
                '<' => RelTok::Sym("<"),
                '=' => RelTok::Sym("="),
                '/' => RelTok::Sym("/"),
                ':' => RelTok::Sym(":"),
                '{' => RelTok::Sym("{"),
                '}' => RelTok::Sym("}"),
                ',' => RelTok::Sym(","),
                '.' => RelTok::Sym("."),
                '+' => RelTok::Sym("+"),
                '-' => RelTok::Sym("-"),
                '*' => RelTok::Sym("*"),
                other => {
                    return Err(LinError::Syntax {
                        line,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
            out.push((tok, line));
        }
    }
    Ok(out)
}

struct RelParser {
    toks: Vec<(RelTok, usize)>,
    pos: usize,
}

impl RelParser {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |t| t.1)
    }

    fn err(&self, message: impl Into<String>) -> LinError {
        LinError::Syntax {
            line: self.line(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&RelTok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(RelTok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), LinError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{sym}`")))
        }
    }

    fn int(&mut self) -> Result<i64, LinError> {
        match self.peek() {
            Some(RelTok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err("expected an integer")),
        }
    }

    fn placeholder(&mut self, pred: &PredId) -> Result<String, LinError> {
        match self.peek() {
            Some(RelTok::Ident(s)) => {
                let index = placeholder_index(s)
                    .ok_or_else(|| self.err(format!("`{s}` is not a placeholder A<i>")))?;
                if index == 0 || index > pred.arity {
                    return Err(LinError::PlaceholderOutOfRange {
                        pred: pred.clone(),
                        index,
                    });
                }
                self.pos += 1;
                Ok(placeholder(index))
            }
            _ => Err(self.err("expected a placeholder A<i>")),
        }
    }

    fn linear(&mut self, pred: &PredId) -> Result<SizeExpr, LinError> {
        let mut acc = SizeExpr::default();
        let mut sign = if self.eat("-") {
            -1
        } else {
            self.eat("+");
            1
        };
        loop {
            let term = match self.peek() {
                Some(RelTok::Int(_)) => {
                    let n = self.int()?;
                    let scaled_var = self.eat("*")
                        || matches!(self.peek(), Some(RelTok::Ident(_)));
                    if scaled_var {
                        SizeExpr::term(self.placeholder(pred)?, n)
                    } else {
                        SizeExpr::constant(n)
                    }
                }
                Some(RelTok::Ident(_)) => SizeExpr::var(self.placeholder(pred)?),
                _ => return Err(self.err("expected a linear term")),
            };
            acc = acc.plus(&term.scaled(sign));
            if self.eat("+") {
                sign = 1;
            } else if self.eat("-") {
                sign = -1;
            } else {
                return Ok(acc);
            }
        }
    }

    fn constraint(&mut self, pred: &PredId) -> Result<LinConstraint, LinError> {
        let lhs = self.linear(pred)?;
        let op = match self.peek() {
            Some(RelTok::Sym(s)) if matches!(*s, ">" | ">=" | "=" | "<" | "<=") => *s,
            _ => return Err(self.err("expected a relation (>, >=, =, <, <=)")),
        };
        self.pos += 1;
        let rhs = self.linear(pred)?;
        let d = lhs.minus(&rhs);
        Ok(match op {
            ">" => LinConstraint::gt(d),
            ">=" => LinConstraint::ge(d),
            "=" => LinConstraint::eq(d),
            "<" => LinConstraint::gt(d.scaled(-1)),
            _ => LinConstraint::ge(d.scaled(-1)),
        })
    }

    fn entry(&mut self) -> Result<(PredId, ConstraintStore), LinError> {
        let name = match self.peek() {
            Some(RelTok::Ident(s)) => s.clone(),
            _ => return Err(self.err("expected a predicate name")),
        };
        self.pos += 1;
        self.expect("/")?;
        let arity = usize::try_from(self.int()?).map_err(|_| self.err("negative arity"))?;
        let pred = PredId::new(name, arity);
        self.expect(":")?;
        self.expect("{")?;
        let mut store = ConstraintStore::new();
        if !self.eat("}") {
            loop {
                store.push(self.constraint(&pred)?);
                if self.eat("}") {
                    break;
                }
                self.expect(",")?;
            }
        }
        self.expect(".")?;
        Ok((pred, store))
    }
}

/// Parses a relations file. Each entry reads
/// `pred/arity: { <lin> <rel> <lin>, ... }.` over placeholders `A1..An`.
pub fn parse_relations(text: &str) -> Result<RelationTable, LinError> {
    let mut p = RelParser {
        toks: lex_relations(text)?,
        pos: 0,
    };
    let mut table = RelationTable::new();
    while p.peek().is_some() {
        let (pred, store) = p.entry()?;
        table.insert(pred, store)?;
    }
    Ok(table)
}

/// Replaces each placeholder `Ai` by the norm of the atom's `i`-th argument.
pub fn instantiate(
    store: &ConstraintStore,
    atom: &Term,
    n: &NormSpec,
) -> Result<ConstraintStore, LinError> {
    let args = atom.args();
    if let Some(index) = store.max_placeholder().filter(|i| *i > args.len()) {
        return Err(LinError::PlaceholderOutOfRange {
            pred: atom.functor().unwrap_or_else(|| PredId::new("_", 0)),
            index,
        });
    }
    let norms: Vec<SizeExpr> = args.iter().map(|a| norm_of(a, n)).collect();
    let lookup = |v: &str| {
        placeholder_index(v)
            .filter(|i| (1..=norms.len()).contains(i))
            .map(|i| norms[i - 1].clone())
    };
    Ok(ConstraintStore::from_constraints(store.constraints.iter().map(
        |c| LinConstraint::new(c.expr.substitute(&lookup), c.rel),
    )))
}

/// Resource limits of the elimination procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Solver {
    pub max_vars: usize,
    pub max_rows: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            max_vars: 32,
            max_rows: 20_000,
        }
    }
}

/// `Σ a_i·x_i + c  (> | ≥)  0`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Row {
    a: Vec<BigRational>,
    c: BigRational,
    strict: bool,
}

impl Row {
    fn from_expr(e: &SizeExpr, index: &BTreeMap<String, usize>, strict: bool) -> Row {
        let mut a = vec![BigRational::zero(); index.len()];
        for (v, k) in e.coeffs() {
            a[index[v]] = BigRational::from_integer(BigInt::from(*k));
        }
        Row {
            a,
            c: BigRational::from_integer(BigInt::from(e.constant_part())),
            strict,
        }
    }

    /// Scales so the first non-zero coefficient has magnitude one.
    /// Returns `Err(())` for a false constant row, `Ok(None)` for a true one.
    fn normalize(mut self) -> Result<Option<Row>, ()> {
        match self.a.iter().find(|x| !x.is_zero()).cloned() {
            None => {
                let ok = if self.strict {
                    self.c.is_positive()
                } else {
                    !self.c.is_negative()
                };
                if ok {
                    Ok(None)
                } else {
                    Err(())
                }
            }
            Some(lead) => {
                let s = lead.abs();
                if !s.is_one() {
                    for x in &mut self.a {
                        *x /= &s;
                    }
                    self.c /= &s;
                }
                Ok(Some(self))
            }
        }
    }
}

impl Solver {
    fn index_vars<'a>(
        &self,
        exprs: impl IntoIterator<Item = &'a SizeExpr>,
    ) -> Result<BTreeMap<String, usize>, LinError> {
        let vars: BTreeSet<String> = exprs.into_iter().flat_map(|e| e.vars().cloned()).collect();
        if vars.len() > self.max_vars {
            return Err(LinError::TooComplex(format!(
                "{} variables exceed the budget of {}",
                vars.len(),
                self.max_vars
            )));
        }
        Ok(vars.into_iter().enumerate().map(|(i, v)| (v, i)).collect())
    }

    fn rows(store: &ConstraintStore, index: &BTreeMap<String, usize>) -> Vec<Row> {
        let mut rows = Vec::new();
        for c in &store.constraints {
            match c.rel {
                Relation::Ge => rows.push(Row::from_expr(&c.expr, index, false)),
                Relation::Gt => rows.push(Row::from_expr(&c.expr, index, true)),
                Relation::Eq => {
                    rows.push(Row::from_expr(&c.expr, index, false));
                    rows.push(Row::from_expr(&c.expr.scaled(-1), index, false));
                }
            }
        }
        for v in index.keys() {
            rows.push(Row::from_expr(&SizeExpr::var(v.clone()), index, false));
        }
        rows
    }

    /// Decides feasibility of `rows` and returns a model when feasible.
    fn solve(&self, rows: Vec<Row>, nvars: usize) -> Result<Option<Vec<BigRational>>, LinError> {
        let mut current = rows;
        let mut remaining: Vec<usize> = (0..nvars).collect();
        let mut stages: Vec<(usize, Vec<Row>)> = Vec::new();
        loop {
            let mut seen = HashSet::new();
            let mut next = Vec::new();
            for r in current {
                match r.normalize() {
                    Err(()) => return Ok(None),
                    Ok(None) => {}
                    Ok(Some(r)) => {
                        if seen.insert(r.clone()) {
                            next.push(r);
                        }
                    }
                }
            }
            current = next;
            if remaining.is_empty() {
                break;
            }
            // Eliminate the variable producing the fewest combinations.
            let (pos_in_remaining, var) = remaining
                .iter()
                .enumerate()
                .min_by_key(|(_, v)| {
                    let pos = current.iter().filter(|r| r.a[**v].is_positive()).count();
                    let neg = current.iter().filter(|r| r.a[**v].is_negative()).count();
                    (pos * neg, **v)
                })
                .map(|(i, v)| (i, *v))
                .expect("non-empty");
            remaining.swap_remove(pos_in_remaining);

            let (involved, rest): (Vec<Row>, Vec<Row>) =
                current.into_iter().partition(|r| !r.a[var].is_zero());
            let mut produced = rest;
            for p in involved.iter().filter(|r| r.a[var].is_positive()) {
                for n in involved.iter().filter(|r| r.a[var].is_negative()) {
                    let wp = n.a[var].abs();
                    let wn = p.a[var].clone();
                    let a = p
                        .a
                        .iter()
                        .zip(&n.a)
                        .map(|(x, y)| x * &wp + y * &wn)
                        .collect();
                    produced.push(Row {
                        a,
                        c: &p.c * &wp + &n.c * &wn,
                        strict: p.strict || n.strict,
                    });
                }
            }
            if produced.len() > self.max_rows {
                return Err(LinError::TooComplex(format!(
                    "{} intermediate constraints exceed the budget of {}",
                    produced.len(),
                    self.max_rows
                )));
            }
            stages.push((var, involved));
            current = produced;
        }

        let mut model = vec![BigRational::zero(); nvars];
        let two = BigRational::from_integer(BigInt::from(2));
        for (var, rows) in stages.into_iter().rev() {
            let mut lo: Option<(BigRational, bool)> = None;
            let mut hi: Option<(BigRational, bool)> = None;
            for r in &rows {
                let rest = r
                    .a
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != var)
                    .fold(r.c.clone(), |acc, (i, x)| acc + x * &model[i]);
                let bound = -rest / &r.a[var];
                if r.a[var].is_positive() {
                    let tighter = match &lo {
                        None => true,
                        Some((b, s)) => bound > *b || (bound == *b && r.strict && !s),
                    };
                    if tighter {
                        lo = Some((bound, r.strict));
                    }
                } else {
                    let tighter = match &hi {
                        None => true,
                        Some((b, s)) => bound < *b || (bound == *b && r.strict && !s),
                    };
                    if tighter {
                        hi = Some((bound, r.strict));
                    }
                }
            }
            model[var] = match (lo, hi) {
                (Some((l, _)), Some((h, _))) if l < h => (l + h) / &two,
                (Some((l, _)), Some(_)) => l,
                (Some((l, strict)), None) => {
                    if strict {
                        l + BigRational::one()
                    } else {
                        l
                    }
                }
                (None, Some((h, strict))) => {
                    if strict {
                        h - BigRational::one()
                    } else {
                        h
                    }
                }
                (None, None) => BigRational::zero(),
            };
        }
        Ok(Some(model))
    }

    /// A non-negative rational model of `store`, if one exists.
    pub fn find_model(
        &self,
        store: &ConstraintStore,
    ) -> Result<Option<BTreeMap<String, BigRational>>, LinError> {
        let index = self.index_vars(store.constraints.iter().map(|c| &c.expr))?;
        let rows = Solver::rows(store, &index);
        let model = self.solve(rows, index.len())?.map(|values| {
            index
                .iter()
                .map(|(v, i)| (v.clone(), values[*i].clone()))
                .collect::<BTreeMap<_, _>>()
        });
        debug_assert!(model.as_ref().is_none_or(|m| store.holds_rational(m)));
        Ok(model)
    }

    pub fn satisfiable(&self, store: &ConstraintStore) -> Result<bool, LinError> {
        Ok(self.find_model(store)?.is_some())
    }

    /// Whether `store ∧ (vars ≥ 0)` implies `goal` over the rationals.
    pub fn entails(&self, store: &ConstraintStore, goal: &LinConstraint) -> Result<bool, LinError> {
        Ok(self.countermodel(store, goal)?.is_none())
    }

    /// A model of `store` violating `goal`, if one exists.
    pub fn countermodel(
        &self,
        store: &ConstraintStore,
        goal: &LinConstraint,
    ) -> Result<Option<BTreeMap<String, BigRational>>, LinError> {
        let negations = match goal.rel {
            Relation::Ge => vec![LinConstraint::gt(goal.expr.scaled(-1))],
            Relation::Gt => vec![LinConstraint::ge(goal.expr.scaled(-1))],
            Relation::Eq => vec![
                LinConstraint::gt(goal.expr.clone()),
                LinConstraint::gt(goal.expr.scaled(-1)),
            ],
        };
        for neg in negations {
            let mut s = store.clone();
            s.push(neg);
            if let Some(m) = self.find_model(&s)? {
                return Ok(Some(m));
            }
        }
        Ok(None)
    }
}

pub fn entails(store: &ConstraintStore, goal: &LinConstraint) -> Result<bool, LinError> {
    Solver::default().entails(store, goal)
}

pub fn satisfiable(store: &ConstraintStore) -> Result<bool, LinError> {
    Solver::default().satisfiable(store)
}
