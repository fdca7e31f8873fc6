//! Abstract syntax for the pure logic-program subset: terms, clauses,
//! programs and substitutions, plus the textual parser and printer.
//!
//! The grammar accepted by [`parse_program`]:
//!
//! ```text
//! clause ::= atom "." | atom ":-" atom ("," atom)* "."
//! term   ::= Var | functor | functor "(" term ("," term)* ")" | integer
//!          | "[]" | "[" term ("," term)* ("|" term)? "]"
//! ```
//!
//! Comments run from `%` to the end of the line. Integers are constants.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Name of the list constructor functor.
pub const CONS: &str = ".";
/// Name of the empty list constant.
pub const NIL: &str = "[]";

/// A functor or predicate symbol together with its arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Functor {
    pub name: String,
    pub arity: usize,
}

/// Predicates are identified exactly like functors.
pub type PredId = Functor;

impl Functor {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Functor {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for Functor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// A constant is a structure with no arguments.
    Struct(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::Struct(name.into(), Vec::new())
    }

    pub fn app(functor: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Struct(functor.into(), args)
    }

    pub fn nil() -> Term {
        Term::constant(NIL)
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::Struct(CONS.to_string(), vec![head, tail])
    }

    /// Builds a proper list (or a partial list when `tail` is given).
    pub fn list(items: Vec<Term>, tail: Option<Term>) -> Term {
        items
            .into_iter()
            .rev()
            .fold(tail.unwrap_or_else(Term::nil), |acc, item| Term::cons(item, acc))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::Struct(_, args) => args,
        }
    }

    /// The functor of a structure; `None` for variables.
    pub fn functor(&self) -> Option<Functor> {
        match self {
            Term::Var(_) => None,
            Term::Struct(name, args) => Some(Functor::new(name.clone(), args.len())),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Struct(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Distinct variable names in order of first occurrence.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        self.collect_vars(&mut out, &mut seen);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<String>, seen: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                }
            }
            Term::Struct(_, args) => {
                for a in args {
                    a.collect_vars(out, seen);
                }
            }
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Term::Var(v) => v == name,
            Term::Struct(_, args) => args.iter().any(|a| a.contains_var(name)),
        }
    }

    /// Applies `f` to every variable, replacing it with the returned term.
    pub fn map_vars(&self, f: &mut impl FnMut(&str) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Struct(name, args) => {
                Term::Struct(name.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Struct(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Renames variables to `prefix1`, `prefix2`, ... in order of first
    /// occurrence. Two terms are variants iff their canonical forms agree.
    pub fn canonical(&self, prefix: &str) -> Term {
        let mut names: HashMap<String, String> = HashMap::new();
        self.map_vars(&mut |v| {
            let n = names.len() + 1;
            Term::Var(
                names
                    .entry(v.to_string())
                    .or_insert_with(|| format!("{prefix}{n}"))
                    .clone(),
            )
        })
    }

    fn fmt_list_tail(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Struct(name, args) if name == CONS && args.len() == 2 => {
                write!(f, ",{}", args[0])?;
                args[1].fmt_list_tail(f)
            }
            Term::Struct(name, args) if name == NIL && args.is_empty() => Ok(()),
            other => write!(f, "|{other}"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Struct(name, args) if name == CONS && args.len() == 2 => {
                write!(f, "[{}", args[0])?;
                args[1].fmt_list_tail(f)?;
                write!(f, "]")
            }
            Term::Struct(name, args) if args.is_empty() => write!(f, "{name}"),
            Term::Struct(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Generates variable names that cannot collide with parsed ones.
#[derive(Debug, Default)]
pub struct VarGen {
    next: u64,
}

impl VarGen {
    pub fn new() -> Self {
        VarGen::default()
    }

    /// A generator whose names avoid every generated-style name in `terms`.
    pub fn avoiding<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Self {
        let mut next = 0;
        for t in terms {
            for v in t.vars() {
                if let Some(n) = v.strip_prefix("_#").and_then(|n| n.parse::<u64>().ok()) {
                    next = next.max(n);
                }
            }
        }
        VarGen { next }
    }

    pub fn fresh_name(&mut self) -> String {
        self.next += 1;
        format!("_#{}", self.next)
    }

    pub fn fresh(&mut self) -> Term {
        Term::Var(self.fresh_name())
    }

    /// Renames every variable of the clause to a fresh one.
    pub fn rename_clause(&mut self, c: &Clause) -> Clause {
        let mut map: HashMap<String, String> = HashMap::new();
        let mut f = |v: &str| {
            Term::Var(
                map.entry(v.to_string())
                    .or_insert_with(|| {
                        self.next += 1;
                        format!("_#{}", self.next)
                    })
                    .clone(),
            )
        };
        Clause {
            head: c.head.map_vars(&mut f),
            body: c.body.iter().map(|b| b.map_vars(&mut f)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClauseError {
    #[error("clause head is a variable")]
    VariableHead,
    #[error("body atom {0} is a variable")]
    VariableBodyAtom(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    head: Term,
    body: Vec<Term>,
}

impl Clause {
    pub fn new(head: Term, body: Vec<Term>) -> Result<Clause, ClauseError> {
        if head.is_var() {
            return Err(ClauseError::VariableHead);
        }
        if let Some(i) = body.iter().position(Term::is_var) {
            return Err(ClauseError::VariableBodyAtom(i));
        }
        Ok(Clause { head, body })
    }

    pub fn fact(head: Term) -> Result<Clause, ClauseError> {
        Clause::new(head, Vec::new())
    }

    pub fn head(&self) -> &Term {
        &self.head
    }

    pub fn body(&self) -> &[Term] {
        &self.body
    }

    pub fn head_pred(&self) -> PredId {
        self.head.functor().expect("clause head is a structure")
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        self.head.collect_vars(&mut out, &mut seen);
        for b in &self.body {
            b.collect_vars(&mut out, &mut seen);
        }
        out
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&str) -> Term) -> Clause {
        Clause {
            head: self.head.map_vars(f),
            body: self.body.iter().map(|b| b.map_vars(f)).collect(),
        }
    }

    pub fn apply(&self, s: &Substitution) -> Clause {
        Clause {
            head: s.apply(&self.head),
            body: self.body.iter().map(|b| s.apply(b)).collect(),
        }
    }

    /// Variables renamed to `X1`, `X2`, ... by first occurrence.
    pub fn canonical(&self) -> Clause {
        let mut names: HashMap<String, String> = HashMap::new();
        self.map_vars(&mut |v| {
            let n = names.len() + 1;
            Term::Var(
                names
                    .entry(v.to_string())
                    .or_insert_with(|| format!("X{n}"))
                    .clone(),
            )
        })
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            for (i, b) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{b}")?;
            }
        }
        write!(f, ".")
    }
}

/// Returns a variant of `c` whose variables avoid `used`. Only clashing
/// variables are renamed, by appending the smallest free numeric suffix.
pub fn rename_apart(c: &Clause, used: &BTreeSet<String>) -> Clause {
    let own: BTreeSet<String> = c.vars().into_iter().collect();
    let mut taken: BTreeSet<String> = used.union(&own).cloned().collect();
    let mut map: HashMap<String, String> = HashMap::new();
    for v in c.vars() {
        if used.contains(&v) {
            let mut n = 1;
            let fresh = loop {
                let cand = format!("{v}{n}");
                if !taken.contains(&cand) {
                    break cand;
                }
                n += 1;
            };
            taken.insert(fresh.clone());
            map.insert(v, fresh);
        }
    }
    c.map_vars(&mut |v| Term::Var(map.get(v).cloned().unwrap_or_else(|| v.to_string())))
}

#[derive(Clone, Debug)]
pub struct Program {
    clauses: Vec<Clause>,
    signature: BTreeSet<Functor>,
    predicates: BTreeSet<PredId>,
    by_pred: BTreeMap<PredId, Vec<usize>>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Program {
        let mut signature = BTreeSet::new();
        let mut predicates = BTreeSet::new();
        let mut by_pred: BTreeMap<PredId, Vec<usize>> = BTreeMap::new();
        fn collect(t: &Term, sig: &mut BTreeSet<Functor>) {
            if let Term::Struct(name, args) = t {
                sig.insert(Functor::new(name.clone(), args.len()));
                for a in args {
                    collect(a, sig);
                }
            }
        }
        for (i, c) in clauses.iter().enumerate() {
            by_pred.entry(c.head_pred()).or_default().push(i);
            for atom in std::iter::once(&c.head).chain(&c.body) {
                predicates.insert(atom.functor().expect("atom"));
                for a in atom.args() {
                    collect(a, &mut signature);
                }
            }
        }
        Program {
            clauses,
            signature,
            predicates,
            by_pred,
        }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Functors occurring inside atom arguments (predicate symbols excluded).
    pub fn signature(&self) -> &BTreeSet<Functor> {
        &self.signature
    }

    /// Every predicate appearing as a head or body atom.
    pub fn predicates(&self) -> &BTreeSet<PredId> {
        &self.predicates
    }

    pub fn is_defined(&self, p: &PredId) -> bool {
        self.by_pred.contains_key(p)
    }

    /// Body predicates without clauses. Calls to them simply fail.
    pub fn external_predicates(&self) -> BTreeSet<PredId> {
        self.predicates
            .iter()
            .filter(|p| !self.by_pred.contains_key(*p))
            .cloned()
            .collect()
    }

    pub fn clauses_for<'a>(&'a self, p: &PredId) -> impl Iterator<Item = &'a Clause> + 'a {
        self.by_pred
            .get(p)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.clauses[i])
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// An idempotent substitution.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, v: &str) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.map.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        t.map_vars(&mut |v| self.map.get(v).cloned().unwrap_or_else(|| Term::var(v)))
    }

    /// Adds `v ↦ t`, keeping the substitution idempotent. `t` must already
    /// be fully applied and must not contain `v`.
    fn bind(&mut self, v: &str, t: Term) {
        let single = Substitution {
            map: BTreeMap::from([(v.to_string(), t.clone())]),
        };
        for val in self.map.values_mut() {
            if val.contains_var(v) {
                *val = single.apply(val);
            }
        }
        self.map.insert(v.to_string(), t);
    }

    /// Keeps only the bindings of the listed variables.
    pub fn restrict(&self, vars: &[String]) -> Substitution {
        Substitution {
            map: vars
                .iter()
                .filter_map(|v| self.map.get(v).map(|t| (v.clone(), t.clone())))
                .collect(),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Term)>) -> Option<Substitution> {
        let mut s = Substitution::new();
        for (v, t) in pairs {
            let t = s.apply(&t);
            if t == Term::Var(v.clone()) {
                continue;
            }
            if t.contains_var(&v) || s.map.contains_key(&v) {
                return None;
            }
            s.bind(&v, t);
        }
        Some(s)
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        write!(f, "}}")
    }
}

/// Most general unifier with occurs check.
pub fn unify(t1: &Term, t2: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    unify_into(&mut s, t1, t2).then_some(s)
}

/// Extends `s` with an mgu of `t1 s` and `t2 s`.
pub fn unify_into(s: &mut Substitution, t1: &Term, t2: &Term) -> bool {
    let mut stack = vec![(s.apply(t1), s.apply(t2))];
    while let Some((a, b)) = stack.pop() {
        let a = s.apply(&a);
        let b = s.apply(&b);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if t.contains_var(&x) {
                    return false;
                }
                s.bind(&x, t);
            }
            (Term::Struct(f, fa), Term::Struct(g, ga)) => {
                if f != g || fa.len() != ga.len() {
                    return false;
                }
                stack.extend(fa.into_iter().zip(ga));
            }
        }
    }
    true
}

/// One-way matching: a substitution `m` over the variables of `pattern`
/// with `pattern m == term`. Variables of `term` are treated as constants.
pub fn match_term(pattern: &Term, term: &Term) -> Option<Substitution> {
    let mut map: BTreeMap<String, Term> = BTreeMap::new();
    let mut stack = vec![(pattern, term)];
    while let Some((p, t)) = stack.pop() {
        match p {
            Term::Var(v) => match map.get(v) {
                Some(bound) if bound != t => return None,
                Some(_) => {}
                None => {
                    map.insert(v.clone(), t.clone());
                }
            },
            Term::Struct(f, pa) => match t {
                Term::Struct(g, ta) if f == g && pa.len() == ta.len() => {
                    stack.extend(pa.iter().zip(ta));
                }
                _ => return None,
            },
        }
    }
    map.retain(|v, t| *t != Term::Var(v.clone()));
    // A matcher need not be idempotent when pattern and term share names,
    // so it is applied in one shot through `apply_matcher`.
    Some(Substitution { map })
}

/// Applies a matcher returned by [`match_term`] simultaneously.
pub fn apply_matcher(m: &Substitution, t: &Term) -> Term {
    t.map_vars(&mut |v| m.map.get(v).cloned().unwrap_or_else(|| Term::var(v)))
}

/// True iff each term is an instance of the other through a variable
/// renaming.
pub fn is_variant(a1: &Term, a2: &Term) -> bool {
    let mut fwd: HashMap<&str, &str> = HashMap::new();
    let mut bwd: HashMap<&str, &str> = HashMap::new();
    let mut stack = vec![(a1, a2)];
    while let Some((x, y)) = stack.pop() {
        match (x, y) {
            (Term::Var(u), Term::Var(v)) => {
                if *fwd.entry(u).or_insert(v) != v || *bwd.entry(v).or_insert(u) != u {
                    return false;
                }
            }
            (Term::Struct(f, fa), Term::Struct(g, ga)) if f == g && fa.len() == ga.len() => {
                stack.extend(fa.iter().zip(ga));
            }
            _ => return false,
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Functor(String),
    Var(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Bar,
    Comma,
    Dot,
    Neck,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Functor(s) | Tok::Var(s) => write!(f, "`{s}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrack => write!(f, "`[`"),
            Tok::RBrack => write!(f, "`]`"),
            Tok::Bar => write!(f, "`|`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Neck => write!(f, "`:-`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(&c) = self.chars.peek() {
                if c == '%' {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                } else if c.is_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let (line, column) = (self.line, self.column);
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, line, column));
                return Ok(out);
            };
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                '|' => Tok::Bar,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                ':' if self.chars.peek() == Some(&'-') => {
                    self.bump();
                    Tok::Neck
                }
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let mut s = String::from(c);
                    while let Some(&n) = self.chars.peek() {
                        if n.is_ascii_alphanumeric() || n == '_' {
                            s.push(n);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    if c.is_ascii_uppercase() || c == '_' {
                        Tok::Var(s)
                    } else if c.is_ascii_digit() {
                        if !s.chars().all(|d| d.is_ascii_digit()) {
                            return Err(ParseError {
                                line,
                                column,
                                message: format!("malformed integer `{s}`"),
                            });
                        }
                        Tok::Functor(s)
                    } else {
                        Tok::Functor(s)
                    }
                }
                other => {
                    return Err(ParseError {
                        line,
                        column,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
            out.push((tok, line, column));
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: Lexer::new(text).tokenize()?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> (usize, usize) {
        let (_, l, c) = self.toks[self.pos];
        (l, c)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.next() {
            Tok::Var(v) => Ok(Term::Var(v)),
            Tok::Functor(name) => {
                if *self.peek() == Tok::LParen {
                    self.next();
                    let mut args = vec![self.term()?];
                    while *self.peek() == Tok::Comma {
                        self.next();
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Term::Struct(name, args))
                } else {
                    Ok(Term::constant(name))
                }
            }
            Tok::LBrack => {
                if *self.peek() == Tok::RBrack {
                    self.next();
                    return Ok(Term::nil());
                }
                let mut items = vec![self.term()?];
                while *self.peek() == Tok::Comma {
                    self.next();
                    items.push(self.term()?);
                }
                let tail = if *self.peek() == Tok::Bar {
                    self.next();
                    Some(self.term()?)
                } else {
                    None
                };
                self.expect(Tok::RBrack)?;
                Ok(Term::list(items, tail))
            }
            other => {
                self.pos -= usize::from(other != Tok::Eof);
                Err(self.error(format!("expected a term, found {other}")))
            }
        }
    }

    fn atom(&mut self, what: &str) -> Result<Term, ParseError> {
        let (line, column) = self.here();
        let t = self.term()?;
        if t.is_var() {
            return Err(ParseError {
                line,
                column,
                message: format!("{what} must not be a variable"),
            });
        }
        Ok(t)
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        let head = self.atom("clause head")?;
        let mut body = Vec::new();
        if *self.peek() == Tok::Neck {
            self.next();
            body.push(self.atom("body atom")?);
            while *self.peek() == Tok::Comma {
                self.next();
                body.push(self.atom("body atom")?);
            }
        }
        self.expect(Tok::Dot)?;
        Ok(name_anonymous(Clause { head, body }))
    }
}

/// Gives every `_` occurrence its own variable name.
fn name_anonymous(c: Clause) -> Clause {
    let named: BTreeSet<String> = c.vars().into_iter().filter(|v| v != "_").collect();
    let mut n = 0;
    c.map_vars(&mut |v| {
        if v != "_" {
            return Term::var(v);
        }
        loop {
            n += 1;
            let cand = format!("_{n}");
            if !named.contains(&cand) {
                return Term::Var(cand);
            }
        }
    })
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let mut clauses = Vec::new();
    while *p.peek() != Tok::Eof {
        clauses.push(p.clause()?);
    }
    Ok(Program::new(clauses))
}

/// Parses a single term; a trailing `.` is allowed.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    if *p.peek() == Tok::Dot {
        p.next();
    }
    p.expect(Tok::Eof)?;
    Ok(t)
}

/// Parses a comma-separated conjunction of atoms; a trailing `.` is allowed.
pub fn parse_goal(text: &str) -> Result<Vec<Term>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut atoms = vec![p.atom("goal atom")?];
    while *p.peek() == Tok::Comma {
        p.next();
        atoms.push(p.atom("goal atom")?);
    }
    if *p.peek() == Tok::Dot {
        p.next();
    }
    p.expect(Tok::Eof)?;
    // Anonymous variables in a goal are still distinct.
    let c = name_anonymous(Clause {
        head: Term::constant("goal"),
        body: atoms,
    });
    Ok(c.body)
}
