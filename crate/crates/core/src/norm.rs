//! Symbolic norms, the orders they induce, and norm-preserving
//! generalization.
//!
//! A symbolic norm maps a term to a linear expression over integer size
//! variables, one per logical variable (reusing the logical variable's
//! name). Every functor `f/n` carries a weight `m` and per-argument
//! multipliers `k_1..k_n`:
//!
//! ```text
//! ||X||           = X
//! ||f(t1,..,tn)|| = m + k_1*||t1|| + .. + k_n*||tn||
//! ```

use std::borrow::Cow;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Functor, Term, VarGen, CONS};

/// `constant + Σ coeff·var`. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SizeExpr {
    constant: i64,
    coeffs: BTreeMap<String, i64>,
}

impl SizeExpr {
    pub fn constant(c: i64) -> SizeExpr {
        SizeExpr {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(name: impl Into<String>) -> SizeExpr {
        SizeExpr::term(name, 1)
    }

    pub fn term(name: impl Into<String>, coeff: i64) -> SizeExpr {
        let mut e = SizeExpr::default();
        e.add_term(name.into(), coeff);
        e
    }

    pub fn constant_part(&self) -> i64 {
        self.constant
    }

    pub fn coeff(&self, var: &str) -> i64 {
        self.coeffs.get(var).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &BTreeMap<String, i64> {
        &self.coeffs
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add_term(&mut self, var: String, coeff: i64) {
        if coeff == 0 {
            return;
        }
        match self.coeffs.entry(var) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if *o.get() == 0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
        }
    }

    pub fn plus(&self, other: &SizeExpr) -> SizeExpr {
        let mut out = self.clone();
        out.constant += other.constant;
        for (v, c) in &other.coeffs {
            out.add_term(v.clone(), *c);
        }
        out
    }

    pub fn minus(&self, other: &SizeExpr) -> SizeExpr {
        self.plus(&other.scaled(-1))
    }

    pub fn scaled(&self, k: i64) -> SizeExpr {
        if k == 0 {
            return SizeExpr::default();
        }
        SizeExpr {
            constant: self.constant * k,
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
        }
    }

    pub fn plus_constant(&self, c: i64) -> SizeExpr {
        let mut out = self.clone();
        out.constant += c;
        out
    }

    /// Replaces each size variable by an expression; unmapped variables stay.
    pub fn substitute(&self, f: &impl Fn(&str) -> Option<SizeExpr>) -> SizeExpr {
        let mut out = SizeExpr::constant(self.constant);
        for (v, c) in &self.coeffs {
            let replacement = f(v).unwrap_or_else(|| SizeExpr::var(v.clone()));
            out = out.plus(&replacement.scaled(*c));
        }
        out
    }

    /// Evaluates under an assignment; missing variables count as zero.
    pub fn eval(&self, assignment: &impl Fn(&str) -> i64) -> i64 {
        self.coeffs
            .iter()
            .fold(self.constant, |acc, (v, c)| acc + c * assignment(v))
    }
}

impl fmt::Display for SizeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let (sign, mag) = if *c < 0 { ("-", -c) } else { ("+", *c) };
            match (first, sign) {
                (true, "-") => write!(f, "-")?,
                (true, _) => {}
                (false, s) => write!(f, " {s} ")?,
            }
            if mag == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant > 0 {
            write!(f, " + {}", self.constant)
        } else if self.constant < 0 {
            write!(f, " - {}", -self.constant)
        } else {
            Ok(())
        }
    }
}

/// Weight `m` and argument multipliers `k` of one functor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormRule {
    pub m: u64,
    pub k: Vec<u64>,
}

/// Rule applied to functors without an explicit entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefaultRule {
    /// `m = arity`, every `k_i = 1`.
    TermSize,
    /// `m = 0`, every `k_i = 0`.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("rule for {functor} has {got} multipliers, expected {expected}")]
    ArityMismatch {
        functor: Functor,
        got: usize,
        expected: usize,
    },
    #[error("a variable is not an atom")]
    VariableAtom,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormSpec {
    name: String,
    rules: BTreeMap<Functor, NormRule>,
    default: DefaultRule,
}

impl NormSpec {
    pub fn new(
        name: impl Into<String>,
        rules: BTreeMap<Functor, NormRule>,
        default: DefaultRule,
    ) -> Result<NormSpec, NormError> {
        for (f, r) in &rules {
            if r.k.len() != f.arity {
                return Err(NormError::ArityMismatch {
                    functor: f.clone(),
                    got: r.k.len(),
                    expected: f.arity,
                });
            }
        }
        Ok(NormSpec {
            name: name.into(),
            rules,
            default,
        })
    }

    /// Sums the arities of the term's symbols.
    pub fn term_size() -> NormSpec {
        NormSpec {
            name: "term_size".into(),
            rules: BTreeMap::new(),
            default: DefaultRule::TermSize,
        }
    }

    /// Counts list elements: `[_|T]` weighs `1 + ||T||`, everything else 0.
    pub fn list_length() -> NormSpec {
        NormSpec {
            name: "list_length".into(),
            rules: BTreeMap::from([(Functor::new(CONS, 2), NormRule { m: 1, k: vec![0, 1] })]),
            default: DefaultRule::Zero,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn default_rule(&self) -> DefaultRule {
        self.default
    }

    pub fn rules(&self) -> &BTreeMap<Functor, NormRule> {
        &self.rules
    }

    pub fn rule_for(&self, f: &Functor) -> Cow<'_, NormRule> {
        match self.rules.get(f) {
            Some(r) => Cow::Borrowed(r),
            None => Cow::Owned(match self.default {
                DefaultRule::TermSize => NormRule {
                    m: f.arity as u64,
                    k: vec![1; f.arity],
                },
                DefaultRule::Zero => NormRule {
                    m: 0,
                    k: vec![0; f.arity],
                },
            }),
        }
    }

    /// Parses a norm file:
    ///
    /// ```text
    /// % comment
    /// ./2: m=1, k=[0,1].
    /// default: zero.
    /// ```
    pub fn parse(name: impl Into<String>, text: &str) -> Result<NormSpec, NormError> {
        let mut rules = BTreeMap::new();
        let mut default = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('%').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: &str| NormError::Syntax {
                line,
                message: message.to_string(),
            };
            let body = content
                .strip_suffix('.')
                .ok_or_else(|| err("missing terminating `.`"))?;
            let (lhs, rhs) = body.split_once(':').ok_or_else(|| err("missing `:`"))?;
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            if lhs == "default" {
                if default.is_some() {
                    return Err(err("duplicate default directive"));
                }
                default = Some(match rhs {
                    "term_size" => DefaultRule::TermSize,
                    "zero" => DefaultRule::Zero,
                    _ => return Err(err("default must be `term_size` or `zero`")),
                });
                continue;
            }
            let (fname, arity) = lhs
                .rsplit_once('/')
                .ok_or_else(|| err("expected functor/arity"))?;
            let arity: usize = arity
                .trim()
                .parse()
                .map_err(|_| err("arity is not a non-negative integer"))?;
            let (m_part, k_part) = rhs
                .split_once(',')
                .ok_or_else(|| err("expected `m=<int>, k=[...]`"))?;
            let m: u64 = m_part
                .trim()
                .strip_prefix("m=")
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| err("expected `m=<non-negative int>`"))?;
            let k_list = k_part
                .trim()
                .strip_prefix("k=")
                .map(str::trim)
                .and_then(|s| s.strip_prefix('['))
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| err("expected `k=[...]`"))?;
            let k = if k_list.trim().is_empty() {
                Vec::new()
            } else {
                k_list
                    .split(',')
                    .map(|s| s.trim().parse::<u64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| err("k entries must be non-negative integers"))?
            };
            let functor = Functor::new(fname.trim(), arity);
            if k.len() != arity {
                return Err(NormError::ArityMismatch {
                    functor,
                    got: k.len(),
                    expected: arity,
                });
            }
            if rules.insert(functor, NormRule { m, k }).is_some() {
                return Err(err("duplicate rule"));
            }
        }
        NormSpec::new(name, rules, default.unwrap_or(DefaultRule::TermSize))
    }
}

/// Outcome of comparing two norm expressions under every non-negative
/// assignment of their size variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CompareResult {
    Strict,
    NonStrict,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundedness {
    Bounded,
    PossiblyUnbounded,
}

pub fn norm_of(t: &Term, n: &NormSpec) -> SizeExpr {
    match t {
        Term::Var(v) => SizeExpr::var(v.clone()),
        Term::Struct(name, args) => {
            let rule = n.rule_for(&Functor::new(name.clone(), args.len()));
            args.iter()
                .zip(&rule.k)
                .filter(|(_, k)| **k > 0)
                .fold(SizeExpr::constant(rule.m as i64), |acc, (a, k)| {
                    acc.plus(&norm_of(a, n).scaled(*k as i64))
                })
        }
    }
}

/// `e1 ≻ e2` holds when `e1 - e2` has only non-negative coefficients and a
/// positive constant; `⪰` when the constant is merely non-negative.
pub fn compare(e1: &SizeExpr, e2: &SizeExpr) -> CompareResult {
    let d = e1.minus(e2);
    if d.coeffs.values().any(|c| *c < 0) {
        CompareResult::Unknown
    } else if d.constant >= 1 {
        CompareResult::Strict
    } else if d.constant == 0 {
        CompareResult::NonStrict
    } else {
        CompareResult::Unknown
    }
}

/// Most general generalization of `t` with the same symbolic norm.
pub fn mgg(t: &Term, n: &NormSpec) -> Term {
    let mut gen = VarGen::avoiding(std::iter::once(t));
    mgg_with(t, n, &mut gen)
}

/// [`mgg`] drawing fresh variables from `gen`.
pub fn mgg_with(t: &Term, n: &NormSpec, gen: &mut VarGen) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Struct(name, args) => {
            let rule = n.rule_for(&Functor::new(name.clone(), args.len()));
            Term::Struct(
                name.clone(),
                args.iter()
                    .zip(&rule.k)
                    .map(|(a, k)| if *k == 0 { gen.fresh() } else { mgg_with(a, n, gen) })
                    .collect(),
            )
        }
    }
}

/// Argument-wise [`mgg`]; the predicate symbol is never generalized.
pub fn mgg_atom(a: &Term, n: &NormSpec) -> Result<Term, NormError> {
    let mut gen = VarGen::avoiding(std::iter::once(a));
    mgg_atom_with(a, n, &mut gen)
}

pub fn mgg_atom_with(a: &Term, n: &NormSpec, gen: &mut VarGen) -> Result<Term, NormError> {
    match a {
        Term::Var(_) => Err(NormError::VariableAtom),
        Term::Struct(p, args) => Ok(Term::Struct(
            p.clone(),
            args.iter().map(|t| mgg_with(t, n, gen)).collect(),
        )),
    }
}

/// Conservative boundedness test: every non-constant functor of the
/// signature must have `m ≥ 1` and all `k_i ≥ 1`.
pub fn boundedness<'a>(
    n: &NormSpec,
    signature: impl IntoIterator<Item = &'a Functor>,
) -> Boundedness {
    let bounded = signature.into_iter().filter(|f| f.arity >= 1).all(|f| {
        let r = n.rule_for(f);
        r.m >= 1 && r.k.iter().all(|k| *k >= 1)
    });
    if bounded {
        Boundedness::Bounded
    } else {
        Boundedness::PossiblyUnbounded
    }
}
