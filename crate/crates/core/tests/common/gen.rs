//! Random terms and programs. Programs come from a seed so failures can be
//! replayed.

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sct_pe::bta::BindingTime;
use sct_pe::syntax::{Clause, PredId, Program, Term};

const VARS: [&str; 4] = ["X", "Y", "Z", "W"];

/// Terms over `a`, `0`, `[]`, `s/1`, `./2`, `f/2` and the variables
/// X, Y, Z, W.
pub fn arb_term(depth: u32) -> BoxedStrategy<Term> {
    let leaf = prop_oneof![
        prop::sample::select(VARS.to_vec()).prop_map(Term::var),
        prop::sample::select(vec!["a", "0", "[]"]).prop_map(Term::constant),
    ];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("s", vec![t])),
            (inner.clone(), inner.clone()).prop_map(|(h, t)| Term::cons(h, t)),
            (inner.clone(), inner).prop_map(|(x, y)| Term::app("f", vec![x, y])),
        ]
    })
    .boxed()
}

pub fn arb_ground_term(depth: u32) -> BoxedStrategy<Term> {
    let leaf = prop::sample::select(vec!["a", "0", "[]"]).prop_map(Term::constant);
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("s", vec![t])),
            (inner.clone(), inner.clone()).prop_map(|(h, t)| Term::cons(h, t)),
            (inner.clone(), inner).prop_map(|(x, y)| Term::app("f", vec![x, y])),
        ]
    })
    .boxed()
}

pub fn random_ground(rng: &mut StdRng, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.3) {
        return Term::constant(["a", "0", "[]"][rng.gen_range(0..3)]);
    }
    match rng.gen_range(0..4) {
        0 | 1 => Term::app("s", vec![random_ground(rng, depth - 1)]),
        2 => Term::cons(random_ground(rng, depth - 1), random_ground(rng, depth - 1)),
        _ => Term::app("f", vec![random_ground(rng, depth - 1), random_ground(rng, depth - 1)]),
    }
}

/// A random program with an entry predicate `p0`, an entry division, the
/// entry atom to specialize, and test queries that are instances of it.
#[derive(Clone, Debug)]
pub struct RandomCase {
    pub seed: u64,
    pub program: Program,
    pub entry: PredId,
    pub entry_div: Vec<BindingTime>,
    pub goal: Term,
    pub queries: Vec<Term>,
}

fn head_pattern(rng: &mut StdRng, v: &mut Vec<String>, next: &mut usize) -> Term {
    let mut fresh = |v: &mut Vec<String>| {
        *next += 1;
        let name = format!("V{next}");
        v.push(name.clone());
        Term::var(name)
    };
    match rng.gen_range(0..6) {
        0 | 1 => fresh(v),
        2 => Term::app("s", vec![fresh(v)]),
        3 => {
            let h = fresh(v);
            Term::cons(h, fresh(v))
        }
        4 => {
            let x = fresh(v);
            Term::app("f", vec![x, fresh(v)])
        }
        _ => Term::constant(["a", "0", "[]"][rng.gen_range(0..3)]),
    }
}

fn body_arg(rng: &mut StdRng, vars: &[String], next: &mut usize) -> Term {
    let pick = |rng: &mut StdRng| -> Term {
        if vars.is_empty() {
            Term::constant("0")
        } else {
            Term::var(vars[rng.gen_range(0..vars.len())].clone())
        }
    };
    match rng.gen_range(0..10) {
        0..=5 => pick(rng),
        6 => Term::app("s", vec![pick(rng)]),
        7 => Term::constant(["a", "0", "[]"][rng.gen_range(0..3)]),
        8 => {
            let h = pick(rng);
            Term::cons(h, pick(rng))
        }
        _ => {
            *next += 1;
            Term::var(format!("L{next}"))
        }
    }
}

pub fn random_program(seed: u64) -> RandomCase {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4);
    let preds: Vec<PredId> = (0..n)
        .map(|i| PredId::new(format!("p{i}"), rng.gen_range(1..=3)))
        .collect();
    let mut clauses = Vec::new();
    let mut next = 0usize;
    for (i, p) in preds.iter().enumerate() {
        let base_args = (0..p.arity)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Term::constant(["a", "0", "[]"][rng.gen_range(0..3)])
                } else {
                    next += 1;
                    Term::var(format!("B{next}"))
                }
            })
            .collect();
        clauses.push(Clause::fact(Term::app(p.name.clone(), base_args)).unwrap());
        for _ in 0..rng.gen_range(1..=2) {
            let mut vars = Vec::new();
            let head: Vec<Term> = (0..p.arity)
                .map(|_| head_pattern(&mut rng, &mut vars, &mut next))
                .collect();
            let body_len = rng.gen_range(1..=2);
            let mut body = Vec::new();
            for _ in 0..body_len {
                // Calls go to the same or a later predicate most of the time,
                // with occasional back edges for mutual recursion.
                let target = if rng.gen_bool(0.7) {
                    &preds[rng.gen_range(i..n)]
                } else {
                    &preds[rng.gen_range(0..n)]
                };
                let args = (0..target.arity)
                    .map(|_| body_arg(&mut rng, &vars, &mut next))
                    .collect();
                body.push(Term::app(target.name.clone(), args));
            }
            clauses.push(Clause::new(Term::app(p.name.clone(), head), body).unwrap());
        }
    }
    let program = Program::new(clauses);
    let entry = preds[0].clone();
    let entry_div: Vec<BindingTime> = (0..entry.arity)
        .map(|_| {
            if rng.gen_bool(0.6) {
                BindingTime::Static
            } else {
                BindingTime::Dynamic
            }
        })
        .collect();
    let statics: Vec<Option<Term>> = entry_div
        .iter()
        .map(|b| b.is_static().then(|| random_ground(&mut rng, 3)))
        .collect();
    let mk = |dyns: &mut dyn FnMut(usize) -> Term| {
        let args = statics
            .iter()
            .enumerate()
            .map(|(i, s)| s.clone().unwrap_or_else(|| dyns(i)))
            .collect();
        Term::app(entry.name.clone(), args)
    };
    let goal = mk(&mut |i| Term::var(format!("Q{i}")));
    let mut queries = vec![goal.clone()];
    for _ in 0..2 {
        let q = mk(&mut |i| {
            if rng.gen_bool(0.5) {
                random_ground(&mut rng, 2)
            } else {
                Term::var(format!("Q{i}"))
            }
        });
        queries.push(q);
    }
    RandomCase {
        seed,
        program,
        entry,
        entry_div,
        goal,
        queries,
    }
}
