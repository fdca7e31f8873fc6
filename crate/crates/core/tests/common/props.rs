//! Property checks shared by the proptest suite and the acceptance harness.
//! Each takes generated inputs and fails through `prop_assert!`.

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use sct_pe::closure::close;
use sct_pe::lincons::{ConstraintStore, LinConstraint, Relation, Solver};
use sct_pe::norm::{compare, mgg, norm_of, CompareResult, NormSpec, SizeExpr};
use sct_pe::scg::{build_graphs, concat, Label, SizeChangeGraph};
use sct_pe::syntax::{is_variant, match_term, PredId, Term};

use super::gen::{arb_ground_term, arb_term, random_program};
use super::oracle::{closure_by_paths, grid_counterexample};

pub type PropResult = Result<(), TestCaseError>;

#[derive(Clone, Copy, Debug)]
pub enum NormKind {
    TermSize,
    ListLength,
    /// `s/1` counts 1 + twice its argument, `f/2` counts 3 + its first
    /// argument, other functors as term size.
    Custom,
}

impl NormKind {
    pub fn spec(self) -> NormSpec {
        match self {
            NormKind::TermSize => NormSpec::term_size(),
            NormKind::ListLength => NormSpec::list_length(),
            NormKind::Custom => NormSpec::parse(
                "custom",
                "s/1: m=1, k=[2].\nf/2: m=3, k=[1,0].\ndefault: term_size.",
            )
            .unwrap(),
        }
    }

    /// Size of a ground term, computed directly from the definition.
    pub fn size(self, t: &Term) -> i64 {
        let Term::Struct(f, args) = t else {
            panic!("not ground: {t}")
        };
        match (self, f.as_str(), args.len()) {
            (NormKind::ListLength, ".", 2) => 1 + self.size(&args[1]),
            (NormKind::ListLength, _, _) => 0,
            (NormKind::Custom, "s", 1) => 1 + 2 * self.size(&args[0]),
            (NormKind::Custom, "f", 2) => 3 + self.size(&args[0]),
            _ => args.len() as i64 + args.iter().map(|a| self.size(a)).sum::<i64>(),
        }
    }
}

pub fn arb_norm() -> impl Strategy<Value = NormKind> {
    prop_oneof![
        Just(NormKind::TermSize),
        Just(NormKind::ListLength),
        Just(NormKind::Custom)
    ]
}

const VARS: [&str; 4] = ["X", "Y", "Z", "W"];

fn substitute(t: &Term, s: &[Term]) -> Term {
    t.map_vars(&mut |v| {
        VARS.iter()
            .position(|x| *x == v)
            .map(|i| s[i].clone())
            .unwrap_or_else(|| Term::var(v))
    })
}

pub fn arb_subst(ground: bool) -> BoxedStrategy<Vec<Term>> {
    let t = if ground { arb_ground_term(3) } else { arb_term(3) };
    prop::collection::vec(t, 4).boxed()
}

/// `||tσ|| = ||t||` with each variable replaced by the norm of its image.
pub fn norm_homomorphism(n: NormKind, t: &Term, s: &[Term]) -> PropResult {
    let spec = n.spec();
    let lhs = norm_of(&substitute(t, s), &spec);
    let rhs = norm_of(t, &spec).substitute(&|v| {
        VARS.iter().position(|x| *x == v).map(|i| norm_of(&s[i], &spec))
    });
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

/// Ground norms agree with the direct definition, and a `Strict` or
/// `NonStrict` comparison holds under a sampled grounding.
pub fn compare_sound(n: NormKind, t1: &Term, t2: &Term, g: &[Term]) -> PropResult {
    let spec = n.spec();
    let (a, b) = (substitute(t1, g), substitute(t2, g));
    let (sa, sb) = (n.size(&a), n.size(&b));
    prop_assert_eq!(norm_of(&a, &spec), SizeExpr::constant(sa));
    match compare(&norm_of(t1, &spec), &norm_of(t2, &spec)) {
        CompareResult::Strict => prop_assert!(sa > sb, "{} > {} failed at {} vs {}", t1, t2, sa, sb),
        CompareResult::NonStrict => prop_assert!(sa >= sb, "{} >= {} failed at {} vs {}", t1, t2, sa, sb),
        CompareResult::Unknown => {}
    }
    Ok(())
}

/// Four predicate arities and, for each of three graphs in a chain, raw
/// edges (from, to, strict) reduced modulo the arities.
pub type Chain = (Vec<usize>, Vec<Vec<(usize, usize, bool)>>);

pub fn arb_chain() -> impl Strategy<Value = Chain> {
    (
        prop::collection::vec(1usize..=3, 4),
        prop::collection::vec(prop::collection::vec((0usize..3, 0usize..3, any::<bool>()), 0..6), 3),
    )
}

pub fn chain_graphs((arities, edges): &Chain) -> Vec<SizeChangeGraph> {
    let preds: Vec<PredId> = arities
        .iter()
        .enumerate()
        .map(|(i, a)| PredId::new(format!("q{i}"), *a))
        .collect();
    (0..3)
        .map(|i| {
            let mut g = SizeChangeGraph::new(preds[i].clone(), preds[i + 1].clone())
                .with_id(sct_pe::scg::GraphId(i as u32 + 1));
            for &(f, t, strict) in &edges[i] {
                let label = if strict { Label::Strict } else { Label::NonStrict };
                g.add_edge(f % arities[i] + 1, t % arities[i + 1] + 1, label).unwrap();
            }
            g
        })
        .collect()
}

/// Concatenation is associative, and an edge of `G•H` is strict exactly
/// when some connecting path has a strict edge.
pub fn concat_laws(c: &Chain) -> PropResult {
    let gs = chain_graphs(c);
    let (g, h, k) = (&gs[0], &gs[1], &gs[2]);
    let left = concat(&concat(g, h).unwrap(), k).unwrap();
    let right = concat(g, &concat(h, k).unwrap()).unwrap();
    prop_assert_eq!(&left, &right);
    prop_assert_eq!(left.idset(), right.idset());

    let gh = concat(g, h).unwrap();
    let mut expected: BTreeMap<(usize, usize), Label> = BTreeMap::new();
    for (i, j, l1) in g.edges() {
        for (j2, k, l2) in h.edges() {
            if j == j2 {
                let l = if l1 == Label::Strict || l2 == Label::Strict {
                    Label::Strict
                } else {
                    Label::NonStrict
                };
                let e = expected.entry((i, k)).or_insert(l);
                if l == Label::Strict {
                    *e = Label::Strict;
                }
            }
        }
    }
    let got: BTreeMap<(usize, usize), Label> = gh.edges().map(|(i, k, l)| ((i, k), l)).collect();
    prop_assert_eq!(got, expected);
    Ok(())
}

/// The worklist closure of a random program's graphs equals the set of
/// compositions of all graph paths.
pub fn closure_matches_paths(seed: u64) -> PropResult {
    let r = random_program(seed);
    let base = build_graphs(&r.program, &NormSpec::term_size());
    let closed = close(base.clone());
    let got: std::collections::HashSet<SizeChangeGraph> = closed.iter().cloned().collect();
    prop_assert_eq!(got.len(), closed.len());
    prop_assert_eq!(got, closure_by_paths(&base));
    Ok(())
}

const LIN_VARS: [&str; 3] = ["X", "Y", "Z"];

/// Coefficients for X, Y, Z, a constant, and a relation.
pub type RawConstraint = ([i64; 3], i64, u8);

pub fn arb_constraint() -> impl Strategy<Value = RawConstraint> {
    ([-2i64..=2, -2..=2, -2..=2], -3i64..=3, 0u8..3)
}

pub fn constraint((cs, c, rel): &RawConstraint) -> LinConstraint {
    let expr = LIN_VARS
        .iter()
        .zip(cs)
        .fold(SizeExpr::constant(*c), |e, (v, k)| e.plus(&SizeExpr::term(*v, *k)));
    let rel = match rel {
        0 => Relation::Ge,
        1 => Relation::Gt,
        _ => Relation::Eq,
    };
    LinConstraint::new(expr, rel)
}

/// A goal that is either random or, when `derived` is set, the sum of two
/// store constraints read as `>= 0` plus a non-negative slack, which every
/// model of the store satisfies.
pub type Goal = (RawConstraint, Option<(usize, usize, i64)>);

pub fn arb_goal() -> impl Strategy<Value = Goal> {
    (arb_constraint(), prop::option::of((0usize..4, 0usize..4, 0i64..3)))
}

/// Rational entailment never contradicts an integer point of the grid
/// `[0, 6]^3`, every countermodel it reports is one, and derived goals are
/// entailed.
pub fn entails_vs_grid(store: &[RawConstraint], goal: &Goal) -> PropResult {
    let s = ConstraintStore::from_constraints(store.iter().map(constraint));
    let g = match goal.1 {
        None => constraint(&goal.0),
        Some((i, j, slack)) => {
            let (a, b) = (constraint(&store[i % store.len()]), constraint(&store[j % store.len()]));
            LinConstraint::ge(a.expr.plus(&b.expr).plus_constant(slack))
        }
    };
    let vars: Vec<String> = LIN_VARS.iter().map(|v| v.to_string()).collect();
    let solver = Solver::default();
    match solver.countermodel(&s, &g).unwrap() {
        None => {
            let cex = grid_counterexample(&s, &g, &vars, 6);
            prop_assert!(cex.is_none(), "{} entails {} but {:?} refutes it", s, g, cex);
        }
        Some(m) => {
            prop_assert!(goal.1.is_none(), "{} does not entail derived goal {}", s, g);
            prop_assert!(s.holds_rational(&m), "model {:?} violates {}", m, s);
            prop_assert!(!g.holds_rational(&m), "model {:?} satisfies {}", m, g);
        }
    }
    Ok(())
}

/// `mgg(t)` has the norm of `t`, generalizes `t`, and is a fixpoint up to
/// variable renaming.
pub fn mgg_laws(n: NormKind, t: &Term) -> PropResult {
    let spec = n.spec();
    let m = mgg(t, &spec);
    prop_assert_eq!(norm_of(&m, &spec), norm_of(t, &spec));
    prop_assert!(match_term(&m, t).is_some(), "{} is not an instance of {}", t, m);
    prop_assert!(is_variant(&mgg(&m, &spec), &m));
    Ok(())
}
