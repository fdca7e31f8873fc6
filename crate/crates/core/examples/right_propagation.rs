//! Success relations of a completely unfoldable predicate strengthen the
//! graphs of the calls to its right.

use std::collections::BTreeSet;
use std::error::Error;

use sct_pe::bta::{annotate, Division};
use sct_pe::closure::{close, idempotents};
use sct_pe::lincons::parse_relations;
use sct_pe::norm::NormSpec;
use sct_pe::scg::{build_graphs, build_graphs_rp};
use sct_pe::syntax::{parse_program, PredId};

const PROGRAM: &str = "
    p(X) :- q(X, Y), p(Y).
    q(s(0), 0).
    q(s(X), Y) :- q(X, Y).
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let program = parse_program(PROGRAM)?;
    let norm = NormSpec::term_size();
    for g in build_graphs(&program, &norm) {
        println!("plain:      {g}");
    }

    let rels = parse_relations("q/2: {A1 > A2, A2 = 0, A1 >= 1}.")?;
    let unfoldable = BTreeSet::from([PredId::new("q", 2)]);
    let rp = build_graphs_rp(&program, &norm, &unfoldable, &rels)?;
    for g in &rp.graphs {
        println!("propagated: {g}");
    }

    let division = Division::parse("p/1: s.\nq/2: s,d.")?;
    let idem = idempotents(&close(rp.graphs))?;
    let ann = annotate(&program, &idem, &division, &norm)?;
    println!("p/1: {}", ann.mark(&PredId::new("p", 1)));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
