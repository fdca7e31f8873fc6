//! Specializing a program for a partially known call and checking that the
//! residual program answers a query like the original.

use std::error::Error;

use sct_pe::bta::{annotate, parse_entry, propagate_division};
use sct_pe::closure::{close, idempotents};
use sct_pe::norm::NormSpec;
use sct_pe::pe::{run_query, specialize, SpecializeOptions};
use sct_pe::scg::build_graphs;
use sct_pe::syntax::{parse_program, parse_term, Term};

const PROGRAM: &str = "
    power(0, _, s(0)).
    power(s(N), X, R) :- power(N, X, R1), mult(X, R1, R).
    mult(0, _, 0).
    mult(s(X), Y, Z) :- mult(X, Y, Z1), add(Y, Z1, Z).
    add(0, Y, Y).
    add(s(X), Y, s(Z)) :- add(X, Y, Z).
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let program = parse_program(PROGRAM)?;
    let norm = NormSpec::term_size();
    let (entry, bts) = parse_entry("power/3: s,d,d")?;
    let division = propagate_division(&program, &entry, &bts)?;
    let idem = idempotents(&close(build_graphs(&program, &norm)))?;
    let ann = annotate(&program, &idem, &division, &norm)?;

    let goal = parse_term("power(s(s(0)), X, R)")?;
    let residual = specialize(&program, &ann, &norm, &goal, &SpecializeOptions::default())?;
    print!("{residual}");

    let query = parse_term("power(s(s(0)), s(s(s(0))), R)")?;
    let renamed = Term::app(residual.entry.functor().unwrap().name, query.args().to_vec());
    let before = run_query(&program, &[query], 1000);
    let after = run_query(&residual.program, &[renamed], 1000);
    for s in &after.answers {
        println!("{s}");
    }
    assert_eq!(before, after);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
