//! List length is not a bounded norm, so memoized atoms are generalized
//! with mgg before they reach the global level.

use std::error::Error;

use sct_pe::bta::{annotate, parse_entry, propagate_division};
use sct_pe::closure::{close, idempotents};
use sct_pe::norm::{boundedness, mgg, NormSpec};
use sct_pe::pe::{specialize, SpecializeOptions};
use sct_pe::scg::build_graphs;
use sct_pe::syntax::{parse_program, parse_term};

const PROGRAM: &str = "
    incList([], _, []).
    incList([X|R], I, L) :- iList(X, R, I, L).
    iList(X, R, I, [XI|RI]) :- add(I, X, XI), incList(R, I, RI).
    add(0, Y, Y).
    add(s(X), Y, s(Z)) :- add(X, Y, Z).
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let norm = NormSpec::list_length();
    let t = parse_term("[s(N), b]")?;
    println!("mgg({t}) = {}", mgg(&t, &norm));

    let program = parse_program(PROGRAM)?;
    println!("{:?}", boundedness(&norm, program.signature()));

    let (entry, bts) = parse_entry("incList/3: d,s,d")?;
    let division = propagate_division(&program, &entry, &bts)?;
    let idem = idempotents(&close(build_graphs(&program, &norm)))?;
    let ann = annotate(&program, &idem, &division, &norm)?;
    let goal = parse_term("incList(L, s(0), R)")?;
    let residual = specialize(&program, &ann, &norm, &goal, &SpecializeOptions::default())?;
    println!("requires mgg: {}, {} global atoms", ann.requires_mgg, residual.global.len());
    print!("{residual}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
