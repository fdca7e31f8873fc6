//! Deriving a division from an entry pattern and annotating calls as
//! unfold or memo.

use std::error::Error;

use sct_pe::bta::{annotate, parse_entry, propagate_division};
use sct_pe::closure::{close, idempotents};
use sct_pe::norm::NormSpec;
use sct_pe::scg::build_graphs;
use sct_pe::syntax::parse_program;

const PROGRAM: &str = "
    incList([], _, []).
    incList([X|R], I, L) :- iList(X, R, I, L).
    iList(X, R, I, [XI|RI]) :- add(I, X, XI), incList(R, I, RI).
    add(0, Y, Y).
    add(s(X), Y, s(Z)) :- add(X, Y, Z).
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let program = parse_program(PROGRAM)?;
    let norm = NormSpec::term_size();
    let (entry, bts) = parse_entry("incList/3: d,s,d")?;
    let division = propagate_division(&program, &entry, &bts)?;
    print!("{division}");

    let idem = idempotents(&close(build_graphs(&program, &norm)))?;
    let ann = annotate(&program, &idem, &division, &norm)?;
    for (p, m) in &ann.marks {
        println!("{p}: {m}");
    }
    for d in &ann.diagnostics {
        println!("% {d}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
