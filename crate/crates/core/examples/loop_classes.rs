//! Closing the graphs under composition, keeping the idempotent ones and
//! grouping them by the base graphs they came from.

use std::error::Error;

use sct_pe::closure::{close, idempotents, loop_classes};
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
    let closure = close(build_graphs(&program, &NormSpec::term_size()));
    println!("{} graphs in the closure", closure.len());
    let idem = idempotents(&closure)?;
    for g in &idem {
        println!("idempotent: {g}");
    }
    for class in loop_classes(&idem) {
        let preds: Vec<String> = class.predicates.iter().map(|p| p.to_string()).collect();
        println!("loop class {}: {}", class.idset_string(), preds.join(", "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
