//! One memo per unsafe loop class instead of one per non-terminating
//! predicate.

use std::error::Error;

use sct_pe::bta::{annotate, annotate_min_memo, Division};
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
    let norm = NormSpec::term_size();
    let division = Division::parse("incList/3: d,s,d.\niList/4: d,d,s,d.\nadd/3: s,d,d.")?;
    let idem = idempotents(&close(build_graphs(&program, &norm)))?;

    let baseline = annotate(&program, &idem, &division, &norm)?;
    let min = annotate_min_memo(&program, &loop_classes(&idem), &division, &norm)?;
    let names = |a: &sct_pe::bta::Annotation| {
        a.memo_set().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
    };
    println!("baseline memo: {}", names(&baseline));
    println!("min-memo memo: {}", names(&min));
    assert!(baseline.unfold_set().is_subset(&min.unfold_set()));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
