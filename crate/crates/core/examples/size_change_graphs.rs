//! Size-change graphs of a small program, printed as text and as DOT.

use std::error::Error;

use sct_pe::cli::render_dot;
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
    let graphs = build_graphs(&program, &NormSpec::term_size());
    for g in &graphs {
        println!("{g}");
    }
    assert_eq!(graphs.len(), 4);
    print!("{}", render_dot(&graphs));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
