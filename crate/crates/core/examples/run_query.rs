//! The depth-bounded SLD interpreter.

use std::error::Error;

use sct_pe::pe::run_query;
use sct_pe::syntax::{parse_goal, parse_program};

const PROGRAM: &str = "
    app([], L, L).
    app([H|T], L, [H|R]) :- app(T, L, R).
    nat(0).
    nat(s(X)) :- nat(X).
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let program = parse_program(PROGRAM)?;

    let r = run_query(&program, &parse_goal("app(X, Y, [a, b])")?, 100);
    for s in &r.answers {
        println!("{s}");
    }
    assert_eq!(r.answers.len(), 3);

    // An infinite branch is cut at the depth bound.
    let r = run_query(&program, &parse_goal("nat(X)")?, 4);
    println!("{} answers, cut off: {}", r.answers.len(), r.cutoff);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
