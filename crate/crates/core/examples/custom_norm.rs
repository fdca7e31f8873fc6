//! A norm read from a norm file, and the orders it induces.

use std::error::Error;

use sct_pe::norm::{boundedness, compare, norm_of, NormSpec};
use sct_pe::syntax::{parse_program, parse_term};

const NORM: &str = "
% Trees count their nodes; the payload does not matter.
node/3: m=1, k=[1,0,1].
default: zero.
";

const PROGRAM: &str = "
    walk(leaf).
    walk(node(L, _, R)) :- walk(L), walk(R).
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let norm = NormSpec::parse("tree", NORM)?;
    let a = parse_term("node(L, V, node(leaf, W, R))")?;
    let b = parse_term("node(L, big(V, W), R)")?;
    let (na, nb) = (norm_of(&a, &norm), norm_of(&b, &norm));
    println!("|{a}| = {na}");
    println!("|{b}| = {nb}");
    println!("{:?}", compare(&na, &nb));

    let program = parse_program(PROGRAM)?;
    println!("{:?}", boundedness(&norm, program.signature()));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
