//! Linear size relations and the rational entailment check behind
//! right-propagation.

use std::error::Error;

use sct_pe::lincons::{parse_relations, placeholder, LinConstraint, Solver};
use sct_pe::norm::SizeExpr;
use sct_pe::syntax::PredId;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rels = parse_relations("q/2: {A1 > A2, A2 = 0, A1 >= 1}.")?;
    let q = rels.get(&PredId::new("q", 2)).unwrap();
    println!("q/2: {q}");

    let (a1, a2) = (SizeExpr::var(placeholder(1)), SizeExpr::var(placeholder(2)));
    let solver = Solver::default();
    let decrease = LinConstraint::gt(a1.minus(&a2));
    println!("{decrease}: {}", solver.entails(q, &decrease)?);

    let doubling = LinConstraint::ge(a2.minus(&a1.scaled(2)));
    match solver.countermodel(q, &doubling)? {
        Some(m) => {
            let at: Vec<String> = m.iter().map(|(v, x)| format!("{v} = {x}")).collect();
            println!("{doubling} fails at {}", at.join(", "));
        }
        None => println!("{doubling} holds"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
