//! Runs of an automaton on a coalgebra, and why the fork automaton is
//! ambiguous.

use thincoalg::automaton::{accepts, ambiguity_probe, enumerate_accepting_preruns, AmbiguityVerdict};
use thincoalg::fixtures::{fork_automaton, fork_coalgebra};

fn main() -> thincoalg::Result<()> {
    let a = fork_automaton();
    let c = fork_coalgebra();
    println!("accepted: {}", accepts(&a, &c)?);

    let runs = enumerate_accepting_preruns(&a, &c, 5)?;
    println!("{} run(s) with at most 5 nodes:", runs.runs.len());
    for r in &runs.runs {
        print!("{}", r.describe(&c, &a));
        println!();
    }

    match ambiguity_probe(&a, &c, 6)? {
        AmbiguityVerdict::Ambiguous(r1, r2) => {
            println!("ambiguous; two witnesses have {} and {} nodes", r1.len(), r2.len())
        }
        v => println!("{v}"),
    }
    Ok(())
}
