//! Turning the ambiguous fork automaton into an unambiguous one.

use thincoalg::automaton::{accepts, ambiguity_probe};
use thincoalg::constructions::{disambiguate, Budget};
use thincoalg::fixtures::{fork_automaton, fork_coalgebra};

fn main() -> thincoalg::Result<()> {
    let a = fork_automaton();
    let c = fork_coalgebra();
    let (d, report) = disambiguate(&a, &Budget::default())?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report"));

    println!("before: {}", ambiguity_probe(&a, &c, 6)?);
    println!("after:  {}", ambiguity_probe(&d, &c, c.len() * d.len())?);
    assert_eq!(accepts(&a, &c)?, accepts(&d, &c)?);
    Ok(())
}
