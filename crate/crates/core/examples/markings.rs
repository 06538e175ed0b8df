//! The power-set algebra of an automaton and the marking of a coalgebra.

use thincoalg::algebra::{check_marking, compute_marking, language_member, Marking};
use thincoalg::constructions::{automaton_algebra, canonical_run, Budget};
use thincoalg::fixtures::{fork_automaton, fork_coalgebra};

fn main() -> thincoalg::Result<()> {
    let a = fork_automaton();
    let c = fork_coalgebra();
    let alg = automaton_algebra(&a, &Budget::default())?;
    println!(
        "carrier {}, contexts {}, semigroup {} + {}",
        alg.len(),
        alg.contexts().len(),
        alg.rational().wilke().n_finite(),
        alg.rational().wilke().n_infinite()
    );

    let m = compute_marking(&alg, &c)?;
    for x in 0..c.len() {
        println!("  {} -> {}", c.name(x), alg.carrier()[*m.value(x)]);
    }
    println!("member: {}", language_member(&alg, &c)?);

    // any other labelling breaks one of the two conditions
    let mut wrong = m.values().to_vec();
    wrong[2] = 0b0100;
    let report = check_marking(&alg, &c, &Marking::new(wrong))?;
    println!("{{q3}} at x3: local failures {:?}, cycle failures {:?}", report.local_failures, report.cycle_failures);

    let run = canonical_run(&alg, &c)?;
    println!("canonical run has {} nodes", run.len());
    Ok(())
}
