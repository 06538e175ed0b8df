//! Thin and non-thin coalgebras, and minimisation by bisimulation.

use thincoalg::coalgebra::PointedCoalgebra;
use thincoalg::fixtures::{bag_signature, double_loop_coalgebra, fork_coalgebra, fork_signature};

fn main() -> thincoalg::Result<()> {
    let fork = fork_coalgebra();
    println!("fork thin: {}", fork.is_thin());
    println!("double self-loop thin: {}", double_loop_coalgebra().is_thin());

    // two states on one cycle: still thin
    let ring = PointedCoalgebra::from_rows(bag_signature(), "a", &[("a", "one", &["b"]), ("b", "one", &["a"])])?;
    println!("ring thin: {}", ring.is_thin());

    // a state on two cycles
    let eight =
        PointedCoalgebra::from_rows(fork_signature(), "a", &[("a", "pair", &["a", "b"]), ("b", "next", &["a"])])?;
    println!("figure eight thin: {}", eight.is_thin());

    // the ring collapses to a single state
    let m = ring.minimize();
    println!("ring minimised to {} state(s)", m.len());
    Ok(())
}
