//! Small built-in instances used by the examples, the CLI tests and the
//! test suites.

use std::sync::Arc;

use crate::automaton::{Acceptance, FAutomaton};
use crate::coalgebra::PointedCoalgebra;
use crate::functor::Signature;

/// `pair(X, X) + next(X) + leaf`.
pub fn fork_signature() -> Arc<Signature> {
    Arc::new(Signature::from_cycles(&[("pair", 2, &[]), ("next", 1, &[]), ("leaf", 0, &[])]).expect("valid signature"))
}

/// `x1 ↦ pair(x2, x3)`, `x2 ↦ leaf`, `x3 ↦ next(x3)`.
pub fn fork_coalgebra() -> PointedCoalgebra {
    PointedCoalgebra::from_rows(
        fork_signature(),
        "x1",
        &[("x1", "pair", &["x2", "x3"]), ("x2", "leaf", &[]), ("x3", "next", &["x3"])],
    )
    .expect("valid coalgebra")
}

/// Accepts a fork whose right branch visits `q3` infinitely often; the
/// loop may alternate between `q3` and `q4`, so runs are not unique.
pub fn fork_automaton() -> FAutomaton {
    FAutomaton::from_rows(
        fork_signature(),
        &["q1"],
        &[
            ("q1", &[("pair", &["q2", "q3"])]),
            ("q2", &[("leaf", &[])]),
            ("q3", &[("next", &["q3"]), ("next", &["q4"])]),
            ("q4", &[("next", &["q3"])]),
        ],
        Acceptance::Parity(vec![1, 1, 2, 1]),
    )
    .expect("valid automaton")
}

/// Bag of two: `bag{X, X} + one(X) + nil`.
pub fn bag_signature() -> Arc<Signature> {
    Arc::new(
        Signature::from_cycles(&[("bag", 2, &["(0 1)"]), ("one", 1, &[]), ("nil", 0, &[])]).expect("valid signature"),
    )
}

/// A single state whose bag holds itself twice: two parallel self-loops.
pub fn double_loop_coalgebra() -> PointedCoalgebra {
    PointedCoalgebra::from_rows(bag_signature(), "x", &[("x", "bag", &["x", "x"])]).expect("valid coalgebra")
}
