//! Thin coalgebras for analytic set functors, automata running on them,
//! and the construction that makes such automata unambiguous.
//!
//! Start with [`functor::Signature`] and [`coalgebra::PointedCoalgebra`],
//! then [`automaton::FAutomaton`] and [`constructions::disambiguate`].

pub mod algebra;
pub mod automaton;
pub mod cli;
pub mod coalgebra;
pub mod constructions;
pub mod dot;
pub mod error;
pub mod fixtures;
pub mod functor;
pub mod graph;
pub mod io;
pub mod omega;

pub use error::{Error, Result};
