//! Graphviz output for coalgebras, automata and runs.

use std::fmt::Write;

use crate::automaton::{Acceptance, FAutomaton};
use crate::coalgebra::PointedCoalgebra;
use crate::error::{Error, Result};
use crate::io::{Document, RunDocument};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One edge per argument position, so multiplicities show as parallel
/// edges. The root is drawn with a double border.
pub fn coalgebra_dot(c: &PointedCoalgebra) -> String {
    let mut out = String::from("digraph coalgebra {\n");
    for x in 0..c.len() {
        let shape = if x == c.root() { "doublecircle" } else { "circle" };
        let op = c.sig().op(c.xi(x).op()).name();
        writeln!(out, "  n{x} [label={}, shape={shape}, xlabel={}];", quote(c.name(x)), quote(op)).unwrap();
    }
    for x in 0..c.len() {
        for (i, y) in c.xi(x).args().iter().enumerate() {
            writeln!(out, "  n{x} -> n{y} [label=\"{i}\"];").unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// States as ellipses, each transition as a box pointing at its argument
/// states. Initial states get a double border.
pub fn automaton_dot(a: &FAutomaton) -> String {
    let mut out = String::from("digraph automaton {\n");
    for q in 0..a.len() {
        let mut label = a.name(q).to_string();
        if let Acceptance::Parity(p) = a.acceptance() {
            write!(label, " : {}", p[q]).unwrap();
        }
        let peripheries = if a.initial().binary_search(&q).is_ok() { 2 } else { 1 };
        writeln!(out, "  q{q} [label={}, peripheries={peripheries}];", quote(&label)).unwrap();
    }
    for q in 0..a.len() {
        for (k, t) in a.delta(q).iter().enumerate() {
            let op = a.sig().op(t.op()).name();
            writeln!(out, "  t{q}_{k} [label={}, shape=box];", quote(op)).unwrap();
            writeln!(out, "  q{q} -> t{q}_{k};").unwrap();
            for (i, p) in t.args().iter().enumerate() {
                writeln!(out, "  t{q}_{k} -> q{p} [label=\"{i}\"];").unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Nodes labelled with their subject and automaton states.
pub fn run_dot(r: &RunDocument) -> String {
    let c = &r.shape;
    let mut out = String::from("digraph run {\n");
    for n in 0..c.len() {
        let label = format!("{}\\n({}, {})", c.name(n), r.rho_x[n], r.rho_q[n]);
        let shape = if n == c.root() { "doubleoctagon" } else { "box" };
        writeln!(out, "  r{n} [label=\"{}\", shape={shape}];", label.replace('"', "\\\"")).unwrap();
    }
    for n in 0..c.len() {
        for (i, m) in c.xi(n).args().iter().enumerate() {
            writeln!(out, "  r{n} -> r{m} [label=\"{i}\"];").unwrap();
        }
    }
    out.push_str("}\n");
    out
}

pub fn export_dot(doc: &Document) -> Result<String> {
    match doc {
        Document::Coalgebra(c) => Ok(coalgebra_dot(c)),
        Document::Automaton(a) => Ok(automaton_dot(a)),
        Document::Run(r) => Ok(run_dot(r)),
        other => Err(Error::Invalid(format!("cannot draw a {} document", other.kind()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fork_automaton, fork_coalgebra};

    #[test]
    fn fork_coalgebra_edges() {
        let text = coalgebra_dot(&fork_coalgebra());
        let edges: Vec<&str> = text.lines().filter(|l| l.contains("->")).collect();
        assert_eq!(edges, ["  n0 -> n1 [label=\"0\"];", "  n0 -> n2 [label=\"1\"];", "  n2 -> n2 [label=\"0\"];"]);
    }

    #[test]
    fn empty_automaton_is_header_only() {
        let a = fork_automaton();
        let empty =
            FAutomaton::new(a.sig().clone(), Vec::new(), Vec::new(), Vec::new(), Acceptance::Parity(Vec::new()))
                .unwrap();
        assert_eq!(automaton_dot(&empty), "digraph automaton {\n}\n");
    }
}
