//! ω-semigroups, Büchi automata and determinisation on lassos.

use thincoalg::omega::{determinize_to_dpw, nbw_from_recognizer, Lasso, Nbw, Recognizer, WilkeAlgebra};

fn main() -> thincoalg::Result<()> {
    // "infinitely many b" over {a, b}: S = {a+, words with a b} and
    // W = {finitely many b, infinitely many b}; a finite prefix never
    // changes the infinite value
    let wilke = WilkeAlgebra::new(2, 2, vec![0, 1, 1, 1], vec![0, 1, 0, 1], vec![0, 1])?;
    println!("Wilke axioms hold: {}", wilke.validate().is_empty());
    let rec = Recognizer::new(wilke, vec![0, 1], vec![false, true])?;

    let nbw = nbw_from_recognizer(&rec)?;
    let dpw = determinize_to_dpw(&nbw, 1000)?;
    println!("recogniser -> Büchi with {} states -> parity with {} states", nbw.len(), dpw.len());

    for (stem, cycle) in [(vec![1], vec![0]), (vec![0, 0], vec![0, 1]), (vec![], vec![1])] {
        let l = Lasso::new(stem, cycle)?;
        println!("{l:?}: recogniser {}, parity {}", rec.accepts_lasso(&l), dpw.accepts_lasso(&l));
    }

    // "finitely many a" needs nondeterminism: guess when the last a was read
    let nbw = Nbw::new(2, vec![vec![vec![0], vec![0, 1]], vec![vec![], vec![1]]], vec![0], vec![false, true])?;
    let dpw = determinize_to_dpw(&nbw, 1000)?;
    let mismatches = Lasso::enumerate(2, 6).iter().filter(|l| nbw.accepts_lasso(l) != dpw.accepts_lasso(l)).count();
    println!("finitely many a: {} parity states, {mismatches} mismatches on short lassos", dpw.len());
    Ok(())
}
