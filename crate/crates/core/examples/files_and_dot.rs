//! Saving documents as JSON, reading them back and drawing them.

use thincoalg::dot::export_dot;
use thincoalg::fixtures::{fork_automaton, fork_coalgebra};
use thincoalg::io::{load, save, Document};

fn main() -> thincoalg::Result<()> {
    let dir = std::env::temp_dir().join("thincoalg-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("fork.automaton.json");
    save(&Document::Automaton(fork_automaton()), &path)?;
    println!("wrote {}", path.display());

    let doc = load(&path)?;
    println!("read back, kind: {}", doc.kind());
    print!("{}", export_dot(&doc)?);
    print!("{}", export_dot(&Document::Coalgebra(fork_coalgebra()))?);
    Ok(())
}
