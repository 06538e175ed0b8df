//! Context decomposition over an ordered triple and an unordered bag.

use thincoalg::functor::Signature;

fn main() -> thincoalg::Result<()> {
    let triple = Signature::from_cycles(&[("a", 3, &[])])?;
    let bag = Signature::from_cycles(&[("bag", 3, &["(0 1)", "(0 1 2)"])])?;

    for (sig, op, args) in [(&triple, "a", ["x0", "x1", "x2"]), (&bag, "bag", ["x0", "x0", "x1"])] {
        let e = sig.felem_named(op, args.to_vec())?;
        println!("element      {}", e.display_with(sig, |x| *x));
        let d = sig.decompose(&e);
        println!("decomposed   {}", d.display_with(sig, |(c, x)| format!("<{} | {x}>", c.display_with(sig, |v| *v))));
        for (c, x) in sig.decompositions_of(&e) {
            println!("  plug({}, {x}) = {}", c.display_with(sig, |v| *v), sig.plug(&c, x).display_with(sig, |v| *v));
        }
    }

    // bag elements are identified up to reordering
    let a = bag.felem_named("bag", vec![1, 0, 0])?;
    let b = bag.felem_named("bag", vec![0, 1, 0])?;
    assert_eq!(a, b);
    println!("bag(1, 0, 0) == bag(0, 1, 0)");
    Ok(())
}
