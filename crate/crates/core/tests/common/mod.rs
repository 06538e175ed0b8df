//! Corpora and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thincoalg::algebra::RationalCoherentAlgebra;
use thincoalg::automaton::{Acceptance, FAutomaton, StateRow};
use thincoalg::coalgebra::PointedCoalgebra;
use thincoalg::constructions::{automaton_algebra, Budget};
use thincoalg::fixtures::{bag_signature, fork_automaton, fork_coalgebra, fork_signature};
use thincoalg::functor::Signature;

pub const SEED: u64 = 0x7_11_1c;

pub fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn coalg(sig: &Arc<Signature>, root: &str, rows: &[(&str, &str, &[&str])]) -> PointedCoalgebra {
    PointedCoalgebra::from_rows(sig.clone(), root, rows).expect("corpus coalgebra")
}

/// Hand-written thin coalgebras over the fork signature.
fn fork_handwritten() -> Vec<PointedCoalgebra> {
    let s = fork_signature();
    vec![
        fork_coalgebra(),
        coalg(&s, "a", &[("a", "leaf", &[])]),
        coalg(&s, "a", &[("a", "next", &["a"])]),
        coalg(&s, "a", &[("a", "next", &["b"]), ("b", "leaf", &[])]),
        coalg(&s, "a", &[("a", "pair", &["b", "b"]), ("b", "leaf", &[])]),
        coalg(&s, "a", &[("a", "pair", &["b", "c"]), ("b", "next", &["b"]), ("c", "next", &["c"])]),
        coalg(&s, "a", &[("a", "next", &["b"]), ("b", "next", &["a"])]),
        coalg(&s, "a", &[("a", "pair", &["b", "a"]), ("b", "leaf", &[])]),
        coalg(&s, "a", &[("a", "pair", &["a", "b"]), ("b", "next", &["b"])]),
        coalg(&s, "a", &[("a", "next", &["b"]), ("b", "pair", &["c", "a"]), ("c", "leaf", &[])]),
        coalg(
            &s,
            "a",
            &[
                ("a", "pair", &["b", "c"]),
                ("b", "pair", &["d", "d"]),
                ("c", "next", &["e"]),
                ("d", "leaf", &[]),
                ("e", "next", &["c"]),
            ],
        ),
        coalg(
            &s,
            "a",
            &[
                ("a", "pair", &["b", "c"]),
                ("b", "next", &["d"]),
                ("c", "pair", &["e", "f"]),
                ("d", "next", &["b"]),
                ("e", "leaf", &[]),
                ("f", "next", &["f"]),
            ],
        ),
        coalg(&s, "a", &[("a", "next", &["b"]), ("b", "next", &["c"]), ("c", "pair", &["d", "b"]), ("d", "leaf", &[])]),
        coalg(&s, "a", &[("a", "pair", &["b", "b"]), ("b", "next", &["b"])]),
    ]
}

/// Every coalgebra over the fork signature with `n` states, all reachable
/// from state 0.
fn fork_enumerated(n: usize) -> Vec<PointedCoalgebra> {
    let s = fork_signature();
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut choices: Vec<(&str, Vec<usize>)> = vec![("leaf", vec![])];
    choices.extend((0..n).map(|a| ("next", vec![a])));
    choices.extend((0..n * n).map(|ab| ("pair", vec![ab / n, ab % n])));
    let rows = vec![choices; n];
    let mut shapes: Vec<Vec<(&str, Vec<usize>)>> = Vec::new();
    let mut idx = vec![0; n];
    loop {
        shapes.push((0..n).map(|i| rows[i][idx[i]].clone()).collect());
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < rows[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    let mut out = Vec::new();
    for shape in shapes {
        let xi = shape.iter().map(|(op, args)| s.felem_named(op, args.clone()).unwrap()).collect();
        let c = PointedCoalgebra::new(s.clone(), names.clone(), xi, 0).unwrap();
        if c.reachable_mask().iter().all(|&b| b) {
            out.push(c);
        }
    }
    out
}

/// Thirty pairwise non-isomorphic thin coalgebras over the fork signature.
pub fn fork_corpus() -> Vec<PointedCoalgebra> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |c: PointedCoalgebra, out: &mut Vec<PointedCoalgebra>| {
        if c.is_thin() && seen.insert(c.canonical_form(None)) {
            out.push(c);
        }
    };
    for c in fork_handwritten() {
        push(c, &mut out);
    }
    // fill up with an even spread of the small enumerated ones
    let mut extra = Vec::new();
    for c in fork_enumerated(3) {
        push(c, &mut extra);
    }
    let need = 30 - out.len();
    out.extend((0..need).map(|i| extra[i * extra.len() / need].clone()));
    assert_eq!(out.len(), 30, "fork corpus too small");
    out
}

/// Thin coalgebras over the bag signature (the bag is unordered).
pub fn bag_corpus() -> Vec<PointedCoalgebra> {
    let s = bag_signature();
    vec![
        coalg(&s, "a", &[("a", "nil", &[])]),
        coalg(&s, "a", &[("a", "bag", &["b", "c"]), ("b", "nil", &[]), ("c", "one", &["c"])]),
        coalg(&s, "a", &[("a", "bag", &["b", "b"]), ("b", "nil", &[])]),
        coalg(&s, "a", &[("a", "one", &["a"])]),
        coalg(&s, "a", &[("a", "bag", &["b", "a"]), ("b", "nil", &[])]),
        coalg(&s, "a", &[("a", "bag", &["b", "b"]), ("b", "one", &["b"])]),
        coalg(&s, "a", &[("a", "bag", &["b", "c"]), ("b", "one", &["d"]), ("c", "nil", &[]), ("d", "one", &["b"])]),
    ]
}

/// The thinness corpus: thin and non-thin cases over both signatures,
/// including two parallel self-loops.
pub fn thinness_corpus() -> Vec<PointedCoalgebra> {
    let f = fork_signature();
    let b = bag_signature();
    let mut out = vec![
        thincoalg::fixtures::double_loop_coalgebra(),
        coalg(&f, "a", &[("a", "pair", &["a", "a"])]),
        coalg(&f, "a", &[("a", "pair", &["a", "b"]), ("b", "next", &["a"])]),
        coalg(&f, "a", &[("a", "next", &["b"]), ("b", "pair", &["a", "b"])]),
        coalg(&f, "a", &[("a", "leaf", &[]), ("b", "pair", &["b", "b"])]),
        coalg(
            &f,
            "r",
            &[("r", "next", &["a"]), ("a", "pair", &["b", "c"]), ("b", "next", &["a"]), ("c", "next", &["a"])],
        ),
        coalg(&b, "a", &[("a", "bag", &["a", "b"]), ("b", "one", &["a"])]),
        coalg(&b, "a", &[("a", "one", &["b"]), ("b", "bag", &["b", "c"]), ("c", "one", &["b"])]),
    ];
    out.extend(bag_corpus());
    out.extend(fork_corpus().into_iter().take(15));
    out
}

fn auto(sig: &Arc<Signature>, initial: &[&str], rows: &[StateRow<'_>], prio: Vec<u32>) -> FAutomaton {
    FAutomaton::from_rows(sig.clone(), initial, rows, Acceptance::Parity(prio)).expect("corpus automaton")
}

/// Ten parity automata with at most four states.
pub fn automaton_corpus() -> Vec<FAutomaton> {
    let f = fork_signature();
    let b = bag_signature();
    vec![
        fork_automaton(),
        // everything
        auto(&f, &["t"], &[("t", &[("pair", &["t", "t"]), ("next", &["t"]), ("leaf", &[])])], vec![0]),
        // nothing: no way to stop, odd forever
        auto(&f, &["n"], &[("n", &[("pair", &["n", "n"]), ("next", &["n"])])], vec![1]),
        // some leaf is reachable
        auto(
            &f,
            &["s"],
            &[
                ("s", &[("pair", &["s", "t"]), ("pair", &["t", "s"]), ("next", &["s"]), ("leaf", &[])]),
                ("t", &[("pair", &["t", "t"]), ("next", &["t"]), ("leaf", &[])]),
            ],
            vec![1, 0],
        ),
        // every infinite path sees pair infinitely often; states guess the
        // operation of their node
        auto(
            &f,
            &["p", "n", "l"],
            &[
                (
                    "p",
                    &[
                        ("pair", &["p", "p"]),
                        ("pair", &["p", "n"]),
                        ("pair", &["p", "l"]),
                        ("pair", &["n", "p"]),
                        ("pair", &["n", "n"]),
                        ("pair", &["n", "l"]),
                        ("pair", &["l", "p"]),
                        ("pair", &["l", "n"]),
                        ("pair", &["l", "l"]),
                    ],
                ),
                ("n", &[("next", &["p"]), ("next", &["n"]), ("next", &["l"])]),
                ("l", &[("leaf", &[])]),
            ],
            vec![2, 1, 0],
        ),
        // eventually only next along every path, with a nondeterministic
        // switch into the waiting phase
        auto(
            &f,
            &["e"],
            &[
                ("e", &[("pair", &["e", "e"]), ("next", &["e"]), ("next", &["w"]), ("leaf", &[])]),
                ("w", &[("next", &["w"])]),
            ],
            vec![1, 2],
        ),
        // three priorities: next at odd 3 must be outweighed by pair at 4
        auto(
            &f,
            &["a"],
            &[
                ("a", &[("pair", &["b", "c"]), ("next", &["c"]), ("leaf", &[])]),
                ("b", &[("pair", &["a", "a"]), ("leaf", &[])]),
                ("c", &[("next", &["a"]), ("next", &["b"]), ("leaf", &[])]),
            ],
            vec![2, 4, 3],
        ),
        // bag: both children accept, with two interchangeable roles
        auto(
            &b,
            &["r"],
            &[
                ("r", &[("bag", &["x", "y"]), ("one", &["r"]), ("nil", &[])]),
                ("x", &[("nil", &[]), ("one", &["x"])]),
                ("y", &[("nil", &[]), ("one", &["x"]), ("bag", &["y", "y"])]),
            ],
            vec![0, 1, 2],
        ),
        // bag: a nil somewhere below
        auto(
            &b,
            &["s"],
            &[
                ("s", &[("bag", &["s", "t"]), ("one", &["s"]), ("nil", &[])]),
                ("t", &[("bag", &["t", "t"]), ("one", &["t"]), ("nil", &[])]),
            ],
            vec![1, 0],
        ),
        random_automaton(&f, 4, 0xa11),
    ]
}

/// A seeded random parity automaton with every state initial-reachable.
pub fn random_automaton(sig: &Arc<Signature>, n: usize, salt: u64) -> FAutomaton {
    let mut r = rng(salt);
    let names: Vec<String> = (0..n).map(|i| format!("r{i}")).collect();
    let delta: Vec<Vec<_>> = (0..n)
        .map(|_| {
            let mut ts = Vec::new();
            for op in sig.ops() {
                let id = sig.op_id(op.name()).unwrap();
                for _ in 0..r.gen_range(0..3) {
                    let args = (0..op.arity()).map(|_| r.gen_range(0..n)).collect();
                    ts.push(sig.felem(id, args).unwrap());
                }
            }
            ts
        })
        .collect();
    let prio = (0..n).map(|_| r.gen_range(0..4)).collect();
    FAutomaton::new(sig.clone(), names, delta, vec![0], Acceptance::Parity(prio)).unwrap()
}

/// Coalgebras over the same signature as `a`.
pub fn subjects_for(a: &FAutomaton) -> Vec<PointedCoalgebra> {
    if **a.sig() == *fork_signature() {
        fork_corpus()
    } else {
        bag_corpus()
    }
}

/// Every (automaton, thin coalgebra) pair of the corpora.
pub fn pairs() -> Vec<(FAutomaton, PointedCoalgebra)> {
    automaton_corpus().into_iter().flat_map(|a| subjects_for(&a).into_iter().map(move |c| (a.clone(), c))).collect()
}

/// Six rational coherent algebras: four power-set algebras of automata and
/// the two one-element algebras.
pub fn algebra_corpus() -> Vec<Arc<RationalCoherentAlgebra>> {
    let autos = automaton_corpus();
    let mut out: Vec<Arc<RationalCoherentAlgebra>> = [0, 3, 5, 8]
        .iter()
        .map(|&i| Arc::new(automaton_algebra(&autos[i], &Budget::default()).expect("algebra")))
        .collect();
    out.push(Arc::new(RationalCoherentAlgebra::one_element(fork_signature(), true)));
    out.push(Arc::new(RationalCoherentAlgebra::one_element(bag_signature(), false)));
    out
}

/// Number of distinct edge paths of length at most `n` from the root, in
/// log₂ (the counts overflow quickly).
pub fn log2_path_count(c: &PointedCoalgebra, n: usize) -> f64 {
    let g = c.successor_multigraph();
    let mut cur = vec![f64::NEG_INFINITY; c.len()];
    cur[c.root()] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let mut next = vec![f64::NEG_INFINITY; c.len()];
        for (x, &here) in cur.iter().enumerate() {
            if here == f64::NEG_INFINITY {
                continue;
            }
            for &(y, m) in g.edges(x) {
                next[y] = log_add(next[y], here + (m as f64).log2());
            }
        }
        cur = next;
        total = cur.iter().copied().fold(total, log_add);
    }
    total
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

/// Growth oracle. Polynomial growth of degree `d ≤ |X|` at most multiplies
/// the path count by about `2^d` when the length doubles; a state on two
/// cycles makes it grow by roughly `2^{n/|X|}`.
pub fn grows_exponentially(c: &PointedCoalgebra) -> bool {
    let k = c.len();
    let n = 20.max(40 * k);
    let gain = log2_path_count(c, 2 * n) - log2_path_count(c, n);
    gain > (2 * k + 4) as f64
}
