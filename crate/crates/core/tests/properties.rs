mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thincoalg::algebra::compute_marking;
use thincoalg::automaton::{
    accepts, allpaths_parity_ok, check_prerun, find_accepting_prerun, to_parity, Acceptance, FAutomaton,
};
use thincoalg::coalgebra::PointedCoalgebra;
use thincoalg::constructions::{automaton_algebra, canonical_run, Budget};
use thincoalg::fixtures::fork_signature;
use thincoalg::functor::{group_closure, OpId, Permutation, Signature};
use thincoalg::omega::Dpw;

fn signature(r: &mut impl Rng) -> Signature {
    let ops = (0..r.gen_range(1..=3))
        .map(|i| {
            let arity = r.gen_range(0..=4);
            let gens = (0..r.gen_range(0..=2))
                .map(|_| {
                    let mut img: Vec<usize> = (0..arity).collect();
                    img.shuffle(r);
                    Permutation::new(img).unwrap()
                })
                .collect();
            (format!("o{i}"), arity, gens)
        })
        .collect();
    Signature::new(ops).unwrap()
}

/// A random thin coalgebra over the fork signature with all states
/// reachable.
fn thin_fork_coalgebra(r: &mut impl Rng) -> PointedCoalgebra {
    let s = fork_signature();
    loop {
        let n = r.gen_range(1..=4);
        let xi = (0..n)
            .map(|_| match r.gen_range(0..3) {
                0 => s.felem_named("leaf", vec![]).unwrap(),
                1 => s.felem_named("next", vec![r.gen_range(0..n)]).unwrap(),
                _ => s.felem_named("pair", vec![r.gen_range(0..n), r.gen_range(0..n)]).unwrap(),
            })
            .collect();
        let names = (0..n).map(|i| format!("s{i}")).collect();
        let c = PointedCoalgebra::new(s.clone(), names, xi, 0).unwrap().reachable_part();
        if c.is_thin() {
            return c;
        }
    }
}

/// Max-parity of every cycle reachable from `root`, by walking all closed
/// walks of at most `n` steps.
fn cycles_even_oracle(succ: &[Vec<usize>], prio: &[u32], root: usize) -> bool {
    let n = succ.len();
    let reach = thincoalg::graph::reachable(succ, [root]);
    fn walk(succ: &[Vec<usize>], prio: &[u32], start: usize, at: usize, left: usize, top: u32) -> bool {
        succ[at].iter().all(|&s| {
            let top = top.max(prio[s]);
            if s == start && top % 2 == 1 {
                return false;
            }
            left == 0 || walk(succ, prio, start, s, left - 1, top)
        })
    }
    (0..n).filter(|&v| reach[v]).all(|v| walk(succ, prio, v, v, n - 1, prio[v]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn canonical_form_is_orbit_invariant(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let s = signature(&mut r);
        let op = OpId(r.gen_range(0..s.ops().len()));
        let arity = s.op(op).arity();
        let group = group_closure(s.op(op).generators(), arity).unwrap();
        let args: Vec<usize> = (0..arity).map(|_| r.gen_range(0..3)).collect();
        let other: Vec<usize> = (0..arity).map(|_| r.gen_range(0..3)).collect();
        let e = s.felem(op, args.clone()).unwrap();
        for g in &group {
            let moved: Vec<usize> = (0..arity).map(|i| args[g.apply(i)]).collect();
            prop_assert_eq!(&s.felem(op, moved).unwrap(), &e);
        }
        let related = group.iter().any(|g| (0..arity).all(|i| other[i] == args[g.apply(i)]));
        prop_assert_eq!(s.felem(op, other).unwrap() == e, related);
    }

    #[test]
    fn plug_is_natural_and_adds_to_the_base(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let s = signature(&mut r);
        let ops: Vec<usize> = (0..s.ops().len()).filter(|&i| s.op(OpId(i)).arity() > 0).collect();
        prop_assume!(!ops.is_empty());
        let op = OpId(*ops.choose(&mut r).unwrap());
        let arity = s.op(op).arity();
        let args: Vec<usize> = (0..arity - 1).map(|_| r.gen_range(0..5)).collect();
        let ctx = s.fctx(op, r.gen_range(0..arity), args).unwrap();
        let x = r.gen_range(0..5);
        let f: Vec<usize> = (0..5).map(|_| r.gen_range(0..3)).collect();
        let lhs = s.fmap(&s.plug(&ctx, x), |&v| f[v]);
        let rhs = s.plug(&s.fctx_map(&ctx, |&v| f[v]), f[x]);
        prop_assert_eq!(lhs, rhs);
        let mut base: BTreeSet<usize> = ctx.args().iter().copied().collect();
        base.insert(x);
        prop_assert_eq!(s.plug(&ctx, x).base(), base);
    }

    #[test]
    fn markings_factor_through_minimisation(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let c = thin_fork_coalgebra(&mut r);
        let autos = common::automaton_corpus();
        let a = &autos[r.gen_range(0..7)];
        let alg = automaton_algebra(a, &Budget::default()).unwrap();
        let (q, map) = c.quotient(&c.behavioral_partition(None)).unwrap();
        let m = compute_marking(&alg, &c).unwrap();
        let mq = compute_marking(&alg, &q).unwrap();
        for (x, &y) in map.iter().enumerate() {
            prop_assert_eq!(m.value(x), mq.value(y));
        }
    }

    #[test]
    fn perturbed_canonical_runs_are_rejected(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let c = thin_fork_coalgebra(&mut r);
        let algs = common::algebra_corpus();
        let alg = algs[r.gen_range(0..3)].clone();
        let b = thincoalg::constructions::algebraic_automaton(alg.clone()).unwrap();
        let run = canonical_run(&alg, &c).unwrap();
        let node = r.gen_range(0..run.len());
        let mut rho_q: Vec<usize> = (0..run.len()).map(|n| run.rho_q(n)).collect();
        let old = rho_q[node];
        rho_q[node] = (old + r.gen_range(1..b.len())) % b.len();
        let perturbed = run.relabel_q(rho_q).unwrap();
        prop_assert!(!check_prerun(&b, &c, &perturbed).unwrap().is_accepting());
    }

    #[test]
    fn parity_path_check_matches_cycle_walks(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = r.gen_range(1..=5);
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..n).filter(|_| r.gen_bool(0.3)).collect())
            .collect();
        let prio: Vec<u32> = (0..n).map(|_| r.gen_range(0..4)).collect();
        let root = r.gen_range(0..n);
        prop_assert_eq!(allpaths_parity_ok(&succ, &prio, root), cycles_even_oracle(&succ, &prio, root));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parity_product_matches_run_search(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_automaton(&fork_signature(), r.gen_range(1..=3), seed);
        let nd = r.gen_range(1..=2);
        let trans = (0..nd * a.len()).map(|_| r.gen_range(0..nd)).collect();
        let prio = (0..nd).map(|_| r.gen_range(0..3)).collect();
        let d = Dpw::new(a.len(), trans, 0, prio).unwrap();
        let omega: FAutomaton = a.with_acceptance(Acceptance::OmegaRegular(d.clone())).unwrap();
        let product = to_parity(&omega).unwrap();
        let c = thin_fork_coalgebra(&mut r);
        let by_product = accepts(&product, &c).unwrap();
        let bound = c.len() * a.len() * d.len() + 2;
        let by_search = find_accepting_prerun(&omega, &c, bound).unwrap().is_some();
        prop_assert_eq!(by_product, by_search);
    }
}
