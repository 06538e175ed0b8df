//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use thincoalg::algebra::{
    check_marking, compute_marking, language_member, validate_algebra, Marking, RationalCoherentAlgebra,
};
use thincoalg::automaton::{
    accepts, ambiguity_probe, check_prerun, enumerate_accepting_preruns, find_accepting_prerun, minimize_prerun,
    to_parity, Acceptance, AlgState, AmbiguityVerdict, FAutomaton, PreRun,
};
use thincoalg::coalgebra::PointedCoalgebra;
use thincoalg::constructions::{
    acc_recognizer, algebraic_automaton, automaton_algebra, canonical_run, disambiguate, pi_lasso,
    prefix_agnostic_recognizer, Budget, StateSet,
};
use thincoalg::fixtures::{fork_automaton, fork_coalgebra, fork_signature};
use thincoalg::functor::{FElem, OpId, Permutation, Signature};
use thincoalg::omega::{determinize_to_dpw, nbw_from_recognizer, Dpw, Lasso, Nbw, Recognizer};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn subjects(sig: &Arc<Signature>) -> Vec<PointedCoalgebra> {
    if **sig == *fork_signature() {
        common::fork_corpus()
    } else {
        common::bag_corpus()
    }
}

// golden decompositions

fn show_decompose(s: &Signature, e: &FElem<&str>) -> String {
    s.decompose(e).display_with(s, |(c, x)| format!("({}, {x})", c.display_with(s, |v| v.to_string())))
}

fn golden() -> Outcome {
    let triple = || Signature::from_cycles(&[("a", 3, &[]), ("b", 3, &[])]).unwrap();
    let bag3 = || Signature::from_cycles(&[("bag", 3, &["(0 1)", "(0 1 2)"])]).unwrap();
    type Case<'a> = (&'a dyn Fn() -> Signature, &'a str, [&'a str; 3], &'a str);
    let cases: [Case; 4] = [
        (&triple, "a", ["x0", "x1", "x2"], "a((a(_, x1, x2), x0), (a(x0, _, x2), x1), (a(x0, x1, _), x2))"),
        (&bag3, "bag", ["x0", "x0", "x1"], "bag((bag(_, x0, x0), x1), (bag(_, x0, x1), x0), (bag(_, x0, x1), x0))"),
        (&bag3, "bag", ["x1", "x0", "x0"], "bag((bag(_, x0, x0), x1), (bag(_, x0, x1), x0), (bag(_, x0, x1), x0))"),
        (&bag3, "bag", ["x0", "x1", "x0"], "bag((bag(_, x0, x0), x1), (bag(_, x0, x1), x0), (bag(_, x0, x1), x0))"),
    ];
    for (mk, op, args, want) in cases {
        let runs: Vec<String> = (0..3)
            .map(|_| {
                let s = mk();
                show_decompose(&s, &s.felem_named(op, args.to_vec()).unwrap())
            })
            .collect();
        ensure(runs.iter().all(|r| r == want), || format!("{op}{args:?}: got {:?}", runs[0]))?;
    }
    let s = bag3();
    let e = s.felem_named("bag", vec!["x0", "x0", "x1"]).unwrap();
    let pairs = s.decompositions_of(&e).len();
    ensure(pairs == 2, || format!("bag has {pairs} distinct decompositions, expected 2"))?;
    let t = triple();
    let e = t.felem_named("a", vec!["x0", "x1", "x2"]).unwrap();
    ensure(t.decompositions_of(&e).len() == 3, || "triple should have 3 decompositions".into())?;
    let nil = Signature::from_cycles(&[("nil", 0, &[])]).unwrap();
    let e = nil.felem_named::<&str>("nil", vec![]).unwrap();
    ensure(show_decompose(&nil, &e) == "nil()", || "nullary decomposition".into())?;
    Ok("triple and bag-of-3 decompositions match, stable over 3 rebuilds and argument orders".into())
}

// decomposition laws and pullback witnesses

fn random_signature(r: &mut impl Rng) -> Signature {
    let n_ops = r.gen_range(1..=3);
    let ops = (0..n_ops)
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

fn random_felem(s: &Signature, r: &mut impl Rng, carrier: usize) -> FElem<usize> {
    let op = OpId(r.gen_range(0..s.ops().len()));
    let args = (0..s.op(op).arity()).map(|_| r.gen_range(0..carrier)).collect();
    s.felem(op, args).unwrap()
}

fn decomposition_laws() -> Outcome {
    let mut r = common::rng(2);
    let (mut elems, mut witnesses, mut mismatches) = (0, 0, 0);
    let mut bad = |what: String| {
        mismatches += 1;
        if mismatches == 1 {
            eprintln!("decomposition law broken: {what}");
        }
    };
    while elems < 1200 || witnesses < 600 {
        let s = random_signature(&mut r);
        for _ in 0..30 {
            let e = random_felem(&s, &mut r, 5);
            elems += 1;
            let d = s.decompose(&e);
            if s.fmap(&d, |p| p.1) != e {
                bad(format!("(i) on {e:?}"));
            }
            for (ctx, y) in s.decompositions_of(&d) {
                if s.fctx_map(&ctx, |p| p.1) != y.0 {
                    bad(format!("(ii) on {e:?}"));
                }
            }
            let dec = s.decompositions_of(&e);
            if dec.iter().any(|(c, x)| s.plug(c, *x) != e) {
                bad(format!("(iii) on {e:?}"));
            }
            let covered: BTreeSet<usize> = dec.iter().map(|p| p.1).collect();
            if covered != e.base() {
                bad(format!("base coverage on {e:?}"));
            }
            if e.arity() == 0 {
                continue;
            }
            let f: Vec<usize> = (0..5).map(|_| r.gen_range(0..3)).collect();
            let image = s.fmap(&e, |&x| f[x]);
            let ydec: Vec<_> = s.decompositions_of(&image).into_iter().collect();
            let (yc, y) = ydec.choose(&mut r).unwrap();
            witnesses += 1;
            match s.plug_pullback_witness(|&x| f[x], yc, y, &e) {
                Ok((xc, x)) => {
                    if s.fctx_map(&xc, |&v| f[v]) != *yc || f[x] != *y || s.plug(&xc, x) != e {
                        bad(format!("witness postconditions on {e:?}"));
                    }
                }
                Err(err) => bad(format!("no witness for {e:?}: {err}")),
            }
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} violations"))?;
    Ok(format!("{elems} random elements satisfy (i)-(iii), {witnesses} pullback witnesses verified"))
}

// thinness

fn thinness() -> Outcome {
    let corpus = common::thinness_corpus();
    let mut non_thin = 0;
    for c in &corpus {
        let thin = c.is_thin();
        non_thin += usize::from(!thin);
        let exp = common::grows_exponentially(c);
        ensure(thin != exp, || format!("is_thin={thin} but growth oracle says exponential={exp} on {c:?}"))?;
    }
    let dl = thincoalg::fixtures::double_loop_coalgebra();
    ensure(!dl.is_thin(), || "double self-loop reported thin".into())?;
    Ok(format!(
        "{} coalgebras ({non_thin} not thin, incl. the double self-loop) agree with the growth oracle",
        corpus.len()
    ))
}

// automaton algebras and the Π oracle

fn automaton_algebras() -> Outcome {
    let mut r = common::rng(4);
    let mut lassos = 0;
    for (i, a) in common::automaton_corpus().iter().enumerate() {
        let alg = automaton_algebra(a, &Budget::default()).map_err(|e| format!("automaton {i}: {e}"))?;
        let v = validate_algebra(&alg);
        ensure(v.is_empty(), || format!("automaton {i}: {} violations, first {:?}", v.len(), v[0]))?;
        let sig = a.sig();
        let sets = |k: usize| sig.fctx_map(&alg.contexts()[k], |&m| StateSet::from_mask(m));
        for _ in 0..60 {
            let stem: Vec<usize> = (0..r.gen_range(0..=3)).map(|_| r.gen_range(0..alg.contexts().len())).collect();
            let cycle: Vec<usize> = (0..r.gen_range(1..=4)).map(|_| r.gen_range(0..alg.contexts().len())).collect();
            let direct = pi_lasso(
                a,
                &stem.iter().map(|&k| sets(k)).collect::<Vec<_>>(),
                &cycle.iter().map(|&k| sets(k)).collect::<Vec<_>>(),
            )
            .map_err(|e| e.to_string())?;
            let via = alg.gamma1_lasso(&stem, &cycle);
            lassos += 1;
            ensure(direct.to_mask() == Some(via), || {
                format!("automaton {i}, lasso {stem:?}{cycle:?}: recognizer {via:#b}, direct {direct:?}")
            })?;
        }
    }
    Ok(format!("10 automaton algebras coherent; {lassos} random context lassos match the direct search"))
}

// membership against run search

fn membership() -> Outcome {
    let autos = common::automaton_corpus();
    let algs: Vec<RationalCoherentAlgebra> =
        autos.iter().map(|a| automaton_algebra(a, &Budget::default()).unwrap()).collect();
    let (mut pairs, mut too_small, mut wrong, mut accepted) = (0, 0, 0, 0);
    for (a, alg) in autos.iter().zip(&algs) {
        for c in subjects(a.sig()) {
            pairs += 1;
            let member = language_member(alg, &c).map_err(|e| e.to_string())?;
            let bound = c.len() * a.len() + 2;
            let run = find_accepting_prerun(a, &c, bound).map_err(|e| e.to_string())?;
            if let Some(pr) = &run {
                let rep = check_prerun(a, &c, pr).map_err(|e| e.to_string())?;
                ensure(rep.is_accepting(), || "search returned a non-accepting pre-run".into())?;
            }
            accepted += usize::from(member);
            match (member, run.is_some()) {
                (true, false) => too_small += 1,
                (false, true) => wrong += 1,
                _ => {}
            }
        }
    }
    ensure(too_small == 0 && wrong == 0, || {
        format!("{too_small} bound-too-small, {wrong} spurious runs over {pairs} pairs")
    })?;

    let a = fork_automaton();
    let c = fork_coalgebra();
    let alg = automaton_algebra(&a, &Budget::default()).unwrap();
    let m = compute_marking(&alg, &c).map_err(|e| e.to_string())?;
    let mut oracle = Vec::new();
    for x in 0..c.len() {
        let mut mask = 0;
        for q in 0..a.len() {
            let aq = a.with_initial(vec![q]).unwrap();
            if find_accepting_prerun(&aq, &c.with_root(x).unwrap(), 8).unwrap().is_some() {
                mask |= 1 << q;
            }
        }
        oracle.push(mask);
    }
    ensure(m.values() == [0b0001, 0b0010, 0b1100] && oracle == m.values(), || {
        format!("fork marking {:?}, enumeration oracle {oracle:?}", m.values())
    })?;
    Ok(format!(
        "{pairs} pairs ({accepted} accepted): membership equals bounded run existence, 0 bound-too-small; \
         fork marking {{q1}},{{q2}},{{q3,q4}} confirmed"
    ))
}

// algebraic automata: acceptance, unambiguity, canonical runs

fn algebraic_automata() -> Outcome {
    let (mut cases, mut unambiguous, mut rejected) = (0, 0, 0);
    for (i, alg) in common::algebra_corpus().into_iter().enumerate() {
        let aa = algebraic_automaton(alg.clone()).map_err(|e| e.to_string())?;
        for c in subjects(alg.sig()) {
            cases += 1;
            let member = language_member(&alg, &c).map_err(|e| e.to_string())?;
            let symbolic = accepts(&aa, &c).map_err(|e| e.to_string())?;
            ensure(symbolic == member, || format!("algebra {i}: symbolic acceptance {symbolic}, membership {member}"))?;
            // the run read off the marking is accepting exactly for members
            let canon = canonical_run(&alg, &c).map_err(|e| e.to_string())?;
            let rep = check_prerun(&aa, &c, &canon).map_err(|e| e.to_string())?;
            ensure(rep.is_prerun() && rep.is_accepting() == member, || {
                format!("algebra {i}: canonical run accepting={}, membership {member}", rep.is_accepting())
            })?;
            let verdict = ambiguity_probe(&aa, &c, c.len() * aa.len()).map_err(|e| e.to_string())?;
            match (member, verdict) {
                (true, AmbiguityVerdict::UnambiguousUpToBound { run, .. }) => {
                    ensure(check_prerun(&aa, &c, &run).unwrap().is_accepting(), || "probe run not accepting".into())?;
                    ensure(run.canonical_form() == minimize_prerun(&canon).canonical_form(), || {
                        format!("algebra {i}: found run differs from the canonical run")
                    })?;
                    unambiguous += 1;
                }
                (false, AmbiguityVerdict::NoAcceptingRun) => rejected += 1,
                (_, v) => return Err(format!("algebra {i}, membership {member}: probe says {v}")),
            }
        }
    }
    Ok(format!(
        "{cases} cases: {unambiguous} with exactly one run (the canonical one), {rejected} with none; \
         symbolic acceptance equals membership"
    ))
}

// uniqueness of markings

fn unique_markings() -> Outcome {
    let (mut instances, mut maps) = (0, 0usize);
    for (i, alg) in common::algebra_corpus().into_iter().enumerate() {
        let nc = alg.len();
        for c in subjects(alg.sig()) {
            let total = (nc as f64).powi(c.len() as i32);
            if total > 1e4 {
                continue;
            }
            instances += 1;
            let mut vals = vec![0; c.len()];
            let mut passing = 0;
            loop {
                maps += 1;
                let rep = check_marking(alg.as_ref(), &c, &Marking::new(vals.clone())).map_err(|e| e.to_string())?;
                passing += usize::from(rep.is_marking());
                let mut k = 0;
                while k < vals.len() {
                    vals[k] += 1;
                    if vals[k] < nc {
                        break;
                    }
                    vals[k] = 0;
                    k += 1;
                }
                if k == vals.len() {
                    break;
                }
            }
            ensure(passing == 1, || format!("algebra {i}: {passing} maps pass check_marking on {c:?}"))?;
        }
    }
    ensure(instances > 0, || "no instance small enough".into())?;
    Ok(format!("{instances} instances, {maps} candidate maps, exactly one marking each"))
}

// disambiguating the fork automaton

fn loop_run(loop_states: &[usize]) -> PreRun {
    let s = fork_signature();
    let n = loop_states.len();
    let mut xi = vec![s.felem_named("pair", vec![1, 2]).unwrap(), s.felem_named("leaf", vec![]).unwrap()];
    xi.extend((0..n).map(|i| s.felem_named("next", vec![2 + (i + 1) % n]).unwrap()));
    let names = (0..n + 2).map(|i| format!("r{i}")).collect();
    let shape = PointedCoalgebra::new(s, names, xi, 0).unwrap();
    let mut rho_x = vec![0, 1];
    rho_x.extend(std::iter::repeat_n(2, n));
    let mut rho_q = vec![0, 1];
    rho_q.extend_from_slice(loop_states);
    PreRun::new(shape, rho_x, rho_q).unwrap()
}

/// Distinct ultimately periodic state sequences along the fork's right
/// branch with a representation of at most `len` letters: start in q3, q4
/// is always followed by q3.
fn fork_run_count(len: usize) -> usize {
    let mut seen = HashSet::new();
    for total in 1..=len {
        for stem in 0..total {
            for bits in 0..1u32 << total {
                let w: Vec<u32> = (0..total).map(|i| bits >> i & 1).collect();
                let at = |i: usize| if i < total { w[i] } else { w[stem + (i - stem) % (total - stem)] };
                let seq: Vec<u32> = (0..40).map(at).collect();
                if seq[0] == 0 && seq.windows(2).all(|p| p != [1, 1]) {
                    seen.insert(seq);
                }
            }
        }
    }
    seen.len()
}

fn fork_end_to_end() -> Outcome {
    let a = fork_automaton();
    let c = fork_coalgebra();
    let mut notes = Vec::new();
    let verdict = ambiguity_probe(&a, &c, 6).map_err(|e| e.to_string())?;
    let AmbiguityVerdict::Ambiguous(r1, r2) = verdict else {
        return Err(format!("probe says {verdict}"));
    };
    for r in [&r1, &r2] {
        ensure(check_prerun(&a, &c, r).unwrap().is_accepting(), || "witness not accepting".into())?;
    }
    ensure(r1.canonical_form() != r2.canonical_form(), || "witnesses coincide".into())?;
    let all = enumerate_accepting_preruns(&a, &c, 6).map_err(|e| e.to_string())?;
    ensure(all.complete, || "enumeration incomplete".into())?;
    let forms: HashSet<_> = all.runs.iter().map(|r| r.canonical_form()).collect();
    let expected = fork_run_count(4);
    ensure(all.runs.len() == expected, || format!("{} runs at bound 6, oracle {expected}", all.runs.len()))?;
    for l in [[2, 2, 3].as_slice(), &[2, 3]] {
        let pr = loop_run(l);
        ensure(check_prerun(&a, &c, &pr).unwrap().is_accepting(), || format!("loop {l:?} not accepting"))?;
        ensure(forms.contains(&minimize_prerun(&pr).canonical_form()), || format!("loop {l:?} not enumerated"))?;
    }
    notes.push(format!(
        "probe ambiguous; {} runs at bound 6 (oracle {expected}), both reference runs among them",
        all.runs.len()
    ));

    let start = Instant::now();
    let (out, report) = disambiguate(&a, &Budget::default()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    ensure(matches!(out.acceptance(), Acceptance::Parity(_)), || "output is not a parity automaton".into())?;
    let corpus = common::fork_corpus();
    let mut verdicts = [0usize; 3];
    for s in &corpus {
        let want = accepts(&a, s).map_err(|e| e.to_string())?;
        let got = accepts(&out, s).map_err(|e| e.to_string())?;
        ensure(want == got, || format!("verdicts differ on {s:?}"))?;
        match ambiguity_probe(&out, s, s.len() * out.len()).map_err(|e| e.to_string())? {
            AmbiguityVerdict::Ambiguous(..) => return Err(format!("disambiguated automaton ambiguous on {s:?}")),
            AmbiguityVerdict::UnambiguousUpToBound { .. } => verdicts[0] += 1,
            AmbiguityVerdict::NoAcceptingRun => verdicts[1] += 1,
            AmbiguityVerdict::BoundTooSmall { .. } => verdicts[2] += 1,
        }
    }
    ensure(secs < 30.0, || format!("pipeline took {secs:.1} s"))?;
    notes.push(format!(
        "disambiguated to {} states in {secs:.2} s; agrees on {} coalgebras, never ambiguous ({} one run, {} none, {} bound-too-small)",
        report.output_states,
        corpus.len(),
        verdicts[0],
        verdicts[1],
        verdicts[2]
    ));
    let summary = notes.join("; ");
    if all.runs.len() == 2 {
        Ok(summary)
    } else {
        Err(format!("literal count 'exactly 2 runs at bound 6' does not hold, everything else does: {summary}"))
    }
}

// ω-word tooling

fn random_nbw(r: &mut impl Rng, n: usize, alphabet: usize) -> Nbw {
    let trans = (0..n).map(|_| (0..alphabet).map(|_| (0..n).filter(|_| r.gen_bool(0.4)).collect()).collect()).collect();
    let accepting = (0..n).map(|_| r.gen_bool(0.4)).collect();
    Nbw::new(alphabet, trans, vec![0], accepting).unwrap()
}

fn random_lasso(r: &mut impl Rng, alphabet: usize, stem: usize, cycle: usize) -> Lasso {
    let stem = (0..r.gen_range(0..=stem)).map(|_| r.gen_range(0..alphabet)).collect();
    let cycle = (0..r.gen_range(1..=cycle)).map(|_| r.gen_range(0..alphabet)).collect();
    Lasso::new(stem, cycle).unwrap()
}

/// Number of lassos of total length at most `len`.
fn lasso_count(alphabet: usize, len: usize) -> f64 {
    (1..=len).map(|t| t as f64 * (alphabet as f64).powi(t as i32)).sum()
}

/// A parity condition as a deterministic word automaton over the states:
/// it remembers the last state read.
fn parity_as_dpw(a: &FAutomaton) -> Dpw {
    let Acceptance::Parity(p) = a.acceptance() else { unreachable!() };
    let n = a.len();
    let trans = (0..=n).flat_map(|_| 0..n).collect();
    let mut prio = p.clone();
    prio.push(0);
    Dpw::new(n, trans, n, prio).unwrap()
}

fn omega_tools() -> Outcome {
    let mut r = common::rng(9);
    let mut validated = 0;
    let mut recognizers: Vec<Recognizer> = Vec::new();
    for a in common::automaton_corpus() {
        let alg = automaton_algebra(&a, &Budget::default()).map_err(|e| e.to_string())?;
        recognizers.push(alg.rational().clone());
    }
    let algs = common::algebra_corpus();
    for alg in &algs {
        recognizers.push(alg.rational().clone());
        let aa = algebraic_automaton(alg.clone()).map_err(|e| e.to_string())?;
        if aa.len() <= 64 {
            let acc = acc_recognizer(alg.clone(), &Budget::default()).map_err(|e| e.to_string())?;
            recognizers.push(acc.reduced());
            recognizers.push(acc);
            recognizers.push(prefix_agnostic_recognizer(&aa, &Budget::default()).map_err(|e| e.to_string())?);
        }
    }
    for rec in &recognizers {
        let v = rec.wilke().validate();
        ensure(v.is_empty(), || format!("Wilke violation {:?}", v[0]))?;
        validated += 1;
    }

    // determinisation
    let mut nbws: Vec<Nbw> = (0..24).map(|i| random_nbw(&mut r, 2 + i % 3, 2)).collect();
    for rec in recognizers.iter().filter(|rec| rec.alphabet() <= 8) {
        nbws.push(nbw_from_recognizer(rec).map_err(|e| e.to_string())?);
    }
    let (mut exhaustive, mut capped, mut checked) = (0, 0, 0usize);
    for nbw in &nbws {
        let dpw = determinize_to_dpw(nbw, 20_000).map_err(|e| e.to_string())?;
        let want = 2 * nbw.len() + 2;
        let mut len = want;
        while lasso_count(nbw.alphabet(), len) > 50_000.0 {
            len -= 1;
        }
        if len == want {
            exhaustive += 1;
        } else {
            capped += 1;
        }
        let mut all = Lasso::enumerate(nbw.alphabet(), len);
        all.extend((0..1000 / nbws.len() + 1).map(|_| random_lasso(&mut r, nbw.alphabet(), 6, 6)));
        for l in &all {
            checked += 1;
            ensure(nbw.accepts_lasso(l) == dpw.accepts_lasso(l), || format!("determinisation disagrees on {l:?}"))?;
        }
    }

    // product with a word automaton
    let mut pairs = 0;
    for a in common::automaton_corpus() {
        let omega = a.with_acceptance(Acceptance::OmegaRegular(parity_as_dpw(&a))).unwrap();
        let product = to_parity(&omega).map_err(|e| e.to_string())?;
        for c in subjects(a.sig()) {
            pairs += 1;
            let want = accepts(&a, &c).map_err(|e| e.to_string())?;
            ensure(accepts(&product, &c).map_err(|e| e.to_string())? == want, || {
                format!("product disagrees on {c:?}")
            })?;
        }
    }
    for alg in &algs {
        let aa = algebraic_automaton(alg.clone()).map_err(|e| e.to_string())?;
        if aa.len() > 64 {
            continue;
        }
        let rec = acc_recognizer(alg.clone(), &Budget::default()).map_err(|e| e.to_string())?.reduced();
        let dpw = determinize_to_dpw(&nbw_from_recognizer(&rec).map_err(|e| e.to_string())?, 20_000)
            .map_err(|e| e.to_string())?;
        let product =
            to_parity(&aa.with_acceptance(Acceptance::OmegaRegular(dpw)).unwrap()).map_err(|e| e.to_string())?;
        for c in subjects(alg.sig()) {
            pairs += 1;
            let want = language_member(alg, &c).map_err(|e| e.to_string())?;
            ensure(accepts(&product, &c).map_err(|e| e.to_string())? == want, || {
                format!("algebra product disagrees on {c:?}")
            })?;
        }
    }
    Ok(format!(
        "{validated} Wilke algebras valid; {} automata determinised ({exhaustive} exhaustive to 2n+2, {capped} capped), \
         {checked} lassos agree; product preserves acceptance on {pairs} pairs",
        nbws.len()
    ))
}

// prefix-agnostic core

fn in2_walk(aa: &FAutomaton, succ: &[Vec<usize>], r: &mut impl Rng, nc: usize) -> Option<Lasso> {
    let starts: Vec<usize> = (nc..aa.len()).filter(|&q| !succ[q].is_empty()).collect();
    let mut walk = vec![*starts.choose(r)?];
    for _ in 0..16 {
        let last = *walk.last().unwrap();
        let next = *succ[last].choose(r)?;
        if let Some(pos) = walk.iter().position(|&q| q == next) {
            if r.gen_bool(0.6) || walk.len() >= 12 {
                let cycle = walk.split_off(pos);
                return Lasso::new(walk, cycle).ok();
            }
        }
        walk.push(next);
    }
    None
}

/// Direct reading of the core condition: every letter from the loop on is a
/// context letter whose label is `γ₁` of the contexts after it.
fn core_oracle(alg: &RationalCoherentAlgebra, kinds: &[AlgState], l: &Lasso) -> bool {
    let ctx = |q: usize| match kinds[q] {
        AlgState::Context { ctx, .. } => Some(ctx),
        AlgState::Label(_) => None,
    };
    let len = l.len();
    (l.stem().len()..len + 1).all(|m| {
        let tail = l.suffix(m + 1);
        let stem: Option<Vec<usize>> = tail.stem().iter().map(|&q| ctx(q)).collect();
        let cycle: Option<Vec<usize>> = tail.cycle().iter().map(|&q| ctx(q)).collect();
        match (ctx(l.at(m)), stem, cycle) {
            (Some(_), Some(s), Some(c)) => alg.gamma1_lasso(&s, &c) == kinds[l.at(m)].label(),
            _ => false,
        }
    })
}

fn prefix_agnostic() -> Outcome {
    let mut r = common::rng(10);
    let (mut samples, mut positive, mut used) = (0, 0, 0);
    let algs = common::algebra_corpus();
    let eligible: Vec<_> = algs.iter().filter(|alg| alg.len() <= 4).collect();
    for (i, alg) in eligible.iter().enumerate() {
        let aa = algebraic_automaton((*alg).clone()).map_err(|e| e.to_string())?;
        let rec = prefix_agnostic_recognizer(&aa, &Budget::default()).map_err(|e| e.to_string())?;
        let Acceptance::AlgebraSymbolic(sym) = aa.acceptance() else { unreachable!() };
        let succ: Vec<Vec<usize>> = (0..aa.len())
            .map(|q| {
                aa.delta(q).iter().flat_map(|t| t.args().iter().copied()).collect::<BTreeSet<_>>().into_iter().collect()
            })
            .collect();
        let mut pred = vec![Vec::new(); aa.len()];
        for (q, ss) in succ.iter().enumerate().skip(alg.len()) {
            for &s in ss {
                pred[s].push(q);
            }
        }
        used += 1;
        let quota = 500 / eligible.len() + usize::from(i < 500 % eligible.len());
        let mut made = 0;
        while made < quota {
            let Some(x) = in2_walk(&aa, &succ, &mut r, alg.len()) else { continue };
            let mut w = Vec::new();
            let mut head = x.at(0);
            for _ in 0..r.gen_range(1..=4) {
                let Some(&p) = pred[head].choose(&mut r) else { break };
                w.push(p);
                head = p;
            }
            w.reverse();
            let stem: Vec<usize> = w.iter().chain(x.stem()).copied().collect();
            let wx = Lasso::new(stem, x.cycle().to_vec()).unwrap();
            let (a_x, a_wx) = (rec.accepts_lasso(&x), rec.accepts_lasso(&wx));
            ensure(a_x == a_wx, || format!("algebra {i}: x {x:?} gives {a_x}, wx {wx:?} gives {a_wx}"))?;
            ensure(a_x == core_oracle(sym.algebra(), sym.kinds(), &x), || {
                format!("algebra {i}: core oracle disagrees on {x:?}")
            })?;
            made += 1;
            samples += 1;
            positive += usize::from(a_x);
        }
    }
    ensure(samples >= 500, || format!("only {samples} samples"))?;
    Ok(format!("{samples} (prefix, lasso) pairs over {used} algebras agree ({positive} in the core)"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("golden decompositions", golden),
        ("decomposition laws", decomposition_laws),
        ("thinness", thinness),
        ("automaton algebras", automaton_algebras),
        ("membership vs runs", membership),
        ("algebraic automata", algebraic_automata),
        ("unique markings", unique_markings),
        ("fork end to end", fork_end_to_end),
        ("omega tools", omega_tools),
        ("prefix agnosticity", prefix_agnostic),
    ];
    panic::set_hook(Box::new(|_| {}));
    let results: Vec<(Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(name, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    let out = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
                        let msg = p
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_default();
                        Err(format!("panicked: {msg}"))
                    });
                    let secs = t.elapsed().as_secs_f64();
                    eprintln!("finished {name} in {secs:.1} s: {out:?}");
                    (out, secs)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (i, ((name, _), (out, secs))) in criteria.iter().zip(results).enumerate() {
        match out {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
