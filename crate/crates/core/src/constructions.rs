//! From automata to algebras and back: the automaton algebra, the
//! algebraic automaton, recognisers for its acceptance condition and the
//! disambiguation pipeline built from them.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::algebra::{compute_marking, CoherentAlgebra, RationalCoherentAlgebra};
use crate::automaton::{self, trim_unproductive, Acceptance, AlgState, FAutomaton, PreRun, SymbolicAcceptance};
use crate::coalgebra::PointedCoalgebra;
use crate::error::{Error, Result};
use crate::functor::{FCtx, FElem, Signature};
use crate::graph;
use crate::omega::{self, Dpw, Lasso, Recognizer, WilkeAlgebra};

/// A finite set of automaton states, as a bitset.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSet(Vec<u64>);

impl StateSet {
    pub fn new() -> Self {
        StateSet(Vec::new())
    }

    pub fn from_mask(mask: usize) -> Self {
        let mut s = StateSet(vec![mask as u64]);
        s.normalize();
        s
    }

    /// The set as a bitmask, when it fits in a word.
    pub fn to_mask(&self) -> Option<usize> {
        match self.0.len() {
            0 => Some(0),
            1 => usize::try_from(self.0[0]).ok(),
            _ => None,
        }
    }

    pub fn contains(&self, q: usize) -> bool {
        self.0.get(q / 64).is_some_and(|w| w >> (q % 64) & 1 == 1)
    }

    pub fn insert(&mut self, q: usize) {
        if self.0.len() <= q / 64 {
            self.0.resize(q / 64 + 1, 0);
        }
        self.0[q / 64] |= 1 << (q % 64);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(i, &w)| (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| i * 64 + b))
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn normalize(&mut self) {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
    }
}

impl FromIterator<usize> for StateSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = StateSet::new();
        for q in iter {
            s.insert(q);
        }
        s
    }
}

/// Size limits for the constructions. Exceeding one aborts with
/// [`Error::Budget`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Largest automaton whose power set is tabulated.
    pub max_automaton_states: usize,
    /// Largest finite-word sort of a generated ω-semigroup.
    pub max_semigroup: usize,
    pub max_nbw: usize,
    pub max_dpw: usize,
    /// Largest product automaton.
    pub max_states: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_automaton_states: 6, max_semigroup: 4000, max_nbw: 4000, max_dpw: 20_000, max_states: 500_000 }
    }
}

impl Budget {
    /// Caps every generated structure at `n` elements.
    pub fn with_cap(n: usize) -> Self {
        Budget { max_semigroup: n, max_nbw: n, max_dpw: n, max_states: n, ..Budget::default() }
    }
}

fn over(stage: &'static str, size: usize, limit: usize) -> Result<()> {
    if size > limit {
        return Err(Error::Budget { stage, size, limit });
    }
    Ok(())
}

fn parity_of(a: &FAutomaton) -> Result<&[u32]> {
    match a.acceptance() {
        Acceptance::Parity(p) => Ok(p),
        other => Err(Error::Invalid(format!("expected a parity automaton, got {} acceptance", other.kind()))),
    }
}

/// Transitions of every state split into (sibling context, hole state).
fn transition_decompositions(a: &FAutomaton) -> Vec<Vec<(FCtx<usize>, usize)>> {
    (0..a.len())
        .map(|q| {
            let set: BTreeSet<(FCtx<usize>, usize)> =
                a.delta(q).iter().flat_map(|t| a.sig().decompositions_of(t)).collect();
            set.into_iter().collect()
        })
        .collect()
}

/// `Π` of the context stream `stem · cycle^ω`: the states starting an
/// accepting thread through the stream.
pub fn pi_lasso(a: &FAutomaton, stem: &[FCtx<StateSet>], cycle: &[FCtx<StateSet>]) -> Result<StateSet> {
    let prio = parity_of(a)?;
    Ok(pi_lasso_with(a, prio, &transition_decompositions(a), stem, cycle))
}

fn pi_lasso_with(
    a: &FAutomaton,
    prio: &[u32],
    decomps: &[Vec<(FCtx<usize>, usize)>],
    stem: &[FCtx<StateSet>],
    cycle: &[FCtx<StateSet>],
) -> StateSet {
    assert!(!cycle.is_empty(), "loop must be nonempty");
    let n = a.len();
    let len = stem.len() + cycle.len();
    let ctx = |i: usize| if i < stem.len() { &stem[i] } else { &cycle[i - stem.len()] };
    let next = |i: usize| if i + 1 < len { i + 1 } else { stem.len() };
    let node = |q: usize, i: usize| i * n + q;
    let mut edges = Vec::new();
    for i in 0..len {
        for (q, ds) in decomps.iter().enumerate() {
            for (tctx, q1) in ds {
                if a.sig().lifted_membership_ctx(tctx, ctx(i), |p, set| set.contains(*p)) {
                    edges.push((node(q, i), node(*q1, next(i)), prio[q].max(prio[*q1])));
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let good = graph::even_cycle_reach(n * len, &edges);
    (0..n).filter(|&q| good[node(q, 0)]).collect()
}

/// The automaton algebra evaluated on demand over sets of states; used for
/// membership on automata too large to tabulate.
pub struct LazyAutomatonAlgebra<'a> {
    a: &'a FAutomaton,
    prio: &'a [u32],
    decomps: Vec<Vec<(FCtx<usize>, usize)>>,
}

impl<'a> LazyAutomatonAlgebra<'a> {
    pub fn new(a: &'a FAutomaton) -> Result<Self> {
        let prio = parity_of(a)?;
        Ok(LazyAutomatonAlgebra { a, prio, decomps: transition_decompositions(a) })
    }
}

impl CoherentAlgebra for LazyAutomatonAlgebra<'_> {
    type Elem = StateSet;

    fn sig(&self) -> &Arc<Signature> {
        self.a.sig()
    }

    fn gamma0(&self, e: &FElem<StateSet>) -> Result<StateSet> {
        Ok((0..self.a.len())
            .filter(|&q| {
                self.a.delta(q).iter().any(|t| self.a.sig().lifted_membership(t, e, |p, set| set.contains(*p)))
            })
            .collect())
    }

    fn gamma1_cycle(&self, cycle: &[FCtx<StateSet>]) -> Result<StateSet> {
        Ok(pi_lasso_with(self.a, self.prio, &self.decomps, &[], cycle))
    }
}

/// Elements of the finite-word sort of the automaton algebra: sets of
/// `(from, to, priority)` triples as bitsets.
struct TripleSets {
    n: usize,
    prios: Vec<u32>,
}

impl TripleSets {
    fn index(&self, q: usize, q1: usize, m: usize) -> usize {
        (q * self.n + q1) * self.prios.len() + m
    }

    fn triples<'s>(&'s self, s: &'s StateSet) -> impl Iterator<Item = (usize, usize, usize)> + 's {
        let p = self.prios.len();
        s.iter().map(move |i| (i / p / self.n, i / p % self.n, i % p))
    }

    fn mul(&self, a: &StateSet, b: &StateSet) -> StateSet {
        let mut by_source: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.n];
        for (q, q1, m) in self.triples(b) {
            by_source[q].push((q1, m));
        }
        let mut out = StateSet::new();
        for (q, q1, m1) in self.triples(a) {
            for &(q2, m2) in &by_source[q1] {
                out.insert(self.index(q, q2, m1.max(m2)));
            }
        }
        out
    }

    fn mixed(&self, s: &StateSet, c: usize) -> usize {
        self.triples(s).filter(|&(_, q1, _)| c >> q1 & 1 == 1).fold(0, |acc, (q, _, _)| acc | 1 << q)
    }

    fn omega(&self, s: &StateSet) -> usize {
        let edges: Vec<(usize, usize, u32)> = self.triples(s).map(|(q, q1, m)| (q, q1, self.prios[m])).collect();
        let good = graph::even_cycle_reach(self.n, &edges);
        (0..self.n).filter(|&q| good[q]).fold(0, |acc, q| acc | 1 << q)
    }
}

fn set_name(a: &FAutomaton, mask: usize) -> String {
    let names: Vec<&str> = (0..a.len()).filter(|q| mask >> q & 1 == 1).map(|q| a.name(q)).collect();
    format!("{{{}}}", names.join(","))
}

/// The automaton algebra of a parity automaton: carrier the subsets of
/// states, `γ₀` by lifted membership in transitions, and `γ₁` through the
/// semigroup of priority-labelled state relations.
pub fn automaton_algebra(a: &FAutomaton, budget: &Budget) -> Result<RationalCoherentAlgebra> {
    let prio = parity_of(a)?;
    let n = a.len();
    over("automaton algebra", n, budget.max_automaton_states)?;
    let sig = a.sig().clone();
    let carrier: Vec<usize> = (0..1usize << n).collect();
    let names = carrier.iter().map(|&c| set_name(a, c)).collect();
    let mut gamma0 = HashMap::new();
    for e in sig.enumerate_felems(&carrier) {
        let v = (0..n)
            .filter(|&q| a.delta(q).iter().any(|t| sig.lifted_membership(t, &e, |p, c| c >> p & 1 == 1)))
            .fold(0, |acc, q| acc | 1 << q);
        gamma0.insert(e, v);
    }
    let mut prios: Vec<u32> = prio.to_vec();
    prios.sort_unstable();
    prios.dedup();
    let ts = TripleSets { n, prios };
    let prio_idx = |q: usize| ts.prios.binary_search(&prio[q]).expect("listed");
    let decomps = transition_decompositions(a);
    let contexts = sig.enumerate_fctxs(&carrier);
    let mut s_elems: Vec<StateSet> = Vec::new();
    let mut s_index: HashMap<StateSet, usize> = HashMap::new();
    let mut intern = |s: StateSet, s_elems: &mut Vec<StateSet>| -> usize {
        *s_index.entry(s.clone()).or_insert_with(|| {
            s_elems.push(s);
            s_elems.len() - 1
        })
    };
    let mut letter_map = Vec::with_capacity(contexts.len());
    for ctx in &contexts {
        let mut s = StateSet::new();
        for (q, ds) in decomps.iter().enumerate() {
            for (tctx, q1) in ds {
                if sig.lifted_membership_ctx(tctx, ctx, |p, c| c >> p & 1 == 1) {
                    s.insert(ts.index(q, *q1, prio_idx(q).max(prio_idx(*q1))));
                }
            }
        }
        letter_map.push(intern(s, &mut s_elems));
    }
    // close under products
    let mut done = 0;
    while done < s_elems.len() {
        let a_idx = done;
        let mut j = 0;
        while j <= a_idx {
            for (x, y) in [(a_idx, j), (j, a_idx)] {
                let p = ts.mul(&s_elems[x], &s_elems[y]);
                intern(p, &mut s_elems);
                over("automaton algebra semigroup", s_elems.len(), budget.max_semigroup)?;
            }
            j += 1;
        }
        done += 1;
    }
    let ns = s_elems.len();
    let mut w_elems: Vec<usize> = Vec::new();
    let mut w_index: HashMap<usize, usize> = HashMap::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut add_w = |c: usize, w_elems: &mut Vec<usize>, queue: &mut VecDeque<usize>| -> usize {
        *w_index.entry(c).or_insert_with(|| {
            w_elems.push(c);
            queue.push_back(c);
            w_elems.len() - 1
        })
    };
    let omega: Vec<usize> = s_elems.iter().map(|s| add_w(ts.omega(s), &mut w_elems, &mut queue)).collect();
    while let Some(c) = queue.pop_front() {
        for s in &s_elems {
            add_w(ts.mixed(s, c), &mut w_elems, &mut queue);
        }
    }
    let nw = w_elems.len();
    let mut mixed = vec![0; ns * nw];
    for (i, s) in s_elems.iter().enumerate() {
        for (j, &c) in w_elems.iter().enumerate() {
            mixed[i * nw + j] = add_w(ts.mixed(s, c), &mut Vec::new(), &mut VecDeque::new());
        }
    }
    let mut mul = vec![0; ns * ns];
    for i in 0..ns {
        for j in 0..ns {
            mul[i * ns + j] = s_index[&ts.mul(&s_elems[i], &s_elems[j])];
        }
    }
    let wilke = WilkeAlgebra::new(ns, nw, mul, mixed, omega)?;
    let initial_mask = a.initial().iter().fold(0usize, |acc, &q| acc | 1 << q);
    let recognizing: Vec<bool> = carrier.iter().map(|&c| c & initial_mask != 0).collect();
    let accepting = w_elems.iter().map(|&c| recognizing[c]).collect();
    let rational = Recognizer::new(wilke, letter_map, accepting)?;
    RationalCoherentAlgebra::new(sig, names, gamma0, rational, w_elems, recognizing)
}

/// Index of an algebraic-automaton state: `in₁(c)` first, then
/// `in₂(k, c)` in context-major order.
pub fn alg_state_index(alg: &RationalCoherentAlgebra, s: AlgState) -> usize {
    let nc = alg.len();
    match s {
        AlgState::Label(c) => c,
        AlgState::Context { ctx, label } => nc + ctx * nc + label,
    }
}

/// The algebraic automaton: states `C + F'C × C`, transitions following the
/// context decompositions of `γ₀`-preimages, symbolic acceptance.
pub fn algebraic_automaton(alg: Arc<RationalCoherentAlgebra>) -> Result<FAutomaton> {
    let violations = crate::algebra::validate_algebra(&alg);
    if !violations.is_empty() {
        return Err(Error::Validation(format!(
            "algebra is not coherent: {:?}",
            &violations[..violations.len().min(3)]
        )));
    }
    let nc = alg.len();
    let nk = alg.contexts().len();
    let sig = alg.sig().clone();
    let mut kinds: Vec<AlgState> = (0..nc).map(AlgState::Label).collect();
    for ctx in 0..nk {
        kinds.extend((0..nc).map(|label| AlgState::Context { ctx, label }));
    }
    let names = kinds
        .iter()
        .map(|k| match *k {
            AlgState::Label(c) => alg.carrier()[c].clone(),
            AlgState::Context { ctx, label } => format!("<{} | {}>", alg.display_ctx(ctx), alg.carrier()[label]),
        })
        .collect();
    let mut by_label: Vec<Vec<FElem<usize>>> = vec![Vec::new(); nc];
    let carrier: Vec<usize> = (0..nc).collect();
    for e in sig.enumerate_felems(&carrier) {
        let dec = sig.decompose(&e);
        let t = sig.fmap(&dec, |(ctx, c)| {
            let k = alg.context_id(ctx).expect("contexts are enumerated canonically");
            alg_state_index(&alg, AlgState::Context { ctx: k, label: *c })
        });
        by_label[alg.gamma0(&e)].push(t);
    }
    let delta = kinds.iter().map(|k| by_label[k.label()].clone()).collect();
    let initial = (0..nc).filter(|&c| alg.is_recognizing(c)).collect();
    let acceptance = SymbolicAcceptance::new(alg.clone(), kinds)?;
    FAutomaton::new(sig, names, delta, initial, Acceptance::AlgebraSymbolic(Arc::new(acceptance)))
}

fn symbolic_of(a: &FAutomaton) -> Result<&SymbolicAcceptance> {
    match a.acceptance() {
        Acceptance::AlgebraSymbolic(s) => Ok(s),
        other => Err(Error::Invalid(format!("expected symbolic acceptance, got {}", other.kind()))),
    }
}

/// The acceptance condition read directly: the first letter is a label
/// `in₁(c₀)`, every later letter `in₂(d, c)`, and each `c` equals `γ₁` of the
/// contexts after it.
pub fn symbolic_accepts_lasso(sym: &SymbolicAcceptance, l: &Lasso) -> bool {
    let alg = sym.algebra();
    let kinds = sym.kinds();
    let AlgState::Label(c0) = kinds[l.at(0)] else {
        return false;
    };
    let ctx_of = |q: usize| match kinds[q] {
        AlgState::Context { ctx, .. } => Some(ctx),
        AlgState::Label(_) => None,
    };
    let span = l.len() + 1;
    let mut label = c0;
    for m in 0..span {
        let tail = l.suffix(m + 1);
        let Some(stem) = tail.stem().iter().map(|&q| ctx_of(q)).collect::<Option<Vec<_>>>() else {
            return false;
        };
        let Some(cycle) = tail.cycle().iter().map(|&q| ctx_of(q)).collect::<Option<Vec<_>>>() else {
            return false;
        };
        if alg.gamma1_lasso(&stem, &cycle) != label {
            return false;
        }
        label = kinds[l.at(m + 1)].label();
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Seg {
    Error,
    /// A nonempty word: starts with a label letter or not, product of its
    /// contexts, label of its last letter, internal consistency.
    Part {
        starts_label: bool,
        rat: Option<usize>,
        last: usize,
        ok: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Inf {
    Error,
    Part { starts_label: bool, value: usize, ok: bool },
}

struct Interner<T> {
    items: Vec<T>,
    index: HashMap<T, usize>,
}

impl<T: Clone + Eq + std::hash::Hash> Interner<T> {
    fn new() -> Self {
        Interner { items: Vec::new(), index: HashMap::new() }
    }

    fn add(&mut self, t: T) -> usize {
        if let Some(&i) = self.index.get(&t) {
            return i;
        }
        self.items.push(t.clone());
        self.index.insert(t, self.items.len() - 1);
        self.items.len() - 1
    }
}

/// Generic closure of a letter set under finite products, ω-powers and
/// mixed products, tabulated as a recogniser.
fn tabulate<S, W>(
    letters: Vec<S>,
    mul: impl Fn(S, S) -> S,
    mixed: impl Fn(S, W) -> W,
    omega: impl Fn(S) -> W,
    accepting: impl Fn(W) -> bool,
    limit: usize,
) -> Result<Recognizer>
where
    S: Copy + Eq + std::hash::Hash,
    W: Copy + Eq + std::hash::Hash,
{
    let mut ss: Interner<S> = Interner::new();
    let letter_map: Vec<usize> = letters.into_iter().map(|s| ss.add(s)).collect();
    if ss.items.is_empty() {
        return Err(Error::Invalid("recogniser needs at least one letter".into()));
    }
    let mut i = 0;
    while i < ss.items.len() {
        for l in letter_map.clone() {
            let p = mul(ss.items[i], ss.items[l]);
            ss.add(p);
            over("acceptance semigroup", ss.items.len(), limit)?;
        }
        i += 1;
    }
    let ns = ss.items.len();
    let mut mul_t = vec![0; ns * ns];
    for a in 0..ns {
        for b in 0..ns {
            let p = mul(ss.items[a], ss.items[b]);
            mul_t[a * ns + b] = *ss.index.get(&p).ok_or_else(|| Error::Internal("semigroup not closed".into()))?;
        }
    }
    let mut ws: Interner<W> = Interner::new();
    let omega_t: Vec<usize> = (0..ns).map(|s| ws.add(omega(ss.items[s]))).collect();
    let mut j = 0;
    while j < ws.items.len() {
        for s in 0..ns {
            ws.add(mixed(ss.items[s], ws.items[j]));
            over("acceptance semigroup", ws.items.len(), limit)?;
        }
        j += 1;
    }
    let nw = ws.items.len();
    let mut mixed_t = vec![0; ns * nw];
    for s in 0..ns {
        for w in 0..nw {
            mixed_t[s * nw + w] = ws.index[&mixed(ss.items[s], ws.items[w])];
        }
    }
    let acc = ws.items.iter().map(|&w| accepting(w)).collect();
    Recognizer::new(WilkeAlgebra::new(ns, nw, mul_t, mixed_t, omega_t)?, letter_map, acc)
}

/// A recogniser over the states of a symbolic automaton for its acceptance
/// condition: label letter first, context letters after, every label equal
/// to `γ₁` of what follows.
pub fn acc_recognizer_for(a: &FAutomaton, budget: &Budget) -> Result<Recognizer> {
    let sym = symbolic_of(a)?;
    let alg = sym.algebra();
    let wilke = alg.rational().wilke();
    let in_w = |c: usize| alg.w_index(c);
    let letters = sym
        .kinds()
        .iter()
        .map(|k| match *k {
            AlgState::Label(c) => Seg::Part { starts_label: true, rat: None, last: c, ok: in_w(c).is_some() },
            AlgState::Context { ctx, label } => {
                Seg::Part { starts_label: false, rat: Some(alg.gamma2(ctx)), last: label, ok: in_w(label).is_some() }
            }
        })
        .collect();
    let mul = |x: Seg, y: Seg| match (x, y) {
        (
            Seg::Part { starts_label, rat: r1, last: c1, ok: ok1 },
            Seg::Part { starts_label: false, rat: Some(r2), last: c2, ok: ok2 },
        ) => {
            let joined = in_w(c2).is_some_and(|w| alg.w_elems()[wilke.mixed(r2, w)] == c1);
            let rat = Some(r1.map_or(r2, |r1| wilke.mul(r1, r2)));
            Seg::Part { starts_label, rat, last: c2, ok: ok1 && ok2 && joined }
        }
        _ => Seg::Error,
    };
    let mixed = |x: Seg, w: Inf| match (x, w) {
        (Seg::Part { starts_label, rat, last, ok }, Inf::Part { starts_label: false, value, ok: ok2 }) => Inf::Part {
            starts_label,
            value: rat.map_or(value, |r| wilke.mixed(r, value)),
            ok: ok && ok2 && alg.w_elems()[value] == last,
        },
        _ => Inf::Error,
    };
    let omega = |x: Seg| match x {
        Seg::Part { starts_label: false, rat: Some(r), last, ok } => {
            let value = wilke.omega(r);
            Inf::Part { starts_label: false, value, ok: ok && alg.w_elems()[value] == last }
        }
        _ => Inf::Error,
    };
    let accepting = |w: Inf| matches!(w, Inf::Part { starts_label: true, ok: true, .. });
    tabulate(letters, mul, mixed, omega, accepting, budget.max_semigroup)
}

/// [`acc_recognizer_for`] over the full algebraic automaton of `alg`.
pub fn acc_recognizer(alg: Arc<RationalCoherentAlgebra>, budget: &Budget) -> Result<Recognizer> {
    acc_recognizer_for(&algebraic_automaton(alg)?, budget)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum CoreSeg {
    /// Contains a label letter.
    Dirty,
    Clean {
        rat: usize,
        last: usize,
        ok: bool,
    },
}

/// The prefix-agnostic core of the acceptance condition: some suffix
/// consists of context letters whose labels all equal `γ₁` of what follows.
/// `W` has two elements and finite prefixes act trivially on it.
pub fn prefix_agnostic_recognizer(a: &FAutomaton, budget: &Budget) -> Result<Recognizer> {
    let sym = symbolic_of(a)?;
    let alg = sym.algebra();
    let wilke = alg.rational().wilke();
    let in_w = |c: usize| alg.w_index(c);
    let letters = sym
        .kinds()
        .iter()
        .map(|k| match *k {
            AlgState::Label(_) => CoreSeg::Dirty,
            AlgState::Context { ctx, label } => {
                CoreSeg::Clean { rat: alg.gamma2(ctx), last: label, ok: in_w(label).is_some() }
            }
        })
        .collect();
    let mul = |x: CoreSeg, y: CoreSeg| match (x, y) {
        (CoreSeg::Clean { rat: r1, last: c1, ok: ok1 }, CoreSeg::Clean { rat: r2, last: c2, ok: ok2 }) => {
            let joined = in_w(c2).is_some_and(|w| alg.w_elems()[wilke.mixed(r2, w)] == c1);
            CoreSeg::Clean { rat: wilke.mul(r1, r2), last: c2, ok: ok1 && ok2 && joined }
        }
        _ => CoreSeg::Dirty,
    };
    let omega = |x: CoreSeg| match x {
        CoreSeg::Clean { rat, last, ok } => ok && alg.w_elems()[wilke.omega(rat)] == last,
        CoreSeg::Dirty => false,
    };
    tabulate(letters, mul, |_, w: bool| w, omega, |w| w, budget.max_semigroup)
}

/// The run built from the marking: one node per (state, automaton state)
/// pair reachable from `(root, in₁(μ(root)))`, children labelled with their
/// marking value and sibling context. Automaton states are numbered as in
/// [`algebraic_automaton`].
pub fn canonical_run(alg: &RationalCoherentAlgebra, c: &PointedCoalgebra) -> Result<PreRun> {
    let mu = compute_marking(alg, c)?;
    let sig = c.sig();
    let start = (c.root(), alg_state_index(alg, AlgState::Label(*mu.value(c.root()))));
    let mut index: HashMap<(usize, usize), usize> = HashMap::from([(start, 0)]);
    let mut nodes = vec![start];
    let mut rho_f = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let (x, _) = nodes[i];
        let dec = sig.decompose(c.xi(x));
        let mut err = None;
        let e = sig.fmap(&dec, |(ctx, y)| {
            let labelled = sig.fctx_map(ctx, |z| *mu.value(*z));
            let Some(k) = alg.context_id(&labelled) else {
                err = Some(Error::Internal("context missing from the algebra".into()));
                return 0;
            };
            let key = (*y, alg_state_index(alg, AlgState::Context { ctx: k, label: *mu.value(*y) }));
            *index.entry(key).or_insert_with(|| {
                nodes.push(key);
                nodes.len() - 1
            })
        });
        if let Some(err) = err {
            return Err(err);
        }
        rho_f.push(e);
        i += 1;
    }
    let names = nodes.iter().map(|&(x, q)| format!("({}, {q})", c.name(x))).collect();
    let shape = PointedCoalgebra::new(sig.clone(), names, rho_f, 0)?;
    PreRun::new(shape, nodes.iter().map(|n| n.0).collect(), nodes.iter().map(|n| n.1).collect())
}

/// Sizes and timings of the disambiguation stages.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PipelineReport {
    pub input_states: usize,
    pub carrier: usize,
    pub contexts: usize,
    pub semigroup: usize,
    pub algebraic_states: usize,
    pub trimmed_algebraic_states: usize,
    pub acceptance_semigroup: usize,
    pub acceptance_semigroup_reduced: usize,
    pub nbw_states: usize,
    pub dpw_states: usize,
    pub product_states: usize,
    pub output_states: usize,
    /// `(stage, milliseconds)`.
    pub timings: Vec<(String, f64)>,
}

struct Stopwatch {
    last: Instant,
}

impl Stopwatch {
    fn lap(&mut self, report: &mut PipelineReport, stage: &str) {
        let now = Instant::now();
        report.timings.push((stage.to_string(), (now - self.last).as_secs_f64() * 1000.0));
        self.last = now;
    }
}

/// Turns a parity automaton into one accepting the same thin coalgebras
/// with at most one run on each of them.
pub fn disambiguate(a: &FAutomaton, budget: &Budget) -> Result<(FAutomaton, PipelineReport)> {
    parity_of(a)?;
    let mut report = PipelineReport { input_states: a.len(), ..PipelineReport::default() };
    let mut clock = Stopwatch { last: Instant::now() };
    let alg = Arc::new(automaton_algebra(a, budget)?);
    report.carrier = alg.len();
    report.contexts = alg.contexts().len();
    report.semigroup = alg.rational().wilke().n_finite();
    clock.lap(&mut report, "automaton algebra");
    let b = algebraic_automaton(alg)?;
    report.algebraic_states = b.len();
    let b = trim_unproductive(&b);
    report.trimmed_algebraic_states = b.len();
    clock.lap(&mut report, "algebraic automaton");
    if b.is_empty() {
        let empty =
            FAutomaton::new(a.sig().clone(), Vec::new(), Vec::new(), Vec::new(), Acceptance::Parity(Vec::new()))?;
        clock.lap(&mut report, "product");
        return Ok((empty, report));
    }
    let rec = acc_recognizer_for(&b, budget)?;
    report.acceptance_semigroup = rec.wilke().n_finite();
    let rec = rec.reduced();
    report.acceptance_semigroup_reduced = rec.wilke().n_finite();
    clock.lap(&mut report, "acceptance recogniser");
    let nbw = omega::nbw_from_recognizer(&rec)?;
    report.nbw_states = nbw.len();
    over("linked-pair automaton", nbw.len(), budget.max_nbw)?;
    clock.lap(&mut report, "Büchi automaton");
    let dpw: Dpw = omega::determinize_to_dpw(&nbw, budget.max_dpw)?;
    report.dpw_states = dpw.len();
    clock.lap(&mut report, "determinisation");
    over("product", b.len() * dpw.len(), budget.max_states)?;
    let product = automaton::to_parity(&b.with_acceptance(Acceptance::OmegaRegular(dpw))?)?;
    report.product_states = product.len();
    let out = trim_unproductive(&product);
    report.output_states = out.len();
    clock.lap(&mut report, "product");
    Ok((out, report))
}
