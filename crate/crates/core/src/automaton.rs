//! Automata over coalgebras, pre-runs, runs and bounded run search.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::algebra::{self, RationalCoherentAlgebra};
use crate::coalgebra::{CanonicalForm, PointedCoalgebra};
use crate::constructions::LazyAutomatonAlgebra;
use crate::error::{Error, Result};
use crate::functor::{FElem, Signature};
use crate::graph;
use crate::omega::Dpw;

/// A state of an algebraic automaton: `in₁(c)` or `in₂(context, c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgState {
    Label(usize),
    Context { ctx: usize, label: usize },
}

impl AlgState {
    pub fn label(self) -> usize {
        match self {
            AlgState::Label(c) | AlgState::Context { label: c, .. } => c,
        }
    }
}

/// Acceptance of an algebraic automaton: paths are checked against the
/// algebra's `γ₁` instead of a priority function.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicAcceptance {
    algebra: Arc<RationalCoherentAlgebra>,
    kinds: Vec<AlgState>,
}

impl SymbolicAcceptance {
    pub fn new(algebra: Arc<RationalCoherentAlgebra>, kinds: Vec<AlgState>) -> Result<Self> {
        let nc = algebra.carrier().len();
        let nx = algebra.contexts().len();
        for k in &kinds {
            let ok = match *k {
                AlgState::Label(c) => c < nc,
                AlgState::Context { ctx, label } => ctx < nx && label < nc,
            };
            if !ok {
                return Err(Error::Invalid(format!("state kind {k:?} out of range")));
            }
        }
        Ok(SymbolicAcceptance { algebra, kinds })
    }

    pub fn algebra(&self) -> &Arc<RationalCoherentAlgebra> {
        &self.algebra
    }

    pub fn kinds(&self) -> &[AlgState] {
        &self.kinds
    }

    fn restrict(&self, kept: &[usize]) -> SymbolicAcceptance {
        SymbolicAcceptance { algebra: self.algebra.clone(), kinds: kept.iter().map(|&q| self.kinds[q]).collect() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Acceptance {
    /// Priority per state; the largest priority seen infinitely often must be even.
    Parity(Vec<u32>),
    /// A parity word automaton over the alphabet of states.
    OmegaRegular(Dpw),
    AlgebraSymbolic(Arc<SymbolicAcceptance>),
}

impl Acceptance {
    pub fn kind(&self) -> &'static str {
        match self {
            Acceptance::Parity(_) => "parity",
            Acceptance::OmegaRegular(_) => "dpw",
            Acceptance::AlgebraSymbolic(_) => "symbolic",
        }
    }
}

/// One state of [`FAutomaton::from_rows`]: its name and its transitions as
/// (operation, argument states).
pub type StateRow<'a> = (&'a str, &'a [(&'a str, &'a [&'a str])]);

#[derive(Clone, Debug, PartialEq)]
pub struct FAutomaton {
    sig: Arc<Signature>,
    names: Vec<String>,
    delta: Vec<Vec<FElem<usize>>>,
    initial: Vec<usize>,
    acceptance: Acceptance,
}

impl FAutomaton {
    pub fn new(
        sig: Arc<Signature>,
        names: Vec<String>,
        delta: Vec<Vec<FElem<usize>>>,
        initial: Vec<usize>,
        acceptance: Acceptance,
    ) -> Result<Self> {
        let n = names.len();
        if delta.len() != n {
            return Err(Error::Invalid(format!("{n} states but {} transition sets", delta.len())));
        }
        let delta = delta
            .into_iter()
            .map(|ts| {
                let set = ts
                    .into_iter()
                    .map(|t| {
                        if let Some(&bad) = t.args().iter().find(|&&q| q >= n) {
                            return Err(Error::StateOutOfRange { state: bad, len: n });
                        }
                        sig.felem(t.op(), t.args().to_vec())
                    })
                    .collect::<Result<BTreeSet<_>>>()?;
                Ok(set.into_iter().collect())
            })
            .collect::<Result<Vec<Vec<_>>>>()?;
        let initial: BTreeSet<usize> = initial.into_iter().collect();
        if let Some(&bad) = initial.iter().find(|&&q| q >= n) {
            return Err(Error::StateOutOfRange { state: bad, len: n });
        }
        match &acceptance {
            Acceptance::Parity(p) if p.len() != n => {
                return Err(Error::Invalid("priority map must cover every state".into()))
            }
            Acceptance::OmegaRegular(d) if d.alphabet() != n => {
                return Err(Error::Invalid("word automaton alphabet must be the state set".into()))
            }
            Acceptance::AlgebraSymbolic(s) if s.kinds().len() != n => {
                return Err(Error::Invalid("symbolic acceptance must describe every state".into()))
            }
            _ => {}
        }
        Ok(FAutomaton { sig, names, delta, initial: initial.into_iter().collect(), acceptance })
    }

    /// Builds an automaton from `(state, [(op, args)])` rows given by name.
    pub fn from_rows(
        sig: Arc<Signature>,
        initial: &[&str],
        rows: &[StateRow<'_>],
        acceptance: Acceptance,
    ) -> Result<Self> {
        let names: Vec<String> = rows.iter().map(|r| r.0.to_string()).collect();
        let index: HashMap<&str, usize> = rows.iter().enumerate().map(|(i, r)| (r.0, i)).collect();
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| Error::Invalid(format!("unknown state `{s}`")));
        let delta = rows
            .iter()
            .map(|(_, ts)| {
                ts.iter()
                    .map(|&(op, args)| {
                        let args = args.iter().map(|a| lookup(a)).collect::<Result<Vec<_>>>()?;
                        sig.felem_named(op, args)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let initial = initial.iter().map(|s| lookup(s)).collect::<Result<Vec<_>>>()?;
        FAutomaton::new(sig, names, delta, initial, acceptance)
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn delta(&self, q: usize) -> &[FElem<usize>] {
        &self.delta[q]
    }

    pub fn has_transition(&self, q: usize, t: &FElem<usize>) -> bool {
        self.delta[q].binary_search(t).is_ok()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn acceptance(&self) -> &Acceptance {
        &self.acceptance
    }

    pub fn transition_count(&self) -> usize {
        self.delta.iter().map(Vec::len).sum()
    }

    pub fn with_initial(&self, initial: Vec<usize>) -> Result<Self> {
        FAutomaton::new(self.sig.clone(), self.names.clone(), self.delta.clone(), initial, self.acceptance.clone())
    }

    pub fn with_acceptance(&self, acceptance: Acceptance) -> Result<Self> {
        FAutomaton::new(self.sig.clone(), self.names.clone(), self.delta.clone(), self.initial.clone(), acceptance)
    }

    fn restrict(&self, kept: &[usize]) -> FAutomaton {
        let mut id = vec![usize::MAX; self.len()];
        for (i, &q) in kept.iter().enumerate() {
            id[q] = i;
        }
        let delta = kept
            .iter()
            .map(|&q| {
                self.delta[q]
                    .iter()
                    .filter(|t| t.args().iter().all(|&p| id[p] != usize::MAX))
                    .map(|t| self.sig.fmap(t, |&p| id[p]))
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect()
            })
            .collect();
        let initial = self.initial.iter().filter(|&&q| id[q] != usize::MAX).map(|&q| id[q]).collect();
        let acceptance = match &self.acceptance {
            Acceptance::Parity(p) => Acceptance::Parity(kept.iter().map(|&q| p[q]).collect()),
            Acceptance::OmegaRegular(d) => {
                let trans =
                    (0..d.len()).flat_map(|s| kept.iter().map(move |&q| (s, q))).map(|(s, q)| d.step(s, q)).collect();
                let d =
                    Dpw::new(kept.len(), trans, d.initial(), d.priorities().to_vec()).expect("restriction of a DPW");
                Acceptance::OmegaRegular(d.trimmed())
            }
            Acceptance::AlgebraSymbolic(s) => Acceptance::AlgebraSymbolic(Arc::new(s.restrict(kept))),
        };
        FAutomaton {
            sig: self.sig.clone(),
            names: kept.iter().map(|&q| self.names[q].clone()).collect(),
            delta,
            initial,
            acceptance,
        }
    }

    fn successor_lists(&self) -> Vec<Vec<usize>> {
        self.delta
            .iter()
            .map(|ts| {
                let set: BTreeSet<usize> = ts.iter().flat_map(|t| t.args().iter().copied()).collect();
                set.into_iter().collect()
            })
            .collect()
    }
}

/// Removes states that cannot be reached from an initial state.
pub fn trim_reachable(a: &FAutomaton) -> FAutomaton {
    let live = graph::reachable(&a.successor_lists(), a.initial.iter().copied());
    let kept: Vec<usize> = (0..a.len()).filter(|&q| live[q]).collect();
    a.restrict(&kept)
}

/// Removes states that occur in no pre-run at all: the greatest set of
/// states each having a transition that stays inside the set.
pub fn trim_unproductive(a: &FAutomaton) -> FAutomaton {
    let mut alive = vec![true; a.len()];
    loop {
        let next: Vec<bool> =
            (0..a.len()).map(|q| alive[q] && a.delta[q].iter().any(|t| t.args().iter().all(|&p| alive[p]))).collect();
        if next == alive {
            break;
        }
        alive = next;
    }
    let kept: Vec<usize> = (0..a.len()).filter(|&q| alive[q]).collect();
    trim_reachable(&a.restrict(&kept))
}

/// A coalgebra on a run carrier, labelled by subject states and automaton
/// states.
#[derive(Clone, Debug, PartialEq)]
pub struct PreRun {
    shape: PointedCoalgebra,
    rho_x: Vec<usize>,
    rho_q: Vec<usize>,
}

impl PreRun {
    pub fn new(shape: PointedCoalgebra, rho_x: Vec<usize>, rho_q: Vec<usize>) -> Result<Self> {
        if rho_x.len() != shape.len() || rho_q.len() != shape.len() {
            return Err(Error::Invalid("labelling must cover the run carrier".into()));
        }
        Ok(PreRun { shape, rho_x, rho_q })
    }

    pub fn shape(&self) -> &PointedCoalgebra {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shape.is_empty()
    }

    pub fn root(&self) -> usize {
        self.shape.root()
    }

    pub fn rho_f(&self, r: usize) -> &FElem<usize> {
        self.shape.xi(r)
    }

    pub fn rho_x(&self, r: usize) -> usize {
        self.rho_x[r]
    }

    pub fn rho_q(&self, r: usize) -> usize {
        self.rho_q[r]
    }

    /// Same structure and subject labels, different automaton labels.
    pub fn relabel_q(&self, rho_q: Vec<usize>) -> Result<PreRun> {
        PreRun::new(self.shape.clone(), self.rho_x.clone(), rho_q)
    }

    fn pair_labels(&self) -> Vec<usize> {
        let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for r in 0..self.len() {
            let next = ids.len();
            ids.entry((self.rho_x[r], self.rho_q[r])).or_insert(next);
        }
        (0..self.len()).map(|r| ids[&(self.rho_x[r], self.rho_q[r])]).collect()
    }

    /// Isomorphism-invariant form of the behaviour of the root; equal for
    /// two pre-runs exactly when they minimise to the same run.
    pub fn canonical_form(&self) -> RunForm {
        let labels: Vec<usize> = (0..self.len()).map(|r| label_key(self.rho_x[r], self.rho_q[r])).collect();
        RunForm(self.shape.canonical_form(Some(&labels)))
    }

    pub fn describe(&self, c: &PointedCoalgebra, a: &FAutomaton) -> String {
        let mut out = String::new();
        for r in 0..self.len() {
            let mark = if r == self.root() { "*" } else { " " };
            out.push_str(&format!(
                "{mark}r{r}: ({}, {}) -> {}\n",
                c.name(self.rho_x[r]),
                a.name(self.rho_q[r]),
                self.rho_f(r).display_with(self.shape.sig(), |s| format!("r{s}"))
            ));
        }
        out
    }
}

fn label_key(x: usize, q: usize) -> usize {
    // Cantor pairing keeps labels injective without knowing the ranges.
    (x + q) * (x + q + 1) / 2 + q
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RunForm(CanonicalForm);

/// Quotient of a pre-run by behavioural equivalence of its labelled states.
pub fn minimize_prerun(pr: &PreRun) -> PreRun {
    let labels = pr.pair_labels();
    let p = pr.shape.behavioral_partition(Some(&labels));
    let (q, map) = pr.shape.quotient(&p).expect("behavioural partition is compatible");
    let mut rho_x = vec![0; q.len()];
    let mut rho_q = vec![0; q.len()];
    for r in 0..pr.len() {
        rho_x[map[r]] = pr.rho_x[r];
        rho_q[map[r]] = pr.rho_q[r];
    }
    let (q, kept) = q.reachable_part_with_map();
    PreRun {
        shape: q,
        rho_x: kept.iter().map(|&b| rho_x[b]).collect(),
        rho_q: kept.iter().map(|&b| rho_q[b]).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathVerdict {
    Holds,
    Fails,
    /// The symbolic criterion only covers pre-runs whose cycles are simple.
    Refused(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreRunReport {
    /// The subject labelling is a pointed coalgebra morphism.
    pub morphism: bool,
    /// Every node follows a transition of its automaton state.
    pub transitions: bool,
    /// Every infinite path from the root satisfies the acceptance condition.
    pub paths: PathVerdict,
    /// The root is labelled by an initial state.
    pub initial_root: bool,
    pub failing_nodes: Vec<usize>,
}

impl PreRunReport {
    pub fn is_prerun(&self) -> bool {
        self.morphism && self.transitions && self.paths == PathVerdict::Holds
    }

    pub fn is_accepting(&self) -> bool {
        self.is_prerun() && self.initial_root
    }
}

pub fn check_prerun(a: &FAutomaton, c: &PointedCoalgebra, pr: &PreRun) -> Result<PreRunReport> {
    if **pr.shape.sig() != **c.sig() || **a.sig() != **c.sig() {
        return Err(Error::Validation("pre-run, automaton and coalgebra use different signatures".into()));
    }
    for r in 0..pr.len() {
        if pr.rho_x[r] >= c.len() {
            return Err(Error::Validation(format!("node r{r} maps to missing subject state {}", pr.rho_x[r])));
        }
        if pr.rho_q[r] >= a.len() {
            return Err(Error::Validation(format!("node r{r} maps to missing automaton state {}", pr.rho_q[r])));
        }
    }
    let sig = c.sig();
    let mut failing = Vec::new();
    let mut morphism = pr.rho_x[pr.root()] == c.root();
    let mut transitions = true;
    for r in 0..pr.len() {
        let fx = sig.fmap(pr.rho_f(r), |&s| pr.rho_x[s]);
        let fq = sig.fmap(pr.rho_f(r), |&s| pr.rho_q[s]);
        let m_ok = fx == *c.xi(pr.rho_x[r]);
        let t_ok = a.has_transition(pr.rho_q[r], &fq);
        morphism &= m_ok;
        transitions &= t_ok;
        if !m_ok || !t_ok {
            failing.push(r);
        }
    }
    Ok(PreRunReport {
        morphism,
        transitions,
        paths: paths_verdict(a, pr),
        initial_root: a.initial.binary_search(&pr.rho_q[pr.root()]).is_ok(),
        failing_nodes: failing,
    })
}

fn run_successors(pr: &PreRun) -> Vec<Vec<usize>> {
    (0..pr.len())
        .map(|r| {
            let set: BTreeSet<usize> = pr.rho_f(r).args().iter().copied().collect();
            set.into_iter().collect()
        })
        .collect()
}

/// Parity condition on every infinite path of a labelled graph.
pub fn allpaths_parity_ok(succ: &[Vec<usize>], priority: &[u32], root: usize) -> bool {
    graph::all_cycles_even(succ, priority, &[root])
}

fn paths_verdict(a: &FAutomaton, pr: &PreRun) -> PathVerdict {
    let succ = run_successors(pr);
    let ok = match &a.acceptance {
        Acceptance::Parity(omega) => {
            let prio: Vec<u32> = (0..pr.len()).map(|r| omega[pr.rho_q[r]]).collect();
            allpaths_parity_ok(&succ, &prio, pr.root())
        }
        Acceptance::OmegaRegular(d) => {
            let mut index: HashMap<(usize, usize), usize> = HashMap::new();
            let mut nodes = vec![(pr.root(), d.initial())];
            index.insert(nodes[0], 0);
            let mut psucc: Vec<Vec<usize>> = Vec::new();
            let mut i = 0;
            while i < nodes.len() {
                let (r, s) = nodes[i];
                let s2 = d.step(s, pr.rho_q[r]);
                let mut out = Vec::new();
                for &r2 in &succ[r] {
                    let key = (r2, s2);
                    let j = *index.entry(key).or_insert_with(|| {
                        nodes.push(key);
                        nodes.len() - 1
                    });
                    out.push(j);
                }
                psucc.push(out);
                i += 1;
            }
            let prio: Vec<u32> = nodes.iter().map(|&(_, s)| d.priority(s)).collect();
            allpaths_parity_ok(&psucc, &prio, 0)
        }
        Acceptance::AlgebraSymbolic(sym) => return symbolic_paths(sym, pr, &succ),
    };
    if ok {
        PathVerdict::Holds
    } else {
        PathVerdict::Fails
    }
}

/// Every infinite path must read `in₁(c₀)` followed by `in₂` labels whose
/// values agree with `γ₁` of the remaining contexts. Cycles are checked by
/// evaluating every rotation; edges leading into cycles only need the local
/// equation `c = γ₀(plug(d', c'))`, which propagates the cycle condition
/// backwards.
fn symbolic_paths(sym: &SymbolicAcceptance, pr: &PreRun, succ: &[Vec<usize>]) -> PathVerdict {
    let alg = &sym.algebra;
    let kind = |r: usize| sym.kinds[pr.rho_q[r]];
    let live = graph::reachable(succ, [pr.root()]);
    let comps = graph::tarjan_scc(succ);
    let mut comp_of = vec![0; pr.len()];
    for (i, comp) in comps.iter().enumerate() {
        for &r in comp {
            comp_of[r] = i;
        }
    }
    let cyclic: Vec<bool> = comps.iter().map(|comp| comp.len() > 1 || succ[comp[0]].contains(&comp[0])).collect();
    // nodes from which an infinite path starts
    let mut infinite = vec![false; pr.len()];
    for (i, comp) in comps.iter().enumerate() {
        for &r in comp {
            infinite[r] = cyclic[i] || succ[r].iter().any(|&s| infinite[s]);
        }
    }
    if !infinite[pr.root()] {
        return PathVerdict::Holds;
    }
    if !matches!(kind(pr.root()), AlgState::Label(_)) {
        return PathVerdict::Fails;
    }
    for r in 0..pr.len() {
        if !live[r] || !infinite[r] {
            continue;
        }
        if r != pr.root() || cyclic[comp_of[r]] {
            if let AlgState::Label(_) = kind(r) {
                if r != pr.root() || cyclic[comp_of[r]] {
                    return PathVerdict::Fails;
                }
            }
        }
    }
    for (i, comp) in comps.iter().enumerate() {
        if !cyclic[i] || !live[comp[0]] {
            continue;
        }
        let inner: usize = comp.iter().flat_map(|&r| pr.rho_f(r).args().iter()).filter(|&&s| comp_of[s] == i).count();
        if inner != comp.len() {
            return PathVerdict::Refused(format!("component of r{} is not a simple cycle", comp[0]));
        }
        let mut order = vec![comp[0]];
        loop {
            let last = *order.last().expect("nonempty");
            let next = *pr.rho_f(last).args().iter().find(|&&s| comp_of[s] == i).expect("cycle successor");
            if next == comp[0] {
                break;
            }
            order.push(next);
        }
        let ctxs: Vec<usize> = order
            .iter()
            .map(|&r| match kind(r) {
                AlgState::Context { ctx, .. } => ctx,
                AlgState::Label(_) => unreachable!("rejected above"),
            })
            .collect();
        let k = order.len();
        for j in 0..k {
            let rotation: Vec<usize> = (1..=k).map(|m| ctxs[(j + m) % k]).collect();
            if alg.gamma1_lasso(&[], &rotation) != kind(order[j]).label() {
                return PathVerdict::Fails;
            }
        }
    }
    for r in 0..pr.len() {
        if !live[r] {
            continue;
        }
        for &s in &succ[r] {
            if !infinite[s] || (comp_of[s] == comp_of[r] && cyclic[comp_of[r]]) {
                continue;
            }
            let AlgState::Context { ctx, label } = kind(s) else {
                return PathVerdict::Fails;
            };
            let plugged = alg.sig().plug(&alg.contexts()[ctx], label);
            if alg.gamma0(&plugged) != kind(r).label() {
                return PathVerdict::Fails;
            }
        }
    }
    PathVerdict::Holds
}

/// A (subject state, automaton state) pair.
type Label = (usize, usize);

/// Node shapes already expanded for one label.
type Tried = HashSet<(FElem<usize>, FElem<Label>)>;

/// Per-label search data: for a pair (subject state, automaton state), the
/// distinct ways to match the subject's structure with a transition.
struct SearchSpace<'a> {
    a: &'a FAutomaton,
    c: &'a PointedCoalgebra,
    choices: HashMap<Label, Vec<FElem<Label>>>,
    forced: HashSet<(usize, usize)>,
}

impl<'a> SearchSpace<'a> {
    fn new(a: &'a FAutomaton, c: &'a PointedCoalgebra) -> Self {
        let sig = c.sig();
        let mut choices = HashMap::new();
        for x in 0..c.len() {
            let xi = c.xi(x);
            let group = sig.op(xi.op()).group();
            for q in 0..a.len() {
                let mut set = BTreeSet::new();
                for t in a.delta(q).iter().filter(|t| t.op() == xi.op()) {
                    for g in group {
                        let pairs = (0..xi.arity()).map(|i| (xi.args()[i], t.args()[g.apply(i)])).collect();
                        set.insert(sig.felem(xi.op(), pairs).expect("arity matches"));
                    }
                }
                choices.insert((x, q), set.into_iter().collect::<Vec<_>>());
            }
        }
        // greatest set of labels that can be continued forever
        loop {
            let feasible: HashSet<(usize, usize)> =
                choices.iter().filter(|(_, v)| !v.is_empty()).map(|(k, _)| *k).collect();
            let mut changed = false;
            for v in choices.values_mut() {
                let before = v.len();
                v.retain(|ch| ch.args().iter().all(|l| feasible.contains(l)));
                changed |= v.len() != before;
            }
            if !changed {
                break;
            }
        }
        let mut forced: HashSet<(usize, usize)> =
            choices.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).collect();
        loop {
            let drop: Vec<(usize, usize)> =
                forced.iter().filter(|l| choices[l][0].args().iter().any(|ch| !forced.contains(ch))).copied().collect();
            if drop.is_empty() {
                break;
            }
            for l in drop {
                forced.remove(&l);
            }
        }
        SearchSpace { a, c, choices, forced }
    }

    fn roots(&self) -> Vec<(usize, usize)> {
        self.a.initial().iter().map(|&q| (self.c.root(), q)).filter(|l| !self.choices[l].is_empty()).collect()
    }

    fn build(&self, labels: &[(usize, usize)], rho_f: Vec<FElem<usize>>) -> PreRun {
        let names = (0..labels.len()).map(|i| format!("r{i}")).collect();
        let shape = PointedCoalgebra::new(self.c.sig().clone(), names, rho_f, 0).expect("well-formed pre-run");
        PreRun { shape, rho_x: labels.iter().map(|l| l.0).collect(), rho_q: labels.iter().map(|l| l.1).collect() }
    }

    fn holds(&self, pr: &PreRun) -> bool {
        paths_verdict(self.a, pr) == PathVerdict::Holds
    }

    /// Depth-first search over pre-runs with one node per label.
    fn positional(&self, root: (usize, usize), budget: &mut usize) -> Option<PreRun> {
        let mut labels = vec![root];
        let mut index = HashMap::from([(root, 0)]);
        let mut picks: Vec<usize> = Vec::new();
        self.positional_rec(&mut labels, &mut index, &mut picks, budget)
    }

    fn positional_rec(
        &self,
        labels: &mut Vec<(usize, usize)>,
        index: &mut HashMap<(usize, usize), usize>,
        picks: &mut Vec<usize>,
        budget: &mut usize,
    ) -> Option<PreRun> {
        let i = picks.len();
        if i == labels.len() {
            let rho_f = (0..labels.len())
                .map(|r| {
                    let ch = &self.choices[&labels[r]][picks[r]];
                    self.c.sig().fmap(ch, |l| index[l])
                })
                .collect();
            let pr = self.build(labels, rho_f);
            return self.holds(&pr).then_some(pr);
        }
        for k in 0..self.choices[&labels[i]].len() {
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
            let added = labels.len();
            for l in self.choices[&labels[i]][k].args() {
                if !index.contains_key(l) {
                    index.insert(*l, labels.len());
                    labels.push(*l);
                }
            }
            picks.push(k);
            if let Some(pr) = self.positional_rec(labels, index, picks, budget) {
                return Some(pr);
            }
            picks.pop();
            for l in labels.drain(added..) {
                index.remove(&l);
            }
        }
        None
    }
}

/// Outcome of a bounded search.
#[derive(Clone, Debug)]
pub struct RunEnumeration {
    /// Minimised accepting runs, one per behaviour, in canonical order.
    pub runs: Vec<PreRun>,
    /// False when the work budget ran out before the space was exhausted.
    pub complete: bool,
    pub explored: usize,
}

/// Default cap on search steps for the bounded enumerator.
pub const DEFAULT_SEARCH_BUDGET: usize = 2_000_000;

struct Enumerator<'s, 'a> {
    space: &'s SearchSpace<'a>,
    bound: usize,
    budget: usize,
    explored: usize,
    labels: Vec<(usize, usize)>,
    rho_f: Vec<Option<FElem<usize>>>,
    found: BTreeMap<RunForm, PreRun>,
    stop_after: usize,
}

impl Enumerator<'_, '_> {
    fn exhausted(&self) -> bool {
        self.explored >= self.budget || self.found.len() >= self.stop_after
    }

    fn expand(&mut self, i: usize) {
        if self.exhausted() {
            return;
        }
        self.explored += 1;
        if i == self.labels.len() {
            let rho_f = self.rho_f.iter().map(|f| f.clone().expect("expanded")).collect();
            let pr = self.space.build(&self.labels, rho_f);
            if self.space.holds(&pr) {
                let run = minimize_prerun(&pr);
                self.found.entry(run.canonical_form()).or_insert(run);
            }
            return;
        }
        let label = self.labels[i];
        // fresh nodes of different labels can share an index, so the choice
        // is part of the key
        let mut tried: Tried = HashSet::new();
        for ch in self.space.choices[&label].clone() {
            let mut assigned = Vec::with_capacity(ch.arity());
            self.assign(i, &ch, &mut assigned, &mut tried);
            if self.exhausted() {
                return;
            }
        }
    }

    fn assign(&mut self, i: usize, ch: &FElem<(usize, usize)>, assigned: &mut Vec<usize>, tried: &mut Tried) {
        let pos = assigned.len();
        if pos == ch.arity() {
            let elem = self.space.c.sig().felem(ch.op(), assigned.clone()).expect("arity matches");
            if !tried.insert((elem.clone(), ch.clone())) {
                return;
            }
            self.rho_f[i] = Some(elem);
            self.expand(i + 1);
            self.rho_f[i] = None;
            return;
        }
        let label = ch.args()[pos];
        let existing: Vec<usize> = (0..self.labels.len()).filter(|&r| self.labels[r] == label).collect();
        let forced = self.space.forced.contains(&label);
        for &r in &existing {
            assigned.push(r);
            self.assign(i, ch, assigned, tried);
            assigned.pop();
            if forced || self.exhausted() {
                return;
            }
        }
        if self.labels.len() < self.bound && !(forced && !existing.is_empty()) {
            self.labels.push(label);
            self.rho_f.push(None);
            assigned.push(self.labels.len() - 1);
            self.assign(i, ch, assigned, tried);
            assigned.pop();
            self.labels.pop();
            self.rho_f.pop();
        }
    }
}

fn enumerate_with(
    a: &FAutomaton,
    c: &PointedCoalgebra,
    bound: usize,
    budget: usize,
    stop_after: usize,
) -> Result<RunEnumeration> {
    check_compatible(a, c)?;
    let space = SearchSpace::new(a, c);
    let mut e = Enumerator {
        space: &space,
        bound,
        budget,
        explored: 0,
        labels: Vec::new(),
        rho_f: Vec::new(),
        found: BTreeMap::new(),
        stop_after,
    };
    if bound > 0 {
        for root in space.roots() {
            e.labels = vec![root];
            e.rho_f = vec![None];
            e.expand(0);
        }
    }
    let complete = e.explored < budget;
    Ok(RunEnumeration { runs: e.found.into_values().collect(), complete, explored: e.explored })
}

fn check_compatible(a: &FAutomaton, c: &PointedCoalgebra) -> Result<()> {
    if **a.sig() != **c.sig() {
        return Err(Error::Invalid("automaton and coalgebra use different signatures".into()));
    }
    Ok(())
}

/// All accepting runs (minimised, deduplicated) having a pre-run of at most
/// `bound` nodes.
pub fn enumerate_accepting_preruns(a: &FAutomaton, c: &PointedCoalgebra, bound: usize) -> Result<RunEnumeration> {
    enumerate_with(a, c, bound, DEFAULT_SEARCH_BUDGET, usize::MAX)
}

pub fn enumerate_accepting_preruns_budgeted(
    a: &FAutomaton,
    c: &PointedCoalgebra,
    bound: usize,
    budget: usize,
) -> Result<RunEnumeration> {
    enumerate_with(a, c, bound, budget, usize::MAX)
}

/// Searches for an accepting pre-run with at most `bound` nodes. Pre-runs
/// with one node per (subject state, automaton state) pair are tried first;
/// the general search runs only if none of those accepts.
pub fn find_accepting_prerun(a: &FAutomaton, c: &PointedCoalgebra, bound: usize) -> Result<Option<PreRun>> {
    check_compatible(a, c)?;
    let space = SearchSpace::new(a, c);
    let mut budget = DEFAULT_SEARCH_BUDGET;
    for root in space.roots() {
        if let Some(pr) = space.positional(root, &mut budget) {
            if pr.len() <= bound {
                return Ok(Some(pr));
            }
        }
    }
    Ok(enumerate_with(a, c, bound, DEFAULT_SEARCH_BUDGET, 1)?.runs.into_iter().next())
}

/// Searches only pre-runs with one node per (subject state, automaton
/// state) pair.
pub fn find_positional_run(a: &FAutomaton, c: &PointedCoalgebra) -> Result<Option<PreRun>> {
    check_compatible(a, c)?;
    let space = SearchSpace::new(a, c);
    let mut budget = DEFAULT_SEARCH_BUDGET;
    Ok(space.roots().into_iter().find_map(|root| space.positional(root, &mut budget)))
}

#[derive(Clone, Debug)]
pub enum AmbiguityVerdict {
    UnambiguousUpToBound {
        bound: usize,
        run: PreRun,
    },
    Ambiguous(Box<PreRun>, Box<PreRun>),
    NoAcceptingRun,
    /// The automaton accepts, yet no accepting pre-run fits the bound or
    /// the search budget ran out.
    BoundTooSmall {
        bound: usize,
    },
}

impl AmbiguityVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            AmbiguityVerdict::UnambiguousUpToBound { .. } => "unambiguous-up-to-bound",
            AmbiguityVerdict::Ambiguous(..) => "ambiguous",
            AmbiguityVerdict::NoAcceptingRun => "no-accepting-run",
            AmbiguityVerdict::BoundTooSmall { .. } => "bound-too-small",
        }
    }
}

impl fmt::Display for AmbiguityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Looks for two distinct accepting runs within `bound` nodes. Membership
/// is decided first, so rejected inputs never reach the search.
pub fn ambiguity_probe(a: &FAutomaton, c: &PointedCoalgebra, bound: usize) -> Result<AmbiguityVerdict> {
    if !accepts(a, c)? {
        return Ok(AmbiguityVerdict::NoAcceptingRun);
    }
    let found = enumerate_with(a, c, bound, DEFAULT_SEARCH_BUDGET, 2)?;
    let mut runs = found.runs.into_iter();
    Ok(match (runs.next(), runs.next()) {
        (Some(r1), Some(r2)) => AmbiguityVerdict::Ambiguous(Box::new(r1), Box::new(r2)),
        (Some(run), None) if found.complete => AmbiguityVerdict::UnambiguousUpToBound { bound, run },
        (Some(_), None) => AmbiguityVerdict::BoundTooSmall { bound },
        (None, _) => AmbiguityVerdict::BoundTooSmall { bound },
    })
}

/// Product with the word automaton of an ω-regular acceptance condition:
/// each successor is paired with the word-automaton state reached by
/// reading the current automaton state.
pub fn to_parity(a: &FAutomaton) -> Result<FAutomaton> {
    let Acceptance::OmegaRegular(d) = &a.acceptance else {
        return Err(Error::Invalid("to_parity needs an ω-regular acceptance condition".into()));
    };
    if d.alphabet() != a.len() {
        return Err(Error::Invalid("word automaton alphabet does not match the state set".into()));
    }
    let nd = d.len();
    let id = |q: usize, s: usize| q * nd + s;
    let mut names = Vec::with_capacity(a.len() * nd);
    let mut delta = Vec::with_capacity(a.len() * nd);
    let mut prio = Vec::with_capacity(a.len() * nd);
    for q in 0..a.len() {
        for s in 0..nd {
            names.push(format!("({}, d{s})", a.names[q]));
            let s2 = d.step(s, q);
            delta.push(a.delta[q].iter().map(|t| a.sig.fmap(t, |&p| id(p, s2))).collect());
            prio.push(d.priority(s));
        }
    }
    let initial = a.initial.iter().map(|&q| id(q, d.initial())).collect();
    FAutomaton::new(a.sig.clone(), names, delta, initial, Acceptance::Parity(prio))
}

/// Language membership decided through the automaton's algebra and the
/// unique marking of the coalgebra.
pub fn accepts(a: &FAutomaton, c: &PointedCoalgebra) -> Result<bool> {
    check_compatible(a, c)?;
    if !c.is_thin() {
        return Err(Error::NotThin);
    }
    let c = c.reachable_part();
    match &a.acceptance {
        Acceptance::Parity(_) => {
            let alg = LazyAutomatonAlgebra::new(a)?;
            let m = algebra::compute_marking(&alg, &c)?;
            Ok(a.initial.iter().any(|q| m.value(c.root()).contains(*q)))
        }
        Acceptance::OmegaRegular(_) => accepts(&trim_reachable(&to_parity(a)?), &c),
        Acceptance::AlgebraSymbolic(sym) => {
            let m = algebra::compute_marking(sym.algebra.as_ref(), &c)?;
            let root = m.value(c.root());
            Ok(sym.kinds.iter().enumerate().any(|(q, k)| *k == AlgState::Label(*root) && a.initial.contains(&q)))
        }
    }
}
