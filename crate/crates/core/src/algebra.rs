//! Finite rational coherent algebras, markings and language membership.

use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::Arc;

use crate::coalgebra::{PointedCoalgebra, State};
use crate::error::{Error, Result};
use crate::functor::{FCtx, FElem, Signature};
use crate::graph;
use crate::omega::{Lasso, Recognizer, WilkeAlgebra, WilkeViolation};

/// Carrier `C` with `γ₀ : FC → C`, a recogniser over the contexts `F'C`
/// whose infinite sort is a subset `W ⊆ C`, and a recognising set `U ⊆ C`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalCoherentAlgebra {
    sig: Arc<Signature>,
    carrier: Vec<String>,
    gamma0: HashMap<FElem<usize>, usize>,
    contexts: Vec<FCtx<usize>>,
    context_index: HashMap<FCtx<usize>, usize>,
    rational: Recognizer,
    w_elems: Vec<usize>,
    recognizing: Vec<bool>,
}

impl RationalCoherentAlgebra {
    /// `gamma0` must be total on the canonical F-elements over the carrier.
    /// The recogniser reads context indices (in `enumerate_fctxs` order) and
    /// `w_elems[w]` is the carrier element standing for `w ∈ W`.
    pub fn new(
        sig: Arc<Signature>,
        carrier: Vec<String>,
        gamma0: HashMap<FElem<usize>, usize>,
        rational: Recognizer,
        w_elems: Vec<usize>,
        recognizing: Vec<bool>,
    ) -> Result<Self> {
        let n = carrier.len();
        if n == 0 {
            return Err(Error::Invalid("carrier must be nonempty".into()));
        }
        let elems: Vec<usize> = (0..n).collect();
        for e in sig.enumerate_felems(&elems) {
            match gamma0.get(&e) {
                Some(&c) if c < n => {}
                Some(&c) => return Err(Error::StateOutOfRange { state: c, len: n }),
                None => {
                    return Err(Error::Invalid(format!("γ₀ undefined on {}", e.display_with(&sig, |c| c.to_string()))))
                }
            }
        }
        if gamma0.len() != sig.enumerate_felems(&elems).len() {
            return Err(Error::Invalid("γ₀ has entries outside the canonical F-elements".into()));
        }
        let contexts = sig.enumerate_fctxs(&elems);
        if rational.alphabet() != contexts.len() {
            return Err(Error::Invalid(format!(
                "recogniser reads {} letters but there are {} contexts",
                rational.alphabet(),
                contexts.len()
            )));
        }
        if w_elems.len() != rational.wilke().n_infinite() {
            return Err(Error::Invalid("every element of W needs a carrier element".into()));
        }
        let mut seen = vec![false; n];
        for &c in &w_elems {
            if c >= n {
                return Err(Error::StateOutOfRange { state: c, len: n });
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::Invalid(format!("carrier element {c} stands for two elements of W")));
            }
        }
        if recognizing.len() != n {
            return Err(Error::Invalid("recognising set must be indexed by the carrier".into()));
        }
        let context_index = contexts.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        Ok(RationalCoherentAlgebra { sig, carrier, gamma0, contexts, context_index, rational, w_elems, recognizing })
    }

    /// The algebra with one element, accepting everything or nothing.
    pub fn one_element(sig: Arc<Signature>, accepting: bool) -> Self {
        let gamma0 = sig.enumerate_felems(&[0usize]).into_iter().map(|e| (e, 0)).collect();
        let letters = sig.enumerate_fctxs(&[0usize]).len();
        let rational = Recognizer::new(WilkeAlgebra::trivial(), vec![0; letters], vec![accepting]).expect("trivial");
        RationalCoherentAlgebra::new(sig, vec!["*".into()], gamma0, rational, vec![0], vec![accepting])
            .expect("one-element algebra")
    }

    pub fn with_recognizing(&self, recognizing: Vec<bool>) -> Result<Self> {
        let accepting = self.w_elems.iter().map(|&c| recognizing.get(c).copied().unwrap_or(false)).collect();
        let rational = Recognizer::new(self.rational.wilke().clone(), self.rational.letter_map().to_vec(), accepting)?;
        RationalCoherentAlgebra::new(
            self.sig.clone(),
            self.carrier.clone(),
            self.gamma0.clone(),
            rational,
            self.w_elems.clone(),
            recognizing,
        )
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn carrier(&self) -> &[String] {
        &self.carrier
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn gamma0(&self, e: &FElem<usize>) -> usize {
        self.gamma0[e]
    }

    pub fn gamma0_table(&self) -> &HashMap<FElem<usize>, usize> {
        &self.gamma0
    }

    pub fn contexts(&self) -> &[FCtx<usize>] {
        &self.contexts
    }

    pub fn context_id(&self, c: &FCtx<usize>) -> Option<usize> {
        self.context_index.get(c).copied()
    }

    pub fn rational(&self) -> &Recognizer {
        &self.rational
    }

    pub fn w_elems(&self) -> &[usize] {
        &self.w_elems
    }

    /// Position of a carrier element in `W`, if it is there.
    pub fn w_index(&self, c: usize) -> Option<usize> {
        self.w_elems.iter().position(|&x| x == c)
    }

    pub fn recognizing(&self) -> &[bool] {
        &self.recognizing
    }

    pub fn is_recognizing(&self, c: usize) -> bool {
        self.recognizing[c]
    }

    /// `γ₂` of a single context.
    pub fn gamma2(&self, ctx: usize) -> usize {
        self.rational.letter(ctx)
    }

    /// `γ₁` of the context stream `stem · loop^ω`, as a carrier element.
    pub fn gamma1_lasso(&self, stem: &[usize], cycle: &[usize]) -> usize {
        let l = Lasso::new(stem.to_vec(), cycle.to_vec()).expect("loop must be nonempty");
        self.w_elems[self.rational.lasso_value(&l)]
    }

    pub fn display_ctx(&self, ctx: usize) -> String {
        self.contexts[ctx].display_with(&self.sig, |&c| self.carrier[c].clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraViolation {
    Wilke(WilkeViolation),
    /// `γ₂(ctx) × w` differs from `γ₀(plug(ctx, w))`.
    Coherence {
        ctx: usize,
        w: usize,
        via_recognizer: usize,
        via_gamma0: usize,
    },
}

pub fn validate_algebra(alg: &RationalCoherentAlgebra) -> Vec<AlgebraViolation> {
    let mut out: Vec<AlgebraViolation> =
        alg.rational.wilke().validate().into_iter().map(AlgebraViolation::Wilke).collect();
    let wilke = alg.rational.wilke();
    for (k, ctx) in alg.contexts.iter().enumerate() {
        for (w, &c) in alg.w_elems.iter().enumerate() {
            let via_recognizer = alg.w_elems[wilke.mixed(alg.gamma2(k), w)];
            let via_gamma0 = alg.gamma0(&alg.sig.plug(ctx, c));
            if via_recognizer != via_gamma0 {
                out.push(AlgebraViolation::Coherence { ctx: k, w, via_recognizer, via_gamma0 });
            }
        }
    }
    out
}

/// What the marking algorithm needs from an algebra: `γ₀` and `γ₁` on
/// periodic context streams.
pub trait CoherentAlgebra {
    type Elem: Clone + Ord + Debug;

    fn sig(&self) -> &Arc<Signature>;

    fn gamma0(&self, e: &FElem<Self::Elem>) -> Result<Self::Elem>;

    /// `γ₁` of the stream `cycle^ω`.
    fn gamma1_cycle(&self, cycle: &[FCtx<Self::Elem>]) -> Result<Self::Elem>;
}

impl CoherentAlgebra for RationalCoherentAlgebra {
    type Elem = usize;

    fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    fn gamma0(&self, e: &FElem<usize>) -> Result<usize> {
        self.gamma0.get(e).copied().ok_or_else(|| Error::Internal("γ₀ lookup outside the table".into()))
    }

    fn gamma1_cycle(&self, cycle: &[FCtx<usize>]) -> Result<usize> {
        let ids = cycle
            .iter()
            .map(|c| self.context_id(c).ok_or_else(|| Error::Internal("unknown context".into())))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.gamma1_lasso(&[], &ids))
    }
}

/// A map from coalgebra states to algebra elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marking<E> {
    values: Vec<E>,
}

impl<E> Marking<E> {
    pub fn new(values: Vec<E>) -> Self {
        Marking { values }
    }

    pub fn value(&self, x: State) -> &E {
        &self.values[x]
    }

    pub fn values(&self) -> &[E] {
        &self.values
    }
}

/// States of a cycle in order, with the argument position leading on.
pub(crate) type Cycle = (Vec<State>, Vec<usize>);

/// Each cyclic component of a thin coalgebra as its states in cycle order,
/// starting from the least, with the argument position of the successor.
pub(crate) fn cycles_of(c: &PointedCoalgebra) -> Result<(Vec<Vec<State>>, Vec<Cycle>)> {
    let succ: Vec<Vec<State>> = c.successor_multigraph().successors();
    let comps = graph::tarjan_scc(&succ);
    let mut comp_of = vec![0; c.len()];
    for (i, comp) in comps.iter().enumerate() {
        for &x in comp {
            comp_of[x] = i;
        }
    }
    let mut cycles = Vec::new();
    for (i, comp) in comps.iter().enumerate() {
        let inner: Vec<usize> =
            comp.iter().map(|&x| c.xi(x).args().iter().filter(|&&y| comp_of[y] == i).count()).collect();
        if inner.iter().all(|&k| k == 0) {
            continue;
        }
        if inner.iter().any(|&k| k != 1) {
            return Err(Error::NotThin);
        }
        let mut order = vec![comp[0]];
        let mut holes = Vec::new();
        loop {
            let x = *order.last().expect("nonempty");
            let pos = c.xi(x).args().iter().position(|&y| comp_of[y] == i).expect("one inner edge");
            holes.push(pos);
            let next = c.xi(x).args()[pos];
            if next == comp[0] {
                break;
            }
            order.push(next);
        }
        cycles.push((order, holes));
    }
    Ok((comps, cycles))
}

/// The unique marking of a thin coalgebra: bottom-up `γ₀` outside cycles,
/// `γ₁` of the sibling-context loop on cycles.
pub fn compute_marking<A: CoherentAlgebra>(alg: &A, c: &PointedCoalgebra) -> Result<Marking<A::Elem>> {
    if **alg.sig() != **c.sig() {
        return Err(Error::Invalid("algebra and coalgebra use different signatures".into()));
    }
    let sig = c.sig();
    let (comps, cycles) = cycles_of(c)?;
    let mut cycle_of: HashMap<State, usize> = HashMap::new();
    for (i, (order, _)) in cycles.iter().enumerate() {
        for &x in order {
            cycle_of.insert(x, i);
        }
    }
    let mut mu: Vec<Option<A::Elem>> = vec![None; c.len()];
    let get = |mu: &Vec<Option<A::Elem>>, y: &State| mu[*y].clone().expect("successor marked before its predecessor");
    for comp in &comps {
        let Some(&ci) = cycle_of.get(&comp[0]) else {
            let x = comp[0];
            let v = alg.gamma0(&sig.fmap(c.xi(x), |y| get(&mu, y)))?;
            mu[x] = Some(v);
            continue;
        };
        let (order, holes) = &cycles[ci];
        let ctxs: Vec<FCtx<A::Elem>> = order
            .iter()
            .zip(holes)
            .map(|(&x, &h)| sig.fctx_map(&sig.context_at(c.xi(x), h), |y| get(&mu, y)))
            .collect();
        let k = order.len();
        for j in 0..k {
            let rotation: Vec<FCtx<A::Elem>> = (0..k).map(|m| ctxs[(j + m) % k].clone()).collect();
            mu[order[j]] = Some(alg.gamma1_cycle(&rotation)?);
        }
        for (j, &x) in order.iter().enumerate() {
            let local = alg.gamma0(&sig.fmap(c.xi(x), |y| get(&mu, y)))?;
            if Some(&local) != mu[x].as_ref() {
                return Err(Error::Internal(format!(
                    "cycle value at state {} (position {j}) is not a γ₀ fixpoint; the algebra is not coherent",
                    c.name(x)
                )));
            }
        }
    }
    Ok(Marking::new(mu.into_iter().map(|v| v.expect("every state marked")).collect()))
}

/// States where a candidate marking violates the local condition (i) or the
/// cycle condition (ii).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MarkingReport {
    pub local_failures: Vec<State>,
    pub cycle_failures: Vec<State>,
}

impl MarkingReport {
    pub fn is_marking(&self) -> bool {
        self.local_failures.is_empty() && self.cycle_failures.is_empty()
    }
}

pub fn check_marking<A: CoherentAlgebra>(alg: &A, c: &PointedCoalgebra, m: &Marking<A::Elem>) -> Result<MarkingReport> {
    if m.values.len() != c.len() {
        return Err(Error::Invalid("marking must cover every state".into()));
    }
    let sig = c.sig();
    let (_, cycles) = cycles_of(c)?;
    let mut report = MarkingReport::default();
    for x in 0..c.len() {
        if alg.gamma0(&sig.fmap(c.xi(x), |y| m.values[*y].clone()))? != m.values[x] {
            report.local_failures.push(x);
        }
    }
    for (order, holes) in &cycles {
        let ctxs: Vec<FCtx<A::Elem>> = order
            .iter()
            .zip(holes)
            .map(|(&x, &h)| sig.fctx_map(&sig.context_at(c.xi(x), h), |y| m.values[*y].clone()))
            .collect();
        let k = order.len();
        for j in 0..k {
            let rotation: Vec<FCtx<A::Elem>> = (0..k).map(|i| ctxs[(j + i) % k].clone()).collect();
            if alg.gamma1_cycle(&rotation)? != m.values[order[j]] {
                report.cycle_failures.push(order[j]);
            }
        }
    }
    report.cycle_failures.sort_unstable();
    Ok(report)
}

/// Is the behaviour of the root in the language of the algebra?
pub fn language_member(alg: &RationalCoherentAlgebra, c: &PointedCoalgebra) -> Result<bool> {
    if !c.is_thin() {
        return Err(Error::NotThin);
    }
    let c = c.reachable_part();
    let m = compute_marking(alg, &c)?;
    Ok(alg.is_recognizing(*m.value(c.root())))
}
