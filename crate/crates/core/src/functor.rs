//! Analytic functors `F(X) = ⨆ X^{U_i}/H_i` given by a finite signature.
//!
//! An element of `F(X)` is stored as the least representative of its orbit
//! under the symmetry group of its operation, so structural equality is
//! equality in the quotient.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// A permutation of `0..n`, stored by its image: `i ↦ image[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &i in &image {
            if i >= n || seen[i] {
                return Err(Error::InvalidPermutation(format!("{image:?} is not a bijection")));
            }
            seen[i] = true;
        }
        Ok(Permutation(image))
    }

    /// Parses cycle notation such as `"(0 1)(2 3)"`. `"()"` is the identity.
    pub fn from_cycles(text: &str, degree: usize) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidPermutation(format!("`{text}`: {msg}"));
        let mut image: Vec<usize> = (0..degree).collect();
        let mut used = vec![false; degree];
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(|| bad("expected `(`"))?;
            let close = body.find(')').ok_or_else(|| bad("unclosed cycle"))?;
            let cycle = body[..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().map_err(|_| bad("expected a point")))
                .collect::<Result<Vec<_>>>()?;
            for &p in &cycle {
                if p >= degree {
                    return Err(bad(&format!("point {p} exceeds degree {degree}")));
                }
                if used[p] {
                    return Err(bad(&format!("point {p} appears twice")));
                }
                used[p] = true;
            }
            for (j, &p) in cycle.iter().enumerate() {
                image[p] = cycle[(j + 1) % cycle.len()];
            }
            rest = body[close + 1..].trim_start();
        }
        Ok(Permutation(image))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Cycle notation without fixed points; the identity prints as `()`.
    pub fn to_cycles(&self) -> String {
        let mut out = String::new();
        let mut seen = vec![false; self.0.len()];
        for start in 0..self.0.len() {
            if seen[start] || self.0[start] == start {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut i = self.0[start];
            while i != start {
                seen[i] = true;
                cycle.push(i);
                i = self.0[i];
            }
            let parts: Vec<String> = cycle.iter().map(usize::to_string).collect();
            out.push_str(&format!("({})", parts.join(" ")));
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycles())
    }
}

/// Closes a generating set into the full permutation group, sorted.
pub fn group_closure(generators: &[Permutation], arity: usize) -> Result<Vec<Permutation>> {
    if let Some(g) = generators.iter().find(|g| g.degree() != arity) {
        return Err(Error::InvalidPermutation(format!(
            "generator {g} has degree {} but the arity is {arity}",
            g.degree()
        )));
    }
    let id = Permutation::identity(arity);
    let mut seen: HashSet<Permutation> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for g in generators {
            let q = g.compose(&p);
            if seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    let mut group: Vec<Permutation> = seen.into_iter().collect();
    group.sort();
    Ok(group)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpDef {
    name: String,
    arity: usize,
    generators: Vec<Permutation>,
    group: Vec<Permutation>,
}

impl OpDef {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn group(&self) -> &[Permutation] {
        &self.group
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    ops: Vec<OpDef>,
}

/// An element of `F(T)`: an operation together with its arguments, in
/// canonical (orbit-least) order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FElem<T> {
    op: OpId,
    args: Vec<T>,
}

/// A one-hole context, an element of the derivative `F'(T)`. `args` lists
/// the non-hole positions in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FCtx<T> {
    op: OpId,
    hole: usize,
    args: Vec<T>,
}

impl<T> FElem<T> {
    pub fn op(&self) -> OpId {
        self.op
    }

    pub fn args(&self) -> &[T] {
        &self.args
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// The set of elements occurring in `self`.
    pub fn base(&self) -> BTreeSet<T>
    where
        T: Ord + Clone,
    {
        self.args.iter().cloned().collect()
    }

    pub fn display_with<'a, F, D>(&'a self, sig: &'a Signature, name: F) -> String
    where
        F: Fn(&T) -> D,
        D: fmt::Display,
    {
        let args: Vec<String> = self.args.iter().map(|a| name(a).to_string()).collect();
        format!("{}({})", sig.op(self.op).name, args.join(", "))
    }
}

impl<T> FCtx<T> {
    pub fn op(&self) -> OpId {
        self.op
    }

    pub fn hole(&self) -> usize {
        self.hole
    }

    /// Arguments at the non-hole positions, in position order.
    pub fn args(&self) -> &[T] {
        &self.args
    }

    /// Position-indexed view with `None` at the hole.
    pub fn full(&self) -> Vec<Option<&T>> {
        let mut it = self.args.iter();
        (0..=self.args.len()).map(|i| if i == self.hole { None } else { it.next() }).collect()
    }

    pub fn display_with<F, D>(&self, sig: &Signature, name: F) -> String
    where
        F: Fn(&T) -> D,
        D: fmt::Display,
    {
        let parts: Vec<String> =
            self.full().into_iter().map(|a| a.map_or_else(|| "_".to_string(), |a| name(a).to_string())).collect();
        format!("{}({})", sig.op(self.op).name, parts.join(", "))
    }
}

impl Signature {
    /// Builds a signature from `(name, arity, generators)` triples.
    pub fn new(ops: Vec<(String, usize, Vec<Permutation>)>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidSignature("no operations".into()));
        }
        let mut names = HashSet::new();
        let mut defs = Vec::with_capacity(ops.len());
        for (name, arity, generators) in ops {
            if !names.insert(name.clone()) {
                return Err(Error::InvalidSignature(format!("duplicate operation `{name}`")));
            }
            let group = group_closure(&generators, arity)?;
            defs.push(OpDef { name, arity, generators, group });
        }
        Ok(Signature { ops: defs })
    }

    /// Convenience constructor with generators in cycle notation.
    pub fn from_cycles(ops: &[(&str, usize, &[&str])]) -> Result<Self> {
        let ops = ops
            .iter()
            .map(|&(name, arity, gens)| {
                let gens = gens.iter().map(|g| Permutation::from_cycles(g, arity)).collect::<Result<Vec<_>>>()?;
                Ok((name.to_string(), arity, gens))
            })
            .collect::<Result<Vec<_>>>()?;
        Signature::new(ops)
    }

    pub fn ops(&self) -> &[OpDef] {
        &self.ops
    }

    pub fn op(&self, id: OpId) -> &OpDef {
        &self.ops[id.0]
    }

    pub fn op_id(&self, name: &str) -> Option<OpId> {
        self.ops.iter().position(|o| o.name == name).map(OpId)
    }

    pub fn max_arity(&self) -> usize {
        self.ops.iter().map(|o| o.arity).max().unwrap_or(0)
    }

    fn check_arity(&self, op: OpId, got: usize) -> Result<()> {
        let def = self.ops.get(op.0).ok_or_else(|| Error::UnknownOp(format!("#{}", op.0)))?;
        if def.arity != got {
            return Err(Error::Arity { op: def.name.clone(), expected: def.arity, got });
        }
        Ok(())
    }

    pub fn felem<T: Ord + Clone>(&self, op: OpId, args: Vec<T>) -> Result<FElem<T>> {
        self.check_arity(op, args.len())?;
        Ok(self.canon(op, args))
    }

    pub fn felem_named<T: Ord + Clone>(&self, name: &str, args: Vec<T>) -> Result<FElem<T>> {
        let op = self.op_id(name).ok_or_else(|| Error::UnknownOp(name.to_string()))?;
        self.felem(op, args)
    }

    /// Builds a context from position-ordered non-hole arguments.
    pub fn fctx<T: Ord + Clone>(&self, op: OpId, hole: usize, args: Vec<T>) -> Result<FCtx<T>> {
        self.check_arity(op, args.len() + 1)?;
        Ok(self.canon_ctx(op, hole, args))
    }

    pub(crate) fn canon<T: Ord + Clone>(&self, op: OpId, args: Vec<T>) -> FElem<T> {
        let group = &self.ops[op.0].group;
        if group.len() == 1 {
            return FElem { op, args };
        }
        let mut best = &group[0];
        for g in &group[1..] {
            let cand = g.0.iter().map(|&i| &args[i]);
            let cur = best.0.iter().map(|&i| &args[i]);
            if cand.cmp(cur) == Ordering::Less {
                best = g;
            }
        }
        let args = best.0.iter().map(|&i| args[i].clone()).collect();
        FElem { op, args }
    }

    fn canon_ctx<T: Ord + Clone>(&self, op: OpId, hole: usize, args: Vec<T>) -> FCtx<T> {
        let group = &self.ops[op.0].group;
        let full = FCtx { op, hole, args };
        if group.len() == 1 {
            return full;
        }
        let view = full.full();
        let mut best: Option<(usize, Vec<&T>)> = None;
        for g in group {
            // ψ = φ ∘ g, so the hole moves to g⁻¹(hole)
            let new_hole = g.0.iter().position(|&i| i == hole).expect("bijection");
            let new_args: Vec<&T> = g.0.iter().filter_map(|&i| view[i]).collect();
            let cand = (new_hole, new_args);
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
        let (hole, args) = best.expect("group is nonempty");
        FCtx { op, hole, args: args.into_iter().cloned().collect() }
    }

    pub fn fmap<T, U: Ord + Clone>(&self, e: &FElem<T>, mut f: impl FnMut(&T) -> U) -> FElem<U> {
        self.canon(e.op, e.args.iter().map(&mut f).collect())
    }

    pub fn try_fmap<T, U: Ord + Clone, E>(
        &self,
        e: &FElem<T>,
        f: impl FnMut(&T) -> Result<U, E>,
    ) -> Result<FElem<U>, E> {
        let args = e.args.iter().map(f).collect::<Result<Vec<_>, E>>()?;
        Ok(self.canon(e.op, args))
    }

    pub fn fctx_map<T, U: Ord + Clone>(&self, c: &FCtx<T>, f: impl FnMut(&T) -> U) -> FCtx<U> {
        self.canon_ctx(c.op, c.hole, c.args.iter().map(f).collect())
    }

    /// Fills the hole of `c` with `x`.
    pub fn plug<T: Ord + Clone>(&self, c: &FCtx<T>, x: T) -> FElem<T> {
        let mut args = Vec::with_capacity(c.args.len() + 1);
        args.extend_from_slice(&c.args[..c.hole]);
        args.push(x);
        args.extend_from_slice(&c.args[c.hole..]);
        self.canon(c.op, args)
    }

    /// The context obtained by punching a hole at position `u` of `e`.
    pub fn context_at<T: Ord + Clone>(&self, e: &FElem<T>, u: usize) -> FCtx<T> {
        let args = e.args.iter().enumerate().filter(|&(i, _)| i != u).map(|(_, a)| a.clone()).collect();
        self.canon_ctx(e.op, u, args)
    }

    /// `□(e)`: every position replaced by the pair (context around it, its value).
    pub fn decompose<T: Ord + Clone>(&self, e: &FElem<T>) -> FElem<(FCtx<T>, T)> {
        let args = (0..e.args.len()).map(|u| (self.context_at(e, u), e.args[u].clone())).collect();
        self.canon(e.op, args)
    }

    /// All ways of writing `e` as `plug(c, x)`.
    pub fn decompositions_of<T: Ord + Clone>(&self, e: &FElem<T>) -> BTreeSet<(FCtx<T>, T)> {
        (0..e.args.len()).map(|u| (self.context_at(e, u), e.args[u].clone())).collect()
    }

    /// Relation lifting: is there an alignment of `p` and `q` (by a group
    /// element) under which every argument of `p` is related to the
    /// corresponding argument of `q`?
    pub fn lifted_membership<T, S>(&self, p: &FElem<T>, q: &FElem<S>, mut rel: impl FnMut(&T, &S) -> bool) -> bool {
        if p.op != q.op {
            return false;
        }
        self.ops[p.op.0].group.iter().any(|g| (0..q.args.len()).all(|i| rel(&p.args[g.0[i]], &q.args[i])))
    }

    /// Relation lifting for contexts; holes must be aligned with holes.
    pub fn lifted_membership_ctx<T, S>(&self, p: &FCtx<T>, q: &FCtx<S>, mut rel: impl FnMut(&T, &S) -> bool) -> bool {
        if p.op != q.op {
            return false;
        }
        let pv = p.full();
        let qv = q.full();
        self.ops[p.op.0].group.iter().any(|g| {
            (0..qv.len()).all(|i| match (pv[g.0[i]], qv[i]) {
                (None, None) => true,
                (Some(a), Some(b)) => rel(a, b),
                _ => false,
            })
        })
    }

    /// One representative per orbit, over all operations.
    pub fn enumerate_felems<T: Ord + Clone>(&self, carrier: &[T]) -> Vec<FElem<T>> {
        let mut out = Vec::new();
        for (k, def) in self.ops.iter().enumerate() {
            for_each_tuple(carrier.len(), def.arity, |idx| {
                let args: Vec<T> = idx.iter().map(|&i| carrier[i].clone()).collect();
                let e = self.canon(OpId(k), args.clone());
                if e.args == args {
                    out.push(e);
                }
            });
        }
        out
    }

    /// Every context over `carrier`, canonical and sorted.
    pub fn enumerate_fctxs<T: Ord + Clone>(&self, carrier: &[T]) -> Vec<FCtx<T>> {
        let mut out = BTreeSet::new();
        for (k, def) in self.ops.iter().enumerate() {
            for hole in 0..def.arity {
                for_each_tuple(carrier.len(), def.arity - 1, |idx| {
                    let args = idx.iter().map(|&i| carrier[i].clone()).collect();
                    out.insert(self.canon_ctx(OpId(k), hole, args));
                });
            }
        }
        out.into_iter().collect()
    }

    /// Given `plug(y_ctx, y) = F(f)(x)`, finds `(x_ctx, x0)` with
    /// `plug(x_ctx, x0) = x`, `f(x0) = y` and `F'(f)(x_ctx) = y_ctx`.
    pub fn plug_pullback_witness<X, Y>(
        &self,
        f: impl Fn(&X) -> Y,
        y_ctx: &FCtx<Y>,
        y: &Y,
        x: &FElem<X>,
    ) -> Result<(FCtx<X>, X)>
    where
        X: Ord + Clone,
        Y: Ord + Clone,
    {
        if self.plug(y_ctx, y.clone()) != self.fmap(x, &f) {
            return Err(Error::PullbackMismatch);
        }
        for u in 0..x.args.len() {
            if f(&x.args[u]) != *y {
                continue;
            }
            let ctx = self.context_at(x, u);
            if self.fctx_map(&ctx, &f) == *y_ctx {
                return Ok((ctx, x.args[u].clone()));
            }
        }
        Err(Error::Internal("no pullback witness found".into()))
    }
}

/// Calls `visit` on every tuple in `0..n` of length `len`, lexicographically.
pub(crate) fn for_each_tuple(n: usize, len: usize, mut visit: impl FnMut(&[usize])) {
    if len > 0 && n == 0 {
        return;
    }
    let mut idx = vec![0; len];
    loop {
        visit(&idx);
        let mut k = len;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
}
