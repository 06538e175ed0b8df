//! Finite pointed coalgebras, their successor multigraphs, thinness and
//! behavioural minimisation.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functor::{FElem, Signature};
use crate::graph;

pub type State = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedCoalgebra {
    sig: Arc<Signature>,
    names: Vec<String>,
    xi: Vec<FElem<State>>,
    root: State,
}

impl PointedCoalgebra {
    pub fn new(sig: Arc<Signature>, names: Vec<String>, xi: Vec<FElem<State>>, root: State) -> Result<Self> {
        let n = names.len();
        if xi.len() != n {
            return Err(Error::Invalid(format!("{n} state names but {} transitions", xi.len())));
        }
        if root >= n {
            return Err(Error::StateOutOfRange { state: root, len: n });
        }
        let xi = xi
            .into_iter()
            .map(|e| {
                if let Some(&bad) = e.args().iter().find(|&&a| a >= n) {
                    return Err(Error::StateOutOfRange { state: bad, len: n });
                }
                sig.felem(e.op(), e.args().to_vec())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PointedCoalgebra { sig, names, xi, root })
    }

    /// Builds a coalgebra from `(state, op, args)` rows given by name.
    pub fn from_rows(sig: Arc<Signature>, root: &str, rows: &[(&str, &str, &[&str])]) -> Result<Self> {
        let names: Vec<String> = rows.iter().map(|r| r.0.to_string()).collect();
        let index: HashMap<&str, usize> = rows.iter().enumerate().map(|(i, r)| (r.0, i)).collect();
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| Error::Invalid(format!("unknown state `{s}`")));
        let xi = rows
            .iter()
            .map(|&(_, op, args)| {
                let args = args.iter().map(|a| lookup(a)).collect::<Result<Vec<_>>>()?;
                sig.felem_named(op, args)
            })
            .collect::<Result<Vec<_>>>()?;
        let root = lookup(root)?;
        PointedCoalgebra::new(sig, names, xi, root)
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

    pub fn name(&self, s: State) -> &str {
        &self.names[s]
    }

    pub fn xi(&self, s: State) -> &FElem<State> {
        &self.xi[s]
    }

    pub fn structure(&self) -> &[FElem<State>] {
        &self.xi
    }

    pub fn root(&self) -> State {
        self.root
    }

    pub fn with_root(&self, root: State) -> Result<Self> {
        PointedCoalgebra::new(self.sig.clone(), self.names.clone(), self.xi.clone(), root)
    }

    fn succ_lists(&self) -> Vec<Vec<State>> {
        self.xi
            .iter()
            .map(|e| {
                let mut s = e.args().to_vec();
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect()
    }

    pub fn reachable_mask(&self) -> Vec<bool> {
        graph::reachable(&self.succ_lists(), [self.root])
    }

    pub fn is_reachable(&self) -> bool {
        self.reachable_mask().iter().all(|&b| b)
    }

    /// Restriction to the states reachable from the root, with the map from
    /// new states to old ones.
    pub fn reachable_part_with_map(&self) -> (PointedCoalgebra, Vec<State>) {
        let mask = self.reachable_mask();
        let kept: Vec<State> = (0..self.len()).filter(|&s| mask[s]).collect();
        let mut new_id = vec![usize::MAX; self.len()];
        for (i, &s) in kept.iter().enumerate() {
            new_id[s] = i;
        }
        let xi = kept.iter().map(|&s| self.sig.fmap(&self.xi[s], |&t| new_id[t])).collect();
        let names = kept.iter().map(|&s| self.names[s].clone()).collect();
        let c = PointedCoalgebra { sig: self.sig.clone(), names, xi, root: new_id[self.root] };
        (c, kept)
    }

    pub fn reachable_part(&self) -> PointedCoalgebra {
        self.reachable_part_with_map().0
    }

    pub fn successor_multigraph(&self) -> SuccessorMultigraph {
        let edges = self
            .xi
            .iter()
            .map(|e| {
                let mut m: BTreeMap<State, usize> = BTreeMap::new();
                for &a in e.args() {
                    *m.entry(a).or_default() += 1;
                }
                m.into_iter().collect()
            })
            .collect();
        SuccessorMultigraph { edges }
    }

    /// No reachable state lies on two distinct cycles; parallel edges count
    /// as distinct. Decided structurally: every cyclic component of the
    /// reachable part is one simple cycle of multiplicity-one edges.
    pub fn is_thin(&self) -> bool {
        let mask = self.reachable_mask();
        self.successor_multigraph().cyclic_components_are_simple(&mask)
    }

    /// Thinness decided by looking for a second simple cycle through each
    /// reachable state. Exponential in the worst case; kept as a cross-check.
    pub fn is_thin_by_cycles(&self) -> bool {
        let g = self.successor_multigraph();
        let mask = self.reachable_mask();
        (0..self.len()).filter(|&v| mask[v]).all(|v| g.simple_cycles_through(v, 2) < 2)
    }

    /// Coarsest partition compatible with the structure map and, when given,
    /// with `labels`. Blocks are numbered by their least state.
    pub fn behavioral_partition(&self, labels: Option<&[usize]>) -> StatePartition {
        let n = self.len();
        let mut block: Vec<usize> = match labels {
            Some(l) => StatePartition::from_keys(&l[..n]).block_of,
            None => vec![0; n],
        };
        let mut count = block.iter().max().map_or(0, |m| m + 1);
        loop {
            let keys: Vec<(usize, FElem<usize>)> =
                (0..n).map(|s| (block[s], self.sig.fmap(&self.xi[s], |&t| block[t]))).collect();
            let next = StatePartition::from_keys(&keys);
            let next_count = next.len();
            block = next.block_of;
            if next_count == count {
                break;
            }
            count = next_count;
        }
        StatePartition::from_block_of(block)
    }

    /// The quotient by a structure-compatible partition, with the quotient map.
    pub fn quotient(&self, p: &StatePartition) -> Result<(PointedCoalgebra, Vec<State>)> {
        if p.block_of.len() != self.len() {
            return Err(Error::Invalid("partition does not cover the state set".into()));
        }
        let mut xi = Vec::with_capacity(p.len());
        for b in &p.blocks {
            let image = self.sig.fmap(&self.xi[b[0]], |&t| p.block_of[t]);
            if b[1..].iter().any(|&s| self.sig.fmap(&self.xi[s], |&t| p.block_of[t]) != image) {
                return Err(Error::Validation(format!(
                    "partition is not compatible with the structure map at block of `{}`",
                    self.names[b[0]]
                )));
            }
            xi.push(image);
        }
        let names = p.blocks.iter().map(|b| self.names[b[0]].clone()).collect();
        let q = PointedCoalgebra { sig: self.sig.clone(), names, xi, root: p.block_of[self.root] };
        Ok((q, p.block_of.clone()))
    }

    /// Reachable part of the behavioural quotient.
    pub fn minimize(&self) -> PointedCoalgebra {
        let p = self.behavioral_partition(None);
        let (q, _) = self.quotient(&p).expect("behavioural partition is compatible");
        q.reachable_part()
    }

    /// An isomorphism-invariant description of the behaviour of the root:
    /// two pointed coalgebras (with labels) get equal forms iff their
    /// minimal reachable quotients are isomorphic.
    pub fn canonical_form(&self, labels: Option<&[usize]>) -> CanonicalForm {
        let p = self.behavioral_partition(labels);
        let (q, map) = self.quotient(&p).expect("behavioural partition is compatible");
        let (q, kept) = q.reachable_part_with_map();
        let mut qlabels = vec![0; q.len()];
        if let Some(l) = labels {
            for s in 0..self.len() {
                if let Some(i) = kept.iter().position(|&k| k == map[s]) {
                    qlabels[i] = l[s];
                }
            }
        }
        // rank-based refinement: ids depend only on isomorphism-invariant data
        let mut id = dense_ranks(&qlabels);
        loop {
            let keys: Vec<(usize, FElem<usize>)> =
                (0..q.len()).map(|s| (id[s], q.sig.fmap(&q.xi[s], |&t| id[t]))).collect();
            let next = dense_ranks(&keys);
            let done = next.iter().max() == id.iter().max();
            id = next;
            if done {
                break;
            }
        }
        let mut states = vec![None; q.len()];
        for s in 0..q.len() {
            states[id[s]] = Some((qlabels[s], q.sig.fmap(&q.xi[s], |&t| id[t])));
        }
        CanonicalForm {
            root: id[q.root],
            states: states.into_iter().map(|s| s.expect("ids are a bijection on a minimal coalgebra")).collect(),
        }
    }
}

fn dense_ranks<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<&K> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(&k).expect("present")).collect()
}

/// Canonical description produced by [`PointedCoalgebra::canonical_form`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    pub root: usize,
    pub states: Vec<(usize, FElem<usize>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuccessorMultigraph {
    /// Per state: `(successor, multiplicity)`, sorted by successor.
    edges: Vec<Vec<(State, usize)>>,
}

impl SuccessorMultigraph {
    pub fn edges(&self, s: State) -> &[(State, usize)] {
        &self.edges[s]
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn multiplicity(&self, a: State, b: State) -> usize {
        self.edges[a].iter().find(|e| e.0 == b).map_or(0, |e| e.1)
    }

    pub fn successors(&self) -> Vec<Vec<State>> {
        self.edges.iter().map(|es| es.iter().map(|e| e.0).collect()).collect()
    }

    pub fn scc_condensation(&self) -> Condensation {
        let components = graph::tarjan_scc(&self.successors());
        let mut component_of = vec![0; self.len()];
        for (i, c) in components.iter().enumerate() {
            for &v in c {
                component_of[v] = i;
            }
        }
        let cyclic = components.iter().map(|c| c.len() > 1 || self.multiplicity(c[0], c[0]) > 0).collect();
        Condensation { components, component_of, cyclic }
    }

    /// Every cyclic component among the `live` nodes is a simple cycle whose
    /// edges all have multiplicity one.
    pub(crate) fn cyclic_components_are_simple(&self, live: &[bool]) -> bool {
        let cond = self.scc_condensation();
        cond.components.iter().enumerate().all(|(i, comp)| {
            if !cond.cyclic[i] || !live[comp[0]] {
                return true;
            }
            let inner: usize = comp
                .iter()
                .flat_map(|&v| self.edges[v].iter())
                .filter(|e| cond.component_of[e.0] == i)
                .map(|e| e.1)
                .sum();
            inner == comp.len()
        })
    }

    /// Number of simple cycles through `v` (parallel edges distinct), capped.
    pub fn simple_cycles_through(&self, v: State, cap: usize) -> usize {
        fn go(g: &SuccessorMultigraph, v: State, at: State, on: &mut Vec<bool>, found: &mut usize, cap: usize) {
            for &(w, m) in &g.edges[at] {
                if *found >= cap {
                    return;
                }
                if w == v {
                    *found += m;
                } else if !on[w] {
                    on[w] = true;
                    let before = *found;
                    go(g, v, w, on, found, cap);
                    // every cycle through this edge is repeated m times
                    *found += (*found - before) * (m - 1);
                    on[w] = false;
                }
            }
        }
        let mut on = vec![false; self.len()];
        on[v] = true;
        let mut found = 0;
        go(self, v, v, &mut on, &mut found, cap);
        found.min(cap)
    }
}

/// SCCs listed sinks first, members sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condensation {
    pub components: Vec<Vec<State>>,
    pub component_of: Vec<usize>,
    /// Whether the component contains a cycle (size > 1 or a self-loop).
    pub cyclic: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatePartition {
    block_of: Vec<usize>,
    blocks: Vec<Vec<State>>,
}

impl StatePartition {
    /// Normalises an arbitrary block assignment: blocks are renumbered by
    /// their least member.
    pub fn from_block_of(raw: Vec<usize>) -> Self {
        Self::from_keys(&raw)
    }

    fn from_keys<K: Eq + std::hash::Hash>(keys: &[K]) -> Self {
        let mut ids: HashMap<&K, usize> = HashMap::new();
        let mut blocks: Vec<Vec<State>> = Vec::new();
        let block_of = keys
            .iter()
            .enumerate()
            .map(|(s, k)| {
                let next = blocks.len();
                let b = *ids.entry(k).or_insert(next);
                if b == next {
                    blocks.push(Vec::new());
                }
                blocks[b].push(s);
                b
            })
            .collect();
        StatePartition { block_of, blocks }
    }

    pub fn discrete(n: usize) -> Self {
        Self::from_block_of((0..n).collect())
    }

    pub fn block_of(&self, s: State) -> usize {
        self.block_of[s]
    }

    pub fn blocks(&self) -> &[Vec<State>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.len() == self.block_of.len()
    }
}
