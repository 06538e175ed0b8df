//! Finite ω-semigroups in Wilke form, recognisers, Büchi and parity word
//! automata, and determinisation.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph;

/// Two-sorted finite algebra: a semigroup `S` of finite-word values acting
/// on a set `W` of infinite-word values, with an ω-power `S → W`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WilkeAlgebra {
    n_s: usize,
    n_w: usize,
    mul: Vec<usize>,
    mixed: Vec<usize>,
    omega: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WilkeViolation {
    Associativity { a: usize, b: usize, c: usize },
    MixedAssociativity { s: usize, t: usize, w: usize },
    OmegaUnfold { s: usize },
    OmegaPower { s: usize, n: usize },
    OmegaRotation { s: usize, t: usize },
}

const MAX_REPORTED: usize = 1000;

impl WilkeAlgebra {
    /// Tables are row-major: `mul[a * n_s + b]`, `mixed[s * n_w + w]`.
    pub fn new(n_s: usize, n_w: usize, mul: Vec<usize>, mixed: Vec<usize>, omega: Vec<usize>) -> Result<Self> {
        if n_s == 0 || n_w == 0 {
            return Err(Error::Invalid("both sorts must be nonempty".into()));
        }
        if mul.len() != n_s * n_s || mixed.len() != n_s * n_w || omega.len() != n_s {
            return Err(Error::Invalid("table sizes do not match the sorts".into()));
        }
        if mul.iter().any(|&x| x >= n_s) || mixed.iter().chain(&omega).any(|&x| x >= n_w) {
            return Err(Error::Invalid("table entry out of range".into()));
        }
        Ok(WilkeAlgebra { n_s, n_w, mul, mixed, omega })
    }

    pub fn trivial() -> Self {
        WilkeAlgebra { n_s: 1, n_w: 1, mul: vec![0], mixed: vec![0], omega: vec![0] }
    }

    pub fn n_finite(&self) -> usize {
        self.n_s
    }

    pub fn n_infinite(&self) -> usize {
        self.n_w
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n_s + b]
    }

    pub fn mixed(&self, s: usize, w: usize) -> usize {
        self.mixed[s * self.n_w + w]
    }

    pub fn omega(&self, s: usize) -> usize {
        self.omega[s]
    }

    pub fn power(&self, s: usize, n: usize) -> usize {
        assert!(n >= 1, "powers start at 1");
        (1..n).fold(s, |acc, _| self.mul(acc, s))
    }

    /// The idempotent among the powers of `s` (least exponent).
    pub fn idempotent_power(&self, s: usize) -> usize {
        let mut p = s;
        for _ in 0..=self.n_s {
            if self.mul(p, p) == p {
                return p;
            }
            p = self.mul(p, s);
        }
        unreachable!("some power of a finite semigroup element is idempotent")
    }

    /// Exhaustive axiom check; at most a bounded number of violations is
    /// reported.
    pub fn validate(&self) -> Vec<WilkeViolation> {
        let mut out = Vec::new();
        let full = |out: &Vec<WilkeViolation>| out.len() >= MAX_REPORTED;
        for a in 0..self.n_s {
            for b in 0..self.n_s {
                let ab = self.mul(a, b);
                for c in 0..self.n_s {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        out.push(WilkeViolation::Associativity { a, b, c });
                        if full(&out) {
                            return out;
                        }
                    }
                }
                for w in 0..self.n_w {
                    if self.mixed(ab, w) != self.mixed(a, self.mixed(b, w)) {
                        out.push(WilkeViolation::MixedAssociativity { s: a, t: b, w });
                        if full(&out) {
                            return out;
                        }
                    }
                }
                if self.omega(ab) != self.mixed(a, self.omega(self.mul(b, a))) {
                    out.push(WilkeViolation::OmegaRotation { s: a, t: b });
                    if full(&out) {
                        return out;
                    }
                }
            }
        }
        for s in 0..self.n_s {
            if self.omega(s) != self.mixed(s, self.omega(s)) {
                out.push(WilkeViolation::OmegaUnfold { s });
            }
            let mut seen = BTreeSet::from([s]);
            let mut p = s;
            let mut n = 1;
            loop {
                p = self.mul(p, s);
                n += 1;
                if !seen.insert(p) {
                    break;
                }
                if self.omega(p) != self.omega(s) {
                    out.push(WilkeViolation::OmegaPower { s, n });
                }
            }
            if full(&out) {
                return out;
            }
        }
        out
    }
}

pub fn validate_wilke(w: &WilkeAlgebra) -> Vec<WilkeViolation> {
    w.validate()
}

/// An ultimately periodic word `stem · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lasso {
    stem: Vec<usize>,
    cycle: Vec<usize>,
}

impl Lasso {
    pub fn new(stem: Vec<usize>, cycle: Vec<usize>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Invalid("lasso loop must be nonempty".into()));
        }
        Ok(Lasso { stem, cycle })
    }

    pub fn stem(&self) -> &[usize] {
        &self.stem
    }

    pub fn cycle(&self) -> &[usize] {
        &self.cycle
    }

    /// Letter at position `i` of the infinite word.
    pub fn at(&self, i: usize) -> usize {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    /// The same infinite word with its first `k` letters dropped.
    pub fn suffix(&self, k: usize) -> Lasso {
        if k <= self.stem.len() {
            return Lasso { stem: self.stem[k..].to_vec(), cycle: self.cycle.clone() };
        }
        let r = (k - self.stem.len()) % self.cycle.len();
        let mut cycle = self.cycle[r..].to_vec();
        cycle.extend_from_slice(&self.cycle[..r]);
        Lasso { stem: Vec::new(), cycle }
    }

    pub fn len(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Every lasso over `alphabet` letters with `|stem| + |loop| ≤ max_len`.
    pub fn enumerate(alphabet: usize, max_len: usize) -> Vec<Lasso> {
        let mut out = Vec::new();
        for total in 1..=max_len {
            for stem_len in 0..total {
                crate::functor::for_each_tuple(alphabet, total, |w| {
                    out.push(Lasso { stem: w[..stem_len].to_vec(), cycle: w[stem_len..].to_vec() });
                });
            }
        }
        out
    }
}

/// A Wilke algebra with a letter map and a recognising subset of `W`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recognizer {
    wilke: WilkeAlgebra,
    letter_map: Vec<usize>,
    accepting: Vec<bool>,
}

impl Recognizer {
    pub fn new(wilke: WilkeAlgebra, letter_map: Vec<usize>, accepting: Vec<bool>) -> Result<Self> {
        if letter_map.iter().any(|&s| s >= wilke.n_s) {
            return Err(Error::Invalid("letter image out of range".into()));
        }
        if accepting.len() != wilke.n_w {
            return Err(Error::Invalid("accepting set must be indexed by W".into()));
        }
        Ok(Recognizer { wilke, letter_map, accepting })
    }

    pub fn wilke(&self) -> &WilkeAlgebra {
        &self.wilke
    }

    pub fn letter_map(&self) -> &[usize] {
        &self.letter_map
    }

    pub fn letter(&self, a: usize) -> usize {
        self.letter_map[a]
    }

    pub fn alphabet(&self) -> usize {
        self.letter_map.len()
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    pub fn fold_word(&self, word: &[usize]) -> Result<usize> {
        let (&first, rest) = word.split_first().ok_or_else(|| Error::Invalid("empty word".into()))?;
        Ok(rest.iter().fold(self.letter(first), |acc, &a| self.wilke.mul(acc, self.letter(a))))
    }

    pub fn lasso_value(&self, l: &Lasso) -> usize {
        let w = self.wilke.omega(self.fold_word(&l.cycle).expect("loop is nonempty"));
        if l.stem.is_empty() {
            w
        } else {
            self.wilke.mixed(self.fold_word(&l.stem).expect("stem is nonempty"), w)
        }
    }

    pub fn accepts_lasso(&self, l: &Lasso) -> bool {
        self.accepting[self.lasso_value(l)]
    }

    /// Quotient by the coarsest congruence that saturates the accepting
    /// set, restricted to the part generated by the letters. Recognises the
    /// same lassos.
    pub fn reduced(&self) -> Recognizer {
        let w = &self.wilke;
        // generated part
        let mut s_live = vec![false; w.n_s];
        let mut stack: Vec<usize> = self.letter_map.clone();
        for &s in &stack {
            s_live[s] = true;
        }
        let mut s_list = Vec::new();
        while let Some(s) = stack.pop() {
            s_list.push(s);
            for &t in &self.letter_map {
                let st = w.mul(s, t);
                if !s_live[st] {
                    s_live[st] = true;
                    stack.push(st);
                }
            }
        }
        s_list.sort_unstable();
        let mut w_live = vec![false; w.n_w];
        let mut w_stack: Vec<usize> = s_list.iter().map(|&s| w.omega(s)).collect();
        for &x in &w_stack {
            w_live[x] = true;
        }
        while let Some(x) = w_stack.pop() {
            for &s in &s_list {
                let sx = w.mixed(s, x);
                if !w_live[sx] {
                    w_live[sx] = true;
                    w_stack.push(sx);
                }
            }
        }
        let w_list: Vec<usize> = (0..w.n_w).filter(|&x| w_live[x]).collect();
        // partition refinement
        let mut s_block: Vec<usize> = vec![0; w.n_s];
        let mut w_block: Vec<usize> = (0..w.n_w).map(|x| usize::from(self.accepting[x])).collect();
        loop {
            let s_keys: Vec<(usize, Vec<usize>)> = s_list
                .iter()
                .map(|&s| {
                    let mut k = vec![w_block[w.omega(s)]];
                    k.extend(s_list.iter().map(|&t| s_block[w.mul(s, t)]));
                    k.extend(s_list.iter().map(|&t| s_block[w.mul(t, s)]));
                    k.extend(w_list.iter().map(|&x| w_block[w.mixed(s, x)]));
                    (s_block[s], k)
                })
                .collect();
            let w_keys: Vec<(usize, Vec<usize>)> = w_list
                .iter()
                .map(|&x| (w_block[x], s_list.iter().map(|&s| w_block[w.mixed(s, x)]).collect()))
                .collect();
            let new_s = number_keys(&s_keys);
            let new_w = number_keys(&w_keys);
            let before = (distinct(s_list.iter().map(|&s| s_block[s])), distinct(w_list.iter().map(|&x| w_block[x])));
            let after = (distinct(new_s.iter().copied()), distinct(new_w.iter().copied()));
            for (i, &s) in s_list.iter().enumerate() {
                s_block[s] = new_s[i];
            }
            for (i, &x) in w_list.iter().enumerate() {
                w_block[x] = new_w[i];
            }
            if before == after {
                break;
            }
        }
        let n_s = distinct(s_list.iter().map(|&s| s_block[s]));
        let n_w = distinct(w_list.iter().map(|&x| w_block[x]));
        let mut rep_s = vec![usize::MAX; n_s];
        for &s in &s_list {
            if rep_s[s_block[s]] == usize::MAX {
                rep_s[s_block[s]] = s;
            }
        }
        let mut rep_w = vec![usize::MAX; n_w];
        for &x in &w_list {
            if rep_w[w_block[x]] == usize::MAX {
                rep_w[w_block[x]] = x;
            }
        }
        let (sb, wb) = (&s_block, &w_block);
        let mul = rep_s.iter().flat_map(|&a| rep_s.iter().map(move |&b| sb[w.mul(a, b)])).collect();
        let mixed = rep_s.iter().flat_map(|&a| rep_w.iter().map(move |&x| wb[w.mixed(a, x)])).collect();
        let omega = rep_s.iter().map(|&a| w_block[w.omega(a)]).collect();
        let wilke = WilkeAlgebra::new(n_s, n_w, mul, mixed, omega).expect("quotient tables are well formed");
        let letter_map = self.letter_map.iter().map(|&s| s_block[s]).collect();
        let accepting = rep_w.iter().map(|&x| self.accepting[x]).collect();
        Recognizer::new(wilke, letter_map, accepting).expect("quotient recogniser")
    }
}

/// Renumbers keys densely by first occurrence.
fn number_keys<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut ids: std::collections::BTreeMap<K, usize> = std::collections::BTreeMap::new();
    keys.iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k.clone()).or_insert(next)
        })
        .collect()
}

fn distinct(it: impl Iterator<Item = usize>) -> usize {
    it.collect::<BTreeSet<_>>().len()
}

/// Nondeterministic Büchi word automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nbw {
    alphabet: usize,
    trans: Vec<Vec<Vec<usize>>>,
    initial: Vec<usize>,
    accepting: Vec<bool>,
}

impl Nbw {
    pub fn new(
        alphabet: usize,
        trans: Vec<Vec<Vec<usize>>>,
        initial: Vec<usize>,
        accepting: Vec<bool>,
    ) -> Result<Self> {
        let n = trans.len();
        if accepting.len() != n || trans.iter().any(|row| row.len() != alphabet) {
            return Err(Error::Invalid("malformed NBW tables".into()));
        }
        if initial.iter().chain(trans.iter().flatten().flatten()).any(|&q| q >= n) {
            return Err(Error::Invalid("NBW state out of range".into()));
        }
        let mut trans = trans;
        for t in trans.iter_mut().flatten() {
            t.sort_unstable();
            t.dedup();
        }
        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();
        Ok(Nbw { alphabet, trans, initial, accepting })
    }

    pub fn len(&self) -> usize {
        self.trans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trans.is_empty()
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn successors(&self, q: usize, a: usize) -> &[usize] {
        &self.trans[q][a]
    }

    pub fn is_deterministic(&self) -> bool {
        self.initial.len() <= 1 && self.trans.iter().flatten().all(|t| t.len() <= 1)
    }

    /// Exists a run visiting accepting states infinitely often. Decided on
    /// the product of the automaton with the lasso's position graph.
    pub fn accepts_lasso(&self, l: &Lasso) -> bool {
        let positions = l.len();
        let next_pos = |p: usize| if p + 1 < positions { p + 1 } else { l.stem.len() };
        let node = |q: usize, p: usize| q * positions + p;
        let total = self.len() * positions;
        let mut edges = Vec::new();
        for q in 0..self.len() {
            for p in 0..positions {
                for &r in &self.trans[q][l.at(p)] {
                    let label = if p >= l.stem.len() && self.accepting[q] { 2 } else { 1 };
                    edges.push((node(q, p), node(r, next_pos(p)), label));
                }
            }
        }
        let good = graph::even_cycle_reach(total, &edges);
        self.initial.iter().any(|&q| good[node(q, 0)])
    }

    /// Restriction to states that are reachable and from which an accepting
    /// cycle is reachable.
    pub fn pruned(&self) -> Nbw {
        let n = self.len();
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|q| {
                let mut s: Vec<usize> = self.trans[q].iter().flatten().copied().collect();
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        let live = graph::reachable(&succ, self.initial.iter().copied());
        let edges: Vec<(usize, usize, u32)> = (0..n)
            .flat_map(|q| succ[q].iter().map(move |&r| (q, r)))
            .map(|(q, r)| (q, r, if self.accepting[q] { 2 } else { 1 }))
            .collect();
        let useful = graph::even_cycle_reach(n, &edges);
        let kept: Vec<usize> = (0..n).filter(|&q| live[q] && useful[q]).collect();
        let mut id = vec![usize::MAX; n];
        for (i, &q) in kept.iter().enumerate() {
            id[q] = i;
        }
        let trans = kept
            .iter()
            .map(|&q| {
                self.trans[q]
                    .iter()
                    .map(|t| t.iter().filter(|&&r| id[r] != usize::MAX).map(|&r| id[r]).collect())
                    .collect()
            })
            .collect();
        let initial = self.initial.iter().filter(|&&q| id[q] != usize::MAX).map(|&q| id[q]).collect();
        let accepting = kept.iter().map(|&q| self.accepting[q]).collect();
        Nbw { alphabet: self.alphabet, trans, initial, accepting }
    }
}

pub fn nbw_accepts_lasso(n: &Nbw, l: &Lasso) -> bool {
    n.accepts_lasso(l)
}

/// Büchi automaton for the language of a recognizer, as a union over linked
/// pairs `(s, e)` (`e` idempotent, `s·e = s`, `s × e^ω` accepting) of
/// `[s]·[e]^ω`.
pub fn nbw_from_recognizer(r: &Recognizer) -> Result<Nbw> {
    let violations = r.wilke.validate();
    if !violations.is_empty() {
        return Err(Error::Validation(format!("Wilke axioms fail: {:?}", &violations[..violations.len().min(3)])));
    }
    let w = &r.wilke;
    let ns = w.n_s;
    let linked_accepting = |s: usize, e: usize| w.mul(s, e) == s && r.accepting[w.mixed(s, w.omega(e))];
    let idempotents: Vec<usize> =
        (0..ns).filter(|&e| w.mul(e, e) == e && (0..ns).any(|s| linked_accepting(s, e))).collect();
    let pre = |t: usize| 1 + t;
    let loop_base = 1 + ns;
    let lp = |ei: usize, t: Option<usize>| loop_base + ei * (ns + 1) + t.map_or(0, |t| t + 1);
    let n = loop_base + idempotents.len() * (ns + 1);
    let mut trans = vec![vec![Vec::new(); r.alphabet()]; n];
    let mut accepting = vec![false; n];
    for a in 0..r.alphabet() {
        let x = r.letter(a);
        let jump = |from: usize, s: usize, trans: &mut Vec<Vec<Vec<usize>>>| {
            for (ei, &e) in idempotents.iter().enumerate() {
                if linked_accepting(s, e) {
                    trans[from][a].push(lp(ei, None));
                }
            }
        };
        trans[0][a].push(pre(x));
        jump(0, x, &mut trans);
        for t in 0..ns {
            let s = w.mul(t, x);
            trans[pre(t)][a].push(pre(s));
            jump(pre(t), s, &mut trans);
        }
        for (ei, &e) in idempotents.iter().enumerate() {
            trans[lp(ei, None)][a].push(lp(ei, Some(x)));
            if x == e {
                trans[lp(ei, None)][a].push(lp(ei, None));
            }
            for t in 0..ns {
                let s = w.mul(t, x);
                trans[lp(ei, Some(t))][a].push(lp(ei, Some(s)));
                if s == e {
                    trans[lp(ei, Some(t))][a].push(lp(ei, None));
                }
            }
        }
    }
    for ei in 0..idempotents.len() {
        accepting[lp(ei, None)] = true;
    }
    Ok(Nbw::new(r.alphabet(), trans, vec![0], accepting)?.pruned())
}

/// Deterministic parity word automaton; the largest priority seen
/// infinitely often must be even.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dpw {
    alphabet: usize,
    trans: Vec<usize>,
    initial: usize,
    priority: Vec<u32>,
}

impl Dpw {
    /// `trans[d * alphabet + a]` is the successor of `d` on `a`.
    pub fn new(alphabet: usize, trans: Vec<usize>, initial: usize, priority: Vec<u32>) -> Result<Self> {
        let n = priority.len();
        if n == 0 || initial >= n {
            return Err(Error::Invalid("DPW needs a valid initial state".into()));
        }
        if trans.len() != n * alphabet || trans.iter().any(|&d| d >= n) {
            return Err(Error::Invalid("DPW transition table must be total".into()));
        }
        Ok(Dpw { alphabet, trans, initial, priority })
    }

    /// One state with a fixed priority and a self-loop on every letter.
    pub fn constant(alphabet: usize, priority: u32) -> Self {
        Dpw { alphabet, trans: vec![0; alphabet], initial: 0, priority: vec![priority] }
    }

    pub fn len(&self) -> usize {
        self.priority.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priority.is_empty()
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn step(&self, d: usize, a: usize) -> usize {
        self.trans[d * self.alphabet + a]
    }

    pub fn priority(&self, d: usize) -> u32 {
        self.priority[d]
    }

    pub fn priorities(&self) -> &[u32] {
        &self.priority
    }

    pub fn accepts_lasso(&self, l: &Lasso) -> bool {
        let mut d = l.stem.iter().fold(self.initial, |d, &a| self.step(d, a));
        let mut starts: HashMap<usize, usize> = HashMap::new();
        let mut visited: Vec<usize> = Vec::new();
        loop {
            if let Some(&j) = starts.get(&d) {
                let from = j * l.cycle.len();
                return visited[from..].iter().map(|&s| self.priority[s]).max().unwrap_or(0) % 2 == 0;
            }
            starts.insert(d, starts.len());
            for &a in &l.cycle {
                d = self.step(d, a);
                visited.push(d);
            }
        }
    }

    /// Restriction to states reachable from the initial state.
    pub fn trimmed(&self) -> Dpw {
        let succ: Vec<Vec<usize>> =
            (0..self.len()).map(|d| (0..self.alphabet).map(|a| self.step(d, a)).collect()).collect();
        let live = graph::reachable(&succ, [self.initial]);
        let kept: Vec<usize> = (0..self.len()).filter(|&d| live[d]).collect();
        let mut id = vec![0; self.len()];
        for (i, &d) in kept.iter().enumerate() {
            id[d] = i;
        }
        let trans = kept
            .iter()
            .flat_map(|&d| (0..self.alphabet).map(move |a| (d, a)))
            .map(|(d, a)| id[self.step(d, a)])
            .collect();
        Dpw {
            alphabet: self.alphabet,
            trans,
            initial: id[self.initial],
            priority: kept.iter().map(|&d| self.priority[d]).collect(),
        }
    }
}

pub fn dpw_accepts_lasso(d: &Dpw, l: &Lasso) -> bool {
    d.accepts_lasso(l)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct SafraNode {
    name: usize,
    label: Vec<usize>,
    children: Vec<SafraNode>,
}

impl SafraNode {
    fn names(&self, out: &mut Vec<usize>) {
        out.push(self.name);
        for c in &self.children {
            c.names(out);
        }
    }

    fn update(&mut self, nbw: &Nbw, a: usize) {
        let mut next: Vec<usize> = self.label.iter().flat_map(|&q| nbw.trans[q][a].iter().copied()).collect();
        next.sort_unstable();
        next.dedup();
        self.label = next;
        for c in &mut self.children {
            c.update(nbw, a);
        }
    }

    fn spawn(&mut self, nbw: &Nbw, fresh: &mut usize) {
        for c in &mut self.children {
            c.spawn(nbw, fresh);
        }
        let acc: Vec<usize> = self.label.iter().copied().filter(|&q| nbw.accepting[q]).collect();
        if !acc.is_empty() {
            self.children.push(SafraNode { name: *fresh, label: acc, children: Vec::new() });
            *fresh += 1;
        }
    }

    /// Removes from every node the states held by older siblings (or by
    /// older siblings of ancestors).
    fn horizontal_merge(&mut self, claimed: &[usize]) {
        self.label.retain(|q| claimed.binary_search(q).is_err());
        let mut left: Vec<usize> = Vec::new();
        for c in &mut self.children {
            let parent = &self.label;
            c.label.retain(|q| parent.binary_search(q).is_ok());
            c.horizontal_merge(&left);
            left.extend_from_slice(&c.label);
            left.sort_unstable();
            left.dedup();
        }
    }

    fn remove_empty(&mut self, removed: &mut Vec<usize>) {
        let mut kept = Vec::new();
        for mut c in std::mem::take(&mut self.children) {
            if c.label.is_empty() {
                c.names(removed);
            } else {
                c.remove_empty(removed);
                kept.push(c);
            }
        }
        self.children = kept;
    }

    fn vertical_merge(&mut self, removed: &mut Vec<usize>, flagged: &mut Vec<usize>) {
        if self.children.is_empty() {
            return;
        }
        let mut union: Vec<usize> = self.children.iter().flat_map(|c| c.label.iter().copied()).collect();
        union.sort_unstable();
        union.dedup();
        if union == self.label {
            for c in std::mem::take(&mut self.children) {
                c.names(removed);
            }
            flagged.push(self.name);
        } else {
            for c in &mut self.children {
                c.vertical_merge(removed, flagged);
            }
        }
    }

    fn rename(&mut self, map: &HashMap<usize, usize>) {
        self.name = map[&self.name];
        for c in &mut self.children {
            c.rename(map);
        }
    }
}

/// Safra-tree determinisation with Piterman's compact naming, producing a
/// state-based max-parity automaton. Deterministic inputs are completed
/// with a rejecting sink instead.
pub fn determinize_to_dpw(nbw: &Nbw, max_states: usize) -> Result<Dpw> {
    let nbw = nbw.pruned();
    if nbw.initial.is_empty() {
        return Ok(Dpw::constant(nbw.alphabet, 1));
    }
    if nbw.is_deterministic() {
        let sink = nbw.len();
        let mut trans = Vec::with_capacity((sink + 1) * nbw.alphabet);
        for q in 0..nbw.len() {
            trans.extend(nbw.trans[q].iter().map(|t| t.first().copied().unwrap_or(sink)));
        }
        trans.extend(std::iter::repeat_n(sink, nbw.alphabet));
        let mut priority: Vec<u32> = nbw.accepting.iter().map(|&b| if b { 2 } else { 1 }).collect();
        priority.push(1);
        return Dpw::new(nbw.alphabet, trans, nbw.initial[0], priority);
    }
    let n = nbw.len();
    let top = 4 * n as u32 + 6; // min-parity p becomes top - p; top is even
    let no_event = top - 1;
    let step = |tree: &Option<SafraNode>, a: usize| -> (Option<SafraNode>, u32) {
        let Some(mut root) = tree.clone() else {
            return (None, 1);
        };
        root.update(&nbw, a);
        let mut names = Vec::new();
        root.names(&mut names);
        let mut fresh = names.iter().max().map_or(1, |m| m + 1);
        root.spawn(&nbw, &mut fresh);
        root.horizontal_merge(&[]);
        let mut removed = Vec::new();
        let mut flagged = Vec::new();
        if root.label.is_empty() {
            return (None, 1);
        }
        root.remove_empty(&mut removed);
        root.vertical_merge(&mut removed, &mut flagged);
        let e = removed.iter().copied().min();
        let f = flagged.iter().copied().min();
        let min_parity = match (f, e) {
            (Some(f), Some(e)) if f < e => 2 * f as u32,
            (Some(f), None) => 2 * f as u32,
            (_, Some(e)) => 2 * e as u32 - 1,
            (None, None) => no_event,
        };
        let mut names = Vec::new();
        root.names(&mut names);
        names.sort_unstable();
        let map: HashMap<usize, usize> = names.iter().enumerate().map(|(i, &x)| (x, i + 1)).collect();
        root.rename(&map);
        (Some(root), min_parity)
    };
    let init = SafraNode { name: 1, label: nbw.initial.clone(), children: Vec::new() };
    let start: (Option<SafraNode>, u32) = (Some(init), 0);
    let mut index: HashMap<(Option<SafraNode>, u32), usize> = HashMap::new();
    let mut states = vec![start.clone()];
    index.insert(start, 0);
    let mut trans = Vec::new();
    let mut queue = VecDeque::from([0]);
    while let Some(d) = queue.pop_front() {
        for a in 0..nbw.alphabet {
            let (tree, p) = step(&states[d].0, a);
            let key = (tree, top - p);
            let next = match index.get(&key) {
                Some(&i) => i,
                None => {
                    let i = states.len();
                    if i >= max_states {
                        return Err(Error::Budget { stage: "determinization", size: i + 1, limit: max_states });
                    }
                    states.push(key.clone());
                    index.insert(key, i);
                    queue.push_back(i);
                    i
                }
            };
            if trans.len() < (d + 1) * nbw.alphabet {
                trans.resize((d + 1) * nbw.alphabet, 0);
            }
            trans[d * nbw.alphabet + a] = next;
        }
    }
    trans.resize(states.len() * nbw.alphabet, 0);
    let priority = states.iter().map(|s| s.1).collect();
    Dpw::new(nbw.alphabet, trans, 0, priority)
}
