//! JSON documents for signatures, coalgebras, automata, algebras and runs.
//!
//! Every document carries `"version": "1"` and a `"kind"` tag. States are
//! referred to by name; an explicit `states` list fixes their order, so
//! saving and loading again gives back an equal value.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::RationalCoherentAlgebra;
use crate::automaton::{Acceptance, AlgState, FAutomaton, PreRun, SymbolicAcceptance};
use crate::coalgebra::PointedCoalgebra;
use crate::error::{Error, Result};
use crate::functor::{FCtx, FElem, Permutation, Signature};
use crate::omega::{Dpw, Recognizer, WilkeAlgebra};

pub const FORMAT_VERSION: &str = "1";

/// A loaded artifact.
#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Signature(Arc<Signature>),
    Coalgebra(PointedCoalgebra),
    Automaton(FAutomaton),
    Algebra(Arc<RationalCoherentAlgebra>),
    Run(RunDocument),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Signature(_) => "signature",
            Document::Coalgebra(_) => "coalgebra",
            Document::Automaton(_) => "automaton",
            Document::Algebra(_) => "algebra",
            Document::Run(_) => "run",
        }
    }
}

/// A run detached from its subject and automaton: the node structure with
/// the names of the subject state and automaton state at each node.
#[derive(Clone, Debug, PartialEq)]
pub struct RunDocument {
    pub shape: PointedCoalgebra,
    pub rho_x: Vec<String>,
    pub rho_q: Vec<String>,
}

impl RunDocument {
    pub fn from_prerun(pr: &PreRun, c: &PointedCoalgebra, a: &FAutomaton) -> Self {
        RunDocument {
            shape: pr.shape().clone(),
            rho_x: (0..pr.len()).map(|r| c.name(pr.rho_x(r)).to_string()).collect(),
            rho_q: (0..pr.len()).map(|r| a.name(pr.rho_q(r)).to_string()).collect(),
        }
    }

    /// Resolves the labels against a subject and an automaton.
    pub fn to_prerun(&self, c: &PointedCoalgebra, a: &FAutomaton) -> Result<PreRun> {
        let xs = name_index(c.names());
        let qs = name_index(a.names());
        let rho_x = self
            .rho_x
            .iter()
            .enumerate()
            .map(|(r, x)| {
                xs.get(x.as_str()).copied().ok_or_else(|| {
                    doc_err(format!("/rho_x/{}", escape(self.shape.name(r))), format!("unknown subject state `{x}`"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rho_q = self
            .rho_q
            .iter()
            .enumerate()
            .map(|(r, q)| {
                qs.get(q.as_str()).copied().ok_or_else(|| {
                    doc_err(format!("/rho_q/{}", escape(self.shape.name(r))), format!("unknown automaton state `{q}`"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PreRun::new(self.shape.clone(), rho_x, rho_q)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOp {
    id: String,
    arity: usize,
    #[serde(default)]
    generators: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSignature {
    ops: Vec<RawOp>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawElem {
    op: String,
    #[serde(default)]
    args: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCtx {
    op: String,
    hole: usize,
    /// Non-hole positions in order.
    #[serde(default)]
    args: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoalgebra {
    signature: RawSignature,
    states: Vec<String>,
    root: String,
    xi: BTreeMap<String, RawElem>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDpw {
    states: Vec<String>,
    initial: String,
    priority: BTreeMap<String, u32>,
    /// DPW state, then letter (an automaton state), then successor.
    delta: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKind {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    context: Option<RawCtx>,
    label: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymbolic {
    algebra: RawAlgebra,
    kinds: BTreeMap<String, RawKind>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawAcceptance {
    Parity(BTreeMap<String, u32>),
    Dpw(RawDpw),
    Symbolic(Box<RawSymbolic>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAutomaton {
    signature: RawSignature,
    states: Vec<String>,
    initial: Vec<String>,
    delta: BTreeMap<String, Vec<RawElem>>,
    acceptance: RawAcceptance,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGamma0 {
    op: String,
    #[serde(default)]
    args: Vec<String>,
    value: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWilke {
    finite: usize,
    infinite: usize,
    mul: Vec<Vec<usize>>,
    mixed: Vec<Vec<usize>>,
    omega: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLetter {
    context: RawCtx,
    value: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgebra {
    signature: RawSignature,
    carrier: Vec<String>,
    gamma0: Vec<RawGamma0>,
    wilke: RawWilke,
    letter_map: Vec<RawLetter>,
    /// Carrier element standing for each infinite-sort element.
    w_elems: Vec<String>,
    /// The recognising set `U`.
    recognizing: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    signature: RawSignature,
    nodes: Vec<String>,
    root: String,
    xi: BTreeMap<String, RawElem>,
    rho_x: BTreeMap<String, String>,
    rho_q: BTreeMap<String, String>,
}

fn doc_err(pointer: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Document { pointer: pointer.into(), msg: msg.into() }
}

/// JSON pointer escaping of one reference token.
fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn name_index(names: &[String]) -> HashMap<&str, usize> {
    names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect()
}

/// Checks a list of names for duplicates and returns its index.
fn names_of<'n>(names: &'n [String], at: &str) -> Result<HashMap<&'n str, usize>> {
    let mut index = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        if index.insert(n.as_str(), i).is_some() {
            return Err(doc_err(format!("{at}/{i}"), format!("duplicate name `{n}`")));
        }
    }
    Ok(index)
}

fn lookup(index: &HashMap<&str, usize>, name: &str, at: impl Into<String>) -> Result<usize> {
    index.get(name).copied().ok_or_else(|| doc_err(at, format!("unknown name `{name}`")))
}

/// Every listed name must have an entry in `map` and vice versa.
fn check_keys<V>(map: &BTreeMap<String, V>, index: &HashMap<&str, usize>, at: &str) -> Result<()> {
    if let Some(k) = map.keys().find(|k| !index.contains_key(k.as_str())) {
        return Err(doc_err(format!("{at}/{}", escape(k)), format!("unknown name `{k}`")));
    }
    if map.len() != index.len() {
        let mut missing: Vec<&str> = index.keys().copied().filter(|n| !map.contains_key(*n)).collect();
        missing.sort_unstable();
        return Err(doc_err(at, format!("missing entry for `{}`", missing[0])));
    }
    Ok(())
}

fn read_signature(raw: &RawSignature, at: &str) -> Result<Arc<Signature>> {
    let mut ops = Vec::with_capacity(raw.ops.len());
    for (i, op) in raw.ops.iter().enumerate() {
        let gens = op
            .generators
            .iter()
            .enumerate()
            .map(|(j, g)| {
                Permutation::from_cycles(g, op.arity)
                    .map_err(|e| doc_err(format!("{at}/ops/{i}/generators/{j}"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        ops.push((op.id.clone(), op.arity, gens));
    }
    Signature::new(ops).map(Arc::new).map_err(|e| doc_err(format!("{at}/ops"), e.to_string()))
}

fn write_signature(sig: &Signature) -> RawSignature {
    RawSignature {
        ops: sig
            .ops()
            .iter()
            .map(|op| RawOp {
                id: op.name().to_string(),
                arity: op.arity(),
                generators: op.generators().iter().map(|g| g.to_cycles()).collect(),
            })
            .collect(),
    }
}

fn read_elem(sig: &Signature, raw: &RawElem, index: &HashMap<&str, usize>, at: &str) -> Result<FElem<usize>> {
    let args = raw
        .args
        .iter()
        .enumerate()
        .map(|(i, a)| lookup(index, a, format!("{at}/args/{i}")))
        .collect::<Result<Vec<_>>>()?;
    sig.felem_named(&raw.op, args).map_err(|e| doc_err(at, e.to_string()))
}

fn write_elem(sig: &Signature, e: &FElem<usize>, names: &[String]) -> RawElem {
    RawElem { op: sig.op(e.op()).name().to_string(), args: e.args().iter().map(|&a| names[a].clone()).collect() }
}

fn read_ctx(sig: &Signature, raw: &RawCtx, index: &HashMap<&str, usize>, at: &str) -> Result<FCtx<usize>> {
    let op =
        sig.op_id(&raw.op).ok_or_else(|| doc_err(format!("{at}/op"), format!("unknown operation `{}`", raw.op)))?;
    if raw.hole > raw.args.len() {
        return Err(doc_err(format!("{at}/hole"), "hole position out of range"));
    }
    let args = raw
        .args
        .iter()
        .enumerate()
        .map(|(i, a)| lookup(index, a, format!("{at}/args/{i}")))
        .collect::<Result<Vec<_>>>()?;
    sig.fctx(op, raw.hole, args).map_err(|e| doc_err(at, e.to_string()))
}

fn write_ctx(sig: &Signature, c: &FCtx<usize>, names: &[String]) -> RawCtx {
    RawCtx {
        op: sig.op(c.op()).name().to_string(),
        hole: c.hole(),
        args: c.args().iter().map(|&a| names[a].clone()).collect(),
    }
}

fn read_coalgebra(raw: &RawCoalgebra) -> Result<PointedCoalgebra> {
    let sig = read_signature(&raw.signature, "/signature")?;
    let index = names_of(&raw.states, "/states")?;
    check_keys(&raw.xi, &index, "/xi")?;
    let xi = raw
        .states
        .iter()
        .map(|s| read_elem(&sig, &raw.xi[s], &index, &format!("/xi/{}", escape(s))))
        .collect::<Result<Vec<_>>>()?;
    let root = lookup(&index, &raw.root, "/root")?;
    PointedCoalgebra::new(sig, raw.states.clone(), xi, root).map_err(|e| doc_err("", e.to_string()))
}

fn write_coalgebra(c: &PointedCoalgebra) -> RawCoalgebra {
    RawCoalgebra {
        signature: write_signature(c.sig()),
        states: c.names().to_vec(),
        root: c.name(c.root()).to_string(),
        xi: (0..c.len()).map(|x| (c.name(x).to_string(), write_elem(c.sig(), c.xi(x), c.names()))).collect(),
    }
}

fn read_algebra(raw: &RawAlgebra, at: &str) -> Result<RationalCoherentAlgebra> {
    let sig = read_signature(&raw.signature, &format!("{at}/signature"))?;
    let index = names_of(&raw.carrier, &format!("{at}/carrier"))?;
    let mut gamma0 = HashMap::new();
    for (i, row) in raw.gamma0.iter().enumerate() {
        let here = format!("{at}/gamma0/{i}");
        let e = read_elem(&sig, &RawElem { op: row.op.clone(), args: row.args.clone() }, &index, &here)?;
        let v = lookup(&index, &row.value, format!("{here}/value"))?;
        if gamma0.insert(e, v).is_some() {
            return Err(doc_err(here, "duplicate γ₀ entry"));
        }
    }
    let w = &raw.wilke;
    let tables = |rows: &[Vec<usize>], cols: usize, name: &str| -> Result<Vec<usize>> {
        if rows.len() != w.finite || rows.iter().any(|r| r.len() != cols) {
            return Err(doc_err(format!("{at}/wilke/{name}"), format!("expected a {} × {cols} table", w.finite)));
        }
        Ok(rows.concat())
    };
    let mul = tables(&w.mul, w.finite, "mul")?;
    let mixed = tables(&w.mixed, w.infinite, "mixed")?;
    let wilke = WilkeAlgebra::new(w.finite, w.infinite, mul, mixed, w.omega.clone())
        .map_err(|e| doc_err(format!("{at}/wilke"), e.to_string()))?;
    let elems: Vec<usize> = (0..raw.carrier.len()).collect();
    let contexts = sig.enumerate_fctxs(&elems);
    let ctx_index: HashMap<&FCtx<usize>, usize> = contexts.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut letter_map = vec![None; contexts.len()];
    for (i, l) in raw.letter_map.iter().enumerate() {
        let here = format!("{at}/letter_map/{i}");
        let ctx = read_ctx(&sig, &l.context, &index, &format!("{here}/context"))?;
        let k = ctx_index[&ctx];
        if letter_map[k].replace(l.value).is_some() {
            return Err(doc_err(here, "duplicate context"));
        }
    }
    let letter_map = letter_map
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            v.ok_or_else(|| {
                doc_err(
                    format!("{at}/letter_map"),
                    format!("no entry for context {}", contexts[k].display_with(&sig, |&c| &raw.carrier[c])),
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let w_elems = raw
        .w_elems
        .iter()
        .enumerate()
        .map(|(i, c)| lookup(&index, c, format!("{at}/w_elems/{i}")))
        .collect::<Result<Vec<_>>>()?;
    let mut recognizing = vec![false; raw.carrier.len()];
    for (i, c) in raw.recognizing.iter().enumerate() {
        recognizing[lookup(&index, c, format!("{at}/recognizing/{i}"))?] = true;
    }
    let accepting = w_elems.iter().map(|&c| recognizing.get(c).copied().unwrap_or(false)).collect();
    let rational = Recognizer::new(wilke, letter_map, accepting)
        .map_err(|e| doc_err(format!("{at}/letter_map"), e.to_string()))?;
    RationalCoherentAlgebra::new(sig, raw.carrier.clone(), gamma0, rational, w_elems, recognizing)
        .map_err(|e| doc_err(at, e.to_string()))
}

fn write_algebra(alg: &RationalCoherentAlgebra) -> RawAlgebra {
    let sig = alg.sig();
    let names = alg.carrier();
    let elems: Vec<usize> = (0..alg.len()).collect();
    let wilke = alg.rational().wilke();
    let (ns, nw) = (wilke.n_finite(), wilke.n_infinite());
    RawAlgebra {
        signature: write_signature(sig),
        carrier: names.to_vec(),
        gamma0: sig
            .enumerate_felems(&elems)
            .iter()
            .map(|e| {
                let raw = write_elem(sig, e, names);
                RawGamma0 { op: raw.op, args: raw.args, value: names[alg.gamma0(e)].clone() }
            })
            .collect(),
        wilke: RawWilke {
            finite: ns,
            infinite: nw,
            mul: (0..ns).map(|a| (0..ns).map(|b| wilke.mul(a, b)).collect()).collect(),
            mixed: (0..ns).map(|a| (0..nw).map(|x| wilke.mixed(a, x)).collect()).collect(),
            omega: (0..ns).map(|a| wilke.omega(a)).collect(),
        },
        letter_map: alg
            .contexts()
            .iter()
            .enumerate()
            .map(|(k, c)| RawLetter { context: write_ctx(sig, c, names), value: alg.rational().letter(k) })
            .collect(),
        w_elems: alg.w_elems().iter().map(|&c| names[c].clone()).collect(),
        recognizing: (0..alg.len()).filter(|&c| alg.is_recognizing(c)).map(|c| names[c].clone()).collect(),
    }
}

fn read_automaton(raw: &RawAutomaton) -> Result<FAutomaton> {
    let sig = read_signature(&raw.signature, "/signature")?;
    let index = names_of(&raw.states, "/states")?;
    for k in raw.delta.keys() {
        lookup(&index, k, format!("/delta/{}", escape(k)))?;
    }
    let delta = raw
        .states
        .iter()
        .map(|s| {
            let at = format!("/delta/{}", escape(s));
            raw.delta.get(s).map_or(Ok(Vec::new()), |ts| {
                ts.iter().enumerate().map(|(i, t)| read_elem(&sig, t, &index, &format!("{at}/{i}"))).collect()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let initial = raw
        .initial
        .iter()
        .enumerate()
        .map(|(i, q)| lookup(&index, q, format!("/initial/{i}")))
        .collect::<Result<Vec<_>>>()?;
    let acceptance = match &raw.acceptance {
        RawAcceptance::Parity(p) => {
            check_keys(p, &index, "/acceptance/parity")?;
            Acceptance::Parity(raw.states.iter().map(|s| p[s]).collect())
        }
        RawAcceptance::Dpw(d) => Acceptance::OmegaRegular(read_dpw(d, &index)?),
        RawAcceptance::Symbolic(s) => {
            let alg = Arc::new(read_algebra(&s.algebra, "/acceptance/symbolic/algebra")?);
            if **alg.sig() != *sig {
                return Err(doc_err(
                    "/acceptance/symbolic/algebra/signature",
                    "signature differs from the automaton's",
                ));
            }
            check_keys(&s.kinds, &index, "/acceptance/symbolic/kinds")?;
            let carrier = name_index(alg.carrier());
            let kinds = raw
                .states
                .iter()
                .map(|q| {
                    let at = format!("/acceptance/symbolic/kinds/{}", escape(q));
                    let k = &s.kinds[q];
                    let label = lookup(&carrier, &k.label, format!("{at}/label"))?;
                    Ok(match &k.context {
                        None => AlgState::Label(label),
                        Some(c) => {
                            let ctx = read_ctx(&sig, c, &carrier, &format!("{at}/context"))?;
                            let ctx = alg
                                .context_id(&ctx)
                                .ok_or_else(|| doc_err(format!("{at}/context"), "unknown context"))?;
                            AlgState::Context { ctx, label }
                        }
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let sym =
                SymbolicAcceptance::new(alg, kinds).map_err(|e| doc_err("/acceptance/symbolic", e.to_string()))?;
            Acceptance::AlgebraSymbolic(Arc::new(sym))
        }
    };
    FAutomaton::new(sig, raw.states.clone(), delta, initial, acceptance).map_err(|e| doc_err("", e.to_string()))
}

fn read_dpw(d: &RawDpw, letters: &HashMap<&str, usize>) -> Result<Dpw> {
    let at = "/acceptance/dpw";
    let index = names_of(&d.states, &format!("{at}/states"))?;
    check_keys(&d.priority, &index, &format!("{at}/priority"))?;
    check_keys(&d.delta, &index, &format!("{at}/delta"))?;
    let alphabet = letters.len();
    let mut trans = vec![usize::MAX; d.states.len() * alphabet];
    for (i, s) in d.states.iter().enumerate() {
        let here = format!("{at}/delta/{}", escape(s));
        let row = &d.delta[s];
        check_keys(row, letters, &here)?;
        for (a, t) in row {
            let to = lookup(&index, t, format!("{here}/{}", escape(a)))?;
            trans[i * alphabet + letters[a.as_str()]] = to;
        }
    }
    let initial = lookup(&index, &d.initial, format!("{at}/initial"))?;
    let priority = d.states.iter().map(|s| d.priority[s]).collect();
    Dpw::new(alphabet, trans, initial, priority).map_err(|e| doc_err(at, e.to_string()))
}

fn write_automaton(a: &FAutomaton) -> RawAutomaton {
    let sig = a.sig();
    let names = a.names();
    let acceptance = match a.acceptance() {
        Acceptance::Parity(p) => RawAcceptance::Parity(names.iter().cloned().zip(p.iter().copied()).collect()),
        Acceptance::OmegaRegular(d) => {
            let dn: Vec<String> = (0..d.len()).map(|i| format!("d{i}")).collect();
            RawAcceptance::Dpw(RawDpw {
                states: dn.clone(),
                initial: dn[d.initial()].clone(),
                priority: dn.iter().cloned().zip(d.priorities().iter().copied()).collect(),
                delta: (0..d.len())
                    .map(|s| {
                        (
                            dn[s].clone(),
                            (0..d.alphabet()).map(|q| (names[q].clone(), dn[d.step(s, q)].clone())).collect(),
                        )
                    })
                    .collect(),
            })
        }
        Acceptance::AlgebraSymbolic(sym) => {
            let alg = sym.algebra();
            let kinds = sym
                .kinds()
                .iter()
                .enumerate()
                .map(|(q, k)| {
                    let raw = match *k {
                        AlgState::Label(c) => RawKind { context: None, label: alg.carrier()[c].clone() },
                        AlgState::Context { ctx, label } => RawKind {
                            context: Some(write_ctx(sig, &alg.contexts()[ctx], alg.carrier())),
                            label: alg.carrier()[label].clone(),
                        },
                    };
                    (names[q].clone(), raw)
                })
                .collect();
            RawAcceptance::Symbolic(Box::new(RawSymbolic { algebra: write_algebra(alg), kinds }))
        }
    };
    RawAutomaton {
        signature: write_signature(sig),
        states: names.to_vec(),
        initial: a.initial().iter().map(|&q| names[q].clone()).collect(),
        delta: (0..a.len())
            .filter(|&q| !a.delta(q).is_empty())
            .map(|q| (names[q].clone(), a.delta(q).iter().map(|t| write_elem(sig, t, names)).collect()))
            .collect(),
        acceptance,
    }
}

fn read_run(raw: &RawRun) -> Result<RunDocument> {
    let sig = read_signature(&raw.signature, "/signature")?;
    let index = names_of(&raw.nodes, "/nodes")?;
    check_keys(&raw.xi, &index, "/xi")?;
    check_keys(&raw.rho_x, &index, "/rho_x")?;
    check_keys(&raw.rho_q, &index, "/rho_q")?;
    let xi = raw
        .nodes
        .iter()
        .map(|r| read_elem(&sig, &raw.xi[r], &index, &format!("/xi/{}", escape(r))))
        .collect::<Result<Vec<_>>>()?;
    let root = lookup(&index, &raw.root, "/root")?;
    let shape = PointedCoalgebra::new(sig, raw.nodes.clone(), xi, root).map_err(|e| doc_err("", e.to_string()))?;
    Ok(RunDocument {
        shape,
        rho_x: raw.nodes.iter().map(|r| raw.rho_x[r].clone()).collect(),
        rho_q: raw.nodes.iter().map(|r| raw.rho_q[r].clone()).collect(),
    })
}

fn write_run(r: &RunDocument) -> RawRun {
    let c = write_coalgebra(&r.shape);
    RawRun {
        signature: c.signature,
        nodes: c.states,
        root: c.root,
        xi: c.xi,
        rho_x: r.shape.names().iter().cloned().zip(r.rho_x.iter().cloned()).collect(),
        rho_q: r.shape.names().iter().cloned().zip(r.rho_q.iter().cloned()).collect(),
    }
}

fn body<T: DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| doc_err("", e.to_string()))
}

/// Parses a document from JSON text.
pub fn parse_document(text: &str) -> Result<Document> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    let Value::Object(mut map) = value else {
        return Err(doc_err("", "expected a JSON object"));
    };
    match map.remove("version") {
        Some(Value::String(v)) if v == FORMAT_VERSION => {}
        Some(v) => return Err(doc_err("/version", format!("unsupported version {v}"))),
        None => return Err(doc_err("/version", "missing version")),
    }
    let kind = match map.remove("kind") {
        Some(Value::String(k)) => k,
        _ => return Err(doc_err("/kind", "missing or non-string kind")),
    };
    let rest = Value::Object(map);
    Ok(match kind.as_str() {
        "signature" => Document::Signature(read_signature(&body(rest)?, "")?),
        "coalgebra" => Document::Coalgebra(read_coalgebra(&body(rest)?)?),
        "automaton" => Document::Automaton(read_automaton(&body(rest)?)?),
        "algebra" => Document::Algebra(Arc::new(read_algebra(&body(rest)?, "")?)),
        "run" => Document::Run(read_run(&body(rest)?)?),
        other => return Err(doc_err("/kind", format!("unknown kind `{other}`"))),
    })
}

/// Serialises a document as pretty-printed JSON with sorted keys.
pub fn to_json(doc: &Document) -> String {
    let payload = match doc {
        Document::Signature(s) => serde_json::to_value(write_signature(s)),
        Document::Coalgebra(c) => serde_json::to_value(write_coalgebra(c)),
        Document::Automaton(a) => serde_json::to_value(write_automaton(a)),
        Document::Algebra(a) => serde_json::to_value(write_algebra(a)),
        Document::Run(r) => serde_json::to_value(write_run(r)),
    }
    .expect("documents serialise");
    let Value::Object(mut map) = payload else { unreachable!("payloads are objects") };
    map.insert("version".into(), Value::String(FORMAT_VERSION.into()));
    map.insert("kind".into(), Value::String(doc.kind().into()));
    let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("documents serialise");
    text.push('\n');
    text
}

pub fn load(path: impl AsRef<Path>) -> Result<Document> {
    parse_document(&std::fs::read_to_string(path)?)
}

pub fn save(doc: &Document, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json(doc))?;
    Ok(())
}
