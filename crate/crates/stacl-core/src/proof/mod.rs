//! Hilbert-style proof kernel: judgments `Γ ⊢_g φ` (and `Γ ⊢_{g,G} φ` at
//! the graph-aware layer), axiom-schema instantiation, and checking of
//! serialized derivation trees.
//!
//! Derivations are concrete: every node carries a fully instantiated
//! conclusion, and the checker re-instantiates the named schema from the
//! node's bindings and compares syntactically. Schema-level confidence
//! comes from the fuzzing harness, not the kernel.

pub mod builder;
mod rules;
mod tautology;

pub use builder::{bindings, Builder};
pub use rules::{binding_sort, instantiate, BindingSort, Rule};
pub use tautology::is_tautology;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::generator::DataGenerator;
use crate::graph;
use crate::syntax::{
    Assignments, CondVar, Formula, GenRef, KernelRef, Mode, Term, VarTuple,
};

/// Deductive layer of a judgment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Layer {
    /// Diagram-independent, no causal predicates.
    Ax,
    /// Adds the causal-predicate axioms.
    AxCp,
    /// Adds the graph-discharge rules for a concrete generator.
    AxGCp,
}

impl Layer {
    pub fn name(self) -> &'static str {
        match self {
            Layer::Ax => "AX",
            Layer::AxCp => "AXCP",
            Layer::AxGCp => "AXGCP",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "AX" => Layer::Ax,
            "AXCP" => Layer::AxCp,
            "AXGCP" => Layer::AxGCp,
            _ => return None,
        })
    }
}

/// A judgment `Γ ⊢_g φ` at a layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub context: Vec<Formula>,
    pub gen: GenRef,
    pub layer: Layer,
    pub conclusion: Formula,
}

/// Typed schema-instantiation binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Tuple(VarTuple),
    Assigns(Assignments),
    Term(Term),
    Kref(KernelRef),
    CondV(CondVar),
    Gen(GenRef),
    Formula(Formula),
    Indices(Vec<usize>),
    Consts(Vec<String>),
}

pub type Bindings = BTreeMap<String, Binding>;

/// One node of a derivation tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationNode {
    pub rule: Rule,
    pub bind: Bindings,
    pub judgment: Judgment,
    pub premises: Vec<DerivationNode>,
}

/// Structured rejection naming the failed node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    /// Child indices from the root, rendered as `root.premises[i]...`.
    pub path: Vec<usize>,
    pub reason: String,
}

impl Rejection {
    pub fn here(reason: impl Into<String>) -> Self {
        Rejection {
            path: Vec::new(),
            reason: reason.into(),
        }
    }

    pub fn path_string(&self) -> String {
        let mut s = String::from("root");
        for i in &self.path {
            s.push_str(&format!(".premises[{i}]"));
        }
        s
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path_string(), self.reason)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Rejection {}

/// Checks a single node against its premises (which are assumed to have
/// been checked already). `base` supplies the concrete generator for the
/// graph-discharge rules.
pub fn check_step(node: &DerivationNode, base: Option<&DataGenerator>) -> Result<(), Rejection> {
    let j = &node.judgment;
    let reject = |reason: String| Err(Rejection::here(reason));

    // Layer discipline.
    let needed = rules::rule_layer(node.rule);
    if (j.layer as u8) < (needed as u8) {
        return reject(format!(
            "rule {} requires layer {}, judgment is at {}",
            node.rule.name(),
            needed.name(),
            j.layer.name()
        ));
    }

    match node.rule {
        Rule::Mp => {
            let [p1, p2] = premises_array(node)?;
            same_frame(j, &p1.judgment)?;
            same_frame(j, &p2.judgment)?;
            let want = Formula::imp(p1.judgment.conclusion.clone(), j.conclusion.clone());
            if p2.judgment.conclusion != want {
                return reject("premise shape: second premise is not `first -> conclusion`".into());
            }
            Ok(())
        }
        Rule::Hyp => {
            no_premises(node)?;
            if j.context.contains(&j.conclusion) {
                Ok(())
            } else {
                reject("hypothesis is not in the context".into())
            }
        }
        Rule::Deduction => {
            let [p] = premises_array(node)?;
            let pj = &p.judgment;
            if pj.gen != j.gen || pj.layer != j.layer {
                return reject("deduction premise must share generator and layer".into());
            }
            let Some((antecedent, consequent)) = split_imp(&j.conclusion) else {
                return reject("deduction conclusion must be an implication".into());
            };
            let mut want_ctx = j.context.clone();
            want_ctx.push(antecedent.clone());
            if pj.context != want_ctx {
                return reject(
                    "deduction premise context must be the conclusion context plus the antecedent"
                        .into(),
                );
            }
            if pj.conclusion != *consequent {
                return reject("deduction premise conclusion mismatch".into());
            }
            Ok(())
        }
        Rule::DgEi => {
            let [p] = premises_array(node)?;
            let pj = &p.judgment;
            if !pj.context.is_empty() {
                return reject("generator-shifting premises take no hypotheses".into());
            }
            if pj.layer != j.layer {
                return reject("generator shift cannot change the layer".into());
            }
            // intro: ⊢_{g[a]E} φ gives ⊢_g [a]E φ
            if let Formula::Eager(assigns, body) = &j.conclusion {
                let shifted = j.gen.intervened(Mode::Eager, assigns.clone());
                if pj.gen == shifted && pj.conclusion == **body {
                    return Ok(());
                }
            }
            // elim: ⊢_g [a]E φ gives ⊢_{g[a]E} φ
            if let Formula::Eager(assigns, body) = &pj.conclusion {
                let shifted = pj.gen.intervened(Mode::Eager, assigns.clone());
                if j.gen == shifted && j.conclusion == **body {
                    return Ok(());
                }
            }
            reject("premise shape: eager generator shift does not match".into())
        }
        Rule::DgLi => {
            let [p] = premises_array(node)?;
            let pj = &p.judgment;
            if !pj.context.is_empty() {
                return reject("generator-shifting premises take no hypotheses".into());
            }
            if pj.layer != j.layer {
                return reject("generator shift cannot change the layer".into());
            }
            if let Formula::Lazy(assigns, body) = &j.conclusion {
                let shifted = j.gen.intervened(Mode::Lazy, assigns.clone());
                if pj.gen == shifted && pj.conclusion == **body {
                    return Ok(());
                }
            }
            reject("premise shape: lazy generator shift does not match".into())
        }
        Rule::DgEq | Rule::DsepDg | Rule::NancDg | Rule::PaDg => {
            no_premises(node)?;
            let Some(base) = base else {
                return reject("graph-discharge rules need a concrete generator".into());
            };
            if base.id != j.gen.base {
                return reject(format!(
                    "judgment generator `{}` does not match the loaded generator `{}`",
                    j.gen.base, base.id
                ));
            }
            let mut g = base.clone();
            for (mode, assigns) in &j.gen.transforms {
                g = g
                    .intervene(*mode, assigns)
                    .map_err(|e| Rejection::here(format!("{e}")))?;
            }
            check_graph_discharge(node, &g)
        }
        _ => {
            no_premises(node)?;
            let want = instantiate(node.rule, &node.bind, &j.gen)
                .map_err(|e| Rejection::here(format!("{}: {e}", node.rule.name())))?;
            if want != j.conclusion {
                return reject(format!(
                    "conclusion does not match the instantiated schema: expected `{want}`"
                ));
            }
            Ok(())
        }
    }
}

fn check_graph_discharge(node: &DerivationNode, g: &DataGenerator) -> Result<(), Rejection> {
    let j = &node.judgment;
    let d = g.to_diagram();
    match node.rule {
        Rule::DgEq => {
            let Formula::EqTerm(Term::Vars(x), u) = &j.conclusion else {
                return Err(Rejection::here("DG_Eq concludes a tuple equation"));
            };
            let terms: Vec<&Term> = match u {
                Term::Tuple(ts) if x.len() > 1 => ts.iter().collect(),
                single if x.len() == 1 => alloc::vec![single],
                _ => {
                    return Err(Rejection::here(
                        "DG_Eq right side arity does not match the tuple",
                    ))
                }
            };
            if terms.len() != x.len() {
                return Err(Rejection::here(
                    "DG_Eq right side arity does not match the tuple",
                ));
            }
            for (v, t) in x.iter().zip(terms) {
                let Some(mech) = g.mechanism(v) else {
                    return Err(Rejection::here(format!("`{v}` has no mechanism")));
                };
                let want = causal_term_to_term(mech);
                if want != *t {
                    return Err(Rejection::here(format!(
                        "mechanism of `{v}` is `{want}`, not `{t}`"
                    )));
                }
            }
            Ok(())
        }
        Rule::DsepDg | Rule::NancDg | Rule::PaDg => {
            let Formula::CausalPred(pred, args) = &j.conclusion else {
                return Err(Rejection::here("graph discharge concludes a causal atom"));
            };
            let expected = match node.rule {
                Rule::DsepDg => crate::syntax::CausalPred::Dsep,
                Rule::NancDg => crate::syntax::CausalPred::Nanc,
                _ => crate::syntax::CausalPred::Pa,
            };
            if *pred != expected {
                return Err(Rejection::here(format!(
                    "{} discharges `{}` atoms only",
                    node.rule.name(),
                    expected.name()
                )));
            }
            match graph::eval_causal_pred(&d, *pred, args) {
                Ok(true) => Ok(()),
                Ok(false) => Err(Rejection::here(format!(
                    "`{}` does not hold in the generator's diagram",
                    j.conclusion
                ))),
                Err(e) => Err(Rejection::here(format!("{e}"))),
            }
        }
        _ => unreachable!(),
    }
}

/// Converts a depth-≤1 causal term into a general term.
pub fn causal_term_to_term(t: &crate::syntax::CausalTerm) -> Term {
    use crate::syntax::{Atom, CausalTerm};
    match t {
        CausalTerm::Name(n) => Term::Name(n.clone()),
        CausalTerm::Const(c) => Term::Const(c.clone()),
        CausalTerm::Var(v) => Term::Vars(VarTuple::single(v.clone())),
        CausalTerm::App(f, args) => Term::App(
            KernelRef::Fsym(f.clone()),
            args.iter()
                .map(|a| match a {
                    Atom::Var(v) => Term::Vars(VarTuple::single(v.clone())),
                    Atom::Name(n) => Term::Name(n.clone()),
                    Atom::Const(c) => Term::Const(c.clone()),
                })
                .collect(),
        ),
    }
}

fn premises_array<const N: usize>(
    node: &DerivationNode,
) -> Result<[&DerivationNode; N], Rejection> {
    if node.premises.len() != N {
        return Err(Rejection::here(format!(
            "rule {} takes {N} premise(s), found {}",
            node.rule.name(),
            node.premises.len()
        )));
    }
    let mut it = node.premises.iter();
    Ok(core::array::from_fn(|_| it.next().unwrap()))
}

fn no_premises(node: &DerivationNode) -> Result<(), Rejection> {
    if node.premises.is_empty() {
        Ok(())
    } else {
        Err(Rejection::here(format!(
            "rule {} takes no premises",
            node.rule.name()
        )))
    }
}

fn same_frame(a: &Judgment, b: &Judgment) -> Result<(), Rejection> {
    if a.context != b.context {
        return Err(Rejection::here("premise context differs from conclusion"));
    }
    if a.gen != b.gen {
        return Err(Rejection::here("premise generator differs from conclusion"));
    }
    if a.layer != b.layer {
        return Err(Rejection::here("premise layer differs from conclusion"));
    }
    Ok(())
}

/// Splits a desugared implication `!(a & !b)` into `(a, b)`.
pub fn split_imp(f: &Formula) -> Option<(&Formula, &Formula)> {
    if let Formula::Not(inner) = f {
        if let Formula::And(a, nb) = inner.as_ref() {
            if let Formula::Not(b) = nb.as_ref() {
                return Some((a, b));
            }
        }
    }
    None
}

/// Checks a whole derivation tree in post-order; the first rejection is
/// reported with its node path.
pub fn check_derivation(
    root: &DerivationNode,
    base: Option<&DataGenerator>,
) -> Result<(), Rejection> {
    fn walk(
        node: &DerivationNode,
        base: Option<&DataGenerator>,
        path: &mut Vec<usize>,
    ) -> Result<(), Rejection> {
        for (i, p) in node.premises.iter().enumerate() {
            path.push(i);
            walk(p, base, path)?;
            path.pop();
        }
        check_step(node, base).map_err(|mut r| {
            r.path = path.clone();
            r
        })
    }
    walk(root, base, &mut Vec::new())
}

#[cfg(test)]
mod tests;
