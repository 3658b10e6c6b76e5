//! Axiom-schema names, binding sorts, and instantiation.
//!
//! `instantiate` turns a rule plus typed bindings into the exact formula
//! the schema licenses, enforcing every side condition (sorts, required
//! disjointness, occurrence restrictions). The checker compares its output
//! syntactically against a node's recorded conclusion.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{Binding, Bindings, Layer};
use crate::syntax::{
    Assignments, CausalPred, CondVar, Formula, GenRef, KernelRef, PosArg, Term, VarTuple,
};

/// Every rule the kernel knows. Axiom schemas are premise-free; `Mp`,
/// `DgEi`, `DgLi`, `Hyp`, and `Deduction` are structural.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Pt,
    Mp,
    Eq1,
    Eq2,
    EqN,
    EqF,
    Pd,
    Mpd,
    DgEi,
    EffectEi,
    EqEi,
    SplitEi,
    SimulEi,
    RptEi,
    CmpEi,
    DistrEiNot,
    DistrEiAnd,
    DgLi,
    EffectLi,
    CondLi,
    SplitLi,
    SimulLi,
    RptLi,
    CmpLi,
    DistrLiNot,
    DistrLiAnd,
    ExpdEili,
    ExcdEili,
    DsepCInd1,
    DsepCInd2,
    DsepSm,
    DsepDc,
    DsepWu,
    DsepCn,
    DsepEi1,
    DsepEi2,
    DsepLi1,
    DsepLi2,
    DsepLi3,
    Nanc1,
    Nanc2,
    Nanc3,
    Nanc4,
    Nanc5,
    AllNanc,
    PaToNanc,
    PaToDsep,
    DgEq,
    DsepDg,
    NancDg,
    PaDg,
    Do1,
    Do2,
    Do3,
    Hyp,
    Deduction,
}

pub const ALL_RULES: &[Rule] = &[
    Rule::Pt,
    Rule::Mp,
    Rule::Eq1,
    Rule::Eq2,
    Rule::EqN,
    Rule::EqF,
    Rule::Pd,
    Rule::Mpd,
    Rule::DgEi,
    Rule::EffectEi,
    Rule::EqEi,
    Rule::SplitEi,
    Rule::SimulEi,
    Rule::RptEi,
    Rule::CmpEi,
    Rule::DistrEiNot,
    Rule::DistrEiAnd,
    Rule::DgLi,
    Rule::EffectLi,
    Rule::CondLi,
    Rule::SplitLi,
    Rule::SimulLi,
    Rule::RptLi,
    Rule::CmpLi,
    Rule::DistrLiNot,
    Rule::DistrLiAnd,
    Rule::ExpdEili,
    Rule::ExcdEili,
    Rule::DsepCInd1,
    Rule::DsepCInd2,
    Rule::DsepSm,
    Rule::DsepDc,
    Rule::DsepWu,
    Rule::DsepCn,
    Rule::DsepEi1,
    Rule::DsepEi2,
    Rule::DsepLi1,
    Rule::DsepLi2,
    Rule::DsepLi3,
    Rule::Nanc1,
    Rule::Nanc2,
    Rule::Nanc3,
    Rule::Nanc4,
    Rule::Nanc5,
    Rule::AllNanc,
    Rule::PaToNanc,
    Rule::PaToDsep,
    Rule::DgEq,
    Rule::DsepDg,
    Rule::NancDg,
    Rule::PaDg,
    Rule::Do1,
    Rule::Do2,
    Rule::Do3,
    Rule::Hyp,
    Rule::Deduction,
];

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Pt => "PT",
            Rule::Mp => "MP",
            Rule::Eq1 => "Eq1",
            Rule::Eq2 => "Eq2",
            Rule::EqN => "EqN",
            Rule::EqF => "EqF",
            Rule::Pd => "PD",
            Rule::Mpd => "MPD",
            Rule::DgEi => "DG_EI",
            Rule::EffectEi => "Effect_EI",
            Rule::EqEi => "Eq_EI",
            Rule::SplitEi => "Split_EI",
            Rule::SimulEi => "Simul_EI",
            Rule::RptEi => "Rpt_EI",
            Rule::CmpEi => "Cmp_EI",
            Rule::DistrEiNot => "DistrEI_not",
            Rule::DistrEiAnd => "DistrEI_and",
            Rule::DgLi => "DG_LI",
            Rule::EffectLi => "Effect_LI",
            Rule::CondLi => "Cond_LI",
            Rule::SplitLi => "Split_LI",
            Rule::SimulLi => "Simul_LI",
            Rule::RptLi => "Rpt_LI",
            Rule::CmpLi => "Cmp_LI",
            Rule::DistrLiNot => "DistrLI_not",
            Rule::DistrLiAnd => "DistrLI_and",
            Rule::ExpdEili => "Expd_EILI",
            Rule::ExcdEili => "Excd_EILI",
            Rule::DsepCInd1 => "DsepCInd1",
            Rule::DsepCInd2 => "DsepCInd2",
            Rule::DsepSm => "DsepSm",
            Rule::DsepDc => "DsepDc",
            Rule::DsepWu => "DsepWu",
            Rule::DsepCn => "DsepCn",
            Rule::DsepEi1 => "Dsep_EI1",
            Rule::DsepEi2 => "Dsep_EI2",
            Rule::DsepLi1 => "Dsep_LI1",
            Rule::DsepLi2 => "Dsep_LI2",
            Rule::DsepLi3 => "Dsep_LI3",
            Rule::Nanc1 => "Nanc1",
            Rule::Nanc2 => "Nanc2",
            Rule::Nanc3 => "Nanc3",
            Rule::Nanc4 => "Nanc4",
            Rule::Nanc5 => "Nanc5",
            Rule::AllNanc => "AllNanc",
            Rule::PaToNanc => "PaToNanc",
            Rule::PaToDsep => "PaToDsep",
            Rule::DgEq => "DG_Eq",
            Rule::DsepDg => "DsepDG",
            Rule::NancDg => "NancDG",
            Rule::PaDg => "PaDG",
            Rule::Do1 => "Do1",
            Rule::Do2 => "Do2",
            Rule::Do3 => "Do3",
            Rule::Hyp => "Hyp",
            Rule::Deduction => "Deduction",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        ALL_RULES.iter().copied().find(|r| r.name() == s)
    }
}

/// Minimal layer a rule needs.
pub fn rule_layer(rule: Rule) -> Layer {
    match rule {
        Rule::DsepCInd1
        | Rule::DsepCInd2
        | Rule::DsepSm
        | Rule::DsepDc
        | Rule::DsepWu
        | Rule::DsepCn
        | Rule::DsepEi1
        | Rule::DsepEi2
        | Rule::DsepLi1
        | Rule::DsepLi2
        | Rule::DsepLi3
        | Rule::Nanc1
        | Rule::Nanc2
        | Rule::Nanc3
        | Rule::Nanc4
        | Rule::Nanc5
        | Rule::AllNanc
        | Rule::PaToNanc
        | Rule::PaToDsep
        | Rule::Do1
        | Rule::Do2
        | Rule::Do3 => Layer::AxCp,
        Rule::DgEq | Rule::DsepDg | Rule::NancDg | Rule::PaDg => Layer::AxGCp,
        _ => Layer::Ax,
    }
}

/// Sort a binding key parses as, by naming convention: `a*` assignments,
/// `cv` conditional variable, `c*` constant lists, `gen` generator
/// reference, `occ` occurrence indices, `phi*`/`psi*` formulas, `f`/`k*`
/// kernel references, `u*`/`n*` terms, `v`/`w`/`x*`/`y*`/`z*` tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingSort {
    Tuple,
    Assigns,
    Term,
    Kref,
    CondV,
    Gen,
    Formula,
    Indices,
    Consts,
}

pub fn binding_sort(key: &str) -> Option<BindingSort> {
    if key == "cv" {
        return Some(BindingSort::CondV);
    }
    if key == "gen" {
        return Some(BindingSort::Gen);
    }
    if key == "occ" {
        return Some(BindingSort::Indices);
    }
    if key.starts_with("phi") || key.starts_with("psi") {
        return Some(BindingSort::Formula);
    }
    if key.starts_with('a') {
        return Some(BindingSort::Assigns);
    }
    if key.starts_with('c') {
        return Some(BindingSort::Consts);
    }
    if key.starts_with('u') || key.starts_with('n') {
        return Some(BindingSort::Term);
    }
    if key.starts_with('f') || key.starts_with('k') {
        return Some(BindingSort::Kref);
    }
    if key.starts_with('v')
        || key.starts_with('w')
        || key.starts_with('x')
        || key.starts_with('y')
        || key.starts_with('z')
    {
        return Some(BindingSort::Tuple);
    }
    None
}

/// Instantiation failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstError(pub String);

impl core::fmt::Display for InstError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Ctx<'a> {
    bind: &'a Bindings,
    gen: &'a GenRef,
}

impl<'a> Ctx<'a> {
    fn get(&self, key: &str) -> Result<&Binding, InstError> {
        self.bind
            .get(key)
            .ok_or_else(|| InstError(format!("missing binding `{key}`")))
    }

    fn tuple(&self, key: &str) -> Result<VarTuple, InstError> {
        match self.get(key)? {
            Binding::Tuple(t) => Ok(t.clone()),
            _ => Err(InstError(format!("binding `{key}` must be a variable tuple"))),
        }
    }

    fn nonempty_tuple(&self, key: &str) -> Result<VarTuple, InstError> {
        let t = self.tuple(key)?;
        if t.is_empty() {
            return Err(InstError(format!("tuple `{key}` must be non-empty")));
        }
        Ok(t)
    }

    fn assigns(&self, key: &str) -> Result<Assignments, InstError> {
        match self.get(key)? {
            Binding::Assigns(a) if !a.is_empty() => Ok(a.clone()),
            Binding::Assigns(_) => {
                Err(InstError(format!("assignment list `{key}` must be non-empty")))
            }
            _ => Err(InstError(format!("binding `{key}` must be an assignment list"))),
        }
    }

    /// Assignment list that may be absent or empty (for optional `v`).
    fn assigns_opt(&self, key: &str) -> Result<Assignments, InstError> {
        match self.bind.get(key) {
            None => Ok(Assignments::new(Vec::new()).unwrap()),
            Some(Binding::Assigns(a)) => Ok(a.clone()),
            Some(_) => Err(InstError(format!("binding `{key}` must be an assignment list"))),
        }
    }

    fn term(&self, key: &str) -> Result<Term, InstError> {
        match self.get(key)? {
            Binding::Term(t) => Ok(t.clone()),
            _ => Err(InstError(format!("binding `{key}` must be a term"))),
        }
    }

    fn kref(&self, key: &str) -> Result<KernelRef, InstError> {
        match self.get(key)? {
            Binding::Kref(k) => Ok(k.clone()),
            _ => Err(InstError(format!("binding `{key}` must be a kernel reference"))),
        }
    }

    fn formula(&self, key: &str) -> Result<Formula, InstError> {
        match self.get(key)? {
            Binding::Formula(f) => Ok(f.clone()),
            _ => Err(InstError(format!("binding `{key}` must be a formula"))),
        }
    }

    fn condv(&self, key: &str) -> Result<CondVar, InstError> {
        match self.get(key)? {
            Binding::CondV(cv) => Ok(cv.clone()),
            _ => Err(InstError(format!("binding `{key}` must be a conditional variable"))),
        }
    }

    fn genref(&self, key: &str) -> Result<GenRef, InstError> {
        match self.get(key)? {
            Binding::Gen(g) => Ok(g.clone()),
            _ => Err(InstError(format!("binding `{key}` must be a generator reference"))),
        }
    }

    fn indices(&self, key: &str) -> Result<Vec<usize>, InstError> {
        match self.bind.get(key) {
            None => Ok(Vec::new()),
            Some(Binding::Indices(is)) => Ok(is.clone()),
            Some(_) => Err(InstError(format!("binding `{key}` must be occurrence indices"))),
        }
    }
}

fn require_disjoint(tuples: &[(&str, &VarTuple)]) -> Result<(), InstError> {
    for i in 0..tuples.len() {
        for j in i + 1..tuples.len() {
            if let Some(v) = tuples[i].1.iter().find(|v| tuples[j].1.contains(v)) {
                return Err(InstError(format!(
                    "`{}` and `{}` must be disjoint (overlap on `{v}`)",
                    tuples[i].0, tuples[j].0
                )));
            }
        }
    }
    Ok(())
}

fn dsep(x: &VarTuple, y: &VarTuple, z: &VarTuple) -> Formula {
    Formula::CausalPred(CausalPred::Dsep, vec![x.clone(), y.clone(), z.clone()])
}

fn nanc(x: &VarTuple, y: &VarTuple) -> Formula {
    Formula::CausalPred(CausalPred::Nanc, vec![x.clone(), y.clone()])
}

fn pos_t(t: &VarTuple) -> Formula {
    Formula::Pos(PosArg::Tuple(t.clone()))
}

fn marginal_cond(y: &VarTuple, z: &VarTuple) -> Result<CondVar, InstError> {
    CondVar::new(y.clone(), z.clone(), VarTuple::empty(), Vec::new())
        .map_err(|e| InstError(format!("{e}")))
}

fn fixed_cond(y: &VarTuple, z: &VarTuple, a: &Assignments) -> Result<CondVar, InstError> {
    CondVar::new(
        y.clone(),
        z.clone(),
        a.vars(),
        a.iter().map(|(_, c)| c.clone()).collect(),
    )
    .map_err(|e| InstError(format!("{e}")))
}

/// The tuple equation `<x> == c`-style right side for an assignment list:
/// a single constant for one variable, a tuple of constants otherwise,
/// aligned with the sorted variable order.
fn const_tuple_term(a: &Assignments) -> Term {
    if a.len() == 1 {
        Term::Const(a.iter().next().unwrap().1.clone())
    } else {
        Term::Tuple(a.iter().map(|(_, c)| Term::Const(c.clone())).collect())
    }
}

fn vars_eq_consts(a: &Assignments) -> Formula {
    Formula::EqTerm(Term::Vars(a.vars()), const_tuple_term(a))
}

/// Guard conjunction `dsep ∧ ⋀_{s∈S} pos(s)` in the canonical (sorted)
/// order of `S`.
fn guard_with_pos(head: Formula, s: &BTreeSet<PosArg>) -> Formula {
    let mut fs = vec![head];
    fs.extend(s.iter().map(|arg| Formula::Pos(arg.clone())));
    Formula::and_all(fs)
}

/// Instantiates an axiom schema (or derived schema) into its formula.
pub fn instantiate(rule: Rule, bind: &Bindings, gen: &GenRef) -> Result<Formula, InstError> {
    let c = Ctx { bind, gen };
    match rule {
        Rule::Pt => {
            let phi = c.formula("phi")?;
            if !super::tautology::is_tautology(&phi) {
                return Err(InstError(format!("`{phi}` is not a propositional tautology")));
            }
            Ok(phi)
        }
        Rule::Eq1 => {
            if bind.contains_key("k1") {
                let k = c.kref("k1")?;
                Ok(Formula::EqKernel(k.clone(), k))
            } else {
                let u = c.term("u")?;
                Ok(Formula::EqTerm(u.clone(), u))
            }
        }
        Rule::Eq2 => instantiate_eq2(&c),
        Rule::EqN => {
            let x = c.nonempty_tuple("x")?;
            let gref = c.genref("gen")?;
            if gref != *c.gen {
                return Err(InstError(
                    "canonical name must refer to the judgment's generator".into(),
                ));
            }
            Ok(Formula::EqTerm(
                Term::CanonName(gref, x.clone()),
                Term::Vars(x),
            ))
        }
        Rule::EqF => {
            let cv = c.condv("cv")?;
            let gref = c.genref("gen")?;
            if gref != *c.gen {
                return Err(InstError(
                    "canonical symbol must refer to the judgment's generator".into(),
                ));
            }
            Ok(Formula::EqKernel(
                KernelRef::CanonCond(gref, cv.clone()),
                KernelRef::Cond(cv),
            ))
        }
        Rule::Pd => {
            let x = c.nonempty_tuple("x")?;
            let y = c.nonempty_tuple("y")?;
            require_disjoint(&[("x", &x), ("y", &y)])?;
            let n0 = name_term(&c, "n0")?;
            let n1 = name_term(&c, "n1")?;
            let f = c.kref("f")?;
            let xy = x.merge(&y).map_err(|e| InstError(format!("{e}")))?;
            let antecedent = Formula::and_all(vec![
                pos_t(&x),
                Formula::EqTerm(n0.clone(), Term::Vars(x.clone())),
                Formula::EqKernel(f.clone(), KernelRef::Cond(marginal_cond(&y, &x)?)),
                Formula::EqTerm(n1.clone(), Term::Vars(xy)),
            ]);
            Ok(Formula::imp(
                antecedent,
                Formula::EqTerm(n1, Term::App(f, vec![n0])),
            ))
        }
        Rule::Mpd => {
            let x1 = c.nonempty_tuple("x1")?;
            let x2 = c.nonempty_tuple("x2")?;
            if !x2.is_subset_of(&x1) {
                return Err(InstError("`x2` must be a subset of `x1`".into()));
            }
            Ok(Formula::EqTerm(
                Term::Margin(alloc::boxed::Box::new(Term::Vars(x1)), x2.clone()),
                Term::Vars(x2),
            ))
        }
        Rule::EffectEi => {
            let a = c.assigns("a")?;
            Ok(Formula::eager(a.clone(), vars_eq_consts(&a)))
        }
        Rule::EqEi => {
            let a = c.assigns("a")?;
            let u1 = c.term("u1")?;
            let u2 = c.term("u2")?;
            if !u1.free_vars().is_empty() || !u2.free_vars().is_empty() {
                return Err(InstError("both terms must be variable-free".into()));
            }
            let eq = Formula::EqTerm(u1, u2);
            Ok(Formula::iff(eq.clone(), Formula::eager(a, eq)))
        }
        Rule::SplitEi | Rule::SplitLi => {
            let a1 = c.assigns("a1")?;
            let a2 = c.assigns("a2")?;
            let joint = a1.union(&a2).map_err(|e| InstError(format!("{e}")))?;
            let phi = c.formula("phi")?;
            let (outer, inner) = wrap_pair(rule == Rule::SplitEi);
            Ok(Formula::imp(
                outer(joint, phi.clone()),
                outer(a1, inner(a2, phi)),
            ))
        }
        Rule::SimulEi | Rule::SimulLi => {
            let a1 = c.assigns("a1")?;
            let a2 = c.assigns("a2")?;
            let phi = c.formula("phi")?;
            // For lazy interventions the outer substitution happens first,
            // so an overlapping reassignment would not win; the collapse is
            // only sound for disjoint lists there.
            if rule == Rule::SimulLi && !a1.vars().is_disjoint_from(&a2.vars()) {
                return Err(InstError(
                    "lazy simultaneity requires disjoint assignment lists".into(),
                ));
            }
            let trimmed = a1.without(&a2.vars());
            let joint = trimmed.union(&a2).map_err(|e| InstError(format!("{e}")))?;
            let (outer, inner) = wrap_pair(rule == Rule::SimulEi);
            Ok(Formula::imp(
                outer(a1, inner(a2, phi.clone())),
                outer(joint, phi),
            ))
        }
        Rule::RptEi | Rule::RptLi => {
            let a = c.assigns("a")?;
            let phi = c.formula("phi")?;
            let (outer, inner) = wrap_pair(rule == Rule::RptEi);
            Ok(Formula::imp(
                outer(a.clone(), phi.clone()),
                outer(a.clone(), inner(a, phi)),
            ))
        }
        Rule::CmpEi | Rule::CmpLi => {
            let a1 = c.assigns("a1")?;
            let a2 = c.assigns("a2")?;
            let x3 = c.nonempty_tuple("x3")?;
            let u = c.term("u")?;
            require_disjoint(&[
                ("a1", &a1.vars()),
                ("a2", &a2.vars()),
                ("x3", &x3),
            ])?;
            let joint = a1.union(&a2).map_err(|e| InstError(format!("{e}")))?;
            let eq3 = Formula::EqTerm(Term::Vars(x3), u);
            let (outer, _) = wrap_pair(rule == Rule::CmpEi);
            Ok(Formula::imp(
                Formula::and(
                    outer(a1.clone(), vars_eq_consts(&a2)),
                    outer(a1, eq3.clone()),
                ),
                outer(joint, eq3),
            ))
        }
        Rule::DistrEiNot | Rule::DistrLiNot => {
            let a = c.assigns("a")?;
            let phi = c.formula("phi")?;
            let (outer, _) = wrap_pair(rule == Rule::DistrEiNot);
            Ok(Formula::iff(
                outer(a.clone(), Formula::not(phi.clone())),
                Formula::not(outer(a, phi)),
            ))
        }
        Rule::DistrEiAnd | Rule::DistrLiAnd => {
            let a = c.assigns("a")?;
            let phi1 = c.formula("phi1")?;
            let phi2 = c.formula("phi2")?;
            let (outer, _) = wrap_pair(rule == Rule::DistrEiAnd);
            Ok(Formula::iff(
                outer(a.clone(), Formula::and(phi1.clone(), phi2.clone())),
                Formula::and(outer(a.clone(), phi1), outer(a, phi2)),
            ))
        }
        Rule::EffectLi => {
            let a = c.assigns("a")?;
            // Cross-substitution inside a lazily intervened tuple can move
            // the tuple's own joint when one assigned variable feeds
            // another; the mechanism-preservation reading only holds for a
            // single variable.
            if a.len() != 1 {
                return Err(InstError(
                    "lazy effect preservation holds for single-variable interventions".into(),
                ));
            }
            let u = c.term("u")?;
            if !u.free_vars().is_empty() {
                return Err(InstError("the term must be variable-free".into()));
            }
            let eq = Formula::EqTerm(Term::Vars(a.vars()), u);
            Ok(Formula::iff(eq.clone(), Formula::lazy(a, eq)))
        }
        Rule::CondLi => {
            let a = c.assigns("a")?;
            let y = c.nonempty_tuple("y")?;
            let z = c.tuple("z")?;
            require_disjoint(&[("a", &a.vars()), ("y", &y), ("z", &z)])?;
            let f = c.kref("f")?;
            let cv = fixed_cond(&y, &z, &a)?;
            let eq = Formula::EqKernel(f, KernelRef::Cond(cv));
            Ok(Formula::iff(eq.clone(), Formula::lazy(a, eq)))
        }
        Rule::ExpdEili => {
            let a = c.assigns("a")?;
            let n = name_term(&c, "n")?;
            let y = c.nonempty_tuple("y")?;
            require_disjoint(&[("a", &a.vars()), ("y", &y)])?;
            let eq = Formula::EqTerm(n, Term::Vars(y));
            Ok(Formula::iff(
                Formula::eager(a.clone(), eq.clone()),
                Formula::lazy(a, eq),
            ))
        }
        Rule::ExcdEili => {
            let a = c.assigns("a")?;
            let y = c.nonempty_tuple("y")?;
            let z = c.tuple("z")?;
            require_disjoint(&[("a", &a.vars()), ("y", &y), ("z", &z)])?;
            let f = c.kref("f")?;
            let eq = Formula::EqKernel(f, KernelRef::Cond(marginal_cond(&y, &z)?));
            Ok(Formula::imp(
                pos_t(&z),
                Formula::iff(
                    Formula::eager(a.clone(), eq.clone()),
                    Formula::lazy(a, eq),
                ),
            ))
        }
        Rule::DsepCInd1 => {
            let x = c.nonempty_tuple("x")?;
            let y = c.nonempty_tuple("y")?;
            let z = c.tuple("z")?;
            require_disjoint(&[("x", &x), ("y", &y), ("z", &z)])?;
            let zx = z.merge(&x).map_err(|e| InstError(format!("{e}")))?;
            Ok(Formula::imp(
                Formula::and(dsep(&x, &y, &z), pos_t(&z)),
                Formula::EqKernel(
                    KernelRef::Cond(marginal_cond(&y, &zx)?),
                    KernelRef::Cond(marginal_cond(&y, &z)?),
                ),
            ))
        }
        Rule::DsepCInd2 => {
            let a = c.assigns("a")?;
            let x = a.vars();
            let y = c.nonempty_tuple("y")?;
            let z = c.tuple("z")?;
            require_disjoint(&[("a", &x), ("y", &y), ("z", &z)])?;
            Ok(Formula::imp(
                Formula::and(dsep(&x, &y, &z), pos_t(&z)),
                Formula::EqKernel(
                    KernelRef::Cond(fixed_cond(&y, &z, &a)?),
                    KernelRef::Cond(marginal_cond(&y, &z)?),
                ),
            ))
        }
        Rule::DsepSm => {
            let x = c.nonempty_tuple("x")?;
            let y = c.nonempty_tuple("y")?;
            let z = c.tuple("z")?;
            require_disjoint(&[("x", &x), ("y", &y), ("z", &z)])?;
            Ok(Formula::iff(dsep(&x, &y, &z), dsep(&y, &x, &z)))
        }
        Rule::DsepDc => {
            let x = c.nonempty_tuple("x")?;
            let y = c.nonempty_tuple("y")?;
            let y1 = c.nonempty_tuple("y1")?;
            let z = c.tuple("z")?;
            require_disjoint(&[("x", &x), ("y", &y), ("y1", &y1), ("z", &z)])?;
            let yy = y.merge(&y1).map_err(|e| InstError(format!("{e}")))?;
            Ok(Formula::imp(
                dsep(&x, &yy, &z),
                Formula::and(dsep(&x, &y, &z), dsep(&x, &y1, &z)),
            ))
        }
        Rule::DsepWu => {
            let x = c.nonempty_tuple("x")?;
            let y = c.nonempty_tuple("y")?;
            let v = c.nonempty_tuple("v")?;
            let z = c.tuple("z")?;
            require_disjoint(&[("x", &x), ("y", &y), ("v", &v), ("z", &z)])?;
            let yv = y.merge(&v).map_err(|e| InstError(format!("{e}")))?;
            let zv = z.merge(&v).map_err(|e| InstError(format!("{e}")))?;
            Ok(Formula::imp(dsep(&x, &yv, &z), dsep(&x, &y, &zv)))
        }
        Rule::DsepCn => {
            let x = c.nonempty_tuple("x")?;
            let y = c.nonempty_tuple("y")?;
            let v = c.nonempty_tuple("v")?;
            let z = c.tuple("z")?;
            require_disjoint(&[("x", &x), ("y", &y), ("v", &v), ("z", &z)])?;
            let zy = z.merge(&y).map_err(|e| InstError(format!("{e}")))?;
            let yv = y.merge(&v).map_err(|e| InstError(format!("{e}")))?;
            Ok(Formula::imp(
                Formula::and(dsep(&x, &y, &z), dsep(&x, &v, &zy)),
                dsep(&x, &yv, &z),
            ))
        }
        Rule::DsepEi1 | Rule::DsepLi1 => {
            let a = c.assigns("a")?;
            let z = a.vars();
            let x = c.nonempty_tuple("x")?;
            let y = c.nonempty_tuple("y")?;
            require_disjoint(&[("x", &x), ("y", &y), ("a", &z)])?;
            let atom = dsep(&x, &y, &z);
            let wrapped = if rule == Rule::DsepEi1 {
                Formula::eager(a, atom.clone())
            } else {
                Formula::lazy(a, atom.clone())
            };
            Ok(Formula::imp(wrapped, atom))
        }
        Rule::DsepEi2 | Rule::DsepLi2 => {
            let a = c.assigns("a")?;
            let x = a.vars();
            let y = c.nonempty_tuple("y")?;
            let z = c.tuple("z")?;
            require_disjoint(&[("a", &x), ("y", &y), ("z", &z)])?;
            let atom = dsep(&x, &y, &z);
            let wrapped = if rule == Rule::DsepEi2 {
                Formula::eager(a, atom.clone())
            } else {
                Formula::lazy(a, atom.clone())
            };
            Ok(Formula::imp(atom, wrapped))
        }
        Rule::DsepLi3 => {
            let a = c.assigns("a")?;
            let z = a.vars();
            let x = c.nonempty_tuple("x")?;
            let y = c.nonempty_tuple("y")?;
            let z1 = c.tuple("z1")?;
            require_disjoint(&[("x", &x), ("y", &y), ("a", &z), ("z1", &z1)])?;
            let zz = z.merge(&z1).map_err(|e| InstError(format!("{e}")))?;
            Ok(Formula::imp(
                dsep(&x, &y, &zz),
                Formula::lazy(a, dsep(&x, &y, &z1)),
            ))
        }
        Rule::Nanc1 => {
            let a = c.assigns("a")?;
            let x = a.vars();
            let y = c.nonempty_tuple("y")?;
            require_disjoint(&[("a", &x), ("y", &y)])?;
            let n = name_term(&c, "n")?;
            let eq = Formula::EqTerm(n, Term::Vars(y.clone()));
            Ok(Formula::imp(
                nanc(&x, &y),
                Formula::iff(eq.clone(), Formula::eager(a, eq)),
            ))
        }
        Rule::Nanc2 => {
            let a = c.assigns("a")?;
            let x = a.vars();
            let y = c.nonempty_tuple("y")?;
            let z = c.nonempty_tuple("z")?;
            require_disjoint(&[("a", &x), ("y", &y), ("z", &z)])?;
            let f = c.kref("f")?;
            let eq = Formula::EqKernel(f, KernelRef::Cond(marginal_cond(&y, &z)?));
            Ok(Formula::imp(
                Formula::and(nanc(&x, &y), nanc(&x, &z)),
                Formula::iff(eq.clone(), Formula::eager(a, eq)),
            ))
        }
        Rule::Nanc3 => {
            let a = c.assigns("a")?;
            let x = a.vars();
            let y = c.nonempty_tuple("y")?;
            require_disjoint(&[("a", &x), ("y", &y)])?;
            Ok(Formula::iff(
                nanc(&x, &y),
                Formula::eager(a, nanc(&x, &y)),
            ))
        }
        Rule::Nanc4 => {
            let a = c.assigns("a")?;
            let x = a.vars();
            let y = c.nonempty_tuple("y")?;
            require_disjoint(&[("a", &x), ("y", &y)])?;
            Ok(Formula::imp(
                nanc(&x, &y),
                Formula::eager(a, dsep(&x, &y, &VarTuple::empty())),
            ))
        }
        Rule::Nanc5 => {
            let x = c.nonempty_tuple("x")?;
            let y = c.nonempty_tuple("y")?;
            let z = c.nonempty_tuple("z")?;
            require_disjoint(&[("x", &x), ("y", &y), ("z", &z)])?;
            Ok(Formula::imp(
                Formula::and(nanc(&x, &z), dsep(&x, &y, &z)),
                nanc(&x, &y),
            ))
        }
        Rule::AllNanc => {
            let x = c.nonempty_tuple("x")?;
            let y = c.nonempty_tuple("y")?;
            let z = c.nonempty_tuple("z")?;
            Ok(Formula::imp(
                Formula::CausalPred(CausalPred::AllNanc, vec![x.clone(), y, z.clone()]),
                nanc(&x, &z),
            ))
        }
        Rule::PaToNanc => {
            let x = c.nonempty_tuple("x")?;
            let y = c.nonempty_tuple("y")?;
            require_disjoint(&[("x", &x), ("y", &y)])?;
            Ok(Formula::imp(
                Formula::CausalPred(CausalPred::Pa, vec![x.clone(), y.clone()]),
                nanc(&y, &x),
            ))
        }
        Rule::PaToDsep => {
            let a = c.assigns("a")?;
            let x = a.vars();
            let y = c.nonempty_tuple("y")?;
            let z = c.nonempty_tuple("z")?;
            require_disjoint(&[("a", &x), ("y", &y), ("z", &z)])?;
            Ok(Formula::imp(
                Formula::CausalPred(CausalPred::Pa, vec![z.clone(), x.clone()]),
                Formula::lazy(a, dsep(&x, &y, &z)),
            ))
        }
        Rule::Do1 => instantiate_do1(&c),
        Rule::Do2 => instantiate_do2(&c),
        Rule::Do3 => instantiate_do3(&c),
        Rule::Mp
        | Rule::DgEi
        | Rule::DgLi
        | Rule::Hyp
        | Rule::Deduction
        | Rule::DgEq
        | Rule::DsepDg
        | Rule::NancDg
        | Rule::PaDg => Err(InstError(format!(
            "{} is checked structurally, not by instantiation",
            rule.name()
        ))),
    }
}

/// The `n` slots of PD/Nanc1/Expd are names or canonical names.
fn name_term(c: &Ctx<'_>, key: &str) -> Result<Term, InstError> {
    let t = c.term(key)?;
    match t {
        Term::Name(_) | Term::CanonName(_, _) => Ok(t),
        _ => Err(InstError(format!("binding `{key}` must be a name"))),
    }
}

fn wrap_pair(eager: bool) -> (fn(Assignments, Formula) -> Formula, fn(Assignments, Formula) -> Formula) {
    if eager {
        (Formula::eager, Formula::eager)
    } else {
        (Formula::lazy, Formula::lazy)
    }
}

// ---- Eq2: occurrence replacement ----

/// A position is replaceable only where the context is a function of the
/// subterm's distribution: equation sides, margin bodies, and application
/// arguments whose sibling arguments mention no names or variables. Never
/// under an intervention modality, inside tuple components, or inside a
/// variable tuple (those are joint-sensitive).
fn instantiate_eq2(c: &Ctx<'_>) -> Result<Formula, InstError> {
    let phi1 = c.formula("phi1")?;
    let occ = c.indices("occ")?;
    if c.bind.contains_key("k1") || c.bind.contains_key("k2") {
        let k1 = c.kref("k1")?;
        let k2 = c.kref("k2")?;
        check_kref_shapes(&k1, &k2)?;
        let mut st = ReplaceState::new(&occ);
        let phi2 = replace_kref_in_formula(&phi1, &k1, &k2, &mut st);
        st.finish()?;
        Ok(Formula::imp(
            Formula::EqKernel(k1, k2),
            Formula::imp(phi1, phi2),
        ))
    } else {
        let u1 = c.term("u1")?;
        let u2 = c.term("u2")?;
        let mut st = ReplaceState::new(&occ);
        let phi2 = replace_term_in_formula(&phi1, &u1, &u2, &mut st);
        st.finish()?;
        Ok(Formula::imp(
            Formula::EqTerm(u1, u2),
            Formula::imp(phi1, phi2),
        ))
    }
}

fn check_kref_shapes(k1: &KernelRef, k2: &KernelRef) -> Result<(), InstError> {
    let shape = |k: &KernelRef| match k {
        KernelRef::Cond(cv) | KernelRef::CanonCond(_, cv) => Some(cv.shape()),
        KernelRef::Fsym(_) => None,
    };
    if let (Some(s1), Some(s2)) = (shape(k1), shape(k2)) {
        if s1 != s2 {
            return Err(InstError(
                "kernel replacement requires matching kernel shapes".into(),
            ));
        }
    }
    Ok(())
}

/// Tracks which matching occurrences to replace. An empty index list means
/// every occurrence.
struct ReplaceState<'a> {
    indices: &'a [usize],
    seen: usize,
    replaced: usize,
}

impl<'a> ReplaceState<'a> {
    fn new(indices: &'a [usize]) -> Self {
        ReplaceState {
            indices,
            seen: 0,
            replaced: 0,
        }
    }

    fn should_replace(&mut self) -> bool {
        let idx = self.seen;
        self.seen += 1;
        let yes = self.indices.is_empty() || self.indices.contains(&idx);
        if yes {
            self.replaced += 1;
        }
        yes
    }

    fn finish(&self) -> Result<(), InstError> {
        for &i in self.indices {
            if i >= self.seen {
                return Err(InstError(format!(
                    "occurrence index {i} out of range ({} matches)",
                    self.seen
                )));
            }
        }
        Ok(())
    }
}

fn replace_term_in_formula(
    phi: &Formula,
    u1: &Term,
    u2: &Term,
    st: &mut ReplaceState<'_>,
) -> Formula {
    match phi {
        Formula::EqTerm(a, b) => Formula::EqTerm(
            replace_term_in_term(a, u1, u2, st),
            replace_term_in_term(b, u1, u2, st),
        ),
        Formula::Not(f) => Formula::not(replace_term_in_formula(f, u1, u2, st)),
        Formula::And(a, b) => Formula::and(
            replace_term_in_formula(a, u1, u2, st),
            replace_term_in_formula(b, u1, u2, st),
        ),
        // modal bodies, predicates, and kernel equations are untouched
        other => other.clone(),
    }
}

fn replace_term_in_term(t: &Term, u1: &Term, u2: &Term, st: &mut ReplaceState<'_>) -> Term {
    if t == u1 {
        if st.should_replace() {
            return u2.clone();
        }
        return t.clone();
    }
    match t {
        Term::App(k, args) => {
            // siblings must be randomness-free for component replacement
            let closed: Vec<bool> = args
                .iter()
                .map(|a| a.free_vars().is_empty() && term_names_free(a))
                .collect();
            let replace_ok =
                args.len() == 1 || (0..args.len()).all(|i| closed.iter().enumerate().all(|(j, &c)| j == i || c));
            if replace_ok {
                Term::App(
                    k.clone(),
                    args.iter()
                        .map(|a| replace_term_in_term(a, u1, u2, st))
                        .collect(),
                )
            } else {
                t.clone()
            }
        }
        Term::Margin(body, keep) => Term::Margin(
            alloc::boxed::Box::new(replace_term_in_term(body, u1, u2, st)),
            keep.clone(),
        ),
        // tuple components correlate through the joint: no replacement
        other => other.clone(),
    }
}

fn term_names_free(t: &Term) -> bool {
    match t {
        Term::Name(_) | Term::CanonName(_, _) => false,
        Term::Vars(_) => true, // variables are handled by free_vars
        Term::Const(_) => true,
        Term::App(_, args) => args.iter().all(term_names_free),
        Term::Margin(body, _) => term_names_free(body),
        Term::Tuple(ts) => ts.iter().all(term_names_free),
    }
}

fn replace_kref_in_formula(
    phi: &Formula,
    k1: &KernelRef,
    k2: &KernelRef,
    st: &mut ReplaceState<'_>,
) -> Formula {
    match phi {
        Formula::EqKernel(a, b) => {
            let ra = if a == k1 && st.should_replace() {
                k2.clone()
            } else {
                a.clone()
            };
            let rb = if b == k1 && st.should_replace() {
                k2.clone()
            } else {
                b.clone()
            };
            Formula::EqKernel(ra, rb)
        }
        Formula::EqTerm(a, b) => Formula::EqTerm(
            replace_kref_in_term(a, k1, k2, st),
            replace_kref_in_term(b, k1, k2, st),
        ),
        Formula::Not(f) => Formula::not(replace_kref_in_formula(f, k1, k2, st)),
        Formula::And(a, b) => Formula::and(
            replace_kref_in_formula(a, k1, k2, st),
            replace_kref_in_formula(b, k1, k2, st),
        ),
        other => other.clone(),
    }
}

fn replace_kref_in_term(t: &Term, k1: &KernelRef, k2: &KernelRef, st: &mut ReplaceState<'_>) -> Term {
    match t {
        Term::App(k, args) => {
            let rk = if k == k1 && st.should_replace() {
                k2.clone()
            } else {
                k.clone()
            };
            Term::App(
                rk,
                args.iter()
                    .map(|a| replace_kref_in_term(a, k1, k2, st))
                    .collect(),
            )
        }
        Term::Margin(body, keep) => Term::Margin(
            alloc::boxed::Box::new(replace_kref_in_term(body, k1, k2, st)),
            keep.clone(),
        ),
        Term::Tuple(ts) => Term::Tuple(
            ts.iter()
                .map(|a| replace_kref_in_term(a, k1, k2, st))
                .collect(),
        ),
        other => other.clone(),
    }
}

// ---- the derived do-calculus schemas ----

/// Do1 (conditioning introduction/elimination): the replacement
/// `y|_z ↦ y|_{z::x}` changes the kernel's input arity, so it is only
/// admitted inside conditional-vs-conditional kernel equations.
fn instantiate_do1(c: &Ctx<'_>) -> Result<Formula, InstError> {
    let v = c.assigns_opt("a")?;
    let x = c.nonempty_tuple("x")?;
    let y = c.nonempty_tuple("y")?;
    let z = c.tuple("z")?;
    require_disjoint(&[("a", &v.vars()), ("x", &x), ("y", &y), ("z", &z)])?;
    let phi0 = c.formula("phi0")?;
    let occ = c.indices("occ")?;
    let from = marginal_cond(&y, &z)?;
    let zx = z.merge(&x).map_err(|e| InstError(format!("{e}")))?;
    let to = marginal_cond(&y, &zx)?;
    let mut st = ReplaceState::new(&occ);
    let phi1 = replace_cond_in_eqkernels(&phi0, &from, &to, &mut st)?;
    st.finish()?;
    let s = {
        let mut s = phi0.cond_vars();
        s.extend(phi1.cond_vars());
        s
    };
    let guard = Formula::eager(v.clone(), guard_with_pos(dsep(&x, &y, &z), &s));
    Ok(Formula::imp(
        guard,
        Formula::iff(
            Formula::eager(v.clone(), phi0),
            Formula::eager(v, phi1),
        ),
    ))
}

/// Replaces occurrences of a conditional variable inside kernel equations
/// whose other side is also conditional-like, rejecting any other position
/// (applied positions would change arity).
fn replace_cond_in_eqkernels(
    phi: &Formula,
    from: &CondVar,
    to: &CondVar,
    st: &mut ReplaceState<'_>,
) -> Result<Formula, InstError> {
    let occurs_applied = |t: &Term| -> bool {
        let mut found = false;
        fn walk(t: &Term, from: &CondVar, found: &mut bool) {
            match t {
                Term::App(k, args) => {
                    if matches!(k, KernelRef::Cond(cv) | KernelRef::CanonCond(_, cv) if cv == from)
                    {
                        *found = true;
                    }
                    for a in args {
                        walk(a, from, found);
                    }
                }
                Term::Margin(b, _) => walk(b, from, found),
                Term::Tuple(ts) => {
                    for a in ts {
                        walk(a, from, found);
                    }
                }
                _ => {}
            }
        }
        walk(t, from, &mut found);
        found
    };
    match phi {
        Formula::EqKernel(a, b) => {
            let cond_like =
                |k: &KernelRef| matches!(k, KernelRef::Cond(_) | KernelRef::CanonCond(_, _));
            if !(cond_like(a) && cond_like(b)) {
                if matches!(a, KernelRef::Cond(cv) if cv == from)
                    || matches!(b, KernelRef::Cond(cv) if cv == from)
                {
                    return Err(InstError(
                        "conditioning replacement is only sound between conditional kernels"
                            .into(),
                    ));
                }
                return Ok(phi.clone());
            }
            let swap = |k: &KernelRef, st: &mut ReplaceState<'_>| match k {
                KernelRef::Cond(cv) if cv == from && st.should_replace() => {
                    KernelRef::Cond(to.clone())
                }
                other => other.clone(),
            };
            let ra = swap(a, st);
            let rb = swap(b, st);
            Ok(Formula::EqKernel(ra, rb))
        }
        Formula::EqTerm(a, b) => {
            if occurs_applied(a) || occurs_applied(b) {
                return Err(InstError(
                    "conditioning replacement cannot rewrite applied occurrences".into(),
                ));
            }
            Ok(phi.clone())
        }
        Formula::Not(f) => Ok(Formula::not(replace_cond_in_eqkernels(f, from, to, st)?)),
        Formula::And(a, b) => Ok(Formula::and(
            replace_cond_in_eqkernels(a, from, to, st)?,
            replace_cond_in_eqkernels(b, from, to, st)?,
        )),
        other => Ok(other.clone()),
    }
}

/// Do2 (intervention/conditioning exchange): every occurrence of `y|_z`
/// becomes `y|_{z,x=c1}`; the kernel shape is unchanged.
fn instantiate_do2(c: &Ctx<'_>) -> Result<Formula, InstError> {
    let v = c.assigns_opt("a")?;
    let ax = c.assigns("a1")?;
    let x = ax.vars();
    let y = c.nonempty_tuple("y")?;
    let z = c.tuple("z")?;
    require_disjoint(&[("a", &v.vars()), ("a1", &x), ("y", &y), ("z", &z)])?;
    let phi0 = c.formula("phi0")?;
    let from = KernelRef::Cond(marginal_cond(&y, &z)?);
    let to = KernelRef::Cond(fixed_cond(&y, &z, &ax)?);
    let mut st = ReplaceState::new(&[]);
    let phi1 = replace_kref_in_formula(&phi0, &from, &to, &mut st);
    let s = {
        let mut s = phi0.cond_vars();
        s.extend(phi1.cond_vars());
        s
    };
    let guard = Formula::eager(
        v.clone(),
        Formula::lazy(ax.clone(), guard_with_pos(dsep(&x, &y, &z), &s)),
    );
    let joint = v.union(&ax).map_err(|e| InstError(format!("{e}")))?;
    Ok(Formula::imp(
        guard,
        Formula::iff(
            Formula::eager(joint, phi0),
            Formula::eager(v, phi1),
        ),
    ))
}

/// Do3 (intervention introduction/elimination): `y|_z` is the only
/// variable occurring in `phi`; `x = x1 :: x2` with `x1` the part outside
/// `ANC(z)` (the allnanc conjunct), and the pos(z) guard is omitted when
/// `z` is empty.
fn instantiate_do3(c: &Ctx<'_>) -> Result<Formula, InstError> {
    let v = c.assigns_opt("a")?;
    let a1 = c.assigns("a1")?;
    let a2 = c.assigns_opt("a2")?;
    let x1 = a1.vars();
    let x2 = a2.vars();
    let y = c.nonempty_tuple("y")?;
    let z = c.tuple("z")?;
    let x = x1.merge(&x2).map_err(|e| InstError(format!("{e}")))?;
    require_disjoint(&[("a", &v.vars()), ("x", &x), ("y", &y), ("z", &z)])?;
    let phi = c.formula("phi")?;
    check_only_variable(&phi, &y, &z)?;
    let inner = if z.is_empty() {
        dsep(&x, &y, &z)
    } else {
        Formula::and(dsep(&x, &y, &z), pos_t(&z))
    };
    let guard = Formula::eager(
        v.clone(),
        Formula::and(
            Formula::CausalPred(CausalPred::AllNanc, vec![x1.clone(), x.clone(), z.clone()]),
            Formula::eager(a1.clone(), inner),
        ),
    );
    let joint = v
        .union(&a1)
        .and_then(|a| a.union(&a2))
        .map_err(|e| InstError(format!("{e}")))?;
    Ok(Formula::imp(
        guard,
        Formula::iff(
            Formula::eager(v, phi.clone()),
            Formula::eager(joint, phi),
        ),
    ))
}

/// Do3's side condition: the conditional variable `y|_z` (the plain tuple
/// `y` when `z` is empty) is the only variable occurring in the formula.
fn check_only_variable(phi: &Formula, y: &VarTuple, z: &VarTuple) -> Result<(), InstError> {
    let allowed_cv = CondVar {
        target: y.clone(),
        given: z.clone(),
        fixed: VarTuple::empty(),
        fixed_vals: Vec::new(),
    };
    fn walk_term(
        t: &Term,
        y: &VarTuple,
        z: &VarTuple,
        cv: &CondVar,
    ) -> Result<(), InstError> {
        match t {
            Term::Vars(vt) => {
                if !(z.is_empty() && vt == y) && !vt.is_empty() {
                    return Err(InstError(format!(
                        "`{vt}` occurs, but only the designated conditional variable may"
                    )));
                }
                Ok(())
            }
            Term::Name(_) | Term::CanonName(_, _) | Term::Const(_) => Ok(()),
            Term::App(k, args) => {
                if let KernelRef::Cond(c) | KernelRef::CanonCond(_, c) = k {
                    if c != cv {
                        return Err(InstError(format!(
                            "`{c}` occurs, but only the designated conditional variable may"
                        )));
                    }
                }
                for a in args {
                    walk_term(a, y, z, cv)?;
                }
                Ok(())
            }
            Term::Margin(b, _) => walk_term(b, y, z, cv),
            Term::Tuple(ts) => ts.iter().try_for_each(|a| walk_term(a, y, z, cv)),
        }
    }
    fn walk(phi: &Formula, y: &VarTuple, z: &VarTuple, cv: &CondVar) -> Result<(), InstError> {
        match phi {
            Formula::Top => Ok(()),
            Formula::EqTerm(a, b) => {
                walk_term(a, y, z, cv)?;
                walk_term(b, y, z, cv)
            }
            Formula::EqKernel(a, b) => {
                for k in [a, b] {
                    if let KernelRef::Cond(c) | KernelRef::CanonCond(_, c) = k {
                        if c != cv {
                            return Err(InstError(format!(
                                "`{c}` occurs, but only the designated conditional variable may"
                            )));
                        }
                    }
                }
                Ok(())
            }
            Formula::Not(f) => walk(f, y, z, cv),
            Formula::And(a, b) => {
                walk(a, y, z, cv)?;
                walk(b, y, z, cv)
            }
            _ => Err(InstError(
                "the formula may contain only equations over the designated variable".into(),
            )),
        }
    }
    walk(phi, y, z, &allowed_cv)
}
