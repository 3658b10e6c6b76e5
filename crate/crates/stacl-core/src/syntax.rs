//! Abstract syntax: variable tuples, causal terms, general terms,
//! conditional variables, formulas, and the structural operations on them.
//!
//! Identifier classes are kept distinct at the type level: causal variables,
//! names (random values), constants (point distributions), and function
//! symbols. Tuples of variables are always sorted and duplicate-free, so a
//! `VarTuple` doubles as a set.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Causal variable identifier.
pub type Var = String;
/// Name identifier (a random value).
pub type Name = String;
/// Constant identifier (a point distribution).
pub type Const = String;
/// Function symbol identifier.
pub type Fsym = String;

/// Sorted, duplicate-free tuple of causal variables.
///
/// Every tuple-producing operation keeps the sorted invariant, so a tuple
/// can be read as the set of its variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VarTuple(Vec<Var>);

/// Error from [`VarTuple::merge`] when the operands overlap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapError(pub Var);

impl fmt::Display for OverlapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tuples overlap on variable `{}`", self.0)
    }
}

/// Error from [`VarTuple::new`] when an identifier repeats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicateVarError(pub Var);

impl fmt::Display for DuplicateVarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "duplicate variable `{}` in tuple", self.0)
    }
}

impl VarTuple {
    /// Builds a tuple from identifiers, sorting them. Duplicates are an error.
    pub fn new<I, S>(vars: I) -> Result<Self, DuplicateVarError>
    where
        I: IntoIterator<Item = S>,
        S: Into<Var>,
    {
        let mut v: Vec<Var> = vars.into_iter().map(Into::into).collect();
        v.sort();
        for w in v.windows(2) {
            if w[0] == w[1] {
                return Err(DuplicateVarError(w[0].clone()));
            }
        }
        Ok(VarTuple(v))
    }

    /// Singleton tuple.
    pub fn single(v: impl Into<Var>) -> Self {
        VarTuple(vec![v.into()])
    }

    /// Empty tuple.
    pub fn empty() -> Self {
        VarTuple(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Var> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Var] {
        &self.0
    }

    pub fn contains(&self, v: &str) -> bool {
        self.0.binary_search_by(|x| x.as_str().cmp(v)).is_ok()
    }

    /// Position of `v` in the sorted tuple, if present.
    pub fn index_of(&self, v: &str) -> Option<usize> {
        self.0.binary_search_by(|x| x.as_str().cmp(v)).ok()
    }

    pub fn is_subset_of(&self, other: &VarTuple) -> bool {
        self.0.iter().all(|v| other.contains(v))
    }

    pub fn is_disjoint_from(&self, other: &VarTuple) -> bool {
        self.0.iter().all(|v| !other.contains(v))
    }

    /// `x :: y`: merge of two disjoint tuples, sorted.
    pub fn merge(&self, other: &VarTuple) -> Result<VarTuple, OverlapError> {
        if let Some(v) = self.0.iter().find(|v| other.contains(v)) {
            return Err(OverlapError(v.clone()));
        }
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        v.sort();
        Ok(VarTuple(v))
    }

    /// Set union, sorted (no disjointness requirement).
    pub fn union(&self, other: &VarTuple) -> VarTuple {
        let mut v = self.0.clone();
        for x in other.iter() {
            if !self.contains(x) {
                v.push(x.clone());
            }
        }
        v.sort();
        VarTuple(v)
    }

    /// `x \ y`: removal of all variables in `other`.
    pub fn minus(&self, other: &VarTuple) -> VarTuple {
        VarTuple(
            self.0
                .iter()
                .filter(|v| !other.contains(v))
                .cloned()
                .collect(),
        )
    }

    pub fn intersect(&self, other: &VarTuple) -> VarTuple {
        VarTuple(self.0.iter().filter(|v| other.contains(v)).cloned().collect())
    }

    /// Builds from an iterator of possibly-duplicated vars, deduplicating.
    pub fn from_set<I, S>(vars: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<Var>,
    {
        let set: BTreeSet<Var> = vars.into_iter().map(Into::into).collect();
        VarTuple(set.into_iter().collect())
    }
}

impl fmt::Display for VarTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ">")
    }
}

/// Atom argument of a causal term: variable, name, or constant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(Var),
    Name(Name),
    Const(Const),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var(v) => write!(f, "{v}"),
            Atom::Name(n) => write!(f, "{n}"),
            Atom::Const(c) => write!(f, "{c}"),
        }
    }
}

/// Term of depth at most 1: what a data generator assigns to a variable.
///
/// `Var` is the identity mechanism introduced by generator expansion
/// (`g(x') = x`); it does not occur in source models.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CausalTerm {
    Name(Name),
    Const(Const),
    Var(Var),
    App(Fsym, Vec<Atom>),
}

impl CausalTerm {
    /// Variables occurring in the term.
    pub fn free_vars(&self) -> VarTuple {
        match self {
            CausalTerm::Var(v) => VarTuple::single(v.clone()),
            CausalTerm::App(_, args) => VarTuple::from_set(args.iter().filter_map(|a| match a {
                Atom::Var(v) => Some(v.clone()),
                _ => None,
            })),
            _ => VarTuple::empty(),
        }
    }

    /// Names and constants occurring in the term.
    pub fn names_consts(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        match self {
            CausalTerm::Name(n) => {
                out.insert(n.clone());
            }
            CausalTerm::Const(c) => {
                out.insert(c.clone());
            }
            CausalTerm::Var(_) => {}
            CausalTerm::App(_, args) => {
                for a in args {
                    match a {
                        Atom::Name(n) => {
                            out.insert(n.clone());
                        }
                        Atom::Const(c) => {
                            out.insert(c.clone());
                        }
                        Atom::Var(_) => {}
                    }
                }
            }
        }
        out
    }

    /// Replaces every occurrence of variable `x` by variable `r`.
    pub fn rename_var(&self, x: &str, r: &str) -> CausalTerm {
        match self {
            CausalTerm::Var(v) if v == x => CausalTerm::Var(r.to_string()),
            CausalTerm::App(f, args) => CausalTerm::App(
                f.clone(),
                args.iter()
                    .map(|a| match a {
                        Atom::Var(v) if v == x => Atom::Var(r.to_string()),
                        other => other.clone(),
                    })
                    .collect(),
            ),
            other => other.clone(),
        }
    }

    /// Replaces every occurrence of variable `x` by constant `c`.
    pub fn subst_const(&self, x: &str, c: &Const) -> CausalTerm {
        match self {
            CausalTerm::Var(v) if v == x => CausalTerm::Const(c.clone()),
            CausalTerm::App(f, args) => CausalTerm::App(
                f.clone(),
                args.iter()
                    .map(|a| match a {
                        Atom::Var(v) if v == x => Atom::Const(c.clone()),
                        other => other.clone(),
                    })
                    .collect(),
            ),
            other => other.clone(),
        }
    }
}

impl fmt::Display for CausalTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CausalTerm::Name(n) => write!(f, "{n}"),
            CausalTerm::Const(c) => write!(f, "{c}"),
            CausalTerm::Var(v) => write!(f, "{v}"),
            CausalTerm::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Conditional causal variable `target | given, fixed = vals`.
///
/// `given` and `fixed` are disjoint and `target` avoids `given`; `target`
/// may overlap `fixed` (the conditioning-variable extraction produces such
/// values), those coordinates being clamped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CondVar {
    pub target: VarTuple,
    pub given: VarTuple,
    pub fixed: VarTuple,
    /// Same length as `fixed`, aligned with its sorted order.
    pub fixed_vals: Vec<Const>,
}

/// Invariant failure when constructing a [`CondVar`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CondVarError {
    EmptyTarget,
    TargetMeetsGiven(Var),
    GivenMeetsFixed(Var),
    FixedValsLength { fixed: usize, vals: usize },
}

impl fmt::Display for CondVarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CondVarError::EmptyTarget => write!(f, "conditional variable has empty target"),
            CondVarError::TargetMeetsGiven(v) => {
                write!(f, "target and given parts overlap on `{v}`")
            }
            CondVarError::GivenMeetsFixed(v) => {
                write!(f, "given and fixed parts overlap on `{v}`")
            }
            CondVarError::FixedValsLength { fixed, vals } => {
                write!(f, "fixed part has {fixed} variables but {vals} values")
            }
        }
    }
}

impl CondVar {
    pub fn new(
        target: VarTuple,
        given: VarTuple,
        fixed: VarTuple,
        fixed_vals: Vec<Const>,
    ) -> Result<Self, CondVarError> {
        if target.is_empty() {
            return Err(CondVarError::EmptyTarget);
        }
        if let Some(v) = target.iter().find(|v| given.contains(v)) {
            return Err(CondVarError::TargetMeetsGiven(v.clone()));
        }
        if let Some(v) = given.iter().find(|v| fixed.contains(v)) {
            return Err(CondVarError::GivenMeetsFixed(v.clone()));
        }
        if fixed.len() != fixed_vals.len() {
            return Err(CondVarError::FixedValsLength {
                fixed: fixed.len(),
                vals: fixed_vals.len(),
            });
        }
        Ok(CondVar {
            target,
            given,
            fixed,
            fixed_vals,
        })
    }

    /// Plain marginal `y | ∅`.
    pub fn marginal(target: VarTuple) -> Self {
        CondVar {
            target,
            given: VarTuple::empty(),
            fixed: VarTuple::empty(),
            fixed_vals: Vec::new(),
        }
    }

    /// All variables mentioned (target ∪ given ∪ fixed).
    pub fn all_vars(&self) -> VarTuple {
        self.target.union(&self.given).union(&self.fixed)
    }

    /// Output coordinates of the kernel: given ∪ target, sorted.
    pub fn out_vars(&self) -> VarTuple {
        self.target.union(&self.given)
    }

    /// Target coordinates not clamped by the fixed part.
    pub fn free_target(&self) -> VarTuple {
        self.target.minus(&self.fixed)
    }

    /// Fixed value for variable `v`, when `v` is in the fixed part.
    pub fn fixed_val(&self, v: &str) -> Option<&Const> {
        self.fixed.index_of(v).map(|i| &self.fixed_vals[i])
    }

    /// Kernel shape `(input arity, output arity)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.given.len(), self.out_vars().len())
    }
}

impl fmt::Display for CondVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cond({};{};", self.target, self.given)?;
        for (i, (v, c)) in self.fixed.iter().zip(&self.fixed_vals).enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}={c}")?;
        }
        write!(f, ")")
    }
}

/// Reference to a data generator: a base identifier plus a chain of
/// intervention transforms. Canonical symbols and proof judgments are
/// relative to these.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenRef {
    pub base: String,
    pub transforms: Vec<(Mode, Assignments)>,
}

impl GenRef {
    pub fn base(id: impl Into<String>) -> Self {
        GenRef {
            base: id.into(),
            transforms: Vec::new(),
        }
    }

    /// The reference after a further intervention.
    pub fn intervened(&self, mode: Mode, assigns: Assignments) -> Self {
        let mut t = self.transforms.clone();
        t.push((mode, assigns));
        GenRef {
            base: self.base.clone(),
            transforms: t,
        }
    }
}

impl fmt::Display for GenRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        for (mode, assigns) in &self.transforms {
            write!(f, "{}{}", assigns, mode.suffix())?;
        }
        Ok(())
    }
}

/// Intervention flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Eager,
    Lazy,
}

impl Mode {
    pub fn suffix(self) -> &'static str {
        match self {
            Mode::Eager => "E",
            Mode::Lazy => "L",
        }
    }
}

/// Simultaneous intervention assignments `x1:=c1, ..., xk:=ck`.
///
/// Variables are distinct and kept sorted, mirroring tuple order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignments(Vec<(Var, Const)>);

/// Error when an intervention assigns a variable twice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicateAssignError(pub Var);

impl fmt::Display for DuplicateAssignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "variable `{}` assigned more than once", self.0)
    }
}

impl Assignments {
    pub fn new(pairs: Vec<(Var, Const)>) -> Result<Self, DuplicateAssignError> {
        let mut p = pairs;
        p.sort();
        for w in p.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(DuplicateAssignError(w[0].0.clone()));
            }
        }
        Ok(Assignments(p))
    }

    pub fn single(v: impl Into<Var>, c: impl Into<Const>) -> Self {
        Assignments(vec![(v.into(), c.into())])
    }

    pub fn iter(&self) -> core::slice::Iter<'_, (Var, Const)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The assigned variables as a tuple.
    pub fn vars(&self) -> VarTuple {
        VarTuple(self.0.iter().map(|(v, _)| v.clone()).collect())
    }

    pub fn value_of(&self, v: &str) -> Option<&Const> {
        self.0
            .binary_search_by(|(x, _)| x.as_str().cmp(v))
            .ok()
            .map(|i| &self.0[i].1)
    }

    /// Union of two assignment lists over disjoint variables.
    pub fn union(&self, other: &Assignments) -> Result<Assignments, DuplicateAssignError> {
        let mut p = self.0.clone();
        p.extend(other.0.iter().cloned());
        Assignments::new(p)
    }

    /// Drops assignments to variables in `vars`.
    pub fn without(&self, vars: &VarTuple) -> Assignments {
        Assignments(
            self.0
                .iter()
                .filter(|(v, _)| !vars.contains(v))
                .cloned()
                .collect(),
        )
    }
}

impl fmt::Display for Assignments {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (v, c)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}:={c}")?;
        }
        write!(f, "]")
    }
}

/// Reference to a kernel: a plain function symbol, a conditional variable,
/// or a canonical conditional-distribution symbol `#f(gen; cond(...))`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KernelRef {
    Fsym(Fsym),
    Cond(CondVar),
    CanonCond(GenRef, CondVar),
}

impl fmt::Display for KernelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelRef::Fsym(s) => write!(f, "{s}"),
            KernelRef::Cond(cv) => write!(f, "{cv}"),
            KernelRef::CanonCond(g, cv) => write!(f, "#f({g};{cv})"),
        }
    }
}

/// General term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// Joint distribution of a tuple of variables.
    Vars(VarTuple),
    Name(Name),
    /// Canonical name `#n(gen; <x>)`, denoting the tuple's distribution in
    /// worlds over `gen`.
    CanonName(GenRef, VarTuple),
    Const(Const),
    /// Kernel application.
    App(KernelRef, Vec<Term>),
    /// Marginalization of a joint onto `keep`.
    Margin(alloc::boxed::Box<Term>, VarTuple),
    /// Tuple of general terms (shared names and variables correlate through
    /// the world joint; application noise is fresh per occurrence).
    Tuple(Vec<Term>),
}

impl Term {
    /// Variables occurring in the term.
    pub fn free_vars(&self) -> VarTuple {
        let mut acc = BTreeSet::new();
        self.collect_vars(&mut acc);
        VarTuple(acc.into_iter().collect())
    }

    fn collect_vars(&self, acc: &mut BTreeSet<Var>) {
        match self {
            Term::Vars(vt) => acc.extend(vt.iter().cloned()),
            Term::Name(_) | Term::CanonName(_, _) | Term::Const(_) => {}
            Term::App(k, args) => {
                if let KernelRef::Cond(cv) = k {
                    acc.extend(cv.all_vars().iter().cloned());
                }
                for a in args {
                    a.collect_vars(acc);
                }
            }
            Term::Margin(body, _) => body.collect_vars(acc),
            Term::Tuple(ts) => {
                for t in ts {
                    t.collect_vars(acc);
                }
            }
        }
    }

    /// Conditional variables occurring in the term (kernel positions).
    pub fn cond_vars(&self) -> BTreeSet<CondVar> {
        let mut acc = BTreeSet::new();
        self.collect_cond_vars(&mut acc);
        acc
    }

    fn collect_cond_vars(&self, acc: &mut BTreeSet<CondVar>) {
        match self {
            Term::App(k, args) => {
                // canonical symbols are rigid; only bare conditional
                // variables count as conditioning occurrences
                if let KernelRef::Cond(cv) = k {
                    acc.insert(cv.clone());
                }
                for a in args {
                    a.collect_cond_vars(acc);
                }
            }
            Term::Margin(body, _) => body.collect_cond_vars(acc),
            Term::Tuple(ts) => {
                for t in ts {
                    t.collect_cond_vars(acc);
                }
            }
            _ => {}
        }
    }

    /// Replaces every occurrence of the variable `x` (as a term position)
    /// by `r`. Variable occurrences inside `VarTuple`s other than the
    /// singleton `<x>` are not term positions and stay untouched.
    pub fn substitute(&self, x: &str, r: &Term) -> Term {
        match self {
            Term::Vars(vt) if vt.len() == 1 && vt.contains(x) => r.clone(),
            Term::App(k, args) => Term::App(
                k.clone(),
                args.iter().map(|a| a.substitute(x, r)).collect(),
            ),
            Term::Margin(body, keep) => {
                Term::Margin(alloc::boxed::Box::new(body.substitute(x, r)), keep.clone())
            }
            Term::Tuple(ts) => Term::Tuple(ts.iter().map(|t| t.substitute(x, r)).collect()),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Vars(vt) => write!(f, "{vt}"),
            Term::Name(n) => write!(f, "{n}"),
            Term::CanonName(g, vt) => write!(f, "#n({g};{vt})"),
            Term::Const(c) => write!(f, "{c}"),
            Term::App(k, args) => {
                write!(f, "{k}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Term::Margin(body, keep) => write!(f, "margin({body};{keep})"),
            Term::Tuple(ts) => {
                write!(f, "<")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ">")
            }
        }
    }
}

/// Causal predicate over diagram structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CausalPred {
    Pa,
    Npa,
    Anc,
    Nanc,
    AllNanc,
    Dsep,
}

impl CausalPred {
    pub fn name(self) -> &'static str {
        match self {
            CausalPred::Pa => "pa",
            CausalPred::Npa => "npa",
            CausalPred::Anc => "anc",
            CausalPred::Nanc => "nanc",
            CausalPred::AllNanc => "allnanc",
            CausalPred::Dsep => "dsep",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            CausalPred::AllNanc | CausalPred::Dsep => 3,
            _ => 2,
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "pa" => CausalPred::Pa,
            "npa" => CausalPred::Npa,
            "anc" => CausalPred::Anc,
            "nanc" => CausalPred::Nanc,
            "allnanc" => CausalPred::AllNanc,
            "dsep" => CausalPred::Dsep,
            _ => return None,
        })
    }
}

/// Argument of the positivity predicate: a plain tuple or a conditional
/// variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PosArg {
    Tuple(VarTuple),
    Cond(CondVar),
}

impl fmt::Display for PosArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PosArg::Tuple(vt) => write!(f, "{vt}"),
            PosArg::Cond(cv) => write!(f, "{cv}"),
        }
    }
}

/// Causality formula. `->`, `<->`, `|` are desugared into `Not`/`And` at
/// construction, so the AST carries only the primitive connectives.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Top,
    /// Positivity of a distribution (the only classical predicate).
    Pos(PosArg),
    CausalPred(CausalPred, Vec<VarTuple>),
    EqTerm(Term, Term),
    EqKernel(KernelRef, KernelRef),
    Not(alloc::boxed::Box<Formula>),
    And(alloc::boxed::Box<Formula>, alloc::boxed::Box<Formula>),
    Eager(Assignments, alloc::boxed::Box<Formula>),
    Lazy(Assignments, alloc::boxed::Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(alloc::boxed::Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(alloc::boxed::Box::new(a), alloc::boxed::Box::new(b))
    }

    /// Right-nested conjunction of one or more formulas.
    pub fn and_all(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::Top,
            1 => fs.pop().unwrap(),
            _ => {
                let mut out = fs.pop().unwrap();
                while let Some(f) = fs.pop() {
                    out = Formula::and(f, out);
                }
                out
            }
        }
    }

    /// `a -> b`, desugared as `!(a & !b)`.
    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    /// `a | b`, desugared as `!(!a & !b)`.
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    /// `a <-> b`, desugared as `(a -> b) & (b -> a)`.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a))
    }

    /// Eager modality; an empty assignment list is the identity.
    pub fn eager(assigns: Assignments, f: Formula) -> Formula {
        if assigns.is_empty() {
            f
        } else {
            Formula::Eager(assigns, alloc::boxed::Box::new(f))
        }
    }

    /// Lazy modality; an empty assignment list is the identity.
    pub fn lazy(assigns: Assignments, f: Formula) -> Formula {
        if assigns.is_empty() {
            f
        } else {
            Formula::Lazy(assigns, alloc::boxed::Box::new(f))
        }
    }

    /// Variables occurring in the formula.
    pub fn free_vars(&self) -> VarTuple {
        let mut acc = BTreeSet::new();
        self.collect_vars(&mut acc);
        VarTuple(acc.into_iter().collect())
    }

    fn collect_vars(&self, acc: &mut BTreeSet<Var>) {
        match self {
            Formula::Top => {}
            Formula::Pos(PosArg::Tuple(vt)) => acc.extend(vt.iter().cloned()),
            Formula::Pos(PosArg::Cond(cv)) => acc.extend(cv.all_vars().iter().cloned()),
            Formula::CausalPred(_, args) => {
                for vt in args {
                    acc.extend(vt.iter().cloned());
                }
            }
            Formula::EqTerm(a, b) => {
                a.collect_vars(acc);
                b.collect_vars(acc);
            }
            Formula::EqKernel(a, b) => {
                for k in [a, b] {
                    if let KernelRef::Cond(cv) = k {
                        acc.extend(cv.all_vars().iter().cloned());
                    }
                }
            }
            Formula::Not(f) => f.collect_vars(acc),
            Formula::And(a, b) => {
                a.collect_vars(acc);
                b.collect_vars(acc);
            }
            Formula::Eager(assigns, f) | Formula::Lazy(assigns, f) => {
                acc.extend(assigns.vars().iter().cloned());
                f.collect_vars(acc);
            }
        }
    }

    /// The set of conditioning variables `cdv(φ)`: for each conditional
    /// variable `y|_{z,x=c}` occurring in the formula, the tuple `z::x`,
    /// and additionally `(z::x)|_{x=c}` when the fixed part is nonempty.
    /// Empty tuples are dropped.
    pub fn cond_vars(&self) -> BTreeSet<PosArg> {
        let mut cvs = BTreeSet::new();
        self.collect_cond_vars(&mut cvs);
        let mut out = BTreeSet::new();
        for cv in cvs {
            let zx = cv.given.union(&cv.fixed);
            if !zx.is_empty() {
                out.insert(PosArg::Tuple(zx.clone()));
            }
            if !cv.fixed.is_empty() {
                out.insert(PosArg::Cond(CondVar {
                    target: zx,
                    given: VarTuple::empty(),
                    fixed: cv.fixed.clone(),
                    fixed_vals: cv.fixed_vals.clone(),
                }));
            }
        }
        out
    }

    fn collect_cond_vars(&self, acc: &mut BTreeSet<CondVar>) {
        match self {
            Formula::EqTerm(a, b) => {
                a.collect_cond_vars(acc);
                b.collect_cond_vars(acc);
            }
            Formula::EqKernel(a, b) => {
                for k in [a, b] {
                    if let KernelRef::Cond(cv) = k {
                        acc.insert(cv.clone());
                    }
                }
            }
            Formula::Pos(PosArg::Cond(cv)) => {
                acc.insert(cv.clone());
            }
            Formula::Not(f) => f.collect_cond_vars(acc),
            Formula::And(a, b) => {
                a.collect_cond_vars(acc);
                b.collect_cond_vars(acc);
            }
            Formula::Eager(_, f) | Formula::Lazy(_, f) => f.collect_cond_vars(acc),
            _ => {}
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => write!(f, "top"),
            Formula::Pos(a) => write!(f, "pos({a})"),
            Formula::CausalPred(p, args) => {
                write!(f, "{}(", p.name())?;
                for (i, vt) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{vt}")?;
                }
                write!(f, ")")
            }
            Formula::EqTerm(a, b) => write!(f, "{a} == {b}"),
            Formula::EqKernel(a, b) => write!(f, "{a} == {b}"),
            Formula::Not(g) => match g.as_ref() {
                Formula::And(_, _) | Formula::EqTerm(_, _) | Formula::EqKernel(_, _) => {
                    write!(f, "!({g})")
                }
                _ => write!(f, "!{g}"),
            },
            Formula::And(a, b) => {
                let wrap = |h: &Formula, f: &mut fmt::Formatter<'_>| -> fmt::Result {
                    match h {
                        Formula::And(_, _) => write!(f, "({h})"),
                        _ => write!(f, "{h}"),
                    }
                };
                wrap(a, f)?;
                write!(f, " & ")?;
                wrap(b, f)
            }
            Formula::Eager(assigns, g) => {
                write!(f, "{}E ", assigns)?;
                match g.as_ref() {
                    Formula::And(_, _) | Formula::EqTerm(_, _) | Formula::EqKernel(_, _) => {
                        write!(f, "({g})")
                    }
                    _ => write!(f, "{g}"),
                }
            }
            Formula::Lazy(assigns, g) => {
                write!(f, "{}L ", assigns)?;
                match g.as_ref() {
                    Formula::And(_, _) | Formula::EqTerm(_, _) | Formula::EqKernel(_, _) => {
                        write!(f, "({g})")
                    }
                    _ => write!(f, "{g}"),
                }
            }
        }
    }
}
