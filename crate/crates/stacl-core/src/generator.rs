//! Data generators and the causal diagrams they induce.
//!
//! A generator maps each causal variable to a depth-≤1 term (its direct
//! mechanism) or to ⊥ (undefined). Valid generators are finite, closed and
//! acyclic; interventions are generator transforms that preserve validity.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::syntax::{Assignments, CausalTerm, Mode, Var, VarTuple};

/// Finite map from causal variables to mechanisms. `None` is ⊥.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataGenerator {
    pub id: String,
    pub assignments: BTreeMap<Var, Option<CausalTerm>>,
}

/// Structured validation failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A mechanism mentions a variable outside dom(g).
    NotClosed { var: Var, missing: Var },
    /// The direct-cause relation has a cycle through these variables.
    Cycle(Vec<Var>),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotClosed { var, missing } => {
                write!(f, "mechanism of `{var}` mentions undefined variable `{missing}`")
            }
            Violation::Cycle(vs) => {
                write!(f, "cyclic dependency through {{")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Error from an intervention transform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InterveneError {
    UnknownVar(Var),
}

impl fmt::Display for InterveneError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterveneError::UnknownVar(v) => write!(f, "intervened variable `{v}` is not defined"),
        }
    }
}

/// Error from generator expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeCollision(pub Var);

impl fmt::Display for PrimeCollision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expansion would introduce `{}`, which already exists", self.0)
    }
}

impl DataGenerator {
    pub fn new(id: impl Into<String>) -> Self {
        DataGenerator {
            id: id.into(),
            assignments: BTreeMap::new(),
        }
    }

    /// The defined variables (those not mapped to ⊥), sorted.
    pub fn dom(&self) -> VarTuple {
        VarTuple::from_set(
            self.assignments
                .iter()
                .filter(|(_, t)| t.is_some())
                .map(|(v, _)| v.clone()),
        )
    }

    /// All variables mentioned as keys, including ⊥ entries.
    pub fn keys(&self) -> VarTuple {
        VarTuple::from_set(self.assignments.keys().cloned())
    }

    pub fn mechanism(&self, v: &str) -> Option<&CausalTerm> {
        self.assignments.get(v).and_then(|t| t.as_ref())
    }

    /// Checks finiteness (structural), closedness, and acyclicity.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        let dom = self.dom();
        for (v, t) in &self.assignments {
            if let Some(t) = t {
                for fv in t.free_vars().iter() {
                    if !dom.contains(fv) {
                        violations.push(Violation::NotClosed {
                            var: v.clone(),
                            missing: fv.clone(),
                        });
                    }
                }
            }
        }
        if let Err(cycle) = self.topo_order_internal() {
            violations.push(Violation::Cycle(cycle));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Topological order of dom(g): every variable comes after the free
    /// variables of its mechanism. Ties broken by name.
    pub fn topo_order(&self) -> Result<Vec<Var>, Vec<Violation>> {
        self.topo_order_internal()
            .map_err(|c| alloc::vec![Violation::Cycle(c)])
    }

    fn topo_order_internal(&self) -> Result<Vec<Var>, Vec<Var>> {
        let dom = self.dom();
        let mut indeg: BTreeMap<&str, usize> = dom.iter().map(|v| (v.as_str(), 0)).collect();
        let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let mechanism_vars: Vec<(&str, VarTuple)> = dom
            .iter()
            .filter_map(|v| self.mechanism(v).map(|t| (v.as_str(), t.free_vars())))
            .collect();
        for (v, fvs) in &mechanism_vars {
            for p in fvs.iter() {
                if dom.contains(p) {
                    children.entry(p.as_str()).or_default().push(v);
                    *indeg.get_mut(v).unwrap() += 1;
                }
            }
        }
        let mut ready: BTreeSet<&str> = indeg
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(v, _)| *v)
            .collect();
        let mut order = Vec::new();
        while let Some(&v) = ready.iter().next() {
            ready.remove(v);
            order.push(v.to_string());
            if let Some(cs) = children.get(v) {
                for &c in cs {
                    let d = indeg.get_mut(c).unwrap();
                    *d -= 1;
                    if *d == 0 {
                        ready.insert(c);
                    }
                }
            }
        }
        if order.len() == dom.len() {
            Ok(order)
        } else {
            let leftover: Vec<Var> = dom
                .iter()
                .filter(|v| !order.iter().any(|o| o == *v))
                .cloned()
                .collect();
            Err(leftover)
        }
    }

    /// Eager intervention: the assigned variables' mechanisms become the
    /// constants; everything else is untouched. Simultaneous.
    pub fn intervene_eager(&self, assigns: &Assignments) -> Result<DataGenerator, InterveneError> {
        self.check_assigned_vars(assigns)?;
        let mut g = self.clone();
        g.id = format!("{}{}E", self.id, assigns);
        for (v, c) in assigns.iter() {
            g.assignments.insert(v.clone(), Some(CausalTerm::Const(c.clone())));
        }
        Ok(g)
    }

    /// Lazy intervention: every mechanism has the assigned variables other
    /// than its own substituted by their constants; each assigned variable
    /// keeps its own (substituted) mechanism. This cross-substitution is
    /// exactly what eager intervention on the primed copies of an expanded
    /// generator produces, which is the defining reduction for the lazy
    /// modality. Simultaneous.
    pub fn intervene_lazy(&self, assigns: &Assignments) -> Result<DataGenerator, InterveneError> {
        self.check_assigned_vars(assigns)?;
        let mut g = self.clone();
        g.id = format!("{}{}L", self.id, assigns);
        for (v, t) in g.assignments.iter_mut() {
            if let Some(t) = t {
                for (x, c) in assigns.iter() {
                    if x != v {
                        *t = t.subst_const(x, c);
                    }
                }
            }
        }
        Ok(g)
    }

    pub fn intervene(
        &self,
        mode: Mode,
        assigns: &Assignments,
    ) -> Result<DataGenerator, InterveneError> {
        match mode {
            Mode::Eager => self.intervene_eager(assigns),
            Mode::Lazy => self.intervene_lazy(assigns),
        }
    }

    fn check_assigned_vars(&self, assigns: &Assignments) -> Result<(), InterveneError> {
        let dom = self.dom();
        for (v, _) in assigns.iter() {
            if !dom.contains(v) {
                return Err(InterveneError::UnknownVar(v.clone()));
            }
        }
        Ok(())
    }

    /// Expansion (one fresh primed copy per defined variable): adds
    /// `x' := x` and redirects every occurrence of `x` in the old
    /// mechanisms to `x'`. A lazy intervention on `x` then coincides with
    /// an eager intervention on `x'`.
    pub fn expand(&self) -> Result<DataGenerator, PrimeCollision> {
        let dom = self.dom();
        let keys = self.keys();
        for v in dom.iter() {
            let primed = format!("{v}'");
            if keys.contains(&primed) {
                return Err(PrimeCollision(primed));
            }
        }
        let mut g = DataGenerator::new(format!("{}'", self.id));
        for (v, t) in &self.assignments {
            let new_t = t.as_ref().map(|t| {
                let mut t = t.clone();
                for x in dom.iter() {
                    t = t.rename_var(x, &format!("{x}'"));
                }
                t
            });
            g.assignments.insert(v.clone(), new_t);
            if dom.contains(v) {
                g.assignments
                    .insert(format!("{v}'"), Some(CausalTerm::Var(v.clone())));
            }
        }
        Ok(g)
    }

    /// Builds the induced causal diagram: exogenous nodes are the names and
    /// constants occurring in the mechanisms, endogenous nodes are dom(g),
    /// and edges follow the mechanisms' atoms. Which exogenous nodes are
    /// names (random) versus constants (deterministic) is recorded; the
    /// distinction matters for d-separation.
    pub fn to_diagram(&self) -> CausalDiagram {
        let dom = self.dom();
        let mut exo_names = BTreeSet::new();
        let mut exo_consts = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for v in dom.iter() {
            let t = self.mechanism(v).unwrap();
            for p in t.free_vars().iter() {
                edges.insert((Node::Endo(p.clone()), v.clone()));
            }
            let mut record = |atom: &crate::syntax::Atom| match atom {
                crate::syntax::Atom::Name(n) => {
                    exo_names.insert(n.clone());
                    edges.insert((Node::Exo(n.clone()), v.clone()));
                }
                crate::syntax::Atom::Const(c) => {
                    exo_consts.insert(c.clone());
                    edges.insert((Node::Exo(c.clone()), v.clone()));
                }
                crate::syntax::Atom::Var(_) => {}
            };
            match t {
                CausalTerm::Name(n) => {
                    record(&crate::syntax::Atom::Name(n.clone()));
                }
                CausalTerm::Const(c) => {
                    record(&crate::syntax::Atom::Const(c.clone()));
                }
                CausalTerm::Var(_) => {}
                CausalTerm::App(_, args) => {
                    for a in args {
                        record(a);
                    }
                }
            }
        }
        CausalDiagram {
            exo_names,
            exo_consts,
            endogenous: dom,
            edges,
        }
    }
}

/// Node of a causal diagram.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    /// Name or constant.
    Exo(String),
    /// Causal variable.
    Endo(Var),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Exo(s) | Node::Endo(s) => write!(f, "{s}"),
        }
    }
}

/// Directed acyclic graph over exogenous (names/constants) and endogenous
/// (causal variable) nodes. Edge targets are always endogenous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalDiagram {
    pub exo_names: BTreeSet<String>,
    pub exo_consts: BTreeSet<String>,
    pub endogenous: VarTuple,
    pub edges: BTreeSet<(Node, Var)>,
}

impl CausalDiagram {
    pub fn has_edge(&self, from: &Node, to: &str) -> bool {
        self.edges.contains(&(from.clone(), to.to_string()))
    }

    pub fn is_const_node(&self, n: &Node) -> bool {
        matches!(n, Node::Exo(s) if self.exo_consts.contains(s))
    }

    /// All nodes, exogenous first.
    pub fn nodes(&self) -> Vec<Node> {
        let mut out: Vec<Node> = self.exo_names.iter().cloned().map(Node::Exo).collect();
        out.extend(self.exo_consts.iter().cloned().map(Node::Exo));
        out.extend(self.endogenous.iter().cloned().map(Node::Endo));
        out
    }

    /// Direct predecessors of an endogenous variable (both kinds).
    pub fn parents_of(&self, v: &str) -> Vec<Node> {
        self.edges
            .iter()
            .filter(|(_, to)| to == v)
            .map(|(from, _)| from.clone())
            .collect()
    }

    /// Direct successors of a node (always endogenous).
    pub fn children_of(&self, n: &Node) -> Vec<Var> {
        self.edges
            .iter()
            .filter(|(from, _)| from == n)
            .map(|(_, to)| to.clone())
            .collect()
    }
}

/// Applies a `GenRef`'s transform chain to a base generator.
pub fn apply_transforms(
    base: &DataGenerator,
    transforms: &[(Mode, Assignments)],
) -> Result<DataGenerator, InterveneError> {
    let mut g = base.clone();
    for (mode, assigns) in transforms {
        g = g.intervene(*mode, assigns)?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Atom as A;
    use crate::syntax::Atom;

    fn app(f: &str, args: &[Atom]) -> CausalTerm {
        CausalTerm::App(f.to_string(), args.to_vec())
    }

    fn gen(pairs: &[(&str, Option<CausalTerm>)]) -> DataGenerator {
        let mut g = DataGenerator::new("g");
        for (v, t) in pairs {
            g.assignments.insert(v.to_string(), t.clone());
        }
        g
    }

    #[test]
    fn acyclic_generator_validates() {
        // g1 = {x: f(z), z: f(c)}
        let g = gen(&[
            ("x", Some(app("f", &[A::Var("z".into())]))),
            ("z", Some(app("f", &[A::Const("c".into())]))),
        ]);
        assert!(g.validate().is_ok());
    }

    #[test]
    fn cyclic_generator_is_reported() {
        // g2 = {x: f(z), z: f(x)}
        let g = gen(&[
            ("x", Some(app("f", &[A::Var("z".into())]))),
            ("z", Some(app("f", &[A::Var("x".into())]))),
        ]);
        let vs = g.validate().unwrap_err();
        assert!(matches!(&vs[0], Violation::Cycle(c) if c.len() == 2));
    }

    #[test]
    fn open_generator_is_reported() {
        // g3 = {x: f(y)} with y undefined
        let g = gen(&[("x", Some(app("f", &[A::Var("y".into())])))]);
        let vs = g.validate().unwrap_err();
        assert!(matches!(
            &vs[0],
            Violation::NotClosed { var, missing } if var == "x" && missing == "y"
        ));
    }

    #[test]
    fn diagram_of_running_example() {
        // {x: f1(n), y: f2(x,c), z: f3(x,y), w: ⊥}
        let g = gen(&[
            ("x", Some(app("f1", &[A::Name("n".into())]))),
            ("y", Some(app("f2", &[A::Var("x".into()), A::Const("c".into())]))),
            ("z", Some(app("f3", &[A::Var("x".into()), A::Var("y".into())]))),
            ("w", None),
        ]);
        let d = g.to_diagram();
        assert_eq!(d.endogenous, VarTuple::new(["x", "y", "z"]).unwrap());
        let want: BTreeSet<(Node, Var)> = [
            (Node::Exo("n".into()), "x".into()),
            (Node::Endo("x".into()), "y".into()),
            (Node::Exo("c".into()), "y".into()),
            (Node::Endo("x".into()), "z".into()),
            (Node::Endo("y".into()), "z".into()),
        ]
        .into_iter()
        .collect();
        assert_eq!(d.edges, want);
    }

    #[test]
    fn single_edge_diagram() {
        let g = gen(&[("x", Some(CausalTerm::Name("n".into())))]);
        let d = g.to_diagram();
        assert_eq!(d.exo_names.len(), 1);
        assert!(d.exo_consts.is_empty());
        assert_eq!(d.endogenous, VarTuple::single("x"));
        assert!(d.has_edge(&Node::Exo("n".into()), "x"));
    }

    #[test]
    fn drug_model_diagram() {
        // {x: fx(z,nx), y: fy(x,z,ny), z: nz}
        let g = gen(&[
            ("x", Some(app("fx", &[A::Var("z".into()), A::Name("nx".into())]))),
            (
                "y",
                Some(app(
                    "fy",
                    &[A::Var("x".into()), A::Var("z".into()), A::Name("ny".into())],
                )),
            ),
            ("z", Some(CausalTerm::Name("nz".into()))),
        ]);
        let d = g.to_diagram();
        assert!(d.has_edge(&Node::Endo("z".into()), "x"));
        assert!(d.has_edge(&Node::Endo("z".into()), "y"));
        assert!(d.has_edge(&Node::Endo("x".into()), "y"));
        assert!(!d.has_edge(&Node::Endo("x".into()), "z"));
    }

    #[test]
    fn eager_intervention_replaces_mechanism() {
        let g = gen(&[
            ("x", Some(app("f1", &[A::Var("z".into()), A::Name("n1".into())]))),
            ("y", Some(app("f2", &[A::Name("n2".into()), A::Var("x".into())]))),
            ("z", Some(CausalTerm::Name("nz".into()))),
        ]);
        let assigns = Assignments::single("x", "c");
        let ge = g.intervene_eager(&assigns).unwrap();
        assert_eq!(ge.mechanism("x"), Some(&CausalTerm::Const("c".into())));
        assert_eq!(ge.mechanism("y"), g.mechanism("y"));
        // incoming edges of x become just c -> x
        let d = ge.to_diagram();
        assert!(!d.has_edge(&Node::Endo("z".into()), "x"));
        assert!(d.has_edge(&Node::Exo("c".into()), "x"));
    }

    #[test]
    fn lazy_intervention_substitutes_dependents() {
        let g = gen(&[
            ("x", Some(app("f1", &[A::Var("z".into()), A::Name("n1".into())]))),
            ("y", Some(app("f2", &[A::Name("n2".into()), A::Var("x".into())]))),
            ("z", Some(CausalTerm::Name("nz".into()))),
        ]);
        let assigns = Assignments::single("x", "c");
        let gl = g.intervene_lazy(&assigns).unwrap();
        assert_eq!(gl.mechanism("x"), g.mechanism("x"));
        assert_eq!(
            gl.mechanism("y"),
            Some(&app("f2", &[A::Name("n2".into()), A::Const("c".into())]))
        );
        let d = gl.to_diagram();
        assert!(!d.has_edge(&Node::Endo("x".into()), "y"));
        assert!(d.has_edge(&Node::Endo("z".into()), "x"));
    }

    #[test]
    fn interventions_preserve_validity_and_reject_unknowns() {
        let g = gen(&[
            ("x", Some(app("f", &[A::Var("z".into())]))),
            ("z", Some(CausalTerm::Name("nz".into()))),
        ]);
        let a = Assignments::single("x", "c");
        assert!(g.intervene_eager(&a).unwrap().validate().is_ok());
        assert!(g.intervene_lazy(&a).unwrap().validate().is_ok());
        let bad = Assignments::single("q", "c");
        assert!(g.intervene_eager(&bad).is_err());
        assert!(g.intervene_lazy(&bad).is_err());
    }

    #[test]
    fn eager_intervention_is_idempotent() {
        let g = gen(&[
            ("x", Some(app("f", &[A::Var("z".into())]))),
            ("z", Some(CausalTerm::Name("nz".into()))),
        ]);
        let a = Assignments::single("x", "c");
        let g1 = g.intervene_eager(&a).unwrap();
        let mut g2 = g1.intervene_eager(&a).unwrap();
        g2.id = g1.id.clone();
        assert_eq!(g1, g2);
    }

    #[test]
    fn overwriting_a_constant_mechanism() {
        let g = gen(&[("x", Some(CausalTerm::Const("c0".into())))]);
        let ge = g.intervene_eager(&Assignments::single("x", "c1")).unwrap();
        assert_eq!(ge.mechanism("x"), Some(&CausalTerm::Const("c1".into())));
    }

    #[test]
    fn expansion_introduces_primed_identities() {
        // {y: f(x), x: n} -> {x: n, x': x, y: f(x'), y': y}
        let g = gen(&[
            ("y", Some(app("f", &[A::Var("x".into())]))),
            ("x", Some(CausalTerm::Name("n".into()))),
        ]);
        let ge = g.expand().unwrap();
        assert_eq!(ge.mechanism("x"), Some(&CausalTerm::Name("n".into())));
        assert_eq!(ge.mechanism("x'"), Some(&CausalTerm::Var("x".into())));
        assert_eq!(ge.mechanism("y"), Some(&app("f", &[A::Var("x'".into())])));
        assert_eq!(ge.mechanism("y'"), Some(&CausalTerm::Var("y".into())));
        assert!(ge.validate().is_ok());
        // diagram has x -> x' and x' -> y
        let d = ge.to_diagram();
        assert!(d.has_edge(&Node::Endo("x".into()), "x'"));
        assert!(d.has_edge(&Node::Endo("x'".into()), "y"));
        assert!(!d.has_edge(&Node::Endo("x".into()), "y"));
    }

    #[test]
    fn expansion_detects_collisions() {
        let g = gen(&[
            ("x", Some(CausalTerm::Name("n".into()))),
            ("x'", Some(CausalTerm::Var("x".into()))),
        ]);
        assert!(g.expand().is_err());
    }

    #[test]
    fn topo_order_respects_mechanisms() {
        let g = gen(&[
            ("x", Some(app("f1", &[A::Name("n".into())]))),
            ("y", Some(app("f2", &[A::Var("x".into()), A::Const("c".into())]))),
            ("z", Some(app("f3", &[A::Var("x".into()), A::Var("y".into())]))),
        ]);
        assert_eq!(g.topo_order().unwrap(), alloc::vec!["x", "y", "z"]);
        let single = gen(&[("x", Some(CausalTerm::Name("n".into())))]);
        assert_eq!(single.topo_order().unwrap(), alloc::vec!["x"]);
    }

    #[test]
    fn simultaneity_of_eager_interventions() {
        let g = gen(&[
            ("x", Some(app("f", &[A::Var("z".into())]))),
            ("y", Some(app("f", &[A::Var("x".into())]))),
            ("z", Some(CausalTerm::Name("nz".into()))),
        ]);
        let a = Assignments::single("x", "c0");
        let b = Assignments::single("y", "c1");
        let joint = a.union(&b).unwrap();
        let mut g1 = g.intervene_eager(&joint).unwrap();
        let mut g2 = g.intervene_eager(&a).unwrap().intervene_eager(&b).unwrap();
        g1.id = "same".into();
        g2.id = "same".into();
        assert_eq!(g1, g2);
    }
}
