//! Graphical oracle: parents, ancestors, the causal predicates, and
//! d-separation over a causal diagram. Everything here is world-independent.
//!
//! Two d-separation deciders are shipped: a reachable-via-active-trails
//! traversal (the fast path) and a naive enumerator of all simple undirected
//! paths (the reference oracle for small graphs). They are tested for
//! agreement.
//!
//! Exogenous nodes participate as path vertices but are never conditioned
//! on. Constant nodes are deterministic, so they never transmit dependence:
//! a path may start or end nowhere (arguments are endogenous) and may not
//! travel *through* a constant. Without this, the `c → x` edge introduced
//! by an eager intervention would manufacture spurious forks.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::generator::{CausalDiagram, Node};
use crate::syntax::{CausalPred, Var, VarTuple};

/// Query errors from the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    UnknownVar(Var),
    EmptyArgument(&'static str),
    NotDisjoint(Var),
    Arity { pred: &'static str, want: usize, got: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::UnknownVar(v) => write!(f, "unknown variable `{v}`"),
            GraphError::EmptyArgument(which) => write!(f, "{which} tuple must be non-empty"),
            GraphError::NotDisjoint(v) => write!(f, "argument tuples overlap on `{v}`"),
            GraphError::Arity { pred, want, got } => {
                write!(f, "`{pred}` takes {want} tuples, found {got}")
            }
        }
    }
}

fn check_known(d: &CausalDiagram, vt: &VarTuple) -> Result<(), GraphError> {
    for v in vt.iter() {
        if !d.endogenous.contains(v) {
            return Err(GraphError::UnknownVar(v.clone()));
        }
    }
    Ok(())
}

/// Endogenous parents of the variables in `ys`.
pub fn parents(d: &CausalDiagram, ys: &VarTuple) -> Result<VarTuple, GraphError> {
    check_known(d, ys)?;
    let mut out = BTreeSet::new();
    for (from, to) in &d.edges {
        if let Node::Endo(p) = from {
            if ys.contains(to) {
                out.insert(p.clone());
            }
        }
    }
    Ok(VarTuple::from_set(out))
}

/// Endogenous ancestors of the variables in `ys` (transitive closure of
/// the parent relation over endogenous nodes).
pub fn ancestors(d: &CausalDiagram, ys: &VarTuple) -> Result<VarTuple, GraphError> {
    check_known(d, ys)?;
    let mut seen: BTreeSet<Var> = BTreeSet::new();
    let mut stack: Vec<Var> = ys.iter().cloned().collect();
    while let Some(v) = stack.pop() {
        for (from, to) in &d.edges {
            if *to == v {
                if let Node::Endo(p) = from {
                    if seen.insert(p.clone()) {
                        stack.push(p.clone());
                    }
                }
            }
        }
    }
    Ok(VarTuple::from_set(seen))
}

/// Evaluates one of the causal predicates over the diagram.
pub fn eval_causal_pred(
    d: &CausalDiagram,
    pred: CausalPred,
    args: &[VarTuple],
) -> Result<bool, GraphError> {
    if args.len() != pred.arity() {
        return Err(GraphError::Arity {
            pred: pred.name(),
            want: pred.arity(),
            got: args.len(),
        });
    }
    for a in args {
        check_known(d, a)?;
    }
    Ok(match pred {
        CausalPred::Pa => {
            let (x, y) = (&args[0], &args[1]);
            *x == parents(d, y)? && x.is_disjoint_from(y)
        }
        CausalPred::Npa => {
            let (x, y) = (&args[0], &args[1]);
            x.is_disjoint_from(&parents(d, y)?) && x.is_disjoint_from(y)
        }
        CausalPred::Anc => {
            let (x, y) = (&args[0], &args[1]);
            *x == ancestors(d, y)? && x.is_disjoint_from(y)
        }
        CausalPred::Nanc => {
            let (x, y) = (&args[0], &args[1]);
            x.is_disjoint_from(&ancestors(d, y)?) && x.is_disjoint_from(y)
        }
        CausalPred::AllNanc => {
            let (x, y, z) = (&args[0], &args[1], &args[2]);
            *x == y.minus(&ancestors(d, z)?)
        }
        CausalPred::Dsep => {
            let q = DsepQuery::new(args[0].clone(), args[1].clone(), args[2].clone())?;
            d_separated(d, &q)?
        }
    })
}

/// A d-separation query: are `x` and `y` d-separated by `z`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DsepQuery {
    pub x: VarTuple,
    pub y: VarTuple,
    pub z: VarTuple,
}

impl DsepQuery {
    pub fn new(x: VarTuple, y: VarTuple, z: VarTuple) -> Result<Self, GraphError> {
        if x.is_empty() {
            return Err(GraphError::EmptyArgument("first"));
        }
        if y.is_empty() {
            return Err(GraphError::EmptyArgument("second"));
        }
        for v in x.iter() {
            if y.contains(v) || z.contains(v) {
                return Err(GraphError::NotDisjoint(v.clone()));
            }
        }
        if let Some(v) = y.iter().find(|v| z.contains(v)) {
            return Err(GraphError::NotDisjoint(v.clone()));
        }
        Ok(DsepQuery { x, y, z })
    }
}

/// Adjacency maps over all nodes (constants excluded as interior vertices
/// by the traversals, not here).
struct Adj {
    parents: BTreeMap<Node, Vec<Node>>,
    children: BTreeMap<Node, Vec<Node>>,
}

fn adjacency(d: &CausalDiagram) -> Adj {
    let mut parents: BTreeMap<Node, Vec<Node>> = BTreeMap::new();
    let mut children: BTreeMap<Node, Vec<Node>> = BTreeMap::new();
    for n in d.nodes() {
        parents.entry(n.clone()).or_default();
        children.entry(n).or_default();
    }
    for (from, to) in &d.edges {
        let to_node = Node::Endo(to.clone());
        parents.get_mut(&to_node).unwrap().push(from.clone());
        children.get_mut(from).unwrap().push(to_node);
    }
    Adj { parents, children }
}

/// `z ∪ ANC(z)` over all nodes (exogenous ancestors included).
fn anc_star(adj: &Adj, z: &VarTuple) -> BTreeSet<Node> {
    let mut seen: BTreeSet<Node> = z.iter().cloned().map(Node::Endo).collect();
    let mut stack: Vec<Node> = seen.iter().cloned().collect();
    while let Some(n) = stack.pop() {
        for p in &adj.parents[&n] {
            if seen.insert(p.clone()) {
                stack.push(p.clone());
            }
        }
    }
    seen
}

/// Fast d-separation: reachability over active trails.
pub fn d_separated(d: &CausalDiagram, q: &DsepQuery) -> Result<bool, GraphError> {
    check_known(d, &q.x)?;
    check_known(d, &q.y)?;
    check_known(d, &q.z)?;
    let adj = adjacency(d);
    let astar = anc_star(&adj, &q.z);
    let in_z = |n: &Node| matches!(n, Node::Endo(v) if q.z.contains(v));
    let is_target = |n: &Node| matches!(n, Node::Endo(v) if q.y.contains(v));

    // Trail states: (node, arrived-from-child?). Arriving "from child"
    // means the last edge pointed away from the node.
    #[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
    enum Dir {
        FromChild,
        FromParent,
    }
    let mut visited: BTreeSet<(Node, Dir)> = BTreeSet::new();
    let mut stack: Vec<(Node, Dir)> = q
        .x
        .iter()
        .map(|v| (Node::Endo(v.clone()), Dir::FromChild))
        .collect();
    while let Some((n, dir)) = stack.pop() {
        if !visited.insert((n.clone(), dir)) {
            continue;
        }
        if is_target(&n) {
            return Ok(false);
        }
        // A constant node transmits nothing; trails stop there.
        if d.is_const_node(&n) {
            continue;
        }
        match dir {
            Dir::FromChild => {
                if !in_z(&n) {
                    for p in &adj.parents[&n] {
                        stack.push((p.clone(), Dir::FromChild));
                    }
                    for c in &adj.children[&n] {
                        stack.push((c.clone(), Dir::FromParent));
                    }
                }
            }
            Dir::FromParent => {
                if !in_z(&n) {
                    for c in &adj.children[&n] {
                        stack.push((c.clone(), Dir::FromParent));
                    }
                }
                if astar.contains(&n) {
                    for p in &adj.parents[&n] {
                        stack.push((p.clone(), Dir::FromChild));
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Reference oracle: enumerate every simple undirected path between the
/// argument tuples and check each against the chain/fork/collider cases.
pub fn d_separated_naive(d: &CausalDiagram, q: &DsepQuery) -> Result<bool, GraphError> {
    check_known(d, &q.x)?;
    check_known(d, &q.y)?;
    check_known(d, &q.z)?;
    let adj = adjacency(d);
    let astar = anc_star(&adj, &q.z);

    // Undirected neighbor list with edge orientation.
    let mut nbrs: BTreeMap<Node, Vec<(Node, bool)>> = BTreeMap::new(); // (other, outgoing?)
    for n in d.nodes() {
        nbrs.entry(n).or_default();
    }
    for (from, to) in &d.edges {
        let to_node = Node::Endo(to.clone());
        nbrs.get_mut(from).unwrap().push((to_node.clone(), true));
        nbrs.get_mut(&to_node).unwrap().push((from.clone(), false));
    }

    // A path is a node sequence; edge directions travel along with it.
    fn path_blocked(
        d: &CausalDiagram,
        astar: &BTreeSet<Node>,
        z: &VarTuple,
        nodes: &[Node],
        outgoing: &[bool],
    ) -> bool {
        for i in 1..nodes.len() - 1 {
            let v = &nodes[i];
            let into_v = outgoing[i - 1]; // edge i-1 points into v
            let out_of_v = outgoing[i]; // edge i points out of v
            let in_z = matches!(v, Node::Endo(w) if z.contains(w));
            let blocked = if into_v && !out_of_v {
                // collider at v
                !astar.contains(v)
            } else if !into_v && out_of_v {
                // fork at v: blocked when conditioned or deterministic
                in_z || d.is_const_node(v)
            } else {
                // chain through v
                in_z || d.is_const_node(v)
            };
            if blocked {
                return true;
            }
        }
        false
    }

    let targets: BTreeSet<Node> = q.y.iter().cloned().map(Node::Endo).collect();
    for sx in q.x.iter() {
        let start = Node::Endo(sx.clone());
        let mut nodes = vec![start.clone()];
        let mut dirs: Vec<bool> = Vec::new();
        let mut on_path: BTreeSet<Node> = [start.clone()].into_iter().collect();
        // Depth-first enumeration of simple paths.
        struct Frame(Vec<(Node, bool)>);
        let mut frames = vec![Frame(nbrs[&start].clone())];
        while let Some(frame) = frames.last_mut() {
            if let Some((next, outgoing)) = frame.0.pop() {
                if on_path.contains(&next) {
                    continue;
                }
                nodes.push(next.clone());
                dirs.push(outgoing);
                if targets.contains(&next) {
                    if !path_blocked(d, &astar, &q.z, &nodes, &dirs) {
                        return Ok(false);
                    }
                    nodes.pop();
                    dirs.pop();
                    continue;
                }
                on_path.insert(next.clone());
                frames.push(Frame(nbrs[&next].clone()));
            } else {
                frames.pop();
                let done = nodes.pop().unwrap();
                dirs.pop();
                on_path.remove(&done);
                if frames.is_empty() {
                    break;
                }
            }
        }
    }
    Ok(true)
}

/// Back-door criterion: `z` contains no descendant of `x`, and every
/// back-door path from `x` to `y` is d-separated by `z` — the latter
/// evaluated as d-separation in the diagram with `x`'s outgoing edges
/// removed (the lazily intervened diagram).
pub fn backdoor_criterion(
    d: &CausalDiagram,
    x: &VarTuple,
    y: &VarTuple,
    z: &VarTuple,
) -> Result<bool, GraphError> {
    check_known(d, x)?;
    check_known(d, y)?;
    check_known(d, z)?;
    let no_descendants = if z.is_empty() {
        true
    } else {
        x.is_disjoint_from(&ancestors(d, z)?) && x.is_disjoint_from(z)
    };
    if !no_descendants {
        return Ok(false);
    }
    let cut = cut_outgoing(d, x);
    let q = DsepQuery::new(x.clone(), y.clone(), z.clone())?;
    d_separated(&cut, &q)
}

/// Diagram with all edges out of `vars` removed (graph-level lazy cut).
pub fn cut_outgoing(d: &CausalDiagram, vars: &VarTuple) -> CausalDiagram {
    let mut out = d.clone();
    out.edges
        .retain(|(from, _)| !matches!(from, Node::Endo(v) if vars.contains(v)));
    out
}

/// Diagram with all edges into `vars` removed (graph-level eager cut,
/// without the constant parent a generator-level intervention would add —
/// constants are non-transmitting anyway).
pub fn cut_incoming(d: &CausalDiagram, vars: &VarTuple) -> CausalDiagram {
    let mut out = d.clone();
    out.edges.retain(|(_, to)| !vars.contains(to));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::DataGenerator;
    use crate::syntax::{Atom, CausalTerm};

    fn diagram(edges: &[(&str, &str)], vars: &[&str]) -> CausalDiagram {
        // Build via a generator with one fsym per variable; exogenous noise
        // names are per-variable and don't matter for the predicates.
        let mut g = DataGenerator::new("t");
        for v in vars {
            let parents: Vec<Atom> = edges
                .iter()
                .filter(|(_, to)| to == v)
                .map(|(from, _)| Atom::Var(from.to_string()))
                .collect();
            let t = if parents.is_empty() {
                CausalTerm::Name(alloc::format!("n_{v}"))
            } else {
                CausalTerm::App(alloc::format!("f_{v}"), parents)
            };
            g.assignments.insert(v.to_string(), Some(t));
        }
        g.to_diagram()
    }

    fn vt(vs: &[&str]) -> VarTuple {
        VarTuple::new(vs.iter().copied()).unwrap()
    }

    fn dsep(d: &CausalDiagram, x: &[&str], y: &[&str], z: &[&str]) -> bool {
        let q = DsepQuery::new(vt(x), vt(y), vt(z)).unwrap();
        let fast = d_separated(d, &q).unwrap();
        let naive = d_separated_naive(d, &q).unwrap();
        assert_eq!(fast, naive, "fast and naive deciders disagree");
        fast
    }

    #[test]
    fn chain_fork_collider() {
        let chain = diagram(&[("x", "z"), ("z", "y")], &["x", "y", "z"]);
        assert!(dsep(&chain, &["x"], &["y"], &["z"]));
        assert!(!dsep(&chain, &["x"], &["y"], &[]));

        let fork = diagram(&[("z", "x"), ("z", "y")], &["x", "y", "z"]);
        assert!(dsep(&fork, &["x"], &["y"], &["z"]));
        assert!(!dsep(&fork, &["x"], &["y"], &[]));

        let collider = diagram(&[("x", "z"), ("y", "z")], &["x", "y", "z"]);
        assert!(dsep(&collider, &["x"], &["y"], &[]));
        assert!(!dsep(&collider, &["x"], &["y"], &["z"]));
    }

    #[test]
    fn collider_descendant_opens_path() {
        let d = diagram(
            &[("x", "z"), ("y", "z"), ("z", "w")],
            &["w", "x", "y", "z"],
        );
        assert!(!dsep(&d, &["x"], &["y"], &["w"]));
        assert!(dsep(&d, &["x"], &["y"], &[]));
    }

    #[test]
    fn parents_and_ancestors() {
        let d = diagram(&[("z", "x"), ("z", "y"), ("x", "y")], &["x", "y", "z"]);
        assert_eq!(parents(&d, &vt(&["x"])).unwrap(), vt(&["z"]));
        assert_eq!(parents(&d, &vt(&["y"])).unwrap(), vt(&["x", "z"]));
        let chain = diagram(&[("x", "z"), ("z", "y")], &["x", "y", "z"]);
        assert_eq!(ancestors(&chain, &vt(&["y"])).unwrap(), vt(&["x", "z"]));
        assert_eq!(parents(&chain, &vt(&["x"])).unwrap(), VarTuple::empty());
        assert!(parents(&d, &vt(&["q"])).is_err());
    }

    #[test]
    fn causal_predicates() {
        let drug = diagram(&[("z", "x"), ("z", "y"), ("x", "y")], &["x", "y", "z"]);
        assert!(eval_causal_pred(&drug, CausalPred::Pa, &[vt(&["z"]), vt(&["x"])]).unwrap());
        assert!(!eval_causal_pred(&drug, CausalPred::Pa, &[vt(&["z"]), vt(&["y"])]).unwrap());

        let chain = diagram(&[("x", "z"), ("z", "y")], &["x", "y", "z"]);
        assert!(eval_causal_pred(&chain, CausalPred::Nanc, &[vt(&["y"]), vt(&["x"])]).unwrap());
        assert!(!eval_causal_pred(&chain, CausalPred::Nanc, &[vt(&["x"]), vt(&["y"])]).unwrap());

        // allnanc(<x,y>, <x,y>, <w>) with isolated w
        let iso = diagram(&[("x", "z"), ("y", "z")], &["w", "x", "y", "z"]);
        assert!(eval_causal_pred(
            &iso,
            CausalPred::AllNanc,
            &[vt(&["x", "y"]), vt(&["x", "y"]), vt(&["w"])]
        )
        .unwrap());
        assert!(!eval_causal_pred(
            &iso,
            CausalPred::AllNanc,
            &[vt(&["x", "y"]), vt(&["x", "y"]), vt(&["z"])]
        )
        .unwrap());

        let e = eval_causal_pred(&iso, CausalPred::Dsep, &[vt(&["x"]), vt(&["y"])]);
        assert!(matches!(e, Err(GraphError::Arity { .. })));
    }

    #[test]
    fn backdoor_on_drug_shape() {
        let drug = diagram(&[("z", "x"), ("z", "y"), ("x", "y")], &["x", "y", "z"]);
        assert!(backdoor_criterion(&drug, &vt(&["x"]), &vt(&["y"]), &vt(&["z"])).unwrap());
        // chain x -> z -> y: z is a descendant of x, criterion fails
        let chain = diagram(&[("x", "z"), ("z", "y")], &["x", "y", "z"]);
        assert!(!backdoor_criterion(&chain, &vt(&["x"]), &vt(&["y"]), &vt(&["z"])).unwrap());
        // no back-door paths at all: vacuous with empty z
        let direct = diagram(&[("x", "y")], &["x", "y"]);
        assert!(backdoor_criterion(&direct, &vt(&["x"]), &vt(&["y"]), &VarTuple::empty()).unwrap());
    }

    #[test]
    fn shared_name_is_a_real_fork_but_constant_is_not() {
        // x := f(n), y := h(n): dependent through the exogenous name.
        let mut g = DataGenerator::new("t");
        g.assignments.insert(
            "x".into(),
            Some(CausalTerm::App("f".into(), alloc::vec![Atom::Name("n".into())])),
        );
        g.assignments.insert(
            "y".into(),
            Some(CausalTerm::App("h".into(), alloc::vec![Atom::Name("n".into())])),
        );
        let d = g.to_diagram();
        assert!(!dsep(&d, &["x"], &["y"], &[]));

        // x := f(c), y := h(c): a shared constant transmits nothing.
        let mut g = DataGenerator::new("t");
        g.assignments.insert(
            "x".into(),
            Some(CausalTerm::App("f".into(), alloc::vec![Atom::Const("c".into())])),
        );
        g.assignments.insert(
            "y".into(),
            Some(CausalTerm::App("h".into(), alloc::vec![Atom::Const("c".into())])),
        );
        let d = g.to_diagram();
        assert!(dsep(&d, &["x"], &["y"], &[]));
    }

    #[test]
    fn dsep_rejects_malformed_queries() {
        assert!(DsepQuery::new(vt(&[]), vt(&["y"]), vt(&[])).is_err());
        assert!(DsepQuery::new(vt(&["x"]), vt(&["x"]), vt(&[])).is_err());
        assert!(DsepQuery::new(vt(&["x"]), vt(&["y"]), vt(&["y"])).is_err());
    }
}
