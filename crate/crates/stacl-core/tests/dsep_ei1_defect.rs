// quick check: collider-at-z counterexample for Dsep_EI1
#[test]
fn dsep_ei1_collider_counterexample() {
    use stacl_core::generator::DataGenerator;
    use stacl_core::syntax::{Atom, CausalTerm, VarTuple};
    use stacl_core::graph::{d_separated, d_separated_naive, DsepQuery};
    let mut g = DataGenerator::new("t");
    g.assignments.insert("x0".into(), Some(CausalTerm::Name("n0".into())));
    g.assignments.insert("x1".into(), Some(CausalTerm::Name("n1".into())));
    g.assignments.insert(
        "x2".into(),
        Some(CausalTerm::App("f".into(), vec![Atom::Var("x0".into()), Atom::Var("x1".into())])),
    );
    let vt = |s: &str| VarTuple::new([s]).unwrap();
    let q = DsepQuery::new(vt("x0"), vt("x1"), vt("x2")).unwrap();
    // base graph: collider x0 -> x2 <- x1, conditioned on x2: NOT separated
    let d = g.to_diagram();
    assert!(!d_separated(&d, &q).unwrap());
    assert!(!d_separated_naive(&d, &q).unwrap());
    // eagerly intervened on x2: in-edges cut: separated
    let ge = g
        .intervene_eager(&stacl_core::syntax::Assignments::single("x2", "c0"))
        .unwrap();
    let de = ge.to_diagram();
    assert!(d_separated(&de, &q).unwrap());
    assert!(d_separated_naive(&de, &q).unwrap());
}
