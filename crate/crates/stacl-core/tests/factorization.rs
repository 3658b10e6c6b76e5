//! Cross-checks between the interpreter and the independent dense
//! factorization route on random worlds: tuple marginals, conditional
//! kernels, post-intervention distributions, and the generator-level
//! intervention laws.

use stacl_core::fuzz::{sample_model, FuzzConfig};
use stacl_core::syntax::{Assignments, CondVar, Mode, Term, VarTuple};
use stacl_core::world::{truncated_factorization, World};

fn cfg() -> FuzzConfig {
    FuzzConfig {
        seed: 99,
        ..FuzzConfig::default()
    }
}

fn singleton_pairs(vars: &VarTuple) -> Vec<VarTuple> {
    let vs: Vec<&String> = vars.iter().collect();
    let mut out: Vec<VarTuple> = vs
        .iter()
        .map(|v| VarTuple::new([v.as_str()]).unwrap())
        .collect();
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            out.push(VarTuple::new([vs[i].as_str(), vs[j].as_str()]).unwrap());
        }
    }
    out
}

/// Memory consistency against the factored joint: every tuple marginal of
/// the interpreter equals the dense factorization's marginal.
#[test]
fn tuple_marginals_match_dense_factorization() {
    let cfg = cfg();
    let empty = Assignments::new(Vec::new()).unwrap();
    for i in 0..60 {
        let model = sample_model(&cfg, 1000 + i, i % 2 == 0, false);
        let w = World::base(model.clone()).unwrap();
        for t in singleton_pairs(&w.vars()) {
            let via_interp = w.interpret(&Term::Vars(t.clone())).unwrap().dist;
            let via_factors = truncated_factorization(&model, &empty, &t).unwrap();
            assert_eq!(via_interp, via_factors, "world {i}, tuple {t}");
        }
    }
}

/// Conditional kernels equal the conditionals of the factored joint on
/// every positive row.
#[test]
fn conditional_kernels_match_dense_factorization() {
    let cfg = cfg();
    let empty = Assignments::new(Vec::new()).unwrap();
    for i in 0..40 {
        let model = sample_model(&cfg, 2000 + i, true, false);
        let w = World::base(model.clone()).unwrap();
        let vars: Vec<String> = w.vars().iter().cloned().collect();
        if vars.len() < 2 {
            continue;
        }
        let y = VarTuple::new([vars[0].as_str()]).unwrap();
        let z = VarTuple::new([vars[1].as_str()]).unwrap();
        let kernel = w
            .interpret_cond(&CondVar::new(y.clone(), z.clone(), VarTuple::empty(), vec![]).unwrap())
            .unwrap();
        let yz = y.merge(&z).unwrap();
        let joint = truncated_factorization(&model, &empty, &yz).unwrap();
        let zi = yz.index_of(z.as_slice()[0].as_str()).unwrap();
        let yi = yz.index_of(y.as_slice()[0].as_str()).unwrap();
        for (input, row) in kernel.rows.iter() {
            let conditioned = joint
                .condition(&[(zi, input[0])])
                .expect("kernel rows are defined on positive inputs");
            assert_eq!(
                conditioned.marginal(&[yi]),
                *row,
                "world {i}: row {input:?}"
            );
        }
    }
}

/// The two post-intervention routes agree on random worlds, not just the
/// bundled model.
#[test]
fn causal_effect_routes_agree_on_random_worlds() {
    let cfg = cfg();
    for i in 0..60 {
        let model = sample_model(&cfg, 3000 + i, i % 3 != 0, false);
        let w = World::base(model.clone()).unwrap();
        let vars: Vec<String> = w.vars().iter().cloned().collect();
        let x = &vars[i as usize % vars.len()];
        let assigns = Assignments::single(x.clone(), "c0");
        for y in vars.iter().filter(|v| *v != x) {
            let yt = VarTuple::new([y.as_str()]).unwrap();
            let via_world = w.causal_effect(&assigns, &yt).unwrap();
            let via_truncation = truncated_factorization(&model, &assigns, &yt).unwrap();
            assert_eq!(via_world, via_truncation, "world {i}, do({x}), on {y}");
        }
    }
}

/// Generator-level intervention laws on random worlds: eager idempotence
/// and disjoint simultaneity.
#[test]
fn intervention_laws_hold_on_random_generators() {
    let cfg = cfg();
    for i in 0..80 {
        let model = sample_model(&cfg, 4000 + i, false, false);
        let g = &model.base;
        let vars: Vec<String> = g.dom().iter().cloned().collect();
        let a = Assignments::single(vars[0].clone(), "c0");
        let once = g.intervene_eager(&a).unwrap();
        let mut twice = once.intervene_eager(&a).unwrap();
        twice.id = once.id.clone();
        assert_eq!(once, twice, "eager idempotence on world {i}");
        assert!(once.validate().is_ok());
        assert!(g.intervene_lazy(&a).unwrap().validate().is_ok());
        if vars.len() >= 2 {
            let b = Assignments::single(vars[1].clone(), "c1");
            let joint = a.union(&b).unwrap();
            let mut sim = g.intervene_eager(&joint).unwrap();
            let mut seq = g.intervene_eager(&a).unwrap().intervene_eager(&b).unwrap();
            sim.id = String::new();
            seq.id = String::new();
            assert_eq!(sim, seq, "eager simultaneity on world {i}");
            // lazy sequential composition equals the simultaneous transform
            let mut lsim = g.intervene_lazy(&joint).unwrap();
            let mut lseq = g.intervene_lazy(&a).unwrap().intervene_lazy(&b).unwrap();
            lsim.id = String::new();
            lseq.id = String::new();
            assert_eq!(lsim, lseq, "lazy simultaneity on world {i}");
        }
    }
}
