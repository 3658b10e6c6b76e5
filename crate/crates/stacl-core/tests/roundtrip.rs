//! Property tests over the syntax layer: printing then parsing is the
//! identity on ASTs, tuple operations keep tuples sorted and
//! duplicate-free, and substitution satisfies the sequential-composition
//! law against a naive re-implementation.

use proptest::prelude::*;

use stacl_core::parse::{parse_formula, parse_term, Signature};
use stacl_core::syntax::{
    Assignments, Atom, CausalPred, CausalTerm, CondVar, Formula, GenRef, KernelRef, Mode, PosArg,
    Term, VarTuple,
};

const VARS: &[&str] = &["u", "v", "w", "x", "y", "z"];
const NAMES: &[&str] = &["n0", "n1", "n2"];
const CONSTS: &[&str] = &["c0", "c1", "c2"];
const FSYMS: &[&str] = &["f", "g", "h"];

fn sig() -> Signature {
    let mut s = Signature::default();
    s.vars.extend(VARS.iter().map(|v| v.to_string()));
    s.names.extend(NAMES.iter().map(|v| v.to_string()));
    s.consts.extend(CONSTS.iter().map(|v| v.to_string()));
    s.fsyms.extend(FSYMS.iter().map(|v| v.to_string()));
    s
}

fn arb_var() -> impl Strategy<Value = String> {
    proptest::sample::select(VARS).prop_map(str::to_string)
}

fn arb_tuple() -> impl Strategy<Value = VarTuple> {
    proptest::sample::subsequence(VARS.to_vec(), 1..=3)
        .prop_map(|vs| VarTuple::new(vs.into_iter().map(str::to_string)).unwrap())
}

fn arb_tuple_allow_empty() -> impl Strategy<Value = VarTuple> {
    proptest::sample::subsequence(VARS.to_vec(), 0..=2)
        .prop_map(|vs| VarTuple::new(vs.into_iter().map(str::to_string)).unwrap())
}

fn arb_assigns() -> impl Strategy<Value = Assignments> {
    (
        proptest::sample::subsequence(VARS.to_vec(), 1..=2),
        proptest::sample::select(CONSTS),
    )
        .prop_map(|(vs, c)| {
            Assignments::new(vs.into_iter().map(|v| (v.to_string(), c.to_string())).collect())
                .unwrap()
        })
}

fn arb_genref() -> impl Strategy<Value = GenRef> {
    (arb_assigns(), any::<bool>(), any::<bool>()).prop_map(|(a, deep, lazy)| {
        let base = GenRef::base("m");
        if deep {
            base.intervened(if lazy { Mode::Lazy } else { Mode::Eager }, a)
        } else {
            base
        }
    })
}

fn arb_condvar() -> impl Strategy<Value = CondVar> {
    (arb_tuple(), arb_tuple_allow_empty(), proptest::sample::select(CONSTS), any::<bool>())
        .prop_filter_map("disjoint parts", |(y, rest, c, with_fixed)| {
            let y = y.minus(&rest);
            if y.is_empty() {
                return None;
            }
            let (given, fixed) = if with_fixed && rest.len() >= 2 {
                let fst = VarTuple::new([rest.as_slice()[0].clone()]).unwrap();
                (rest.minus(&fst), fst)
            } else {
                (rest, VarTuple::empty())
            };
            let vals = vec![c.to_string(); fixed.len()];
            CondVar::new(y, given, fixed, vals).ok()
        })
}

fn arb_kref() -> impl Strategy<Value = KernelRef> {
    prop_oneof![
        proptest::sample::select(FSYMS).prop_map(|f| KernelRef::Fsym(f.to_string())),
        arb_condvar().prop_map(KernelRef::Cond),
        (arb_genref(), arb_condvar()).prop_map(|(g, cv)| KernelRef::CanonCond(g, cv)),
    ]
}

fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        arb_tuple().prop_map(Term::Vars),
        proptest::sample::select(NAMES).prop_map(|n| Term::Name(n.to_string())),
        proptest::sample::select(CONSTS).prop_map(|c| Term::Const(c.to_string())),
        (arb_genref(), arb_tuple()).prop_map(|(g, t)| Term::CanonName(g, t)),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            (arb_kref(), proptest::collection::vec(inner.clone(), 0..3))
                .prop_map(|(k, args)| Term::App(k, args)),
            (inner.clone(), arb_tuple())
                .prop_map(|(body, keep)| Term::Margin(Box::new(body), keep)),
            proptest::collection::vec(inner, 2..4).prop_map(Term::Tuple),
        ]
    })
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    let atom = prop_oneof![
        Just(Formula::Top),
        arb_tuple().prop_map(|t| Formula::Pos(PosArg::Tuple(t))),
        arb_condvar().prop_map(|cv| Formula::Pos(PosArg::Cond(cv))),
        (arb_tuple(), arb_tuple(), arb_tuple_allow_empty()).prop_filter_map(
            "disjoint",
            |(x, y, z)| {
                let y = y.minus(&x);
                let z = z.minus(&x).minus(&y);
                if y.is_empty() {
                    None
                } else {
                    Some(Formula::CausalPred(CausalPred::Dsep, vec![x, y, z]))
                }
            }
        ),
        (arb_term(), arb_term()).prop_map(|(a, b)| Formula::EqTerm(a, b)),
        (arb_kref(), arb_kref()).prop_map(|(a, b)| Formula::EqKernel(a, b)),
    ];
    atom.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (arb_assigns(), inner.clone())
                .prop_map(|(a, f)| Formula::Eager(a, Box::new(f))),
            (arb_assigns(), inner).prop_map(|(a, f)| Formula::Lazy(a, Box::new(f))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn formula_print_parse_round_trip(f in arb_formula()) {
        let printed = f.to_string();
        let reparsed = parse_formula(&printed, &sig())
            .unwrap_or_else(|e| panic!("`{printed}` fails to reparse: {e}"));
        prop_assert_eq!(reparsed, f);
    }

    #[test]
    fn term_print_parse_round_trip(t in arb_term()) {
        let printed = t.to_string();
        let reparsed = parse_term(&printed, &sig())
            .unwrap_or_else(|e| panic!("`{printed}` fails to reparse: {e}"));
        prop_assert_eq!(reparsed, t);
    }

    #[test]
    fn tuple_operations_stay_sorted(a in arb_tuple(), b in arb_tuple()) {
        let union = a.union(&b);
        let sorted_ok = |t: &VarTuple| {
            t.as_slice().windows(2).all(|w| w[0] < w[1])
        };
        prop_assert!(sorted_ok(&union));
        prop_assert!(sorted_ok(&a.minus(&b)));
        prop_assert!(sorted_ok(&a.intersect(&b)));
        if a.is_disjoint_from(&b) {
            let merged = a.merge(&b).unwrap();
            prop_assert!(sorted_ok(&merged));
            prop_assert_eq!(merged.len(), a.len() + b.len());
        } else {
            prop_assert!(a.merge(&b).is_err());
        }
    }

    /// Sequential substitution composes: u[x↦r][x↦s] = u[x↦ r[x↦s]],
    /// checked against an independent naive recursion.
    #[test]
    fn substitution_composition(u in arb_term(), x in arb_var(), r in arb_term(), s in arb_term()) {
        let lhs = u.substitute(&x, &r).substitute(&x, &s);
        let rhs = u.substitute(&x, &r.substitute(&x, &s));
        prop_assert_eq!(&lhs, &rhs);
        prop_assert_eq!(lhs, naive_subst(&naive_subst(&u, &x, &r), &x, &s));
    }
}

/// Naive replacement oracle for `substitute`.
fn naive_subst(t: &Term, x: &str, r: &Term) -> Term {
    let singleton = Term::Vars(VarTuple::new([x]).unwrap());
    if *t == singleton {
        return r.clone();
    }
    match t {
        Term::App(k, args) => Term::App(
            k.clone(),
            args.iter().map(|a| naive_subst(a, x, r)).collect(),
        ),
        Term::Margin(body, keep) => Term::Margin(Box::new(naive_subst(body, x, r)), keep.clone()),
        Term::Tuple(ts) => Term::Tuple(ts.iter().map(|a| naive_subst(a, x, r)).collect()),
        other => other.clone(),
    }
}
