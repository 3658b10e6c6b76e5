//! Programmatic derivation construction.
//!
//! A builder is pinned to one judgment frame (context, generator, layer).
//! Axiom nodes come from `axiom` (which instantiates the schema, so the
//! recorded conclusion always matches the checker's expectation); glue
//! reasoning goes through `pt_mp`, which discharges any propositional
//! consequence of already-derived premises with a single PT step and a
//! chain of MPs.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::rules::{instantiate, InstError, Rule};
use super::{Binding, Bindings, DerivationNode, Judgment, Layer};
use crate::syntax::{Assignments, Formula, GenRef, Mode};

#[derive(Debug, Clone)]
pub struct Builder {
    pub context: Vec<Formula>,
    pub gen: GenRef,
    pub layer: Layer,
}

impl Builder {
    pub fn new(gen: GenRef, layer: Layer, context: Vec<Formula>) -> Self {
        Builder {
            context,
            gen,
            layer,
        }
    }

    /// A builder for the same derivation under a shifted generator with an
    /// empty context (as the generator-shifting rules require).
    pub fn shifted(&self, mode: Mode, assigns: &Assignments) -> Builder {
        Builder {
            context: Vec::new(),
            gen: self.gen.intervened(mode, assigns.clone()),
            layer: self.layer,
        }
    }

    fn judgment(&self, conclusion: Formula) -> Judgment {
        Judgment {
            context: self.context.clone(),
            gen: self.gen.clone(),
            layer: self.layer,
            conclusion,
        }
    }

    pub fn node(
        &self,
        rule: Rule,
        bind: Bindings,
        conclusion: Formula,
        premises: Vec<DerivationNode>,
    ) -> DerivationNode {
        DerivationNode {
            rule,
            bind,
            judgment: self.judgment(conclusion),
            premises,
        }
    }

    /// Instantiates an axiom schema and wraps it as a leaf node.
    pub fn axiom(&self, rule: Rule, bind: Bindings) -> Result<DerivationNode, InstError> {
        let conclusion = instantiate(rule, &bind, &self.gen)?;
        Ok(self.node(rule, bind, conclusion, vec![]))
    }

    /// PT leaf for a tautology.
    pub fn pt(&self, phi: Formula) -> DerivationNode {
        let mut bind = BTreeMap::new();
        bind.insert(String::from("phi"), Binding::Formula(phi.clone()));
        self.node(Rule::Pt, bind, phi, vec![])
    }

    /// Hypothesis leaf; the formula must be in the context.
    pub fn hyp(&self, phi: Formula) -> DerivationNode {
        self.node(Rule::Hyp, BTreeMap::new(), phi, vec![])
    }

    /// Modus ponens: from ψ and ψ → φ conclude φ.
    pub fn mp(&self, antecedent: DerivationNode, implication: DerivationNode) -> DerivationNode {
        let Some((_, conclusion)) = super::split_imp(&implication.judgment.conclusion) else {
            panic!(
                "mp: second premise is not an implication: {}",
                implication.judgment.conclusion
            );
        };
        let conclusion = conclusion.clone();
        self.node(Rule::Mp, BTreeMap::new(), conclusion, vec![antecedent, implication])
    }

    /// The workhorse: `conclusion` must follow propositionally from the
    /// premises' conclusions. Emits one PT leaf for
    /// `p1 -> (p2 -> ... -> conclusion)` and discharges it with MPs.
    pub fn pt_mp(&self, premises: Vec<DerivationNode>, conclusion: Formula) -> DerivationNode {
        let mut taut = conclusion.clone();
        for p in premises.iter().rev() {
            taut = Formula::imp(p.judgment.conclusion.clone(), taut);
        }
        debug_assert!(
            super::tautology::is_tautology(&taut),
            "pt_mp glue is not a tautology: {taut}"
        );
        let mut cur = self.pt(taut);
        for p in premises {
            cur = self.mp(p, cur);
        }
        cur
    }

    /// Lifts `⊢_{g[a]E} φ` (derived by `inner` under the shifted builder)
    /// to `⊢_g [a]E φ`.
    pub fn dg_ei(&self, assigns: &Assignments, inner: DerivationNode) -> DerivationNode {
        let conclusion = Formula::eager(assigns.clone(), inner.judgment.conclusion.clone());
        self.node(Rule::DgEi, BTreeMap::new(), conclusion, vec![inner])
    }

    /// Lifts `⊢_{g[a]L} φ` to `⊢_g [a]L φ`.
    pub fn dg_li(&self, assigns: &Assignments, inner: DerivationNode) -> DerivationNode {
        let conclusion = Formula::lazy(assigns.clone(), inner.judgment.conclusion.clone());
        self.node(Rule::DgLi, BTreeMap::new(), conclusion, vec![inner])
    }

    /// Derives `[a]∘ φ <-> pushed(φ)`, where `pushed` distributes the
    /// modality through `&` and `!` down to atoms, via the distribution
    /// axioms and PT glue. Returns the node plus the pushed formula.
    pub fn push_modality(
        &self,
        mode: Mode,
        assigns: &Assignments,
        phi: &Formula,
    ) -> (DerivationNode, Formula) {
        let wrap = |f: Formula| match mode {
            Mode::Eager => Formula::eager(assigns.clone(), f),
            Mode::Lazy => Formula::lazy(assigns.clone(), f),
        };
        match phi {
            Formula::And(f, g) => {
                let distr = self
                    .axiom(
                        match mode {
                            Mode::Eager => Rule::DistrEiAnd,
                            Mode::Lazy => Rule::DistrLiAnd,
                        },
                        bindings([
                            ("a", Binding::Assigns(assigns.clone())),
                            ("phi1", Binding::Formula((**f).clone())),
                            ("phi2", Binding::Formula((**g).clone())),
                        ]),
                    )
                    .expect("distribution axiom");
                let (nf, pf) = self.push_modality(mode, assigns, f);
                let (ng, pg) = self.push_modality(mode, assigns, g);
                let target = Formula::iff(wrap(phi.clone()), Formula::and(pf.clone(), pg.clone()));
                (self.pt_mp(vec![distr, nf, ng], target), Formula::and(pf, pg))
            }
            Formula::Not(f) => {
                let distr = self
                    .axiom(
                        match mode {
                            Mode::Eager => Rule::DistrEiNot,
                            Mode::Lazy => Rule::DistrLiNot,
                        },
                        bindings([
                            ("a", Binding::Assigns(assigns.clone())),
                            ("phi", Binding::Formula((**f).clone())),
                        ]),
                    )
                    .expect("distribution axiom");
                let (nf, pf) = self.push_modality(mode, assigns, f);
                let target = Formula::iff(wrap(phi.clone()), Formula::not(pf.clone()));
                (self.pt_mp(vec![distr, nf], target), Formula::not(pf))
            }
            atom => {
                let target = Formula::iff(wrap(atom.clone()), wrap(atom.clone()));
                (self.pt(target), wrap(atom.clone()))
            }
        }
    }

    /// From `⊢_{g[a]∘} φ` (typically an implication or biconditional built
    /// under the shifted frame), derives the fully distributed consequence
    /// at `g`: lifts via the generator shift, then rewrites `[a]∘ φ` into
    /// its atom-wise pushed form. Returns the node concluding `pushed(φ)`.
    pub fn lift_distributed(
        &self,
        mode: Mode,
        assigns: &Assignments,
        inner: DerivationNode,
    ) -> DerivationNode {
        let phi = inner.judgment.conclusion.clone();
        let lifted = match mode {
            Mode::Eager => self.dg_ei(assigns, inner),
            Mode::Lazy => self.dg_li(assigns, inner),
        };
        let (equiv, pushed) = self.push_modality(mode, assigns, &phi);
        self.pt_mp(vec![lifted, equiv], pushed)
    }

    /// Symmetric counterpart of a derived equation node: from `u1 == u2`
    /// builds `u2 == u1` (via Eq1 and Eq2 on the first occurrence).
    pub fn eq_term_symm(&self, eq: DerivationNode) -> DerivationNode {
        let Formula::EqTerm(u1, u2) = eq.judgment.conclusion.clone() else {
            panic!("eq_term_symm: not a term equation");
        };
        let refl = self
            .axiom(Rule::Eq1, bindings([("u", Binding::Term(u1.clone()))]))
            .expect("Eq1");
        let eq2 = self
            .axiom(
                Rule::Eq2,
                bindings([
                    ("u1", Binding::Term(u1.clone())),
                    ("u2", Binding::Term(u2.clone())),
                    ("phi1", Binding::Formula(Formula::EqTerm(u1.clone(), u1.clone()))),
                    ("occ", Binding::Indices(vec![0])),
                ]),
            )
            .expect("Eq2");
        let target = Formula::EqTerm(u2, u1);
        self.pt_mp(vec![eq, refl, eq2], target)
    }

    /// From `k1 == k2` builds `k2 == k1`.
    pub fn eq_kernel_symm(&self, eq: DerivationNode) -> DerivationNode {
        let Formula::EqKernel(k1, k2) = eq.judgment.conclusion.clone() else {
            panic!("eq_kernel_symm: not a kernel equation");
        };
        let refl = self
            .axiom(Rule::Eq1, bindings([("k1", Binding::Kref(k1.clone()))]))
            .expect("Eq1");
        let eq2 = self
            .axiom(
                Rule::Eq2,
                bindings([
                    ("k1", Binding::Kref(k1.clone())),
                    ("k2", Binding::Kref(k2.clone())),
                    (
                        "phi1",
                        Binding::Formula(Formula::EqKernel(k1.clone(), k1.clone())),
                    ),
                    ("occ", Binding::Indices(vec![0])),
                ]),
            )
            .expect("Eq2");
        let target = Formula::EqKernel(k2, k1);
        self.pt_mp(vec![eq, refl, eq2], target)
    }
}

/// Convenience constructor for binding maps.
pub fn bindings<const N: usize>(entries: [(&str, Binding); N]) -> Bindings {
    entries
        .into_iter()
        .map(|(k, v)| (String::from(k), v))
        .collect()
}
