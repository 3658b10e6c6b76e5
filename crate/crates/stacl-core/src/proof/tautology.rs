//! Propositional-tautology recognition for PT steps.
//!
//! The formula's atomic skeleton is extracted (every subformula that is not
//! `Top`, `Not` or `And` counts as one atom, compared structurally) and the
//! truth table is evaluated. Atom counts are capped to keep PT steps cheap
//! and total.

use alloc::vec::Vec;

use crate::syntax::Formula;

const MAX_ATOMS: usize = 16;

/// True iff the formula is a propositional tautology over its atomic
/// skeleton. Formulas with more than 16 distinct atoms are rejected.
pub fn is_tautology(phi: &Formula) -> bool {
    let mut atoms: Vec<&Formula> = Vec::new();
    if !collect_atoms(phi, &mut atoms) {
        return false;
    }
    let n = atoms.len();
    for mask in 0..(1u32 << n) {
        if !eval(phi, &atoms, mask) {
            return false;
        }
    }
    true
}

fn collect_atoms<'a>(phi: &'a Formula, atoms: &mut Vec<&'a Formula>) -> bool {
    match phi {
        Formula::Top => true,
        Formula::Not(f) => collect_atoms(f, atoms),
        Formula::And(a, b) => collect_atoms(a, atoms) && collect_atoms(b, atoms),
        atom => {
            if !atoms.iter().any(|a| *a == atom) {
                if atoms.len() >= MAX_ATOMS {
                    return false;
                }
                atoms.push(atom);
            }
            true
        }
    }
}

fn eval(phi: &Formula, atoms: &[&Formula], mask: u32) -> bool {
    match phi {
        Formula::Top => true,
        Formula::Not(f) => !eval(f, atoms, mask),
        Formula::And(a, b) => eval(a, atoms, mask) && eval(b, atoms, mask),
        atom => {
            let i = atoms.iter().position(|a| *a == atom).unwrap();
            mask & (1 << i) != 0
        }
    }
}
