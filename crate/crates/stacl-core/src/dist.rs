//! Exact discrete probability: rational-valued distributions over value
//! tuples, and kernels (stochastic maps between tuple spaces).
//!
//! Zero-probability entries are never stored, so the support map is the
//! distribution. All arithmetic is `BigRational`; nothing here rounds.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::syntax::{CondVar, VarTuple};

pub type Rational = BigRational;

/// Domain value. Domains are `0..domain_size`.
pub type Val = u8;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Probability distribution over `O^arity` with exact rational masses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    arity: usize,
    support: BTreeMap<Vec<Val>, Rational>,
}

impl Distribution {
    /// Point distribution on a single tuple.
    pub fn point(tuple: Vec<Val>) -> Self {
        let arity = tuple.len();
        let mut support = BTreeMap::new();
        support.insert(tuple, Rational::one());
        Distribution { arity, support }
    }

    /// Builds from entries, dropping zeros. Masses must sum to exactly 1.
    pub fn from_entries(
        arity: usize,
        entries: impl IntoIterator<Item = (Vec<Val>, Rational)>,
    ) -> Option<Self> {
        let mut support = BTreeMap::new();
        let mut total = Rational::zero();
        for (t, p) in entries {
            if t.len() != arity || p < Rational::zero() {
                return None;
            }
            if p.is_zero() {
                continue;
            }
            total += &p;
            *support.entry(t).or_insert_with(Rational::zero) += p;
        }
        if !total.is_one() {
            return None;
        }
        Some(Distribution { arity, support })
    }

    /// Unit of the product: the unique distribution over the empty tuple.
    pub fn unit() -> Self {
        Distribution::point(Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn support(&self) -> impl Iterator<Item = (&Vec<Val>, &Rational)> {
        self.support.iter()
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    pub fn mass(&self, tuple: &[Val]) -> Rational {
        self.support.get(tuple).cloned().unwrap_or_else(Rational::zero)
    }

    /// Full support over the whole domain `0..domain_size` in every
    /// coordinate.
    pub fn has_full_support(&self, domain_size: Val) -> bool {
        self.support.len() == (domain_size as usize).pow(self.arity as u32)
    }

    /// Independent product.
    pub fn product(&self, other: &Distribution) -> Distribution {
        let mut support = BTreeMap::new();
        for (t1, p1) in &self.support {
            for (t2, p2) in &other.support {
                let mut t = t1.clone();
                t.extend_from_slice(t2);
                support.insert(t, p1 * p2);
            }
        }
        Distribution {
            arity: self.arity + other.arity,
            support,
        }
    }

    /// Projection onto the coordinates at `indices` (in the given order).
    pub fn marginal(&self, indices: &[usize]) -> Distribution {
        let mut support: BTreeMap<Vec<Val>, Rational> = BTreeMap::new();
        for (t, p) in &self.support {
            let proj: Vec<Val> = indices.iter().map(|&i| t[i]).collect();
            *support.entry(proj).or_insert_with(Rational::zero) += p;
        }
        Distribution {
            arity: indices.len(),
            support,
        }
    }

    /// Conditions on `tuple[i] = v` for each `(i, v)` in `constraints`,
    /// renormalizing. `None` when the event has zero probability.
    pub fn condition(&self, constraints: &[(usize, Val)]) -> Option<Distribution> {
        let mut support = BTreeMap::new();
        let mut total = Rational::zero();
        for (t, p) in &self.support {
            if constraints.iter().all(|&(i, v)| t[i] == v) {
                total += p;
                support.insert(t.clone(), p.clone());
            }
        }
        if total.is_zero() {
            return None;
        }
        for p in support.values_mut() {
            *p /= &total;
        }
        Some(Distribution {
            arity: self.arity,
            support,
        })
    }

    /// Probability of the event `tuple[i] = v` for all constraints.
    pub fn event_prob(&self, constraints: &[(usize, Val)]) -> Rational {
        self.support
            .iter()
            .filter(|(t, _)| constraints.iter().all(|&(i, v)| t[i] == v))
            .map(|(_, p)| p.clone())
            .sum()
    }

    /// Reorders coordinates: output coordinate `j` is input coordinate
    /// `perm[j]`.
    pub fn permute(&self, perm: &[usize]) -> Distribution {
        let mut support = BTreeMap::new();
        for (t, p) in &self.support {
            let nt: Vec<Val> = perm.iter().map(|&i| t[i]).collect();
            support.insert(nt, p.clone());
        }
        Distribution {
            arity: perm.len(),
            support,
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (t, p)) in self.support.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            for (j, v) in t.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, ": {p}")?;
        }
        write!(f, "}}")
    }
}

/// Total kernel of a plain function symbol: every input row is present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainKernel {
    pub arity_in: usize,
    pub arity_out: usize,
    pub rows: BTreeMap<Vec<Val>, Distribution>,
}

impl PlainKernel {
    pub fn row(&self, input: &[Val]) -> Option<&Distribution> {
        self.rows.get(input)
    }

    /// Pushforward of a distribution through the kernel. `None` when some
    /// support point has no row.
    pub fn push(&self, input: &Distribution) -> Option<Distribution> {
        push_rows(input, |t| self.rows.get(t))
    }
}

/// Kernel of a conditional variable: partial, with structured rows.
///
/// `rows[v]` is the distribution of the *free* target coordinates given
/// `given = v` and the fixed clamp. The glued row — over the sorted
/// `given ∪ target` coordinates, with given coordinates clamped at the
/// input and fixed∩target coordinates clamped at their values — is what
/// application and comparison against plain kernels use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondKernel {
    pub cv: CondVar,
    /// Domain values of the fixed clamp, aligned with `cv.fixed`.
    pub fixed_dom_vals: Vec<Val>,
    pub rows: BTreeMap<Vec<Val>, Distribution>,
}

impl CondKernel {
    pub fn shape(&self) -> (usize, usize) {
        self.cv.shape()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Glued row over the sorted `given ∪ target` coordinates.
    pub fn glued_row(&self, input: &[Val]) -> Option<Distribution> {
        let free = self.row_free(input)?;
        Some(self.glue(input, free))
    }

    /// The free-part row (distribution of `target \ fixed` given
    /// `given = input` and the fixed clamp).
    pub fn row_free(&self, input: &[Val]) -> Option<&Distribution> {
        self.rows.get(input)
    }

    fn glue(&self, input: &[Val], free: &Distribution) -> Distribution {
        let out_vars = self.cv.out_vars();
        let free_vars = self.cv.free_target();
        let mut entries = Vec::new();
        for (ft, p) in free.support() {
            let mut tuple = vec![0; out_vars.len()];
            for (k, v) in out_vars.iter().enumerate() {
                if let Some(i) = self.cv.given.index_of(v) {
                    tuple[k] = input[i];
                } else if let Some(i) = free_vars.index_of(v) {
                    tuple[k] = ft[i];
                } else {
                    // target coordinate clamped by the fixed part
                    let i = self.cv.fixed.index_of(v).expect("clamped coordinate");
                    tuple[k] = self.fixed_dom_vals[i];
                }
            }
            entries.push((tuple, p.clone()));
        }
        Distribution::from_entries(out_vars.len(), entries).expect("glued row is a distribution")
    }

    /// Pushforward through the glued rows. `None` when the input's support
    /// leaves the kernel's domain.
    pub fn push(&self, input: &Distribution) -> Option<Distribution> {
        let glued: BTreeMap<Vec<Val>, Distribution> = self
            .rows
            .keys()
            .map(|k| (k.clone(), self.glued_row(k).unwrap()))
            .collect();
        push_rows(input, |t| glued.get(t))
    }
}

fn push_rows<'a>(
    input: &Distribution,
    row: impl Fn(&[Val]) -> Option<&'a Distribution>,
) -> Option<Distribution> {
    let mut acc: BTreeMap<Vec<Val>, Rational> = BTreeMap::new();
    let mut out_arity = None;
    for (t, p) in input.support() {
        let r = row(t)?;
        out_arity = Some(r.arity());
        for (ot, q) in r.support() {
            *acc.entry(ot.clone()).or_insert_with(Rational::zero) += p * q;
        }
    }
    let arity = out_arity?;
    Distribution::from_entries(arity, acc)
}

/// A kernel value: either a plain (total) kernel or a conditional one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kernel {
    Plain(PlainKernel),
    Cond(CondKernel),
}

impl Kernel {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Kernel::Plain(k) => (k.arity_in, k.arity_out),
            Kernel::Cond(k) => k.shape(),
        }
    }

    pub fn push(&self, input: &Distribution) -> Option<Distribution> {
        match self {
            Kernel::Plain(k) => k.push(input),
            Kernel::Cond(k) => k.push(input),
        }
    }

    /// Coordinate labels of the output, when the kernel is conditional.
    pub fn out_labels(&self) -> Option<VarTuple> {
        match self {
            Kernel::Plain(_) => None,
            Kernel::Cond(k) => Some(k.cv.out_vars()),
        }
    }
}

/// Refines a conditional kernel to a finer input tuple: the row at a
/// `union`-valued input is the row at its given-part restriction,
/// defined whenever that restriction is and the input is consistent with
/// the fixed clamp on any overlapping coordinates.
fn refined_free_rows(
    k: &CondKernel,
    union: &VarTuple,
    domain_size: Val,
) -> BTreeMap<Vec<Val>, Distribution> {
    let gidx: Vec<usize> = k
        .cv
        .given
        .iter()
        .map(|v| union.index_of(v).expect("given ⊆ union"))
        .collect();
    let clamp: Vec<(usize, Val)> = k
        .cv
        .fixed
        .iter()
        .zip(&k.fixed_dom_vals)
        .filter_map(|(v, &val)| union.index_of(v).map(|i| (i, val)))
        .collect();
    let mut out = BTreeMap::new();
    for u in all_tuples(domain_size, union.len()) {
        if !clamp.iter().all(|&(i, v)| u[i] == v) {
            continue;
        }
        let g: Vec<Val> = gidx.iter().map(|&i| u[i]).collect();
        if let Some(row) = k.rows.get(&g) {
            out.insert(u, row.clone());
        }
    }
    out
}

/// Equality of kernels per the formula semantics:
///
/// - plain vs plain: identical shape and rows;
/// - plain vs conditional: same shape, and the plain rows match the glued
///   conditional rows on every defined row;
/// - conditional vs conditional with equal given-sets: agreement of glued
///   rows on the common domain, vacuously true only when both are empty,
///   false when exactly one is;
/// - conditional vs conditional with different given-sets: both are refined
///   to the union of the given-sets and compared on jointly defined inputs
///   via their free-part rows; the free coordinate sets must coincide.
pub fn kernels_equal(a: &Kernel, b: &Kernel, domain_size: Val) -> bool {
    match (a, b) {
        (Kernel::Plain(ka), Kernel::Plain(kb)) => ka == kb,
        (Kernel::Plain(p), Kernel::Cond(c)) | (Kernel::Cond(c), Kernel::Plain(p)) => {
            if (p.arity_in, p.arity_out) != c.shape() {
                return false;
            }
            if c.is_empty() {
                return false;
            }
            c.rows.keys().all(|input| {
                let glued = c.glued_row(input).unwrap();
                p.row(input).is_some_and(|r| *r == glued)
            })
        }
        (Kernel::Cond(ka), Kernel::Cond(kb)) => {
            if ka.is_empty() || kb.is_empty() {
                return ka.is_empty() && kb.is_empty();
            }
            if ka.cv.given == kb.cv.given {
                if ka.cv.free_target() != kb.cv.free_target()
                    || ka.cv.out_vars() != kb.cv.out_vars()
                {
                    return false;
                }
                let common: Vec<&Vec<Val>> =
                    ka.rows.keys().filter(|k| kb.rows.contains_key(*k)).collect();
                if common.is_empty() {
                    return false;
                }
                common
                    .into_iter()
                    .all(|input| ka.glued_row(input) == kb.glued_row(input))
            } else {
                if ka.cv.free_target() != kb.cv.free_target() {
                    return false;
                }
                let union = ka.cv.given.union(&kb.cv.given);
                let ra = refined_free_rows(ka, &union, domain_size);
                let rb = refined_free_rows(kb, &union, domain_size);
                if ra.is_empty() || rb.is_empty() {
                    return ra.is_empty() && rb.is_empty();
                }
                let common: Vec<&Vec<Val>> = ra.keys().filter(|k| rb.contains_key(*k)).collect();
                if common.is_empty() {
                    return false;
                }
                common.into_iter().all(|input| ra[input] == rb[input])
            }
        }
    }
}

/// All tuples over `0..domain_size` of the given length, in
/// lexicographic order.
pub fn all_tuples(domain_size: Val, len: usize) -> Vec<Vec<Val>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * domain_size as usize);
        for t in &out {
            for v in 0..domain_size {
                let mut t2 = t.clone();
                t2.push(v);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// Formats a rational in lowest terms as `p/q` with `q > 0` (so `1/1` for
/// one). `BigRational` keeps values reduced, so this is direct.
pub fn format_rational(r: &Rational) -> String {
    use alloc::format;
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_marginal() {
        let a = Distribution::from_entries(1, [(vec![0], rat(1, 2)), (vec![1], rat(1, 2))])
            .unwrap();
        let b = Distribution::from_entries(1, [(vec![0], rat(1, 4)), (vec![1], rat(3, 4))])
            .unwrap();
        let ab = a.product(&b);
        assert_eq!(ab.mass(&[0, 1]), rat(3, 8));
        assert_eq!(ab.marginal(&[0]), a);
        assert_eq!(ab.marginal(&[1]), b);
    }

    #[test]
    fn condition_renormalizes_and_detects_zero_events() {
        let d = Distribution::from_entries(
            2,
            [
                (vec![0, 0], rat(1, 4)),
                (vec![0, 1], rat(1, 4)),
                (vec![1, 1], rat(1, 2)),
            ],
        )
        .unwrap();
        let c = d.condition(&[(0, 0)]).unwrap();
        assert_eq!(c.mass(&[0, 0]), rat(1, 2));
        assert_eq!(c.mass(&[0, 1]), rat(1, 2));
        let c2 = d.condition(&[(1, 0)]).unwrap();
        assert_eq!(c2.mass(&[0, 0]), rat(1, 1));
        assert!(d.condition(&[(0, 2)]).is_none());
    }

    #[test]
    fn distribution_must_sum_to_one() {
        assert!(Distribution::from_entries(1, [(vec![0], rat(1, 2))]).is_none());
        assert!(Distribution::from_entries(
            1,
            [(vec![0], rat(1, 2)), (vec![1], rat(1, 2)), (vec![0], rat(0, 1))]
        )
        .is_some());
    }

    #[test]
    fn full_support_check() {
        let d = Distribution::from_entries(1, [(vec![0], rat(1, 2)), (vec![1], rat(1, 2))])
            .unwrap();
        assert!(d.has_full_support(2));
        assert!(!d.has_full_support(3));
    }

    #[test]
    fn format_is_lowest_terms() {
        assert_eq!(format_rational(&rat(18, 20)), "9/10");
        assert_eq!(format_rational(&rat(2, 2)), "1/1");
        assert_eq!(format_rational(&rat(-1, 2)), "-1/2");
    }
}
