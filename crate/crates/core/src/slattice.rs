//! The lattice S_QM of experimental propositions `(A, P)` over a closed family.
//!
//! `(A1, P1) <= (A2, P2)` iff `A1 ⊇ A2` and `P1 <= P2`; the meet takes the
//! generated algebra of commuting contexts, the join takes the intersection
//! algebra and the least element of its lattice above `P1 ∨ P2`.

use std::fmt::Write as _;

use crate::context::{format_mask, mask_bits, AtomMask, ContextFamily};
use crate::error::{Error, Result};
use crate::matrix::Projection;

/// Default cap on the number of S_QM elements any exhaustive routine will touch.
pub const DEFAULT_MAX_ELEMENTS: usize = 4096;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum SqmElement {
    Bottom,
    /// `mask` is a nonzero element of the context's lattice.
    Prop {
        context: usize,
        mask: AtomMask,
    },
}

impl SqmElement {
    /// `(A, P)`, with `(A, 0)` identified with ⊥.
    pub fn prop(context: usize, mask: AtomMask) -> Self {
        if mask == 0 {
            Self::Bottom
        } else {
            Self::Prop { context, mask }
        }
    }

    /// `(A, 1)`.
    pub fn whole(family: &ContextFamily, context: usize) -> Self {
        Self::prop(context, family.context(context).full_mask())
    }

    pub fn top(family: &ContextFamily) -> Self {
        Self::whole(family, family.trivial())
    }

    /// From an explicit projection, which must lie in the context's lattice.
    pub fn from_projection(family: &ContextFamily, context: usize, p: &Projection) -> Result<Self> {
        let mask = family.context(context).mask_of(p).ok_or(Error::NotInLattice)?;
        Ok(Self::prop(context, mask))
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Self::Bottom)
    }

    pub fn projection(&self, family: &ContextFamily) -> Projection {
        match *self {
            Self::Bottom => Projection::zero(family.dim()),
            Self::Prop { context, mask } => family.context(context).element(mask),
        }
    }

    pub fn display(&self, family: &ContextFamily) -> String {
        match *self {
            Self::Bottom => "⊥".to_string(),
            Self::Prop { context, mask } => {
                format!("({},{})", family.name(context), format_mask(mask, family.d(context)))
            }
        }
    }
}

pub fn sqm_leq(family: &ContextFamily, a: SqmElement, b: SqmElement) -> bool {
    match (a, b) {
        (SqmElement::Bottom, _) => true,
        (_, SqmElement::Bottom) => false,
        (SqmElement::Prop { context: c1, mask: m1 }, SqmElement::Prop { context: c2, mask: m2 }) => {
            family.includes(c1, c2) && m1 & !family.lift(c1, c2, m2) == 0
        }
    }
}

pub fn sqm_meet(family: &ContextFamily, a: SqmElement, b: SqmElement) -> SqmElement {
    let (SqmElement::Prop { context: c1, mask: m1 }, SqmElement::Prop { context: c2, mask: m2 }) = (a, b) else {
        return SqmElement::Bottom;
    };
    let Some(g) = family.generated(c1, c2) else {
        return SqmElement::Bottom;
    };
    SqmElement::prop(g, family.lift(g, c1, m1) & family.lift(g, c2, m2))
}

pub fn sqm_join(family: &ContextFamily, a: SqmElement, b: SqmElement) -> SqmElement {
    match (a, b) {
        (SqmElement::Bottom, x) | (x, SqmElement::Bottom) => x,
        (SqmElement::Prop { context: c1, mask: m1 }, SqmElement::Prop { context: c2, mask: m2 }) => {
            let cap = family.intersect(c1, c2);
            SqmElement::prop(cap, family.cover(cap, c1, m1) | family.cover(cap, c2, m2))
        }
    }
}

/// `|S_QM| = 1 + Σ (2^d(A) - 1)`.
pub fn element_count(family: &ContextFamily) -> usize {
    1 + family.contexts().iter().map(|c| (1usize << c.d()) - 1).sum::<usize>()
}

/// Every element, ⊥ first, then by context and mask.
pub fn all_elements(family: &ContextFamily, bound: usize) -> Result<Vec<SqmElement>> {
    let needed = element_count(family);
    if needed > bound {
        return Err(Error::BoundExceeded {
            what: "S_QM elements",
            bound,
            needed,
        });
    }
    let mut out = vec![SqmElement::Bottom];
    for k in 0..family.len() {
        out.extend((1..=family.context(k).full_mask()).map(|m| SqmElement::Prop { context: k, mask: m }));
    }
    Ok(out)
}

/// Elements of the form `(A, 1)` plus ⊥, in canonical order.
pub fn measurement_elements(family: &ContextFamily) -> Vec<SqmElement> {
    std::iter::once(SqmElement::Bottom)
        .chain((0..family.len()).map(|k| SqmElement::whole(family, k)))
        .collect()
}

/// Atoms `(A, q)` of each context, as S_QM elements.
pub fn atom_elements(family: &ContextFamily, context: usize) -> impl Iterator<Item = SqmElement> + '_ {
    mask_bits(family.context(context).full_mask()).map(move |k| SqmElement::Prop { context, mask: 1 << k })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistributivityWitness {
    pub a: SqmElement,
    pub b: SqmElement,
    pub c: SqmElement,
    /// `a ∧ (b ∨ c)`
    pub lhs: SqmElement,
    /// `(a ∧ b) ∨ (a ∧ c)`
    pub rhs: SqmElement,
}

/// Searches for `a ∧ (b ∨ c) ≠ (a ∧ b) ∨ (a ∧ c)`.
///
/// Measurement propositions `(A, 1)` are searched first, then all elements.
/// Within a pass, pairs `b < c` are taken in canonical order and `a` varies
/// fastest, so the first witness found is deterministic.
pub fn distributivity_witness(family: &ContextFamily, bound: usize) -> Result<Option<DistributivityWitness>> {
    let everything = all_elements(family, bound)?;
    for pool in [measurement_elements(family), everything] {
        for (i, &b) in pool.iter().enumerate() {
            for &c in &pool[i + 1..] {
                let bc = sqm_join(family, b, c);
                for &a in &pool {
                    let lhs = sqm_meet(family, a, bc);
                    let rhs = sqm_join(family, sqm_meet(family, a, b), sqm_meet(family, a, c));
                    if lhs != rhs {
                        return Ok(Some(DistributivityWitness { a, b, c, lhs, rhs }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Covering pairs `(lower, upper)` of the order, as indices into `elements`.
pub fn covering_pairs(family: &ContextFamily, elements: &[SqmElement]) -> Vec<(usize, usize)> {
    let n = elements.len();
    let below: Vec<Vec<bool>> = elements
        .iter()
        .map(|&x| elements.iter().map(|&y| x != y && sqm_leq(family, x, y)).collect())
        .collect();
    let mut edges = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if below[x][y] && !(0..n).any(|z| below[x][z] && below[z][y]) {
                edges.push((x, y));
            }
        }
    }
    edges
}

/// Hasse diagram of S_QM as DOT text, nodes in canonical order, edges upward.
pub fn hasse_dot(family: &ContextFamily, bound: usize) -> Result<String> {
    let elements = all_elements(family, bound)?;
    let mut out = String::from("digraph sqm {\n  rankdir=BT;\n  node [shape=box];\n");
    for (k, e) in elements.iter().enumerate() {
        writeln!(out, "  n{k} [label=\"{}\"];", e.display(family)).unwrap();
    }
    for (x, y) in covering_pairs(family, &elements) {
        writeln!(out, "  n{x} -> n{y};").unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}
