//! The Boolean logic CL_QM: sets of exclusive atoms `(A!, P)`, meaning "exactly
//! `A` was measured, with finest outcome `P`". Also the Bruns–Lakser power-set
//! model over atoms of the maximal contexts.

use std::fmt;

use crate::context::{format_mask, mask_bits, AtomMask, ContextFamily, Observable};
use crate::error::{Error, Result};
use crate::lqm::{embed_i, lqm_join, negate, Section};
use crate::scalar::Rational;
use crate::slattice::{sqm_leq, SqmElement};

/// `(A!, P)` with `P` the `atom`-th atomic projection of context `context`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ExclusiveAtom {
    pub context: usize,
    pub atom: usize,
}

impl ExclusiveAtom {
    pub fn as_element(self) -> SqmElement {
        SqmElement::Prop {
            context: self.context,
            mask: 1 << self.atom,
        }
    }
}

/// Subset of the family's exclusive atoms, as a bitset over global atom indices.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Event {
    words: Vec<u64>,
    len: usize,
}

impl Event {
    pub fn empty(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut e = Self::empty(len);
        for i in 0..len {
            e.insert(i);
        }
        e
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut e = Self::empty(len);
        for i in indices {
            e.insert(i);
        }
        e
    }

    /// Event whose restriction to context `k` is `masks[k]`.
    pub fn from_masks(family: &ContextFamily, masks: &[AtomMask]) -> Self {
        let offsets = family.atom_offsets();
        let mut e = Self::empty(family.exclusive_atom_count());
        for (k, &m) in masks.iter().enumerate() {
            for bit in mask_bits(m) {
                e.insert(offsets[k] + bit);
            }
        }
        e
    }

    /// Event over at most 64 atoms given by the bits of `bits`.
    pub fn from_bits(len: usize, bits: u64) -> Self {
        assert!(len <= 64 && (len == 64 || bits >> len == 0), "bits beyond universe");
        let mut e = Self::empty(len);
        if len > 0 {
            e.words[0] = bits;
        }
        e
    }

    /// Number of atoms in the ambient space.
    pub fn universe_len(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "atom index out of range");
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.contains(i))
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Self {
        Self::full(self.len).difference(self)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }

    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.len, other.len, "events over different families");
        Self {
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect(),
            len: self.len,
        }
    }

    /// Restriction to each context, as atom masks in family order.
    pub fn masks(&self, family: &ContextFamily) -> Vec<AtomMask> {
        let offsets = family.atom_offsets();
        (0..family.len())
            .map(|k| {
                (0..family.d(k))
                    .filter(|&a| self.contains(offsets[k] + a))
                    .fold(0, |m, a| m | 1 << a)
            })
            .collect()
    }

    pub fn atoms(&self, family: &ContextFamily) -> Vec<ExclusiveAtom> {
        let all = exclusive_atoms(family);
        self.iter().map(|i| all[i]).collect()
    }

    /// Sorted `(context-name, atom-bitmask)` pairs, one per context met by the event.
    pub fn render(&self, family: &ContextFamily) -> String {
        let parts: Vec<String> = self
            .masks(family)
            .iter()
            .enumerate()
            .filter(|(_, &m)| m != 0)
            .map(|(k, &m)| format!("({},{})", family.name(k), format_mask(m, family.d(k))))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// Every event over `len` atoms, ∅ first, in binary counting order.
pub fn all_events(len: usize, limit: usize) -> Result<Vec<Event>> {
    if len >= 63 || 1usize << len > limit {
        return Err(Error::BoundExceeded {
            what: "events",
            bound: limit,
            needed: 1usize.checked_shl(len as u32).unwrap_or(usize::MAX),
        });
    }
    Ok((0..1u64 << len).map(|b| Event::from_bits(len, b)).collect())
}

/// All exclusive atoms, by context then atom.
pub fn exclusive_atoms(family: &ContextFamily) -> Vec<ExclusiveAtom> {
    (0..family.len())
        .flat_map(|k| (0..family.d(k)).map(move |atom| ExclusiveAtom { context: k, atom }))
        .collect()
}

/// `c(S) = {(A!, P) : P <= S(A)}`.
pub fn c_map(family: &ContextFamily, s: &Section) -> Event {
    Event::from_masks(family, s.masks())
}

pub fn c_of_i(family: &ContextFamily, a: SqmElement) -> Event {
    c_map(family, &embed_i(family, a))
}

/// `{(A'!, P') : (A', P') <= a}`, computed from the order on S_QM directly.
pub fn down_set_event(family: &ContextFamily, a: SqmElement) -> Event {
    let all = exclusive_atoms(family);
    Event::from_indices(
        all.len(),
        all.iter()
            .enumerate()
            .filter(|(_, x)| sqm_leq(family, x.as_element(), a))
            .map(|(i, _)| i),
    )
}

/// The section an event comes from, if it lies in the image of `c`.
pub fn c_preimage(family: &ContextFamily, e: &Event) -> Option<Section> {
    Section::new(family, e.masks(family)).ok()
}

/// `M!_A(Δ)`: the atoms of `A` below the spectral projection of `Δ`.
pub fn m_bang_event(family: &ContextFamily, obs: &Observable, delta: &[Rational]) -> Result<Event> {
    let k = family
        .index_of(obs.context())
        .ok_or_else(|| Error::UnknownContext("observable context is not in the family".into()))?;
    let mut masks = vec![0; family.len()];
    masks[k] = obs.spectral_mask(delta);
    Ok(Event::from_masks(family, &masks))
}

/// `{(C1!, 1)}`: nothing was measured.
pub fn no_measurement_event(family: &ContextFamily) -> Event {
    let mut masks = vec![0; family.len()];
    masks[family.trivial()] = 1;
    Event::from_masks(family, &masks)
}

#[derive(Clone, Debug)]
pub struct LemGap {
    pub element: SqmElement,
    /// Complement of `c(i(a) ∨ ¬i(a))`.
    pub gap: Event,
    /// `{(A'!, P') : A' ⊊ A, P' <= P}`.
    pub described: Event,
    /// `{(A'!, P') : [A', A] = 0, A ⊄ A', P' ∧ P ≠ 0}`.
    pub alternative: Event,
}

impl LemGap {
    pub fn extra(&self) -> Event {
        self.gap.difference(&self.described)
    }

    pub fn missing(&self) -> Event {
        self.described.difference(&self.gap)
    }

    pub fn matches_described(&self) -> bool {
        self.gap == self.described
    }

    pub fn matches_alternative(&self) -> bool {
        self.gap == self.alternative
    }
}

/// Atoms where excluded middle fails for `i(a)`, with both candidate descriptions.
pub fn lem_gap(family: &ContextFamily, a: SqmElement) -> Result<LemGap> {
    let SqmElement::Prop { context, mask } = a else {
        return Err(Error::Invariant("excluded-middle gap of ⊥ is undefined".into()));
    };
    let s = embed_i(family, a);
    let gap = c_map(family, &lqm_join(&s, &negate(family, &s))).complement();
    let p = family.context(context).element(mask);
    let all = exclusive_atoms(family);
    let select = |pred: &dyn Fn(&ExclusiveAtom) -> bool| {
        Event::from_indices(
            all.len(),
            all.iter().enumerate().filter(|(_, x)| pred(x)).map(|(i, _)| i),
        )
    };
    let described = select(&|x| {
        x.context != context
            && family.includes(context, x.context)
            && family.proj_le(x.context, 1 << x.atom, context, mask)
    });
    let alternative = select(&|x| {
        family.commutes(x.context, context)
            && !family.includes(x.context, context)
            && family.context(x.context).atoms()[x.atom].overlaps(&p)
    });
    Ok(LemGap {
        element: a,
        gap,
        described,
        alternative,
    })
}

/// `(A, P)` with `A` maximal in the family and `P` one of its atoms.
pub fn star_atoms(family: &ContextFamily) -> Vec<ExclusiveAtom> {
    family
        .maximal()
        .into_iter()
        .flat_map(|k| (0..family.d(k)).map(move |atom| ExclusiveAtom { context: k, atom }))
        .collect()
}

/// `↓a` intersected with the star atoms, as indices into [`star_atoms`].
pub fn bruns_lakser_embed(family: &ContextFamily, a: SqmElement) -> Vec<usize> {
    star_atoms(family)
        .iter()
        .enumerate()
        .filter(|(_, x)| sqm_leq(family, x.as_element(), a))
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{close_family, Context};
    use crate::fixtures::*;
    use crate::lqm::enumerate_sections;
    use crate::matrix::{Projection, QMatrix};
    use crate::scalar::{int, GaussianRational as G};
    use crate::slattice::{all_elements, sqm_join, sqm_meet};

    fn zx() -> ContextFamily {
        qubit_family(vec![az(), ax()])
    }

    fn az_el(f: &ContextFamily, sign: i32) -> SqmElement {
        SqmElement::from_projection(f, f.index_by_name("Az").unwrap(), &pz(sign)).unwrap()
    }

    #[test]
    fn atom_counts() {
        assert_eq!(exclusive_atoms(&qubit_family(vec![])).len(), 1);
        assert_eq!(exclusive_atoms(&zx()).len(), 5);
        assert_eq!(exclusive_atoms(&bell_family()).len(), 25);
    }

    #[test]
    fn c_map_examples() {
        let f = zx();
        assert!(c_map(&f, &Section::bottom(&f)).is_empty());
        assert_eq!(c_map(&f, &Section::top(&f)).count(), 5);
        let e = c_of_i(&f, az_el(&f, 1));
        assert_eq!(
            e.atoms(&f),
            vec![ExclusiveAtom {
                context: f.index_by_name("Az").unwrap(),
                atom: 1
            }]
        );
        let whole = SqmElement::whole(&f, f.index_by_name("Az").unwrap());
        assert_eq!(c_of_i(&f, whole).render(&f), "{(Az,11)}");
    }

    #[test]
    fn c_map_is_injective_homomorphism() {
        for f in [qubit_family(vec![az()]), zx()] {
            let sections = enumerate_sections(&f, 100).unwrap();
            let images: Vec<Event> = sections.iter().map(|s| c_map(&f, s)).collect();
            for (i, s) in sections.iter().enumerate() {
                assert_eq!(c_preimage(&f, &images[i]).as_ref(), Some(s));
                for (j, t) in sections.iter().enumerate() {
                    assert_eq!(i == j, images[i] == images[j]);
                    assert_eq!(
                        c_map(&f, &crate::lqm::lqm_meet(s, t)),
                        images[i].intersection(&images[j])
                    );
                    assert_eq!(c_map(&f, &lqm_join(s, t)), images[i].union(&images[j]));
                }
            }
        }
    }

    #[test]
    fn c_of_i_is_down_set() {
        let f = qubit_family(vec![az(), ax(), ay()]);
        for a in all_elements(&f, 100).unwrap() {
            assert_eq!(c_of_i(&f, a), down_set_event(&f, a));
        }
    }

    #[test]
    fn m_bang_examples() {
        let f = zx();
        let one = m_bang_event(&f, &sigma_z(), &[int(1)]).unwrap();
        assert_eq!(one, c_of_i(&f, az_el(&f, 1)));
        let none = m_bang_event(&f, &sigma_z(), &[int(7)]).unwrap();
        assert!(none.is_empty());
        let both = m_bang_event(&f, &sigma_z(), &[int(1), int(-1)]).unwrap();
        assert_eq!(both.count(), 2);
        let g = qubit_family(vec![ax()]);
        assert!(m_bang_event(&g, &sigma_z(), &[int(1)]).is_err());
    }

    #[test]
    fn no_measurement_outside_image() {
        let f = qubit_family(vec![az()]);
        let e = no_measurement_event(&f);
        assert_eq!(e.render(&f), "{(C1,1)}");
        assert!(c_preimage(&f, &e).is_none());
        for s in enumerate_sections(&f, 100).unwrap() {
            assert_ne!(c_map(&f, &s), e);
        }
        assert_eq!(e.complement().count(), 2);
    }

    #[test]
    fn boolean_spot_checks() {
        let f = zx();
        let a = c_of_i(&f, az_el(&f, 1));
        let b = no_measurement_event(&f);
        assert_eq!(a.complement().complement(), a);
        assert_eq!(a.union(&b).complement(), a.complement().intersection(&b.complement()));
    }

    #[test]
    fn lem_gap_examples() {
        let f = zx();
        let g = lem_gap(&f, az_el(&f, 1)).unwrap();
        assert_eq!(g.gap, no_measurement_event(&f));
        assert!(g.described.is_empty());
        assert_eq!(g.extra(), g.gap);
        assert!(g.matches_alternative() && !g.matches_described());
        let g = lem_gap(&f, SqmElement::top(&f)).unwrap();
        assert!(g.gap.is_empty());
        assert!(lem_gap(&f, SqmElement::Bottom).is_err());
    }

    #[test]
    fn lem_gap_three_level() {
        let e = |k: usize| {
            let mut d = vec![G::zero(); 3];
            d[k] = G::one();
            QMatrix::diagonal(&d)
        };
        let e1 = Projection::new(e(0)).unwrap();
        let e2 = Projection::new(e(1)).unwrap();
        let e3 = Projection::new(e(2)).unwrap();
        let e23 = Projection::new(e(1).add(&e(2))).unwrap();
        let fine = Context::new(vec![e1.clone(), e2, e3], Some("A".into())).unwrap();
        let coarse = Context::new(vec![e1.clone(), e23], Some("B".into())).unwrap();
        let f = close_family(3, vec![fine, coarse], 16).unwrap();
        assert_eq!(f.len(), 3);
        let a = SqmElement::from_projection(&f, f.index_by_name("A").unwrap(), &e1).unwrap();
        let g = lem_gap(&f, a).unwrap();
        let b = f.index_by_name("B").unwrap();
        let b_e1 = Event::from_masks(&f, &{
            let mut m = vec![0; f.len()];
            m[b] = f.context(b).mask_of(&e1).unwrap();
            m
        });
        assert_eq!(g.described, b_e1);
        assert_eq!(g.gap, b_e1.union(&no_measurement_event(&f)));
        assert!(g.missing().is_empty() && g.matches_alternative());
    }

    #[test]
    fn bruns_lakser_examples() {
        let f = zx();
        assert_eq!(bruns_lakser_embed(&f, SqmElement::top(&f)).len(), star_atoms(&f).len());
        let stars = star_atoms(&f);
        let img: Vec<_> = bruns_lakser_embed(&f, az_el(&f, 1))
            .into_iter()
            .map(|i| stars[i])
            .collect();
        assert_eq!(
            img,
            vec![ExclusiveAtom {
                context: f.index_by_name("Az").unwrap(),
                atom: 1
            }]
        );

        let bell = bell_family();
        let a1 = bell.index_by_name("A1").unwrap();
        let stars = star_atoms(&bell);
        assert_eq!(stars.len(), 16);
        let img = bruns_lakser_embed(&bell, SqmElement::prop(a1, 1));
        assert_eq!(img.len(), 4);
        for i in img {
            assert!(bell.includes(stars[i].context, a1));
        }
    }

    #[test]
    fn bruns_lakser_meets_exact_joins_superset() {
        let f = qubit_family(vec![az(), ax(), ay()]);
        let elements = all_elements(&f, 100).unwrap();
        let set = |a| {
            bruns_lakser_embed(&f, a)
                .into_iter()
                .collect::<std::collections::BTreeSet<_>>()
        };
        for &a in &elements {
            for &b in &elements {
                let (sa, sb) = (set(a), set(b));
                assert_eq!(set(sqm_meet(&f, a, b)), &sa & &sb);
                assert!(set(sqm_join(&f, a, b)).is_superset(&(&sa | &sb)));
            }
        }
    }
}
