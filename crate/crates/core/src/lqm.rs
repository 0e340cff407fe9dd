//! The distributive lattice L_QM: monotone assignments of a lattice element to
//! every context of the family, with pointwise operations, the embedding of
//! S_QM, Heyting implication and negation.

use std::fmt::Write as _;

use crate::context::{format_mask, mask_bits, AtomMask, ContextFamily};
use crate::error::{Error, Result};
use crate::slattice::SqmElement;

pub const DEFAULT_MAX_SECTIONS: usize = 200_000;

/// One mask per context of the family, in family order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Section {
    masks: Vec<AtomMask>,
}

impl Section {
    /// Checks membership (`S(A) ∈ L(A)`) and monotonicity (`A ⊂ A'` implies `S(A) <= S(A')`).
    pub fn new(family: &ContextFamily, masks: Vec<AtomMask>) -> Result<Self> {
        if masks.len() != family.len() {
            return Err(Error::InvalidSection(format!(
                "expected {} masks, got {}",
                family.len(),
                masks.len()
            )));
        }
        for (k, &m) in masks.iter().enumerate() {
            if m & !family.context(k).full_mask() != 0 {
                return Err(Error::InvalidSection(format!(
                    "mask for {} has bits beyond its atoms",
                    family.name(k)
                )));
            }
        }
        for fine in 0..family.len() {
            for coarse in 0..family.len() {
                if fine != coarse
                    && family.includes(fine, coarse)
                    && family.lift(fine, coarse, masks[coarse]) & !masks[fine] != 0
                {
                    return Err(Error::InvalidSection(format!(
                        "not monotone: value at {} is not below value at {}",
                        family.name(coarse),
                        family.name(fine)
                    )));
                }
            }
        }
        Ok(Self { masks })
    }

    pub fn top(family: &ContextFamily) -> Self {
        Self {
            masks: family.contexts().iter().map(|c| c.full_mask()).collect(),
        }
    }

    pub fn bottom(family: &ContextFamily) -> Self {
        Self {
            masks: vec![0; family.len()],
        }
    }

    pub fn masks(&self) -> &[AtomMask] {
        &self.masks
    }

    pub fn get(&self, context: usize) -> AtomMask {
        self.masks[context]
    }

    pub fn leq(&self, other: &Self) -> bool {
        self.masks.iter().zip(&other.masks).all(|(a, b)| a & !b == 0)
    }

    pub fn is_bottom(&self) -> bool {
        self.masks.iter().all(|&m| m == 0)
    }

    /// One line per context: name, atom bitmask, and optionally the projection.
    pub fn render(&self, family: &ContextFamily, with_matrices: bool) -> String {
        let mut out = String::new();
        for (k, &m) in self.masks.iter().enumerate() {
            write!(out, "{}\t{}", family.name(k), format_mask(m, family.d(k))).unwrap();
            if with_matrices {
                write!(out, "\t{}", family.context(k).element(m)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Compact single-line form, e.g. `C1=0 Az=01 Ax=11`.
    pub fn inline(&self, family: &ContextFamily) -> String {
        self.masks
            .iter()
            .enumerate()
            .map(|(k, &m)| format!("{}={}", family.name(k), format_mask(m, family.d(k))))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn lqm_meet(s1: &Section, s2: &Section) -> Section {
    Section {
        masks: s1.masks.iter().zip(&s2.masks).map(|(a, b)| a & b).collect(),
    }
}

pub fn lqm_join(s1: &Section, s2: &Section) -> Section {
    Section {
        masks: s1.masks.iter().zip(&s2.masks).map(|(a, b)| a | b).collect(),
    }
}

/// Join of a finite list; the empty join is ⊥.
pub fn join_all<'a>(family: &ContextFamily, sections: impl IntoIterator<Item = &'a Section>) -> Section {
    sections
        .into_iter()
        .fold(Section::bottom(family), |acc, s| lqm_join(&acc, s))
}

/// Meet of a finite list; the empty meet is ⊤.
pub fn meet_all<'a>(family: &ContextFamily, sections: impl IntoIterator<Item = &'a Section>) -> Section {
    sections
        .into_iter()
        .fold(Section::top(family), |acc, s| lqm_meet(&acc, s))
}

/// `i(A, P)`: `P` on every context including `A`, zero elsewhere.
pub fn embed_i(family: &ContextFamily, a: SqmElement) -> Section {
    let SqmElement::Prop { context, mask } = a else {
        return Section::bottom(family);
    };
    let masks = (0..family.len())
        .map(|k| {
            if family.includes(k, context) {
                family.lift(k, context, mask)
            } else {
                0
            }
        })
        .collect();
    Section { masks }
}

/// The experimental propositions `(A, S(A))` with `S(A) ≠ 0`.
pub fn decompose(s: &Section) -> Vec<SqmElement> {
    s.masks
        .iter()
        .enumerate()
        .filter(|(_, &m)| m != 0)
        .map(|(k, &m)| SqmElement::Prop { context: k, mask: m })
        .collect()
}

/// Relative pseudo-complement. At each context `A` keep the atoms `q` with
/// `q ∧ S1(A') <= S2(A')` for every `A' ⊇ A` in the family.
pub fn implies(family: &ContextFamily, s1: &Section, s2: &Section) -> Section {
    let n = family.len();
    let masks = (0..n)
        .map(|a| {
            mask_bits(family.context(a).full_mask())
                .filter(|&q| {
                    (0..n).filter(|&f| family.includes(f, a)).all(|f| {
                        let lifted = family.lift(f, a, 1 << q);
                        lifted & s1.masks[f] & !s2.masks[f] == 0
                    })
                })
                .fold(0, |m, q| m | 1 << q)
        })
        .collect();
    Section { masks }
}

pub fn negate(family: &ContextFamily, s: &Section) -> Section {
    implies(family, s, &Section::bottom(family))
}

/// `¬i(A, P)` as the join of all `i(A', P')` with `A'` not commuting with `A`
/// or `P' P = 0`. Evaluated on projection matrices, independently of [`implies`].
pub fn negation_closed_form(family: &ContextFamily, a: SqmElement) -> Section {
    let SqmElement::Prop { context, mask } = a else {
        return Section::top(family);
    };
    let p = family.context(context).element(mask);
    let mut acc = Section::bottom(family);
    for k in 0..family.len() {
        let commuting = family.context(k).commutes_with(family.context(context));
        for m in 1..=family.context(k).full_mask() {
            let excluded = !commuting || family.context(k).element(m).is_orthogonal_to(&p);
            if excluded {
                acc = lqm_join(&acc, &embed_i(family, SqmElement::Prop { context: k, mask: m }));
            }
        }
    }
    acc
}

/// Every section of the family in canonical (lexicographic) order.
pub fn enumerate_sections(family: &ContextFamily, limit: usize) -> Result<Vec<Section>> {
    let n = family.len();
    // Proper sub-contexts have fewer atoms, so they precede in family order.
    let below: Vec<Vec<usize>> = (0..n)
        .map(|k| (0..k).filter(|&j| family.includes(k, j)).collect())
        .collect();
    let mut out = Vec::new();
    let mut masks = vec![0; n];
    fill(family, &below, 0, &mut masks, &mut out, limit)?;
    Ok(out)
}

fn fill(
    family: &ContextFamily,
    below: &[Vec<usize>],
    k: usize,
    masks: &mut Vec<AtomMask>,
    out: &mut Vec<Section>,
    limit: usize,
) -> Result<()> {
    if k == masks.len() {
        if out.len() == limit {
            return Err(Error::BoundExceeded {
                what: "L_QM sections",
                bound: limit,
                needed: limit + 1,
            });
        }
        out.push(Section { masks: masks.clone() });
        return Ok(());
    }
    let floor = below[k].iter().fold(0, |m, &j| m | family.lift(k, j, masks[j]));
    let full = family.context(k).full_mask();
    for m in floor..=full {
        if m & floor == floor {
            masks[k] = m;
            fill(family, below, k + 1, masks, out, limit)?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct LemReport {
    pub section_count: usize,
    /// Sections with `S ∨ ¬S = ⊤`.
    pub excluded_middle: Vec<Section>,
    /// Sections with `S = ⊤` or `¬S = ⊤`.
    pub top_or_negation_top: Vec<Section>,
    /// `S(C1) = 1` iff `S = ⊤`, over all sections.
    pub trivial_context_characterises_top: bool,
}

impl LemReport {
    pub fn sets_agree(&self) -> bool {
        self.excluded_middle == self.top_or_negation_top
    }

    pub fn only_top_and_bottom(&self, family: &ContextFamily) -> bool {
        let (top, bottom) = (Section::top(family), Section::bottom(family));
        self.excluded_middle.iter().all(|s| *s == top || *s == bottom)
    }

    pub fn passed(&self) -> bool {
        self.sets_agree() && self.trivial_context_characterises_top
    }
}

/// Exhaustive excluded-middle audit over all sections.
pub fn lem_audit(family: &ContextFamily, limit: usize) -> Result<LemReport> {
    let sections = enumerate_sections(family, limit)?;
    let top = Section::top(family);
    let c1 = family.trivial();
    let mut excluded_middle = Vec::new();
    let mut top_or_negation_top = Vec::new();
    let mut characterises = true;
    for s in &sections {
        let neg = negate(family, s);
        if lqm_join(s, &neg) == top {
            excluded_middle.push(s.clone());
        }
        if *s == top || neg == top {
            top_or_negation_top.push(s.clone());
        }
        if (s.get(c1) == family.context(c1).full_mask()) != (*s == top) {
            characterises = false;
        }
    }
    Ok(LemReport {
        section_count: sections.len(),
        excluded_middle,
        top_or_negation_top,
        trivial_context_characterises_top: characterises,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::slattice::{all_elements, sqm_join, sqm_leq, sqm_meet};

    fn zx() -> ContextFamily {
        qubit_family(vec![az(), ax()])
    }

    fn el(f: &ContextFamily, name: &str, p: &crate::matrix::Projection) -> SqmElement {
        SqmElement::from_projection(f, f.index_by_name(name).unwrap(), p).unwrap()
    }

    fn section(f: &ContextFamily, values: &[(&str, crate::matrix::Projection)]) -> Section {
        let mut masks = vec![0; f.len()];
        for (name, p) in values {
            let k = f.index_by_name(name).unwrap();
            masks[k] = f.context(k).mask_of(p).unwrap();
        }
        Section::new(f, masks).unwrap()
    }

    #[test]
    fn section_counts() {
        assert_eq!(enumerate_sections(&qubit_family(vec![]), 100).unwrap().len(), 2);
        assert_eq!(enumerate_sections(&qubit_family(vec![az()]), 100).unwrap().len(), 5);
        assert_eq!(enumerate_sections(&zx(), 100).unwrap().len(), 17);
        assert!(matches!(
            enumerate_sections(&zx(), 16),
            Err(Error::BoundExceeded { .. })
        ));
    }

    #[test]
    fn enumerated_sections_are_valid_and_sorted() {
        let f = zx();
        let all = enumerate_sections(&f, 100).unwrap();
        for s in &all {
            Section::new(&f, s.masks.clone()).unwrap();
        }
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, all);
    }

    #[test]
    fn section_invariants_enforced() {
        let f = zx();
        let c1 = f.trivial();
        let mut masks = vec![0; f.len()];
        masks[c1] = 1;
        assert!(matches!(Section::new(&f, masks), Err(Error::InvalidSection(_))));
        assert!(Section::new(&f, vec![0; 2]).is_err());
    }

    #[test]
    fn meet_join_examples() {
        let f = zx();
        let s = embed_i(&f, el(&f, "Az", &pz(1)));
        assert_eq!(lqm_meet(&Section::top(&f), &s), s);
        let j = lqm_join(&embed_i(&f, el(&f, "Az", &pz(1))), &embed_i(&f, el(&f, "Az", &pz(-1))));
        assert_eq!(j, embed_i(&f, SqmElement::whole(&f, f.index_by_name("Az").unwrap())));
        let z1 = SqmElement::whole(&f, f.index_by_name("Az").unwrap());
        let x1 = SqmElement::whole(&f, f.index_by_name("Ax").unwrap());
        let j = lqm_join(&embed_i(&f, z1), &embed_i(&f, x1));
        let identity = crate::matrix::Projection::identity(2);
        assert_eq!(j, section(&f, &[("Az", identity.clone()), ("Ax", identity)]));
        assert!(j.leq(&Section::top(&f)) && j != Section::top(&f));
    }

    #[test]
    fn embedding_examples() {
        let f = zx();
        assert_eq!(embed_i(&f, el(&f, "Az", &pz(1))), section(&f, &[("Az", pz(1))]));
        assert_eq!(embed_i(&f, SqmElement::top(&f)), Section::top(&f));
        assert_eq!(embed_i(&f, SqmElement::Bottom), Section::bottom(&f));
    }

    #[test]
    fn decompose_examples() {
        let f = zx();
        assert!(decompose(&Section::bottom(&f)).is_empty());
        let a = el(&f, "Az", &pz(1));
        assert_eq!(decompose(&embed_i(&f, a)), vec![a]);
        let z1 = SqmElement::whole(&f, f.index_by_name("Az").unwrap());
        let x1 = SqmElement::whole(&f, f.index_by_name("Ax").unwrap());
        let j = lqm_join(&embed_i(&f, z1), &embed_i(&f, x1));
        let mut parts = decompose(&j);
        parts.sort();
        let mut expected = vec![z1, x1];
        expected.sort();
        assert_eq!(parts, expected);
    }

    #[test]
    fn decompose_includes_finer_contexts() {
        let bell = bell_family();
        let a1 = bell.index_by_name("A1").unwrap();
        let a = SqmElement::prop(a1, 1);
        let parts = decompose(&embed_i(&bell, a));
        // A1 plus the two joint contexts refining it
        assert_eq!(parts.len(), 3);
        let rejoined = join_all(&bell, &parts.iter().map(|&p| embed_i(&bell, p)).collect::<Vec<_>>());
        assert_eq!(rejoined, embed_i(&bell, a));
    }

    #[test]
    fn implication_examples() {
        let f = zx();
        let s = embed_i(&f, el(&f, "Az", &pz(1)));
        assert_eq!(implies(&f, &s, &s), Section::top(&f));
        assert_eq!(implies(&f, &Section::top(&f), &s), s);
        let expected = section(&f, &[("Az", pz(-1)), ("Ax", crate::matrix::Projection::identity(2))]);
        assert_eq!(implies(&f, &s, &Section::bottom(&f)), expected);
        assert_eq!(negate(&f, &s), expected);
        assert_eq!(negation_closed_form(&f, el(&f, "Az", &pz(1))), expected);
    }

    #[test]
    fn negation_of_extremes() {
        let f = zx();
        assert_eq!(negate(&f, &Section::bottom(&f)), Section::top(&f));
        assert_eq!(negate(&f, &Section::top(&f)), Section::bottom(&f));
        assert_eq!(negate(&f, &embed_i(&f, SqmElement::top(&f))), Section::bottom(&f));
    }

    #[test]
    fn lem_examples() {
        let r = lem_audit(&zx(), 100).unwrap();
        assert_eq!(r.section_count, 17);
        assert_eq!(r.excluded_middle.len(), 2);
        assert!(r.passed() && r.only_top_and_bottom(&zx()));
        let f = qubit_family(vec![]);
        let r = lem_audit(&f, 100).unwrap();
        assert_eq!(r.excluded_middle.len(), 2);
        let f = qubit_family(vec![az()]);
        let r = lem_audit(&f, 100).unwrap();
        assert_eq!(r.section_count, 5);
        assert_eq!(r.excluded_middle, vec![Section::bottom(&f), Section::top(&f)]);
    }

    #[test]
    fn embedding_laws_on_three_axes() {
        let f = qubit_family(vec![az(), ax(), ay()]);
        let elements = all_elements(&f, 1000).unwrap();
        let mut strict = 0;
        for &a in &elements {
            for &b in &elements {
                let (ia, ib) = (embed_i(&f, a), embed_i(&f, b));
                assert_eq!(sqm_leq(&f, a, b), ia.leq(&ib));
                assert_eq!(lqm_meet(&ia, &ib), embed_i(&f, sqm_meet(&f, a, b)));
                let joined = lqm_join(&ia, &ib);
                let ij = embed_i(&f, sqm_join(&f, a, b));
                assert!(joined.leq(&ij));
                let same_context = match (a, b) {
                    (SqmElement::Prop { context: c1, .. }, SqmElement::Prop { context: c2, .. }) => c1 == c2,
                    _ => true,
                };
                if same_context || sqm_leq(&f, a, b) || sqm_leq(&f, b, a) {
                    assert_eq!(joined, ij);
                } else if joined != ij {
                    strict += 1;
                }
            }
        }
        assert!(strict > 0);
    }

    #[test]
    fn render_lists_each_context() {
        let f = zx();
        let s = embed_i(&f, el(&f, "Az", &pz(1)));
        let text = s.render(&f, false);
        assert_eq!(text.lines().count(), 3);
        assert!(s.render(&f, true).contains("[[1,0],[0,0]]"));
    }
}
