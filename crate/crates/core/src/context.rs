//! Abelian algebras as atomic decompositions, and finite closed families of them.
//!
//! A [`Context`] stores the atoms of its algebra; every other element of its
//! Boolean projection lattice is a subset-sum of atoms and is handled as an
//! [`AtomMask`] (bit `k` set means atom `k` is included).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::matrix::{commutes, Projection};
use crate::scalar::Rational;

pub type AtomMask = u32;

/// Largest number of atoms a context may have (masks are `u32`).
pub const MAX_ATOMS: usize = 32;
/// `lattice_elements` refuses contexts with more atoms than this.
pub const MAX_LATTICE_ATOMS: usize = 20;

pub fn full_mask(d: usize) -> AtomMask {
    if d >= 32 {
        u32::MAX
    } else {
        (1u32 << d) - 1
    }
}

pub fn mask_bits(mask: AtomMask) -> impl Iterator<Item = usize> {
    (0..32).filter(move |k| mask >> k & 1 == 1)
}

/// Renders a mask as a string of `d` digits, atom 0 first.
pub fn format_mask(mask: AtomMask, d: usize) -> String {
    (0..d).map(|k| if mask >> k & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_mask(text: &str, d: usize) -> Result<AtomMask> {
    if text.len() != d || !text.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::Usage(format!("atom mask {text:?} must be {d} binary digits")));
    }
    Ok(text
        .bytes()
        .enumerate()
        .fold(0, |m, (k, b)| if b == b'1' { m | 1 << k } else { m }))
}

/// An Abelian projection algebra given by its atoms.
#[derive(Clone, Debug)]
pub struct Context {
    atoms: Vec<Projection>,
    name: Option<String>,
}

impl Context {
    /// Validates and canonically orders `atoms`: nonzero, pairwise orthogonal, summing to 1.
    pub fn new(mut atoms: Vec<Projection>, name: Option<String>) -> Result<Self> {
        let Some(first) = atoms.first() else {
            return Err(Error::InvalidContext("a context needs at least one atom".into()));
        };
        let dim = first.dim();
        if atoms.len() > MAX_ATOMS {
            return Err(Error::BoundExceeded {
                what: "atoms per context",
                bound: MAX_ATOMS,
                needed: atoms.len(),
            });
        }
        for (k, a) in atoms.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.dim(),
                });
            }
            if a.is_zero() {
                return Err(Error::InvalidContext(format!("atom {k} is zero")));
            }
            for (j, b) in atoms.iter().enumerate().skip(k + 1) {
                if !a.is_orthogonal_to(b) {
                    return Err(Error::InvalidContext(format!(
                        "atoms {k} and {j} are not orthogonal: {a} and {b}"
                    )));
                }
            }
        }
        if !Projection::sum(dim, &atoms).is_identity() {
            return Err(Error::InvalidContext("atoms do not sum to the identity".into()));
        }
        atoms.sort();
        Ok(Self { atoms, name })
    }

    /// The trivial algebra C1.
    pub fn trivial(dim: usize) -> Self {
        Self {
            atoms: vec![Projection::identity(dim)],
            name: Some("C1".into()),
        }
    }

    pub fn atoms(&self) -> &[Projection] {
        &self.atoms
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].dim()
    }

    /// Number of atoms.
    pub fn d(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.d() == 1
    }

    pub fn full_mask(&self) -> AtomMask {
        full_mask(self.d())
    }

    /// The lattice element with the given atoms.
    pub fn element(&self, mask: AtomMask) -> Projection {
        Projection::sum(self.dim(), mask_bits(mask).map(|k| &self.atoms[k]))
    }

    /// Mask of `p` if `p` belongs to this context's lattice.
    pub fn mask_of(&self, p: &Projection) -> Option<AtomMask> {
        let mask = self
            .atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_below(p))
            .fold(0, |m, (k, _)| m | 1 << k);
        (self.element(mask) == *p).then_some(mask)
    }

    /// True iff every atom of `other` is a sum of atoms of `self` (self ⊇ other).
    pub fn includes(&self, other: &Context) -> bool {
        self.dim() == other.dim() && other.atoms.iter().all(|r| self.mask_of(r).is_some())
    }

    /// For `self ⊇ coarse`, the mask in `self` of each atom of `coarse`.
    pub fn refinement_of(&self, coarse: &Context) -> Option<Vec<AtomMask>> {
        coarse.atoms.iter().map(|r| self.mask_of(r)).collect()
    }

    pub fn commutes_with(&self, other: &Context) -> bool {
        self.atoms.iter().all(|a| other.atoms.iter().all(|b| commutes(a, b)))
    }

    /// The algebra `self ∩ other`: one atom per connected component of the
    /// graph joining overlapping atoms of the two contexts.
    pub fn intersect(&self, other: &Context) -> Context {
        let (n, m) = (self.d(), other.d());
        let mut uf = UnionFind::<usize>::new(n + m);
        for (i, q) in self.atoms.iter().enumerate() {
            for (j, r) in other.atoms.iter().enumerate() {
                if q.overlaps(r) {
                    uf.union(i, n + j);
                }
            }
        }
        let mut components: BTreeMap<usize, AtomMask> = BTreeMap::new();
        for i in 0..n {
            *components.entry(uf.find(i)).or_default() |= 1 << i;
        }
        let atoms = components.values().map(|&mask| self.element(mask)).collect();
        Context::new(atoms, None).expect("components partition the identity")
    }

    /// All `2^d` lattice elements in canonical order.
    pub fn lattice_elements(&self) -> Result<Vec<Projection>> {
        if self.d() > MAX_LATTICE_ATOMS {
            return Err(Error::BoundExceeded {
                what: "context atoms",
                bound: MAX_LATTICE_ATOMS,
                needed: self.d(),
            });
        }
        let mut all: Vec<Projection> = (0..=full_mask(self.d())).map(|m| self.element(m)).collect();
        all.sort();
        Ok(all)
    }

    /// Atoms overlapping `r`: the mask of the least lattice element above `r`.
    pub fn smallest_above_mask(&self, r: &Projection) -> AtomMask {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, q)| q.overlaps(r))
            .fold(0, |m, (k, _)| m | 1 << k)
    }

    pub fn smallest_above(&self, r: &Projection) -> Projection {
        self.element(self.smallest_above_mask(r))
    }
}

impl PartialEq for Context {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

impl Eq for Context {}

impl Hash for Context {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.atoms.hash(state);
    }
}

impl Ord for Context {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d().cmp(&other.d()).then_with(|| self.atoms.cmp(&other.atoms))
    }
}

impl PartialOrd for Context {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The algebra generated by pairwise-commuting projections: the nonzero
/// products obtained by refining with each projection or its complement.
pub fn make_context(dim: usize, projections: &[Projection]) -> Result<Context> {
    for (i, p) in projections.iter().enumerate() {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        for (j, q) in projections.iter().enumerate().skip(i + 1) {
            if !commutes(p, q) {
                return Err(Error::NonCommuting { first: i, second: j });
            }
        }
    }
    let mut atoms = vec![Projection::identity(dim)];
    for p in projections {
        let pc = p.complement();
        atoms = atoms
            .iter()
            .flat_map(|x| [x.product(p), x.product(&pc)])
            .filter(|a| !a.is_zero())
            .collect();
    }
    Context::new(atoms, None)
}

/// Algebra generated by two commuting contexts.
pub fn generated(a: &Context, b: &Context) -> Result<Context> {
    let gens: Vec<Projection> = a.atoms.iter().chain(&b.atoms).cloned().collect();
    make_context(a.dim(), &gens)
}

/// An observable supplied pre-diagonalised.
#[derive(Clone, Debug)]
pub struct Observable {
    spectrum: Vec<(Rational, Projection)>,
    context: Context,
}

impl Observable {
    pub fn new(spectrum: Vec<(Rational, Projection)>) -> Result<Self> {
        for (i, (a, _)) in spectrum.iter().enumerate() {
            if spectrum[i + 1..].iter().any(|(b, _)| a == b) {
                return Err(Error::RepeatedEigenvalue);
            }
        }
        let context = Context::new(spectrum.iter().map(|(_, p)| p.clone()).collect(), None)?;
        Ok(Self { spectrum, context })
    }

    pub fn spectrum(&self) -> &[(Rational, Projection)] {
        &self.spectrum
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    /// The spectral projection for `delta`; zero when `delta` misses the spectrum.
    pub fn spectral_event(&self, delta: &[Rational]) -> Projection {
        let dim = self.context.dim();
        Projection::sum(
            dim,
            self.spectrum.iter().filter(|(v, _)| delta.contains(v)).map(|(_, p)| p),
        )
    }

    /// The atom mask (in this observable's context) of the spectral projection.
    pub fn spectral_mask(&self, delta: &[Rational]) -> AtomMask {
        let p = self.spectral_event(delta);
        self.context
            .mask_of(&p)
            .expect("spectral projections lie in the generated lattice")
    }
}

/// A finite family of contexts closed under intersection and under the
/// generated algebra of commuting pairs, with relation tables precomputed.
#[derive(Clone, Debug)]
pub struct ContextFamily {
    dim: usize,
    contexts: Vec<Context>,
    includes: Vec<Vec<bool>>,
    commute: Vec<Vec<bool>>,
    /// `refine[fine][coarse]`: mask in `fine` of each atom of `coarse`, when `fine ⊇ coarse`.
    refine: Vec<Vec<Option<Vec<AtomMask>>>>,
    meet: Vec<Vec<usize>>,
    generated: Vec<Vec<Option<usize>>>,
}

pub const DEFAULT_MAX_FAMILY: usize = 256;

impl ContextFamily {
    /// Builds a family from contexts that must already be closed.
    pub fn new(dim: usize, contexts: Vec<Context>) -> Result<Self> {
        let mut contexts = dedup_named(contexts);
        for c in &contexts {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.dim(),
                });
            }
        }
        contexts.sort();
        let n = contexts.len();
        if !contexts.iter().any(Context::is_trivial) {
            return Err(Error::NotClosed("the trivial context C1 is missing".into()));
        }
        let index_of = |c: &Context| contexts.iter().position(|x| x == c);
        let mut includes = vec![vec![false; n]; n];
        let mut refine = vec![vec![None; n]; n];
        let mut commute = vec![vec![false; n]; n];
        let mut meet = vec![vec![0; n]; n];
        let mut gen = vec![vec![None; n]; n];
        for a in 0..n {
            for b in 0..n {
                refine[a][b] = contexts[a].refinement_of(&contexts[b]);
                includes[a][b] = refine[a][b].is_some();
            }
        }
        for a in 0..n {
            for b in a..n {
                let cap = contexts[a].intersect(&contexts[b]);
                let k = index_of(&cap).ok_or_else(|| {
                    Error::NotClosed(format!(
                        "intersection of {} and {} is missing",
                        label(&contexts[a], a),
                        label(&contexts[b], b)
                    ))
                })?;
                meet[a][b] = k;
                meet[b][a] = k;
                let c = contexts[a].commutes_with(&contexts[b]);
                commute[a][b] = c;
                commute[b][a] = c;
                if c {
                    let g = generated(&contexts[a], &contexts[b])?;
                    let k = index_of(&g).ok_or_else(|| {
                        Error::NotClosed(format!(
                            "algebra generated by {} and {} is missing",
                            label(&contexts[a], a),
                            label(&contexts[b], b)
                        ))
                    })?;
                    gen[a][b] = Some(k);
                    gen[b][a] = Some(k);
                }
            }
        }
        let mut unnamed = 0;
        for c in contexts.iter_mut() {
            if c.name.is_none() {
                c.name = Some(format!("ctx{unnamed}"));
                unnamed += 1;
            }
        }
        Ok(Self {
            dim,
            contexts,
            includes,
            commute,
            refine,
            meet,
            generated: gen,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn context(&self, k: usize) -> &Context {
        &self.contexts[k]
    }

    pub fn name(&self, k: usize) -> &str {
        self.contexts[k].name().expect("family contexts are named")
    }

    pub fn d(&self, k: usize) -> usize {
        self.contexts[k].d()
    }

    pub fn trivial(&self) -> usize {
        self.contexts
            .iter()
            .position(Context::is_trivial)
            .expect("closed family contains C1")
    }

    pub fn index_of(&self, c: &Context) -> Option<usize> {
        self.contexts.iter().position(|x| x == c)
    }

    pub fn index_by_name(&self, name: &str) -> Result<usize> {
        (0..self.len())
            .find(|&k| self.name(k) == name)
            .ok_or_else(|| Error::UnknownContext(name.into()))
    }

    /// `includes(a, b)`: `a ⊇ b` as algebras.
    pub fn includes(&self, a: usize, b: usize) -> bool {
        self.includes[a][b]
    }

    pub fn commutes(&self, a: usize, b: usize) -> bool {
        self.commute[a][b]
    }

    pub fn intersect(&self, a: usize, b: usize) -> usize {
        self.meet[a][b]
    }

    /// Index of the algebra generated by `a` and `b`, when they commute.
    pub fn generated(&self, a: usize, b: usize) -> Option<usize> {
        self.generated[a][b]
    }

    /// Re-expresses a mask of `coarse` as a mask of `fine` (requires `fine ⊇ coarse`).
    pub fn lift(&self, fine: usize, coarse: usize, mask: AtomMask) -> AtomMask {
        let table = self.refine[fine][coarse].as_ref().expect("lift requires inclusion");
        mask_bits(mask).fold(0, |m, k| m | table[k])
    }

    /// Least element of `L(coarse)` above the element `mask` of `L(fine)`
    /// (requires `fine ⊇ coarse`).
    pub fn cover(&self, coarse: usize, fine: usize, mask: AtomMask) -> AtomMask {
        let table = self.refine[fine][coarse].as_ref().expect("cover requires inclusion");
        table
            .iter()
            .enumerate()
            .filter(|(_, &t)| t & mask != 0)
            .fold(0, |m, (k, _)| m | 1 << k)
    }

    /// Whether element `m1` of `L(a)` is below element `m2` of `L(b)` as projections.
    pub fn proj_le(&self, a: usize, m1: AtomMask, b: usize, m2: AtomMask) -> bool {
        if self.includes(a, b) {
            return m1 & !self.lift(a, b, m2) == 0;
        }
        if self.includes(b, a) {
            let l1 = self.lift(b, a, m1);
            return l1 & !m2 == 0;
        }
        self.contexts[a].element(m1).is_below(&self.contexts[b].element(m2))
    }

    /// Contexts with no strictly finer member in the family.
    pub fn maximal(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&a| (0..self.len()).all(|b| b == a || !self.includes(b, a)))
            .collect()
    }

    /// Offsets of each context's atoms in the global exclusive-atom numbering.
    pub fn atom_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.len() + 1);
        let mut total = 0;
        for c in &self.contexts {
            offsets.push(total);
            total += c.d();
        }
        offsets.push(total);
        offsets
    }

    pub fn exclusive_atom_count(&self) -> usize {
        self.contexts.iter().map(Context::d).sum()
    }
}

fn label(c: &Context, k: usize) -> String {
    c.name().map(str::to_string).unwrap_or_else(|| format!("#{k}"))
}

/// Removes duplicates, keeping the first name seen for each algebra.
fn dedup_named(contexts: Vec<Context>) -> Vec<Context> {
    let mut out: Vec<Context> = Vec::new();
    for c in contexts {
        match out.iter_mut().find(|x| **x == c) {
            Some(existing) => {
                if existing.name.is_none() {
                    existing.name = c.name;
                }
            }
            None => out.push(c),
        }
    }
    out
}

/// Least superset of `seed` containing C1 and closed under intersection and
/// generated algebras of commuting pairs. Derived contexts are named
/// `cap(a,b)` and `alg(a,b)` after the pair that first produced them.
pub fn close_family(dim: usize, seed: Vec<Context>, max_size: usize) -> Result<ContextFamily> {
    let mut current = dedup_named(seed);
    for c in &current {
        if c.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c.dim(),
            });
        }
    }
    let mut named = 0;
    for c in current.iter_mut() {
        if c.name.is_none() {
            c.name = Some(format!("ctx{named}"));
            named += 1;
        }
    }
    if !current.iter().any(Context::is_trivial) {
        current.push(Context::trivial(dim));
    }
    loop {
        current.sort();
        let mut fresh: Vec<Context> = Vec::new();
        for a in 0..current.len() {
            for b in a + 1..current.len() {
                let (x, y) = (&current[a], &current[b]);
                let mut candidates = vec![x
                    .intersect(y)
                    .with_name(format!("cap({},{})", label(x, a), label(y, b)))];
                if x.commutes_with(y) {
                    candidates.push(generated(x, y)?.with_name(format!("alg({},{})", label(x, a), label(y, b))));
                }
                for c in candidates {
                    if !current.contains(&c) && !fresh.contains(&c) {
                        fresh.push(c);
                    }
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        current.extend(fresh);
        if current.len() > max_size {
            return Err(Error::BoundExceeded {
                what: "context family",
                bound: max_size,
                needed: current.len(),
            });
        }
    }
    ContextFamily::new(dim, current)
}
