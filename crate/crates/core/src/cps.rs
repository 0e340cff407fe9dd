//! Rényi conditional probability spaces on the exclusive-atom space: axiom
//! checks, the Born CPS, generating measure families and their audits, the
//! full extension, non-contextuality, and counterexample models.
//!
//! Every probability function here is atomic: for each condition `C` there are
//! weights `w_C(e)` on exclusive atoms and `P(F|C) = Σ_{e ∈ F} w_C(e)`.
//! Additivity is therefore structural and the axiom checks reduce to finite
//! conditions on weights; [`check_axioms_brute`] verifies that reduction
//! literally on small spaces.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use num_traits::{One, Signed, Zero};

use crate::clqm::{all_events, c_of_i, exclusive_atoms, Event};
use crate::context::{format_mask, mask_bits, ContextFamily};
use crate::error::{Error, Result};
use crate::matrix::{DensityOperator, QMatrix};
use crate::scalar::{format_rational, Rational};
use crate::slattice::SqmElement;

/// Largest universe on which exhaustive event sweeps are attempted.
pub const MAX_SWEEP_BITS: usize = 20;

/// A conditional probability function given by atom weights per condition.
pub trait Cps {
    fn universe_len(&self) -> usize;

    /// `w_C`, or `None` when `c` is not a condition.
    fn weights(&self, c: &Event) -> Option<Vec<Rational>>;

    fn is_condition(&self, c: &Event) -> bool {
        self.weights(c).is_some()
    }

    fn prob(&self, f: &Event, c: &Event) -> Option<Rational> {
        self.weights(c).map(|w| weight_of(&w, f))
    }
}

fn weight_of(w: &[Rational], f: &Event) -> Rational {
    f.iter().fold(Rational::zero(), |acc, i| acc + &w[i])
}

/// A CPS with an explicit, finite list of conditions.
#[derive(Clone, Debug)]
pub struct ConditionalModel {
    len: usize,
    conditions: Vec<Event>,
    weights: Vec<Vec<Rational>>,
    lookup: HashMap<Event, usize>,
}

impl ConditionalModel {
    /// Conditions must be nonempty and distinct; weights are not checked here.
    pub fn new(len: usize, entries: Vec<(Event, Vec<Rational>)>) -> Result<Self> {
        let mut model = Self {
            len,
            conditions: Vec::new(),
            weights: Vec::new(),
            lookup: HashMap::new(),
        };
        for (c, w) in entries {
            if c.universe_len() != len || w.len() != len {
                return Err(Error::Invariant("condition or weights over the wrong universe".into()));
            }
            if c.is_empty() {
                return Err(Error::NotACondition);
            }
            if model.lookup.insert(c.clone(), model.conditions.len()).is_some() {
                return Err(Error::Invariant("duplicate condition".into()));
            }
            model.conditions.push(c);
            model.weights.push(w);
        }
        Ok(model)
    }

    pub fn conditions(&self) -> &[Event] {
        &self.conditions
    }

    pub fn condition_weights(&self, k: usize) -> &[Rational] {
        &self.weights[k]
    }

    pub fn is_additive(&self) -> bool {
        self.conditions
            .iter()
            .all(|a| self.conditions.iter().all(|b| self.lookup.contains_key(&a.union(b))))
    }
}

impl Cps for ConditionalModel {
    fn universe_len(&self) -> usize {
        self.len
    }

    fn weights(&self, c: &Event) -> Option<Vec<Rational>> {
        self.lookup.get(c).map(|&k| self.weights[k].clone())
    }

    fn is_condition(&self, c: &Event) -> bool {
        self.lookup.contains_key(c)
    }
}

/// Per-atom data shared by the Born constructions.
#[derive(Clone, Debug)]
pub struct AtomTable {
    /// `d` of each atom's context.
    pub dims: Vec<usize>,
    /// `Tr(ρ P)` for each atom.
    pub traces: Vec<Rational>,
    /// Atoms with equal projection matrices share an id.
    pub projection_ids: Vec<usize>,
    /// Context index of each atom.
    pub contexts: Vec<usize>,
}

impl AtomTable {
    pub fn new(family: &ContextFamily, rho: &DensityOperator) -> Result<Self> {
        if rho.dim() != family.dim() {
            return Err(Error::DimensionMismatch {
                expected: family.dim(),
                found: rho.dim(),
            });
        }
        let atoms = exclusive_atoms(family);
        let mut ids: BTreeMap<&QMatrix, usize> = BTreeMap::new();
        let mut projection_ids = Vec::new();
        for a in &atoms {
            let m = family.context(a.context).atoms()[a.atom].matrix();
            let next = ids.len();
            projection_ids.push(*ids.entry(m).or_insert(next));
        }
        Ok(Self {
            dims: atoms.iter().map(|a| family.d(a.context)).collect(),
            traces: atoms
                .iter()
                .map(|a| rho.expectation(&family.context(a.context).atoms()[a.atom]))
                .collect(),
            projection_ids,
            contexts: atoms.iter().map(|a| a.context).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }
}

/// `d(F)`: the number of atoms of the coarsest context met by `F`.
pub fn dim_of_event(family: &ContextFamily, f: &Event) -> Result<usize> {
    f.atoms(family)
        .iter()
        .map(|a| family.d(a.context))
        .min()
        .ok_or(Error::EmptyEvent)
}

/// `F_A = c∘i(A, 1)`.
pub fn measurement_condition(family: &ContextFamily, context: usize) -> Event {
    c_of_i(family, SqmElement::whole(family, context))
}

/// `F!_A`: the atoms of `A` alone.
pub fn exclusive_condition(family: &ContextFamily, context: usize) -> Event {
    let mut masks = vec![0; family.len()];
    masks[context] = family.context(context).full_mask();
    Event::from_masks(family, &masks)
}

/// `Σ Tr(ρ P)` over members `(A!, P)` of `f`, evaluated on projection matrices.
pub fn born_conditional(family: &ContextFamily, rho: &DensityOperator, f: &Event, context: usize) -> Rational {
    let mask = f.masks(family)[context];
    rho.expectation(&family.context(context).element(mask))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BornConditions {
    /// `F_A`: context `A` or something finer was measured.
    Measurement,
    /// `F!_A`: exactly `A` was measured.
    Exclusive,
}

/// The Born CPS with one condition per context.
pub fn born_cps(family: &ContextFamily, rho: &DensityOperator, kind: BornConditions) -> Result<ConditionalModel> {
    let table = AtomTable::new(family, rho)?;
    let entries = (0..family.len())
        .map(|k| {
            let c = match kind {
                BornConditions::Measurement => measurement_condition(family, k),
                BornConditions::Exclusive => exclusive_condition(family, k),
            };
            let w = (0..table.len())
                .map(|i| {
                    if table.contexts[i] == k {
                        table.traces[i].clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            (c, w)
        })
        .collect();
    ConditionalModel::new(table.len(), entries)
}

#[derive(Clone, Debug, Default)]
pub struct AxiomReport {
    pub conditions: usize,
    /// Condition pairs `(C, D)` with `D ⊆ C` examined for the product rule.
    pub pairs: usize,
    pub axiom1_failures: Vec<String>,
    pub axiom2_failures: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.axiom1_failures.is_empty() && self.axiom2_failures.is_empty()
    }
}

/// Both axioms, exhaustively, via the weight reduction.
///
/// Axiom 1 holds iff every `w_C` is nonnegative with total 1. For axiom 2 put
/// `D = B ∩ C`, so `B = D ∪ E` with `E` outside `C`; only the part of `E` in
/// `supp(w_C)` matters, and the identity must hold atom by atom:
/// `w_C(e)[e ∈ B] = w_D(e) P(B|C)`.
pub fn check_axioms(model: &ConditionalModel) -> Result<AxiomReport> {
    let mut report = AxiomReport {
        conditions: model.conditions.len(),
        ..Default::default()
    };
    for (k, w) in model.weights.iter().enumerate() {
        if let Some(i) = w.iter().position(|x| x.is_negative()) {
            report
                .axiom1_failures
                .push(format!("condition #{k}: negative weight on atom {i}"));
        }
        let total = w.iter().fold(Rational::zero(), |a, x| a + x);
        if !total.is_one() {
            report
                .axiom1_failures
                .push(format!("condition #{k}: total {}", format_rational(&total)));
        }
    }
    for (ci, c) in model.conditions.iter().enumerate() {
        let wc = &model.weights[ci];
        let free: Vec<usize> = (0..model.len).filter(|&e| !wc[e].is_zero() && !c.contains(e)).collect();
        if free.len() > MAX_SWEEP_BITS {
            return Err(Error::BoundExceeded {
                what: "support outside a condition",
                bound: MAX_SWEEP_BITS,
                needed: free.len(),
            });
        }
        for (di, d) in model.conditions.iter().enumerate() {
            if !d.is_subset(c) {
                continue;
            }
            report.pairs += 1;
            let wd = &model.weights[di];
            for bits in 0u64..1 << free.len() {
                let mut b = d.clone();
                for (j, &e) in free.iter().enumerate() {
                    if bits >> j & 1 == 1 {
                        b.insert(e);
                    }
                }
                let pb = weight_of(wc, &b);
                let bad = (0..model.len).find(|&e| {
                    let lhs = if b.contains(e) { wc[e].clone() } else { Rational::zero() };
                    lhs != &wd[e] * &pb
                });
                if let Some(e) = bad {
                    report.axiom2_failures.push(format!("C={c} B={b} fails at atom {e}"));
                    break;
                }
            }
        }
    }
    Ok(report)
}

/// Literal check over all events: additivity for every disjoint pair, unit
/// total, range, and the product rule for every `(A, B, C)` with `C, B ∩ C`
/// conditions. Exponential; meant as an oracle for [`check_axioms`].
pub fn check_axioms_brute(model: &ConditionalModel, max_bits: usize) -> Result<AxiomReport> {
    let n = model.len;
    if n > max_bits {
        return Err(Error::BoundExceeded {
            what: "brute-force axiom universe",
            bound: max_bits,
            needed: n,
        });
    }
    let events = all_events(n, 1 << max_bits)?;
    let full = Event::full(n);
    let mut report = AxiomReport {
        conditions: model.conditions.len(),
        ..Default::default()
    };
    for c in &model.conditions {
        let p: Vec<Rational> = events.iter().map(|f| model.prob(f, c).unwrap()).collect();
        let index = |f: &Event| f.iter().fold(0usize, |m, i| m | 1 << i);
        if !p[index(&full)].is_one() {
            report.axiom1_failures.push(format!("P(Ω|{c}) ≠ 1"));
        }
        for (a, pa) in events.iter().zip(&p) {
            if pa.is_negative() || *pa > Rational::one() {
                report.axiom1_failures.push(format!("P({a}|{c}) out of range"));
            }
            for (b, pb) in events.iter().zip(&p) {
                if a.intersection(b).is_empty() && p[index(&a.union(b))] != pa + pb {
                    report
                        .axiom1_failures
                        .push(format!("P(·|{c}) not additive on {a}, {b}"));
                }
            }
        }
        for b in &events {
            let bc = b.intersection(c);
            if !model.is_condition(&bc) {
                continue;
            }
            report.pairs += 1;
            let pb = &p[index(b)];
            for a in &events {
                let lhs = &p[index(&a.intersection(b))];
                let rhs = model.prob(a, &bc).unwrap() * pb;
                if *lhs != rhs {
                    report.axiom2_failures.push(format!("A={a} B={b} C={c}"));
                }
            }
        }
    }
    Ok(report)
}

/// Largest universe for [`sweep_events`].
pub const MAX_EVENT_SWEEP_BITS: usize = 26;

/// Outcome of a literal sweep over every event.
#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    pub events: u64,
    /// `(C, D)` condition pairs with `D ⊆ C`.
    pub pairs: usize,
    pub checks: u64,
    pub failures: Vec<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Visits every event `A` once, in Gray-code order, and checks for every
/// condition `C` that `0 ≤ P(A|C) ≤ 1` with `P(Ω|C) = 1`, and for every
/// condition pair `D ⊆ C` that `P(A ∩ D|C) = P(A|D) P(D|C)`.
///
/// Sums are kept as integers over a per-condition common denominator, so each
/// step costs one update per condition and pair.
pub fn sweep_events(model: &ConditionalModel, max_bits: usize) -> Result<SweepReport> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::ToPrimitive;

    const MAX_FAILURES: usize = 16;
    let n = model.len;
    if n > max_bits.min(MAX_EVENT_SWEEP_BITS) {
        return Err(Error::BoundExceeded {
            what: "event sweep universe",
            bound: max_bits.min(MAX_EVENT_SWEEP_BITS),
            needed: n,
        });
    }
    let too_large = || Error::Invariant("weights too large for the integer sweep".into());
    let mut den = Vec::new();
    let mut num: Vec<Vec<i128>> = Vec::new();
    for w in &model.weights {
        let d = w.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let row = w
            .iter()
            .map(|x| (x.numer() * (&d / x.denom())).to_i128().ok_or_else(too_large))
            .collect::<Result<Vec<_>>>()?;
        den.push(d.to_i128().ok_or_else(too_large)?);
        num.push(row);
    }
    let mut report = SweepReport::default();
    for (k, row) in num.iter().enumerate() {
        if row.iter().sum::<i128>() != den[k] {
            report.failures.push(format!("P(Ω|{}) ≠ 1", model.conditions[k]));
        }
    }
    // (c, d, membership of d, P(D|C) numerator)
    let mut pairs = Vec::new();
    for (ci, c) in model.conditions.iter().enumerate() {
        for (di, d) in model.conditions.iter().enumerate() {
            if d.is_subset(c) {
                let member: Vec<bool> = (0..n).map(|e| d.contains(e)).collect();
                let pdc: i128 = d.iter().map(|e| num[ci][e]).sum();
                pairs.push((ci, di, member, pdc));
            }
        }
    }
    report.pairs = pairs.len();
    let mut s = vec![0i128; num.len()];
    let mut t = vec![0i128; pairs.len()];
    let mut in_a = vec![false; n];
    let total: u64 = 1 << n;
    for step in 0..total {
        if step > 0 {
            let j = step.trailing_zeros() as usize;
            in_a[j] = !in_a[j];
            let sign = if in_a[j] { 1 } else { -1 };
            for (k, row) in num.iter().enumerate() {
                s[k] += sign * row[j];
            }
            for (p, (ci, _, member, _)) in pairs.iter().enumerate() {
                if member[j] {
                    t[p] += sign * num[*ci][j];
                }
            }
        }
        report.events += 1;
        for (k, &sk) in s.iter().enumerate() {
            report.checks += 1;
            if (sk < 0 || sk > den[k]) && report.failures.len() < MAX_FAILURES {
                report
                    .failures
                    .push(format!("P(A|{}) out of range at step {step}", model.conditions[k]));
            }
        }
        for (p, (ci, di, _, pdc)) in pairs.iter().enumerate() {
            report.checks += 1;
            // t/den_c = (s_d/den_d)(pdc/den_c)
            if t[p] * den[*di] != s[*di] * pdc && report.failures.len() < MAX_FAILURES {
                report.failures.push(format!(
                    "product rule fails for C={} D={} at step {step}",
                    model.conditions[*ci], model.conditions[*di]
                ));
            }
        }
    }
    Ok(report)
}

/// A value in `[0, ∞]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Extended {
    Finite(Rational),
    Infinite,
}

impl Extended {
    pub fn zero() -> Self {
        Self::Finite(Rational::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Finite(x) if x.is_zero())
    }

    /// `0 < x < ∞`.
    pub fn is_proper(&self) -> bool {
        matches!(self, Self::Finite(x) if x.is_positive())
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => Self::Finite(a + b),
            _ => Self::Infinite,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(x) => f.write_str(&format_rational(x)),
            Self::Infinite => f.write_str("∞"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FamilyKind {
    /// `μ_i(F) = δ_{i,d(F)} Σ Tr(ρP)` over distinct projections `P` met at dimension `i`.
    Delta,
    /// `μ_i(F) = ∞` if `F` meets a context with `d < i`, else the member sum at dimension `i`.
    Stratified,
}

/// A family of measures `(μ_i)` indexed by the context dimensions present.
#[derive(Clone, Debug)]
pub struct MeasureFamily {
    kind: FamilyKind,
    table: AtomTable,
    indices: Vec<usize>,
}

impl MeasureFamily {
    pub fn new(family: &ContextFamily, rho: &DensityOperator, kind: FamilyKind) -> Result<Self> {
        let table = AtomTable::new(family, rho)?;
        let mut indices: Vec<usize> = table.dims.clone();
        indices.sort_unstable();
        indices.dedup();
        Ok(Self { kind, table, indices })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// Index set in increasing numeric order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn measure(&self, i: usize, f: &Event) -> Extended {
        let t = &self.table;
        let Some(d) = f.iter().map(|e| t.dims[e]).min() else {
            return Extended::zero();
        };
        match self.kind {
            FamilyKind::Delta => {
                if d != i {
                    return Extended::zero();
                }
                let mut seen: BTreeMap<usize, &Rational> = BTreeMap::new();
                for e in f.iter().filter(|&e| t.dims[e] == i) {
                    seen.insert(t.projection_ids[e], &t.traces[e]);
                }
                Extended::Finite(seen.values().fold(Rational::zero(), |a, &x| a + x))
            }
            FamilyKind::Stratified => {
                if d < i {
                    return Extended::Infinite;
                }
                Extended::Finite(
                    f.iter()
                        .filter(|&e| t.dims[e] == i)
                        .fold(Rational::zero(), |a, e| a + &t.traces[e]),
                )
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct MeasureViolation {
    pub index: usize,
    pub f1: Event,
    pub f2: Event,
    pub union: Extended,
    pub sum: Extended,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IndexOrder {
    Numeric,
    Reverse,
}

#[derive(Clone, Debug)]
pub struct OrderingVerdict {
    pub order: IndexOrder,
    /// `(F, i, j)` with `i` before `j`, `0 < μ_i(F) < ∞` and `μ_j(F) ≠ 0`.
    pub counterexample: Option<(Event, usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct FamilyAudit {
    pub kind: FamilyKind,
    pub events: usize,
    pub measure_violations: Vec<MeasureViolation>,
    pub generation_failures: Vec<String>,
    pub orderings: Vec<OrderingVerdict>,
}

impl FamilyAudit {
    pub fn is_measure(&self) -> bool {
        self.measure_violations.is_empty()
    }

    pub fn generates(&self) -> bool {
        self.generation_failures.is_empty()
    }

    pub fn ordered(&self) -> bool {
        self.orderings.iter().any(|o| o.counterexample.is_none())
    }

    pub fn passed(&self) -> bool {
        self.is_measure() && self.generates() && self.ordered()
    }

    pub fn render(&self, family: &ContextFamily, max_listed: usize) -> String {
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        let mut out = String::new();
        let name = match self.kind {
            FamilyKind::Delta => "delta",
            FamilyKind::Stratified => "stratified",
        };
        writeln!(out, "family\t{name}").unwrap();
        writeln!(out, "events\t{}", self.events).unwrap();
        writeln!(
            out,
            "is-measure\t{}\t{} violations",
            verdict(self.is_measure()),
            self.measure_violations.len()
        )
        .unwrap();
        for v in self.measure_violations.iter().take(max_listed) {
            writeln!(
                out,
                "  mu_{}({} ∪ {}) = {} ≠ {}",
                v.index,
                v.f1.render(family),
                v.f2.render(family),
                v.union,
                v.sum
            )
            .unwrap();
        }
        writeln!(out, "generates\t{}", verdict(self.generates())).unwrap();
        for g in self.generation_failures.iter().take(max_listed) {
            writeln!(out, "  {g}").unwrap();
        }
        for o in &self.orderings {
            let label = match o.order {
                IndexOrder::Numeric => "ordered-numeric",
                IndexOrder::Reverse => "ordered-reverse",
            };
            match &o.counterexample {
                None => writeln!(out, "{label}\tPASS").unwrap(),
                Some((f, i, j)) => {
                    writeln!(out, "{label}\tFAIL\tF={} i={i} j={j}", f.render(family)).unwrap();
                }
            }
        }
        writeln!(out, "dimensionally-ordered\t{}", verdict(self.ordered())).unwrap();
        out
    }
}

/// Audits measure additivity, generation of `model`, and dimensional ordering
/// (`0 < μ_i(F) < ∞` forces `μ_j(F) = 0` for later `j`) in both index orders.
pub fn audit_family(mf: &MeasureFamily, model: &ConditionalModel, event_limit: usize) -> Result<FamilyAudit> {
    let n = model.universe_len();
    let events = all_events(n, event_limit)?;
    let mut measure_violations = Vec::new();
    for &i in mf.indices() {
        let values: Vec<Extended> = events.iter().map(|f| mf.measure(i, f)).collect();
        // Unordered disjoint pairs of nonempty events, smaller bit pattern first.
        for b1 in 1u64..1 << n {
            let rest = !b1 & ((1u64 << n) - 1);
            let mut b2 = rest;
            while b2 != 0 {
                if b1 < b2 {
                    let sum = values[b1 as usize].add(&values[b2 as usize]);
                    let union = &values[(b1 | b2) as usize];
                    if *union != sum {
                        measure_violations.push(MeasureViolation {
                            index: i,
                            f1: events[b1 as usize].clone(),
                            f2: events[b2 as usize].clone(),
                            union: union.clone(),
                            sum,
                        });
                    }
                }
                b2 = (b2 - 1) & rest;
            }
        }
    }
    let mut generation_failures = Vec::new();
    for c in model.conditions() {
        let proper: Vec<usize> = mf
            .indices()
            .iter()
            .copied()
            .filter(|&i| mf.measure(i, c).is_proper())
            .collect();
        if proper.is_empty() {
            generation_failures.push(format!("no index with 0 < mu_i(C) < ∞ for C={c}"));
            continue;
        }
        for &i in &proper {
            let Extended::Finite(mc) = mf.measure(i, c) else {
                unreachable!()
            };
            for f in &events {
                let p = model.prob(f, c).unwrap();
                let ratio = match mf.measure(i, &f.intersection(c)) {
                    Extended::Finite(x) => Some(x / &mc),
                    Extended::Infinite => None,
                };
                if ratio.as_ref() != Some(&p) {
                    generation_failures.push(format!("C={c} i={i} F={f}: P={}", format_rational(&p)));
                    break;
                }
            }
        }
    }
    let orderings = [IndexOrder::Numeric, IndexOrder::Reverse]
        .into_iter()
        .map(|order| {
            let mut idx = mf.indices().to_vec();
            if order == IndexOrder::Reverse {
                idx.reverse();
            }
            let counterexample = events.iter().find_map(|f| {
                idx.iter().enumerate().find_map(|(a, &i)| {
                    if !mf.measure(i, f).is_proper() {
                        return None;
                    }
                    idx[a + 1..]
                        .iter()
                        .find(|&&j| !mf.measure(j, f).is_zero())
                        .map(|&j| (f.clone(), i, j))
                })
            });
            OrderingVerdict { order, counterexample }
        })
        .collect();
    Ok(FamilyAudit {
        kind: mf.kind(),
        events: events.len(),
        measure_violations,
        generation_failures,
        orderings,
    })
}

/// The stratified lexicographic extension: every nonempty `C` whose members at
/// dimension `d(C)` carry positive mass is a condition, and
/// `P(F|C) = m(F ∩ C at d(C)) / m(C)`.
#[derive(Clone, Debug)]
pub struct FullExtension {
    table: AtomTable,
}

impl FullExtension {
    /// Coarsest stratum of `c` and its mass.
    pub fn stratum(&self, c: &Event) -> Option<(usize, Rational)> {
        let t = &self.table;
        let d = c.iter().map(|e| t.dims[e]).min()?;
        let m = c
            .iter()
            .filter(|&e| t.dims[e] == d)
            .fold(Rational::zero(), |a, e| a + &t.traces[e]);
        Some((d, m))
    }

    /// Explicit model on the given candidate conditions; non-conditions are skipped.
    pub fn restrict(&self, candidates: impl IntoIterator<Item = Event>) -> Result<ConditionalModel> {
        let mut entries = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for c in candidates {
            if seen.insert(c.clone()) {
                if let Some(w) = self.weights(&c) {
                    entries.push((c, w));
                }
            }
        }
        ConditionalModel::new(self.table.len(), entries)
    }

    /// Explicit model over every condition of the universe.
    pub fn to_model(&self, event_limit: usize) -> Result<ConditionalModel> {
        self.restrict(all_events(self.table.len(), event_limit)?.into_iter().skip(1))
    }
}

impl Cps for FullExtension {
    fn universe_len(&self) -> usize {
        self.table.len()
    }

    fn weights(&self, c: &Event) -> Option<Vec<Rational>> {
        let (d, m) = self.stratum(c)?;
        if !m.is_positive() {
            return None;
        }
        let t = &self.table;
        Some(
            (0..t.len())
                .map(|e| {
                    if c.contains(e) && t.dims[e] == d {
                        &t.traces[e] / &m
                    } else {
                        Rational::zero()
                    }
                })
                .collect(),
        )
    }
}

pub fn extend_full(family: &ContextFamily, rho: &DensityOperator) -> Result<FullExtension> {
    Ok(FullExtension {
        table: AtomTable::new(family, rho)?,
    })
}

/// The closure of `{F_A}` under finite unions.
pub fn union_closure(seed: &[Event], limit: usize) -> Result<Vec<Event>> {
    let mut out: Vec<Event> = Vec::new();
    let mut frontier: Vec<Event> = seed.to_vec();
    let mut seen = std::collections::HashSet::new();
    while let Some(e) = frontier.pop() {
        if !seen.insert(e.clone()) {
            continue;
        }
        if seen.len() > limit {
            return Err(Error::BoundExceeded {
                what: "union closure",
                bound: limit,
                needed: seen.len(),
            });
        }
        for s in seed {
            frontier.push(e.union(s));
        }
        out.push(e);
    }
    out.sort_by(|a, b| a.iter().cmp(b.iter()));
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Reading {
    /// Exclusive events `{(A!, Q) : Q ∈ L0(A), Q <= P}`, singletons for atoms.
    Literal,
    /// `c∘i(A, P)`.
    Event,
}

impl Reading {
    pub fn name(self) -> &'static str {
        match self {
            Reading::Literal => "literal",
            Reading::Event => "event",
        }
    }
}

/// The event that stands for "A measured, outcome in P" under a reading.
pub fn proposition_event(family: &ContextFamily, a: SqmElement, reading: Reading) -> Event {
    match (reading, a) {
        (_, SqmElement::Bottom) => Event::empty(family.exclusive_atom_count()),
        (Reading::Event, _) => c_of_i(family, a),
        (Reading::Literal, SqmElement::Prop { context, mask }) => {
            let mut masks = vec![0; family.len()];
            masks[context] = mask;
            Event::from_masks(family, &masks)
        }
    }
}

#[derive(Clone, Debug)]
pub struct NoncontextualityReport {
    pub reading: Reading,
    pub context_independence_checked: usize,
    pub context_independence_failures: Vec<String>,
    pub subalgebra_independence_checked: usize,
    pub subalgebra_independence_failures: Vec<String>,
    pub well_defined_failures: Vec<String>,
    /// The extracted `P_QM`, one entry per distinct projection, by matrix order.
    pub extracted: Vec<(QMatrix, Rational)>,
    pub unit_ok: bool,
    pub additivity_checked: usize,
    pub additivity_failures: Vec<String>,
    pub born_failures: Vec<String>,
}

impl NoncontextualityReport {
    pub fn passed(&self) -> bool {
        self.context_independence_failures.is_empty()
            && self.subalgebra_independence_failures.is_empty()
            && self.well_defined_failures.is_empty()
            && self.unit_ok
            && self.additivity_failures.is_empty()
            && self.born_failures.is_empty()
    }

    pub fn render(&self, max_listed: usize) -> String {
        let verdict = |v: &[String]| if v.is_empty() { "PASS" } else { "FAIL" };
        let mut out = String::new();
        writeln!(out, "reading\t{}", self.reading.name()).unwrap();
        let mut section = |label: &str, checked: Option<usize>, fails: &[String]| {
            match checked {
                Some(n) => writeln!(out, "{label}\t{}\t{n} checked\t{} failed", verdict(fails), fails.len()).unwrap(),
                None => writeln!(out, "{label}\t{}\t{} failed", verdict(fails), fails.len()).unwrap(),
            }
            for f in fails.iter().take(max_listed) {
                writeln!(out, "  {f}").unwrap();
            }
        };
        section(
            "finer-context independence",
            Some(self.context_independence_checked),
            &self.context_independence_failures,
        );
        section(
            "subalgebra independence",
            Some(self.subalgebra_independence_checked),
            &self.subalgebra_independence_failures,
        );
        section("well-defined", None, &self.well_defined_failures);
        section("additive", Some(self.additivity_checked), &self.additivity_failures);
        section("agrees with Tr(rho P)", None, &self.born_failures);
        writeln!(out, "unit\t{}", if self.unit_ok { "PASS" } else { "FAIL" }).unwrap();
        for (p, v) in &self.extracted {
            writeln!(out, "P_QM\t{p}\t{}", format_rational(v)).unwrap();
        }
        out
    }
}

/// Checks that `P({(A!,P)} | F_A')` does not depend on the finer `A' ⊇ A`, nor on
/// the subalgebra `A1 ⊆ A` carrying `P`; extracts `P_QM` and checks it is a
/// normalised, finitely additive assignment, equal to `Tr(ρP)` when `rho` is given.
pub fn noncontextuality_check(
    family: &ContextFamily,
    model: &dyn Cps,
    rho: Option<&DensityOperator>,
    reading: Reading,
) -> NoncontextualityReport {
    let n = family.len();
    let conditions: Vec<Event> = (0..n).map(|k| measurement_condition(family, k)).collect();
    let prob = |a: SqmElement, k: usize| model.prob(&proposition_event(family, a, reading), &conditions[k]);
    let show = |a: SqmElement| a.display(family);
    let mut report = NoncontextualityReport {
        reading,
        context_independence_checked: 0,
        context_independence_failures: Vec::new(),
        subalgebra_independence_checked: 0,
        subalgebra_independence_failures: Vec::new(),
        well_defined_failures: Vec::new(),
        extracted: Vec::new(),
        unit_ok: false,
        additivity_checked: 0,
        additivity_failures: Vec::new(),
        born_failures: Vec::new(),
    };
    let mut values: BTreeMap<QMatrix, (Rational, String)> = BTreeMap::new();
    for a in 0..n {
        for mask in 1..=family.context(a).full_mask() {
            let el = SqmElement::Prop { context: a, mask };
            let finer: Vec<usize> = (0..n).filter(|&f| family.includes(f, a)).collect();
            let mut first: Option<(usize, Rational)> = None;
            for &f in &finer {
                let Some(p) = prob(el, f) else {
                    report
                        .context_independence_failures
                        .push(format!("F_{} is not a condition", family.name(f)));
                    continue;
                };
                report.context_independence_checked += 1;
                match &first {
                    None => first = Some((f, p.clone())),
                    Some((f0, p0)) if *p0 != p => report.context_independence_failures.push(format!(
                        "{}: P(·|F_{}) = {} but P(·|F_{}) = {}",
                        show(el),
                        family.name(*f0),
                        format_rational(p0),
                        family.name(f),
                        format_rational(&p)
                    )),
                    _ => {}
                }
                let key = family.context(a).element(mask).into_matrix();
                let label = format!("{} given F_{}", show(el), family.name(f));
                match values.get(&key) {
                    None => {
                        values.insert(key, (p, label));
                    }
                    Some((v, l)) if *v != p => report.well_defined_failures.push(format!(
                        "{l} = {} but {label} = {}",
                        format_rational(v),
                        format_rational(&p)
                    )),
                    _ => {}
                }
            }
        }
    }
    for a in 0..n {
        let subs: Vec<usize> = (0..n).filter(|&s| family.includes(a, s)).collect();
        for (x, &s1) in subs.iter().enumerate() {
            for &s2 in &subs[x + 1..] {
                for m1 in 1..=family.context(s1).full_mask() {
                    let p = family.context(s1).element(m1);
                    let Some(m2) = family.context(s2).mask_of(&p) else {
                        continue;
                    };
                    let (e1, e2) = (
                        SqmElement::Prop { context: s1, mask: m1 },
                        SqmElement::Prop { context: s2, mask: m2 },
                    );
                    report.subalgebra_independence_checked += 1;
                    let (v1, v2) = (prob(e1, a), prob(e2, a));
                    if v1 != v2 {
                        let fmt = |v: &Option<Rational>| v.as_ref().map_or("undefined".into(), format_rational);
                        report.subalgebra_independence_failures.push(format!(
                            "given F_{}: {} has {} but {} has {}",
                            family.name(a),
                            show(e1),
                            fmt(&v1),
                            show(e2),
                            fmt(&v2)
                        ));
                    }
                }
            }
        }
    }
    report.extracted = values.iter().map(|(p, (v, _))| (p.clone(), v.clone())).collect();
    let identity = QMatrix::identity(family.dim());
    report.unit_ok = values.get(&identity).is_some_and(|(v, _)| v.is_one());
    let keys: Vec<&QMatrix> = values.keys().collect();
    for (x, p1) in keys.iter().enumerate() {
        for p2 in &keys[x + 1..] {
            if !p1.mul(p2).is_zero() {
                continue;
            }
            let Some((sum, _)) = values.get(&p1.add(p2)) else {
                continue;
            };
            report.additivity_checked += 1;
            let parts = &values[*p1].0 + &values[*p2].0;
            if *sum != parts {
                report.additivity_failures.push(format!(
                    "P_QM({p1}) + P_QM({p2}) = {} but P_QM(sum) = {}",
                    format_rational(&parts),
                    format_rational(sum)
                ));
            }
        }
    }
    if let Some(rho) = rho {
        for (p, (v, _)) in &values {
            let tr = rho.expectation_of(p);
            if tr != *v {
                report.born_failures.push(format!(
                    "P_QM({p}) = {} but Tr(rho P) = {}",
                    format_rational(v),
                    format_rational(&tr)
                ));
            }
        }
    }
    report
}

/// A model that weights one atom with certainty.
#[derive(Clone, Debug)]
pub struct PointModel {
    len: usize,
    atom: usize,
    /// Only events containing the atom are conditions.
    restricted: bool,
}

impl PointModel {
    pub fn atom(&self) -> usize {
        self.atom
    }

    pub fn to_model(&self, event_limit: usize) -> Result<ConditionalModel> {
        let entries = all_events(self.len, event_limit)?
            .into_iter()
            .skip(1)
            .filter_map(|c| self.weights(&c).map(|w| (c, w)))
            .collect();
        ConditionalModel::new(self.len, entries)
    }
}

impl Cps for PointModel {
    fn universe_len(&self) -> usize {
        self.len
    }

    fn weights(&self, c: &Event) -> Option<Vec<Rational>> {
        if c.is_empty() || (self.restricted && !c.contains(self.atom)) {
            return None;
        }
        Some(
            (0..self.len)
                .map(|e| {
                    if e == self.atom {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect(),
        )
    }
}

/// Certainty that nothing is measured: `δ` at `(C1!, 1)`, conditioned only on
/// events that contain it.
pub fn dirac_model(family: &ContextFamily) -> PointModel {
    let atom = family.atom_offsets()[family.trivial()];
    PointModel {
        len: family.exclusive_atom_count(),
        atom,
        restricted: true,
    }
}

/// `P(F|C) = [e ∈ F]` for a fixed exclusive atom `e` and every nonempty `C`.
pub fn trivial_full_model(family: &ContextFamily, context: usize, atom: usize) -> Result<PointModel> {
    if atom >= family.d(context) {
        return Err(Error::Invariant(format!("{} has no atom {atom}", family.name(context))));
    }
    Ok(PointModel {
        len: family.exclusive_atom_count(),
        atom: family.atom_offsets()[context] + atom,
        restricted: false,
    })
}

/// The Dirac model and the trivial full CPS at the first atom of the first
/// nontrivial context.
pub fn counterexample_models(family: &ContextFamily) -> Vec<(&'static str, PointModel)> {
    let mut out = vec![("dirac", dirac_model(family))];
    if let Some(k) = (0..family.len()).find(|&k| family.d(k) > 1) {
        out.push(("trivial", trivial_full_model(family, k, 0).expect("atom exists")));
    }
    out
}

/// The Born CPS with the condition of the first context that strictly refines a
/// nontrivial one replaced by certainty on that context's first atom.
pub fn contextual_model(family: &ContextFamily, rho: &DensityOperator) -> Result<ConditionalModel> {
    let born = born_cps(family, rho, BornConditions::Measurement)?;
    let target = (0..family.len())
        .find(|&k| (0..family.len()).any(|s| s != k && family.includes(k, s) && family.d(s) > 1))
        .ok_or_else(|| Error::Invariant("family has no nested nontrivial contexts".into()))?;
    let offset = family.atom_offsets()[target];
    let entries = born
        .conditions
        .iter()
        .zip(&born.weights)
        .enumerate()
        .map(|(k, (c, w))| {
            if k == target {
                let w = (0..born.len)
                    .map(|e| if e == offset { Rational::one() } else { Rational::zero() })
                    .collect();
                (c.clone(), w)
            } else {
                (c.clone(), w.clone())
            }
        })
        .collect();
    ConditionalModel::new(born.len, entries)
}

/// TSV of `P(F|F_A)` for every atom `(A!, P)` under its own context's condition.
pub fn born_table(family: &ContextFamily, rho: &DensityOperator) -> String {
    let mut out = String::from("context\tatom\tprob\n");
    for k in 0..family.len() {
        for bit in mask_bits(family.context(k).full_mask()) {
            let mut masks = vec![0; family.len()];
            masks[k] = 1 << bit;
            let f = Event::from_masks(family, &masks);
            let p = born_conditional(family, rho, &f, k);
            writeln!(
                out,
                "{}\t{}\t{}",
                family.name(k),
                format_mask(1 << bit, family.d(k)),
                format_rational(&p)
            )
            .unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::scalar::rat;

    fn zx() -> ContextFamily {
        qubit_family(vec![az(), ax()])
    }

    fn atom_event(f: &ContextFamily, name: &str, atom: usize) -> Event {
        let k = f.index_by_name(name).unwrap();
        let mut masks = vec![0; f.len()];
        masks[k] = 1 << atom;
        Event::from_masks(f, &masks)
    }

    // Atom 1 of Az is Pz+, atom 0 is Pz-.
    fn pz_plus(f: &ContextFamily) -> Event {
        atom_event(f, "Az", 1)
    }

    fn c1(f: &ContextFamily) -> Event {
        atom_event(f, "C1", 0)
    }

    #[test]
    fn sweep_agrees_with_reduced_check() {
        let f = zx();
        let rho = biased_qubit_state();
        let m = born_cps(&f, &rho, BornConditions::Measurement).unwrap();
        let r = sweep_events(&m, 10).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!((r.events, r.pairs), (32, 5));
        let full = extend_full(&f, &rho).unwrap().to_model(1 << 10).unwrap();
        let r = sweep_events(&full, 10).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.pairs, 211);

        let bad = ConditionalModel::new(
            5,
            vec![
                (
                    Event::full(5),
                    vec![rat(1, 2), rat(1, 2), rat(0, 1), rat(0, 1), rat(0, 1)],
                ),
                (c1(&f), vec![rat(0, 1), rat(1, 1), rat(0, 1), rat(0, 1), rat(0, 1)]),
            ],
        )
        .unwrap();
        assert!(!sweep_events(&bad, 10).unwrap().passed());
        assert!(!check_axioms(&bad).unwrap().passed());
        assert!(matches!(sweep_events(&bad, 4), Err(Error::BoundExceeded { .. })));
    }

    #[test]
    fn born_conditional_examples() {
        let f = zx();
        let rho = biased_qubit_state();
        let az = f.index_by_name("Az").unwrap();
        let ax = f.index_by_name("Ax").unwrap();
        assert_eq!(born_conditional(&f, &rho, &pz_plus(&f), az), rat(3, 4));
        assert_eq!(born_conditional(&f, &rho, &Event::full(5), ax), rat(1, 1));
        assert_eq!(
            born_conditional(&f, &rho, &measurement_condition(&f, ax), az),
            rat(0, 1)
        );
    }

    #[test]
    fn born_cps_examples() {
        let f = zx();
        let rho = biased_qubit_state();
        let m = born_cps(&f, &rho, BornConditions::Measurement).unwrap();
        let fz = measurement_condition(&f, f.index_by_name("Az").unwrap());
        let fc1 = measurement_condition(&f, f.trivial());
        assert_eq!(m.prob(&fz, &fc1), Some(rat(0, 1)));
        for a in 0..f.len() {
            for b in 0..f.len() {
                let p = m
                    .prob(&measurement_condition(&f, b), &measurement_condition(&f, a))
                    .unwrap();
                assert_eq!(p, if f.includes(a, b) { rat(1, 1) } else { rat(0, 1) });
            }
        }
        // A ∩ B = {Pz+} ∩ F_Az, C = F_C1: 0 = (3/4)·0
        let lhs = m.prob(&pz_plus(&f).intersection(&fz), &fc1).unwrap();
        let rhs = m.prob(&pz_plus(&f), &fz.intersection(&fc1)).unwrap() * m.prob(&fz, &fc1).unwrap();
        assert_eq!((lhs.clone(), rhs), (rat(0, 1), rat(0, 1)));
        let r = check_axioms(&m).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = check_axioms_brute(&m, 10).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn exclusive_conditions_agree() {
        let f = zx();
        let rho = biased_qubit_state();
        let m = born_cps(&f, &rho, BornConditions::Measurement).unwrap();
        let x = born_cps(&f, &rho, BornConditions::Exclusive).unwrap();
        for k in 0..f.len() {
            assert_eq!(m.condition_weights(k), x.condition_weights(k));
        }
        assert!(check_axioms(&x).unwrap().passed());
        assert!(check_axioms_brute(&x, 10).unwrap().passed());
    }

    #[test]
    fn born_cps_on_bell_family() {
        let f = bell_family();
        let m = born_cps(&f, &singlet_state(), BornConditions::Measurement).unwrap();
        assert_eq!(m.universe_len(), 25);
        assert!(check_axioms(&m).unwrap().passed());
    }

    #[test]
    fn brute_check_detects_bad_models() {
        let f = zx();
        let fz = measurement_condition(&f, f.index_by_name("Az").unwrap());
        let fc1 = measurement_condition(&f, f.trivial());
        let w = |e: usize| {
            (0..5)
                .map(|i| if i == e { rat(1, 1) } else { rat(0, 1) })
                .collect::<Vec<_>>()
        };
        // Certainty on Pz+ under F_C1 but on Pz- under F_Az breaks the product rule.
        let bad = ConditionalModel::new(5, vec![(fc1, w(2)), (fz, w(1))]).unwrap();
        assert!(!check_axioms(&bad).unwrap().axiom2_failures.is_empty());
        assert!(!check_axioms_brute(&bad, 10).unwrap().axiom2_failures.is_empty());
        let unnormalised = ConditionalModel::new(5, vec![(Event::full(5), vec![rat(1, 2); 5])]).unwrap();
        assert!(!check_axioms(&unnormalised).unwrap().axiom1_failures.is_empty());
        assert!(!check_axioms_brute(&unnormalised, 10)
            .unwrap()
            .axiom1_failures
            .is_empty());
    }

    #[test]
    fn dimension_examples() {
        let f = zx();
        assert_eq!(dim_of_event(&f, &measurement_condition(&f, f.trivial())).unwrap(), 1);
        assert_eq!(dim_of_event(&f, &pz_plus(&f)).unwrap(), 2);
        assert!(matches!(dim_of_event(&f, &Event::empty(5)), Err(Error::EmptyEvent)));
        let bell = bell_family();
        let a1 = bell.index_by_name("A1").unwrap();
        assert_eq!(dim_of_event(&bell, &measurement_condition(&bell, a1)).unwrap(), 2);
    }

    #[test]
    fn delta_family_values() {
        let f = zx();
        let mf = MeasureFamily::new(&f, &biased_qubit_state(), FamilyKind::Delta).unwrap();
        for k in 0..f.len() {
            assert_eq!(
                mf.measure(f.d(k), &measurement_condition(&f, k)),
                Extended::Finite(rat(1, 1))
            );
        }
        assert!(mf.measure(1, &pz_plus(&f)).is_zero());
        assert!(mf.measure(2, &pz_plus(&f).union(&c1(&f))).is_zero());
        assert!(mf.measure(2, &Event::empty(5)).is_zero());
    }

    #[test]
    fn stratified_family_values() {
        let f = zx();
        let mf = MeasureFamily::new(&f, &biased_qubit_state(), FamilyKind::Stratified).unwrap();
        let fz = measurement_condition(&f, f.index_by_name("Az").unwrap());
        assert_eq!(mf.measure(2, &fz), Extended::Finite(rat(1, 1)));
        assert_eq!(mf.measure(2, &c1(&f)), Extended::Infinite);
        assert!(mf.measure(1, &pz_plus(&f)).is_zero());
    }

    #[test]
    fn family_audits() {
        let f = zx();
        let rho = biased_qubit_state();
        let born = born_cps(&f, &rho, BornConditions::Measurement).unwrap();
        let delta = audit_family(
            &MeasureFamily::new(&f, &rho, FamilyKind::Delta).unwrap(),
            &born,
            1 << 10,
        )
        .unwrap();
        assert!(!delta.is_measure() && delta.generates());
        let documented = delta.measure_violations.iter().any(|v| {
            v.index == 2
                && ((v.f1 == pz_plus(&f) && v.f2 == c1(&f)) || (v.f1 == c1(&f) && v.f2 == pz_plus(&f)))
                && v.union.is_zero()
                && v.sum == Extended::Finite(rat(3, 4))
        });
        assert!(documented);
        let strat = audit_family(
            &MeasureFamily::new(&f, &rho, FamilyKind::Stratified).unwrap(),
            &born,
            1 << 10,
        )
        .unwrap();
        assert!(strat.passed(), "{}", strat.render(&f, 5));
        assert!(strat.orderings[0].counterexample.is_some());
        assert!(strat.orderings[1].counterexample.is_none());
        assert!(strat.render(&f, 3).contains("is-measure\tPASS"));
    }

    #[test]
    fn stratified_generates_full_extension() {
        let f = zx();
        let rho = biased_qubit_state();
        let full = extend_full(&f, &rho).unwrap().to_model(1 << 10).unwrap();
        let strat = audit_family(
            &MeasureFamily::new(&f, &rho, FamilyKind::Stratified).unwrap(),
            &full,
            1 << 10,
        )
        .unwrap();
        assert!(strat.passed());
    }

    #[test]
    fn full_extension() {
        let f = zx();
        let rho = biased_qubit_state();
        let ext = extend_full(&f, &rho).unwrap();
        let born = born_cps(&f, &rho, BornConditions::Measurement).unwrap();
        for (k, c) in born.conditions().iter().enumerate() {
            assert_eq!(ext.weights(c).unwrap(), born.condition_weights(k));
        }
        let c = c1(&f).union(&pz_plus(&f));
        assert_eq!(ext.prob(&c1(&f), &c), Some(rat(1, 1)));
        let model = ext.to_model(1 << 10).unwrap();
        assert_eq!(model.conditions().len(), 31);
        assert!(model.is_additive());
        assert!(check_axioms(&model).unwrap().passed());
        assert!(check_axioms_brute(&model, 10).unwrap().passed());
    }

    #[test]
    fn full_extension_with_singular_state() {
        let f = zx();
        let rho = DensityOperator::pure(&[
            crate::scalar::GaussianRational::one(),
            crate::scalar::GaussianRational::zero(),
        ])
        .unwrap();
        let ext = extend_full(&f, &rho).unwrap();
        // {(Az!, Pz-)} carries no mass at its only stratum.
        assert!(!ext.is_condition(&atom_event(&f, "Az", 0)));
        let model = ext.to_model(1 << 10).unwrap();
        assert!(model.conditions().len() < 31);
        assert!(check_axioms(&model).unwrap().passed());
        assert!(check_axioms_brute(&model, 10).unwrap().passed());
    }

    #[test]
    fn union_closed_restriction_is_additive() {
        let f = zx();
        let rho = biased_qubit_state();
        let seed: Vec<Event> = (0..f.len()).map(|k| measurement_condition(&f, k)).collect();
        let closure = union_closure(&seed, 1000).unwrap();
        let model = extend_full(&f, &rho).unwrap().restrict(closure).unwrap();
        assert!(model.is_additive());
        assert!(check_axioms(&model).unwrap().passed());
    }

    #[test]
    fn noncontextuality_of_born() {
        let f = bell_family();
        let rho = singlet_state();
        let born = born_cps(&f, &rho, BornConditions::Measurement).unwrap();
        let r = noncontextuality_check(&f, &born, Some(&rho), Reading::Event);
        assert!(r.passed(), "{}", r.render(5));
        assert!(r.additivity_checked > 0);
        let lit = noncontextuality_check(&f, &born, Some(&rho), Reading::Literal);
        assert!(!lit.passed());
    }

    #[test]
    fn noncontextuality_qubit_additivity() {
        let f = zx();
        let rho = biased_qubit_state();
        let born = born_cps(&f, &rho, BornConditions::Measurement).unwrap();
        let r = noncontextuality_check(&f, &born, Some(&rho), Reading::Event);
        assert!(r.passed());
        let get = |p: &crate::matrix::Projection| r.extracted.iter().find(|(m, _)| m == p.matrix()).unwrap().1.clone();
        assert_eq!(get(&pz(1)) + get(&pz(-1)), rat(1, 1));
    }

    #[test]
    fn contextual_model_is_detected() {
        let f = bell_family();
        let rho = singlet_state();
        let m = contextual_model(&f, &rho).unwrap();
        assert!(check_axioms(&m).unwrap().passed());
        let r = noncontextuality_check(&f, &m, Some(&rho), Reading::Event);
        assert!(!r.context_independence_failures.is_empty());
    }

    #[test]
    fn counterexamples() {
        let f = zx();
        let dirac = dirac_model(&f);
        let fz = measurement_condition(&f, f.index_by_name("Az").unwrap());
        assert!(dirac.prob(&fz, &fz).is_none());
        assert_eq!(dirac.prob(&c1(&f), &Event::full(5)), Some(rat(1, 1)));
        let dm = dirac.to_model(1 << 10).unwrap();
        assert_eq!(dm.conditions().len(), 16);
        assert!(check_axioms(&dm).unwrap().passed());

        let az = f.index_by_name("Az").unwrap();
        let t = trivial_full_model(&f, az, 1).unwrap();
        let c = atom_event(&f, "Ax", 1).union(&pz_plus(&f));
        assert_eq!(t.prob(&pz_plus(&f), &c), Some(rat(1, 1)));
        let tm = t.to_model(1 << 10).unwrap();
        assert_eq!(tm.conditions().len(), 31);
        assert!(check_axioms(&tm).unwrap().passed());
        assert!(check_axioms_brute(&tm, 10).unwrap().passed());
        assert_eq!(counterexample_models(&f).len(), 2);
    }

    #[test]
    fn born_table_lists_atoms() {
        let f = zx();
        let t = born_table(&f, &biased_qubit_state());
        assert!(t.contains("Az\t01\t3/4"));
        assert_eq!(t.lines().count(), 6);
    }
}
