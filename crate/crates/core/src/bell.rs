//! EPR-Bohm scenarios: two parties with two spin measurements each, conditions
//! `F_(A,P) = c∘i(A, P)`, parameter and outcome independence, and CHSH.
//!
//! Outcome 0 of a spin measurement along `n` is the `+1` eigenprojection.

use std::fmt::Write as _;

use num_traits::Zero;

use crate::clqm::{c_of_i, Event};
use crate::context::{close_family, Context, ContextFamily};
use crate::cps::{born_cps, extend_full, proposition_event, BornConditions, Cps, FullExtension, Reading};
use crate::error::{Error, Result};
use crate::matrix::{kron, qubit_spin_projection, DensityOperator, Projection, QMatrix};
use crate::scalar::{format_rational, int, Rational};
use crate::slattice::{all_elements, SqmElement};

pub type Direction = [Rational; 3];

fn lift_left(p: &Projection) -> Projection {
    Projection::new(kron(p.matrix(), &QMatrix::identity(2))).expect("tensor of projections")
}

fn lift_right(p: &Projection) -> Projection {
    Projection::new(kron(&QMatrix::identity(2), p.matrix())).expect("tensor of projections")
}

/// `[outcome 0, outcome 1]` for a spin measurement along `n`.
fn outcomes(n: &Direction) -> Result<[Projection; 2]> {
    Ok([qubit_spin_projection(n, 1)?, qubit_spin_projection(n, -1)?])
}

/// `A_i ⊗ 1` and `1 ⊗ B_j` on `C^2 ⊗ C^2`, named A1, A2, B1, B2.
pub fn marginal_contexts(alice: &[Direction; 2], bob: &[Direction; 2]) -> Result<Vec<Context>> {
    let mut out = Vec::new();
    for (k, n) in alice.iter().enumerate() {
        let atoms = outcomes(n)?.iter().map(lift_left).collect();
        out.push(Context::new(atoms, Some(format!("A{}", k + 1)))?);
    }
    for (k, n) in bob.iter().enumerate() {
        let atoms = outcomes(n)?.iter().map(lift_right).collect();
        out.push(Context::new(atoms, Some(format!("B{}", k + 1)))?);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct BellScenario {
    family: ContextFamily,
    state: DensityOperator,
    alice: [usize; 2],
    bob: [usize; 2],
    /// `joints[i][j]` is the algebra generated by Alice's `i` and Bob's `j`.
    joints: [[usize; 2]; 2],
    /// `[setting][outcome]`, already lifted to the composite space.
    alice_outcomes: [[Projection; 2]; 2],
    bob_outcomes: [[Projection; 2]; 2],
}

impl BellScenario {
    /// Locates the marginal and joint contexts in an existing closed family.
    pub fn new(
        family: ContextFamily,
        state: DensityOperator,
        alice: &[Direction; 2],
        bob: &[Direction; 2],
    ) -> Result<Self> {
        if family.dim() != 4 || state.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: family.dim().max(state.dim()),
            });
        }
        let marginals = marginal_contexts(alice, bob)?;
        let mut idx = [0; 4];
        for (slot, c) in idx.iter_mut().zip(&marginals) {
            *slot = family.index_of(c).ok_or_else(|| {
                Error::UnknownContext(format!(
                    "marginal context {} is not in the family",
                    c.name().unwrap_or("?")
                ))
            })?;
        }
        let (a, b) = ([idx[0], idx[1]], [idx[2], idx[3]]);
        let mut joints = [[0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                joints[i][j] = family.generated(a[i], b[j]).ok_or_else(|| Error::NonCommuting {
                    first: a[i],
                    second: b[j],
                })?;
            }
        }
        let lifted = |dirs: &[Direction; 2], lift: fn(&Projection) -> Projection| -> Result<[[Projection; 2]; 2]> {
            let o0 = outcomes(&dirs[0])?;
            let o1 = outcomes(&dirs[1])?;
            Ok([[lift(&o0[0]), lift(&o0[1])], [lift(&o1[0]), lift(&o1[1])]])
        };
        Ok(Self {
            alice_outcomes: lifted(alice, lift_left)?,
            bob_outcomes: lifted(bob, lift_right)?,
            family,
            state,
            alice: a,
            bob: b,
            joints,
        })
    }

    /// Closes the four marginal contexts into a family (nine contexts for
    /// generic directions).
    pub fn from_directions(
        alice: &[Direction; 2],
        bob: &[Direction; 2],
        state: DensityOperator,
        max_family: usize,
    ) -> Result<Self> {
        let family = close_family(4, marginal_contexts(alice, bob)?, max_family)?;
        Self::new(family, state, alice, bob)
    }

    pub fn family(&self) -> &ContextFamily {
        &self.family
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn joint(&self, i: usize, j: usize) -> usize {
        self.joints[i][j]
    }

    fn alice_element(&self, i: usize, k: usize) -> SqmElement {
        SqmElement::from_projection(&self.family, self.alice[i], &self.alice_outcomes[i][k])
            .expect("outcome lies in its context")
    }

    fn bob_element(&self, j: usize, k: usize) -> SqmElement {
        SqmElement::from_projection(&self.family, self.bob[j], &self.bob_outcomes[j][k])
            .expect("outcome lies in its context")
    }

    /// `F_(A_ij, P)` for a projection in the joint lattice.
    fn joint_condition(&self, i: usize, j: usize, p: Option<&Projection>) -> Event {
        let k = self.joints[i][j];
        let el = match p {
            None => SqmElement::whole(&self.family, k),
            Some(p) => {
                SqmElement::from_projection(&self.family, k, p).expect("marginal outcome lies in the joint lattice")
            }
        };
        c_of_i(&self.family, el)
    }

    /// `E_ij = Σ (-1)^(k+l) P(outcome kl | F_(A_ij))` from the Born CPS.
    pub fn correlator(&self, i: usize, j: usize) -> Result<Rational> {
        let born = born_cps(&self.family, &self.state, BornConditions::Measurement)?;
        let k = self.joints[i][j];
        let cond = c_of_i(&self.family, SqmElement::whole(&self.family, k));
        let mut e = Rational::zero();
        for a in 0..2 {
            for b in 0..2 {
                let atom = self.alice_outcomes[i][a].product(&self.bob_outcomes[j][b]);
                let mask = self.family.context(k).mask_of(&atom).ok_or(Error::NotInLattice)?;
                let mut masks = vec![0; self.family.len()];
                masks[k] = mask;
                let p = born
                    .prob(&Event::from_masks(&self.family, &masks), &cond)
                    .ok_or(Error::NotACondition)?;
                if (a + b) % 2 == 0 {
                    e += p;
                } else {
                    e -= p;
                }
            }
        }
        Ok(e)
    }

    /// `S = E11 + E12 + E21 - E22`.
    pub fn chsh(&self) -> Result<Rational> {
        Ok(self.correlator(0, 0)? + self.correlator(0, 1)? + self.correlator(1, 0)? - self.correlator(1, 1)?)
    }

    /// `Tr(ρ B)` for the CHSH operator assembled from the outcome projections.
    pub fn chsh_operator_expectation(&self) -> Rational {
        let dim = 4;
        let observable = |o: &[Projection; 2]| o[0].matrix().sub(o[1].matrix());
        let mut b = QMatrix::zero(dim);
        for i in 0..2 {
            for j in 0..2 {
                let term = observable(&self.alice_outcomes[i]).mul(&observable(&self.bob_outcomes[j]));
                b = if i == 1 && j == 1 { b.sub(&term) } else { b.add(&term) };
            }
        }
        self.state.expectation_of(&b)
    }

    pub fn chsh_report(&self) -> Result<String> {
        let mut out = String::new();
        for i in 0..2 {
            for j in 0..2 {
                writeln!(out, "E{}{}\t{}", i + 1, j + 1, format_rational(&self.correlator(i, j)?)).unwrap();
            }
        }
        let s = self.chsh()?;
        let abs = num_traits::Signed::abs(&s);
        writeln!(out, "S\t{}", format_rational(&s)).unwrap();
        writeln!(out, "|S|\t{}", format_rational(&abs)).unwrap();
        writeln!(out, "classical bound\t2").unwrap();
        let verdict = if abs > int(2) { "yes" } else { "no" };
        writeln!(out, "violation\t{verdict}").unwrap();
        Ok(out)
    }

    /// Parameter and outcome independence under the full extension.
    pub fn locality_audit(&self, reading: Reading) -> Result<LocalityReport> {
        let ext = extend_full(&self.family, &self.state)?;
        let f = &self.family;
        let mut entries = Vec::new();
        for i in 0..2 {
            let ev = proposition_event(f, self.alice_element(i, 0), reading);
            let label = format!("{}=0", f.name(self.alice[i]));
            entries.push(compare(
                &ext,
                Kind::Pi,
                format!(
                    "{label} | {} vs {}",
                    f.name(self.joints[i][0]),
                    f.name(self.joints[i][1])
                ),
                &ev,
                &self.joint_condition(i, 0, None),
                &self.joint_condition(i, 1, None),
            ));
        }
        for j in 0..2 {
            let ev = proposition_event(f, self.bob_element(j, 0), reading);
            let label = format!("{}=0", f.name(self.bob[j]));
            entries.push(compare(
                &ext,
                Kind::Pi,
                format!(
                    "{label} | {} vs {}",
                    f.name(self.joints[0][j]),
                    f.name(self.joints[1][j])
                ),
                &ev,
                &self.joint_condition(0, j, None),
                &self.joint_condition(1, j, None),
            ));
        }
        for i in 0..2 {
            let ev = proposition_event(f, self.alice_element(i, 0), reading);
            for j in 0..2 {
                for k in 0..2 {
                    entries.push(compare(
                        &ext,
                        Kind::Oi,
                        format!(
                            "{}=0 | {} vs {}={k}",
                            f.name(self.alice[i]),
                            f.name(self.joints[i][j]),
                            f.name(self.bob[j])
                        ),
                        &ev,
                        &self.joint_condition(i, j, None),
                        &self.joint_condition(i, j, Some(&self.bob_outcomes[j][k])),
                    ));
                }
            }
        }
        for j in 0..2 {
            let ev = proposition_event(f, self.bob_element(j, 0), reading);
            for i in 0..2 {
                for k in 0..2 {
                    entries.push(compare(
                        &ext,
                        Kind::Oi,
                        format!(
                            "{}=0 | {} vs {}={k}",
                            f.name(self.bob[j]),
                            f.name(self.joints[i][j]),
                            f.name(self.alice[i])
                        ),
                        &ev,
                        &self.joint_condition(i, j, None),
                        &self.joint_condition(i, j, Some(&self.alice_outcomes[i][k])),
                    ));
                }
            }
        }
        Ok(LocalityReport { reading, entries })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Kind {
    Pi,
    Oi,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Hold,
    Fail,
    /// Both sides are 0 because the event misses both conditions.
    Vacuous,
    /// A condition has zero mass in the extension.
    Skipped,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Hold => "hold",
            Status::Fail => "fail",
            Status::Vacuous => "vacuous",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug)]
pub struct LocalityEntry {
    pub kind: Kind,
    pub label: String,
    pub lhs: Option<Rational>,
    pub rhs: Option<Rational>,
    pub status: Status,
}

fn compare(ext: &FullExtension, kind: Kind, label: String, event: &Event, c1: &Event, c2: &Event) -> LocalityEntry {
    let (lhs, rhs) = (ext.prob(event, c1), ext.prob(event, c2));
    let status = match (&lhs, &rhs) {
        (Some(a), Some(b)) if a != b => Status::Fail,
        (Some(_), Some(_)) if event.intersection(c1).is_empty() && event.intersection(c2).is_empty() => Status::Vacuous,
        (Some(_), Some(_)) => Status::Hold,
        _ => Status::Skipped,
    };
    LocalityEntry {
        kind,
        label,
        lhs,
        rhs,
        status,
    }
}

#[derive(Clone, Debug)]
pub struct LocalityReport {
    pub reading: Reading,
    pub entries: Vec<LocalityEntry>,
}

impl LocalityReport {
    pub fn of_kind(&self, kind: Kind) -> impl Iterator<Item = &LocalityEntry> {
        self.entries.iter().filter(move |e| e.kind == kind)
    }

    pub fn count(&self, kind: Kind, status: Status) -> usize {
        self.of_kind(kind).filter(|e| e.status == status).count()
    }

    pub fn first_failure(&self, kind: Kind) -> Option<&LocalityEntry> {
        self.of_kind(kind).find(|e| e.status == Status::Fail)
    }

    pub fn any_failure(&self) -> bool {
        self.entries.iter().any(|e| e.status == Status::Fail)
    }

    pub fn render(&self) -> String {
        let mut out = format!("reading\t{}\n", self.reading.name());
        let show = |v: &Option<Rational>| v.as_ref().map_or("undefined".to_string(), format_rational);
        for e in &self.entries {
            let kind = match e.kind {
                Kind::Pi => "PI",
                Kind::Oi => "OI",
            };
            writeln!(
                out,
                "{kind}\t{}\t{}\t{}\t{}",
                e.label,
                show(&e.lhs),
                show(&e.rhs),
                e.status.name()
            )
            .unwrap();
        }
        for kind in [Kind::Pi, Kind::Oi] {
            let name = if kind == Kind::Pi { "PI" } else { "OI" };
            writeln!(
                out,
                "{name} summary\thold {}\tfail {}\tvacuous {}\tskipped {}",
                self.count(kind, Status::Hold),
                self.count(kind, Status::Fail),
                self.count(kind, Status::Vacuous),
                self.count(kind, Status::Skipped)
            )
            .unwrap();
        }
        out
    }
}

/// Every `F_(A,P)` with `(A, P) ≠ ⊥`, in element order.
pub fn extended_conditions(family: &ContextFamily, bound: usize) -> Result<Vec<(SqmElement, Event)>> {
    Ok(all_elements(family, bound)?
        .into_iter()
        .skip(1)
        .map(|a| (a, c_of_i(family, a)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{bell_directions, singlet_state, z_axis};
    use crate::scalar::{rat, GaussianRational as G};

    fn singlet() -> BellScenario {
        let (a, b) = bell_directions();
        BellScenario::from_directions(&a, &b, singlet_state(), 64).unwrap()
    }

    fn mixed() -> BellScenario {
        let (a, b) = bell_directions();
        BellScenario::from_directions(&a, &b, DensityOperator::maximally_mixed(4), 64).unwrap()
    }

    #[test]
    fn family_has_nine_contexts() {
        let s = singlet();
        assert_eq!(s.family().len(), 9);
        assert_eq!(s.family().exclusive_atom_count(), 25);
    }

    #[test]
    fn singlet_correlators() {
        let s = singlet();
        assert_eq!(s.correlator(0, 0).unwrap(), rat(-4, 5));
        assert_eq!(s.correlator(0, 1).unwrap(), rat(-4, 5));
        assert_eq!(s.correlator(1, 0).unwrap(), rat(-3, 5));
        assert_eq!(s.correlator(1, 1).unwrap(), rat(3, 5));
        assert_eq!(s.chsh().unwrap(), rat(-14, 5));
        assert_eq!(s.chsh_operator_expectation(), rat(-14, 5));
        let report = s.chsh_report().unwrap();
        assert!(report.contains("|S|\t14/5") && report.contains("violation\tyes"));
    }

    #[test]
    fn mixed_state_has_no_correlation() {
        let s = mixed();
        assert_eq!(s.chsh().unwrap(), rat(0, 1));
        assert_eq!(s.chsh_operator_expectation(), rat(0, 1));
        let r = s.locality_audit(Reading::Event).unwrap();
        assert!(!r.any_failure());
        assert_eq!(r.count(Kind::Oi, Status::Hold), 16);
    }

    #[test]
    fn aligned_product_state_respects_bound() {
        let z = z_axis();
        let dirs = [z.clone(), z.clone()];
        let mut d = vec![G::zero(); 4];
        d[0] = G::one();
        let state = DensityOperator::new(QMatrix::diagonal(&d)).unwrap();
        let s = BellScenario::from_directions(&dirs, &dirs.clone(), state, 64).unwrap();
        assert_eq!(s.family().len(), 4);
        let v = s.chsh().unwrap();
        assert!(num_traits::Signed::abs(&v) <= int(2));
        assert_eq!(v, s.chsh_operator_expectation());
    }

    #[test]
    fn singlet_locality() {
        let s = singlet();
        let r = s.locality_audit(Reading::Event).unwrap();
        assert_eq!(r.of_kind(Kind::Pi).count(), 4);
        assert_eq!(r.of_kind(Kind::Oi).count(), 16);
        for e in r.of_kind(Kind::Pi) {
            assert_eq!(e.status, Status::Hold);
            assert_eq!(e.lhs, Some(rat(1, 2)));
        }
        let w = r.first_failure(Kind::Oi).unwrap();
        assert_eq!((w.lhs.clone(), w.rhs.clone()), (Some(rat(1, 2)), Some(rat(1, 10))));
        let lit = s.locality_audit(Reading::Literal).unwrap();
        assert!(lit
            .entries
            .iter()
            .all(|e| e.status == Status::Vacuous && e.lhs == Some(rat(0, 1))));
        assert!(r.render().contains("OI summary"));
    }

    #[test]
    fn extended_condition_examples() {
        let s = singlet();
        let f = s.family();
        let conds = extended_conditions(f, 1000).unwrap();
        let top = SqmElement::top(f);
        assert_eq!(conds.iter().find(|(a, _)| *a == top).unwrap().1, Event::full(25));
        let b10 = s.joint_condition(0, 0, Some(&s.bob_outcomes[0][0]));
        assert_eq!(b10.count(), 2);
        let k = s.joint(0, 0);
        assert_eq!(s.joint_condition(0, 0, None), c_of_i(f, SqmElement::whole(f, k)));
    }

    #[test]
    fn missing_marginal_is_reported() {
        let (a, b) = bell_directions();
        let s = singlet();
        // Bob never measures along z in this family.
        let bob = [a[0].clone(), b[0].clone()];
        assert!(matches!(
            BellScenario::new(s.family().clone(), singlet_state(), &a, &bob),
            Err(Error::UnknownContext(_))
        ));
    }
}
