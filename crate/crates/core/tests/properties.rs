//! Property tests over randomly generated qubit families and states.

use proptest::prelude::*;

use qprop::clqm::{c_map, lem_gap, Event};
use qprop::context::{close_family, ContextFamily};
use qprop::cps::{born_cps, check_axioms, check_axioms_brute, extend_full, sweep_events, BornConditions};
use qprop::fixtures::spin_context;
use qprop::lqm::{embed_i, enumerate_sections, implies, lqm_join, lqm_meet, negate, negation_closed_form};
use qprop::matrix::{pauli, DensityOperator, QMatrix};
use qprop::scalar::{rat, GaussianRational as G, Rational};
use qprop::scenario::{parse_scenario, ContextSpec, Scenario};
use qprop::slattice::{all_elements, sqm_join, sqm_leq, sqm_meet};

/// Inverse stereographic projection of `(u, v)`: a rational point on the sphere.
fn direction(u: Rational, v: Rational) -> [Rational; 3] {
    let one = rat(1, 1);
    let s = &u * &u + &v * &v;
    let den = &s + &one;
    [&u * rat(2, 1) / &den, &v * rat(2, 1) / &den, (&s - &one) / &den]
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| rat(n, d))
}

fn axis() -> impl Strategy<Value = [Rational; 3]> {
    (small_rational(), small_rational()).prop_map(|(u, v)| direction(u, v))
}

fn family(axes: &[[Rational; 3]]) -> ContextFamily {
    let seed = axes
        .iter()
        .enumerate()
        .map(|(k, n)| spin_context(n, &format!("N{k}")))
        .collect();
    close_family(2, seed, 64).unwrap()
}

/// `(1 + s n·σ) / 2`, faithful when `s < 1`.
fn bloch_state(n: &[Rational; 3], s: &Rational) -> DensityOperator {
    let mut m = QMatrix::identity(2).scale(&G::from_ratio(1, 2));
    for (sigma, coord) in pauli().iter().zip(n) {
        m = m.add(&sigma.scale(&G::real(coord * s / rat(2, 1))));
    }
    DensityOperator::new(m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sqm_meet_and_join_are_bounds(axes in prop::collection::vec(axis(), 1..=3)) {
        let f = family(&axes);
        let els = all_elements(&f, 200).unwrap();
        for &a in &els {
            for &b in &els {
                let (m, j) = (sqm_meet(&f, a, b), sqm_join(&f, a, b));
                prop_assert_eq!(m, sqm_meet(&f, b, a));
                prop_assert_eq!(j, sqm_join(&f, b, a));
                for &c in &els {
                    prop_assert_eq!(sqm_leq(&f, c, a) && sqm_leq(&f, c, b), sqm_leq(&f, c, m));
                    prop_assert_eq!(sqm_leq(&f, a, c) && sqm_leq(&f, b, c), sqm_leq(&f, j, c));
                }
            }
        }
    }

    #[test]
    fn sections_form_a_heyting_algebra(axes in prop::collection::vec(axis(), 1..=2)) {
        let f = family(&axes);
        let s = enumerate_sections(&f, 10_000).unwrap();
        for a in &s {
            for b in &s {
                let imp = implies(&f, a, b);
                for c in &s {
                    prop_assert_eq!(lqm_meet(c, a).leq(b), c.leq(&imp));
                    prop_assert_eq!(
                        lqm_meet(a, &lqm_join(b, c)),
                        lqm_join(&lqm_meet(a, b), &lqm_meet(a, c))
                    );
                }
                prop_assert_eq!(c_map(&f, &lqm_meet(a, b)), c_map(&f, a).intersection(&c_map(&f, b)));
                prop_assert_eq!(c_map(&f, &lqm_join(a, b)), c_map(&f, a).union(&c_map(&f, b)));
            }
        }
        for a in all_elements(&f, 200).unwrap().into_iter().skip(1) {
            prop_assert_eq!(negate(&f, &embed_i(&f, a)), negation_closed_form(&f, a));
        }
    }

    #[test]
    fn born_and_full_extension_satisfy_axioms(
        axes in prop::collection::vec(axis(), 1..=3),
        n in axis(),
        s in (0i64..4).prop_map(|k| rat(k, 4)),
    ) {
        let f = family(&axes);
        let rho = bloch_state(&n, &s);
        for kind in [BornConditions::Measurement, BornConditions::Exclusive] {
            let m = born_cps(&f, &rho, kind).unwrap();
            prop_assert!(check_axioms(&m).unwrap().passed());
            prop_assert!(sweep_events(&m, 16).unwrap().passed());
            if f.exclusive_atom_count() <= 7 {
                prop_assert!(check_axioms_brute(&m, 7).unwrap().passed());
            }
        }
        let full = extend_full(&f, &rho).unwrap().to_model(1 << 16).unwrap();
        prop_assert!(check_axioms(&full).unwrap().passed());
        prop_assert!(sweep_events(&full, 16).unwrap().passed());
        // A faithful state makes every nonempty event a condition.
        let n_atoms = f.exclusive_atom_count();
        prop_assert_eq!(full.conditions().len(), (1usize << n_atoms) - 1);
    }

    #[test]
    fn lem_gap_matches_the_compatible_overlap_set(axes in prop::collection::vec(axis(), 1..=3)) {
        let f = family(&axes);
        for a in all_elements(&f, 200).unwrap().into_iter().skip(1) {
            let g = lem_gap(&f, a).unwrap();
            prop_assert!(g.matches_alternative());
            prop_assert!(g.missing().is_empty());
        }
    }

    #[test]
    fn events_form_a_boolean_algebra(len in 1usize..=70, a in any::<u128>(), b in any::<u128>()) {
        let pick = |bits: u128| Event::from_indices(len, (0..len).filter(|&i| bits >> i & 1 == 1));
        let (x, y) = (pick(a), pick(b));
        prop_assert_eq!(x.union(&y).complement(), x.complement().intersection(&y.complement()));
        prop_assert_eq!(x.difference(&y), x.intersection(&y.complement()));
        prop_assert!(x.intersection(&y).is_subset(&x));
        prop_assert_eq!(x.count() + x.complement().count(), len);
    }

    #[test]
    fn scenario_round_trips(axes in prop::collection::vec(axis(), 1..=3), n in axis(), s in (0i64..=4).prop_map(|k| rat(k, 4))) {
        let f = family(&axes);
        let rho = bloch_state(&n, &s);
        let contexts = f
            .contexts()
            .iter()
            .filter(|c| !c.is_trivial())
            .enumerate()
            .map(|(k, c)| ContextSpec { name: format!("N{k}"), atoms: c.atoms().iter().map(|p| p.matrix().clone()).collect() })
            .collect();
        let scn = Scenario::new(2, contexts, rho, Default::default(), None).unwrap();
        let text = scn.to_toml_string();
        prop_assert_eq!(parse_scenario(&text).unwrap(), scn);
    }
}
