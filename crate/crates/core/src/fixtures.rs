//! Standard qubit and EPR-Bohm fixtures used by the tests, the CLI and the docs.

use crate::context::{close_family, Context, ContextFamily, Observable};
use crate::matrix::{kron, qubit_spin_projection, DensityOperator, Projection, QMatrix};
use crate::scalar::{int, rat, GaussianRational as G, Rational};

pub fn z_axis() -> [Rational; 3] {
    [int(0), int(0), int(1)]
}

pub fn x_axis() -> [Rational; 3] {
    [int(1), int(0), int(0)]
}

pub fn y_axis() -> [Rational; 3] {
    [int(0), int(1), int(0)]
}

pub fn pz(sign: i32) -> Projection {
    qubit_spin_projection(&z_axis(), sign).unwrap()
}

pub fn px(sign: i32) -> Projection {
    qubit_spin_projection(&x_axis(), sign).unwrap()
}

pub fn py(sign: i32) -> Projection {
    qubit_spin_projection(&y_axis(), sign).unwrap()
}

pub fn spin_context(n: &[Rational; 3], name: &str) -> Context {
    Context::new(
        vec![
            qubit_spin_projection(n, 1).unwrap(),
            qubit_spin_projection(n, -1).unwrap(),
        ],
        Some(name.into()),
    )
    .unwrap()
}

pub fn az() -> Context {
    spin_context(&z_axis(), "Az")
}

pub fn ax() -> Context {
    spin_context(&x_axis(), "Ax")
}

pub fn ay() -> Context {
    spin_context(&y_axis(), "Ay")
}

pub fn sigma_z() -> Observable {
    Observable::new(vec![(int(1), pz(1)), (int(-1), pz(-1))]).unwrap()
}

/// Closed qubit family generated by the given contexts.
pub fn qubit_family(seed: Vec<Context>) -> ContextFamily {
    close_family(2, seed, 64).unwrap()
}

/// `diag(3/4, 1/4)`.
pub fn biased_qubit_state() -> DensityOperator {
    DensityOperator::new(QMatrix::diagonal(&[G::from_ratio(3, 4), G::from_ratio(1, 4)])).unwrap()
}

/// Alice measures along z and x, Bob along (±3/5, 0, 4/5).
pub fn bell_directions() -> ([[Rational; 3]; 2], [[Rational; 3]; 2]) {
    (
        [z_axis(), x_axis()],
        [[rat(3, 5), int(0), rat(4, 5)], [rat(-3, 5), int(0), rat(4, 5)]],
    )
}

fn lift_left(p: &Projection) -> Projection {
    Projection::new(kron(p.matrix(), &QMatrix::identity(2))).unwrap()
}

fn lift_right(p: &Projection) -> Projection {
    Projection::new(kron(&QMatrix::identity(2), p.matrix())).unwrap()
}

/// Marginal algebras `A_i ⊗ 1` and `1 ⊗ B_j` on dimension 4, named A1, A2, B1, B2.
pub fn bell_seed() -> Vec<Context> {
    let (alice, bob) = bell_directions();
    let mut seed = Vec::new();
    for (k, n) in alice.iter().enumerate() {
        let atoms = [1, -1].map(|s| lift_left(&qubit_spin_projection(n, s).unwrap()));
        seed.push(Context::new(atoms.to_vec(), Some(format!("A{}", k + 1))).unwrap());
    }
    for (k, n) in bob.iter().enumerate() {
        let atoms = [1, -1].map(|s| lift_right(&qubit_spin_projection(n, s).unwrap()));
        seed.push(Context::new(atoms.to_vec(), Some(format!("B{}", k + 1))).unwrap());
    }
    seed
}

pub fn bell_family() -> ContextFamily {
    close_family(4, bell_seed(), 64).unwrap()
}

fn singlet_vector() -> Vec<G> {
    vec![G::zero(), G::one(), -G::one(), G::zero()]
}

/// Projection onto `(|01> - |10>)/√2`.
pub fn singlet_projection() -> Projection {
    Projection::new(singlet_state().matrix().clone()).unwrap()
}

pub fn singlet_state() -> DensityOperator {
    DensityOperator::pure(&singlet_vector()).unwrap()
}
