#![allow(dead_code)]

use qprop::context::{close_family, make_context, Context, ContextFamily};
use qprop::fixtures::{ax, ay, az, bell_family, qubit_family};
use qprop::matrix::{Projection, QMatrix};
use qprop::scalar::GaussianRational as G;
use qprop::scenario::{parse_scenario, Scenario};
use qprop::slattice::element_count;

pub fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn load(name: &str) -> Scenario {
    parse_scenario(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

pub const FIXTURES: [&str; 5] = [
    "qubit_z.toml",
    "qubit_zx.toml",
    "qubit_xyz.toml",
    "bell_singlet.toml",
    "bell_mixed.toml",
];

fn real_projection(rows: &[[(i64, i64); 3]]) -> Projection {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|&(n, d)| G::from_ratio(n, d)).collect())
        .collect();
    Projection::new(QMatrix::from_rows(rows).unwrap()).unwrap()
}

/// A qutrit family: the standard basis, a coarsening of it, and the
/// two-outcome test of `(1,1,1)/√3`.
pub fn qutrit_family() -> ContextFamily {
    let e = |i: usize| {
        let mut rows = [[(0, 1); 3]; 3];
        rows[i][i] = (1, 1);
        real_projection(&rows)
    };
    let v = real_projection(&[[(1, 3); 3]; 3]);
    let basis = make_context(3, &[e(0), e(1)]).unwrap().with_name("D");
    let coarse = make_context(3, &[e(2)]).unwrap().with_name("W");
    let tilted = make_context(3, &[v]).unwrap().with_name("V");
    close_family(3, vec![basis, coarse, tilted], 64).unwrap()
}

/// Every small family the tests sweep: all qubit subfamilies of the three
/// axes, the qutrit family and the EPR-Bohm family.
pub fn small_families() -> Vec<(String, ContextFamily)> {
    let axes = [("z", az as fn() -> Context), ("x", ax), ("y", ay)];
    let mut out = Vec::new();
    for bits in 0..8u32 {
        let seed: Vec<Context> = (0..3).filter(|i| bits >> i & 1 == 1).map(|i| axes[i].1()).collect();
        let label: String = (0..3).filter(|i| bits >> i & 1 == 1).map(|i| axes[i].0).collect();
        out.push((format!("qubit{{{label}}}"), qubit_family(seed)));
    }
    out.push(("qutrit".into(), qutrit_family()));
    out.push(("bell".into(), bell_family()));
    out.retain(|(_, f)| element_count(f) <= 200);
    out
}
