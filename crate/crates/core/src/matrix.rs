//! Exact square matrices over Q(i), projections, and density operators.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{GaussianRational as G, Rational};

pub type QVector = Vec<G>;

/// Square matrix stored row-major. The derived order is the canonical one:
/// dimension first, then entries in row-major order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QMatrix {
    dim: usize,
    entries: Vec<G>,
}

impl QMatrix {
    pub fn new(dim: usize, entries: Vec<G>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadShape { expected: 1, found: 0 });
        }
        if entries.len() != dim * dim {
            return Err(Error::BadShape {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: Vec<Vec<G>>) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::BadShape {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Self::new(dim, entries)
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![G::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for k in 0..dim {
            m.entries[k * dim + k] = G::one();
        }
        m
    }

    pub fn diagonal(diag: &[G]) -> Self {
        let mut m = Self::zero(diag.len());
        for (k, d) in diag.iter().enumerate() {
            m.entries[k * diag.len() + k] = d.clone();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &G {
        &self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[G] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[G]> {
        self.entries.chunks(self.dim)
    }

    pub fn column(&self, col: usize) -> QVector {
        (0..self.dim).map(|r| self.get(r, col).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(G::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                entries.push(self.get(c, r).conj());
            }
        }
        Self { dim: n, entries }
    }

    pub fn is_self_adjoint(&self) -> bool {
        (0..self.dim).all(|r| (r..self.dim).all(|c| *self.get(r, c) == self.get(c, r).conj()))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.mul(other))
    }

    /// Matrix product. Panics on mismatched dimensions; see [`QMatrix::try_mul`].
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut entries = vec![G::zero(); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        entries[r * n + c] += &(a * b);
                    }
                }
            }
        }
        Self { dim: n, entries }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Self { dim: self.dim, entries }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Self { dim: self.dim, entries }
    }

    pub fn scale(&self, s: &G) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * s).collect(),
        }
    }

    pub fn trace(&self) -> G {
        let mut t = G::zero();
        for k in 0..self.dim {
            t += self.get(k, k);
        }
        t
    }

    pub fn apply(&self, v: &[G]) -> QVector {
        self.rows()
            .map(|row| row.iter().zip(v).fold(G::zero(), |acc, (a, b)| &acc + &(a * b)))
            .collect()
    }

    /// Kronecker product; the result has dimension `dim1 * dim2`.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        let mut entries = vec![G::zero(); dim * dim];
        for r1 in 0..n {
            for c1 in 0..n {
                let a = self.get(r1, c1);
                if a.is_zero() {
                    continue;
                }
                for r2 in 0..m {
                    for c2 in 0..m {
                        entries[(r1 * m + r2) * dim + c1 * m + c2] = a * other.get(r2, c2);
                    }
                }
            }
        }
        Self { dim, entries }
    }

    pub fn rank(&self) -> usize {
        let cols: Vec<QVector> = (0..self.dim).map(|c| self.column(c)).collect();
        rref(&cols, self.dim).pivots.len()
    }

    /// Basis of the kernel, as column vectors.
    pub fn nullspace(&self) -> Vec<QVector> {
        let n = self.dim;
        let cols: Vec<QVector> = (0..n).map(|c| self.column(c)).collect();
        let reduced = rref(&cols, n);
        let free: Vec<usize> = (0..n).filter(|c| !reduced.pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![G::zero(); n];
                v[f] = G::one();
                for (row, &p) in reduced.pivots.iter().enumerate() {
                    v[p] = -reduced.get(row, f);
                }
                v
            })
            .collect()
    }

    pub fn determinant(&self) -> G {
        determinant(self.dim, self.entries.clone())
    }

    /// Determinant of the principal submatrix on `indices`.
    pub fn principal_minor(&self, indices: &[usize]) -> G {
        let k = indices.len();
        let mut entries = Vec::with_capacity(k * k);
        for &r in indices {
            for &c in indices {
                entries.push(self.get(r, c).clone());
            }
        }
        determinant(k, entries)
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (r, row) in self.rows().enumerate() {
            if r > 0 {
                f.write_str(",")?;
            }
            f.write_str("[")?;
            for (c, x) in row.iter().enumerate() {
                if c > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Row-reduced echelon form of the matrix whose columns are `cols`.
struct Rref {
    rows: Vec<Vec<G>>,
    pivots: Vec<usize>,
}

impl Rref {
    fn get(&self, row: usize, col: usize) -> &G {
        &self.rows[row][col]
    }
}

fn rref(cols: &[QVector], nrows: usize) -> Rref {
    let ncols = cols.len();
    let mut rows: Vec<Vec<G>> = (0..nrows)
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut lead = 0;
    for c in 0..ncols {
        let Some(p) = (lead..nrows).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(lead, p);
        let inv = rows[lead][c].inv().expect("nonzero pivot");
        for x in rows[lead].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = rows[lead].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == lead || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = &*x - &(&factor * p);
            }
        }
        pivots.push(c);
        lead += 1;
        if lead == nrows {
            break;
        }
    }
    Rref { rows, pivots }
}

fn determinant(n: usize, mut a: Vec<G>) -> G {
    if n == 0 {
        return G::one();
    }
    let mut det = G::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r * n + c].is_zero()) else {
            return G::zero();
        };
        if p != c {
            for k in 0..n {
                a.swap(p * n + k, c * n + k);
            }
            det = -det;
        }
        let pivot = a[c * n + c].clone();
        det = &det * &pivot;
        let inv = pivot.inv().expect("nonzero pivot");
        for r in c + 1..n {
            let factor = &a[r * n + c] * &inv;
            if factor.is_zero() {
                continue;
            }
            for k in c..n {
                let sub = &factor * &a[c * n + k];
                a[r * n + k] = &a[r * n + k] - &sub;
            }
        }
    }
    det
}

fn inverse(m: &QMatrix) -> Option<QMatrix> {
    let n = m.dim;
    let mut aug: Vec<Vec<G>> = m
        .rows()
        .enumerate()
        .map(|(r, row)| {
            let mut v = row.to_vec();
            v.extend((0..n).map(|c| if c == r { G::one() } else { G::zero() }));
            v
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !aug[r][c].is_zero())?;
        aug.swap(c, p);
        let inv = aug[c][c].inv()?;
        for x in aug[c].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = aug[c].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == c || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = &*x - &(&factor * p);
            }
        }
    }
    let entries = aug.into_iter().flat_map(|row| row.into_iter().skip(n)).collect();
    Some(QMatrix { dim: n, entries })
}

/// A self-adjoint idempotent matrix. Both laws are checked exactly on construction.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Projection(QMatrix);

impl Projection {
    pub fn new(m: QMatrix) -> Result<Self> {
        if !m.is_self_adjoint() {
            return Err(Error::NotProjection {
                reason: "not self-adjoint",
                matrix: m.to_string(),
            });
        }
        if m.mul(&m) != m {
            return Err(Error::NotProjection {
                reason: "not idempotent",
                matrix: m.to_string(),
            });
        }
        Ok(Self(m))
    }

    pub fn zero(dim: usize) -> Self {
        Self(QMatrix::zero(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(QMatrix::identity(dim))
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> QMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_identity()
    }

    /// Rank, read off the (integer) trace.
    pub fn rank(&self) -> usize {
        let t = self.0.trace();
        t.re().to_integer().try_into().expect("rank fits in usize")
    }

    pub fn complement(&self) -> Self {
        Self(QMatrix::identity(self.dim()).sub(&self.0))
    }

    /// `self <= other` in the projection order, i.e. `self * other == self`.
    pub fn is_below(&self, other: &Self) -> bool {
        self.0.mul(&other.0) == self.0
    }

    pub fn is_orthogonal_to(&self, other: &Self) -> bool {
        self.0.mul(&other.0).is_zero()
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        !self.is_orthogonal_to(other)
    }

    /// Sum of pairwise-orthogonal projections. Panics when the sum is not a projection.
    pub fn sum<'a>(dim: usize, parts: impl IntoIterator<Item = &'a Projection>) -> Self {
        let m = parts.into_iter().fold(QMatrix::zero(dim), |acc, p| acc.add(&p.0));
        Self::new(m).expect("sum of orthogonal projections")
    }

    /// Product of two commuting projections.
    pub fn product(&self, other: &Self) -> Self {
        Self::new(self.0.mul(&other.0)).expect("product of commuting projections")
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// `B (B* B)^-1 B*` for a maximal independent subset `B` of `vectors`.
/// The result stays in Q(i); no orthonormalisation is needed.
pub fn project_onto_span(dim: usize, vectors: &[QVector]) -> Result<Projection> {
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    let basis: Vec<&QVector> = rref(vectors, dim).pivots.iter().map(|&k| &vectors[k]).collect();
    if basis.is_empty() {
        return Ok(Projection::zero(dim));
    }
    let k = basis.len();
    // Gram matrix B*B (k x k).
    let mut gram = Vec::with_capacity(k * k);
    for a in &basis {
        for b in &basis {
            gram.push(
                a.iter()
                    .zip(b.iter())
                    .fold(G::zero(), |acc, (x, y)| &acc + &(&x.conj() * y)),
            );
        }
    }
    let gram_inv =
        inverse(&QMatrix { dim: k, entries: gram }).expect("independent vectors have invertible Gram matrix");
    let mut entries = vec![G::zero(); dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            let mut acc = G::zero();
            for (i, bi) in basis.iter().enumerate() {
                if bi[r].is_zero() {
                    continue;
                }
                for (j, bj) in basis.iter().enumerate() {
                    let term = &(&bi[r] * gram_inv.get(i, j)) * &bj[c].conj();
                    acc += &term;
                }
            }
            entries[r * dim + c] = acc;
        }
    }
    Projection::new(QMatrix { dim, entries })
}

/// Projection onto `range(p1) ∩ range(p2)`, the kernel of `(1 - p1) + (1 - p2)`.
pub fn proj_meet(p1: &Projection, p2: &Projection) -> Result<Projection> {
    p1.0.check_dim(&p2.0)?;
    let k = p1.complement().0.add(&p2.complement().0);
    project_onto_span(p1.dim(), &k.nullspace())
}

/// Projection onto `range(p1) + range(p2)`.
pub fn proj_join(p1: &Projection, p2: &Projection) -> Result<Projection> {
    p1.0.check_dim(&p2.0)?;
    let n = p1.dim();
    let cols: Vec<QVector> = (0..n)
        .map(|c| p1.0.column(c))
        .chain((0..n).map(|c| p2.0.column(c)))
        .collect();
    project_onto_span(n, &cols)
}

pub fn commutes(p1: &Projection, p2: &Projection) -> bool {
    p1.dim() == p2.dim() && p1.0.mul(&p2.0) == p2.0.mul(&p1.0)
}

pub fn kron(m1: &QMatrix, m2: &QMatrix) -> QMatrix {
    m1.kron(m2)
}

pub fn pauli() -> [QMatrix; 3] {
    let z = G::zero;
    let o = G::one;
    [
        QMatrix::from_rows(vec![vec![z(), o()], vec![o(), z()]]).unwrap(),
        QMatrix::from_rows(vec![vec![z(), -G::i()], vec![G::i(), z()]]).unwrap(),
        QMatrix::from_rows(vec![vec![o(), z()], vec![z(), -o()]]).unwrap(),
    ]
}

/// `(1 + sign * n·σ) / 2` for a rational unit vector `n`.
pub fn qubit_spin_projection(n: &[Rational; 3], sign: i32) -> Result<Projection> {
    if sign != 1 && sign != -1 {
        return Err(Error::BadSign(sign));
    }
    let norm: Rational = n.iter().map(|x| x * x).sum();
    if !norm.is_one() {
        let shown: Vec<String> = n.iter().map(crate::scalar::format_rational).collect();
        return Err(Error::NotUnitVector(format!("({})", shown.join(","))));
    }
    let half = G::from_ratio(sign as i64, 2);
    let mut m = QMatrix::identity(2).scale(&G::from_ratio(1, 2));
    for (sigma, coord) in pauli().iter().zip(n) {
        m = m.add(&sigma.scale(&(&half * &G::real(coord.clone()))));
    }
    Projection::new(m)
}

/// A positive, trace-one, self-adjoint matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DensityOperator(QMatrix);

impl DensityOperator {
    pub fn new(m: QMatrix) -> Result<Self> {
        let fail = |reason| Error::NotDensity {
            reason,
            matrix: m.to_string(),
        };
        if !m.is_self_adjoint() {
            return Err(fail("not self-adjoint"));
        }
        if !m.trace().is_real() || !m.trace().re().is_one() {
            return Err(fail("trace is not 1"));
        }
        // Sylvester: a Hermitian matrix is positive semidefinite iff every
        // principal minor (not only the leading ones) is nonnegative.
        let n = m.dim();
        for subset in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|&k| subset >> k & 1 == 1).collect();
            let det = m.principal_minor(&idx);
            if det.re().is_negative() {
                return Err(fail("not positive semidefinite"));
            }
        }
        Ok(Self(m))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(QMatrix::identity(dim).scale(&G::from_ratio(1, dim as i64)))
    }

    /// `|psi><psi| / <psi|psi>` for a nonzero vector.
    pub fn pure(psi: &[G]) -> Result<Self> {
        let dim = psi.len();
        let norm: Rational = psi.iter().map(G::norm_sqr).sum();
        if norm.is_zero() {
            return Err(Error::NotDensity {
                reason: "zero vector",
                matrix: "0".into(),
            });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for a in psi {
            for b in psi {
                entries.push((a * &b.conj()).scale(&norm.recip()));
            }
        }
        Self::new(QMatrix::new(dim, entries)?)
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    /// `Tr(rho P)`; real because both factors are self-adjoint.
    pub fn expectation(&self, p: &Projection) -> Rational {
        self.expectation_of(p.matrix())
    }

    /// `Tr(rho A)` for self-adjoint `A`.
    pub fn expectation_of(&self, a: &QMatrix) -> Rational {
        let n = self.dim();
        let mut t = G::zero();
        for r in 0..n {
            for c in 0..n {
                t += &(self.0.get(r, c) * a.get(c, r));
            }
        }
        debug_assert!(t.is_real());
        t.re().clone()
    }

    pub fn is_faithful(&self) -> bool {
        self.0.rank() == self.dim()
    }
}

impl fmt::Display for DensityOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for DensityOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}
