//! Dense complex matrices and the bi-invariant operator-norm metric on U(n).
//!
//! Dimensions here are small (rarely above 8, except the regular
//! representation), so everything is row-major `Vec<Complex64>` with plain
//! loops. The only delegated routine is the Hermitian eigensolver.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const DEFAULT_UNITARY_TOL: f64 = 1e-10;
pub const DEFAULT_COMMUTE_TOL: f64 = 1e-8;
/// Singular values at or below this make the polar factor undefined.
pub const POLAR_MIN_SINGULAR: f64 = 1e-12;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{:.6}", self[(i, j)])).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![ONE; n])
    }

    pub fn scalar(z: Complex64) -> Self {
        ComplexMatrix { n: 1, data: vec![z] }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("matrix must be square".into()));
        }
        Ok(ComplexMatrix { n, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        ComplexMatrix { n, data: (0..n * n).map(|k| f(k / n, k % n)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        ComplexMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        ComplexMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix { n: self.n, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: Complex64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = (self.n, other.n);
        Self::from_fn(p * q, |i, j| self[(i / q, j / q)] * other[(i % q, j % q)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self[(i, j)].norm() <= tol))
    }

    pub fn off_diagonal(&self) -> Self {
        Self::from_fn(self.n, |i, j| if i == j { ZERO } else { self[(i, j)] })
    }

    pub fn conjugate_by(&self, q: &Self) -> Self {
        q.adjoint().matmul(self).matmul(q)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self[(i, j)])
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            (0..self.n).map(|i| (0..self.n).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows = rows.into_iter().map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()).collect();
        let m = ComplexMatrix::from_rows(rows).map_err(D::Error::custom)?;
        if !m.is_finite() {
            return Err(D::Error::custom("matrix has non-finite entries"));
        }
        Ok(m)
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.dim();
    let herm = ComplexMatrix::from_fn(n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let eig = nalgebra::SymmetricEigen::new(herm.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Largest singular value, via the Hermitian eigendecomposition of `M^† M`.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entries".into()));
    }
    Ok(operator_norm_unchecked(m))
}

pub(crate) fn operator_norm_unchecked(m: &ComplexMatrix) -> f64 {
    match m.dim() {
        0 => 0.0,
        1 => m.data[0].norm(),
        2 => operator_norm_2x2(&[m.data[0], m.data[1], m.data[2], m.data[3]]),
        _ if m.is_diagonal(0.0) => m.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max),
        _ => {
            let gram = m.adjoint().matmul(m);
            let (values, _) = hermitian_eigen(&gram);
            values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
        }
    }
}

/// Operator norm of a 2x2 matrix from its entries, using the closed-form
/// largest eigenvalue of the Hermitian `M^† M`.
pub fn operator_norm_2x2(m: &[Complex64; 4]) -> f64 {
    let [a, b, c, d] = *m;
    // M^† M = [[p, q], [conj(q), r]]
    let p = a.norm_sqr() + c.norm_sqr();
    let r = b.norm_sqr() + d.norm_sqr();
    let q = a.conj() * b + c.conj() * d;
    let half_gap = ((p - r) * (p - r) * 0.25 + q.norm_sqr()).sqrt();
    (0.5 * (p + r) + half_gap).max(0.0).sqrt()
}

/// A matrix certified unitary within a tolerance.
#[derive(Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct UnitaryMatrix {
    m: ComplexMatrix,
}

impl fmt::Debug for UnitaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unitary{:?}", self.m)
    }
}

impl<'de> Deserialize<'de> for UnitaryMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        UnitaryMatrix::certify(m, DEFAULT_UNITARY_TOL).map_err(D::Error::custom)
    }
}

impl UnitaryMatrix {
    /// Checks `|M^† M - I|_op <= tol`.
    pub fn certify(m: ComplexMatrix, tol: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidMatrix("non-finite entries".into()));
        }
        let err = unitarity_error(&m);
        if err > tol {
            return Err(Error::InvalidMatrix(format!("not unitary: |M^*M - I| = {err:e} > {tol:e}")));
        }
        Ok(UnitaryMatrix { m })
    }

    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        debug_assert!(unitarity_error(&m) <= 1e-8, "unitarity error {}", unitarity_error(&m));
        UnitaryMatrix { m }
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix { m: ComplexMatrix::identity(n) }
    }

    /// `diag(e^{i t_1}, ..., e^{i t_n})`
    pub fn from_phases(angles: &[f64]) -> Self {
        let d: Vec<Complex64> = angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        UnitaryMatrix { m: ComplexMatrix::from_diagonal(&d) }
    }

    /// Diagonal unitary from unit-modulus entries (renormalized).
    pub fn from_unit_diagonal(d: &[Complex64]) -> Self {
        let d: Vec<Complex64> = d.iter().map(|z| z / z.norm()).collect();
        UnitaryMatrix { m: ComplexMatrix::from_diagonal(&d) }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    pub fn mul(&self, other: &Self) -> Self {
        UnitaryMatrix { m: self.m.matmul(&other.m) }
    }

    pub fn adjoint(&self) -> Self {
        UnitaryMatrix { m: self.m.adjoint() }
    }

    pub fn kron(&self, other: &Self) -> Self {
        UnitaryMatrix { m: self.m.kron(&other.m) }
    }

    /// `Q^† U Q`
    pub fn conjugate_by(&self, q: &UnitaryMatrix) -> Self {
        UnitaryMatrix { m: self.m.conjugate_by(&q.m) }
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.m.is_diagonal(tol)
    }

    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.m)
    }
}

pub fn unitarity_error(m: &ComplexMatrix) -> f64 {
    let x = m.adjoint().matmul(m).sub(&ComplexMatrix::identity(m.dim()));
    let fro = x.frobenius_norm();
    if fro <= 1e-14 {
        fro
    } else {
        operator_norm_unchecked(&x)
    }
}

/// `d(A, B) = |A - B|_op`, the bi-invariant metric on U(n).
pub fn unitary_distance(a: &UnitaryMatrix, b: &UnitaryMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(distance_unchecked(a.matrix(), b.matrix()))
}

pub(crate) fn distance_unchecked(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    operator_norm_unchecked(&a.sub(b))
}

/// `d(U, I)`
pub fn distance_to_identity(u: &UnitaryMatrix) -> f64 {
    distance_unchecked(u.matrix(), &ComplexMatrix::identity(u.dim()))
}

/// Chordal distance `|e^{2 pi i / r} - 1| = 2 sin(pi / r)`, and 0 for `r = 1`.
pub fn gamma(r: usize) -> f64 {
    assert!(r >= 1, "gamma is defined for r >= 1");
    if r == 1 {
        0.0
    } else {
        2.0 * (std::f64::consts::PI / r as f64).sin()
    }
}

/// Polar decomposition `M = U P` with `P` Hermitian positive-definite.
pub fn polar_decompose(m: &ComplexMatrix) -> Result<(UnitaryMatrix, ComplexMatrix)> {
    if !m.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entries".into()));
    }
    let n = m.dim();
    let u = if n == 1 {
        let z = m.data[0];
        if z.norm() <= POLAR_MIN_SINGULAR {
            return Err(Error::PolarUndefined(z.norm()));
        }
        ComplexMatrix::scalar(z / z.norm())
    } else {
        let (values, v) = hermitian_eigen(&m.adjoint().matmul(m));
        let smin = values[0].max(0.0).sqrt();
        if smin <= POLAR_MIN_SINGULAR {
            return Err(Error::PolarUndefined(smin));
        }
        let inv_sqrt: Vec<Complex64> = values.iter().map(|&l| Complex64::new(1.0 / l.sqrt(), 0.0)).collect();
        let p_inv = v.matmul(&ComplexMatrix::from_diagonal(&inv_sqrt)).matmul(&v.adjoint());
        let mut u = m.matmul(&p_inv);
        // Newton-Schulz polish: U <- U (3I - U^*U) / 2
        let three = ComplexMatrix::identity(n).scale(Complex64::new(3.0, 0.0));
        for _ in 0..2 {
            let g = u.adjoint().matmul(&u);
            u = u.matmul(&three.sub(&g)).scale(Complex64::new(0.5, 0.0));
        }
        u
    };
    let p = u.adjoint().matmul(m);
    let p = ComplexMatrix::from_fn(n, |i, j| (p[(i, j)] + p[(j, i)].conj()) * 0.5);
    Ok((UnitaryMatrix::new_unchecked(u), p))
}

/// The unitary factor of the polar decomposition: the nearest unitary to `M`.
pub fn polar_unitary_part(m: &ComplexMatrix) -> Result<UnitaryMatrix> {
    polar_decompose(m).map(|(u, _)| u)
}

pub struct Diagonalization {
    pub conjugator: UnitaryMatrix,
    /// `Q^† M Q` for each input, projected to exact unit-modulus diagonals.
    pub diagonals: Vec<UnitaryMatrix>,
}

const DIAGONALIZE_TOL: f64 = 1e-8;
const DIAGONALIZE_ATTEMPTS: u64 = 8;

/// Unitary `Q` with `Q^† M Q` diagonal for every `M` in a commuting family.
pub fn simultaneous_diagonalize(family: &[UnitaryMatrix], commute_tol: f64) -> Result<Diagonalization> {
    let n = family.first().map(|u| u.dim()).ok_or_else(|| Error::InvalidParameter("empty family".into()))?;
    if let Some(u) = family.iter().find(|u| u.dim() != n) {
        return Err(Error::DimensionMismatch { left: n, right: u.dim() });
    }
    for (i, a) in family.iter().enumerate() {
        for b in &family[i + 1..] {
            let comm = a.matrix().matmul(b.matrix()).sub(&b.matrix().matmul(a.matrix()));
            if operator_norm_unchecked(&comm) > commute_tol {
                return Err(Error::FamilyNotAbelian);
            }
        }
    }
    let project = |q: &ComplexMatrix| -> Option<Vec<UnitaryMatrix>> {
        family
            .iter()
            .map(|u| {
                let d = u.matrix().conjugate_by(q);
                (operator_norm_unchecked(&d.off_diagonal()) <= DIAGONALIZE_TOL)
                    .then(|| UnitaryMatrix::from_unit_diagonal(&d.diagonal()))
            })
            .collect()
    };
    if family.iter().all(|u| u.is_diagonal(1e-14)) {
        let q = ComplexMatrix::identity(n);
        let diagonals = project(&q).expect("diagonal family");
        return Ok(Diagonalization { conjugator: UnitaryMatrix::identity(n), diagonals });
    }
    for attempt in 0..DIAGONALIZE_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(0xd1a6 + attempt);
        let mut h = ComplexMatrix::zeros(n);
        for u in family {
            let c = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            h.add_assign_scaled(u.matrix(), c);
            h.add_assign_scaled(&u.matrix().adjoint(), c.conj());
        }
        let (_, q) = hermitian_eigen(&h);
        if let Some(diagonals) = project(&q) {
            return Ok(Diagonalization { conjugator: UnitaryMatrix::new_unchecked(q), diagonals });
        }
    }
    Err(Error::InvariantViolated("simultaneous diagonalization did not separate the family".into()))
}

pub fn random_complex_matrix<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..n * n)
        .map(|_| Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
        .collect();
    ComplexMatrix { n, data }
}

/// Haar-distributed unitary: the polar factor of a Ginibre matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> UnitaryMatrix {
    loop {
        let g = random_complex_matrix(n, rng);
        if let Ok(u) = polar_unitary_part(&g) {
            return u;
        }
    }
}

/// Unitary `exp(iH)` close to the identity, with `|U - I|_op <= radius`.
pub fn random_unitary_near_identity<R: Rng>(n: usize, radius: f64, rng: &mut R) -> UnitaryMatrix {
    let g = random_complex_matrix(n, rng);
    let h = ComplexMatrix::from_fn(n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5);
    let (values, v) = hermitian_eigen(&h);
    let spread = values.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
    // |e^{it} - 1| = 2 sin(|t|/2) <= radius
    let max_angle = 2.0 * (radius / 2.0).min(1.0).asin();
    let scale = rng.random::<f64>() * max_angle / spread;
    let phases: Vec<Complex64> = values.iter().map(|&x| Complex64::from_polar(1.0, x * scale)).collect();
    let u = v.matmul(&ComplexMatrix::from_diagonal(&phases)).matmul(&v.adjoint());
    UnitaryMatrix::new_unchecked(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Power iteration on `M^† M`, independent of the eigensolver.
    fn power_iteration_norm(m: &ComplexMatrix) -> f64 {
        let n = m.dim();
        let gram = m.adjoint().matmul(m);
        let mut v: Vec<Complex64> = (0..n).map(|i| c(1.0 + i as f64 * 0.37, 0.1 * i as f64)).collect();
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let w: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| gram[(i, j)] * v[j]).sum()).collect();
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            lambda = norm;
            v = w.iter().map(|z| z / norm).collect();
        }
        lambda.sqrt()
    }

    #[test]
    fn operator_norm_identity_and_diagonal() {
        assert!((operator_norm(&ComplexMatrix::identity(3)).unwrap() - 1.0).abs() < 1e-15);
        let m = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(0.0, 1.0)]).sub(&ComplexMatrix::identity(2));
        assert!((operator_norm(&m).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn operator_norm_matches_power_iteration() {
        let mut r = rng(11);
        for _ in 0..20 {
            let m = random_complex_matrix(3, &mut r);
            let a = operator_norm(&m).unwrap();
            let b = power_iteration_norm(&m);
            assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn operator_norm_rejects_nan() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(operator_norm(&m), Err(Error::InvalidMatrix(_))));
    }

    #[test]
    fn two_by_two_closed_form_agrees() {
        let mut r = rng(3);
        for _ in 0..50 {
            let m = random_complex_matrix(2, &mut r);
            let entries = [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]];
            let a = {
                let (values, _) = hermitian_eigen(&m.adjoint().matmul(&m));
                values[1].sqrt()
            };
            assert!((operator_norm_2x2(&entries) - a).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn distance_examples() {
        let i2 = UnitaryMatrix::identity(2);
        let minus = UnitaryMatrix::from_phases(&[PI, PI]);
        assert!((unitary_distance(&i2, &minus).unwrap() - 2.0).abs() < 1e-15);
        for k in 0..=20 {
            let t = PI * k as f64 / 20.0;
            let u = UnitaryMatrix::from_phases(&[t, 0.0]);
            let d = unitary_distance(&u, &i2).unwrap();
            assert!((d - 2.0 * (t / 2.0).sin()).abs() < 1e-14);
        }
        assert!(matches!(unitary_distance(&i2, &UnitaryMatrix::identity(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn distance_is_bi_invariant_and_a_metric() {
        let mut r = rng(5);
        for _ in 0..100 {
            let (a, b, u, v) = (
                random_unitary(3, &mut r),
                random_unitary(3, &mut r),
                random_unitary(3, &mut r),
                random_unitary(3, &mut r),
            );
            let d = unitary_distance(&a, &b).unwrap();
            let d2 = unitary_distance(&u.mul(&a).mul(&v), &u.mul(&b).mul(&v)).unwrap();
            assert!((d - d2).abs() < 1e-10);
            let cc = random_unitary(3, &mut r);
            let lhs = unitary_distance(&a, &cc).unwrap();
            assert!(lhs <= d + unitary_distance(&b, &cc).unwrap() + 1e-12);
        }
    }

    #[test]
    fn diagonal_distance_is_max_slot_distance() {
        let grid: Vec<f64> = (0..12).map(|k| 2.0 * PI * k as f64 / 12.0).collect();
        for &a0 in &grid {
            for &a1 in &grid {
                for &b0 in &grid {
                    let a = UnitaryMatrix::from_phases(&[a0, a1]);
                    let b = UnitaryMatrix::from_phases(&[b0, 0.0]);
                    let slot = |x: f64, y: f64| (Complex64::from_polar(1.0, x) - Complex64::from_polar(1.0, y)).norm();
                    let expect = slot(a0, b0).max(slot(a1, 0.0));
                    // general path, bypassing the diagonal shortcut
                    let q = random_unitary(2, &mut rng(1));
                    let d = unitary_distance(&a.conjugate_by(&q), &b.conjugate_by(&q)).unwrap();
                    assert!((d - expect).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn polar_examples() {
        let mut r = rng(9);
        let u = random_unitary(3, &mut r);
        let p = polar_unitary_part(u.matrix()).unwrap();
        assert!(distance_unchecked(p.matrix(), u.matrix()) < 1e-12);
        let twice = polar_unitary_part(&u.matrix().scale(c(2.0, 0.0))).unwrap();
        assert!(distance_unchecked(twice.matrix(), u.matrix()) < 1e-12);
        for _ in 0..20 {
            let m = random_complex_matrix(3, &mut r).add(&ComplexMatrix::identity(3).scale(c(3.0, 0.0)));
            let (u, p) = polar_decompose(&m).unwrap();
            assert!(u.unitarity_error() <= 1e-10);
            assert!(operator_norm(&m.sub(&u.matrix().matmul(&p))).unwrap() <= 1e-9);
            let (evals, _) = hermitian_eigen(&p);
            assert!(evals[0] > 0.0);
            // idempotent on its image
            let again = polar_unitary_part(u.matrix()).unwrap();
            assert!(distance_unchecked(again.matrix(), u.matrix()) < 1e-12);
        }
    }

    #[test]
    fn polar_is_nearest_unitary_among_samples() {
        let mut r = rng(21);
        let m = random_complex_matrix(2, &mut r).add(&ComplexMatrix::identity(2).scale(c(2.0, 0.0)));
        let u = polar_unitary_part(&m).unwrap();
        let best = operator_norm(&m.sub(u.matrix())).unwrap();
        for _ in 0..2000 {
            let w = random_unitary(2, &mut r);
            assert!(operator_norm(&m.sub(w.matrix())).unwrap() >= best - 1e-12);
        }
    }

    #[test]
    fn polar_rejects_singular() {
        let m = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(polar_unitary_part(&m), Err(Error::PolarUndefined(_))));
    }

    #[test]
    fn diagonalize_already_diagonal() {
        let fam = vec![UnitaryMatrix::from_phases(&[0.3, 1.0]), UnitaryMatrix::from_phases(&[2.0, -1.0])];
        let d = simultaneous_diagonalize(&fam, DEFAULT_COMMUTE_TOL).unwrap();
        assert_eq!(d.conjugator, UnitaryMatrix::identity(2));
    }

    #[test]
    fn diagonalize_z4_rotations() {
        let rot = |k: usize| {
            let t = PI * k as f64 / 2.0;
            let m = ComplexMatrix::from_rows(vec![
                vec![c(t.cos(), 0.0), c(-t.sin(), 0.0)],
                vec![c(t.sin(), 0.0), c(t.cos(), 0.0)],
            ])
            .unwrap();
            UnitaryMatrix::certify(m, 1e-12).unwrap()
        };
        let fam: Vec<UnitaryMatrix> = (0..4).map(rot).collect();
        let d = simultaneous_diagonalize(&fam, DEFAULT_COMMUTE_TOL).unwrap();
        let i = c(0.0, 1.0);
        let gen = d.diagonals[1].matrix().diagonal();
        // eigenvalues of R(pi/2) are {i, -i} in some order
        let first_is_i = (gen[0] - i).norm() < 1e-8;
        for (k, diag) in d.diagonals.iter().enumerate() {
            let want = [i.powu(k as u32), (-i).powu(k as u32)];
            let got = diag.matrix().diagonal();
            let (a, b) = if first_is_i { (got[0], got[1]) } else { (got[1], got[0]) };
            assert!((a - want[0]).norm() < 1e-8 && (b - want[1]).norm() < 1e-8);
        }
        for (m, diag) in fam.iter().zip(&d.diagonals) {
            let back = diag.matrix().conjugate_by(d.conjugator.adjoint().matrix());
            assert!(distance_unchecked(&back, m.matrix()) < 1e-8);
        }
    }

    #[test]
    fn diagonalize_recovers_construction() {
        let mut r = rng(17);
        let q = random_unitary(3, &mut r);
        let fam: Vec<UnitaryMatrix> = (0..3)
            .map(|k| UnitaryMatrix::from_phases(&[0.4 * k as f64, 1.1, -0.7 * k as f64]).conjugate_by(&q.adjoint()))
            .collect();
        let d = simultaneous_diagonalize(&fam, DEFAULT_COMMUTE_TOL).unwrap();
        for (m, diag) in fam.iter().zip(&d.diagonals) {
            let dm = m.matrix().conjugate_by(d.conjugator.matrix());
            assert!(operator_norm(&dm.sub(diag.matrix())).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn diagonalize_rejects_noncommuting() {
        let x =
            UnitaryMatrix::certify(ComplexMatrix::from_rows(vec![vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap(), 1e-12)
                .unwrap();
        let z = UnitaryMatrix::from_phases(&[0.0, PI]);
        assert!(matches!(simultaneous_diagonalize(&[x, z], DEFAULT_COMMUTE_TOL), Err(Error::FamilyNotAbelian)));
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(1), 0.0);
        assert!((gamma(2) - 2.0).abs() < 1e-15);
        assert!((gamma(4) - 2f64.sqrt()).abs() < 1e-15);
        assert!((gamma(6) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn near_identity_sampler_respects_radius() {
        let mut r = rng(2);
        for _ in 0..200 {
            let u = random_unitary_near_identity(2, 0.005, &mut r);
            assert!(distance_to_identity(&u) <= 0.005 + 1e-15);
        }
    }

    #[test]
    fn json_is_nested_re_im_pairs() {
        let u = UnitaryMatrix::from_phases(&[PI / 2.0]);
        let s = serde_json::to_string(&u).unwrap();
        assert!(s.starts_with("[[["), "{s}");
        let back: UnitaryMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, u);
        assert!(serde_json::from_str::<UnitaryMatrix>("[[[2.0,0.0]]]").is_err());
    }
}
