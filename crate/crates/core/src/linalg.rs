//! Dense complex linear algebra for small operators (dimension ≤ 8).
//!
//! Basis convention used throughout the crate: for a single qubit, index 0 is
//! the excited state `|1⟩` and index 1 the ground state `|0⟩`, so that
//! `σ_z = diag(1, -1)`. Multi-qubit indices follow the Kronecker order of
//! [`tensor`], i.e. `|11⟩, |10⟩, |01⟩, |00⟩` for two qubits.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use thiserror::Error;

pub type C64 = Complex<f64>;

/// Default absolute tolerance for Hermiticity checks.
pub const HERM_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are flagged as degenerate.
pub const EIG_DEGENERACY_TOL: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("not a density operator: {0}")]
    NotDensity(String),
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from rows. Panics if the rows are not square.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "row {i} has wrong length");
            for (j, &z) in row.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        m
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let rows: Vec<Vec<C64>> =
            rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// The projector `|v⟩⟨v|` (not normalized).
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_{ij} |M_ij - conj(M_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `U M U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        &(u * self) * &u.adjoint()
    }

    fn check_same_dim(&self, other: &Self) -> Result<(), LinalgError> {
        if self.dim != other.dim {
            return Err(LinalgError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// True iff `max_{ij} |M_ij - conj(M_ji)| <= tol`.
pub fn hermitian_check(m: &ComplexMatrix, tol: f64) -> bool {
    m.hermitian_deviation() <= tol
}

/// Checks Hermiticity, unit trace and positivity, each to within `tol`.
pub fn check_density(m: &ComplexMatrix, tol: f64) -> Result<HermitianEigenSystem, LinalgError> {
    let es = eigh(m)?;
    let tr = m.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(LinalgError::NotDensity(format!("trace {tr}")));
    }
    if let Some(&p) = es.eigenvalues.first() {
        if p < -tol {
            return Err(LinalgError::NotDensity(format!("negative eigenvalue {p:e}")));
        }
    }
    Ok(es)
}

/// Hilbert-Schmidt inner product `tr(A† B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64, LinalgError> {
    a.check_same_dim(b)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

/// Kronecker product; row index of the result is `a * dim(B) + b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim, b.dim);
    ComplexMatrix::from_fn(na * nb, |i, j| a[(i / nb, j / nb)] * b[(i % nb, j % nb)])
}

/// Kronecker product of two vectors, same index convention as [`tensor`].
pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub mod pauli {
    use super::{ComplexMatrix, C64};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
    }

    pub fn y() -> ComplexMatrix {
        let i = C64::new(0.0, 1.0);
        ComplexMatrix::from_rows(&[vec![C64::new(0.0, 0.0), -i], vec![i, C64::new(0.0, 0.0)]])
    }

    /// `|1⟩⟨1| - |0⟩⟨0|` in the excited-first basis.
    pub fn z() -> ComplexMatrix {
        ComplexMatrix::diag(&[1.0, -1.0])
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigenSystem {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` pairs with `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<C64>>,
    /// Some adjacent eigenvalue pair is closer than [`EIG_DEGENERACY_TOL`].
    pub degenerate: bool,
}

impl HermitianEigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ_k λ_k |Φ_k⟩⟨Φ_k|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim());
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            m = &m + &ComplexMatrix::outer(v).scale_real(*lam);
        }
        m
    }

    /// `Σ_k f(λ_k) |Φ_k⟩⟨Φ_k|`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim());
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            m = &m + &ComplexMatrix::outer(v).scale_real(f(*lam));
        }
        m
    }

    /// Matrix elements `⟨Φ_k|A|Φ_l⟩` in the eigenbasis.
    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        let av: Vec<Vec<C64>> = self.eigenvectors.iter().map(|v| a.mat_vec(v)).collect();
        ComplexMatrix::from_fn(n, |k, l| inner(&self.eigenvectors[k], &av[l]))
    }
}

/// Eigendecomposition by cyclic complex Jacobi rotations.
///
/// Eigenvalues come back ascending. Each eigenvector is normalized and its
/// largest-magnitude component (first one on ties) is made real positive.
pub fn eigh(m: &ComplexMatrix) -> Result<HermitianEigenSystem, LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERM_TOL {
        return Err(LinalgError::NotHermitian { deviation });
    }
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    let target = JACOBI_REL_TOL * scale;

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps, off_norm: off_norm(&a) });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = off_norm(&a) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let eigenvectors: Vec<Vec<C64>> = order
        .iter()
        .map(|&k| {
            let mut col: Vec<C64> = (0..n).map(|i| v[(i, k)]).collect();
            fix_phase(&mut col);
            col
        })
        .collect();
    let degenerate = eigenvalues.windows(2).any(|w| (w[1] - w[0]).abs() < EIG_DEGENERACY_TOL);
    Ok(HermitianEigenSystem { eigenvalues, eigenvectors, degenerate })
}

/// One Jacobi rotation annihilating `a[p][q]`; accumulates the rotation into `v`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 || r < f64::MIN_POSITIVE.sqrt() {
        return;
    }
    let phase = apq / r;
    let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let n = a.dim();
    // Columns: U_pp = c, U_qp = -s conj(e), U_pq = s e, U_qq = c.
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * phase.conj() * s;
        a[(k, q)] = akp * phase * s + akq * c;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * phase.conj() * s;
        v[(k, q)] = vkp * phase * s + vkq * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * phase * s;
        a[(q, k)] = apk * phase.conj() * s + aqk * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

fn fix_phase(col: &mut [C64]) {
    let nrm = norm(col);
    if nrm > 0.0 {
        for z in col.iter_mut() {
            *z /= nrm;
        }
    }
    let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let Some(lead) = col.iter().find(|z| z.norm() >= max - 1e-12) else {
        return;
    };
    let lead_norm = lead.norm();
    if lead_norm == 0.0 {
        return;
    }
    let rot = lead.conj() / lead_norm;
    for z in col.iter_mut() {
        *z *= rot;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hermitian_check_examples() {
        assert!(hermitian_check(&ComplexMatrix::identity(2), 1e-12));
        let m = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]);
        assert!(!hermitian_check(&m, 1e-12));
    }

    #[test]
    fn eigh_identity_and_diagonal() {
        let es = eigh(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(es.eigenvalues, vec![1.0, 1.0]);
        assert!(es.degenerate);

        let es = eigh(&ComplexMatrix::diag(&[0.7, 0.3])).unwrap();
        assert_eq!(es.eigenvalues, vec![0.3, 0.7]);
        assert_eq!(es.eigenvectors[0], vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(es.eigenvectors[1], vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(!es.degenerate);
    }

    #[test]
    fn eigh_bloch_vector_matches_closed_form() {
        // ½(I + r σ_x) has eigenvalues (1 ± r)/2.
        let r = 0.6;
        let m = (&ComplexMatrix::identity(2) + &pauli::x().scale_real(r)).scale_real(0.5);
        let es = eigh(&m).unwrap();
        assert!((es.eigenvalues[0] - (1.0 - r) / 2.0).abs() < 1e-15);
        assert!((es.eigenvalues[1] - (1.0 + r) / 2.0).abs() < 1e-15);
        // Phase convention: leading component real positive.
        for v in &es.eigenvectors {
            let lead = v.iter().find(|z| z.norm() > 0.5).unwrap();
            assert!(lead.im.abs() < 1e-15 && lead.re > 0.0);
        }
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]);
        assert!(matches!(eigh(&m), Err(LinalgError::NotHermitian { .. })));
        let mut m = ComplexMatrix::identity(2);
        m[(0, 0)] = c(f64::NAN, 0.0);
        assert_eq!(eigh(&m).unwrap_err(), LinalgError::NonFinite);
    }

    #[test]
    fn eigh_zero_matrix() {
        let es = eigh(&ComplexMatrix::zeros(3)).unwrap();
        assert_eq!(es.eigenvalues, vec![0.0; 3]);
    }

    #[test]
    fn hs_inner_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(hs_inner(&i2, &i2).unwrap(), c(2.0, 0.0));
        assert_eq!(hs_inner(&pauli::z(), &pauli::x()).unwrap(), c(0.0, 0.0));
        assert_eq!(hs_inner(&pauli::z(), &pauli::z()).unwrap(), c(2.0, 0.0));
        assert!(matches!(
            hs_inner(&i2, &ComplexMatrix::identity(3)),
            Err(LinalgError::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn tensor_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2), ComplexMatrix::identity(4));
        assert_eq!(tensor(&pauli::z(), &i2), ComplexMatrix::diag(&[1.0, 1.0, -1.0, -1.0]));
        // |1⟩⟨1| ⊗ |0⟩⟨0| = |10⟩⟨10|, which is index 1 in the excited-first order.
        let p1 = ComplexMatrix::diag(&[1.0, 0.0]);
        let p0 = ComplexMatrix::diag(&[0.0, 1.0]);
        assert_eq!(tensor(&p1, &p0), ComplexMatrix::diag(&[0.0, 1.0, 0.0, 0.0]));
    }

    fn arb_hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |xs| {
            let raw = ComplexMatrix::from_fn(dim, |i, j| c(xs[2 * (i * dim + j)], xs[2 * (i * dim + j) + 1]));
            raw.hermitian_part()
        })
    }

    fn arb_density(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |xs| {
            let a = ComplexMatrix::from_fn(dim, |i, j| c(xs[2 * (i * dim + j)], xs[2 * (i * dim + j) + 1]));
            let rho = &a * &a.adjoint();
            let tr = rho.trace().re.max(1e-300);
            rho.scale_real(1.0 / tr).hermitian_part()
        })
    }

    fn check_eigensystem(m: &ComplexMatrix) -> Result<(), TestCaseError> {
        let es = eigh(m).unwrap();
        let dim = m.dim() as f64;
        let err = (&es.reconstruct() - m).frobenius_norm();
        prop_assert!(err <= 1e-12 * dim, "reconstruction error {err:e}");
        for (k, vk) in es.eigenvectors.iter().enumerate() {
            for (l, vl) in es.eigenvectors.iter().enumerate() {
                let expect = if k == l { 1.0 } else { 0.0 };
                prop_assert!((inner(vk, vl) - expect).norm() <= 1e-12);
            }
        }
        prop_assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        Ok(())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn eigh_reconstructs_dim2(m in arb_hermitian(2)) {
            check_eigensystem(&m)?;
        }

        #[test]
        fn eigh_reconstructs_dim4(m in arb_hermitian(4)) {
            check_eigensystem(&m)?;
        }

        #[test]
        fn density_spectrum_is_a_distribution(rho in arb_density(4)) {
            let es = eigh(&rho).unwrap();
            let sum: f64 = es.eigenvalues.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(es.eigenvalues.iter().all(|&p| (-1e-12..=1.0 + 1e-12).contains(&p)));
        }

        #[test]
        fn hs_inner_self_is_nonnegative_real(m in arb_hermitian(3), s in -2.0f64..2.0) {
            let a = &m + &ComplexMatrix::identity(3).scale(c(0.0, s));
            let z = hs_inner(&a, &a).unwrap();
            prop_assert!(z.re >= 0.0 && z.im == 0.0);
        }

        #[test]
        fn tensor_is_associative_on_integers(
            xs in proptest::collection::vec(-3i32..=3, 24),
        ) {
            let mk = |o: usize| ComplexMatrix::from_fn(2, |i, j| {
                c(xs[o + 2 * i + j] as f64, xs[o + 4 + ((i + j) % 4)] as f64)
            });
            let (a, b, d) = (mk(0), mk(8), mk(16));
            prop_assert_eq!(tensor(&tensor(&a, &b), &d), tensor(&a, &tensor(&b, &d)));
        }
    }
}
