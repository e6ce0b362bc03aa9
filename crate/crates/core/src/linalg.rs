//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] is a plain row-major matrix used for everything small
//! (gates, unitary error bases, transfer matrices). Hermitian spectra, polar
//! factors and large products are delegated to `faer`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default absolute tolerance used by validators.
pub const DEFAULT_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Shape("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Kronecker product `self ⊗ other` (self's index is the more significant one).
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.rows * self.cols * other.cols > 1 << 21 {
            let prod = self.to_faer() * other.to_faer();
            return Ok(Self::from_faer(prod.as_ref()));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise max-norm of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_violation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Max entrywise deviation of `M^dag M` and `M M^dag` from `scale * I`.
    pub fn unitarity_violation_scaled(&self, scale: f64) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let target = Self::identity(self.rows).scale(C64::new(scale, 0.0));
        let a = self.adjoint();
        let left = a.matmul(self).expect("square");
        let right = self.matmul(&a).expect("square");
        left.max_abs_diff(&target).max(right.max_abs_diff(&target))
    }

    pub fn unitarity_violation(&self) -> f64 {
        self.unitarity_violation_scaled(1.0)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_violation() <= tol
    }

    pub(crate) fn to_faer(&self) -> Mat<C64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub(crate) fn from_faer(m: faer::MatRef<'_, C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix dimensions must agree")
    }
}

/// Eigendecomposition `M = V diag(values) V^dag` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector for `values[i]`.
    pub vectors: ComplexMatrix,
}

fn check_hermitian(m: &ComplexMatrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let violation = m.hermiticity_violation();
    let scaled_tol = tol * m.max_abs().max(1.0);
    if violation > scaled_tol {
        return Err(Error::NotHermitian {
            violation,
            tol: scaled_tol,
        });
    }
    Ok(())
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    hermitian_eig_with_tol(m, DEFAULT_TOL)
}

pub fn hermitian_eig_with_tol(m: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    check_hermitian(m, tol)?;
    let n = m.rows();
    let evd = m
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    let s = evd.S();
    let u = evd.U();
    // faer sorts ascending; we report descending.
    let values = (0..n).rev().map(|i| s[i].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    Ok(HermitianEigen { values, vectors })
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m, DEFAULT_TOL)?;
    let mut values = faer_hermitian_eigenvalues(&m.to_faer())?;
    values.reverse();
    Ok(values)
}

/// Ascending eigenvalues of a Hermitian `faer` matrix; only the lower triangle is read.
pub(crate) fn faer_hermitian_eigenvalues(m: &Mat<C64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NoConvergence)
}

/// Thread count for dense kernels; `1` runs sequentially.
pub fn set_threads(n: usize) {
    faer::set_global_parallelism(if n > 1 {
        faer::Par::rayon(n)
    } else {
        faer::Par::Seq
    });
}

/// Eigenvalues of a general square matrix, sorted by decreasing modulus.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let mut values = m
        .to_faer()
        .eigenvalues()
        .map_err(|_| Error::NoConvergence)?;
    values.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(values)
}

/// Schatten-1 norm of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|l| l.abs()).sum())
}

/// Unitary polar factor `W` of `M = W P`.
pub fn closest_unitary(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "polar factor needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let svd = m.to_faer().svd().map_err(|_| Error::NoConvergence)?;
    let s = svd.S();
    let n = m.rows();
    let largest = (0..n).map(|i| s[i].re).fold(0.0, f64::max);
    let smallest = (0..n).map(|i| s[i].re).fold(f64::INFINITY, f64::min);
    if n == 0 || smallest <= 1e-12 * largest.max(f64::MIN_POSITIVE) {
        return Err(Error::RankDeficient(smallest));
    }
    let w = svd.U() * svd.V().adjoint();
    Ok(ComplexMatrix::from_faer(w.as_ref()))
}

/// Haar-random `d x d` unitary.
///
/// The generator is ChaCha20 (`rand_chacha`) seeded with `seed_from_u64(seed)`.
/// A Ginibre matrix is filled row-major, real part before imaginary part, with
/// standard normals scaled by `1/sqrt(2)`; its columns are orthonormalised by
/// twice-iterated modified Gram-Schmidt, which is the QR factorisation with a
/// positive real `R` diagonal.
pub fn haar_unitary(d: usize, seed: u64) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension("Haar unitary needs d >= 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let ginibre = ComplexMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re * scale, im * scale)
    });
    let mut cols: Vec<Vec<C64>> = (0..d)
        .map(|j| (0..d).map(|i| ginibre[(i, j)]).collect())
        .collect();
    for j in 0..d {
        for _pass in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let qk = &done[k];
                let overlap: C64 = qk.iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
                for (x, qa) in rest[0].iter_mut().zip(qk) {
                    *x -= overlap * qa;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| cols[j][i]))
}

/// Random Hermitian matrix `(G + G^dag)/2` from a seeded Ginibre draw.
pub fn random_hermitian(d: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    (&g + &g.adjoint()).scale(C64::new(0.5, 0.0))
}

/// Seeded vector of i.i.d. complex normals.
pub fn random_vector(d: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        })
        .collect()
}

pub fn normalize(v: &mut [C64]) -> f64 {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    norm
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(
        2,
        2,
        vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO],
    )
    .expect("2x2")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_unitary_is_unitary_and_reproducible() {
        let u = haar_unitary(4, 7).unwrap();
        assert!(u.unitarity_violation() < 1e-12);
        assert_eq!(u, haar_unitary(4, 7).unwrap());
        assert_ne!(u, haar_unitary(4, 8).unwrap());

        let one = haar_unitary(1, 3).unwrap();
        assert!((one[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(matches!(
            haar_unitary(0, 1),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn haar_first_moment_matches_weingarten() {
        // E|U_00|^2 = Wg(e, d) = 1/d.
        let n = 10_000;
        let mean = (0..n)
            .map(|s| haar_unitary(4, s).unwrap()[(0, 0)].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.25).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let e = hermitian_eig(&ComplexMatrix::identity(3)).unwrap();
        for v in e.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let e = hermitian_eig(&pauli_z()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn large_hermitian_reconstruction() {
        let m = random_hermitian(200, 11);
        let e = hermitian_eig(&m).unwrap();
        let d = ComplexMatrix::diag(
            &e.values
                .iter()
                .map(|&x| C64::new(x, 0.0))
                .collect::<Vec<_>>(),
        );
        let rebuilt = &(&e.vectors * &d) * &e.vectors.adjoint();
        assert!(rebuilt.max_abs_diff(&m) < 1e-10 * m.max_abs());
        assert!(e.vectors.unitarity_violation() < 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eig_rejects_bad_input() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect), Err(Error::Shape(_))));
        let mut m = pauli_x();
        m[(0, 1)] = C64::new(2.0, 0.0);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
        assert!((trace_norm(&pauli_x()).unwrap() - 2.0).abs() < 1e-14);
        let v = random_vector(5, 2);
        let outer = ComplexMatrix::from_fn(5, 5, |i, j| v[i] * v[j].conj());
        let norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!((trace_norm(&outer).unwrap() - norm_sqr).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_triangle_inequality() {
        for seed in 0..100 {
            let a = random_hermitian(6, 2 * seed);
            let b = random_hermitian(6, 2 * seed + 1);
            let lhs = trace_norm(&(&a + &b)).unwrap();
            let rhs = trace_norm(&a).unwrap() + trace_norm(&b).unwrap();
            assert!(lhs <= rhs + 1e-10);
        }
    }

    #[test]
    fn polar_factor() {
        let u = haar_unitary(5, 3).unwrap();
        assert!(closest_unitary(&u).unwrap().max_abs_diff(&u) < 1e-12);

        let two = ComplexMatrix::identity(3).scale(C64::new(2.0, 0.0));
        let w = closest_unitary(&two).unwrap();
        assert!(w.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);

        let singular = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(
            closest_unitary(&singular),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn contraction_with_adjoint_gives_identity() {
        let u = haar_unitary(6, 9).unwrap();
        let prod = &u.adjoint() * &u;
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(6)) < 1e-12);
    }
}
