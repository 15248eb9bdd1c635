//! Dense complex matrix algebra: products, Hermitian eigendecomposition via
//! cyclic Jacobi rotations, and Cholesky factorization.
//!
//! The dimensions in this crate are antenna counts (a few to a few hundred),
//! so a dependency-free O(n^3) kernel is the right tool; accuracy matters far
//! more than asymptotics here.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
// The trait supplies the float math in no_std builds; test builds link
// std, whose inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Build from nested real rows; imaginary parts zero.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let nr = rows.len();
        let nc = if nr == 0 { 0 } else { rows[0].len() };
        Self::from_fn(nr, nc, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = Complex64::new(e, 0.0);
        }
        m
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

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn mul(&self, rhs: &CMatrix) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for z in &mut out.data {
            *z *= factor;
        }
        out
    }

    pub fn add(&self, rhs: &CMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (z, w) in out.data.iter_mut().zip(rhs.data.iter()) {
            *z += *w;
        }
        out
    }

    pub fn sub(&self, rhs: &CMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (z, w) in out.data.iter_mut().zip(rhs.data.iter()) {
            *z -= *w;
        }
        out
    }

    /// `self + shift * I`.
    pub fn add_scaled_identity(&self, shift: f64) -> Self {
        assert!(self.is_square());
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] += shift;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest Hermitian-asymmetry |A - A^H| entry relative to the norm.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let scale = self.frobenius_norm().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                let d = (self[(r, c)] - self[(c, r)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / scale
    }

    /// `(A + A^H) / 2`; suppresses floating-point asymmetry before factoring.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// `A v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// `u^H v` (conjugate-linear in the first argument).
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    assert_eq!(u.len(), v.len());
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Outer product `u v^H`.
pub fn outer(u: &[Complex64], v: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
}

/// Eigendecomposition of a Hermitian matrix: `A = U diag(values) U^H` with
/// real eigenvalues sorted nonincreasing and unitary `U`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, ordered like `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `U diag(values) U^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let mut ul = self.vectors.clone();
        for c in 0..n {
            for r in 0..n {
                ul[(r, c)] *= self.values[c];
            }
        }
        ul.mul(&self.vectors.adjoint())
    }
}

const MAX_JACOBI_SWEEPS: usize = 64;

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// The input is symmetrized as `(A + A^H)/2` before any rotation is applied.
/// Eigenvalues come out sorted nonincreasing; ties are broken by lexicographic
/// order of the eigenvector entries so repeated runs agree bitwise. Each
/// eigenvector is phase-normalized to make its largest-modulus entry real and
/// nonnegative.
pub fn eigh(a: &CMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::InvalidArgument("eigh requires a square matrix".to_string()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidArgument("eigh requires finite entries".to_string()));
    }
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut vecs = CMatrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);

    let off_norm = |m: &CMatrix| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += m[(p, q)].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    };

    let mut converged = false;
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        if off_norm(&m) <= scale * 1.0e-15 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = m[(p, q)];
                let b = beta.norm();
                if b <= scale * 1.0e-300 {
                    continue;
                }
                let alpha = m[(p, p)].re;
                let gamma = m[(q, q)].re;
                // Rotation angle: tau = (a_qq - a_pp) / (2|a_pq|), smaller root.
                let tau = (gamma - alpha) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = beta * (t * c / b); // sigma * e^{i phase}

                // A <- U^H A U with U = I except U[p,p]=c, U[p,q]=s, U[q,p]=-conj(s), U[q,q]=c.
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * c - akq * s.conj();
                    m[(k, q)] = akp * s + akq * c;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = apk * c - aqk * s;
                    m[(q, k)] = apk * s.conj() + aqk * c;
                }
                // Clean the rotated pivot pair.
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);

                for k in 0..n {
                    let vkp = vecs[(k, p)];
                    let vkq = vecs[(k, q)];
                    vecs[(k, p)] = vkp * c - vkq * s.conj();
                    vecs[(k, q)] = vkp * s + vkq * c;
                }
            }
        }
    }
    if !converged && off_norm(&m) > scale * 1.0e-9 {
        return Err(Error::Numerical("Jacobi eigensolver did not converge".to_string()));
    }

    let values: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    let mut columns: Vec<Vec<Complex64>> = (0..n).map(|c| vecs.column(c)).collect();

    // Deterministic phase: largest-modulus entry made real nonnegative.
    for col in &mut columns {
        let mut best = 0usize;
        let mut best_norm = -1.0f64;
        for (i, z) in col.iter().enumerate() {
            let nz = z.norm();
            if nz > best_norm + 1.0e-15 {
                best_norm = nz;
                best = i;
            }
        }
        if best_norm > 0.0 {
            let phase = col[best] / best_norm;
            for z in col.iter_mut() {
                *z *= phase.conj();
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .total_cmp(&values[i])
            .then_with(|| lex_cmp(&columns[i], &columns[j]))
    });
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = CMatrix::from_fn(n, n, |r, c| columns[order[c]][r]);

    Ok(HermitianEigen { values: sorted_values, vectors: sorted_vectors })
}

fn lex_cmp(a: &[Complex64], b: &[Complex64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.total_cmp(&y.re).then_with(|| x.im.total_cmp(&y.im));
        if o != core::cmp::Ordering::Equal {
            return o;
        }
    }
    core::cmp::Ordering::Equal
}

/// Cholesky factor of a Hermitian positive definite matrix: `A = L L^H`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: CMatrix,
}

impl Cholesky {
    pub fn new(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument("cholesky requires a square matrix".to_string()));
        }
        let n = a.rows();
        let m = a.hermitian_part();
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = m[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) {
                return Err(Error::Numerical(
                    "cholesky: matrix is not positive definite".to_string(),
                ));
            }
            let dj = d.sqrt();
            l[(j, j)] = Complex64::new(dj, 0.0);
            for i in (j + 1)..n {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / dj;
            }
        }
        Ok(Cholesky { l })
    }

    /// `ln det A` of the factored matrix.
    pub fn log_det(&self) -> f64 {
        (0..self.l.rows()).map(|i| 2.0 * self.l[(i, i)].re.ln()).sum()
    }

    /// Solves `L y = b`.
    pub fn forward_solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.l.rows();
        assert_eq!(b.len(), n);
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)].re;
        }
        y
    }

    /// `b^H A^{-1} b` via one forward solve.
    pub fn quadratic_form(&self, b: &[Complex64]) -> f64 {
        let y = self.forward_solve(b);
        y.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `L w` — maps standard complex Gaussians to samples of covariance `A`.
    pub fn mul_lower(&self, w: &[Complex64]) -> Vec<Complex64> {
        let n = self.l.rows();
        assert_eq!(w.len(), n);
        (0..n)
            .map(|i| (0..=i).map(|k| self.l[(i, k)] * w[k]).sum())
            .collect()
    }

    /// Allocation-free variant of [`Cholesky::mul_lower`].
    pub fn mul_lower_into(&self, w: &[Complex64], out: &mut [Complex64]) {
        let n = self.l.rows();
        for i in (0..n).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..=i {
                s += self.l[(i, k)] * w[k];
            }
            out[i] = s;
        }
    }

    /// Allocation-free `b^H A^{-1} b` with a caller-provided scratch buffer.
    pub fn quadratic_form_into(&self, b: &[Complex64], scratch: &mut [Complex64]) -> f64 {
        let n = self.l.rows();
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[(i, k)] * scratch[k];
            }
            scratch[i] = s / self.l[(i, i)].re;
        }
        scratch.iter().map(|z| z.norm_sqr()).sum()
    }
}
