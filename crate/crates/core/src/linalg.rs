//! Small dense complex linear algebra.
//!
//! Everything here works on matrices of at most a few hundred rows; the
//! decompositions are cyclic Jacobi sweeps in a fixed pivot order, so results
//! are reproducible bit-for-bit on a given platform.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

const MAX_SWEEPS: usize = 80;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
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

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[C64]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|&z| z * s).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.entries[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("matrix shapes differ".into()));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, entries })
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry-wise deviation from the Hermitian adjoint.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Frobenius norm of `U^H U - I`.
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = self.adjoint().matmul(self).expect("square");
        gram.sub(&Self::identity(self.rows)).expect("same shape").frobenius()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// Thin singular value decomposition `A = U diag(sigma) V^H`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows x k` with orthonormal columns, `k = min(rows, cols)`.
    pub u: ComplexMatrix,
    /// Non-increasing, length `k`.
    pub sigma: Vec<f64>,
    /// `cols x k` with orthonormal columns.
    pub v: ComplexMatrix,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if a.rows() >= a.cols() {
        let (u, sigma, v) = one_sided_jacobi(a)?;
        Ok(Svd { u, sigma, v })
    } else {
        // A^H = W S V^H  =>  A = V S W^H
        let (w, sigma, v) = one_sided_jacobi(&a.adjoint())?;
        Ok(Svd { u: v, sigma, v: w })
    }
}

pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(svd(a)?.sigma)
}

/// Orthogonalizes the columns of a tall matrix. Returns `(U, sigma, V)` with
/// `A = U diag(sigma) V^H`, `U` tall (`m x n`) and `V` square unitary.
fn one_sided_jacobi(a: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let m = a.rows();
    let n = a.cols();
    // Column-major working copies.
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = ONE;
            e
        })
        .collect();

    let scale: f64 = cols.iter().map(|c| norm_sq(c)).sum::<f64>();
    let tiny = f64::MIN_POSITIVE.max(scale * 1e-300);
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = norm_sq(&cols[p]);
                let beta = norm_sq(&cols[q]);
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= tiny || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, p, q, c, s, phase);
                rotate_pair(&mut vcols, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::Numerical("Jacobi SVD did not converge".into()));
    }

    let mut order: Vec<(f64, usize)> = cols.iter().enumerate().map(|(j, c)| (norm_sq(c).sqrt(), j)).collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal).then(x.1.cmp(&y.1)));

    let sigma: Vec<f64> = order.iter().map(|&(s, _)| s).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let mut u = ComplexMatrix::zeros(m, n);
    let mut v = ComplexMatrix::zeros(n, n);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n);
    for (k, &(s, j)) in order.iter().enumerate() {
        v.set_column(k, &vcols[j]);
        if s > smax * 1e-13 && s > 0.0 {
            let col: Vec<C64> = cols[j].iter().map(|z| z / s).collect();
            basis.push(col);
        } else {
            // Null directions: fill with vectors orthogonal to the ones found.
            let col = next_orthonormal(&basis, m).ok_or_else(|| {
                Error::Numerical("could not complete singular basis".into())
            })?;
            basis.push(col);
        }
        u.set_column(k, basis.last().unwrap());
    }
    Ok((u, sigma, v))
}

fn rotate_pair(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let (lo, hi) = cols.split_at_mut(q);
    let cp = &mut lo[p];
    let cq = &mut hi[0];
    let ph = phase.conj();
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let a = *x;
        let b = *y * ph;
        *x = a * c - b * s;
        *y = a * s + b * c;
    }
}

fn norm_sq(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// A unit vector orthogonal to every vector in `basis` (assumed orthonormal),
/// obtained by projecting standard basis vectors.
fn next_orthonormal(basis: &[Vec<C64>], dim: usize) -> Option<Vec<C64>> {
    let mut best: Option<(f64, Vec<C64>)> = None;
    for e in 0..dim {
        let mut v = vec![ZERO; dim];
        v[e] = ONE;
        for _ in 0..2 {
            for b in basis {
                let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
        }
        let nrm = norm_sq(&v).sqrt();
        if best.as_ref().map_or(true, |(bn, _)| nrm > *bn + 1e-12) {
            best = Some((nrm, v));
        }
    }
    let (nrm, v) = best?;
    if nrm < 1e-8 {
        return None;
    }
    Some(v.into_iter().map(|z| z / nrm).collect())
}

/// Extends a set of orthonormal columns (`n x k`, `k <= n`) to an `n x n`
/// unitary matrix whose first `k` columns are the given ones.
pub fn complete_unitary(columns: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = columns.rows();
    if columns.cols() > n {
        return Err(Error::Dimension("more columns than rows".into()));
    }
    let mut basis: Vec<Vec<C64>> = (0..columns.cols()).map(|j| columns.column(j)).collect();
    while basis.len() < n {
        let v = next_orthonormal(&basis, n)
            .ok_or_else(|| Error::Numerical("columns are not linearly independent".into()))?;
        basis.push(v);
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for (j, col) in basis.iter().enumerate() {
        out.set_column(j, col);
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix, `H = V diag(values) V^H`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Non-increasing.
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Cyclic complex Jacobi eigen-solver for Hermitian matrices.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::Dimension("eigen-decomposition needs a square matrix".into()));
    }
    let n = h.rows();
    let scale = h.frobenius();
    if h.hermiticity_residual() > 1e-9 * scale.max(1.0) {
        return Err(Error::InvalidArgument("matrix is not Hermitian".into()));
    }
    let mut a = h.clone();
    // Symmetrize exactly so the real diagonal stays real.
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let z = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let hpq = a[(p, q)];
                let g = hpq.norm();
                if g <= 1e-18 * scale {
                    continue;
                }
                rotated = true;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = hpq / g; // e^{i phi}
                let tau = (aqq - app) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // W restricted to (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]].
                let em = phase.conj();
                for r in 0..n {
                    let xp = a[(r, p)];
                    let xq = a[(r, q)];
                    a[(r, p)] = xp * c - xq * em * s;
                    a[(r, q)] = xp * s + xq * em * c;
                }
                for r in 0..n {
                    let xp = a[(p, r)];
                    let xq = a[(q, r)];
                    a[(p, r)] = xp * c - xq * phase * s;
                    a[(q, r)] = xp * s + xq * phase * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for r in 0..n {
                    let xp = v[(r, p)];
                    let xq = v[(r, q)];
                    v[(r, p)] = xp * c - xq * em * s;
                    v[(r, q)] = xp * s + xq * em * c;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::Numerical("Jacobi eigen-solver did not converge".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &v.column(i));
    }
    Ok(HermitianEigen { values, vectors })
}

/// `V f(diag) V^H` for a Hermitian matrix.
pub fn hermitian_function(h: &ComplexMatrix, f: impl Fn(f64) -> C64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(h)?;
    let n = h.rows();
    let fv: Vec<C64> = eig.values.iter().map(|&x| f(x)).collect();
    let v = &eig.vectors;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * fv[k] * v[(j, k)].conj()).sum()))
}

/// Minimum-norm least-squares solution of `G x = b` for Hermitian positive
/// semidefinite `G` (pseudo-inverse with a relative eigenvalue cutoff).
pub fn hermitian_psd_solve(g: &ComplexMatrix, rhs: &[C64], rcond: f64) -> Result<Vec<C64>> {
    let eig = hermitian_eigen(g)?;
    let n = g.rows();
    let lmax = eig.values.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let cutoff = lmax * rcond;
    let v = &eig.vectors;
    let mut x = vec![ZERO; n];
    for k in 0..n {
        let lam = eig.values[k];
        if lam <= cutoff || lam <= 0.0 {
            continue;
        }
        let proj: C64 = (0..n).map(|i| v[(i, k)].conj() * rhs[i]).sum::<C64>() / lam;
        for i in 0..n {
            x[i] += v[(i, k)] * proj;
        }
    }
    Ok(x)
}
