//! Complex n-way coefficient tensors of multipartite pure states.
//!
//! Storage is row-major with the last index varying fastest. A multi-index
//! `(i_1, .., i_n)` (0-based) sits at flat offset `sum_l i_l * stride_l` with
//! `stride_n = 1` and `stride_l = stride_{l+1} * d_{l+1}`.
//!
//! Mode-`k` unfoldings place entry `(i_1, .., i_n)` at row `i_k` and column
//! `j = sum_{l != k} i_l * J_l` with `J_l = prod_{m < l, m != k} d_m`, i.e. the
//! remaining indices in their natural order with the *first* one fastest. This
//! is the usual (Kolda) unfolding written with 0-based indices; the 1-based form
//! is `j + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};

pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateTensor {
    dims: Vec<usize>,
    coeffs: Vec<C64>,
    normalized: bool,
}

impl StateTensor {
    /// Tensor with the given coefficients; `normalized` is set when the norm
    /// happens to be one within [`NORM_TOL`].
    pub fn new(dims: Vec<usize>, coeffs: Vec<C64>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Dimension(format!("invalid dims {dims:?}")));
        }
        let size: usize = dims.iter().product();
        if coeffs.len() != size {
            return Err(Error::Dimension(format!(
                "{} coefficients for dims {dims:?} (expected {size})",
                coeffs.len()
            )));
        }
        let nsq: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        Ok(Self { dims, coeffs, normalized: (nsq - 1.0).abs() <= NORM_TOL })
    }

    /// Like [`StateTensor::new`] but fails unless the coefficients are unit norm.
    pub fn normalized(dims: Vec<usize>, coeffs: Vec<C64>) -> Result<Self> {
        let t = Self::new(dims, coeffs)?;
        if !t.normalized {
            return Err(Error::NotNormalized { norm_sq: t.norm_sqr() });
        }
        Ok(t)
    }

    /// Rescales to unit norm.
    pub fn normalize(mut self) -> Result<Self> {
        let n = self.frobenius();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized { norm_sq: n * n });
        }
        for z in &mut self.coeffs {
            *z /= n;
        }
        self.normalized = true;
        Ok(self)
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let size = dims.iter().product();
        Self::new(dims, vec![ZERO; size])
    }

    /// Computational basis state `|i_1 .. i_n>`.
    pub fn basis(dims: Vec<usize>, index: &[usize]) -> Result<Self> {
        let mut t = Self::zeros(dims)?;
        let off = t.offset(index)?;
        t.coeffs[off] = C64::new(1.0, 0.0);
        t.normalized = true;
        Ok(t)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }

    pub fn offset(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dims.len() || index.iter().zip(&self.dims).any(|(i, d)| i >= d) {
            return Err(Error::Dimension(format!("index {index:?} outside dims {:?}", self.dims)));
        }
        Ok(index.iter().zip(self.strides()).map(|(i, s)| i * s).sum())
    }

    pub fn get(&self, index: &[usize]) -> Result<C64> {
        Ok(self.coeffs[self.offset(index)?])
    }

    pub fn multi_index(&self, mut offset: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            idx[k] = offset % self.dims[k];
            offset /= self.dims[k];
        }
        idx
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        let coeffs: Vec<C64> = self.coeffs.iter().map(|&z| z * s).collect();
        Self::new(self.dims.clone(), coeffs).expect("same shape")
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dims(other)?;
        Self::new(self.dims.clone(), self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dims(other)?;
        Self::new(self.dims.clone(), self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect())
    }

    fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!("dims {:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(())
    }

    fn check_axis(&self, k: usize) -> Result<()> {
        if k >= self.order() {
            return Err(Error::Axis { axis: k, order: self.order() });
        }
        Ok(())
    }

    /// Mode-`k` unfolding (`k` is 0-based), a `d_k x (N / d_k)` matrix.
    pub fn unfold(&self, k: usize) -> Result<ComplexMatrix> {
        self.check_axis(k)?;
        let dk = self.dims[k];
        let cols = self.len() / dk;
        let jstride = unfold_strides(&self.dims, k);
        let mut m = ComplexMatrix::zeros(dk, cols);
        let mut idx = vec![0usize; self.order()];
        for &z in &self.coeffs {
            let j: usize = idx.iter().zip(&jstride).map(|(i, s)| i * s).sum();
            m[(idx[k], j)] = z;
            increment(&mut idx, &self.dims);
        }
        Ok(m)
    }

    /// Inverse of [`StateTensor::unfold`].
    pub fn fold(m: &ComplexMatrix, dims: &[usize], k: usize) -> Result<Self> {
        if k >= dims.len() {
            return Err(Error::Axis { axis: k, order: dims.len() });
        }
        let size: usize = dims.iter().product();
        if m.rows() != dims[k] || m.rows() * m.cols() != size {
            return Err(Error::Dimension(format!("{}x{} matrix cannot fold into {dims:?}", m.rows(), m.cols())));
        }
        let jstride = unfold_strides(dims, k);
        let mut coeffs = Vec::with_capacity(size);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..size {
            let j: usize = idx.iter().zip(&jstride).map(|(i, s)| i * s).sum();
            coeffs.push(m[(idx[k], j)]);
            increment(&mut idx, dims);
        }
        Self::new(dims.to_vec(), coeffs)
    }

    /// k-mode product `(U x_k C)_{..i'..} = sum_i U_{i' i} C_{..i..}`.
    pub fn kmode_product(&self, u: &ComplexMatrix, k: usize) -> Result<Self> {
        self.check_axis(k)?;
        let dk = self.dims[k];
        if u.rows() != dk || u.cols() != dk {
            return Err(Error::Dimension(format!(
                "{}x{} matrix on mode {k} of size {dk}",
                u.rows(),
                u.cols()
            )));
        }
        let mut out = vec![ZERO; self.len()];
        kmode_into(&self.coeffs, &self.dims, u.entries(), k, &mut out);
        let mut t = Self::new(self.dims.clone(), out)?;
        t.normalized = t.normalized || self.normalized && u.unitarity_residual() < 1e-12;
        Ok(t)
    }

    /// `<A, B> = sum conj(A) B`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_same_dims(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum())
    }

    /// `p_mu = |C_mu|^2`.
    pub fn prob_vector(&self) -> Result<ProbVector> {
        if !self.normalized {
            return Err(Error::NotNormalized { norm_sq: self.norm_sqr() });
        }
        Ok(ProbVector { probs: self.coeffs.iter().map(|z| z.norm_sqr()).collect() })
    }

    /// Reduced density matrix of party `k`, `C_(k) C_(k)^H`.
    pub fn reduced_density(&self, k: usize) -> Result<ComplexMatrix> {
        self.check_axis(k)?;
        if !self.normalized {
            return Err(Error::NotNormalized { norm_sq: self.norm_sqr() });
        }
        let m = self.unfold(k)?;
        m.matmul(&m.adjoint())
    }

    /// Reduced density matrix of the parties in `keep` (in increasing order).
    pub fn reduced_density_of(&self, keep: &[usize]) -> Result<ComplexMatrix> {
        if !self.normalized {
            return Err(Error::NotNormalized { norm_sq: self.norm_sqr() });
        }
        for w in keep.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidArgument("parties must be strictly increasing".into()));
            }
        }
        for &k in keep {
            self.check_axis(k)?;
        }
        let kept: usize = keep.iter().map(|&k| self.dims[k]).product();
        let rest = self.len() / kept;
        let mut m = ComplexMatrix::zeros(kept, rest);
        // Row index: kept parties row-major; column index: the remaining parties row-major.
        for off in 0..self.len() {
            let idx = self.multi_index(off);
            let mut r = 0;
            let mut c = 0;
            for (k, &i) in idx.iter().enumerate() {
                if keep.contains(&k) {
                    r = r * self.dims[k] + i;
                } else {
                    c = c * self.dims[k] + i;
                }
            }
            m[(r, c)] = self.coeffs[off];
        }
        m.matmul(&m.adjoint())
    }

    /// Tensor with axes reordered: output axis `a` is input axis `perm[a]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        let n = self.order();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of {n} axes")));
        }
        let dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let src_strides = self.strides();
        let mut coeffs = Vec::with_capacity(self.len());
        let mut idx = vec![0usize; n];
        for _ in 0..self.len() {
            let off: usize = idx.iter().enumerate().map(|(a, &i)| i * src_strides[perm[a]]).sum();
            coeffs.push(self.coeffs[off]);
            increment(&mut idx, &dims);
        }
        let mut t = Self::new(dims, coeffs)?;
        t.normalized = self.normalized;
        Ok(t)
    }
}

/// Writes `U x_k C` into `out` for a flat row-major tensor.
pub(crate) fn kmode_into(src: &[C64], dims: &[usize], u: &[C64], k: usize, out: &mut [C64]) {
    let dk = dims[k];
    let inner: usize = dims[k + 1..].iter().product();
    let outer: usize = dims[..k].iter().product();
    for o in 0..outer {
        let base = o * dk * inner;
        for ip in 0..dk {
            let urow = &u[ip * dk..(ip + 1) * dk];
            let dst = &mut out[base + ip * inner..base + (ip + 1) * inner];
            dst.iter_mut().for_each(|z| *z = ZERO);
            for (i, &uij) in urow.iter().enumerate() {
                if uij == ZERO {
                    continue;
                }
                let s = &src[base + i * inner..base + (i + 1) * inner];
                for (d, &x) in dst.iter_mut().zip(s) {
                    *d += uij * x;
                }
            }
        }
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn unfold_strides(dims: &[usize], k: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    let mut acc = 1;
    for (l, &d) in dims.iter().enumerate() {
        if l == k {
            continue;
        }
        out[l] = acc;
        acc *= d;
    }
    out
}

/// Odometer increment of a row-major multi-index (last index fastest).
pub(crate) fn increment(idx: &mut [usize], dims: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return;
        }
        idx[k] = 0;
    }
}

/// Squared moduli of the coefficients of a normalized state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbVector {
    probs: Vec<f64>,
}

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument("probabilities must be finite and non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(Self { probs })
    }

    /// Builds from raw weights by dividing by their sum.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("weights must have positive sum".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn max(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// On-disk JSON layout: `{"dims":[2,2,2],"coeffs":[[re,im],...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&StateTensor> for StateFile {
    fn from(t: &StateTensor) -> Self {
        Self { dims: t.dims.clone(), coeffs: t.coeffs.iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl StateFile {
    pub fn into_tensor(self, require_normalized: bool) -> Result<StateTensor> {
        let coeffs = self.coeffs.iter().map(|&[re, im]| C64::new(re, im)).collect();
        let t = StateTensor::new(self.dims, coeffs).map_err(|e| Error::Format(e.to_string()))?;
        if require_normalized && !t.is_normalized() {
            return Err(Error::NotNormalized { norm_sq: t.norm_sqr() });
        }
        Ok(t)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}
