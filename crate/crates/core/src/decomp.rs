//! Higher-order SVD, CP (PARAFAC) decomposition by alternating least squares,
//! the rank-1 separable approximation and a heuristic tensor-rank estimate.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::haar_unitary_with;
use crate::linalg::{complete_unitary, hermitian_psd_solve, svd, ComplexMatrix, C64, ZERO};
use crate::rng::RngStream;
use crate::tensor::{increment, StateTensor};

/// `C = A x_1 U^(1) x_2 ... x_n U^(n)` with an all-orthogonal core `A`.
#[derive(Debug, Clone)]
pub struct HosvdResult {
    pub factors: Vec<ComplexMatrix>,
    pub core: StateTensor,
    /// Singular values of each unfolding, non-increasing, padded with zeros to `d_k`.
    pub kmode_sv: Vec<Vec<f64>>,
}

impl HosvdResult {
    /// Applies the factors back to the core.
    pub fn reconstruct(&self) -> Result<StateTensor> {
        let mut t = self.core.clone();
        for (k, u) in self.factors.iter().enumerate() {
            t = t.kmode_product(u, k)?;
        }
        Ok(t)
    }
}

pub fn hosvd(c: &StateTensor) -> Result<HosvdResult> {
    if c.coeffs().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("tensor has non-finite entries".into()));
    }
    let mut factors = Vec::with_capacity(c.order());
    let mut kmode_sv = Vec::with_capacity(c.order());
    for k in 0..c.order() {
        let s = svd(&c.unfold(k)?)?;
        let u = if s.u.cols() < s.u.rows() { complete_unitary(&s.u)? } else { s.u };
        let mut sv = s.sigma;
        sv.resize(c.dims()[k], 0.0);
        factors.push(u);
        kmode_sv.push(sv);
    }
    let mut core = c.clone();
    for (k, u) in factors.iter().enumerate() {
        core = core.kmode_product(&u.adjoint(), k)?;
    }
    Ok(HosvdResult { factors, core, kmode_sv })
}

/// Weighted sum of rank-one tensors `sum_s w_s a^(1)_s o ... o a^(n)_s`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CpModel {
    pub rank: usize,
    /// Non-increasing, non-negative.
    pub weights: Vec<f64>,
    /// `d_l x rank` matrices with unit-norm columns.
    pub factors: Vec<ComplexMatrix>,
    /// Frobenius distance between the model and the input tensor.
    pub residual: f64,
    pub converged: bool,
    pub sweeps: usize,
    /// Residual after every sweep of the selected restart.
    pub history: Vec<f64>,
    /// Index of the restart that produced this model.
    pub restart: usize,
}

impl CpModel {
    pub fn reconstruct(&self) -> Result<StateTensor> {
        let dims: Vec<usize> = self.factors.iter().map(|f| f.rows()).collect();
        let mut scaled = self.factors.clone();
        for (s, &w) in self.weights.iter().enumerate() {
            for i in 0..scaled[0].rows() {
                scaled[0][(i, s)] *= w;
            }
        }
        StateTensor::new(dims.clone(), reconstruct_raw(&dims, &scaled))
    }

    /// Weights diverging in the border-rank manner: a large spread, or
    /// individual terms far larger than the tensor they sum to.
    pub fn is_degenerate(&self, tensor_norm: f64) -> bool {
        let positive: Vec<f64> = self.weights.iter().copied().filter(|&w| w > 0.0).collect();
        let max = positive.iter().copied().fold(0.0, f64::max);
        let min = positive.iter().copied().fold(f64::INFINITY, f64::min);
        max / min > DEGENERATE_SPREAD || max > DEGENERATE_SCALE * tensor_norm
    }
}

pub const DEGENERATE_SPREAD: f64 = 1e6;
pub const DEGENERATE_SCALE: f64 = 1e3;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AlsOptions {
    pub max_iters: usize,
    /// Stop when the residual, or its change over a sweep, drops below `tol` times the tensor norm.
    pub tol: f64,
    /// Random restarts; one HOSVD-seeded start is added on top when `hosvd_start`.
    pub restarts: usize,
    pub hosvd_start: bool,
    pub stream: RngStream,
}

impl Default for AlsOptions {
    fn default() -> Self {
        Self { max_iters: 500, tol: 1e-12, restarts: 8, hosvd_start: true, stream: RngStream::new(0, 0) }
    }
}

const RCOND: f64 = 1e-13;

/// Best-of-restarts CP model of rank `r`.
pub fn parafac_als(c: &StateTensor, r: usize, opts: &AlsOptions) -> Result<CpModel> {
    let candidates = parafac_candidates(c, r, opts)?;
    Ok(select_best(candidates))
}

fn select_best(candidates: Vec<CpModel>) -> CpModel {
    candidates
        .into_iter()
        .reduce(|best, m| if m.residual < best.residual { m } else { best })
        .expect("at least one start")
}

/// One model per start, in start order (HOSVD-seeded start last).
fn parafac_candidates(c: &StateTensor, r: usize, opts: &AlsOptions) -> Result<Vec<CpModel>> {
    if r == 0 {
        return Err(Error::InvalidArgument("CP rank must be at least 1".into()));
    }
    let seeded = if opts.hosvd_start { Some(hosvd(c)?) } else { None };
    let starts = opts.restarts + usize::from(seeded.is_some());
    if starts == 0 {
        return Err(Error::InvalidArgument("at least one start is needed".into()));
    }
    Ok((0..starts)
        .into_par_iter()
        .map(|s| {
            let mut rng = opts.stream.child(s as u64).rng();
            let init = if s == opts.restarts {
                let h = seeded.as_ref().expect("seeded start exists");
                hosvd_init(h, r, &mut rng)
            } else {
                random_init(c.dims(), r, &mut rng)
            };
            let mut m = run_als(c, init, opts);
            m.restart = s;
            m
        })
        .collect())
}

fn random_init<R: Rng + ?Sized>(dims: &[usize], r: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    dims.iter()
        .map(|&d| {
            let u = haar_unitary_with(d.max(r), rng).expect("positive dimension");
            ComplexMatrix::from_fn(d, r, |i, j| u[(i, j)])
        })
        .collect()
}

fn hosvd_init<R: Rng + ?Sized>(h: &HosvdResult, r: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    h.factors
        .iter()
        .map(|u| {
            let d = u.rows();
            let extra = haar_unitary_with(d, rng).expect("positive dimension");
            ComplexMatrix::from_fn(d, r, |i, j| if j < d { u[(i, j)] } else { extra[(i, j % d)] })
        })
        .collect()
}

fn run_als(c: &StateTensor, mut factors: Vec<ComplexMatrix>, opts: &AlsOptions) -> CpModel {
    let dims = c.dims().to_vec();
    let norm = c.frobenius();
    let mut residual = residual_of(c, &factors);
    let mut history = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < opts.max_iters {
        for k in 0..dims.len() {
            update_factor(c, &mut factors, k);
        }
        rebalance(&mut factors);
        sweeps += 1;
        let next = residual_of(c, &factors);
        history.push(next);
        let change = residual - next;
        residual = next;
        if residual <= opts.tol * norm || change.abs() <= opts.tol * norm {
            converged = true;
            break;
        }
    }
    finish_model(factors, residual, converged, sweeps, history)
}

/// Row-wise least-squares update of factor `k` with all other factors fixed.
fn update_factor(c: &StateTensor, factors: &mut [ComplexMatrix], k: usize) {
    let dims = c.dims();
    let n = dims.len();
    let r = factors[k].cols();
    let mut gamma = vec![C64::new(1.0, 0.0); r * r];
    for (m, f) in factors.iter().enumerate() {
        if m == k {
            continue;
        }
        for s in 0..r {
            for t in 0..r {
                let g: C64 = (0..f.rows()).map(|j| f[(j, s)].conj() * f[(j, t)]).sum();
                gamma[s * r + t] *= g;
            }
        }
    }
    let gamma = ComplexMatrix::from_vec(r, r, gamma).expect("r x r");
    let dk = dims[k];
    let mut rhs = vec![ZERO; dk * r];
    let mut idx = vec![0usize; n];
    let mut prod = vec![ZERO; r];
    for &z in c.coeffs() {
        if z != ZERO {
            prod.iter_mut().for_each(|p| *p = C64::new(1.0, 0.0));
            for (m, f) in factors.iter().enumerate() {
                if m == k {
                    continue;
                }
                let row = f.row(idx[m]);
                for (p, a) in prod.iter_mut().zip(row) {
                    *p *= a.conj();
                }
            }
            let dst = &mut rhs[idx[k] * r..(idx[k] + 1) * r];
            for (d, p) in dst.iter_mut().zip(&prod) {
                *d += z * p;
            }
        }
        increment(&mut idx, dims);
    }
    // Row objective up to a constant: a^H G a - 2 Re(a^H m).
    let objective = |a: &[C64], m: &[C64]| -> f64 {
        let mut quad = ZERO;
        for s in 0..r {
            let ga: C64 = (0..r).map(|t| gamma[(s, t)] * a[t]).sum();
            quad += a[s].conj() * ga;
        }
        let lin: C64 = a.iter().zip(m).map(|(x, y)| x.conj() * y).sum();
        quad.re - 2.0 * lin.re
    };
    for i in 0..dk {
        let m = &rhs[i * r..(i + 1) * r];
        let Ok(new) = hermitian_psd_solve(&gamma, m, RCOND) else { continue };
        let old = factors[k].row(i).to_vec();
        if objective(&new, m) <= objective(&old, m) {
            for (s, v) in new.into_iter().enumerate() {
                factors[k][(i, s)] = v;
            }
        }
    }
}

/// Equalizes the column norms across modes without changing the model.
fn rebalance(factors: &mut [ComplexMatrix]) {
    let n = factors.len() as f64;
    let r = factors[0].cols();
    for s in 0..r {
        let norms: Vec<f64> = factors.iter().map(|f| column_norm(f, s)).collect();
        let lambda: f64 = norms.iter().product();
        let target = if lambda > 0.0 { lambda.powf(1.0 / n) } else { 0.0 };
        for (f, &nm) in factors.iter_mut().zip(&norms) {
            let scale = if nm > 0.0 { target / nm } else { 0.0 };
            for i in 0..f.rows() {
                f[(i, s)] *= scale;
            }
        }
    }
}

fn column_norm(f: &ComplexMatrix, s: usize) -> f64 {
    (0..f.rows()).map(|i| f[(i, s)].norm_sqr()).sum::<f64>().sqrt()
}

fn reconstruct_raw(dims: &[usize], factors: &[ComplexMatrix]) -> Vec<C64> {
    let size: usize = dims.iter().product();
    let r = factors[0].cols();
    let mut out = Vec::with_capacity(size);
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..size {
        let v: C64 = (0..r)
            .map(|s| factors.iter().zip(&idx).map(|(f, &i)| f[(i, s)]).product::<C64>())
            .sum();
        out.push(v);
        increment(&mut idx, dims);
    }
    out
}

fn residual_of(c: &StateTensor, factors: &[ComplexMatrix]) -> f64 {
    let x = reconstruct_raw(c.dims(), factors);
    c.coeffs().iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

fn finish_model(
    factors: Vec<ComplexMatrix>,
    residual: f64,
    converged: bool,
    sweeps: usize,
    history: Vec<f64>,
) -> CpModel {
    let r = factors[0].cols();
    let mut cols: Vec<(f64, Vec<Vec<C64>>)> = (0..r)
        .map(|s| {
            let norms: Vec<f64> = factors.iter().map(|f| column_norm(f, s)).collect();
            let w: f64 = norms.iter().product();
            let vecs = factors
                .iter()
                .zip(&norms)
                .map(|(f, &nm)| {
                    if w > 0.0 {
                        f.column(s).into_iter().map(|z| z / nm).collect()
                    } else {
                        let mut e = vec![ZERO; f.rows()];
                        e[0] = C64::new(1.0, 0.0);
                        e
                    }
                })
                .collect();
            (w, vecs)
        })
        .collect();
    cols.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out: Vec<ComplexMatrix> = factors.iter().map(|f| ComplexMatrix::zeros(f.rows(), r)).collect();
    for (s, (_, vecs)) in cols.iter().enumerate() {
        for (f, v) in out.iter_mut().zip(vecs) {
            f.set_column(s, v);
        }
    }
    CpModel {
        rank: r,
        weights: cols.iter().map(|c| c.0).collect(),
        factors: out,
        residual,
        converged,
        sweeps,
        history,
        restart: 0,
    }
}

/// Rank-1 separable approximation `|psi_P>` and its overlap `|<psi|psi_P>|^2`.
pub fn closest_product_state(c: &StateTensor, opts: &AlsOptions) -> Result<(StateTensor, f64)> {
    if !c.is_normalized() {
        return Err(Error::NotNormalized { norm_sq: c.norm_sqr() });
    }
    let model = parafac_als(c, 1, opts)?;
    let dims: Vec<usize> = model.factors.iter().map(|f| f.rows()).collect();
    let psi = StateTensor::new(dims.clone(), reconstruct_raw(&dims, &model.factors))?.normalize()?;
    let overlap = c.inner(&psi)?.norm_sqr().min(1.0);
    Ok((psi, overlap))
}

/// `R_max = prod d_l - sum d_l (d_l - 1) / 2`, i.e. `d^n - n d (d-1)/2` for equal dims.
pub fn rank_bound(dims: &[usize]) -> usize {
    let total: usize = dims.iter().product();
    let removed: usize = dims.iter().map(|d| d * (d - 1) / 2).sum();
    total.saturating_sub(removed).max(1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankEstimate {
    pub rank: usize,
    /// Best residual reached at `rank`.
    pub residual: f64,
    /// No rank up to the bound reached the tolerance; `rank` is the bound.
    pub capped: bool,
}

pub const RANK_TOL: f64 = 1e-6;

/// Options used by [`rank_estimate`] at each candidate rank.
pub fn rank_options(stream: RngStream) -> AlsOptions {
    AlsOptions { max_iters: 3000, tol: 1e-14, restarts: 8, hosvd_start: true, stream }
}

/// Smallest `r <= R_max` whose best non-degenerate CP model has residual `<= tol`.
pub fn rank_estimate(c: &StateTensor, tol: f64, stream: RngStream) -> Result<RankEstimate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("rank tolerance must be positive".into()));
    }
    let norm = c.frobenius();
    if norm == 0.0 {
        return Ok(RankEstimate { rank: 0, residual: 0.0, capped: false });
    }
    let bound = rank_bound(c.dims());
    let mut last = f64::INFINITY;
    for r in 1..=bound {
        let opts = rank_options(stream.child(r as u64));
        let good = parafac_candidates(c, r, &opts)?
            .into_iter()
            .filter(|m| !m.is_degenerate(norm))
            .map(|m| m.residual)
            .fold(f64::INFINITY, f64::min);
        if good <= tol * norm {
            return Ok(RankEstimate { rank: r, residual: good, capped: false });
        }
        last = good;
    }
    Ok(RankEstimate { rank: bound, residual: last, capped: true })
}
