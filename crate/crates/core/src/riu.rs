//! Minimal Renyi-Ingarden-Urbanik entropy: a random walk over local unitaries,
//! the one-parameter symmetric family `U(p)^{(x)n}`, the separable overlap
//! `lambda_max` and the known closed forms.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{closest_product_state, hosvd, rank_estimate, AlsOptions, RankEstimate, RANK_TOL};
use crate::entropy::{renyi_slice, RenyiOrder};
use crate::error::{Error, Result};
use crate::haar::{haar_unitary_with, random_hermitian_unit, u_p, unitary_exp};
use crate::linalg::{complete_unitary, ComplexMatrix, C64, ZERO};
use crate::rng::RngStream;
use crate::tensor::{kmode_into, StateTensor};

/// `V_1 (x) ... (x) V_n`, one unitary per party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalUnitarySet {
    factors: Vec<ComplexMatrix>,
}

pub const UNITARY_TOL: f64 = 1e-10;

impl LocalUnitarySet {
    pub fn new(factors: Vec<ComplexMatrix>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("no local factors".into()));
        }
        for (k, f) in factors.iter().enumerate() {
            if !f.is_square() || f.unitarity_residual() > UNITARY_TOL {
                return Err(Error::InvalidArgument(format!("factor {k} is not unitary")));
            }
        }
        Ok(Self { factors })
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self { factors: dims.iter().map(|&d| ComplexMatrix::identity(d)).collect() }
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.rows()).collect()
    }
}

/// `(V_1 (x) ... (x) V_n) |C>`.
pub fn apply_local(u: &LocalUnitarySet, c: &StateTensor) -> Result<StateTensor> {
    if u.dims() != c.dims() {
        return Err(Error::Dimension(format!("local unitaries {:?} on a {:?} tensor", u.dims(), c.dims())));
    }
    let mut t = c.clone();
    for (k, f) in u.factors.iter().enumerate() {
        t = t.kmode_product(f, k)?;
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RiuOptions {
    /// Total starts: identity, HOSVD factors, then random Haar unitaries.
    pub restarts: usize,
    /// Proposal budget per start.
    pub steps: usize,
    pub eps_start: f64,
    pub eps_min: f64,
    pub decay: f64,
    /// Consecutive rejections before the step size decays.
    pub plateau: usize,
    pub stream: RngStream,
}

impl Default for RiuOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            steps: 20_000,
            eps_start: 0.5,
            eps_min: 1e-4,
            decay: 0.95,
            plateau: 50,
            stream: RngStream::new(0, 0),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiuResult {
    /// Entropy in nats; an upper bound on the true minimum.
    pub value: f64,
    pub q: RenyiOrder,
    pub optimizer: LocalUnitarySet,
    /// Best value reached by every start, in start order.
    pub trace: Vec<f64>,
    /// The winning start reached the minimum step size within its budget.
    pub converged: bool,
    /// Set when `q = 0` was answered by the rank estimate.
    pub rank: Option<RankEstimate>,
}

/// Random-walk estimate of `min_U S_q(p(U|C>))`.
pub fn riu_minimize(c: &StateTensor, q: RenyiOrder, opts: &RiuOptions) -> Result<RiuResult> {
    riu_minimize_with_starts(c, q, opts, &[])
}

/// [`riu_minimize`] with additional caller-supplied starting points, run after
/// the standard starts.
pub fn riu_minimize_with_starts(
    c: &StateTensor,
    q: RenyiOrder,
    opts: &RiuOptions,
    extra: &[LocalUnitarySet],
) -> Result<RiuResult> {
    if !c.is_normalized() {
        return Err(Error::NotNormalized { norm_sq: c.norm_sqr() });
    }
    if q.is_zero() {
        let est = rank_estimate(c, RANK_TOL, opts.stream)?;
        return Ok(RiuResult {
            value: (est.rank as f64).ln(),
            q,
            optimizer: LocalUnitarySet::identity(c.dims()),
            trace: vec![],
            converged: !est.capped,
            rank: Some(est),
        });
    }
    for s in extra {
        if s.dims() != c.dims() {
            return Err(Error::Dimension("extra start does not match the tensor".into()));
        }
    }
    let h = hosvd(c)?;
    let hosvd_start = LocalUnitarySet { factors: h.factors.iter().map(|u| u.adjoint()).collect() };
    let base = opts.restarts.max(2);
    let total = base + extra.len();
    let runs: Vec<WalkOutcome> = (0..total)
        .into_par_iter()
        .map(|s| {
            let mut rng = opts.stream.child(s as u64).rng();
            let start = match s {
                0 => LocalUnitarySet::identity(c.dims()),
                1 => hosvd_start.clone(),
                s if s < base => random_start(c.dims(), &mut rng),
                s => extra[s - base].clone(),
            };
            walk(c, q, start, opts, &mut rng)
        })
        .collect();
    let trace: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let best = runs
        .into_iter()
        .reduce(|best, r| if r.value < best.value { r } else { best })
        .expect("at least two starts");
    let value = objective(apply_local(&best.unitaries, c)?.coeffs(), q, &mut Vec::new());
    Ok(RiuResult { value, q, optimizer: best.unitaries, trace, converged: best.converged, rank: None })
}

fn random_start<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> LocalUnitarySet {
    LocalUnitarySet { factors: dims.iter().map(|&d| haar_unitary_with(d, rng).expect("positive dimension")).collect() }
}

struct WalkOutcome {
    value: f64,
    unitaries: LocalUnitarySet,
    converged: bool,
}

/// Greedy random walk: `V_k <- exp(i eps G) V_k` for a random party `k`,
/// accepted only when the entropy decreases.
fn walk<R: Rng + ?Sized>(
    c: &StateTensor,
    q: RenyiOrder,
    start: LocalUnitarySet,
    opts: &RiuOptions,
    rng: &mut R,
) -> WalkOutcome {
    let dims = c.dims().to_vec();
    let mut unitaries = start;
    let mut t = apply_local(&unitaries, c).expect("dims checked").into_coeffs();
    let mut trial = vec![ZERO; t.len()];
    let mut scratch = Vec::with_capacity(t.len());
    let mut value = objective(&t, q, &mut scratch);
    let mut eps = opts.eps_start;
    let mut rejected = 0;
    let mut converged = false;
    for _ in 0..opts.steps {
        if eps < opts.eps_min {
            converged = true;
            break;
        }
        let k = rng.random_range(0..dims.len());
        let g = random_hermitian_unit(dims[k], rng);
        let step = unitary_exp(&g, eps).expect("Hermitian generator");
        kmode_into(&t, &dims, step.entries(), k, &mut trial);
        let v = objective(&trial, q, &mut scratch);
        if v < value {
            value = v;
            std::mem::swap(&mut t, &mut trial);
            unitaries.factors[k] = step.matmul(&unitaries.factors[k]).expect("square factors");
            rejected = 0;
        } else {
            rejected += 1;
            if rejected >= opts.plateau {
                eps *= opts.decay;
                rejected = 0;
            }
        }
    }
    converged |= eps < opts.eps_min;
    WalkOutcome { value, unitaries, converged }
}

fn objective(t: &[C64], q: RenyiOrder, scratch: &mut Vec<f64>) -> f64 {
    if q == RenyiOrder::Infinity {
        let pmax = t.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        return -pmax.ln();
    }
    scratch.clear();
    scratch.extend(t.iter().map(|z| z.norm_sqr()));
    renyi_slice(scratch, q)
}

/// Best entropy over the family `U(p)^{(x)n}`, `p in [0, 1]`, for a
/// permutation-invariant qubit state: returns `(value, p*)`.
pub fn riu_symmetric(c: &StateTensor, q: RenyiOrder) -> Result<(f64, f64)> {
    if !c.is_normalized() {
        return Err(Error::NotNormalized { norm_sq: c.norm_sqr() });
    }
    if c.dims().iter().any(|&d| d != 2) {
        return Err(Error::Dimension("the symmetric family acts on qubits".into()));
    }
    if !is_permutation_invariant(c, 1e-10)? {
        return Err(Error::InvalidArgument("state is not permutation invariant".into()));
    }
    let f = |p: f64| -> f64 {
        let u = u_p(p).expect("p in [0, 1]");
        let set = LocalUnitarySet { factors: vec![u; c.order()] };
        objective(apply_local(&set, c).expect("qubit dims").coeffs(), q, &mut Vec::new())
    };
    let (mut best_p, mut best) = (0.0, f64::INFINITY);
    for i in 0..=SCAN_POINTS {
        let p = i as f64 / SCAN_POINTS as f64;
        let v = f(p);
        if v < best {
            best = v;
            best_p = p;
        }
    }
    let h = 1.0 / SCAN_POINTS as f64;
    let (p, v) = golden_section(&f, (best_p - h).max(0.0), (best_p + h).min(1.0), REFINE_TOL);
    Ok(if v < best { (v, p) } else { (best, best_p) })
}

const SCAN_POINTS: usize = 1000;
const REFINE_TOL: f64 = 1e-8;

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Checks `P C = C` for every permutation of equal-dimension axes.
pub fn is_permutation_invariant(c: &StateTensor, tol: f64) -> Result<bool> {
    let n = c.order();
    if c.dims().iter().any(|&d| d != c.dims()[0]) {
        return Ok(false);
    }
    // Adjacent transpositions generate the symmetric group.
    for a in 0..n.saturating_sub(1) {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(a, a + 1);
        if c.permute_axes(&perm)?.sub(c)?.frobenius() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Separable overlap: `lambda_max`, geometric measure `1 - lambda_max` and
/// Fubini-Study distance `arccos sqrt(lambda_max)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparableOverlap {
    pub lambda_max: f64,
    pub geometric_measure: f64,
    pub fubini_study: f64,
    /// Overlap of the rank-1 CP approximation (a lower bound on `lambda_max`).
    pub lambda_parafac: f64,
    pub optimizer: LocalUnitarySet,
}

/// `lambda_max = exp(-S_inf^RIU)`. The rank-1 CP solution is included as a
/// start (a local basis whose first vector is the CP factor), so the result is
/// never below the PARAFAC overlap.
pub fn lambda_max_sep(c: &StateTensor, opts: &RiuOptions, als: &AlsOptions) -> Result<SeparableOverlap> {
    let (psi_p, lambda_parafac) = closest_product_state(c, als)?;
    let seeded = product_basis_start(&psi_p, c.dims())?;
    let res = riu_minimize_with_starts(c, RenyiOrder::Infinity, opts, &[seeded])?;
    let lambda = (-res.value).exp().min(1.0);
    Ok(SeparableOverlap {
        lambda_max: lambda,
        geometric_measure: 1.0 - lambda,
        fubini_study: lambda.sqrt().acos(),
        lambda_parafac,
        optimizer: res.optimizer,
    })
}

/// Local unitaries `V_k` with `V_k a_k = e_0` for a product state `(x)_k a_k`.
fn product_basis_start(psi: &StateTensor, dims: &[usize]) -> Result<LocalUnitarySet> {
    let mut factors = Vec::with_capacity(dims.len());
    for (k, &d) in dims.iter().enumerate() {
        // The factor of party k is the dominant left singular vector of the unfolding.
        let s = crate::linalg::svd(&psi.unfold(k)?)?;
        let a = ComplexMatrix::from_fn(d, 1, |i, _| s.u[(i, 0)]);
        factors.push(complete_unitary(&a)?.adjoint());
    }
    LocalUnitarySet::new(factors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Proven,
    Conjectured,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticValue {
    pub value: f64,
    pub status: Status,
}

/// Closed-form minimal RIU entropies of catalog states.
///
/// `HD` uses the Renyi entropy of its computational-basis distribution
/// `(1/6, 1/6, 1/6, 1/6, 1/3)`, `(1/(1-q)) log((4 + 2^q) / 6^q)`. The
/// alternative expression `(1/(1-q)) log(6^q / (4 + 4^q))` does not vanish at
/// `q = 1` and cannot be an entropy. See [`hd_reference`].
pub fn analytic_riu(name: &str, q: RenyiOrder) -> Result<AnalyticValue> {
    use Status::*;
    let ln = f64::ln;
    let key = name.trim().to_ascii_lowercase().replace(' ', "");
    let proven = |value| Ok(AnalyticValue { value, status: Proven });
    let conjectured = |value| Ok(AnalyticValue { value, status: Conjectured });
    let none = || Err(Error::NoClosedForm(format!("{name} at q = {q}")));
    match (key.as_str(), q) {
        ("prod3" | "prod4", _) => proven(0.0),
        ("ghz" | "ghz4", _) => proven(ln(2.0)),
        ("w", RenyiOrder::Finite(x)) if x == 1.0 => proven(ln(3.0)),
        ("w", RenyiOrder::Infinity) => proven(-ln(4.0 / 9.0)),
        ("d(4,1)" | "d(4,3)", RenyiOrder::Finite(x)) if x == 1.0 => proven(ln(4.0)),
        ("d(4,2)", q) => proven(d42(q)),
        ("hd", q) => proven(hd_corrected(q)),
        ("c1" | "c2" | "c3", _) => conjectured(ln(4.0)),
        ("hs", RenyiOrder::Finite(x)) if x == 2.0 => conjectured(ln(6.0)),
        ("hs", RenyiOrder::Infinity) => conjectured(-ln(2.0 / 9.0)),
        ("phi4", RenyiOrder::Infinity) => proven(-ln(1.0 / 3.0)),
        _ => none(),
    }
}

/// `S_q(D(4,2)) = (1/(1-q)) log[2^{1-3q} 3^{-q} (3 + 3^{2q})]`.
pub fn d42(q: RenyiOrder) -> f64 {
    let ln = f64::ln;
    match q {
        RenyiOrder::Infinity => -ln(3.0 / 8.0),
        RenyiOrder::Finite(x) if x == 1.0 => ln(8.0 / 3f64.sqrt()),
        RenyiOrder::Finite(x) if x == 0.0 => ln(16.0),
        RenyiOrder::Finite(x) => {
            // log(3 + 9^x) written to avoid overflow at large x
            let tail = 2.0 * x * ln(3.0) + (3.0 * 9f64.powf(-x)).ln_1p();
            ((1.0 - 3.0 * x) * ln(2.0) - x * ln(3.0) + tail) / (1.0 - x)
        }
    }
}

/// Renyi entropy of `(1/6, 1/6, 1/6, 1/6, 1/3)`.
pub fn hd_corrected(q: RenyiOrder) -> f64 {
    let ln = f64::ln;
    match q {
        RenyiOrder::Infinity => ln(3.0),
        RenyiOrder::Finite(x) if x == 1.0 => 2.0 / 3.0 * ln(2.0) + ln(3.0),
        RenyiOrder::Finite(x) if x == 0.0 => ln(5.0),
        RenyiOrder::Finite(x) => (x * ln(2.0) + (4.0 * 2f64.powf(-x)).ln_1p() - x * ln(6.0)) / (1.0 - x),
    }
}

/// Reference HD values, kept for comparison: `(4/3) log 3` at `q = 1`, `(1/(1-q)) log(6^q/(4+4^q))`
/// otherwise and `-log(2/3)` at `q = inf`.
pub fn hd_reference(q: RenyiOrder) -> f64 {
    let ln = f64::ln;
    match q {
        RenyiOrder::Infinity => -ln(2.0 / 3.0),
        RenyiOrder::Finite(x) if x == 1.0 => 4.0 / 3.0 * ln(3.0),
        RenyiOrder::Finite(x) => (x * ln(6.0) - x * ln(4.0) - (4.0 * 4f64.powf(-x)).ln_1p()) / (1.0 - x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::named_state;
    use crate::entropy::renyi;
    use crate::haar::{haar_state, haar_unitary};

    fn quick() -> RiuOptions {
        RiuOptions { restarts: 4, steps: 6000, ..RiuOptions::default() }
    }

    #[test]
    fn identity_and_rotation_family_leave_w_alone() {
        let w = named_state("W").unwrap();
        let id = LocalUnitarySet::identity(&[2, 2, 2]);
        assert_eq!(apply_local(&id, &w).unwrap().coeffs(), w.coeffs());
        let u1 = LocalUnitarySet::new(vec![u_p(1.0).unwrap(); 3]).unwrap();
        assert!(apply_local(&u1, &w).unwrap().sub(&w).unwrap().frobenius() < 1e-15);
    }

    #[test]
    fn apply_local_preserves_norm_and_checks_dims() {
        let c = haar_state(&[2, 3, 2], &RngStream::new(1, 0)).unwrap();
        let u = LocalUnitarySet::new(
            [2, 3, 2].iter().enumerate().map(|(k, &d)| haar_unitary(d, &RngStream::new(2, k as u64)).unwrap()).collect(),
        )
        .unwrap();
        assert!((apply_local(&u, &c).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        assert!(apply_local(&LocalUnitarySet::identity(&[2, 2, 2]), &c).is_err());
        assert!(LocalUnitarySet::new(vec![ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap()]).is_err());
    }

    #[test]
    fn ghz_and_w() {
        let ghz = named_state("GHZ").unwrap();
        for q in [0.5, 2.0] {
            let r = riu_minimize(&ghz, RenyiOrder::Finite(q), &quick()).unwrap();
            assert!((r.value - 2f64.ln()).abs() < 1e-3, "q={q} {}", r.value);
        }
        let w = riu_minimize(&named_state("W").unwrap(), RenyiOrder::Finite(1.0), &quick()).unwrap();
        assert!((w.value - 3f64.ln()).abs() < 1e-3, "{}", w.value);
    }

    #[test]
    fn result_value_matches_its_optimizer() {
        let c = haar_state(&[2, 2, 2], &RngStream::new(3, 0)).unwrap();
        let q = RenyiOrder::Finite(2.0);
        let r = riu_minimize(&c, q, &quick()).unwrap();
        let p = apply_local(&r.optimizer, &c).unwrap().prob_vector().unwrap();
        assert!((renyi(&p, q) - r.value).abs() < 1e-9);
        assert!(r.value <= renyi(&c.prob_vector().unwrap(), q) + 1e-9);
        let core = hosvd(&c).unwrap().core;
        assert!(r.value <= renyi(&core.prob_vector().unwrap(), q) + 1e-9);
    }

    #[test]
    fn q_zero_routes_to_rank() {
        let r = riu_minimize(&named_state("W").unwrap(), RenyiOrder::Finite(0.0), &quick()).unwrap();
        assert!((r.value - 3f64.ln()).abs() < 1e-12);
        assert_eq!(r.rank.unwrap().rank, 3);
    }

    #[test]
    fn product_state_is_detected() {
        let psi = apply_local(
            &LocalUnitarySet::new((0..3).map(|k| haar_unitary(2, &RngStream::new(4, k)).unwrap()).collect()).unwrap(),
            &named_state("prod3").unwrap(),
        )
        .unwrap();
        let r = riu_minimize(&psi, RenyiOrder::Finite(1.0), &quick()).unwrap();
        assert!(r.value <= 1e-4, "{}", r.value);
    }

    #[test]
    fn symmetric_family_d42() {
        let d = named_state("D(4,2)").unwrap();
        for q in [RenyiOrder::Finite(2.0), RenyiOrder::Finite(3.0), RenyiOrder::Infinity] {
            let (v, _) = riu_symmetric(&d, q).unwrap();
            assert!((v - d42(q)).abs() < 1e-6, "q={q}: {v} vs {}", d42(q));
        }
        assert!(riu_symmetric(&named_state("A4").unwrap(), RenyiOrder::Finite(2.0)).is_err());
    }

    #[test]
    fn d42_closed_form_limits() {
        let near1 = d42(RenyiOrder::Finite(1.0 + 1e-7));
        assert!((near1 - d42(RenyiOrder::Finite(1.0))).abs() < 1e-5);
        let big = d42(RenyiOrder::Finite(1e6));
        assert!((big - d42(RenyiOrder::Infinity)).abs() < 1e-5);
        assert!((d42(RenyiOrder::Finite(1.0)) - 1.530).abs() < 1e-3);
    }

    #[test]
    fn hd_corrected_is_a_renyi_entropy() {
        let p = crate::tensor::ProbVector::new(vec![1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0]).unwrap();
        for q in [0.5, 1.0, 2.0, 5.0] {
            let q = RenyiOrder::Finite(q);
            assert!((hd_corrected(q) - renyi(&p, q)).abs() < 1e-12);
        }
        assert!((hd_corrected(RenyiOrder::Infinity) - renyi(&p, RenyiOrder::Infinity)).abs() < 1e-12);
        // The reference expression does not tend to its own q = 1 value.
        assert!(hd_reference(RenyiOrder::Finite(1.0 + 1e-6)).abs() > 1e3);
    }

    #[test]
    fn analytic_table() {
        let v = analytic_riu("GHZ", RenyiOrder::Finite(7.3)).unwrap();
        assert!((v.value - 2f64.ln()).abs() < 1e-15 && v.status == Status::Proven);
        assert_eq!(analytic_riu("C2", RenyiOrder::Finite(2.0)).unwrap().status, Status::Conjectured);
        assert!((analytic_riu("D(4,2)", RenyiOrder::Finite(1.0)).unwrap().value - 1.530).abs() < 1e-3);
        assert!(matches!(analytic_riu("A4", RenyiOrder::Finite(2.0)), Err(Error::NoClosedForm(_))));
    }

    #[test]
    fn separable_overlap_of_w() {
        let s = lambda_max_sep(&named_state("W").unwrap(), &quick(), &AlsOptions::default()).unwrap();
        assert!((s.lambda_max - 4.0 / 9.0).abs() < 1e-3, "{}", s.lambda_max);
        assert!(s.lambda_max >= s.lambda_parafac - 1e-6);
        assert!((s.geometric_measure - 5.0 / 9.0).abs() < 1e-3);
    }
}
