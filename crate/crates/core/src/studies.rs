//! Haar-ensemble experiments: entropy tables, tangle and hyperdeterminant
//! distributions, overlap scaling with the local dimension and the largest
//! Schmidt coefficient bound.
//!
//! Trial `i` of an ensemble draws its state from stream `(seed, i)`; any
//! optimizer in the loop uses children of that stream. Results are collected
//! in trial order, so reports do not depend on the number of threads.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use crate::decomp::{closest_product_state, hosvd, AlsOptions};
use crate::entropy::{renyi_slice, RenyiOrder};
use crate::error::{Error, Result};
use crate::haar::haar_state;
use crate::linalg::singular_values;
use crate::moments::{beta_fit_f64, beta_pdf_tau, beta_pdf_tau2, TAU_ALPHA, TAU_BETA};
use crate::polyinv::{hyper_t, tangle};
use crate::riu::{lambda_max_sep, riu_minimize, RiuOptions};
use crate::rng::RngStream;
use crate::tensor::StateTensor;

/// Upper limit on the number of histogram bins.
pub const MAX_BINS: usize = 10_000;

/// Slack allowed in the per-sample orderings checked by the studies.
pub const ORDER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    /// `S_q` of the state in the computational basis.
    RawSq,
    /// `S_q` of the HOSVD core tensor.
    HosvdSq,
    /// Random-walk estimate of the minimal RIU entropy.
    RiuSq,
    Tangle,
    /// Square of the 3-tangle.
    Tangle2,
    HyperT,
    /// Largest component of the probability vector.
    LambdaMax,
}

impl Statistic {
    pub const ALL: [Statistic; 7] = [
        Statistic::RawSq,
        Statistic::HosvdSq,
        Statistic::RiuSq,
        Statistic::Tangle,
        Statistic::Tangle2,
        Statistic::HyperT,
        Statistic::LambdaMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::RawSq => "raw",
            Statistic::HosvdSq => "hosvd",
            Statistic::RiuSq => "riu",
            Statistic::Tangle => "tangle",
            Statistic::Tangle2 => "tangle2",
            Statistic::HyperT => "hyper-t",
            Statistic::LambdaMax => "lambda-max",
        }
    }

    pub fn needs_q(self) -> bool {
        matches!(self, Statistic::RawSq | Statistic::HosvdSq | Statistic::RiuSq)
    }

    fn check(self, n: usize, d: usize, q: Option<RenyiOrder>) -> Result<()> {
        if n == 0 || d < 2 {
            return Err(Error::InvalidArgument("ensembles need n >= 1 parties of dimension d >= 2".into()));
        }
        match (self.needs_q(), q) {
            (true, None) => return Err(Error::InvalidArgument(format!("statistic `{self}` needs a Renyi order"))),
            (false, Some(_)) => {
                return Err(Error::InvalidArgument(format!("statistic `{self}` does not take a Renyi order")))
            }
            _ => {}
        }
        let fits = match self {
            Statistic::Tangle | Statistic::Tangle2 => n == 3 && d == 2,
            Statistic::HyperT => n == 4 && d == 2,
            _ => true,
        };
        if !fits {
            return Err(Error::InvalidArgument(format!("statistic `{self}` is not defined for n = {n}, d = {d}")));
        }
        Ok(())
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let alias = match key.as_str() {
            "hypert" | "t" => "hyper-t",
            "lambdamax" | "lambda" => "lambda-max",
            "tau" => "tangle",
            "tau2" | "tangle-sq" => "tangle2",
            k => k,
        };
        Statistic::ALL
            .into_iter()
            .find(|st| st.name() == alias)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown statistic `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binning {
    FreedmanDiaconis,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
    /// `count / (samples * width)`.
    pub density: f64,
}

/// Equal-width histogram spanning `[min, max]`. A constant sample gets a
/// single unit-width bin centred on its value.
pub fn histogram(values: &[f64], binning: Binning) -> Result<Vec<HistogramBin>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("histogram of an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("histogram values must be finite".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = values.len();
    if hi == lo {
        return Ok(vec![HistogramBin { bin_left: lo - 0.5, bin_right: lo + 0.5, count: n as u64, density: 1.0 }]);
    }
    let bins = match binning {
        Binning::Fixed(0) => return Err(Error::InvalidArgument("at least one bin is required".into())),
        Binning::Fixed(b) => b,
        Binning::FreedmanDiaconis => freedman_diaconis_bins(values, hi - lo),
    }
    .min(MAX_BINS);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in values {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let bin_left = lo + i as f64 * width;
            let bin_right = if i + 1 == bins { hi } else { lo + (i + 1) as f64 * width };
            HistogramBin { bin_left, bin_right, count, density: count as f64 / (n as f64 * (bin_right - bin_left)) }
        })
        .collect())
}

/// Bin width `2 IQR n^{-1/3}`; Sturges' rule when the interquartile range vanishes.
fn freedman_diaconis_bins(values: &[f64], range: f64) -> usize {
    let n = values.len() as f64;
    let iqr = Data::new(values.to_vec()).interquartile_range();
    if iqr > 0.0 {
        ((range / (2.0 * iqr * n.powf(-1.0 / 3.0))).ceil() as usize).max(1)
    } else {
        n.log2().ceil() as usize + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub statistic: String,
    pub n: usize,
    pub d: usize,
    pub q: Option<RenyiOrder>,
    pub samples: usize,
    pub mean: f64,
    pub second_moment: f64,
    /// Population standard deviation, `sqrt(second_moment - mean^2)`.
    pub std: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub histogram: Vec<HistogramBin>,
    pub seed: u64,
}

impl EnsembleReport {
    pub fn from_values(
        statistic: impl Into<String>,
        n: usize,
        d: usize,
        q: Option<RenyiOrder>,
        values: &[f64],
        seed: u64,
        binning: Binning,
    ) -> Result<Self> {
        let histogram = histogram(values, binning)?;
        let m = values.len() as f64;
        let mean = values.iter().sum::<f64>() / m;
        let second_moment = values.iter().map(|v| v * v).sum::<f64>() / m;
        let std = (second_moment - mean * mean).max(0.0).sqrt();
        Ok(Self {
            statistic: statistic.into(),
            n,
            d,
            q,
            samples: values.len(),
            mean,
            second_moment,
            std,
            std_error: std / m.sqrt(),
            histogram,
            seed,
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub d: usize,
    pub statistic: Statistic,
    pub q: Option<RenyiOrder>,
    pub samples: usize,
    pub seed: u64,
    pub binning: Binning,
    /// Used by [`Statistic::RiuSq`] only; the stream is replaced per trial.
    pub riu: RiuOptions,
}

impl EnsembleSpec {
    pub fn new(n: usize, d: usize, statistic: Statistic, q: Option<RenyiOrder>, samples: usize, seed: u64) -> Self {
        Self { n, d, statistic, q, samples, seed, binning: Binning::FreedmanDiaconis, riu: table_riu_options() }
    }
}

/// Reduced random-walk budget for optimizer-in-the-loop ensembles.
pub fn table_riu_options() -> RiuOptions {
    RiuOptions { restarts: 4, steps: 4000, ..RiuOptions::default() }
}

/// Per-trial values of the statistic, in trial order.
pub fn ensemble_values(spec: &EnsembleSpec) -> Result<Vec<f64>> {
    spec.statistic.check(spec.n, spec.d, spec.q)?;
    if spec.samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let dims = vec![spec.d; spec.n];
    (0..spec.samples as u64)
        .into_par_iter()
        .map(|i| {
            let stream = RngStream::new(spec.seed, i);
            let c = haar_state(&dims, &stream)?;
            evaluate(spec.statistic, &c, spec.q, &RiuOptions { stream: stream.child(0), ..spec.riu })
        })
        .collect()
}

pub fn ensemble_stat(spec: &EnsembleSpec) -> Result<EnsembleReport> {
    let values = ensemble_values(spec)?;
    EnsembleReport::from_values(spec.statistic.name(), spec.n, spec.d, spec.q, &values, spec.seed, spec.binning)
}

fn evaluate(stat: Statistic, c: &StateTensor, q: Option<RenyiOrder>, riu: &RiuOptions) -> Result<f64> {
    let q = || q.ok_or_else(|| Error::InvalidArgument(format!("statistic `{stat}` needs a Renyi order")));
    match stat {
        Statistic::RawSq => Ok(renyi_slice(&probs(c), q()?)),
        Statistic::HosvdSq => Ok(renyi_slice(&core_probs(c)?, q()?)),
        Statistic::RiuSq => Ok(riu_minimize(c, q()?, riu)?.value),
        Statistic::Tangle => tangle(c),
        Statistic::Tangle2 => tangle(c).map(|t| t * t),
        Statistic::HyperT => hyper_t(c),
        Statistic::LambdaMax => Ok(max_of(&probs(c))),
    }
}

fn probs(c: &StateTensor) -> Vec<f64> {
    c.coeffs().iter().map(|z| z.norm_sqr()).collect()
}

/// Probability vector of the HOSVD core tensor.
fn core_probs(c: &StateTensor) -> Result<Vec<f64>> {
    let core = hosvd(c)?.core;
    let p = probs(&core);
    let total: f64 = p.iter().sum();
    Ok(p.into_iter().map(|x| x / total).collect())
}

fn max_of(p: &[f64]) -> f64 {
    p.iter().copied().fold(0.0, f64::max)
}

/// Default Renyi orders of the entropy tables; `q = 100` stands in for `q = inf`.
pub fn table_orders() -> Vec<RenyiOrder> {
    vec![RenyiOrder::Finite(1.0), RenyiOrder::Finite(2.0), RenyiOrder::Finite(100.0)]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiuTableRow {
    pub q: RenyiOrder,
    pub raw: EnsembleReport,
    pub hosvd: EnsembleReport,
    pub riu: EnsembleReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiuTable {
    pub n: usize,
    pub d: usize,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<RiuTableRow>,
    /// Samples whose RIU value exceeded the raw or HOSVD value.
    pub ordering_violations: usize,
}

impl RiuTable {
    /// `mean(raw) >= mean(HOSVD) >= mean(RIU)` in every row.
    pub fn column_order_holds(&self) -> bool {
        self.rows.iter().all(|r| r.raw.mean >= r.hosvd.mean && r.hosvd.mean >= r.riu.mean)
    }
}

/// Raw, HOSVD-core and RIU-minimized entropies of the same Haar states for
/// each order in `qs`.
pub fn riu_table(
    n: usize,
    d: usize,
    qs: &[RenyiOrder],
    samples: usize,
    riu: &RiuOptions,
    seed: u64,
    binning: Binning,
) -> Result<RiuTable> {
    Statistic::RiuSq.check(n, d, qs.first().copied().or(Some(RenyiOrder::Finite(1.0))))?;
    if samples == 0 || qs.is_empty() {
        return Err(Error::InvalidArgument("a table needs at least one sample and one order".into()));
    }
    let dims = vec![d; n];
    // One (raw, hosvd, riu) triple per order and trial.
    let trials: Vec<Vec<[f64; 3]>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let stream = RngStream::new(seed, i);
            let c = haar_state(&dims, &stream)?;
            let p = probs(&c);
            let pc = core_probs(&c)?;
            qs.iter()
                .enumerate()
                .map(|(j, &q)| {
                    let opts = RiuOptions { stream: stream.child(j as u64), ..*riu };
                    Ok([renyi_slice(&p, q), renyi_slice(&pc, q), riu_minimize(&c, q, &opts)?.value])
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let ordering_violations =
        trials.iter().flatten().filter(|[raw, hos, opt]| *opt > raw.min(*hos) + ORDER_TOL).count();
    let mut rows = Vec::with_capacity(qs.len());
    for (j, &q) in qs.iter().enumerate() {
        let column = |c: usize, name: &str| {
            let values: Vec<f64> = trials.iter().map(|t| t[j][c]).collect();
            EnsembleReport::from_values(name, n, d, Some(q), &values, seed, binning)
        };
        rows.push(RiuTableRow { q, raw: column(0, "raw")?, hosvd: column(1, "hosvd")?, riu: column(2, "riu")? });
    }
    Ok(RiuTable { n, d, samples, seed, rows, ordering_violations })
}

/// `<S_1>` and its standard deviation for the raw probability vector of a
/// Haar state in dimension `N`: `H_N - 1` and
/// `sqrt([2 psi'(2) - (N + 1) psi'(N + 1)] / (N + 1))`.
pub fn shannon_anchor(big_n: usize) -> (f64, f64) {
    let mean = harmonic(big_n) - 1.0;
    let m = big_n as f64 + 1.0;
    let var = (2.0 * trigamma(2) - m * trigamma(big_n + 1)) / m;
    (mean, var.sqrt())
}

/// `H_N / N`, the Haar average of the largest probability component.
pub fn lambda_max_anchor(big_n: usize) -> f64 {
    harmonic(big_n) / big_n as f64
}

pub fn harmonic(n: usize) -> f64 {
    (1..=n).rev().map(|k| 1.0 / k as f64).sum()
}

/// `psi'(n) = pi^2 / 6 - sum_{k < n} 1 / k^2` for integer `n >= 1`.
fn trigamma(n: usize) -> f64 {
    std::f64::consts::PI.powi(2) / 6.0 - (1..n).rev().map(|k| 1.0 / (k * k) as f64).sum::<f64>()
}

/// Smallest largest squared Schmidt coefficient over the cuts `i | jk` of a
/// tripartite state. Bounds the separable overlap from above.
pub fn schmidt_bound(c: &StateTensor) -> Result<f64> {
    if c.order() != 3 {
        return Err(Error::InvalidArgument(format!("Schmidt bound needs 3 parties, got {}", c.order())));
    }
    if !c.is_normalized() {
        return Err(Error::NotNormalized { norm_sq: c.norm_sqr() });
    }
    let mut bound = f64::INFINITY;
    for k in 0..3 {
        let s = singular_values(&c.unfold(k)?)?;
        bound = bound.min(s[0] * s[0]);
    }
    Ok(bound.min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub std_error: f64,
}

impl MeanSe {
    fn of(values: &[f64]) -> Self {
        let m = values.len() as f64;
        let mean = values.iter().sum::<f64>() / m;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        Self { mean, std_error: (var / m).sqrt() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub d: usize,
    pub samples: usize,
    pub lambda_max: MeanSe,
    /// Largest component of the HOSVD core.
    pub lambda_h: MeanSe,
    /// Overlap with the rank-1 PARAFAC state.
    pub lambda_p: MeanSe,
    /// Random-walk separable overlap, for small `d` only.
    pub lambda_lu: Option<MeanSe>,
    pub schmidt: MeanSe,
    /// `H_N / N` with `N = d^3`.
    pub harmonic_anchor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Unweighted least squares of `log y` against `log x`; needs three points.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidArgument("a log-log fit needs at least three paired points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_se = (sse / (m - 2.0) / sxx).sqrt();
    Ok(LogLogFit { slope, slope_se, intercept, points: lx.len() })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScalingOptions {
    pub dmin: usize,
    pub dmax: usize,
    pub samples: usize,
    /// The stream is replaced per trial.
    pub als: AlsOptions,
    pub riu: RiuOptions,
    /// Largest `d` for which the random-walk overlap is computed.
    pub lu_max_d: usize,
    pub seed: u64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self {
            dmin: 2,
            dmax: 8,
            samples: 2000,
            als: AlsOptions { restarts: 4, ..AlsOptions::default() },
            riu: table_riu_options(),
            lu_max_d: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingReport {
    pub records: Vec<ScalingRecord>,
    pub fit_lambda_max: Option<LogLogFit>,
    pub fit_lambda_h: Option<LogLogFit>,
    pub fit_lambda_p: Option<LogLogFit>,
    pub fit_lambda_lu: Option<LogLogFit>,
    pub fit_schmidt: Option<LogLogFit>,
    /// Samples violating `lambda_P <= lambda_LU <= schmidt_bound`.
    pub ordering_violations: usize,
    pub seed: u64,
}

/// Overlaps of Haar states on `d x d x d` for each `d` in `dmin..=dmax`.
pub fn scaling_study(opts: &ScalingOptions) -> Result<ScalingReport> {
    if opts.dmin < 2 || opts.dmax < opts.dmin || opts.samples == 0 {
        return Err(Error::InvalidArgument("scaling needs 2 <= dmin <= dmax and at least one sample".into()));
    }
    let mut records = Vec::new();
    let mut ordering_violations = 0;
    for d in opts.dmin..=opts.dmax {
        let with_lu = d <= opts.lu_max_d;
        let base = RngStream::new(opts.seed, d as u64);
        let rows: Vec<[f64; 5]> = (0..opts.samples as u64)
            .into_par_iter()
            .map(|i| {
                let stream = base.child(i);
                let c = haar_state(&[d, d, d], &stream)?;
                let lambda_max = max_of(&probs(&c));
                let lambda_h = max_of(&core_probs(&c)?);
                let als = AlsOptions { stream: stream.child(1), ..opts.als };
                let lambda_lu = if with_lu {
                    let riu = RiuOptions { stream: stream.child(2), ..opts.riu };
                    lambda_max_sep(&c, &riu, &als)?.lambda_max
                } else {
                    f64::NAN
                };
                let (_, lambda_p) = closest_product_state(&c, &als)?;
                Ok([lambda_max, lambda_h, lambda_p, lambda_lu, schmidt_bound(&c)?])
            })
            .collect::<Result<_>>()?;
        ordering_violations += rows
            .iter()
            .filter(|[_, _, p, lu, s]| {
                let top = if lu.is_nan() { *p } else { *lu };
                *p > top + ORDER_TOL || top > s + ORDER_TOL
            })
            .count();
        let col = |j: usize| MeanSe::of(&rows.iter().map(|r| r[j]).collect::<Vec<_>>());
        records.push(ScalingRecord {
            d,
            samples: opts.samples,
            lambda_max: col(0),
            lambda_h: col(1),
            lambda_p: col(2),
            lambda_lu: with_lu.then(|| col(3)),
            schmidt: col(4),
            harmonic_anchor: lambda_max_anchor(d * d * d),
        });
    }
    let fit = |get: &dyn Fn(&ScalingRecord) -> Option<MeanSe>| {
        let (x, y): (Vec<f64>, Vec<f64>) =
            records.iter().filter_map(|r| get(r).map(|m| (r.d as f64, m.mean))).unzip();
        log_log_fit(&x, &y).ok()
    };
    Ok(ScalingReport {
        fit_lambda_max: fit(&|r| Some(r.lambda_max)),
        fit_lambda_h: fit(&|r| Some(r.lambda_h)),
        fit_lambda_p: fit(&|r| Some(r.lambda_p)),
        fit_lambda_lu: fit(&|r| r.lambda_lu),
        fit_schmidt: fit(&|r| Some(r.schmidt)),
        records,
        ordering_violations,
        seed: opts.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlayBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
    pub density: f64,
    /// Beta-model density at the bin centre.
    pub model_density: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetaFitReport {
    pub samples: usize,
    pub m1: f64,
    pub m2: f64,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub alpha_exact: f64,
    pub beta_exact: f64,
    pub tau: Vec<OverlayBin>,
    pub tau2: Vec<OverlayBin>,
}

pub const MIN_FIT_SAMPLES: usize = 1000;

/// Method-of-moments Beta fit of 3-tangle samples with histograms of `tau`
/// and `tau^2` next to the `Beta(31/17, 62/17)` model densities.
pub fn beta_fit_report(taus: &[f64], binning: Binning) -> Result<BetaFitReport> {
    if taus.len() < MIN_FIT_SAMPLES {
        return Err(Error::InvalidArgument(format!("a Beta fit needs at least {MIN_FIT_SAMPLES} samples")));
    }
    if taus.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidArgument("tangle samples must lie in [0, 1]".into()));
    }
    let m = taus.len() as f64;
    let m1 = taus.iter().sum::<f64>() / m;
    let m2 = taus.iter().map(|t| t * t).sum::<f64>() / m;
    let (alpha_hat, beta_hat) = beta_fit_f64(m1, m2)?;
    let squares: Vec<f64> = taus.iter().map(|t| t * t).collect();
    let overlay = |values: &[f64], pdf: fn(f64) -> Result<f64>| -> Result<Vec<OverlayBin>> {
        histogram(values, binning)?
            .into_iter()
            .map(|b| {
                let centre = 0.5 * (b.bin_left + b.bin_right);
                let model_density = if centre > 0.0 && centre <= 1.0 { pdf(centre)? } else { 0.0 };
                Ok(OverlayBin { bin_left: b.bin_left, bin_right: b.bin_right, count: b.count, density: b.density, model_density })
            })
            .collect()
    };
    Ok(BetaFitReport {
        samples: taus.len(),
        m1,
        m2,
        alpha_hat,
        beta_hat,
        alpha_exact: TAU_ALPHA.0 as f64 / TAU_ALPHA.1 as f64,
        beta_exact: TAU_BETA.0 as f64 / TAU_BETA.1 as f64,
        tau: overlay(taus, beta_pdf_tau)?,
        tau2: overlay(&squares, beta_pdf_tau2)?,
    })
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// CSV with columns `bin_left,bin_right,count,density`.
pub fn write_histogram_csv<W: Write>(bins: &[HistogramBin], out: W) -> Result<()> {
    write_rows(bins, out)
}

/// CSV with columns `bin_left,bin_right,count,density,model_density`.
pub fn write_overlay_csv<W: Write>(bins: &[OverlayBin], out: W) -> Result<()> {
    write_rows(bins, out)
}

#[derive(Serialize)]
struct ScalingRow {
    d: usize,
    samples: usize,
    lambda_max: f64,
    lambda_max_se: f64,
    harmonic_anchor: f64,
    lambda_h: f64,
    lambda_h_se: f64,
    lambda_p: f64,
    lambda_p_se: f64,
    lambda_lu: Option<f64>,
    lambda_lu_se: Option<f64>,
    schmidt: f64,
    schmidt_se: f64,
    eg_max: f64,
    eg_h: f64,
    eg_p: f64,
    eg_lu: Option<f64>,
}

/// One row per `d`: means, standard errors and the geometric-measure proxies
/// `1 - <lambda>`.
pub fn write_scaling_csv<W: Write>(report: &ScalingReport, out: W) -> Result<()> {
    let rows: Vec<ScalingRow> = report
        .records
        .iter()
        .map(|r| ScalingRow {
            d: r.d,
            samples: r.samples,
            lambda_max: r.lambda_max.mean,
            lambda_max_se: r.lambda_max.std_error,
            harmonic_anchor: r.harmonic_anchor,
            lambda_h: r.lambda_h.mean,
            lambda_h_se: r.lambda_h.std_error,
            lambda_p: r.lambda_p.mean,
            lambda_p_se: r.lambda_p.std_error,
            lambda_lu: r.lambda_lu.map(|m| m.mean),
            lambda_lu_se: r.lambda_lu.map(|m| m.std_error),
            schmidt: r.schmidt.mean,
            schmidt_se: r.schmidt.std_error,
            eg_max: 1.0 - r.lambda_max.mean,
            eg_h: 1.0 - r.lambda_h.mean,
            eg_p: 1.0 - r.lambda_p.mean,
            eg_lu: r.lambda_lu.map(|m| 1.0 - m.mean),
        })
        .collect();
    write_rows(&rows, out)
}

#[derive(Serialize)]
struct TableRow {
    q: String,
    column: String,
    samples: usize,
    mean: f64,
    second_moment: f64,
    std: f64,
    std_error: f64,
}

/// One row per order and column: `q,column,samples,mean,second_moment,std,std_error`.
pub fn write_table_csv<W: Write>(table: &RiuTable, out: W) -> Result<()> {
    let rows: Vec<TableRow> = table
        .rows
        .iter()
        .flat_map(|r| [&r.raw, &r.hosvd, &r.riu].map(|rep| (r.q, rep)))
        .map(|(q, rep)| TableRow {
            q: q.to_string(),
            column: rep.statistic.clone(),
            samples: rep.samples,
            mean: rep.mean,
            second_moment: rep.second_moment,
            std: rep.std,
            std_error: rep.std_error,
        })
        .collect();
    write_rows(&rows, out)
}

fn write_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}
