use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use log::info;
use riu_core::catalog::{named_state, CATALOG};
use riu_core::decomp::{hosvd, parafac_als, rank_estimate, AlsOptions};
use riu_core::entropy::renyi;
use riu_core::moments::{beta_moment, ratio_to_f64, tangle_even_moment, TAU_ALPHA, TAU_BETA};
use riu_core::polyinv::{det3, det4, hyper_t, tangle};
use riu_core::riu::{lambda_max_sep, riu_minimize, riu_symmetric, RiuOptions};
use riu_core::studies::{
    beta_fit_report, ensemble_stat, ensemble_values, riu_table, scaling_study, schmidt_bound, table_orders,
    table_riu_options, write_histogram_csv, write_scaling_csv, write_table_csv, Binning, EnsembleSpec,
    ScalingOptions, Statistic,
};
use riu_core::{Error, RngStream, StateFile, StateTensor};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;

/// Failure of a subcommand, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: unknown state, malformed file, incompatible options.
    Usage(String),
    /// The computation itself failed.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Numerical(format!("i/o: {e}"))
    }
}

type CliResult = Result<(), CliError>;

/// Writes to standard output; a closed pipe (for example `| head`) ends output quietly.
fn write_stdout(text: &str) -> CliResult {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => r.map_err(CliError::from),
    }
}

macro_rules! say {
    ($($arg:tt)*) => {
        write_stdout(&format!("{}\n", format_args!($($arg)*)))?
    };
}

pub fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Riu(a) => riu(a),
        Command::Entropy(a) => entropy(a),
        Command::Hosvd(a) => hosvd_cmd(a),
        Command::Parafac(a) => parafac(a),
        Command::Rank(a) => rank(a),
        Command::Tangle(a) => tangle_cmd(a),
        Command::Hyperdet(a) => hyperdet(a),
        Command::Moments(a) => moments(a),
        Command::Ensemble(a) => ensemble(a),
        Command::Table(a) => table(a),
        Command::Scaling(a) => scaling(a),
        Command::SchmidtBound(a) => schmidt(a),
        Command::Catalog(a) => catalog(a),
    }
}

fn load_state(src: &StateArgs) -> Result<(String, StateTensor), CliError> {
    match (&src.state, &src.state_file) {
        (Some(name), None) => Ok((name.clone(), named_state(name)?)),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let t = StateFile::from_json(&text)?.into_tensor(true)?;
            Ok((path.display().to_string(), t))
        }
        _ => Err(CliError::Usage("give exactly one of --state and --state-file".into())),
    }
}

fn log_seed(seed: u64) {
    info!("seed {seed} (rerun with --seed {seed} or {SEED_ENV}={seed} to reproduce)");
}

fn open_out(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))
}

fn emit_json<T: Serialize>(value: &T, out: &OutArgs) -> CliResult {
    write_json(value, out.out.as_deref())
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    match path {
        Some(p) => {
            let mut w = open_out(p)?;
            writeln!(w, "{text}")?;
            w.flush()?;
            info!("wrote {}", p.display());
        }
        None => say!("{text}"),
    }
    Ok(())
}

fn riu(a: RiuArgs) -> CliResult {
    let (name, c) = load_state(&a.state)?;
    if a.symmetric {
        let (value, p) = riu_symmetric(&c, a.q)?;
        return emit_json(&json!({ "state": name, "q": a.q, "value": value, "p": p, "method": "symmetric" }), &a.out);
    }
    log_seed(a.seed.seed);
    let opts = RiuOptions { restarts: a.restarts, steps: a.steps, stream: RngStream::new(a.seed.seed, 0), ..RiuOptions::default() };
    let res = riu_minimize(&c, a.q, &opts)?;
    let mut v = serde_json::to_value(&res).map_err(|e| CliError::Numerical(e.to_string()))?;
    v["state"] = json!(name);
    v["seed"] = json!(a.seed.seed);
    emit_json(&v, &a.out)
}

fn entropy(a: EntropyArgs) -> CliResult {
    let (name, c) = load_state(&a.state)?;
    let value = renyi(&c.prob_vector()?, a.q);
    emit_json(&json!({ "state": name, "q": a.q, "value": value }), &a.out)
}

fn hosvd_cmd(a: StateOut) -> CliResult {
    let (name, c) = load_state(&a.state)?;
    let h = hosvd(&c)?;
    emit_json(
        &json!({
            "state": name,
            "kmode_singular_values": h.kmode_sv,
            "factors": h.factors,
            "core": StateFile::from(&h.core),
        }),
        &a.out,
    )
}

fn parafac(a: ParafacArgs) -> CliResult {
    let (name, c) = load_state(&a.state)?;
    log_seed(a.seed.seed);
    let opts = AlsOptions {
        max_iters: a.max_iters,
        tol: a.tol,
        restarts: a.restarts,
        hosvd_start: true,
        stream: RngStream::new(a.seed.seed, 0),
    };
    let model = parafac_als(&c, a.rank, &opts)?;
    let mut v = serde_json::to_value(&model).map_err(|e| CliError::Numerical(e.to_string()))?;
    v["state"] = json!(name);
    v["seed"] = json!(a.seed.seed);
    emit_json(&v, &a.out)
}

fn rank(a: RankArgs) -> CliResult {
    let (name, c) = load_state(&a.state)?;
    log_seed(a.seed.seed);
    let r = rank_estimate(&c, a.tol, RngStream::new(a.seed.seed, 0))?;
    emit_json(
        &json!({ "state": name, "rank": r.rank, "residual": r.residual, "capped": r.capped, "seed": a.seed.seed }),
        &a.out,
    )
}

fn tangle_cmd(a: StateOut) -> CliResult {
    let (name, c) = load_state(&a.state)?;
    let d = det3(&c)?;
    emit_json(
        &json!({ "state": name, "invariant": "3-tangle", "value": tangle(&c)?, "det3": [d.re, d.im] }),
        &a.out,
    )
}

fn hyperdet(a: StateOut) -> CliResult {
    let (name, c) = load_state(&a.state)?;
    let d = det4(&c)?;
    emit_json(&json!({ "state": name, "invariant": "T", "value": hyper_t(&c)?, "det4": [d.re, d.im] }), &a.out)
}

fn moments(a: MomentsArgs) -> CliResult {
    let exact = tangle_even_moment(a.k)?;
    let decimal = ratio_to_f64(&exact);
    if a.exact {
        let text = format!("{exact}\n{decimal}\n");
        match &a.out.out {
            Some(p) => {
                let mut w = open_out(p)?;
                w.write_all(text.as_bytes())?;
                w.flush()?;
            }
            None => write_stdout(&text)?,
        }
        return Ok(());
    }
    let ratio = |(n, d): (i64, i64)| riu_core::moments::BigRational::new(n.into(), d.into());
    let model = beta_moment(&ratio(TAU_ALPHA), &ratio(TAU_BETA), 2 * a.k);
    emit_json(
        &json!({
            "k": a.k,
            "moment": format!("<tau^{}>", 2 * a.k),
            "exact": exact.to_string(),
            "decimal": decimal,
            "beta_model": model.to_string(),
            "beta_model_decimal": ratio_to_f64(&model),
        }),
        &a.out,
    )
}

fn binning(bins: Option<usize>) -> Binning {
    bins.map_or(Binning::FreedmanDiaconis, Binning::Fixed)
}

fn ensemble(a: EnsembleArgs) -> CliResult {
    log_seed(a.seed.seed);
    if a.beta_fit.is_some() && a.stat != Statistic::Tangle {
        return Err(CliError::Usage("--beta-fit needs --stat tangle".into()));
    }
    let spec = EnsembleSpec {
        binning: binning(a.bins),
        riu: RiuOptions { restarts: a.restarts, steps: a.steps, ..table_riu_options() },
        ..EnsembleSpec::new(a.n, a.d, a.stat, a.q, a.samples, a.seed.seed)
    };
    let report = ensemble_stat(&spec)?;
    say!(
        "{} n={} d={} q={} samples={} mean={:.6e} second_moment={:.6e} std={:.6e} seed={}",
        report.statistic,
        report.n,
        report.d,
        report.q.map_or("-".to_string(), |q| q.to_string()),
        report.samples,
        report.mean,
        report.second_moment,
        report.std,
        report.seed
    );
    if let Some(p) = &a.out {
        let mut w = open_out(p)?;
        write_histogram_csv(&report.histogram, &mut w)?;
        w.flush()?;
        info!("wrote {}", p.display());
    }
    if let Some(p) = &a.report {
        write_json(&report, Some(p))?;
    }
    if let Some(p) = &a.beta_fit {
        let taus = ensemble_values(&spec)?;
        let fit = beta_fit_report(&taus, spec.binning)?;
        say!("beta fit alpha={:.4} beta={:.4} (model 31/17, 62/17)", fit.alpha_hat, fit.beta_hat);
        write_json(&fit, Some(p))?;
    }
    Ok(())
}

fn table(a: TableArgs) -> CliResult {
    log_seed(a.seed.seed);
    let qs = if a.q.is_empty() { table_orders() } else { a.q.clone() };
    let riu = RiuOptions { restarts: a.restarts, steps: a.steps, ..table_riu_options() };
    let t = riu_table(a.n, a.d, &qs, a.samples, &riu, a.seed.seed, binning(a.bins))?;
    say!("q        raw_mean  hosvd_mean  riu_mean   (n={}, d={}, samples={}, seed={})", t.n, t.d, t.samples, t.seed);
    for r in &t.rows {
        say!("{:<8} {:<9.4} {:<11.4} {:<9.4}", r.q.to_string(), r.raw.mean, r.hosvd.mean, r.riu.mean);
    }
    if t.ordering_violations > 0 {
        log::warn!("{} samples have an RIU value above the raw or HOSVD value", t.ordering_violations);
    }
    if let Some(p) = &a.out {
        let mut w = open_out(p)?;
        write_table_csv(&t, &mut w)?;
        w.flush()?;
        info!("wrote {}", p.display());
    }
    if let Some(p) = &a.report {
        write_json(&t, Some(p))?;
    }
    Ok(())
}

fn scaling(a: ScalingArgs) -> CliResult {
    log_seed(a.seed.seed);
    let opts = ScalingOptions {
        dmin: a.dmin,
        dmax: a.dmax,
        samples: a.samples,
        lu_max_d: a.lu_max_d,
        seed: a.seed.seed,
        ..ScalingOptions::default()
    };
    let r = scaling_study(&opts)?;
    say!("d   lambda_max  H_N/N     lambda_H   lambda_P   lambda_LU  schmidt");
    for rec in &r.records {
        let lu = rec.lambda_lu.map_or("-".to_string(), |m| format!("{:.5}", m.mean));
        say!(
            "{:<3} {:<11.5} {:<9.5} {:<10.5} {:<10.5} {:<10} {:.5}",
            rec.d, rec.lambda_max.mean, rec.harmonic_anchor, rec.lambda_h.mean, rec.lambda_p.mean, lu, rec.schmidt.mean
        );
    }
    for (label, fit) in [("lambda_H", r.fit_lambda_h), ("lambda_P", r.fit_lambda_p), ("schmidt", r.fit_schmidt)] {
        if let Some(f) = fit {
            say!("slope {label}: {:.3} +- {:.3}", f.slope, f.slope_se);
        }
    }
    if let Some(p) = &a.out {
        let mut w = open_out(p)?;
        write_scaling_csv(&r, &mut w)?;
        w.flush()?;
        info!("wrote {}", p.display());
    }
    if let Some(p) = &a.report {
        write_json(&r, Some(p))?;
    }
    Ok(())
}

fn schmidt(a: SchmidtArgs) -> CliResult {
    let (name, c) = load_state(&a.state)?;
    let bound = schmidt_bound(&c)?;
    let mut v: Value = json!({ "state": name, "value": bound });
    if a.overlap {
        log_seed(a.seed.seed);
        let stream = RngStream::new(a.seed.seed, 0);
        let opts = RiuOptions { stream, ..RiuOptions::default() };
        let als = AlsOptions { stream: stream.child(1), ..AlsOptions::default() };
        let sep = lambda_max_sep(&c, &opts, &als)?;
        v["lambda_max_sep"] = json!(sep.lambda_max);
        v["lambda_parafac"] = json!(sep.lambda_parafac);
        v["seed"] = json!(a.seed.seed);
    }
    emit_json(&v, &a.out)
}

fn catalog(a: CatalogArgs) -> CliResult {
    if let Some(name) = &a.export {
        let t = named_state(name)?;
        return write_json(&StateFile::from(&t), a.out.out.as_deref());
    }
    let entries: Vec<Value> = CATALOG
        .iter()
        .map(|s| json!({ "name": s.name, "dims": vec![2; s.qubits], "description": s.description }))
        .collect();
    if let Some(p) = &a.out.out {
        return write_json(&entries, Some(p));
    }
    for s in CATALOG {
        say!("{:<8} {:?}  {}", s.name, vec![2; s.qubits], s.description);
    }
    say!("D(n,k)   [2; n]  Dicke state with k excitations");
    Ok(())
}
