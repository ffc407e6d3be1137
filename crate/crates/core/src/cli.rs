//! Matrix files, report schemas and the `permbound` command line.

use crate::bounds::{extract_rank1, gurvits_estimate, gurvits_estimate_par, marcus_bounds, ExtractOptions, McEstimate, TOL_CERT};
use crate::error::{Error, Result};
use crate::matrix::{admit_hermitian_psd, cholesky_factor, eigh, CMatrix, HermitianMatrix, TOL_CHOL, TOL_EIG, TOL_PSD};
use crate::permanent::{per_naive, per_psd_log, per_tensor, LogNonneg, RYSER_MAX_N};
use crate::relax::{rel_solve, SolverOptions};
use crate::tight::{ratio_experiment, RatioConfig, RatioRow};
use crate::EULER_GAMMA;
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const SEED_ENV: &str = "PERMBOUND_SEED";
pub const DEFAULT_SEED: u64 = 0;
pub const RATIO_CSV_HEADER: &str = "n,d,k,seed,log_rel,log_per,per_method,ratio_root,std_err_rel";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
}

/// On-disk matrix: `entries[i][j] = [re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<MatrixMetadata>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix, metadata: Option<MatrixMetadata>) -> Self {
        let entries = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        MatrixFile { n: m.nrows(), entries, metadata }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.n == 0 {
            return Err(Error::Parse("n must be positive".into()));
        }
        if self.entries.len() != self.n {
            return Err(Error::Parse(format!("expected {} rows, found {}", self.n, self.entries.len())));
        }
        let mut m = CMatrix::zeros(self.n, self.n);
        for (i, row) in self.entries.iter().enumerate() {
            if row.len() != self.n {
                return Err(Error::Parse(format!("row {i} has {} entries, expected {}", row.len(), self.n)));
            }
            for (j, &[re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        Ok(m)
    }

    /// Pretty JSON; floats use shortest round-trip form, so values reload exactly.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix file serializes")
    }
}

pub fn parse_matrix_str(text: &str) -> Result<HermitianMatrix> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    admit_hermitian_psd(file.to_matrix()?, TOL_PSD)
}

pub fn parse_matrix(path: &Path) -> Result<HermitianMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_matrix_str(&text)
}

/// SHA-256 over `n` and the admitted entries as little-endian doubles.
pub fn matrix_digest(a: &HermitianMatrix) -> String {
    let mut h = Sha256::new();
    h.update((a.n() as u64).to_le_bytes());
    for i in 0..a.n() {
        for j in 0..a.n() {
            h.update(a[(i, j)].re.to_le_bytes());
            h.update(a[(i, j)].im.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// A permanent-like quantity: natural log (null for zero) plus a linear courtesy string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogReport {
    pub log: Option<f64>,
    pub approx: Option<String>,
}

impl From<LogNonneg> for LogReport {
    fn from(v: LogNonneg) -> Self {
        LogReport { log: (!v.is_zero).then_some(v.log_value), approx: v.approx_string() }
    }
}

impl LogReport {
    pub fn ln(&self) -> f64 {
        self.log.unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_psd: f64,
    pub tol_chol: f64,
    pub tol_eig: f64,
    pub tol_opt: f64,
    pub tol_feas: f64,
    pub eig_tol: f64,
    pub tol_cert: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orderings {
    pub marcus_lo_le_rel: bool,
    pub cert_le_rel: Option<bool>,
    pub marcus_lo_le_per: Option<bool>,
    pub per_le_marcus_hi: Option<bool>,
    pub cert_le_per: Option<bool>,
    pub per_le_rel: Option<bool>,
    pub all_hold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub input_digest: String,
    pub n: usize,
    pub rank: usize,
    pub log_rel: LogReport,
    pub rel_gap_bound: f64,
    pub log_per_exact: Option<LogReport>,
    pub log_lower_cert: Option<LogReport>,
    pub cert_margin: Option<f64>,
    pub log_marcus_lo: LogReport,
    pub log_marcus_hi: LogReport,
    pub mc_estimate: Option<McEstimate>,
    pub gap_per_n: Option<f64>,
    pub guarantee_per_n: f64,
    pub orderings: Orderings,
    pub tolerances: Tolerances,
    pub seed: u64,
}

const ORDER_SLACK: f64 = 1e-6;

fn le(a: f64, b: f64) -> bool {
    a == f64::NEG_INFINITY || a <= b + ORDER_SLACK
}

#[derive(Debug, Clone, Copy)]
pub struct BoundsConfig {
    pub seed: u64,
    pub mc_samples: u64,
    pub solver: SolverOptions,
    pub extract: ExtractOptions,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig { seed: DEFAULT_SEED, mc_samples: 10_000, solver: SolverOptions::default(), extract: ExtractOptions::default() }
    }
}

/// Every bound the matrix size permits.
pub fn bound_report(a: &HermitianMatrix, cfg: &BoundsConfig) -> Result<BoundReport> {
    let n = a.n();
    let factor = cholesky_factor(a, TOL_CHOL);
    let sol = rel_solve(a, &cfg.solver)?;
    let extract = ExtractOptions { seed: cfg.seed, ..cfg.extract };
    let cert = extract_rank1(a, &sol, &extract)?;
    let per = if n <= RYSER_MAX_N { Some(per_psd_log(a)?) } else { None };
    let (lo, hi) = marcus_bounds(a);
    let mc = if cfg.mc_samples >= 2 && factor.rank() > 0 {
        Some(gurvits_estimate(&factor, cfg.mc_samples, cfg.seed)?)
    } else {
        None
    };
    let (rel, lower) = (sol.rel().ln(), cert.log_lower.ln());
    let gap_per_n = (rel.is_finite() && lower.is_finite()).then(|| ((rel - lower) / n as f64 * 1e6).round() / 1e6);

    let per_ln = per.map(|p| p.ln());
    let orderings = {
        let marcus_lo_le_rel = le(lo.ln(), rel);
        let cert_le_rel = Some(le(lower, rel));
        let marcus_lo_le_per = per_ln.map(|p| le(lo.ln(), p));
        let per_le_marcus_hi = per_ln.map(|p| le(p, hi.ln()));
        let cert_le_per = per_ln.map(|p| le(lower, p));
        let per_le_rel = per_ln.map(|p| le(p, rel));
        let all_hold = marcus_lo_le_rel
            && [cert_le_rel, marcus_lo_le_per, per_le_marcus_hi, cert_le_per, per_le_rel]
                .iter()
                .all(|o| o.unwrap_or(true));
        Orderings { marcus_lo_le_rel, cert_le_rel, marcus_lo_le_per, per_le_marcus_hi, cert_le_per, per_le_rel, all_hold }
    };
    Ok(BoundReport {
        input_digest: matrix_digest(a),
        n,
        rank: factor.rank(),
        log_rel: sol.rel().into(),
        rel_gap_bound: sol.gap_bound,
        log_per_exact: per.map(Into::into),
        log_lower_cert: Some(cert.log_lower.into()),
        cert_margin: Some(cert.loewner_margin),
        log_marcus_lo: lo.into(),
        log_marcus_hi: hi.into(),
        mc_estimate: mc,
        gap_per_n,
        guarantee_per_n: EULER_GAMMA + 1.0,
        orderings,
        tolerances: Tolerances {
            tol_psd: TOL_PSD,
            tol_chol: TOL_CHOL,
            tol_eig: TOL_EIG,
            tol_opt: cfg.solver.tol_opt,
            tol_feas: cfg.solver.tol_feas,
            eig_tol: cfg.extract.eig_tol,
            tol_cert: TOL_CERT,
        },
        seed: cfg.seed,
    })
}

/// `printf("%.12g")`.
pub fn format_g12(x: f64) -> String {
    const SIG: i32 = 12;
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    fn trim(s: &str) -> &str {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.')
        } else {
            s
        }
    }
    if !(-4..SIG).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        let fixed = format!("{:.*}", (SIG - 1 - exp) as usize, x);
        trim(&fixed).to_string()
    }
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(num) => {
            if let Some(i) = num.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = num.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&format_g12(num.as_f64().expect("finite number")));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let sorted: BTreeMap<&String, &Value> = map.iter().collect();
            out.push('{');
            for (i, (k, item)) in sorted.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push(':');
                write_canonical(item, out);
            }
            out.push('}');
        }
    }
}

/// Sorted keys, compact separators, floats as `%.12g`, non-finite floats as null.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report serializes");
    let mut out = String::new();
    write_canonical(&v, &mut out);
    out.push('\n');
    out
}

fn csv_field(v: Option<f64>) -> String {
    v.map(format_g12).unwrap_or_default()
}

fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format_g12(x)
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn rows_to_csv(rows: &[RatioRow]) -> String {
    let mut out = String::from(RATIO_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.d,
            r.k,
            r.seed,
            csv_float(r.log_rel),
            csv_float(r.log_per),
            r.per_method.as_str(),
            csv_float(r.ratio_root),
            csv_field(r.std_err_rel)
        ));
    }
    out
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            let sorted: BTreeMap<&String, &Value> = map.iter().collect();
            for (k, item) in sorted {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, item, out);
            }
        }
        Value::Array(_) => {}
        other => {
            let mut s = String::new();
            write_canonical(other, &mut s);
            out.push((prefix.to_string(), s.trim_matches('"').to_string()));
        }
    }
}

/// Header row of flattened scalar keys and a single value row; arrays are omitted.
pub fn report_to_csv<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report serializes");
    let mut pairs = Vec::new();
    flatten("", &v, &mut pairs);
    let header: Vec<&str> = pairs.iter().map(|(k, _)| k.as_str()).collect();
    let values: Vec<String> =
        pairs.iter().map(|(_, v)| if v.contains(',') { format!("\"{v}\"") } else { v.clone() }).collect();
    format!("{}\n{}\n", header.join(","), values.join(","))
}

fn text_lines(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                text_lines(&key, item, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object()) => {
            let mut s = String::new();
            write_canonical(v, &mut s);
            out.push_str(&format!("{prefix}: {s}\n"));
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                text_lines(&format!("{prefix}[{i}]"), item, out);
            }
        }
        Value::String(s) => out.push_str(&format!("{prefix}: {s}\n")),
        other => {
            let mut s = String::new();
            write_canonical(other, &mut s);
            out.push_str(&format!("{prefix}: {s}\n"));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Serializes a single report.
pub fn emit_report<T: Serialize>(report: &T, format: Format) -> String {
    match format {
        Format::Json => canonical_json(report),
        Format::Csv => report_to_csv(report),
        Format::Text => {
            let mut out = String::new();
            text_lines("", &serde_json::to_value(report).expect("report serializes"), &mut out);
            out
        }
    }
}

pub fn emit_rows(rows: &[RatioRow], format: Format) -> String {
    match format {
        Format::Json => canonical_json(&rows),
        Format::Csv => rows_to_csv(rows),
        Format::Text => {
            let mut out = format!("{:>4} {:>3} {:>3} {:>8} {:>14} {:>14} {:>6} {:>10}\n", "n", "d", "k", "seed", "log_rel", "log_per", "method", "ratio");
            for r in rows {
                out.push_str(&format!(
                    "{:>4} {:>3} {:>3} {:>8} {:>14.8} {:>14.8} {:>6} {:>10.6}\n",
                    r.n, r.d, r.k, r.seed, r.log_rel, r.log_per, r.per_method.as_str(), r.ratio_root
                ));
            }
            out
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "permbound", version, about = "Bounds and estimates for permanents of PSD matrices")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PerMethodArg {
    Naive,
    Ryser,
    Tensor,
    Auto,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a matrix file and print its spectrum extremes.
    Check { file: PathBuf },
    /// Exact permanent (size-gated).
    Per {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: PerMethodArg,
    },
    /// Solve the diagonal relaxation.
    Rel {
        file: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_stages: Option<usize>,
    },
    /// Rank-one lower-bound certificate.
    Lower {
        file: PathBuf,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Monte-Carlo permanent estimate.
    Estimate {
        file: PathBuf,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Every bound the size permits.
    Bounds {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        mc_samples: u64,
    },
    /// Ratio experiment on tight instances.
    Tight {
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 100_000)]
        samples_mc: u64,
        #[arg(long, default_value_t = 14)]
        per_cutoff: usize,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Also write the rows as CSV to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve_seed(seed: Option<u64>) -> Result<u64> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::InvalidArgument(format!("{SEED_ENV}={v} is not a u64"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn lambda_extremes(a: &HermitianMatrix) -> Result<(f64, f64)> {
    let s = eigh(a)?;
    Ok((s.min(), s.max()))
}

fn execute(command: Command, format: Format) -> Result<String> {
    match command {
        Command::Check { file } => {
            let a = parse_matrix(&file)?;
            let (lo, hi) = lambda_extremes(&a)?;
            let rank = cholesky_factor(&a, TOL_CHOL).rank();
            let report = json!({
                "admitted": true,
                "n": a.n(),
                "rank": rank,
                "lambda_min": lo,
                "lambda_max": hi,
                "input_digest": matrix_digest(&a),
            });
            Ok(emit_report(&report, format))
        }
        Command::Per { file, method } => {
            let a = parse_matrix(&file)?;
            let (value, name) = match method {
                PerMethodArg::Auto | PerMethodArg::Ryser => (per_psd_log(&a)?, "ryser"),
                PerMethodArg::Naive => (real_log(per_naive(a.as_matrix())?)?, "naive"),
                PerMethodArg::Tensor => (real_log(per_tensor(a.as_matrix())?)?, "tensor"),
            };
            let report = json!({
                "n": a.n(),
                "method": name,
                "log_per": LogReport::from(value),
            });
            Ok(emit_report(&report, format))
        }
        Command::Rel { file, tol, max_stages } => {
            let a = parse_matrix(&file)?;
            let mut opts = SolverOptions::default();
            if let Some(t) = tol {
                opts.tol_opt = t;
            }
            if let Some(s) = max_stages {
                opts.max_stages = s;
            }
            let sol = rel_solve(&a, &opts)?;
            let report = json!({
                "n": a.n(),
                "rank": sol.rank,
                "log_rel": LogReport::from(sol.rel()),
                "x": sol.x,
                "feas_margin": sol.feas_margin,
                "gap_bound": sol.gap_bound,
                "stages": sol.stages.len(),
                "newton_steps": sol.newton_steps(),
                "tol_opt": opts.tol_opt,
            });
            Ok(emit_report(&report, format))
        }
        Command::Lower { file, samples, seed } => {
            let a = parse_matrix(&file)?;
            let seed = resolve_seed(seed)?;
            let sol = rel_solve(&a, &SolverOptions::default())?;
            let opts = ExtractOptions { n_samples: samples, seed, ..Default::default() };
            let cert = extract_rank1(&a, &sol, &opts)?;
            let (rel, lower) = (sol.rel().ln(), cert.log_lower.ln());
            let gap = (rel.is_finite() && lower.is_finite()).then(|| ((rel - lower) / a.n() as f64 * 1e6).round() / 1e6);
            let w: Vec<[f64; 2]> = cert.w.coords().iter().map(|z| [z.re, z.im]).collect();
            let report = json!({
                "n": a.n(),
                "log_lower": LogReport::from(cert.log_lower),
                "log_rel": LogReport::from(sol.rel()),
                "loewner_margin": cert.loewner_margin,
                "eigenspace_dim": cert.eigenspace_dim,
                "eig_tol": cert.eig_tol_used,
                "gap_per_n": gap,
                "guarantee_per_n": EULER_GAMMA + 1.0,
                "seed": seed,
                "samples": samples,
                "w": w,
            });
            Ok(emit_report(&report, format))
        }
        Command::Estimate { file, samples, seed, parallel } => {
            let a = parse_matrix(&file)?;
            let seed = resolve_seed(seed)?;
            let factor = cholesky_factor(&a, TOL_CHOL);
            let est = if parallel > 1 {
                gurvits_estimate_par(&factor, samples, seed, parallel)?
            } else {
                gurvits_estimate(&factor, samples, seed)?
            };
            let report = json!({
                "n": a.n(),
                "mean_log": est.mean_log,
                "approx": LogNonneg::from_log(est.mean_log).approx_string(),
                "std_err_rel": est.std_err_rel,
                "samples": est.samples,
                "seed": est.seed,
            });
            Ok(emit_report(&report, format))
        }
        Command::Bounds { file, seed, mc_samples } => {
            let a = parse_matrix(&file)?;
            let cfg = BoundsConfig { seed: resolve_seed(seed)?, mc_samples, ..Default::default() };
            Ok(emit_report(&bound_report(&a, &cfg)?, format))
        }
        Command::Tight { d, n, k, seeds, samples_mc, per_cutoff, parallel, out } => {
            let seeds = if seeds.is_empty() { vec![resolve_seed(None)?] } else { seeds };
            let config = RatioConfig {
                d_list: d,
                n_list: n,
                k_list: k,
                seeds,
                samples_mc,
                per_cutoff_n: per_cutoff,
                parallel,
            };
            let rows = ratio_experiment(&config)?;
            if let Some(path) = out {
                std::fs::write(&path, rows_to_csv(&rows))
                    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
            }
            Ok(emit_rows(&rows, format))
        }
    }
}

fn real_log(z: Complex64) -> Result<LogNonneg> {
    if z.re < -1e-9 * z.norm().max(1.0) {
        return Err(Error::NegativeResult { value: z.re });
    }
    Ok(LogNonneg::from_linear(z.re.max(0.0)))
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse(_) | Error::NotSquare { .. } | Error::Empty => "ParseError",
        Error::NotHermitian { .. } | Error::NotPsd { .. } | Error::NonFinite { .. } => "ValidationError",
        Error::TooLarge { .. } => "TooLarge",
        Error::StageLimit { .. } => "StageLimit",
        Error::NewtonFailure { .. } => "NewtonFailure",
        Error::EmptyEigenspace { .. } => "EmptyEigenspace",
        Error::DegenerateSamples => "DegenerateSamples",
        _ => "Error",
    }
}

/// Runs the command line; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(rendered.as_bytes()) } else { stderr.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, cli.format) {
        Ok(text) => {
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let code = e.exit_code();
            let _ = writeln!(stderr, "permbound: {e}");
            if cli.format == Format::Json {
                let body = json!({ "error": error_kind(&e), "message": e.to_string(), "exit_code": code });
                let _ = stdout.write_all(canonical_json(&body).as_bytes());
            }
            code
        }
    }
}
