//! Command-line front end: dataset ingestion, flat-file configuration, the
//! `fit`/`select`/`risk`/`simulate` subcommands, and report emission.
//!
//! All outputs are plain delimited text with documented headers, written
//! with Rust's shortest-round-trip float formatting so files reload
//! bit-exactly and reruns with identical inputs produce byte-identical
//! artifacts. Configuration is a flat `key = value` file with `#` comments;
//! unknown keys are hard errors because a silently ignored typo in a prior
//! setting corrupts the analysis.
//!
//! Subcommand sketch:
//! - `fit`: ingest losses, run one Gibbs chain, write `summary.csv`,
//!   `draws.csv` (with chain metadata in leading comments), and
//!   `fit_report.txt` (ingestion and acceptance accounting).
//! - `select`: fit one chain per candidate Weibull shape and write the
//!   LPML table `lpml.csv` with the winner flagged.
//! - `risk`: reload a draws file, simulate the posterior predictive at a
//!   site, and write `risk.csv` (VaR/ES/TVaR per level).
//! - `simulate`: run a replicated synthetic-data study and write
//!   `sim_metrics.csv`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};

use crate::diagnostics::{lpml_grid, posterior_summary};
use crate::error::{Error, Result};
use crate::model::{run_chain, ChainMeta, Dataset, Hyperparams, PosteriorDraws};
use crate::risk::{compute_risk_report, PredictiveQuery};
use crate::rng::rng_from_seed;
use crate::simstudy::{run_study, LatentLaw, SimDesign};
use crate::spatial::{CoordMode, LocationSet};

/// Bayesian spatial Weibull regression for positive losses.
#[derive(Debug, Parser)]
#[command(name = "spatweib", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// The four operations the tool performs.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one chain and write posterior summaries and draws.
    Fit(FitArgs),
    /// Score a grid of Weibull shapes by LPML and flag the best.
    Select(SelectArgs),
    /// Compute predictive risk measures from a saved draws file.
    Risk(RiskArgs),
    /// Run a replicated simulation study.
    Simulate(SimulateArgs),
}

/// Arguments of `fit`.
#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input loss records (CSV; see the documented schema).
    #[arg(long)]
    pub data: PathBuf,
    /// Configuration file (flat key = value text).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (created if absent).
    #[arg(long)]
    pub out: PathBuf,
    /// Seed override (wins over the config file).
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Arguments of `select` (same surface as `fit`).
#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Input loss records (CSV).
    #[arg(long)]
    pub data: PathBuf,
    /// Configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed override.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Arguments of `risk`: `--data` points at a draws file written by `fit`.
#[derive(Debug, Args)]
pub struct RiskArgs {
    /// Draws file produced by `fit` (draws.csv).
    #[arg(long)]
    pub data: PathBuf,
    /// Configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed override.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Arguments of `simulate` (no input data; the design comes from config).
#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Configuration file describing the design.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed override.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Execute a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(a) => cmd_fit(&a),
        Command::Select(a) => cmd_select(&a),
        Command::Risk(a) => cmd_risk(&a),
        Command::Simulate(a) => cmd_simulate(&a),
    }
}

/// Process exit code for an error: 2 config/validation, 3 ingestion,
/// 4 numerical, 5 I/O.
pub fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Invalid(_) => 2,
        Error::Ingest { .. } => 3,
        Error::Numerical(_) | Error::Factorization { .. } => 4,
        Error::Io(_) => 5,
    }
}

// ---------------------------------------------------------------------------
// Configuration files
// ---------------------------------------------------------------------------

/// Parsed `key = value` configuration with per-key line numbers.
struct ConfigMap {
    values: BTreeMap<String, (usize, String)>,
}

impl ConfigMap {
    fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(h) => &raw[..h],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(format!(
                    "config line {line_no}: expected key = value, got {line:?}"
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::config(format!("config line {line_no}: empty key")));
            }
            if values.insert(key.clone(), (line_no, value)).is_some() {
                return Err(Error::config(format!(
                    "config line {line_no}: duplicate key {key}"
                )));
            }
        }
        Ok(Self { values })
    }

    fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::parse(&fs::read_to_string(p)?),
            None => Ok(Self { values: BTreeMap::new() }),
        }
    }

    /// Reject keys outside the allowed set — a typo in a prior setting must
    /// not be silently ignored.
    fn restrict(&self, allowed: &[&str]) -> Result<()> {
        let unknown: Vec<&str> = self
            .values
            .keys()
            .map(String::as_str)
            .filter(|k| !allowed.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::config(format!(
                "unknown config key(s): {}; allowed: {}",
                unknown.join(", "),
                allowed.join(", ")
            )))
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(_, v)| v.as_str())
    }

    fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::config(format!("config key {key}: not a number: {v:?}"))),
        }
    }

    fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::config(format!("config key {key}: not an integer: {v:?}"))),
        }
    }

    fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.get_u64(key, default as u64)? as usize)
    }

    fn get_bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(Error::config(format!(
                "config key {key}: expected true or false, got {v:?}"
            ))),
        }
    }

    fn get_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|part| {
                    part.trim().parse::<f64>().map_err(|_| {
                        Error::config(format!("config key {key}: not a number: {:?}", part.trim()))
                    })
                })
                .collect(),
        }
    }
}

/// Chain settings shared by `fit` and `select`.
struct ChainConfig {
    hyper: Hyperparams,
    intercept: bool,
    n_iter: usize,
    n_burn: usize,
    seed: u64,
}

const CHAIN_KEYS: &[&str] = &[
    "seed",
    "intercept",
    "alpha_beta",
    "kappa_beta",
    "alpha_w",
    "kappa_w",
    "phi_grid",
    "mh_step_sigma",
    "mh_step_sigma_w",
    "n_iter",
    "n_burn",
];

fn chain_config(cfg: &ConfigMap, k: f64, seed_flag: Option<u64>) -> Result<ChainConfig> {
    let mut hyper = Hyperparams::new(k);
    hyper.alpha_beta = cfg.get_f64("alpha_beta", hyper.alpha_beta)?;
    hyper.kappa_beta = cfg.get_f64("kappa_beta", hyper.kappa_beta)?;
    hyper.alpha_w = cfg.get_f64("alpha_w", hyper.alpha_w)?;
    hyper.kappa_w = cfg.get_f64("kappa_w", hyper.kappa_w)?;
    hyper.phi_grid = cfg.get_f64_list("phi_grid", &hyper.phi_grid.clone())?;
    hyper.mh_step_sigma = cfg.get_f64("mh_step_sigma", hyper.mh_step_sigma)?;
    hyper.mh_step_sigma_w = cfg.get_f64("mh_step_sigma_w", hyper.mh_step_sigma_w)?;
    hyper.validate()?;
    let n_iter = cfg.get_usize("n_iter", 5000)?;
    let n_burn = cfg.get_usize("n_burn", 2000)?;
    let seed = match seed_flag {
        Some(s) => s,
        None => cfg.get_u64("seed", 0)?,
    };
    Ok(ChainConfig {
        hyper,
        intercept: cfg.get_bool("intercept", false)?,
        n_iter,
        n_burn,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Dataset ingestion
// ---------------------------------------------------------------------------

/// One row dropped during ingestion, with the reason.
#[derive(Clone, Debug)]
pub struct RejectedRow {
    /// 1-based line number in the input file.
    pub line: usize,
    /// The record's id field.
    pub id: String,
    /// Human-readable reason.
    pub reason: String,
}

/// Ingestion accounting: what was read and what was dropped.
#[derive(Clone, Debug)]
pub struct IngestReport {
    /// Data rows read (excluding the header).
    pub rows_read: usize,
    /// Rows rejected (currently: non-positive losses).
    pub rejected: Vec<RejectedRow>,
}

const EXPECTED_HEADER: &str = "id,lon,lat,magnitude,urban,in_region,loss";

/// Read a loss-record CSV into a [`Dataset`].
///
/// The file must carry the exact header
/// `id,lon,lat,magnitude,urban,in_region,loss`. Covariates become
/// `[magnitude, urban, in_region]`, with a leading intercept column when
/// requested. Malformed rows (wrong field count, unparseable numbers,
/// non-binary indicators) abort with the offending line number; rows with
/// `loss <= 0` are skipped and reported. Coordinates are geographic
/// (longitude/latitude in degrees) and must be distinct.
pub fn ingest(path: &Path, intercept: bool) -> Result<(Dataset, IngestReport)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(Error::ingest("empty data file"));
    };
    if header.trim() != EXPECTED_HEADER {
        return Err(Error::ingest(format!(
            "unexpected header {:?}; expected {EXPECTED_HEADER:?}",
            header.trim()
        )));
    }

    let mut coords = Vec::new();
    let mut xrows: Vec<[f64; 3]> = Vec::new();
    let mut losses = Vec::new();
    let mut rows_read = 0usize;
    let mut rejected = Vec::new();

    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        rows_read += 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(Error::ingest_at(
                line_no,
                format!("expected 7 fields, got {}", fields.len()),
            ));
        }
        let id = fields[0].to_string();
        let lon = parse_field(fields[1], "lon", line_no)?;
        let lat = parse_field(fields[2], "lat", line_no)?;
        let magnitude = parse_field(fields[3], "magnitude", line_no)?;
        let urban = parse_indicator(fields[4], "urban", line_no)?;
        let in_region = parse_indicator(fields[5], "in_region", line_no)?;
        let loss = parse_field(fields[6], "loss", line_no)?;
        if loss <= 0.0 {
            log::warn!("line {line_no} (id {id}): loss {loss} is not positive; row rejected");
            rejected.push(RejectedRow {
                line: line_no,
                id,
                reason: format!("loss {loss} is not positive"),
            });
            continue;
        }
        coords.push([lon, lat]);
        xrows.push([magnitude, urban, in_region]);
        losses.push(loss);
    }

    if losses.is_empty() {
        return Err(Error::ingest(format!(
            "no usable rows ({} read, {} rejected)",
            rows_read,
            rejected.len()
        )));
    }

    let locs = LocationSet::new(coords, CoordMode::LonLat)?;
    let n = losses.len();
    let p = if intercept { 4 } else { 3 };
    let x = DMatrix::from_fn(n, p, |i, j| {
        if intercept {
            if j == 0 {
                1.0
            } else {
                xrows[i][j - 1]
            }
        } else {
            xrows[i][j]
        }
    });
    let dataset = Dataset::new(locs, x, DVector::from_vec(losses))?;
    Ok((dataset, IngestReport { rows_read, rejected }))
}

fn parse_field(s: &str, name: &str, line: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::ingest_at(line, format!("field {name}: not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::ingest_at(line, format!("field {name}: not finite: {s:?}")));
    }
    Ok(v)
}

fn parse_indicator(s: &str, name: &str, line: usize) -> Result<f64> {
    match s {
        "0" => Ok(0.0),
        "1" => Ok(1.0),
        _ => Err(Error::ingest_at(
            line,
            format!("field {name}: expected 0 or 1, got {s:?}"),
        )),
    }
}

// ---------------------------------------------------------------------------
// Draws file round trip
// ---------------------------------------------------------------------------

/// Serialize draws with chain metadata in leading `#` comments, a header of
/// column labels, and one row per stored sweep.
pub fn write_draws(path: &Path, draws: &PosteriorDraws) -> Result<()> {
    let meta = draws.meta();
    let mut out = String::new();
    out.push_str(&format!("# n_iter={}\n", meta.n_iter));
    out.push_str(&format!("# n_burn={}\n", meta.n_burn));
    out.push_str(&format!("# seed={}\n", meta.seed));
    out.push_str(&format!("# k={}\n", meta.k));
    out.push_str(&format!("# acc_log_sigma={}\n", meta.acc_log_sigma));
    out.push_str(&format!("# acc_log_sigma_w={}\n", meta.acc_log_sigma_w));
    out.push_str(&format!("# p={}\n", draws.p()));
    out.push_str(&format!("# n={}\n", draws.n()));
    out.push_str(&draws.labels().join(","));
    out.push('\n');
    let m = draws.draws();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", m[(r, c)]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reload a draws file written by [`write_draws`] bit-exactly.
pub fn load_draws(path: &Path) -> Result<PosteriorDraws> {
    let text = fs::read_to_string(path)?;
    let mut meta_map: BTreeMap<String, String> = BTreeMap::new();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((_, line)) = lines.peek() {
        let Some(rest) = line.strip_prefix('#') else { break };
        if let Some((key, value)) = rest.trim().split_once('=') {
            meta_map.insert(key.trim().to_string(), value.trim().to_string());
        }
        lines.next();
    }
    let get = |key: &str| {
        meta_map
            .get(key)
            .ok_or_else(|| Error::ingest(format!("draws file missing # {key}= metadata")))
    };
    let parse_u = |key: &str| -> Result<usize> {
        get(key)?
            .parse()
            .map_err(|_| Error::ingest(format!("draws metadata {key}: not an integer")))
    };
    let parse_f = |key: &str| -> Result<f64> {
        get(key)?
            .parse()
            .map_err(|_| Error::ingest(format!("draws metadata {key}: not a number")))
    };
    let meta = ChainMeta {
        n_iter: parse_u("n_iter")?,
        n_burn: parse_u("n_burn")?,
        seed: get("seed")?
            .parse()
            .map_err(|_| Error::ingest("draws metadata seed: not an integer"))?,
        k: parse_f("k")?,
        acc_log_sigma: parse_f("acc_log_sigma")?,
        acc_log_sigma_w: parse_f("acc_log_sigma_w")?,
    };
    let p = parse_u("p")?;
    let n = parse_u("n")?;

    let Some((header_idx, header)) = lines.next() else {
        return Err(Error::ingest("draws file has no header row"));
    };
    let ncols = p + n + 3;
    if header.split(',').count() != ncols {
        return Err(Error::ingest_at(
            header_idx + 1,
            format!("draws header has {} columns, metadata implies {ncols}", header.split(',').count()),
        ));
    }

    let mut rows: Vec<f64> = Vec::new();
    let mut b = 0usize;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut count = 0;
        for part in line.split(',') {
            let v: f64 = part.trim().parse().map_err(|_| {
                Error::ingest_at(idx + 1, format!("not a number: {:?}", part.trim()))
            })?;
            rows.push(v);
            count += 1;
        }
        if count != ncols {
            return Err(Error::ingest_at(
                idx + 1,
                format!("expected {ncols} fields, got {count}"),
            ));
        }
        b += 1;
    }
    if b == 0 {
        return Err(Error::ingest("draws file contains no draws"));
    }
    let matrix = DMatrix::from_row_slice(b, ncols, &rows);
    PosteriorDraws::new(matrix, p, n, meta)
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn ensure_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn write_summary_csv(path: &Path, draws: &PosteriorDraws) -> Result<()> {
    let rows = posterior_summary(draws, 0.95)?;
    let mut out = String::from("name,mean,sd,hpd_lo,hpd_hi,eq_lo,eq_hi\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.name, r.mean, r.sd, r.hpd_lo, r.hpd_hi, r.eq_lo, r.eq_hi
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let mut keys = vec!["k"];
    keys.extend_from_slice(CHAIN_KEYS);
    cfg.restrict(&keys)?;
    let k = cfg.get_f64("k", 0.5)?;
    let cc = chain_config(&cfg, k, args.seed)?;

    let (data, report) = ingest(&args.data, cc.intercept)?;
    let draws = run_chain(&data, &cc.hyper, cc.n_iter, cc.n_burn, cc.seed)?;

    ensure_out_dir(&args.out)?;
    write_summary_csv(&args.out.join("summary.csv"), &draws)?;
    write_draws(&args.out.join("draws.csv"), &draws)?;

    let mut rep = String::new();
    rep.push_str(&format!("rows_read={}\n", report.rows_read));
    rep.push_str(&format!("rows_kept={}\n", data.n()));
    rep.push_str(&format!("rows_rejected={}\n", report.rejected.len()));
    for r in &report.rejected {
        rep.push_str(&format!("rejected: line={} id={} reason={}\n", r.line, r.id, r.reason));
    }
    rep.push_str(&format!("n={}\n", data.n()));
    rep.push_str(&format!("p={}\n", data.p()));
    rep.push_str(&format!("k={}\n", cc.hyper.k));
    rep.push_str(&format!("n_iter={}\n", cc.n_iter));
    rep.push_str(&format!("n_burn={}\n", cc.n_burn));
    rep.push_str(&format!("seed={}\n", cc.seed));
    rep.push_str(&format!("acc_log_sigma={}\n", draws.meta().acc_log_sigma));
    rep.push_str(&format!("acc_log_sigma_w={}\n", draws.meta().acc_log_sigma_w));
    fs::write(args.out.join("fit_report.txt"), rep)?;
    Ok(())
}

const DEFAULT_K_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn cmd_select(args: &SelectArgs) -> Result<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let mut keys = vec!["k_grid"];
    keys.extend_from_slice(CHAIN_KEYS);
    cfg.restrict(&keys)?;
    let k_grid = cfg.get_f64_list("k_grid", &DEFAULT_K_GRID)?;
    // The template shape is a placeholder; lpml_grid replaces it per row.
    let cc = chain_config(&cfg, 0.5, args.seed)?;

    let (data, _report) = ingest(&args.data, cc.intercept)?;
    let rows = lpml_grid(&data, &cc.hyper, &k_grid, cc.n_iter, cc.n_burn, cc.seed)?;

    ensure_out_dir(&args.out)?;
    let mut out = String::from("k,lpml,best,error\n");
    for r in &rows {
        let lpml = r.lpml.map(|l| format!("{l}")).unwrap_or_default();
        let err = r.error.as_deref().map(csv_quote).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", r.k, lpml, u8::from(r.best), err));
    }
    fs::write(args.out.join("lpml.csv"), out)?;
    Ok(())
}

fn cmd_risk(args: &RiskArgs) -> Result<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    cfg.restrict(&["seed", "site", "x_star", "levels", "n_pred_per_draw"])?;

    let draws = load_draws(&args.data)?;
    let site_1based = cfg.get_usize("site", 1)?;
    if site_1based == 0 {
        return Err(Error::config("site is 1-based and must be at least 1"));
    }
    let x_star = cfg.get_f64_list("x_star", &vec![0.0; draws.p()])?;
    let levels = cfg.get_f64_list("levels", &[0.90, 0.95, 0.99])?;
    let n_pred = cfg.get_usize("n_pred_per_draw", 100)?;
    let seed = match args.seed {
        Some(s) => s,
        None => cfg.get_u64("seed", 0)?,
    };

    let query = PredictiveQuery { x_star, site: site_1based - 1, n_pred_per_draw: n_pred };
    let mut rng = rng_from_seed(seed);
    let report = compute_risk_report(&draws, &query, draws.meta().k, &levels, &mut rng)?;

    ensure_out_dir(&args.out)?;
    let mut out = String::from("level,var,es,tvar\n");
    for i in 0..report.levels().len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            report.levels()[i],
            report.var()[i],
            report.es()[i],
            report.tvar()[i]
        ));
    }
    fs::write(args.out.join("risk.csv"), out)?;
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    cfg.restrict(&[
        "seed",
        "n",
        "k",
        "beta_true",
        "domain_side",
        "phi_true",
        "sigma_w_true",
        "w_law",
        "alpha_w",
        "kappa_w",
        "n_replicates",
        "n_iter",
        "n_burn",
    ])?;

    let mut design = SimDesign::new(cfg.get_usize("n", 100)?, cfg.get_f64("k", 0.5)?);
    design.beta_true =
        DVector::from_vec(cfg.get_f64_list("beta_true", design.beta_true.as_slice())?);
    design.domain_side = cfg.get_f64("domain_side", design.domain_side)?;
    design.phi_true = cfg.get_f64("phi_true", design.phi_true)?;
    design.sigma_w_true = cfg.get_f64("sigma_w_true", design.sigma_w_true)?;
    design.w_law = match cfg.raw("w_law").unwrap_or("mlg") {
        "mlg" => LatentLaw::Mlg,
        "gaussian" => LatentLaw::Gaussian,
        other => {
            return Err(Error::config(format!(
                "config key w_law: expected mlg or gaussian, got {other:?}"
            )))
        }
    };
    design.alpha_w = cfg.get_f64("alpha_w", design.alpha_w)?;
    design.kappa_w = cfg.get_f64("kappa_w", design.kappa_w)?;
    design.n_replicates = cfg.get_usize("n_replicates", design.n_replicates)?;
    design.n_iter = cfg.get_usize("n_iter", design.n_iter)?;
    design.n_burn = cfg.get_usize("n_burn", design.n_burn)?;
    design.seed = match args.seed {
        Some(s) => s,
        None => cfg.get_u64("seed", 0)?,
    };

    let metrics = run_study(&design)?;

    ensure_out_dir(&args.out)?;
    let mut out = String::new();
    out.push_str(&format!("# replicates_used={}\n", metrics.n_used));
    out.push_str(&format!("# replicates_failed={}\n", metrics.n_failed));
    out.push_str("name,truth,bias,sd,mse,cr\n");
    for r in &metrics.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.name, r.truth, r.bias, r.sd, r.mse, r.cr
        ));
    }
    fs::write(args.out.join("sim_metrics.csv"), out)?;
    Ok(())
}
