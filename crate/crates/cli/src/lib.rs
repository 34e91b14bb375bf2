//! Config-driven experiment harness for `magcount`.
//!
//! A run is described by one TOML file. It holds a field block, a potential
//! block, a command block, solver settings shared by every command, and an
//! output block. Every report embeds the fully resolved config so that a run
//! can be repeated from its own output.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use magcount::bs::{assemble_radial_bound, BoundMode, RadialBoundOptions, RadialBoundReport};
use magcount::counting::oracle::{oracle_sweep, OracleSweep};
use magcount::counting::{count_total, fit_exponent, scan_coupling, weak_coupling_threshold, CountOptions, CountReport, ExponentFit, ScanResult, ThresholdOptions, ThresholdReport};
use magcount::field::{check_flux_assumption, AssumptionReport};
use magcount::hardy::{hardy_constant, sobolev_quotient, test_family_quotient, HardyOptions, HardyReport, QuotientSample, Trial};
use magcount::potential::{bound_rhs, BoundReport, TheoremId};
use magcount::{FieldProfile, PotentialProfile, Weight};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Numerics(#[from] magcount::Error),
    #[error("mismatched provenance: {0}")]
    Provenance(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

fn zero_potential() -> PotentialProfile {
    PotentialProfile::zero()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub field: FieldProfile,
    #[serde(default = "zero_potential")]
    pub potential: PotentialProfile,
    pub command: Command,
    /// Grid, domain and channel settings shared by every command.
    #[serde(default)]
    pub solver: CountOptions,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ladder {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Ladder {
    /// Geometric rungs from `from` to `to` inclusive.
    pub fn rungs(&self) -> Result<Vec<f64>> {
        if !(self.from > 0.0 && self.to > self.from && self.points >= 2) {
            return Err(HarnessError::Config("command.ladder needs 0 < from < to and points ≥ 2".into()));
        }
        let ratio = (self.to / self.from).ln() / (self.points - 1) as f64;
        let mut r: Vec<f64> = (0..self.points).map(|i| self.from * (ratio * i as f64).exp()).collect();
        r[self.points - 1] = self.to;
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub window: Option<(f64, f64)>,
    #[serde(default = "one")]
    pub min_count: u64,
}

fn one() -> u64 {
    1
}

fn two() -> u32 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SobolevConfig {
    pub q: f64,
    pub trials: Vec<Trial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    Count {
        lambda: f64,
        /// Seeded shooting-vs-inertia cross-checks run alongside the count.
        #[serde(default)]
        oracle_samples: usize,
    },
    Scan {
        #[serde(default)]
        lambdas: Vec<f64>,
        ladder: Option<Ladder>,
        fit: Option<FitConfig>,
        /// Ratio of counts to the right-hand side of this bound at `λV`.
        compare: Option<TheoremId>,
    },
    Threshold {
        lambda_hi: Option<f64>,
        rel_tol: Option<f64>,
        domain_levels: Option<u32>,
        stable_tol: Option<f64>,
        floor: Option<f64>,
    },
    Hardy {
        weight: Weight,
        /// Largest `|m|` treated exactly; defaults to `n₀`.
        m_max: Option<u64>,
        /// Domain levels `0..=levels` form the refinement trail.
        #[serde(default = "two")]
        levels: u32,
        #[serde(default = "two")]
        grid_level: u32,
        #[serde(default)]
        test_family: Vec<u64>,
        sobolev: Option<SobolevConfig>,
    },
    Bounds {
        theorems: Vec<TheoremId>,
    },
    Bs {
        lambda: f64,
        #[serde(default)]
        mode: BoundMode,
        truncation: Option<f64>,
        /// Also count at `lambda` and report the count next to the bound.
        #[serde(default)]
        with_count: bool,
    },
    Assumption {
        epsilon: f64,
        #[serde(default = "default_r_max")]
        r_max: f64,
        #[serde(default = "default_grid")]
        grid: usize,
    },
}

fn default_r_max() -> f64 {
    1e3
}

fn default_grid() -> usize {
    4096
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Count { .. } => "count",
            Command::Scan { .. } => "scan",
            Command::Threshold { .. } => "threshold",
            Command::Hardy { .. } => "hardy",
            Command::Bounds { .. } => "bounds",
            Command::Bs { .. } => "bs",
            Command::Assumption { .. } => "assumption",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub stem: String,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), stem: "run".into(), formats: vec![Format::Csv, Format::Json] }
    }
}

/// Sets `key` (dotted path) in a TOML tree, creating tables on the way.
/// The value is parsed as a TOML value and kept as a string when that fails.
pub fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| HarnessError::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(HarnessError::Config(format!("override key `{key}` has an empty segment")));
    }
    let mut table = root;
    for (i, part) in parts[..parts.len() - 1].iter().enumerate() {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| HarnessError::Config(format!("override key `{}` is not a table", parts[..=i].join("."))))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Parses a config, applying `key=value` overrides first. Errors name the offending key.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut root: toml::Table = text.parse().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut root, o)?;
    }
    let cfg: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(root)).map_err(|e| {
        let path = e.path().to_string();
        HarnessError::Config(format!("at `{path}`: {}", e.into_inner()))
    })?;
    cfg.potential.validate().map_err(|e| HarnessError::Config(format!("at `potential`: {e}")))?;
    cfg.solver.domain.validate().map_err(|e| HarnessError::Config(format!("at `solver.domain`: {e}")))?;
    Ok(cfg)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?, overrides)
}

/// Count next to the right-hand side of a bound evaluated at the same coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub lambda: f64,
    pub count: u64,
    pub rhs: f64,
    /// `count / rhs`, the empirical constant; zero when nothing is bound.
    pub ratio: Option<f64>,
}

/// A bound report tied to the coupling it was evaluated at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledBound {
    pub lambda: f64,
    pub report: BoundReport,
}

pub fn scaled_bound(theorem: TheoremId, potential: &PotentialProfile, lambda: f64) -> Result<ScaledBound> {
    Ok(ScaledBound { lambda, report: bound_rhs(theorem, &potential.scaled(lambda))? })
}

/// Ratio table of counts against bounds, matched by coupling.
pub fn compare(counts: &[CountReport], bounds: &[ScaledBound]) -> Result<Vec<CompareRow>> {
    if counts.len() != bounds.len() {
        return Err(HarnessError::Provenance(format!("{} counts against {} bounds", counts.len(), bounds.len())));
    }
    counts
        .iter()
        .zip(bounds)
        .map(|(c, b)| {
            if (c.lambda - b.lambda).abs() > 1e-12 * c.lambda.abs().max(1.0) {
                return Err(HarnessError::Provenance(format!("count at λ = {} paired with bound at λ = {}", c.lambda, b.lambda)));
            }
            let rhs = b.report.rhs_value;
            let ratio = if c.total == 0 {
                Some(0.0)
            } else if rhs > 0.0 {
                Some(c.total as f64 / rhs)
            } else {
                None
            };
            Ok(CompareRow { lambda: c.lambda, count: c.total, rhs, ratio })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyLevel {
    pub domain_level: u32,
    pub report: HardyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyResult {
    pub trail: Vec<HardyLevel>,
    pub test_family: Vec<QuotientSample>,
    pub sobolev: Vec<QuotientSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsResult {
    pub bound: RadialBoundReport,
    pub count: Option<CountReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunResult {
    Count { report: CountReport, oracle: Option<OracleSweep> },
    Scan { result: ScanResult, fit: Option<ExponentFit>, comparison: Option<Vec<CompareRow>> },
    Threshold { report: ThresholdReport },
    Hardy(HardyResult),
    Bounds { reports: Vec<BoundReport> },
    Bs(BsResult),
    Assumption { report: AssumptionReport },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: RunConfig,
    pub converged: bool,
    pub wall_clock_s: f64,
    pub result: RunResult,
}

fn hardy_options(cfg: &RunConfig, grid_level: u32, domain_level: u32) -> HardyOptions {
    HardyOptions {
        r_min: cfg.solver.domain.r_min,
        r_max: cfg.solver.domain.r_max,
        base_cells: cfg.solver.grid.base_cells,
        grid_level,
        domain_level,
        ..HardyOptions::default()
    }
}

/// Dispatches the command and drives it to convergence or budget.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let field = &cfg.field;
    let pot = &cfg.potential;
    let opts = &cfg.solver;
    let (result, converged) = match &cfg.command {
        Command::Count { lambda, oracle_samples } => {
            let report = count_total(field, pot, *lambda, opts)?;
            let oracle = if *oracle_samples > 0 { Some(oracle_sweep(cfg.seed, *oracle_samples, opts.max_grid_levels)?) } else { None };
            let ok = report.converged;
            (RunResult::Count { report, oracle }, ok)
        }
        Command::Scan { lambdas, ladder, fit, compare: theorem } => {
            let mut ls = lambdas.clone();
            if let Some(l) = ladder {
                ls.extend(l.rungs()?);
            }
            if ls.is_empty() {
                return Err(HarnessError::Config("at `command`: scan needs `lambdas` or `ladder`".into()));
            }
            let result = scan_coupling(field, pot, &ls, opts)?;
            let fit = match fit {
                Some(f) => Some(fit_exponent(&result.lambdas, &result.totals(), f.window, f.min_count)?),
                None => None,
            };
            let comparison = match theorem {
                Some(t) => {
                    let bounds = ls.iter().map(|&l| scaled_bound(*t, pot, l)).collect::<Result<Vec<_>>>()?;
                    Some(compare(&result.reports, &bounds)?)
                }
                None => None,
            };
            let ok = result.converged;
            (RunResult::Scan { result, fit, comparison }, ok)
        }
        Command::Threshold { lambda_hi, rel_tol, domain_levels, stable_tol, floor } => {
            let d = ThresholdOptions::default();
            let t = ThresholdOptions {
                lambda_hi: lambda_hi.unwrap_or(d.lambda_hi),
                rel_tol: rel_tol.unwrap_or(d.rel_tol),
                domain_levels: domain_levels.unwrap_or(d.domain_levels),
                stable_tol: stable_tol.unwrap_or(d.stable_tol),
                floor: floor.unwrap_or(d.floor),
                count: opts.clone(),
            };
            let report = weak_coupling_threshold(field, pot, &t)?;
            let ok = report.converged;
            (RunResult::Threshold { report }, ok)
        }
        Command::Hardy { weight, m_max, levels, grid_level, test_family, sobolev } => {
            let m_max = m_max.unwrap_or_else(|| field.n0());
            let trail = (0..=*levels)
                .map(|d| Ok(HardyLevel { domain_level: d, report: hardy_constant(field, *weight, m_max, &hardy_options(cfg, *grid_level, d))? }))
                .collect::<Result<Vec<_>>>()?;
            let test_family = test_family.iter().map(|&n| test_family_quotient(field, n, *weight)).collect::<magcount::Result<Vec<_>>>()?;
            let sobolev = match sobolev {
                Some(s) => s.trials.iter().map(|t| sobolev_quotient(field, s.q, t)).collect::<magcount::Result<Vec<_>>>()?,
                None => Vec::new(),
            };
            (RunResult::Hardy(HardyResult { trail, test_family, sobolev }), true)
        }
        Command::Bounds { theorems } => {
            let reports = theorems.iter().map(|t| bound_rhs(*t, pot)).collect::<magcount::Result<Vec<_>>>()?;
            (RunResult::Bounds { reports }, true)
        }
        Command::Bs { lambda, mode, truncation, with_count } => {
            let bound = assemble_radial_bound(field, pot, *lambda, &RadialBoundOptions { mode: *mode, truncation: *truncation })?;
            let count = if *with_count { Some(count_total(field, pot, *lambda, opts)?) } else { None };
            let ok = count.as_ref().is_none_or(|c| c.converged);
            (RunResult::Bs(BsResult { bound, count }), ok)
        }
        Command::Assumption { epsilon, r_max, grid } => {
            let report = check_flux_assumption(field, *epsilon, *r_max, *grid)?;
            (RunResult::Assumption { report }, true)
        }
    };
    Ok(RunReport { version: VERSION.to_string(), config: cfg.clone(), converged, wall_clock_s: start.elapsed().as_secs_f64(), result })
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn quotient_rows(samples: &[QuotientSample]) -> Vec<Vec<String>> {
    samples
        .iter()
        .map(|s| vec![s.trial.clone(), s.n.map(|n| n.to_string()).unwrap_or_default(), num(s.numerator), num(s.denominator), opt(s.quotient)])
        .collect()
}

/// CSV tables of a report as `(name, contents)`; contents depend only on the results.
pub fn csv_tables(report: &RunReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    match &report.result {
        RunResult::Count { report: c, oracle } => {
            out.push(("channels".into(), csv_table(&["lambda", "m", "count"], c.per_channel.iter().map(|(m, n)| vec![num(c.lambda), m.to_string(), n.to_string()]))));
            if let Some(o) = oracle {
                out.push((
                    "oracle".into(),
                    csv_table(
                        &["index", "m", "lambda", "variable", "shooting", "inertia", "converged"],
                        o.outcomes.iter().map(|x| {
                            vec![x.case.index.to_string(), x.case.m.to_string(), num(x.case.lambda), format!("{:?}", x.case.variable).to_lowercase(), x.shooting.to_string(), x.inertia.to_string(), x.converged.to_string()]
                        }),
                    ),
                ));
            }
        }
        RunResult::Scan { result, comparison, .. } => {
            let rows = result.reports.iter().flat_map(|r| {
                r.per_channel.iter().map(move |(m, n)| vec![num(r.lambda), m.to_string(), n.to_string(), r.total.to_string(), num(r.total as f64 / r.lambda), r.converged.to_string()])
            });
            out.push(("scan".into(), csv_table(&["lambda", "m", "count", "total", "n_over_lambda", "converged"], rows)));
            if let Some(rows) = comparison {
                out.push(("compare".into(), csv_table(&["lambda", "count", "rhs", "ratio"], rows.iter().map(|r| vec![num(r.lambda), r.count.to_string(), num(r.rhs), opt(r.ratio)]))));
            }
        }
        RunResult::Threshold { report: t } => {
            out.push(("threshold".into(), csv_table(&["domain_level", "lambda_star", "evaluations"], t.trail.iter().map(|s| vec![s.domain_level.to_string(), num(s.lambda_star), s.evaluations.to_string()]))));
        }
        RunResult::Hardy(h) => {
            let rows = h.trail.iter().flat_map(|l| l.report.per_channel.iter().map(move |(m, c)| vec![l.domain_level.to_string(), m.to_string(), num(*c)]));
            out.push(("hardy".into(), csv_table(&["domain_level", "channel", "constant"], rows)));
            let header = ["trial", "n", "numerator", "denominator", "quotient"];
            if !h.test_family.is_empty() {
                out.push(("test_family".into(), csv_table(&header, quotient_rows(&h.test_family))));
            }
            if !h.sobolev.is_empty() {
                out.push(("sobolev".into(), csv_table(&header, quotient_rows(&h.sobolev))));
            }
        }
        RunResult::Bounds { reports } => {
            let rows = reports.iter().flat_map(|r| {
                r.components.iter().map(|(n, v)| vec![r.theorem_id.clone(), n.clone(), num(*v)]).chain(std::iter::once(vec![r.theorem_id.clone(), "rhs".into(), num(r.rhs_value)]))
            });
            out.push(("bounds".into(), csv_table(&["theorem", "component", "value"], rows)));
        }
        RunResult::Bs(b) => {
            let rows = b.bound.blocks.iter().map(|x| vec![x.channel.to_string(), x.kind.clone(), num(x.a), num(x.b), num(x.delta), num(x.value)]);
            out.push(("bs".into(), csv_table(&["channel", "kind", "a", "b", "delta", "value"], rows)));
        }
        RunResult::Assumption { report: a } => {
            out.push(("assumption".into(), csv_table(&["lo", "hi"], a.intervals.iter().map(|(l, h)| vec![num(*l), num(*h)]))));
        }
    }
    out
}

/// Writes the CSV tables and the JSON summary; returns the paths written.
pub fn write_outputs(report: &RunReport) -> Result<Vec<PathBuf>> {
    let o = &report.config.output;
    std::fs::create_dir_all(&o.dir)?;
    let mut written = Vec::new();
    if o.formats.contains(&Format::Csv) {
        for (name, body) in csv_tables(report) {
            let p = o.dir.join(format!("{}_{}.csv", o.stem, name));
            std::fs::write(&p, body)?;
            written.push(p);
        }
    }
    if o.formats.contains(&Format::Json) {
        let p = o.dir.join(format!("{}.json", o.stem));
        std::fs::write(&p, serde_json::to_string_pretty(report).expect("report serializes"))?;
        written.push(p);
    }
    Ok(written)
}

/// One-paragraph human summary for the terminal.
pub fn summary(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = write!(s, "{} ", report.config.command.name());
    let _ = match &report.result {
        RunResult::Count { report: c, oracle } => {
            let _ = write!(s, "λ={} N={} cutoff={} converged={}", c.lambda, c.total, c.cutoff, c.converged);
            match oracle {
                Some(o) => write!(s, " oracle {}/{} agree", o.agreements, o.outcomes.len()),
                None => Ok(()),
            }
        }
        RunResult::Scan { result, fit, .. } => {
            let _ = write!(s, "{} rungs, totals {:?}, monotone={}", result.lambdas.len(), result.totals(), result.monotone);
            match fit {
                Some(f) => write!(s, ", exponent {:.3} prefactor {:.3}", f.exponent, f.prefactor),
                None => Ok(()),
            }
        }
        RunResult::Threshold { report: t } => write!(s, "λ*={:.6} vanishing={} converged={}", t.lambda_star, t.vanishing, t.converged),
        RunResult::Hardy(h) => {
            let vals: Vec<String> = h.trail.iter().map(|l| format!("{:.5}", l.report.value)).collect();
            write!(s, "constants by domain level [{}]", vals.join(", "))
        }
        RunResult::Bounds { reports } => {
            let vals: Vec<String> = reports.iter().map(|r| format!("{}={:.6}", r.theorem_id, r.rhs_value)).collect();
            write!(s, "{}", vals.join(" "))
        }
        RunResult::Bs(b) => write!(s, "bound={:.4} certified={} count={:?}", b.bound.total, b.bound.certified, b.count.as_ref().map(|c| c.total)),
        RunResult::Assumption { report: a } => write!(s, "satisfied={} intervals={}", a.satisfied, a.intervals.len()),
    };
    let _ = write!(s, " ({:.2}s)", report.wall_clock_s);
    s
}


#[cfg(doctest)]
#[doc = include_str!("../../../book/src/harness.md")]
mod book_harness {}
