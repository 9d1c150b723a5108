//! Experiment configuration and multi-seed sweeps.
//!
//! An [`ExperimentSpec`] expands into one simulation per
//! (algorithm, `UE_SA`, seed) cell. Every cell writes its own trace CSV and
//! summary JSON; the aggregate table of per-cell medians is written once all
//! cells are done.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::{generate_pools, write_pool_dump};
use crate::drivers::{GateRule, TcqMode};
use crate::engine::{run, RunSummary, SimulationConfig, SimulationOutcome, Termination};
use crate::model::write_event_log;
use crate::ranking::{write_snapshot, Algorithm};
use crate::{ConfigError, Error};

/// When to run the α/β sensitivity scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// Only when a qualitative check fails.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub base: SimulationConfig,
    pub algorithms: Vec<Algorithm>,
    pub ue_sa: Vec<f64>,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub write_events: bool,
    pub dump_pools: bool,
    pub scan: ScanMode,
    /// Values tried for both α and β by the sensitivity scan.
    pub scan_values: Vec<f64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            base: SimulationConfig::default(),
            algorithms: Algorithm::ALL.to_vec(),
            ue_sa: vec![1.0, 2.0],
            seeds: (1..=20).collect(),
            out_dir: PathBuf::from("results"),
            write_events: false,
            dump_pools: false,
            scan: ScanMode::Auto,
            scan_values: vec![0.5, 1.0, 2.0],
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.algorithms.is_empty() {
            return Err(ConfigError::out_of_range("algo", "(empty)", "at least one algorithm"));
        }
        if self.ue_sa.is_empty() {
            return Err(ConfigError::out_of_range("ue_sa", "(empty)", "at least one value"));
        }
        if self.seeds.is_empty() {
            return Err(ConfigError::out_of_range("seeds", "(empty)", "at least one seed"));
        }
        if self.scan_values.is_empty() {
            return Err(ConfigError::out_of_range("scan_values", "(empty)", "at least one value"));
        }
        for &v in &self.scan_values {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::out_of_range("scan_values", v, "finite and > 0"));
            }
        }
        for &ue in &self.ue_sa {
            self.cell_config(self.algorithms[0], ue, self.seeds[0]).validate()?;
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.algorithms.len() * self.ue_sa.len() * self.seeds.len()
    }

    pub fn cell_config(&self, algorithm: Algorithm, ue_sa: f64, seed: u64) -> SimulationConfig {
        let mut config = self.base.clone();
        config.algorithm = algorithm;
        config.efforts.ue_sa = ue_sa;
        config.seed = seed;
        config.record_events = self.write_events;
        config
    }

    /// Cells in output order: algorithm, then effort level, then seed.
    pub fn cells(&self) -> Vec<(Algorithm, f64, u64)> {
        let mut cells = Vec::with_capacity(self.cell_count());
        for &a in &self.algorithms {
            for &ue in &self.ue_sa {
                for &s in &self.seeds {
                    cells.push((a, ue, s));
                }
            }
        }
        cells
    }
}

/// Effort level as written in file names: always with a decimal point.
pub fn format_level(ue: f64) -> String {
    format!("{ue:?}")
}

/// `<algo>_ue<level>_seed<seed>`.
pub fn cell_stem(algorithm: Algorithm, ue_sa: f64, seed: u64) -> String {
    format!("{}_ue{}_seed{}", algorithm, format_level(ue_sa), seed)
}

pub const CONFIG_KEYS: &[&str] = &[
    "actors",
    "concepts",
    "instances",
    "cap",
    "stop",
    "ue_pc",
    "ue_pi",
    "ue_sa",
    "alpha",
    "beta",
    "damping",
    "tolerance",
    "max_iterations",
    "cadence",
    "gate",
    "tcq",
    "algo",
    "seeds",
    "out",
    "events",
    "dump_pools",
    "dump_rankings",
    "scan",
    "scan_values",
];

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

/// Splits flat `key = value` text. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: n + 1,
            reason: format!("expected `key = value`, found `{line}`"),
        })?;
        let key = normalize_key(key);
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: n + 1,
                reason: "missing key".to_string(),
            });
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

/// Builds a spec from defaults, then the optional config file text, then
/// `overrides` (command-line flags), later settings winning.
pub fn parse_config(
    file_text: Option<&str>,
    overrides: &[(String, String)],
) -> Result<ExperimentSpec, ConfigError> {
    let mut spec = ExperimentSpec::default();
    if let Some(text) = file_text {
        for (k, v) in parse_config_text(text)? {
            apply(&mut spec, &k, &v)?;
        }
    }
    for (k, v) in overrides {
        apply(&mut spec, &normalize_key(k), v)?;
    }
    spec.validate()?;
    Ok(spec)
}

fn int_in(key: &str, value: &str, min: i64, max: i64) -> Result<i64, ConfigError> {
    let v: i64 = value
        .trim()
        .parse()
        .map_err(|e| ConfigError::invalid(key, value, e))?;
    if v < min || v > max {
        return Err(ConfigError::out_of_range(key, v, &format!("integer in [{min}, {max}]")));
    }
    Ok(v)
}

fn float(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|e| ConfigError::invalid(key, value, e))
}

fn positive_float(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = float(key, value)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::out_of_range(key, v, "finite and > 0"))
    }
}

fn float_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|s| positive_float(key, s))
        .collect()
}

fn boolean(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::invalid(key, value, "expected true or false")),
    }
}

/// `3`, `1-20`, `1,2,5`, or a mix such as `1-3,7`. Order is kept,
/// duplicates dropped.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>, ConfigError> {
    let bad = |reason: &str| ConfigError::invalid("seeds", value, reason);
    let mut seeds = Vec::new();
    for part in value.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(bad("empty list element"));
        }
        match part.split_once('-') {
            Some((lo, hi)) => {
                let lo: u64 = lo.trim().parse().map_err(|e| bad(&format!("{e}")))?;
                let hi: u64 = hi.trim().parse().map_err(|e| bad(&format!("{e}")))?;
                if lo > hi {
                    return Err(ConfigError::out_of_range("seeds", part, "ranges written low-high"));
                }
                seeds.extend(lo..=hi);
            }
            None => seeds.push(part.parse().map_err(|e| bad(&format!("{e}")))?),
        }
    }
    let mut seen = std::collections::HashSet::new();
    seeds.retain(|s| seen.insert(*s));
    Ok(seeds)
}

pub fn parse_algorithms(value: &str) -> Result<Vec<Algorithm>, ConfigError> {
    if value.trim().eq_ignore_ascii_case("all") {
        return Ok(Algorithm::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in value.split(',') {
        let a: Algorithm = part
            .parse()
            .map_err(|e: String| ConfigError::invalid("algo", value, e))?;
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok(out)
}

fn apply(spec: &mut ExperimentSpec, key: &str, value: &str) -> Result<(), ConfigError> {
    let base = &mut spec.base;
    match key {
        "actors" => base.pools.actors = int_in(key, value, 1, u32::MAX as i64)? as u32,
        "concepts" => base.pools.concepts = int_in(key, value, 1, u32::MAX as i64)? as u32,
        "instances" => base.pools.instances = int_in(key, value, 1, u32::MAX as i64)? as u32,
        "cap" => base.pools.activity_cap = int_in(key, value, 1, i64::MAX)? as u64,
        "stop" => base.stop_target = int_in(key, value, 1, i64::MAX)? as u64,
        "ue_pc" => base.efforts.ue_pc = positive_float(key, value)?,
        "ue_pi" => base.efforts.ue_pi = positive_float(key, value)?,
        "ue_sa" => spec.ue_sa = float_list(key, value)?,
        "alpha" => base.drivers.alpha = positive_float(key, value)?,
        "beta" => base.drivers.beta = positive_float(key, value)?,
        "damping" => {
            let d = float(key, value)?;
            if !(d > 0.0 && d < 1.0) {
                return Err(ConfigError::out_of_range(key, d, "(0, 1)"));
            }
            base.solver.damping = d;
        }
        "tolerance" => base.solver.tolerance = positive_float(key, value)?,
        "max_iterations" => {
            base.solver.max_iterations = int_in(key, value, 1, 1_000_000)? as usize
        }
        "cadence" => base.ranking_cadence = int_in(key, value, 1, i64::MAX)? as u64,
        "gate" => {
            base.gate = match value.trim().to_ascii_lowercase().as_str() {
                "strict" => GateRule::Strict,
                "inclusive" => GateRule::Inclusive,
                _ => return Err(ConfigError::out_of_range(key, value, "strict or inclusive")),
            }
        }
        "tcq" => {
            base.drivers.tcq_mode = match value.trim().to_ascii_lowercase().as_str() {
                "literal" => TcqMode::Literal,
                "inverted" => TcqMode::Inverted,
                _ => return Err(ConfigError::out_of_range(key, value, "literal or inverted")),
            }
        }
        "algo" => spec.algorithms = parse_algorithms(value)?,
        "seeds" => spec.seeds = parse_seeds(value)?,
        "out" => {
            if value.trim().is_empty() {
                return Err(ConfigError::invalid(key, value, "empty path"));
            }
            spec.out_dir = PathBuf::from(value.trim());
        }
        "events" => spec.write_events = boolean(key, value)?,
        "dump_pools" => spec.dump_pools = boolean(key, value)?,
        "dump_rankings" => {
            let n = int_in(key, value, 0, i64::MAX)? as u64;
            base.snapshot_interval = (n > 0).then_some(n);
        }
        "scan" => {
            spec.scan = match value.trim().to_ascii_lowercase().as_str() {
                "auto" => ScanMode::Auto,
                "always" => ScanMode::Always,
                "never" => ScanMode::Never,
                _ => return Err(ConfigError::out_of_range(key, value, "auto, always or never")),
            }
        }
        "scan_values" => spec.scan_values = float_list(key, value)?,
        _ => return Err(ConfigError::UnknownKey(key.to_string())),
    }
    Ok(())
}

/// Result of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub algorithm: Algorithm,
    pub ue_sa: f64,
    pub seed: u64,
    pub summary: RunSummary,
}

/// Median; the mean of the middle pair for even counts. `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(v[n / 2]),
        _ => Some((v[n / 2 - 1] + v[n / 2]) / 2.0),
    }
}

/// Per (algorithm, effort) medians across seeds. Runs missing a value (for
/// instance no annotation ever succeeded) are left out of that median.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algorithm: Algorithm,
    pub ue_sa: f64,
    pub runs: usize,
    pub stop_reached: usize,
    pub cap_exceeded: usize,
    pub median_final_entropy: Option<f64>,
    pub median_top1_quality: Option<f64>,
    pub median_top10_quality: Option<f64>,
    pub median_sa_rate: Option<f64>,
}

pub const AGGREGATE_HEADER: &str = "algorithm,ue_sa,runs,stop_reached,cap_exceeded,\
median_final_entropy,median_top1_quality,median_top10_quality,median_sa_rate";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl AggregateRow {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            format_level(self.ue_sa),
            self.runs,
            self.stop_reached,
            self.cap_exceeded,
            opt(self.median_final_entropy),
            opt(self.median_top1_quality),
            opt(self.median_top10_quality),
            opt(self.median_sa_rate),
        )
    }
}

/// Groups cells by (algorithm, effort) in first-seen order.
pub fn aggregate(cells: &[CellResult]) -> Vec<AggregateRow> {
    let mut groups: Vec<((Algorithm, u64), Vec<&RunSummary>)> = Vec::new();
    for cell in cells {
        let key = (cell.algorithm, cell.ue_sa.to_bits());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(&cell.summary),
            None => groups.push((key, vec![&cell.summary])),
        }
    }
    groups
        .into_iter()
        .map(|((algorithm, bits), runs)| {
            let collect = |f: fn(&RunSummary) -> Option<f64>| -> Vec<f64> {
                runs.iter().filter_map(|r| f(r)).collect()
            };
            let stop_reached = runs
                .iter()
                .filter(|r| r.termination == Termination::StopReached)
                .count();
            AggregateRow {
                algorithm,
                ue_sa: f64::from_bits(bits),
                runs: runs.len(),
                stop_reached,
                cap_exceeded: runs.len() - stop_reached,
                median_final_entropy: median(&collect(|r| r.final_entropy)),
                median_top1_quality: median(&collect(|r| r.final_top1_quality)),
                median_top10_quality: median(&collect(|r| r.final_top10_quality)),
                median_sa_rate: median(&collect(|r| r.execution_rates.semantic_annotation)),
            }
        })
        .collect()
}

pub fn write_aggregate<W: Write>(mut out: W, rows: &[AggregateRow]) -> std::io::Result<()> {
    writeln!(out, "{AGGREGATE_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv_row())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The sweep lacks the cells the check needs.
    NotApplicable,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::NotApplicable => "n/a",
        }
    }

    fn from_bool(b: bool) -> Self {
        if b {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }
}

/// A qualitative comparison across the aggregate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

const LOW_EFFORT: f64 = 1.0;
const HIGH_EFFORT: f64 = 2.0;

fn lookup(
    rows: &[AggregateRow],
    algorithm: Algorithm,
    ue: f64,
    f: fn(&AggregateRow) -> Option<f64>,
) -> Option<f64> {
    rows.iter()
        .find(|r| r.algorithm == algorithm && r.ue_sa == ue)
        .and_then(f)
}

fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

/// Median final entropy at high effort: random > hits > {indegree, pagerank}.
pub fn check_entropy_ordering(rows: &[AggregateRow]) -> CheckResult {
    let name = "entropy_ordering".to_string();
    let get = |a| lookup(rows, a, HIGH_EFFORT, |r| r.median_final_entropy);
    let (Some(r), Some(h), Some(i), Some(p)) = (
        get(Algorithm::Random),
        get(Algorithm::Hits),
        get(Algorithm::Indegree),
        get(Algorithm::PageRank),
    ) else {
        return CheckResult {
            name,
            status: CheckStatus::NotApplicable,
            detail: "needs all four algorithms at ue_sa 2.0".to_string(),
        };
    };
    let ok = r > h && h > i && h > p && r - p > 0.0;
    CheckResult {
        name,
        status: CheckStatus::from_bool(ok),
        detail: format!(
            "ue2.0 entropy random {} hits {} indegree {} pagerank {}",
            fmt4(r),
            fmt4(h),
            fmt4(i),
            fmt4(p)
        ),
    }
}

/// Median top-1 quality is higher at high effort, for indegree and pagerank.
pub fn check_effort_quality(rows: &[AggregateRow]) -> CheckResult {
    let name = "effort_raises_top1_quality".to_string();
    let mut parts = Vec::new();
    let mut ok = true;
    for a in [Algorithm::Indegree, Algorithm::PageRank] {
        let lo = lookup(rows, a, LOW_EFFORT, |r| r.median_top1_quality);
        let hi = lookup(rows, a, HIGH_EFFORT, |r| r.median_top1_quality);
        let (Some(lo), Some(hi)) = (lo, hi) else {
            return CheckResult {
                name,
                status: CheckStatus::NotApplicable,
                detail: "needs indegree and pagerank at ue_sa 1.0 and 2.0".to_string(),
            };
        };
        ok &= hi > lo;
        parts.push(format!("{a} {} -> {}", fmt4(lo), fmt4(hi)));
    }
    CheckResult {
        name,
        status: CheckStatus::from_bool(ok),
        detail: format!("top1 quality ue1.0 -> ue2.0: {}", parts.join(", ")),
    }
}

/// At low effort all median annotation rates lie within 0.1 of one
/// another; at high effort each is strictly lower than its own low-effort
/// rate.
pub fn check_rate_effect(rows: &[AggregateRow]) -> CheckResult {
    let name = "rate_effect".to_string();
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for a in Algorithm::ALL {
        match (
            lookup(rows, a, LOW_EFFORT, |r| r.median_sa_rate),
            lookup(rows, a, HIGH_EFFORT, |r| r.median_sa_rate),
        ) {
            (Some(l), Some(h)) => {
                lo.push((a, l));
                hi.push((a, h));
            }
            _ => {
                return CheckResult {
                    name,
                    status: CheckStatus::NotApplicable,
                    detail: "needs all four algorithms at ue_sa 1.0 and 2.0".to_string(),
                }
            }
        }
    }
    let max = lo.iter().map(|x| x.1).fold(f64::MIN, f64::max);
    let min = lo.iter().map(|x| x.1).fold(f64::MAX, f64::min);
    let spread_ok = max - min <= 0.1;
    let drop_ok = lo.iter().zip(&hi).all(|(l, h)| h.1 < l.1);
    let show = |v: &[(Algorithm, f64)]| {
        v.iter()
            .map(|(a, x)| format!("{a} {}", fmt4(*x)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    CheckResult {
        name,
        status: CheckStatus::from_bool(spread_ok && drop_ok),
        detail: format!(
            "sa rate ue1.0 [{}] spread {} ({}); ue2.0 [{}] ({})",
            show(&lo),
            fmt4(max - min),
            if spread_ok { "<= 0.1" } else { "> 0.1" },
            show(&hi),
            if drop_ok { "all lower" } else { "not all lower" }
        ),
    }
}

pub fn qualitative_checks(rows: &[AggregateRow]) -> Vec<CheckResult> {
    vec![
        check_entropy_ordering(rows),
        check_effort_quality(rows),
        check_rate_effect(rows),
    ]
}

pub fn write_checks<W: Write>(mut out: W, checks: &[CheckResult]) -> std::io::Result<()> {
    writeln!(out, "check,status,detail")?;
    for c in checks {
        writeln!(out, "{},{},\"{}\"", c.name, c.status.as_str(), c.detail)?;
    }
    Ok(())
}

/// One (α, β) setting of the sensitivity scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub alpha: f64,
    pub beta: f64,
    pub rows: Vec<AggregateRow>,
    pub checks: Vec<CheckResult>,
}

pub const SCAN_HEADER: &str = "alpha,beta,entropy_ordering,effort_raises_top1_quality,rate_effect,\
algorithm,ue_sa,runs,stop_reached,median_final_entropy,median_top1_quality,median_sa_rate";

pub fn write_scan<W: Write>(mut out: W, scan: &[ScanRow]) -> std::io::Result<()> {
    writeln!(out, "{SCAN_HEADER}")?;
    for s in scan {
        let status: Vec<&str> = s.checks.iter().map(|c| c.status.as_str()).collect();
        for r in &s.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                s.alpha,
                s.beta,
                status[0],
                status[1],
                status[2],
                r.algorithm,
                format_level(r.ue_sa),
                r.runs,
                r.stop_reached,
                opt(r.median_final_entropy),
                opt(r.median_top1_quality),
                opt(r.median_sa_rate),
            )?;
        }
    }
    Ok(())
}

/// Reruns the four-algorithm, two-effort grid for every (α, β) pair in
/// `spec.scan_values`, keeping only summaries.
pub fn sensitivity_scan(spec: &ExperimentSpec) -> Result<Vec<ScanRow>, ConfigError> {
    let mut settings = Vec::new();
    for &alpha in &spec.scan_values {
        for &beta in &spec.scan_values {
            settings.push((alpha, beta));
        }
    }
    settings
        .into_iter()
        .map(|(alpha, beta)| {
            let mut s = spec.clone();
            s.base.drivers.alpha = alpha;
            s.base.drivers.beta = beta;
            s.algorithms = Algorithm::ALL.to_vec();
            s.ue_sa = vec![LOW_EFFORT, HIGH_EFFORT];
            s.write_events = false;
            s.base.snapshot_interval = None;
            let cells = s
                .cells()
                .into_par_iter()
                .map(|(a, ue, seed)| {
                    let outcome = run(s.cell_config(a, ue, seed))?;
                    Ok(CellResult {
                        algorithm: a,
                        ue_sa: ue,
                        seed,
                        summary: outcome.summary(),
                    })
                })
                .collect::<Result<Vec<_>, ConfigError>>()?;
            let rows = aggregate(&cells);
            let checks = qualitative_checks(&rows);
            Ok(ScanRow {
                alpha,
                beta,
                rows,
                checks,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub cells: Vec<CellResult>,
    pub aggregate: Vec<AggregateRow>,
    pub checks: Vec<CheckResult>,
    /// Present when the scan ran.
    pub scan: Option<Vec<ScanRow>>,
}

impl ExperimentReport {
    pub fn any_check_failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Fail)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Error> {
    let mut w = create(path)?;
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn write_cell(spec: &ExperimentSpec, outcome: &SimulationOutcome, summary: &RunSummary) -> Result<(), Error> {
    let c = &outcome.config;
    let stem = cell_stem(c.algorithm, c.efforts.ue_sa, c.seed);
    let dir = &spec.out_dir;
    write_file(&dir.join(format!("{stem}.csv")), |w| {
        w.write_all(outcome.trace_csv().as_bytes())
    })?;
    write_file(&dir.join(format!("{stem}.json")), |w| {
        serde_json::to_writer_pretty(&mut *w, summary)?;
        writeln!(w)
    })?;
    if spec.write_events {
        write_file(&dir.join(format!("{stem}_events.csv")), |w| {
            write_event_log(w, &outcome.events)
        })?;
    }
    if spec.dump_pools {
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        let pools = generate_pools(&c.pools, &mut rng)?;
        write_file(&dir.join(format!("{stem}_pools.csv")), |w| {
            write_pool_dump(w, &pools)
        })?;
    }
    if !outcome.snapshots.is_empty() {
        let sub = dir.join(format!("{stem}_rankings"));
        fs::create_dir_all(&sub).map_err(|e| Error::io(format!("creating {}", sub.display()), e))?;
        for (iteration, snapshot) in &outcome.snapshots {
            write_file(&sub.join(format!("iter{iteration}.csv")), |w| {
                write_snapshot(w, snapshot)
            })?;
        }
    }
    Ok(())
}

/// Runs every cell (in parallel), writes per-cell outputs, the aggregate,
/// the qualitative checks and, when called for, the sensitivity scan.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, Error> {
    spec.validate()?;
    let dir = &spec.out_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    write_file(&dir.join("experiment.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, spec)?;
        writeln!(w)
    })?;

    let cells = spec
        .cells()
        .into_par_iter()
        .map(|(a, ue, seed)| {
            let outcome = run(spec.cell_config(a, ue, seed))?;
            let summary = outcome.summary();
            write_cell(spec, &outcome, &summary)?;
            Ok(CellResult {
                algorithm: a,
                ue_sa: ue,
                seed,
                summary,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let rows = aggregate(&cells);
    write_file(&dir.join("aggregate.csv"), |w| write_aggregate(w, &rows))?;
    let checks = qualitative_checks(&rows);
    write_file(&dir.join("checks.csv"), |w| write_checks(w, &checks))?;

    let failed = checks.iter().any(|c| c.status == CheckStatus::Fail);
    let scan = match spec.scan {
        ScanMode::Always => true,
        ScanMode::Auto => failed,
        ScanMode::Never => false,
    };
    let scan = if scan {
        let scan = sensitivity_scan(spec)?;
        write_file(&dir.join("scan.csv"), |w| write_scan(w, &scan))?;
        Some(scan)
    } else {
        None
    };
    Ok(ExperimentReport {
        cells,
        aggregate: rows,
        checks,
        scan,
    })
}

/// Per-cell summaries keyed by file stem, read back from an output
/// directory.
pub fn read_summaries(dir: &Path) -> Result<BTreeMap<String, RunSummary>, Error> {
    let mut out = BTreeMap::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(format!("reading {}", dir.display()), e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io("listing output", e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if !name.ends_with(".json") || name == "experiment.json" {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let summary: RunSummary = serde_json::from_str(&text).map_err(|e| {
            Error::io(
                format!("parsing {}", path.display()),
                std::io::Error::new(std::io::ErrorKind::InvalidData, e),
            )
        })?;
        out.insert(name.trim_end_matches(".json").to_string(), summary);
    }
    Ok(out)
}
