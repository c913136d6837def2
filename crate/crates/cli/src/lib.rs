//! Command-line front end.
//!
//! Every subcommand resolves its settings from flags first and the optional
//! `--config` file second, calls into the library and writes JSON or CSV.
//! Exit codes: 0 on success, 2 for usage, data and domain errors, 3 for
//! internal numeric failures.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use chargof::bahadur::{self, Convention};
use chargof::empirical::{k_statistic, StatisticConfig, SupMode};
use chargof::montecarlo::{self, NullCache, NullDistribution, SimPlan, SimRecord};
use chargof::projection::{self, Surface};
use chargof::{Alternative, Error, GridSpec, Sample, TestKind};

/// Failure of a command with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numeric(_) | Error::Json(_) => 3,
            Error::Domain(_) | Error::Parse { .. } | Error::Refused(_) | Error::Io(_) => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Keys accepted in a config file; they mirror the long flag names.
pub const CONFIG_KEYS: [&str; 18] = [
    "kind", "data", "alpha", "reps", "seed", "grid", "mode", "format", "out", "threads", "alt",
    "convention", "which", "theta", "epsilon", "n-list", "n", "cache",
];

/// Parses a flat `key = value` file. Blank lines and lines starting with
/// `#` are skipped; keys may be written with `_` or a leading `--`.
pub fn parse_config(text: &str) -> std::result::Result<BTreeMap<String, String>, Error> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected key = value, got `{trimmed}`"),
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-").to_ascii_lowercase();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Parse {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        let value = value.trim();
        if value.is_empty() {
            return Err(Error::Parse {
                line,
                message: format!("empty value for `{key}`"),
            });
        }
        if map.insert(key.clone(), value.to_string()).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(map)
}

#[derive(Debug, Parser)]
#[command(name = "chargof", version, about = "Characterization-based goodness-of-fit tests")]
pub struct Cli {
    /// Flat key = value file with defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<String>,
    /// Output format: json or csv.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a sample against the null family of a statistic.
    Test(TestArgs),
    /// Tabulate simulated critical values.
    Critvals(CritArgs),
    /// Estimate power against an alternative.
    Power(PowerArgs),
    /// Write a variance or slope surface as CSV.
    Surface(SurfaceArgs),
    /// Local Bahadur efficiency reports.
    Efficiency(EfficiencyArgs),
    /// Empirical large-deviation rates under the null.
    Ldcheck(LdArgs),
}

#[derive(Debug, Args)]
pub struct SimFlags {
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub reps: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// exact, grid or auto.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub grid: Option<String>,
    /// Directory for cached null distributions.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub sim: SimFlags,
    /// Newline-separated observations; `#` starts a comment line.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CritArgs {
    #[command(flatten)]
    pub sim: SimFlags,
    /// Comma-separated sample sizes.
    #[arg(long = "n-list", alias = "n")]
    pub n_list: Option<String>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[command(flatten)]
    pub sim: SimFlags,
    #[arg(long)]
    pub alt: Option<String>,
    /// Comma-separated parameter values.
    #[arg(long)]
    pub theta: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[arg(long)]
    pub kind: Option<String>,
    /// variance or aprime.
    #[arg(long)]
    pub which: Option<String>,
    #[arg(long)]
    pub alt: Option<String>,
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub alt: Option<String>,
    /// lemma or paper-compat.
    #[arg(long)]
    pub convention: Option<String>,
    /// Report every studied alternative.
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Args)]
pub struct LdArgs {
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long = "n-list")]
    pub n_list: Option<String>,
    #[arg(long)]
    pub reps: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> std::result::Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Domain(format!("unknown format `{other}`"))),
        }
    }
}

/// Flag values merged over the config file.
struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let file = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
                parse_config(&text).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?
            }
            None => BTreeMap::new(),
        };
        Ok(Settings { file })
    }

    fn raw(&self, flag: Option<&str>, key: &str) -> Option<String> {
        flag.map(str::to_string).or_else(|| self.file.get(key).cloned())
    }

    fn get<T: FromStr>(&self, flag: Option<&str>, key: &str) -> CliResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.raw(flag, key) {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::usage(format!("--{key} `{v}`: {e}"))),
        }
    }

    fn need<T: FromStr>(&self, flag: Option<&str>, key: &str) -> CliResult<T>
    where
        T::Err: fmt::Display,
    {
        self.get(flag, key)?
            .ok_or_else(|| CliError::usage(format!("missing --{key}")))
    }

    fn list<T: FromStr>(&self, flag: Option<&str>, key: &str) -> CliResult<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        match self.raw(flag, key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<T>()
                        .map_err(|e| CliError::usage(format!("--{key} `{v}`: {e}")))
                })
                .collect::<CliResult<Vec<T>>>()
                .map(Some),
        }
    }

    fn path(&self, flag: Option<&Path>, key: &str) -> Option<PathBuf> {
        flag.map(Path::to_path_buf)
            .or_else(|| self.file.get(key).map(PathBuf::from))
    }
}

/// Seed from the flags or config, or a fresh one that is reported on the
/// diagnostic stream.
fn resolve_seed(settings: &Settings, flag: Option<&str>, err: &mut dyn Write) -> CliResult<u64> {
    if let Some(seed) = settings.get::<u64>(flag, "seed")? {
        return Ok(seed);
    }
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    let seed = chargof::streams::derive_seed(nanos, std::process::id() as u64);
    writeln!(err, "seed: {seed} (pass --seed {seed} to reproduce)")?;
    Ok(seed)
}

enum ModeChoice {
    Auto,
    Fixed(SupMode),
}

fn resolve_mode(settings: &Settings, flag: Option<&str>) -> CliResult<ModeChoice> {
    match settings.raw(flag, "mode") {
        None => Ok(ModeChoice::Auto),
        Some(m) if m.trim().eq_ignore_ascii_case("auto") => Ok(ModeChoice::Auto),
        Some(m) => Ok(ModeChoice::Fixed(m.parse::<SupMode>()?)),
    }
}

fn statistic_config(choice: &ModeChoice, kind: TestKind, n: usize, grid: GridSpec) -> StatisticConfig {
    let mode = match choice {
        ModeChoice::Fixed(m) => *m,
        ModeChoice::Auto => StatisticConfig::auto(kind, n).mode,
    };
    StatisticConfig {
        mode,
        grid,
        exact_cap: None,
    }
}

fn null_distribution(plan: &SimPlan, cache: Option<&Path>) -> CliResult<NullDistribution> {
    Ok(match cache {
        Some(dir) => NullCache::new(dir).load_or_simulate(plan)?,
        None => NullDistribution::simulate(plan)?,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_num(v: f64) -> String {
    format!("{v}")
}

struct Output {
    format: Format,
    text: String,
}

impl Output {
    fn json(value: &Value) -> CliResult<Self> {
        let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
        text.push('\n');
        Ok(Output {
            format: Format::Json,
            text,
        })
    }

    fn csv(header: &[&str], rows: &[Vec<String>]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|c| csv_field(c)).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        Output {
            format: Format::Csv,
            text,
        }
    }
}

fn test_command(a: &TestArgs, s: &Settings, err: &mut dyn Write) -> CliResult<Value> {
    let kind: TestKind = s.need(a.sim.kind.as_deref(), "kind")?;
    let path = s
        .path(a.data.as_deref(), "data")
        .ok_or_else(|| CliError::usage("missing --data"))?;
    let bytes = fs::read(&path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let sample = Sample::parse_bytes(&bytes).map_err(|e| {
        let mut c = CliError::from(e);
        c.message = format!("{}: {}", path.display(), c.message);
        c
    })?;
    let alpha: f64 = s.get(a.sim.alpha.as_deref(), "alpha")?.unwrap_or(0.05);
    let reps: usize = s.get(a.sim.reps.as_deref(), "reps")?.unwrap_or(10_000);
    let grid: GridSpec = s.get(a.sim.grid.as_deref(), "grid")?.unwrap_or_default();
    let mode = resolve_mode(s, a.sim.mode.as_deref())?;
    let seed = resolve_seed(s, a.sim.seed.as_deref(), err)?;
    let cfg = statistic_config(&mode, kind, sample.len(), grid);

    let stat = k_statistic(kind, &sample, &cfg)?;
    let plan = SimPlan {
        mode: cfg.mode,
        grid,
        ..SimPlan::new(kind, sample.len(), reps, seed, alpha)
    };
    let cache = s.path(a.sim.cache.as_deref(), "cache");
    let null = null_distribution(&plan, cache.as_deref())?;
    let critical = null.critical_value(alpha)?;
    let p = null.p_value(stat.value);
    let decision = if stat.value > critical { "reject" } else { "retain" };
    Ok(json!({
        "kind": kind,
        "n": sample.len(),
        "statistic": stat.value,
        "argmax": [stat.argmax.0, stat.argmax.1],
        "mode": stat.mode,
        "p_value": p,
        "critical_value": critical,
        "alpha": alpha,
        "reps": reps,
        "seed": seed,
        "decision": decision,
    }))
}

fn record_rows(records: &[SimRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| {
            vec![
                r.kind.to_string(),
                r.n.to_string(),
                csv_num(r.alpha),
                r.reps.to_string(),
                r.seed.to_string(),
                csv_num(r.value),
            ]
        })
        .collect()
}

fn critvals_command(a: &CritArgs, s: &Settings, format: Format, err: &mut dyn Write) -> CliResult<Output> {
    let kind: TestKind = s.need(a.sim.kind.as_deref(), "kind")?;
    let ns: Vec<usize> = match s.list(a.n_list.as_deref(), "n-list")? {
        Some(v) => v,
        None => s
            .list(None, "n")?
            .ok_or_else(|| CliError::usage("missing --n-list"))?,
    };
    let alpha: f64 = s.get(a.sim.alpha.as_deref(), "alpha")?.unwrap_or(0.05);
    let reps: usize = s.get(a.sim.reps.as_deref(), "reps")?.unwrap_or(10_000);
    let grid: GridSpec = s.get(a.sim.grid.as_deref(), "grid")?.unwrap_or_default();
    let mode = resolve_mode(s, a.sim.mode.as_deref())?;
    let seed = resolve_seed(s, a.sim.seed.as_deref(), err)?;
    let cache = s.path(a.sim.cache.as_deref(), "cache");

    let mut records = Vec::new();
    for n in ns {
        let cfg = statistic_config(&mode, kind, n, grid);
        let plan = SimPlan {
            mode: cfg.mode,
            grid,
            ..SimPlan::new(kind, n, reps, seed, alpha)
        };
        let null = null_distribution(&plan, cache.as_deref())?;
        records.push(SimRecord::new(&plan, null.critical_value(alpha)?));
    }
    match format {
        Format::Json => Output::json(&serde_json::to_value(&records).map_err(Error::from)?),
        Format::Csv => Ok(Output::csv(
            &["kind", "n", "alpha", "reps", "seed", "value"],
            &record_rows(&records),
        )),
    }
}

fn power_command(a: &PowerArgs, s: &Settings, format: Format, err: &mut dyn Write) -> CliResult<Output> {
    let alt: Alternative = s.need(a.alt.as_deref(), "alt")?;
    let kind: TestKind = s.get(a.sim.kind.as_deref(), "kind")?.unwrap_or(alt.null_kind());
    let n: usize = s.need(a.n.as_deref(), "n")?;
    let thetas: Vec<f64> = s
        .list(a.theta.as_deref(), "theta")?
        .ok_or_else(|| CliError::usage("missing --theta"))?;
    let alpha: f64 = s.get(a.sim.alpha.as_deref(), "alpha")?.unwrap_or(0.05);
    let reps: usize = s.get(a.sim.reps.as_deref(), "reps")?.unwrap_or(2_000);
    let grid: GridSpec = s.get(a.sim.grid.as_deref(), "grid")?.unwrap_or_default();
    let mode = resolve_mode(s, a.sim.mode.as_deref())?;
    let seed = resolve_seed(s, a.sim.seed.as_deref(), err)?;
    let cfg = statistic_config(&mode, kind, n, grid);
    let plan = SimPlan {
        mode: cfg.mode,
        grid,
        ..SimPlan::new(kind, n, reps, seed, alpha)
    };
    if alt.null_kind() != kind {
        return Err(CliError::usage(format!(
            "alternative {alt} does not perturb the {kind} null"
        )));
    }
    for &t in &thetas {
        alt.check_theta(t)?;
    }
    let cache = s.path(a.sim.cache.as_deref(), "cache");
    let null = null_distribution(&plan, cache.as_deref())?;

    let mut estimates = Vec::new();
    for &theta in &thetas {
        estimates.push((theta, montecarlo::power_with(&plan, &null, &alt, theta)?));
    }
    match format {
        Format::Json => Output::json(&Value::Array(
            estimates
                .iter()
                .map(|(theta, est)| {
                    json!({
                        "kind": kind,
                        "alt": alt,
                        "n": n,
                        "alpha": alpha,
                        "reps": reps,
                        "seed": seed,
                        "theta": theta,
                        "value": est.power,
                        "standard_error": est.standard_error,
                        "critical_value": est.critical_value,
                    })
                })
                .collect(),
        )),
        Format::Csv => Ok(Output::csv(
            &[
                "kind", "alt", "n", "alpha", "reps", "seed", "theta", "value", "standard_error",
                "critical_value",
            ],
            &estimates
                .iter()
                .map(|(theta, est)| {
                    vec![
                        kind.to_string(),
                        alt.to_string(),
                        n.to_string(),
                        csv_num(alpha),
                        reps.to_string(),
                        seed.to_string(),
                        csv_num(*theta),
                        csv_num(est.power),
                        csv_num(est.standard_error),
                        csv_num(est.critical_value),
                    ]
                })
                .collect::<Vec<_>>(),
        )),
    }
}

fn surface_command(a: &SurfaceArgs, s: &Settings, format: Format, err: &mut dyn Write) -> CliResult<Output> {
    if format != Format::Csv {
        return Err(CliError::usage("surface output is CSV; pass --format csv or omit --format"));
    }
    let kind: TestKind = s.need(a.kind.as_deref(), "kind")?;
    let which = s.raw(a.which.as_deref(), "which").unwrap_or_else(|| "variance".into());
    let surface = match which.trim().to_ascii_lowercase().as_str() {
        "variance" | "sigma2" => Surface::Variance,
        "aprime" | "a-prime" | "slope" => {
            let alt: Alternative = s.need(a.alt.as_deref(), "alt")?;
            Surface::APrime(alt)
        }
        other => return Err(CliError::usage(format!("unknown surface `{other}`"))),
    };
    let grid: GridSpec = s
        .get(a.grid.as_deref(), "grid")?
        .unwrap_or(GridSpec::new(100, 100));
    let mut buf = Vec::new();
    let rows = projection::surface_dump(kind, surface, &grid, &mut buf)?;
    writeln!(err, "rows: {rows}")?;
    Ok(Output {
        format: Format::Csv,
        text: String::from_utf8(buf).expect("surface rows are ASCII"),
    })
}

fn efficiency_row(r: &bahadur::EfficiencyReport) -> Vec<String> {
    vec![
        r.kind.to_string(),
        r.alt.to_string(),
        r.convention.to_string(),
        csv_num(r.ld_coef),
        csv_num(r.b_coef),
        csv_num(r.kl2_coef),
        csv_num(r.efficiency),
        r.paper_value.map(csv_num).unwrap_or_default(),
        r.paper_value
            .map(|p| format!("{:+.4}", r.efficiency - p))
            .unwrap_or_default(),
        r.discrepancy_note.clone(),
    ]
}

const EFFICIENCY_COLUMNS: [&str; 10] = [
    "kind",
    "alt",
    "convention",
    "ld_coef",
    "b_coef",
    "kl2_coef",
    "efficiency",
    "paper_value",
    "difference",
    "discrepancy_note",
];

fn efficiency_command(a: &EfficiencyArgs, s: &Settings, format: Format) -> CliResult<Output> {
    let convention: Convention = s
        .get(a.convention.as_deref(), "convention")?
        .unwrap_or(Convention::PaperCompat);
    let alt: Option<Alternative> = s.get(a.alt.as_deref(), "alt")?;
    let kind: Option<TestKind> = s.get(a.kind.as_deref(), "kind")?;

    let reports = if a.all {
        bahadur::efficiency_all(convention)?
    } else if let Some(alt) = alt {
        let kind = kind.unwrap_or(alt.null_kind());
        vec![bahadur::efficiency(kind, &alt, convention)?]
    } else if let Some(kind) = kind {
        let r = bahadur::ld_report(kind);
        return match format {
            Format::Json => Output::json(&serde_json::to_value(&r).map_err(Error::from)?),
            Format::Csv => Ok(Output::csv(
                &[
                    "kind",
                    "degree",
                    "sigma0_sq",
                    "t1",
                    "t2",
                    "ld_coef",
                    "ld_from_printed_sigma0",
                    "paper_value",
                    "discrepancy_note",
                ],
                &[vec![
                    r.kind.to_string(),
                    r.degree.to_string(),
                    csv_num(r.sigma0_sq),
                    csv_num(r.argmax.0),
                    csv_num(r.argmax.1),
                    csv_num(r.ld_coef),
                    csv_num(r.ld_from_printed_sigma0),
                    csv_num(r.paper_value),
                    r.discrepancy_note.clone(),
                ]],
            )),
        };
    } else {
        return Err(CliError::usage("pass --alt, --kind or --all"));
    };

    match format {
        Format::Json if a.all => Output::json(&serde_json::to_value(&reports).map_err(Error::from)?),
        Format::Json => Output::json(&serde_json::to_value(&reports[0]).map_err(Error::from)?),
        Format::Csv => Ok(Output::csv(
            &EFFICIENCY_COLUMNS,
            &reports.iter().map(efficiency_row).collect::<Vec<_>>(),
        )),
    }
}

fn ldcheck_command(a: &LdArgs, s: &Settings, format: Format, err: &mut dyn Write) -> CliResult<Output> {
    let kind: TestKind = s.need(a.kind.as_deref(), "kind")?;
    let epsilon: f64 = s.need(a.epsilon.as_deref(), "epsilon")?;
    let ns: Vec<usize> = s
        .list(a.n_list.as_deref(), "n-list")?
        .ok_or_else(|| CliError::usage("missing --n-list"))?;
    let reps: usize = s.get(a.reps.as_deref(), "reps")?.unwrap_or(10_000);
    let seed = resolve_seed(s, a.seed.as_deref(), err)?;
    let points = montecarlo::ld_empirical(kind, epsilon, &ns, reps, seed)?;
    let predicted = bahadur::ld_coefficient(kind) * epsilon * epsilon;
    match format {
        Format::Json => Output::json(&json!({
            "kind": kind,
            "epsilon": epsilon,
            "reps": reps,
            "seed": seed,
            "predicted_rate": predicted,
            "points": points,
        })),
        Format::Csv => Ok(Output::csv(
            &["kind", "epsilon", "n", "reps", "seed", "hits", "tail_probability", "rate", "sparse", "predicted_rate"],
            &points
                .iter()
                .map(|p| {
                    vec![
                        kind.to_string(),
                        csv_num(epsilon),
                        p.n.to_string(),
                        p.reps.to_string(),
                        seed.to_string(),
                        p.hits.to_string(),
                        csv_num(p.tail_probability),
                        p.rate.map(csv_num).unwrap_or_default(),
                        p.sparse.to_string(),
                        csv_num(predicted),
                    ]
                })
                .collect::<Vec<_>>(),
        )),
    }
}

fn dispatch(cli: &Cli, settings: &Settings, err: &mut dyn Write) -> CliResult<Output> {
    let default_format = match cli.command {
        Command::Surface(_) => Format::Csv,
        _ => Format::Json,
    };
    let format: Format = settings
        .get(cli.format.as_deref(), "format")?
        .unwrap_or(default_format);
    match &cli.command {
        Command::Test(a) => {
            if format == Format::Csv {
                return Err(CliError::usage("test output is JSON"));
            }
            Output::json(&test_command(a, settings, err)?)
        }
        Command::Critvals(a) => critvals_command(a, settings, format, err),
        Command::Power(a) => power_command(a, settings, format, err),
        Command::Surface(a) => surface_command(a, settings, format, err),
        Command::Efficiency(a) => efficiency_command(a, settings, format),
        Command::Ldcheck(a) => ldcheck_command(a, settings, format, err),
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    let threads: Option<usize> = settings.get(cli.threads.as_deref(), "threads")?;
    let out_path = settings.path(cli.out.as_deref(), "out");
    // diagnostics are buffered so the work can move onto the pool
    let mut diag: Vec<u8> = Vec::new();
    let result = match threads {
        Some(0) => return Err(CliError::usage("--threads must be positive")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::usage(format!("thread pool: {e}")))?
            .install(|| dispatch(cli, &settings, &mut diag)),
        None => dispatch(cli, &settings, &mut diag),
    };
    err.write_all(&diag)?;
    let output = result?;
    debug_assert!(matches!(output.format, Format::Json | Format::Csv));
    match out_path {
        Some(p) => fs::write(&p, output.text.as_bytes())
            .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?,
        None => out.write_all(output.text.as_bytes())?,
    }
    Ok(())
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let m = parse_config("# defaults\nkind = pareto\n\n--reps=200\nn_list = 10,20\n").unwrap();
        assert_eq!(m["kind"], "pareto");
        assert_eq!(m["reps"], "200");
        assert_eq!(m["n-list"], "10,20");
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        for (text, line) in [("kind = pareto\nbogus", 2), ("a = 1", 1), ("\n\nkind =", 3), ("seed=1\nseed=2", 2)] {
            match parse_config(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
