//! Monte Carlo critical values, p-values, power and large-deviation
//! probabilities.
//!
//! Replication `r` of a simulation with master seed `s` always draws from
//! stream `r` of `s` (see [`crate::streams`]), so results are identical for
//! any number of worker threads.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{Alternative, NullFamily};
use crate::empirical::{k_statistic, StatisticConfig, SupMode};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kind::TestKind;
use crate::sample::Sample;
use crate::streams::{derive_seed, stream};

/// Smallest replication count accepted by a plan.
pub const MIN_REPS: usize = 100;

/// Tag mixed into the master seed for replications under an alternative.
const ALTERNATIVE_TAG: u64 = 0xA17E;

/// Parameters of a null simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimPlan {
    pub kind: TestKind,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub alpha: f64,
    pub mode: SupMode,
    pub grid: GridSpec,
}

impl SimPlan {
    /// Exact statistics, default grid.
    pub fn new(kind: TestKind, n: usize, reps: usize, seed: u64, alpha: f64) -> Self {
        SimPlan {
            kind,
            n,
            reps,
            seed,
            alpha,
            mode: SupMode::Exact,
            grid: GridSpec::default(),
        }
    }

    pub fn with_mode(mut self, mode: SupMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn statistic_config(&self) -> StatisticConfig {
        StatisticConfig {
            mode: self.mode,
            grid: self.grid,
            exact_cap: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < MIN_REPS {
            return Err(Error::domain(format!(
                "reps must be at least {MIN_REPS}, got {}",
                self.reps
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        let m = self.kind.min_sample_size();
        if self.n < m {
            return Err(Error::domain(format!(
                "{} statistic needs n >= {m}, got {}",
                self.kind, self.n
            )));
        }
        let cfg = self.statistic_config();
        if self.mode == SupMode::Exact && self.n > cfg.cap(self.kind) {
            return Err(Error::Refused(format!(
                "exact {} supremum limited to n <= {} (got {}); use grid mode",
                self.kind,
                cfg.cap(self.kind),
                self.n
            )));
        }
        Ok(())
    }
}

/// Statistic of a fresh sample from replication stream `r`.
fn replicate<F>(seed: u64, r: usize, kind: TestKind, cfg: &StatisticConfig, draw: F) -> Result<f64>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<Sample>,
{
    let mut rng = stream(seed, r as u64);
    let sample = draw(&mut rng)?;
    Ok(k_statistic(kind, &sample, cfg)?.value)
}

/// Simulated null distribution of the statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub kind: TestKind,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub mode: SupMode,
    /// Replicated statistics in increasing order.
    pub sorted: Vec<f64>,
}

impl NullDistribution {
    pub fn simulate(plan: &SimPlan) -> Result<Self> {
        plan.validate()?;
        let null = NullFamily::standard(plan.kind);
        let cfg = plan.statistic_config();
        let mut stats = (0..plan.reps)
            .into_par_iter()
            .map(|r| replicate(plan.seed, r, plan.kind, &cfg, |rng| null.sample(plan.n, rng)))
            .collect::<Result<Vec<f64>>>()?;
        stats.sort_by(f64::total_cmp);
        Ok(NullDistribution {
            kind: plan.kind,
            n: plan.n,
            reps: plan.reps,
            seed: plan.seed,
            mode: plan.mode,
            sorted: stats,
        })
    }

    /// Empirical `(1 - α)` quantile: the `⌈(1 - α) R⌉`-th smallest
    /// replicate. The test rejects when the statistic exceeds it.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let r = self.sorted.len();
        let k = ((1.0 - alpha) * r as f64).ceil() as usize;
        Ok(self.sorted[k.clamp(1, r) - 1])
    }

    /// Add-one Monte Carlo p-value `(1 + #{K_r >= observed}) / (R + 1)`.
    pub fn p_value(&self, observed: f64) -> f64 {
        let below = self.sorted.partition_point(|&k| k < observed);
        let at_least = self.sorted.len() - below;
        (1 + at_least) as f64 / (self.sorted.len() + 1) as f64
    }

    fn matches(&self, plan: &SimPlan) -> bool {
        self.kind == plan.kind
            && self.n == plan.n
            && self.reps == plan.reps
            && self.seed == plan.seed
            && self.mode == plan.mode
            && self.sorted.len() == plan.reps
    }
}

/// On-disk store of simulated null distributions keyed by
/// `(kind, n, reps, seed, mode)`.
#[derive(Debug, Clone)]
pub struct NullCache {
    dir: PathBuf,
}

impl NullCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        NullCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, plan: &SimPlan) -> PathBuf {
        let mode = match plan.mode {
            SupMode::Exact => "exact".to_string(),
            SupMode::Grid => format!("grid-{}", plan.grid).replace([':', ',', '@'], "_"),
        };
        self.dir.join(format!(
            "{}-n{}-r{}-s{}-{}.json",
            plan.kind, plan.n, plan.reps, plan.seed, mode
        ))
    }

    /// Loads the cached distribution for `plan`, simulating and storing it
    /// when absent or unreadable.
    pub fn load_or_simulate(&self, plan: &SimPlan) -> Result<NullDistribution> {
        plan.validate()?;
        let path = self.path_for(plan);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(dist) = serde_json::from_str::<NullDistribution>(&text) {
                if dist.matches(plan) {
                    return Ok(dist);
                }
            }
        }
        let dist = NullDistribution::simulate(plan)?;
        fs::create_dir_all(&self.dir)?;
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_string(&dist)?)?;
        fs::rename(&tmp, &path)?;
        Ok(dist)
    }
}

/// One simulated quantity with the plan that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub kind: TestKind,
    pub n: usize,
    pub alpha: f64,
    pub reps: usize,
    pub seed: u64,
    pub value: f64,
}

impl SimRecord {
    pub fn new(plan: &SimPlan, value: f64) -> Self {
        SimRecord {
            kind: plan.kind,
            n: plan.n,
            alpha: plan.alpha,
            reps: plan.reps,
            seed: plan.seed,
            value,
        }
    }
}

/// Simulated `(1 - α)` critical value of the plan.
pub fn critical_value(plan: &SimPlan) -> Result<f64> {
    NullDistribution::simulate(plan)?.critical_value(plan.alpha)
}

/// Monte Carlo p-value of `sample` against `reps` null replications.
pub fn p_value(kind: TestKind, sample: &Sample, reps: usize, seed: u64) -> Result<f64> {
    let cfg = StatisticConfig::auto(kind, sample.len());
    let observed = k_statistic(kind, sample, &cfg)?.value;
    let plan = SimPlan {
        mode: cfg.mode,
        ..SimPlan::new(kind, sample.len(), reps, seed, 0.05)
    };
    Ok(NullDistribution::simulate(&plan)?.p_value(observed))
}

/// Rejection frequency at `critical` over replications of `draw`.
pub fn rejection_rate<F>(plan: &SimPlan, critical: f64, seed: u64, draw: F) -> Result<f64>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<Sample> + Sync,
{
    plan.validate()?;
    let cfg = plan.statistic_config();
    let rejected = (0..plan.reps)
        .into_par_iter()
        .map(|r| replicate(seed, r, plan.kind, &cfg, &draw).map(|k| (k > critical) as usize))
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(rejected as f64 / plan.reps as f64)
}

/// Power estimate with the critical value it was measured at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub power: f64,
    pub critical_value: f64,
    pub standard_error: f64,
}

/// Power against `alt` at `theta`, with the critical value simulated from
/// the plan and alternative samples drawn from a seed derived from the
/// plan's.
pub fn power(plan: &SimPlan, alt: &Alternative, theta: f64) -> Result<PowerEstimate> {
    let null = NullDistribution::simulate(plan)?;
    power_with(plan, &null, alt, theta)
}

/// As [`power`], reusing a simulated null distribution.
pub fn power_with(
    plan: &SimPlan,
    null: &NullDistribution,
    alt: &Alternative,
    theta: f64,
) -> Result<PowerEstimate> {
    if alt.null_kind() != plan.kind {
        return Err(Error::domain(format!(
            "alternative {alt} does not perturb the {} null",
            plan.kind
        )));
    }
    alt.check_theta(theta)?;
    let critical = null.critical_value(plan.alpha)?;
    let p = rejection_rate(plan, critical, derive_seed(plan.seed, ALTERNATIVE_TAG), |rng| {
        alt.sample(theta, plan.n, rng)
    })?;
    Ok(PowerEstimate {
        power: p,
        critical_value: critical,
        standard_error: (p * (1.0 - p) / plan.reps as f64).sqrt(),
    })
}

/// Empirical null tail probability at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdPoint {
    pub n: usize,
    pub reps: usize,
    pub hits: usize,
    pub tail_probability: f64,
    /// `-(1/n) ln P(K_n >= ε)`; absent when no replication reached `ε`.
    pub rate: Option<f64>,
    /// Fewer than ten hits: the estimate is unreliable.
    pub sparse: bool,
}

/// Estimates `-(1/n) ln P(K_n >= ε)` under the null for each `n`.
pub fn ld_empirical(
    kind: TestKind,
    epsilon: f64,
    n_list: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Vec<LdPoint>> {
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let null = NullFamily::standard(kind);
    n_list
        .iter()
        .map(|&n| {
            let plan = SimPlan::new(kind, n, reps, derive_seed(seed, n as u64), 0.5);
            plan.validate()?;
            let cfg = plan.statistic_config();
            let hits = (0..reps)
                .into_par_iter()
                .map(|r| {
                    replicate(plan.seed, r, kind, &cfg, |rng| null.sample(n, rng))
                        .map(|k| (k >= epsilon) as usize)
                })
                .collect::<Result<Vec<usize>>>()?
                .into_iter()
                .sum::<usize>();
            let tail = hits as f64 / reps as f64;
            Ok(LdPoint {
                n,
                reps,
                hits,
                tail_probability: tail,
                // adding 0.0 turns -0.0 into 0.0 when every replication hits
                rate: (hits > 0).then(|| -tail.ln() / n as f64 + 0.0),
                sparse: hits < 10,
            })
        })
        .collect()
}
