//! U-empirical distribution functions and the supremum statistics.
//!
//! Each statistic is `sup |H_n(t1, t2) - G_n(t1, t2)|` over a
//! two-dimensional parameter set. The `diff_*` evaluators compute
//! `H_n - G_n` at one point from order-statistic counts; the brute-force
//! evaluators enumerate index tuples and exist to check them.
//!
//! The exact supremum exploits that `H_n - G_n` is piecewise constant. For
//! the Pareto and logistic statistics the pieces are cells of an
//! arrangement of axis-parallel lines and product (resp. sum) curves; inside
//! an axis cell the difference depends on a single count, `#{X > t1 t2}`
//! (resp. `#{X < t1 + t2}`), and is monotone or piecewise linear in it, so
//! each cell is settled by a handful of integer evaluations. The
//! exponential statistic only has axis-parallel jumps and is swept over all
//! pair gaps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{midpoints, GridSpec};
use crate::kind::TestKind;
use crate::sample::Sample;

/// How the supremum is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SupMode {
    Exact,
    Grid,
}

impl std::str::FromStr for SupMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(SupMode::Exact),
            "grid" => Ok(SupMode::Grid),
            other => Err(Error::domain(format!("unknown mode `{other}`"))),
        }
    }
}

/// Value of a supremum statistic together with where it was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupremumResult {
    pub value: f64,
    pub argmax: (f64, f64),
    pub mode: SupMode,
    pub evaluations: usize,
}

/// Settings for [`k_statistic`].
#[derive(Debug, Clone, Copy)]
pub struct StatisticConfig {
    pub mode: SupMode,
    pub grid: GridSpec,
    /// Largest sample accepted in exact mode; `None` selects the per-kind
    /// default (200 for Pareto and exponential, 100 for logistic).
    pub exact_cap: Option<usize>,
}

impl Default for StatisticConfig {
    fn default() -> Self {
        StatisticConfig {
            mode: SupMode::Exact,
            grid: GridSpec::default(),
            exact_cap: None,
        }
    }
}

impl StatisticConfig {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn grid(grid: GridSpec) -> Self {
        StatisticConfig {
            mode: SupMode::Grid,
            grid,
            exact_cap: None,
        }
    }

    pub fn cap(&self, kind: TestKind) -> usize {
        self.exact_cap.unwrap_or(match kind {
            TestKind::Logistic => 100,
            TestKind::Pareto | TestKind::Exponential => 200,
        })
    }

    /// Exact mode when the sample is within the cap, grid mode otherwise.
    pub fn auto(kind: TestKind, n: usize) -> Self {
        let cfg = Self::default();
        if n <= cfg.cap(kind) {
            cfg
        } else {
            Self::grid(GridSpec::default())
        }
    }
}

fn check_size(kind: TestKind, sample: &Sample) -> Result<()> {
    let m = kind.min_sample_size();
    if sample.len() < m {
        return Err(Error::domain(format!(
            "{kind} statistic needs at least {m} observations, got {}",
            sample.len()
        )));
    }
    Ok(())
}

/// `H_n^pa - G_n^pa` at `(t1, t2)`, both `> 1`.
pub fn diff_pa(sample: &Sample, t1: f64, t2: f64) -> Result<f64> {
    check_size(TestKind::Pareto, sample)?;
    if !TestKind::Pareto.in_domain(t1, t2) {
        return Err(Error::domain(format!("({t1}, {t2}) outside t1, t2 > 1")));
    }
    Ok(diff_pa_unchecked(sample, t1, t2))
}

fn diff_pa_unchecked(sample: &Sample, t1: f64, t2: f64) -> f64 {
    let n = sample.len() as f64;
    let a1 = sample.count_above(t1) as f64;
    let a2 = sample.count_above(t2) as f64;
    let am = sample.count_above(t1.max(t2)) as f64;
    let a12 = sample.count_above(t1 * t2) as f64;
    (a1 * a2 - am) / (n * (n - 1.0)) - a12 / n
}

/// `H_n^lo - G_n^lo` at `(t1, t2)`.
pub fn diff_lo(sample: &Sample, t1: f64, t2: f64) -> Result<f64> {
    check_size(TestKind::Logistic, sample)?;
    if t1.is_nan() || t2.is_nan() {
        return Err(Error::domain("NaN parameter"));
    }
    Ok(diff_lo_unchecked(sample, t1, t2))
}

fn diff_lo_unchecked(sample: &Sample, t1: f64, t2: f64) -> f64 {
    let n = sample.len() as i64;
    let s = t1 + t2;
    let hi = t1.max(t2);
    let lo = t1.min(t2);
    let c = |v: usize| v as i64;

    // ordered distinct triples (i, j, k) with X_i < s, X_j > t1, X_k > t2
    let l = c(sample.count_below(s));
    let a1 = c(sample.count_above(t1));
    let a2 = c(sample.count_above(t2));
    let h = l * a1 * a2
        - c(sample.count_between(t1, s)) * a2
        - c(sample.count_between(t2, s)) * a1
        - l * c(sample.count_above(hi))
        + 2 * c(sample.count_between(hi, s));

    // ordered distinct triples with X_i > s, X_j < t1, X_k < t2
    let r = c(sample.count_above(s));
    let b1 = c(sample.count_below(t1));
    let b2 = c(sample.count_below(t2));
    let g = r * b1 * b2
        - c(sample.count_between(s, t1)) * b2
        - c(sample.count_between(s, t2)) * b1
        - r * c(sample.count_below(lo))
        + 2 * c(sample.count_between(s, lo));

    (h - g) as f64 / (n * (n - 1) * (n - 2)) as f64
}

/// Pair counts behind the exponential statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ExCounts {
    pairs: u64,
    /// pairs with `min <= t1`
    p1: u64,
    /// pairs with `|X_i - X_j| <= t2`
    p2: u64,
    /// pairs with both values `> t1` and gap `<= t2`
    upper: u64,
}

/// Number of pairs in the sorted slice with gap `<= t2`.
fn close_pairs(sorted: &[f64], t2: f64) -> u64 {
    let mut count = 0u64;
    let mut i = 0;
    for j in 0..sorted.len() {
        while sorted[j] - sorted[i] > t2 {
            i += 1;
        }
        count += (j - i) as u64;
    }
    count
}

fn ex_counts(sample: &Sample, t1: f64, t2: f64) -> ExCounts {
    let sorted = sample.sorted();
    let n = sorted.len() as u64;
    let pairs = n * (n - 1) / 2;
    let above = sample.count_above(t1) as u64;
    let p1 = pairs - above * above.saturating_sub(1) / 2;
    let p2 = close_pairs(sorted, t2);
    let upper = close_pairs(&sorted[sorted.len() - above as usize..], t2);
    ExCounts {
        pairs,
        p1,
        p2,
        upper,
    }
}

/// `H_n^ex - G_n^ex` at `(t1, t2)`, both `> 0`.
pub fn diff_ex(sample: &Sample, t1: f64, t2: f64) -> Result<f64> {
    check_size(TestKind::Exponential, sample)?;
    if !TestKind::Exponential.in_domain(t1, t2) {
        return Err(Error::domain(format!("({t1}, {t2}) outside t1, t2 > 0")));
    }
    Ok(diff_ex_unchecked(sample, t1, t2))
}

fn diff_ex_unchecked(sample: &Sample, t1: f64, t2: f64) -> f64 {
    let c = ex_counts(sample, t1, t2);
    let pairs = c.pairs as f64;
    let p12 = (c.p2 - c.upper) as f64;
    (c.p1 as f64 / pairs) * (c.p2 as f64 / pairs) - p12 / pairs
}

/// The exponential difference with the opposite orientation in the first
/// coordinate, i.e. with `I{min > t1}` in place of `I{min <= t1}`.
pub fn diff_ex_upper(sample: &Sample, t1: f64, t2: f64) -> Result<f64> {
    check_size(TestKind::Exponential, sample)?;
    if !TestKind::Exponential.in_domain(t1, t2) {
        return Err(Error::domain(format!("({t1}, {t2}) outside t1, t2 > 0")));
    }
    let c = ex_counts(sample, t1, t2);
    let pairs = c.pairs as f64;
    Ok(((c.pairs - c.p1) as f64 / pairs) * (c.p2 as f64 / pairs) - c.upper as f64 / pairs)
}

/// Dispatches to the count-based evaluator for `kind`.
pub fn diff(kind: TestKind, sample: &Sample, t1: f64, t2: f64) -> Result<f64> {
    match kind {
        TestKind::Pareto => diff_pa(sample, t1, t2),
        TestKind::Logistic => diff_lo(sample, t1, t2),
        TestKind::Exponential => diff_ex(sample, t1, t2),
    }
}

fn diff_unchecked(kind: TestKind, sample: &Sample, t1: f64, t2: f64) -> f64 {
    match kind {
        TestKind::Pareto => diff_pa_unchecked(sample, t1, t2),
        TestKind::Logistic => diff_lo_unchecked(sample, t1, t2),
        TestKind::Exponential => diff_ex_unchecked(sample, t1, t2),
    }
}

/// Largest sample accepted by [`brute_force_diff`].
pub const BRUTE_FORCE_CAP: usize = 30;

/// `H_n - G_n` by direct enumeration of index tuples.
///
/// Pareto and logistic average the symmetrized kernels over all pairs and
/// triples. The exponential difference is a product of pair averages minus
/// a pair average, so it enumerates pairs for each factor.
pub fn brute_force_diff(kind: TestKind, sample: &Sample, t1: f64, t2: f64) -> Result<f64> {
    check_size(kind, sample)?;
    let n = sample.len();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::Refused(format!(
            "brute force limited to n <= {BRUTE_FORCE_CAP}, got {n}"
        )));
    }
    if !kind.in_domain(t1, t2) {
        return Err(Error::domain(format!("({t1}, {t2}) outside the {kind} domain")));
    }
    let x = sample.values();
    let ind = |b: bool| b as i64;
    Ok(match kind {
        TestKind::Pareto => {
            // 2 * Xi(x, y) summed over unordered pairs
            let mut twice = 0i64;
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = (x[i], x[j]);
                    twice += ind(a > t1) * ind(b > t2) + ind(a > t2) * ind(b > t1)
                        - ind(a > t1 * t2)
                        - ind(b > t1 * t2);
                }
            }
            let pairs = (n * (n - 1) / 2) as f64;
            twice as f64 / (2.0 * pairs)
        }
        TestKind::Logistic => {
            // 6 * Xi(x, y, z) summed over unordered triples
            let s = t1 + t2;
            let mut six = 0i64;
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        let v = [x[i], x[j], x[k]];
                        for p in PERMUTATIONS_3 {
                            let (a, b, c) = (v[p[0]], v[p[1]], v[p[2]]);
                            six += ind(a < s) * ind(b > t1) * ind(c > t2)
                                - ind(a > s) * ind(b < t1) * ind(c < t2);
                        }
                    }
                }
            }
            let triples = (n * (n - 1) * (n - 2) / 6) as f64;
            six as f64 / (6.0 * triples)
        }
        TestKind::Exponential => {
            let (mut p1, mut p2, mut p12) = (0i64, 0i64, 0i64);
            for i in 0..n {
                for j in i + 1..n {
                    let m = ind(x[i].min(x[j]) <= t1);
                    let g = ind((x[i] - x[j]).abs() <= t2);
                    p1 += m;
                    p2 += g;
                    p12 += m * g;
                }
            }
            let pairs = (n * (n - 1) / 2) as f64;
            (p1 as f64 / pairs) * (p2 as f64 / pairs) - p12 as f64 / pairs
        }
    })
}

const PERMUTATIONS_3: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// The supremum statistic `K_n` for `kind`.
pub fn k_statistic(kind: TestKind, sample: &Sample, config: &StatisticConfig) -> Result<SupremumResult> {
    check_size(kind, sample)?;
    match config.mode {
        SupMode::Exact => {
            let cap = config.cap(kind);
            if sample.len() > cap {
                return Err(Error::Refused(format!(
                    "exact {kind} supremum limited to n <= {cap} (got {}); use grid mode",
                    sample.len()
                )));
            }
            Ok(match kind {
                TestKind::Pareto => exact_pa(sample),
                TestKind::Logistic => exact_lo(sample),
                TestKind::Exponential => exact_ex(sample),
            })
        }
        SupMode::Grid => grid_sup(kind, sample, &config.grid),
    }
}

// ---------------------------------------------------------------------------
// exact Pareto supremum
// ---------------------------------------------------------------------------

fn distinct(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = values.to_vec();
    out.dedup();
    out
}

/// Picks `λ` in `(0, 1)` with `(a1 + λ d1)(a2 + λ d2)` at the midpoint of
/// `(lo, hi)`.
fn product_point(corner: (f64, f64), upper: (f64, f64), lo: f64, hi: f64) -> (f64, f64) {
    let target = 0.5 * (lo + hi);
    let at = |l: f64| {
        (
            corner.0 + l * (upper.0 - corner.0),
            corner.1 + l * (upper.1 - corner.1),
        )
    };
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let (x, y) = at(m);
        if x * y < target {
            a = m;
        } else {
            b = m;
        }
    }
    at(0.5 * (a + b))
}

fn exact_pa(sample: &Sample) -> SupremumResult {
    let sorted = sample.sorted();
    let n = sorted.len();
    let nn = n as i64;
    // cell corners: 1 and the distinct observations above 1
    let mut p = vec![1.0];
    p.extend(distinct(sorted).into_iter().filter(|&v| v > 1.0));
    let k_cells = p.len();
    let above: Vec<i64> = p.iter().map(|&v| sample.count_above(v) as i64).collect();

    // best |numerator| over n(n-1); numerator = a_k a_l - a_max - (n-1) c
    let mut best = (-1i64, 0usize, 0usize, true);
    for k in 0..k_cells {
        // products p_k p_l (resp. p_{k+1} p_{l+1}) grow with l: sweep pointers
        let mut hi_ptr = 0usize; // #{X <= p_k p_l}
        let mut lo_ptr = 0usize; // #{X < p_{k+1} p_{l+1}}
        for l in k..k_cells {
            let base = above[k] * above[l] - above[l.max(k)];
            let prod = p[k] * p[l];
            while hi_ptr < n && sorted[hi_ptr] <= prod {
                hi_ptr += 1;
            }
            let c_hi = (n - hi_ptr) as i64;
            let c_lo = if k + 1 < k_cells && l + 1 < k_cells {
                let prod_up = p[k + 1] * p[l + 1];
                while lo_ptr < n && sorted[lo_ptr] < prod_up {
                    lo_ptr += 1;
                }
                (n - lo_ptr) as i64
            } else {
                0
            };
            let v_hi = (base - (nn - 1) * c_hi).abs();
            let v_lo = (base - (nn - 1) * c_lo).abs();
            if v_hi > best.0 {
                best = (v_hi, k, l, true);
            }
            if v_lo > best.0 {
                best = (v_lo, k, l, false);
            }
        }
    }

    let (num, k, l, at_low_end) = best;
    let value = num as f64 / (nn * (nn - 1)) as f64;
    let max_obs = *sorted.last().expect("non-empty");
    let far = 2.0 * max_obs.max(1.0) + 1.0;
    let upper = |i: usize| if i + 1 < k_cells { p[i + 1] } else { far };
    let corner = (p[k], p[l]);
    let top = (upper(k), upper(l));
    let argmax = if at_low_end {
        if k > 0 && l > 0 {
            corner
        } else {
            // open edge at 1: keep the product below the next observation
            let base = corner.0 * corner.1;
            let next = sorted
                .iter()
                .copied()
                .find(|&v| v > base)
                .unwrap_or(f64::INFINITY);
            product_point(corner, top, base, next.min(top.0 * top.1))
        }
    } else {
        let cap = top.0 * top.1;
        let prev = sorted
            .iter()
            .rev()
            .copied()
            .find(|&v| v < cap)
            .unwrap_or(f64::NEG_INFINITY);
        product_point(corner, top, prev.max(corner.0 * corner.1), cap)
    };
    // symmetric statistic: report the point with t1 <= t2 as found
    SupremumResult {
        value,
        argmax,
        mode: SupMode::Exact,
        evaluations: k_cells * (k_cells + 1),
    }
}

// ---------------------------------------------------------------------------
// exact logistic supremum
// ---------------------------------------------------------------------------

struct LoCell {
    n: i64,
    a1: i64,
    a2: i64,
    b1: i64,
    b2: i64,
    c_hi: i64,
    c_lo: i64,
}

impl LoCell {
    /// `(H - G) * n(n-1)(n-2)` when `L = #{X < s}` and `R = n - L`.
    fn numerator(&self, l: i64) -> i64 {
        let r = self.n - l;
        let pos = |v: i64| v.max(0);
        let h = l * self.a1 * self.a2
            - pos(l - self.b1) * self.a2
            - pos(l - self.b2) * self.a1
            - l * (self.n - self.c_hi)
            + 2 * pos(l - self.c_hi);
        let g = r * self.b1 * self.b2
            - pos(r - self.a1) * self.b2
            - pos(r - self.a2) * self.b1
            - r * self.c_lo
            + 2 * pos(r - (self.n - self.c_lo));
        h - g
    }
}

fn exact_lo(sample: &Sample) -> SupremumResult {
    let sorted = sample.sorted();
    let n = sorted.len() as i64;
    let d = distinct(sorted);
    let kd = d.len();
    // cum[i] = #{X <= d[i-1]} = #{X < t} for t in the open gap i
    let mut cum = vec![0i64; kd + 1];
    for i in 0..kd {
        cum[i + 1] = sample.count_at_most(d[i]) as i64;
    }
    let left = |i: usize| if i == 0 { f64::NEG_INFINITY } else { d[i - 1] };
    let right = |i: usize| if i == kd { f64::INFINITY } else { d[i] };
    // gap index of a point just above / below a value
    let gap_above = |v: f64| if v == f64::NEG_INFINITY { 0 } else { d.partition_point(|&x| x <= v) };
    let gap_below = |v: f64| if v == f64::INFINITY { kd } else { d.partition_point(|&x| x < v) };

    let mut best = (-1i64, 0usize, 0usize, 0usize);
    let mut evaluations = 0usize;
    for j1 in 0..=kd {
        for j2 in j1..=kd {
            let cell = LoCell {
                n,
                a1: n - cum[j1],
                a2: n - cum[j2],
                b1: cum[j1],
                b2: cum[j2],
                c_hi: cum[j2.max(j1)],
                c_lo: cum[j1.min(j2)],
            };
            let i_lo = gap_above(left(j1) + left(j2));
            let i_hi = gap_below(right(j1) + right(j2));
            if i_lo > i_hi {
                continue;
            }
            for i in [i_lo, i_hi, j1.clamp(i_lo, i_hi), j2.clamp(i_lo, i_hi)] {
                evaluations += 1;
                let v = cell.numerator(cum[i]).abs();
                if v > best.0 {
                    best = (v, j1, j2, i);
                }
            }
        }
    }

    let denom = (n * (n - 1) * (n - 2)) as f64;
    let (num, j1, j2, gi) = best;
    let mut value = num as f64 / denom;

    // finite stand-ins for the unbounded cells
    let span = d[kd - 1] - d[0];
    let reach = 2.0 * d[0].abs().max(d[kd - 1].abs()) + span + 1.0;
    let fin_left = |i: usize| if i == 0 { d[0] - reach } else { d[i - 1] };
    let fin_right = |i: usize| if i == kd { d[kd - 1] + reach } else { d[i] };
    let (l1, r1, l2, r2) = (fin_left(j1), fin_right(j1), fin_left(j2), fin_right(j2));
    let s_lo = (l1 + l2).max(fin_left(gi));
    let s_hi = (r1 + r2).min(fin_right(gi));
    let target = 0.5 * (s_lo + s_hi);
    let lambda = ((target - l1 - l2) / ((r1 - l1) + (r2 - l2))).clamp(0.0, 1.0);
    let mut argmax = (l1 + lambda * (r1 - l1), l2 + lambda * (r2 - l2));

    // three lines through one point: t1 and t2 at observations whose sum
    // is itself an observation
    for &a in &d {
        for &b in &d {
            let s = a + b;
            if d.binary_search_by(|x| x.total_cmp(&s)).is_ok() {
                evaluations += 1;
                let v = diff_lo_unchecked(sample, a, b).abs();
                if v > value {
                    value = v;
                    argmax = (a, b);
                }
            }
        }
    }

    SupremumResult {
        value,
        argmax,
        mode: SupMode::Exact,
        evaluations,
    }
}

// ---------------------------------------------------------------------------
// exact exponential supremum
// ---------------------------------------------------------------------------

fn exact_ex(sample: &Sample) -> SupremumResult {
    let sorted = sample.sorted();
    let n = sorted.len();
    let pairs_total = (n * (n - 1) / 2) as i64;
    let d = distinct(sorted);

    // every pair with its gap and the rank (in `d`) of its smaller value
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let rank = d.partition_point(|&x| x < sorted[i]);
        for j in i + 1..n {
            pairs.push((sorted[j] - sorted[i], rank));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // t1 candidates: observations in the domain, plus just above zero when
    // some observations are not positive
    let mut t1s: Vec<(f64, usize)> = Vec::new(); // (t1, number of distinct values <= t1)
    let first_pos = d.partition_point(|&x| x <= 0.0);
    if first_pos > 0 {
        let stand_in = if first_pos < d.len() { 0.5 * d[first_pos] } else { 1.0 };
        t1s.push((stand_in, first_pos));
    }
    for (r, &v) in d.iter().enumerate().skip(first_pos) {
        t1s.push((v, r + 1));
    }
    let smallest_gap = pairs.iter().map(|p| p.0).find(|&g| g > 0.0);

    let evaluated: Vec<(i64, f64, f64)> = t1s
        .par_iter()
        .map(|&(t1, ranks_at_most)| {
            let above = sample.count_above(t1) as i64;
            let p1 = pairs_total - above * (above - 1).max(0) / 2;
            let mut p2 = 0i64;
            let mut upper = 0i64;
            let mut best = (-1i64, t1, 1.0);
            let mut idx = 0;
            while idx < pairs.len() {
                let gap = pairs[idx].0;
                while idx < pairs.len() && pairs[idx].0 == gap {
                    p2 += 1;
                    if pairs[idx].1 >= ranks_at_most {
                        upper += 1;
                    }
                    idx += 1;
                }
                // (H - G) * pairs^2
                let num = (p1 * p2 - pairs_total * (p2 - upper)).abs();
                if num > best.0 {
                    let t2 = if gap > 0.0 {
                        gap
                    } else {
                        0.5 * smallest_gap.unwrap_or(1.0)
                    };
                    best = (num, t1, t2);
                }
            }
            best
        })
        .collect();

    let mut best = (0i64, (d[d.len() - 1].max(1.0), 1.0));
    for &(num, t1, t2) in &evaluated {
        if num > best.0 {
            best = (num, (t1, t2));
        }
    }
    let denom = (pairs_total * pairs_total) as f64;
    SupremumResult {
        value: best.0 as f64 / denom,
        argmax: best.1,
        mode: SupMode::Exact,
        evaluations: t1s.len() * pairs.len(),
    }
}

// ---------------------------------------------------------------------------
// grid mode
// ---------------------------------------------------------------------------

/// Empirical quantiles of sorted `values` at levels `(i + 1/2) / m`.
fn quantile_axis(sorted: &[f64], m: usize) -> Vec<f64> {
    if sorted.is_empty() {
        return Vec::new();
    }
    let last = (sorted.len() - 1) as f64;
    (0..m)
        .map(|i| {
            let pos = last * (i as f64 + 0.5) / m as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let w = pos - lo as f64;
            sorted[lo] * (1.0 - w) + sorted[hi] * w
        })
        .collect()
}

/// Sorted pairwise gaps, subsampled deterministically for large samples.
fn gap_distribution(sorted: &[f64]) -> Vec<f64> {
    const LIMIT: usize = 1_000_000;
    let n = sorted.len();
    let mut gaps = Vec::new();
    if n * (n - 1) / 2 <= LIMIT {
        for i in 0..n {
            for j in i + 1..n {
                gaps.push(sorted[j] - sorted[i]);
            }
        }
    } else {
        let offsets = (LIMIT / n).max(1);
        let stride = ((n - 1) / offsets).max(1);
        for o in (1..n).step_by(stride) {
            for i in 0..n - o {
                gaps.push(sorted[i + o] - sorted[i]);
            }
        }
    }
    gaps.sort_by(f64::total_cmp);
    gaps
}

fn grid_axes(kind: TestKind, sample: &Sample, spec: &GridSpec) -> (Vec<f64>, Vec<f64>) {
    if let Some([(a, b), (c, e)]) = spec.bounds {
        return (midpoints(a, b, spec.n1), midpoints(c, e, spec.n2));
    }
    let sorted = sample.sorted();
    match kind {
        TestKind::Pareto => {
            let mut support = vec![1.0];
            support.extend(sorted.iter().copied().filter(|&v| v > 1.0));
            let axis = |m| {
                quantile_axis(&support, m)
                    .into_iter()
                    .map(|v: f64| if v > 1.0 { v } else { 1.0 + 1e-9 })
                    .collect::<Vec<_>>()
            };
            (axis(spec.n1), axis(spec.n2))
        }
        TestKind::Logistic => (quantile_axis(sorted, spec.n1), quantile_axis(sorted, spec.n2)),
        TestKind::Exponential => {
            let positive: Vec<f64> = sorted.iter().copied().filter(|&v| v > 0.0).collect();
            let gaps: Vec<f64> = gap_distribution(sorted)
                .into_iter()
                .filter(|&g| g > 0.0)
                .collect();
            let fix = |v: Vec<f64>| -> Vec<f64> {
                if v.is_empty() {
                    vec![1.0]
                } else {
                    v
                }
            };
            (
                fix(quantile_axis(&positive, spec.n1)),
                fix(quantile_axis(&gaps, spec.n2)),
            )
        }
    }
}

/// Maximum of `|diff|` over the product grid; ties resolve to the first
/// point in row-major order.
fn scan(kind: TestKind, sample: &Sample, xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64, usize)> {
    let rows: Vec<Option<(f64, usize)>> = xs
        .par_iter()
        .map(|&t1| {
            let mut best: Option<(f64, usize)> = None;
            for (j, &t2) in ys.iter().enumerate() {
                if !kind.in_domain(t1, t2) {
                    continue;
                }
                let v = diff_unchecked(kind, sample, t1, t2).abs();
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, j));
                }
            }
            best
        })
        .collect();
    let mut best: Option<(f64, f64, f64, usize)> = None;
    for (i, row) in rows.iter().enumerate() {
        if let Some((v, j)) = *row {
            if best.is_none_or(|b| v > b.0) {
                best = Some((v, xs[i], ys[j], i * ys.len() + j));
            }
        }
    }
    best
}

fn zoom_axis(axis: &[f64], idx: usize) -> Vec<f64> {
    let lo = axis[idx.saturating_sub(1)];
    let hi = axis[(idx + 1).min(axis.len() - 1)];
    if hi <= lo {
        return vec![axis[idx]];
    }
    (0..=20).map(|k| lo + (hi - lo) * k as f64 / 20.0).collect()
}

fn grid_sup(kind: TestKind, sample: &Sample, spec: &GridSpec) -> Result<SupremumResult> {
    if spec.is_empty() {
        return Err(Error::domain("grid mode needs a non-empty grid"));
    }
    let (xs, ys) = grid_axes(kind, sample, spec);
    let mut evaluations = xs.len() * ys.len();
    let Some((mut value, mut t1, mut t2, flat)) = scan(kind, sample, &xs, &ys) else {
        return Err(Error::domain(format!("grid {spec} has no point inside the {kind} domain")));
    };
    let (i, j) = (flat / ys.len(), flat % ys.len());
    let zx = zoom_axis(&xs, i);
    let zy = zoom_axis(&ys, j);
    evaluations += zx.len() * zy.len();
    if let Some((v, a, b, _)) = scan(kind, sample, &zx, &zy) {
        if v > value {
            value = v;
            t1 = a;
            t2 = b;
        }
    }
    Ok(SupremumResult {
        value,
        argmax: (t1, t2),
        mode: SupMode::Grid,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn pa_examples() {
        let x = s(&[2.0, 4.0, 8.0]);
        assert!(diff_pa(&x, 1.0 + 1e-9, 1.0 + 1e-9).unwrap().abs() < 1e-15);
        assert!(diff_pa(&x, 2.5, 3.0).unwrap().abs() < 1e-15);
        assert!((diff_pa(&x, 1.5, 1.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(diff_pa(&x, 1.0, 2.0).is_err());
        assert!(diff_pa(&s(&[2.0]), 2.0, 2.0).is_err());
    }

    #[test]
    fn lo_examples() {
        let x = s(&[-1.0, 0.0, 2.0]);
        let v = diff_lo(&x, -0.5, 0.5).unwrap();
        let b = brute_force_diff(TestKind::Logistic, &x, -0.5, 0.5).unwrap();
        assert!((v - b).abs() < 1e-15);
        // by hand: H counts (i,j,k) with X_i < 0, X_j > -0.5, X_k > 0.5:
        // i = -1, j in {0, 2}, k = 2 distinct from j -> j = 0: 1 triple.
        // G counts X_i > 0, X_j < -0.5, X_k < 0.5: i = 2, j = -1, k = 0: 1.
        assert_eq!(v, 0.0);
        assert_eq!(diff_lo(&x, 1e9, 0.3).unwrap(), 0.0);
        assert_eq!(diff_lo(&x, 0.3, -0.7).unwrap(), diff_lo(&x, -0.7, 0.3).unwrap());
    }

    #[test]
    fn ex_examples() {
        let x = s(&[0.1, 0.5, 1.2, 2.0]);
        assert_eq!(diff_ex(&x, 2.0, 1.9).unwrap(), 0.0);
        let v = diff_ex(&x, 0.6, 0.8).unwrap();
        // pairs: (0.1,0.5) g.4 (0.1,1.2) g1.1 (0.1,2) g1.9 (0.5,1.2) g.7
        // (0.5,2) g1.5 (1.2,2) g.8 -> P1 = 5, P2 = 3, P12 = 2
        let want = (5.0 / 6.0) * (3.0 / 6.0) - 2.0 / 6.0;
        assert!((v - want).abs() < 1e-15);
        assert!((diff_ex_upper(&x, 0.6, 0.8).unwrap() + v).abs() < 1e-15);
        assert!(diff_ex(&x, 0.0, 1.0).is_err());
    }

    #[test]
    fn brute_force_guards() {
        let big = Sample::new((1..=31).map(|i| i as f64 + 1.0).collect()).unwrap();
        assert!(matches!(
            brute_force_diff(TestKind::Pareto, &big, 2.0, 2.0),
            Err(Error::Refused(_))
        ));
        let x = s(&[2.0, 4.0, 8.0]);
        assert_eq!(brute_force_diff(TestKind::Pareto, &x, 1e6, 1e6).unwrap(), 0.0);
    }

    #[test]
    fn exact_pareto_small() {
        let x = s(&[2.0, 4.0, 8.0]);
        let r = k_statistic(TestKind::Pareto, &x, &StatisticConfig::exact()).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-15);
        let at = diff_pa(&x, r.argmax.0, r.argmax.1).unwrap().abs();
        assert!((at - r.value).abs() < 1e-15);
    }

    #[test]
    fn exact_cap_refuses() {
        let x = Sample::new((0..101).map(|i| i as f64).collect()).unwrap();
        let err = k_statistic(TestKind::Logistic, &x, &StatisticConfig::exact()).unwrap_err();
        assert!(matches!(err, Error::Refused(_)));
        let cfg = StatisticConfig {
            exact_cap: Some(500),
            ..StatisticConfig::exact()
        };
        assert!(k_statistic(TestKind::Logistic, &x, &cfg).is_ok());
    }

    #[test]
    fn grid_never_exceeds_exact() {
        let x = s(&[0.3, 1.7, 0.2, 2.9, 0.8, 1.1, 0.05, 4.2, 0.6]);
        for kind in [TestKind::Logistic, TestKind::Exponential] {
            let e = k_statistic(kind, &x, &StatisticConfig::exact()).unwrap();
            let g = k_statistic(kind, &x, &StatisticConfig::grid(GridSpec::new(64, 64))).unwrap();
            assert!(g.value <= e.value + 1e-15, "{kind}: {} > {}", g.value, e.value);
        }
    }

    #[test]
    fn empty_grid_is_an_error() {
        let x = s(&[1.5, 2.0, 3.0]);
        assert!(k_statistic(TestKind::Pareto, &x, &StatisticConfig::grid(GridSpec::new(0, 0))).is_err());
    }
}
