//! Grid specifications such as `256x256` or `100x100@1:4,1:4`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resolution of a two-dimensional evaluation grid, optionally with an
/// explicit box. Without a box the axes are placed on quantiles (of the
/// data for statistics, of the null law for surfaces).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n1: usize,
    pub n2: usize,
    pub bounds: Option<[(f64, f64); 2]>,
}

/// Largest accepted number of grid points per axis.
pub const MAX_AXIS: usize = 100_000;

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n1: 256,
            n2: 256,
            bounds: None,
        }
    }
}

impl GridSpec {
    pub fn new(n1: usize, n2: usize) -> Self {
        GridSpec {
            n1,
            n2,
            bounds: None,
        }
    }

    pub fn with_bounds(mut self, t1: (f64, f64), t2: (f64, f64)) -> Self {
        self.bounds = Some([t1, t2]);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.n1 == 0 || self.n2 == 0
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n1, self.n2)?;
        if let Some([(a, b), (c, d)]) = self.bounds {
            write!(f, "@{a}:{b},{c}:{d}")?;
        }
        Ok(())
    }
}

fn parse_count(s: &str) -> Result<usize> {
    let s = s.trim();
    let v: usize = s
        .parse()
        .map_err(|_| Error::domain(format!("bad grid size `{s}`")))?;
    if v > MAX_AXIS {
        return Err(Error::domain(format!("grid size {v} exceeds {MAX_AXIS}")));
    }
    Ok(v)
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::domain(format!("bad grid range `{s}`, expected lo:hi")))?;
    let lo: f64 = a
        .trim()
        .parse()
        .map_err(|_| Error::domain(format!("bad grid bound `{a}`")))?;
    let hi: f64 = b
        .trim()
        .parse()
        .map_err(|_| Error::domain(format!("bad grid bound `{b}`")))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(format!("grid range `{s}` must satisfy lo < hi")));
    }
    Ok((lo, hi))
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (dims, bounds) = match s.split_once('@') {
            Some((d, b)) => (d, Some(b)),
            None => (s, None),
        };
        let (a, b) = dims
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::domain(format!("bad grid `{s}`, expected <n1>x<n2>")))?;
        let mut spec = GridSpec::new(parse_count(a)?, parse_count(b)?);
        if let Some(b) = bounds {
            let (r1, r2) = b
                .split_once(',')
                .ok_or_else(|| Error::domain(format!("bad grid box `{b}`")))?;
            spec.bounds = Some([parse_range(r1)?, parse_range(r2)?]);
        }
        Ok(spec)
    }
}

/// `n` points uniformly spaced over the open interval, at cell midpoints.
pub(crate) fn midpoints(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
        .collect()
}
