use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Which characterization the test is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TestKind {
    /// Multiplicative lack-of-memory of the Pareto law, kernel degree 2.
    Pareto,
    /// Functional equation of the logistic law, kernel degree 3.
    Logistic,
    /// Independence of `min(X, Y)` and `|X - Y|` for the exponential law,
    /// kernel degree 4.
    Exponential,
}

impl TestKind {
    pub const ALL: [TestKind; 3] = [TestKind::Pareto, TestKind::Logistic, TestKind::Exponential];

    /// Degree `m` of the U-statistic kernel.
    pub fn degree(self) -> usize {
        match self {
            TestKind::Pareto => 2,
            TestKind::Logistic => 3,
            TestKind::Exponential => 4,
        }
    }

    /// Smallest sample the statistic accepts.
    pub fn min_sample_size(self) -> usize {
        match self {
            TestKind::Pareto => 2,
            TestKind::Logistic => 3,
            // The evaluator is defined for pairs; the degree-4 kernel only
            // matters for the asymptotics.
            TestKind::Exponential => 2,
        }
    }

    /// Whether `(t1, t2)` lies in the open parameter domain.
    pub fn in_domain(self, t1: f64, t2: f64) -> bool {
        if t1.is_nan() || t2.is_nan() {
            return false;
        }
        match self {
            TestKind::Pareto => t1 > 1.0 && t2 > 1.0,
            TestKind::Logistic => true,
            TestKind::Exponential => t1 > 0.0 && t2 > 0.0,
        }
    }

    /// Whether `(t1, t2)` lies in the closure of the parameter domain, where
    /// the projection surfaces are still defined by continuity.
    pub fn in_closure(self, t1: f64, t2: f64) -> bool {
        if t1.is_nan() || t2.is_nan() {
            return false;
        }
        match self {
            TestKind::Pareto => t1 >= 1.0 && t2 >= 1.0,
            TestKind::Logistic => true,
            TestKind::Exponential => t1 >= 0.0 && t2 >= 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Pareto => "pareto",
            TestKind::Logistic => "logistic",
            TestKind::Exponential => "exponential",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pareto" | "pa" => Ok(TestKind::Pareto),
            "logistic" | "lo" => Ok(TestKind::Logistic),
            "exponential" | "exp" | "ex" => Ok(TestKind::Exponential),
            other => Err(Error::Domain(format!("unknown test kind `{other}`"))),
        }
    }
}
