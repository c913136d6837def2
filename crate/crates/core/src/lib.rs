//! Characterization-based goodness-of-fit tests for the Pareto, logistic
//! and exponential laws.
//!
//! The crate provides the three two-dimensional supremum statistics, the
//! projection variance surfaces behind their large-deviation asymptotics,
//! local Bahadur efficiencies against a set of close alternatives, and a
//! Monte Carlo engine for critical values, p-values and power.
//!
//! ```
//! use chargof::{k_statistic, Sample, StatisticConfig, TestKind};
//! use chargof::montecarlo::{NullDistribution, SimPlan};
//!
//! let sample = Sample::parse("1.3\n2.0\n1.1\n4.8\n1.7\n")?;
//! let k = k_statistic(TestKind::Pareto, &sample, &StatisticConfig::exact())?;
//! let null = NullDistribution::simulate(&SimPlan::new(TestKind::Pareto, sample.len(), 1_000, 7, 0.05))?;
//! let p = null.p_value(k.value);
//! assert!(p > 0.0 && p <= 1.0);
//! # Ok::<(), chargof::Error>(())
//! ```

pub mod bahadur;
pub mod distributions;
pub mod empirical;
pub mod error;
pub mod grid;
pub mod kind;
pub mod ks;
pub mod montecarlo;
pub mod optimize;
pub mod projection;
pub mod quadrature;
pub mod sample;
pub mod streams;

pub use distributions::{Alternative, NullFamily};
pub use empirical::{k_statistic, StatisticConfig, SupMode, SupremumResult};
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use kind::TestKind;
pub use sample::Sample;
