//! Samples and the plain-text sample format.
//!
//! The format is UTF-8, one decimal number per line. Blank lines are
//! skipped and a line whose first non-blank character is `#` is a comment.

use crate::error::{Error, Result};

/// An ordered collection of finite observations with a cached sorted copy.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    sorted: Vec<f64>,
    ties: usize,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "observation {} is not finite ({})",
                i + 1,
                values[i]
            )));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        // -0.0 and 0.0 compare equal as data
        for v in &mut sorted {
            if *v == 0.0 {
                *v = 0.0;
            }
        }
        let ties = sorted.windows(2).filter(|w| w[0] == w[1]).count();
        Ok(Sample {
            values,
            sorted,
            ties,
        })
    }

    /// Parses the newline-delimited text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("expected a decimal number, found `{}`", truncate(line)),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("value `{}` is not finite", truncate(line)),
                });
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                message: "no observations found".into(),
            });
        }
        Sample::new(values)
    }

    /// Parses raw bytes, rejecting invalid UTF-8.
    pub fn parse_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| {
            let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
            Error::Parse {
                line,
                message: "input is not valid UTF-8".into(),
            }
        })?;
        Sample::parse(text)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Observations in their original order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Observations in nondecreasing order.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Number of adjacent equal pairs in the sorted view.
    pub fn ties(&self) -> usize {
        self.ties
    }

    /// Applies `f` to every observation.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Sample> {
        Sample::new(self.values.iter().map(|&v| f(v)).collect())
    }

    /// `#{X_i > t}`.
    pub fn count_above(&self, t: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&x| x <= t)
    }

    /// `#{X_i >= t}`.
    pub fn count_at_least(&self, t: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&x| x < t)
    }

    /// `#{X_i < t}`.
    pub fn count_below(&self, t: f64) -> usize {
        self.sorted.partition_point(|&x| x < t)
    }

    /// `#{X_i <= t}`.
    pub fn count_at_most(&self, t: f64) -> usize {
        self.sorted.partition_point(|&x| x <= t)
    }

    /// `#{a < X_i < b}`.
    pub fn count_between(&self, a: f64, b: f64) -> usize {
        if a < b {
            self.count_below(b).saturating_sub(self.count_at_most(a))
        } else {
            0
        }
    }
}

fn truncate(s: &str) -> String {
    if s.chars().count() > 40 {
        let head: String = s.chars().take(40).collect();
        format!("{head}...")
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_with_comments_and_blanks() {
        let s = Sample::parse("# header\n1.5\n\n  2e0 \n# trailing\n-3\n").unwrap();
        assert_eq!(s.values(), &[1.5, 2.0, -3.0]);
        assert_eq!(s.sorted(), &[-3.0, 1.5, 2.0]);
    }

    #[test]
    fn parse_reports_line_numbers() {
        match Sample::parse("1\n2\nabc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match Sample::parse("1\nNaN\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match Sample::parse("inf") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        assert!(Sample::parse("# nothing\n\n").is_err());
        assert!(Sample::parse_bytes(b"1\n\xff\n").is_err());
    }

    #[test]
    fn counts() {
        let s = Sample::new(vec![1.0, 2.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.ties(), 1);
        assert_eq!(s.count_above(2.0), 1);
        assert_eq!(s.count_at_least(2.0), 3);
        assert_eq!(s.count_below(2.0), 1);
        assert_eq!(s.count_at_most(2.0), 3);
        assert_eq!(s.count_between(1.0, 3.0), 2);
        assert_eq!(s.count_between(3.0, 1.0), 0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
    }
}
