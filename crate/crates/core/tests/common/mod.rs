//! Shared helpers for the integration tests.
#![allow(dead_code)]

use chargof::empirical::diff;
use chargof::{Sample, TestKind};

/// Sorted, deduplicated copy.
pub fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Every breakpoint, every midpoint between consecutive breakpoints and one
/// point beyond each end.
pub fn refine(breaks: Vec<f64>, floor: Option<f64>) -> Vec<f64> {
    let mut b = sorted_unique(breaks);
    if let Some(f) = floor {
        b.retain(|&x| x > f);
        b.insert(0, f);
    }
    let mut out = Vec::with_capacity(2 * b.len() + 2);
    for w in b.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = b.last() {
        out.push(last);
        out.push(last + 1.0 + last.abs());
    }
    if floor.is_none() {
        if let Some(&first) = b.first() {
            out.push(first - 1.0 - first.abs());
        }
    }
    if let Some(f) = floor {
        out.retain(|&x| x > f);
    }
    out
}

/// Supremum of `|diff|` by walking every piece of the arrangement of jump
/// lines: for each `t1` on or between the `t1` breakpoints, every `t2` on or
/// between the breakpoints of the section at that `t1`.
pub fn arrangement_sup(kind: TestKind, sample: &Sample) -> f64 {
    let d = sorted_unique(sample.values().to_vec());
    let mut best: f64 = 0.0;
    match kind {
        TestKind::Pareto => {
            let mut b1 = d.clone();
            for &a in &d {
                for &c in &d {
                    if c > a && a > 1.0 {
                        b1.push(c / a);
                    }
                }
            }
            for t1 in refine(b1, Some(1.0)) {
                let mut b2 = d.clone();
                b2.extend(d.iter().map(|&c| c / t1));
                for t2 in refine(b2, Some(1.0)) {
                    best = best.max(diff(kind, sample, t1, t2).unwrap().abs());
                }
            }
        }
        TestKind::Logistic => {
            let mut b1 = d.clone();
            for &a in &d {
                for &c in &d {
                    b1.push(c - a);
                }
            }
            for t1 in refine(b1, None) {
                let mut b2 = d.clone();
                b2.extend(d.iter().map(|&c| c - t1));
                for t2 in refine(b2, None) {
                    best = best.max(diff(kind, sample, t1, t2).unwrap().abs());
                }
            }
        }
        TestKind::Exponential => {
            let mut gaps = Vec::new();
            for &a in &d {
                for &c in &d {
                    if c > a {
                        gaps.push(c - a);
                    }
                }
            }
            let t1s = refine(d.clone(), Some(0.0));
            let t2s = refine(gaps, Some(0.0));
            for &t1 in &t1s {
                for &t2 in &t2s {
                    best = best.max(diff(kind, sample, t1, t2).unwrap().abs());
                }
            }
        }
    }
    best
}
