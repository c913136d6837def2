//! Kernel projections `ξ(s; t1, t2)`, the variance surfaces
//! `σ²(t1, t2) = E ξ²(X; t1, t2)` under the unit null, and their suprema.
//!
//! All projections are taken of the `H - G` kernel, the orientation used by
//! the statistic evaluators in [`crate::empirical`].

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{Alternative, NullFamily};
use crate::error::{Error, Result};
use crate::grid::{midpoints, GridSpec};
use crate::kind::TestKind;
use crate::optimize::MultiStart;
use crate::quadrature::{unit_to_support, Integrator};

fn check_point(kind: TestKind, t1: f64, t2: f64) -> Result<()> {
    if kind.in_closure(t1, t2) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "({t1}, {t2}) outside the closed {kind} parameter domain"
        )))
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn xi_pa(s: f64, t1: f64, t2: f64) -> f64 {
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    -0.5 / (t1 * t2) + ind(s > t1) * 0.5 / t2 + ind(s > t2) * 0.5 / t1 - 0.5 * ind(s > t1 * t2)
}

fn xi_lo(s: f64, t1: f64, t2: f64) -> f64 {
    let (sp1, sp2, sp12) = (softplus(t1), softplus(t2), softplus(t1 + t2));
    // the four constant pieces, written with P(X > t) = e^{-softplus(t)}
    let base = (-sp12).exp() - 2.0 * (-sp1 - sp2 - sp12).exp();
    let mut v = base;
    if s > t1 {
        v -= (-softplus(-t2) + sp1 - sp12).exp();
    }
    if s > t2 {
        v -= (-softplus(-t1) + sp2 - sp12).exp();
    }
    if s > t1 + t2 {
        v += (sp12 - sp1 - sp2).exp();
    }
    -v / 3.0
}

fn xi_ex(s: f64, t1: f64, t2: f64) -> f64 {
    let e = f64::exp;
    let mut v = 0.5 * (e(-2.0 * t1 - t2) - e(-s - 2.0 * t1 - t2));
    if s > t2 {
        v += 0.5 * (e(-s - 2.0 * t1 + t2) - e(-2.0 * t1));
    }
    if s > t1 {
        v -= 0.5 * (e(-t1 - t2) - e(-s - t2));
        if s > t1 + t2 {
            v -= 0.5 * (e(-s + t2) - e(-t1));
        }
    }
    -v
}

/// Projection of the centred kernel onto its first argument, evaluated at
/// `s`.
pub fn xi(kind: TestKind, s: f64, t1: f64, t2: f64) -> Result<f64> {
    check_point(kind, t1, t2)?;
    if s.is_nan() {
        return Err(Error::domain("NaN argument"));
    }
    Ok(xi_unchecked(kind, s, t1, t2))
}

pub(crate) fn xi_unchecked(kind: TestKind, s: f64, t1: f64, t2: f64) -> f64 {
    match kind {
        TestKind::Pareto => xi_pa(s, t1, t2),
        TestKind::Logistic => xi_lo(s, t1, t2),
        TestKind::Exponential => xi_ex(s, t1, t2),
    }
}

/// Points where `ξ(·; t1, t2)` jumps.
pub(crate) fn jumps(kind: TestKind, t1: f64, t2: f64) -> [f64; 3] {
    match kind {
        TestKind::Pareto => [t1, t2, t1 * t2],
        TestKind::Logistic | TestKind::Exponential => [t1, t2, t1 + t2],
    }
}

/// How [`sigma2`] evaluates a kind's variance surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Form {
    Closed,
    Quadrature,
}

/// The variance surface of one statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarianceSurface {
    pub kind: TestKind,
    pub form: Form,
}

impl VarianceSurface {
    pub fn of(kind: TestKind) -> Self {
        let form = match kind {
            TestKind::Logistic => Form::Quadrature,
            TestKind::Pareto | TestKind::Exponential => Form::Closed,
        };
        VarianceSurface { kind, form }
    }

    pub fn eval(&self, t1: f64, t2: f64) -> Result<f64> {
        sigma2(self.kind, t1, t2)
    }
}

fn sigma2_pa(t1: f64, t2: f64) -> f64 {
    let (a, b) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    (-1.0 + a - b + a * b) / (4.0 * a * a * b * b)
}

fn sigma2_ex(t1: f64, t2: f64) -> f64 {
    let e = f64::exp;
    if t1 <= t2 {
        let f = -(-t1).exp_m1();
        f * f * (-e(-3.0 * t1 - 3.0 * t2) - e(-2.0 * t1 - 3.0 * t2) + e(-3.0 * t1 - 2.0 * t2) + e(-3.0 * t1 - t2))
            / 12.0
    } else {
        let f = -(-t2).exp_m1();
        f * f * (-e(-5.0 * t1 - t2) + e(-4.0 * t1 - t2) - e(-5.0 * t1) + e(-3.0 * t1 - t2)) / 12.0
    }
}

/// `E ξ²` by quadrature over the null support, whatever the kind.
pub fn sigma2_quadrature(kind: TestKind, t1: f64, t2: f64) -> Result<f64> {
    check_point(kind, t1, t2)?;
    let null = NullFamily::standard(kind);
    Integrator::with_abs_tol(1e-12).integrate_support(
        kind,
        |s| {
            let v = xi_unchecked(kind, s, t1, t2);
            v * v * null.pdf(s)
        },
        &jumps(kind, t1, t2),
    )
}

/// Projection variance `σ²(t1, t2)`.
pub fn sigma2(kind: TestKind, t1: f64, t2: f64) -> Result<f64> {
    check_point(kind, t1, t2)?;
    Ok(match kind {
        TestKind::Pareto => sigma2_pa(t1, t2),
        TestKind::Exponential => sigma2_ex(t1, t2),
        TestKind::Logistic => sigma2_quadrature(kind, t1, t2)?,
    })
}

/// A global maximum over the parameter domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMax {
    pub argmax: (f64, f64),
    pub value: f64,
    pub evaluations: usize,
}

/// Maps the unit square onto the parameter domain of `kind` through the
/// unit null quantile.
pub fn from_unit(kind: TestKind, u: (f64, f64)) -> (f64, f64) {
    (unit_to_support(kind, u.0).0, unit_to_support(kind, u.1).0)
}

/// Maximizes `f` over the parameter domain of `kind` with the multi-start
/// search on the probability scale.
pub fn maximize_over_domain<F>(kind: TestKind, search: &MultiStart, f: F) -> SurfaceMax
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let r = search.maximize(|u1, u2| {
        let (t1, t2) = from_unit(kind, (u1, u2));
        if kind.in_domain(t1, t2) {
            f(t1, t2)
        } else {
            f64::NEG_INFINITY
        }
    });
    SurfaceMax {
        argmax: from_unit(kind, r.u),
        value: r.value,
        evaluations: r.evaluations,
    }
}

/// `σ₀² = sup σ²` with its location, using the default search settings.
pub fn sigma2_sup(kind: TestKind) -> SurfaceMax {
    sigma2_sup_with(kind, &MultiStart::default())
}

pub fn sigma2_sup_with(kind: TestKind, search: &MultiStart) -> SurfaceMax {
    maximize_over_domain(kind, search, |t1, t2| {
        sigma2(kind, t1, t2).unwrap_or(f64::NEG_INFINITY)
    })
}

/// `∫ ξ(x; t1, t2) h(x) dx` for the score `h` of `alt`: the derivative at
/// `θ = 0` of the mean of one projection term under the alternative.
pub fn a_prime(kind: TestKind, alt: &Alternative, t1: f64, t2: f64) -> Result<f64> {
    if alt.null_kind() != kind {
        return Err(Error::domain(format!(
            "alternative {alt} does not perturb the {kind} null"
        )));
    }
    check_point(kind, t1, t2)?;
    Integrator::with_abs_tol(1e-11).integrate_support(
        kind,
        |s| {
            let h = alt.score(s);
            if h == 0.0 {
                0.0
            } else {
                xi_unchecked(kind, s, t1, t2) * h
            }
        },
        &jumps(kind, t1, t2),
    )
}

/// Surface written by [`surface_dump`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    Variance,
    APrime(Alternative),
}

impl Surface {
    pub fn eval(&self, kind: TestKind, t1: f64, t2: f64) -> Result<f64> {
        match self {
            Surface::Variance => sigma2(kind, t1, t2),
            Surface::APrime(alt) => a_prime(kind, alt, t1, t2),
        }
    }
}

/// Grid axes for a surface: null-quantile midpoints, or a uniform grid over
/// the requested box.
pub fn surface_axes(kind: TestKind, grid: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    match grid.bounds {
        Some([(a, b), (c, d)]) => {
            let xs = midpoints(a, b, grid.n1);
            let ys = midpoints(c, d, grid.n2);
            if let (Some(&x), Some(&y)) = (xs.first(), ys.first()) {
                check_point(kind, x, y)?;
            }
            Ok((xs, ys))
        }
        None => {
            let axis = |n| {
                midpoints(0.0, 1.0, n)
                    .into_iter()
                    .map(|u| unit_to_support(kind, u).0)
                    .collect::<Vec<_>>()
            };
            Ok((axis(grid.n1), axis(grid.n2)))
        }
    }
}

/// Writes `t1,t2,value` rows in row-major order and returns the row count.
pub fn surface_dump<W: Write>(
    kind: TestKind,
    which: Surface,
    grid: &GridSpec,
    out: &mut W,
) -> Result<usize> {
    if let Surface::APrime(alt) = which {
        if alt.null_kind() != kind {
            return Err(Error::domain(format!(
                "alternative {alt} does not perturb the {kind} null"
            )));
        }
    }
    let (xs, ys) = surface_axes(kind, grid)?;
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&t1| ys.iter().map(|&t2| which.eval(kind, t1, t2)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    writeln!(out, "t1,t2,value")?;
    let mut count = 0;
    for (row, &t1) in rows.iter().zip(&xs) {
        for (&v, &t2) in row.iter().zip(&ys) {
            writeln!(out, "{t1:.16e},{t2:.16e},{v:.16e}")?;
            count += 1;
        }
    }
    out.flush()?;
    Ok(count)
}
