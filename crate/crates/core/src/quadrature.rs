//! Adaptive Gauss–Kronrod quadrature.
//!
//! Finite intervals are integrated directly with a 21-point Kronrod rule
//! (embedded 10-point Gauss rule for the error estimate) and global
//! bisection of the worst interval. Integrals over the support of a null
//! family are mapped onto `(0, 1)` through the family's quantile function,
//! which makes the integrands of the unit null families smooth and bounded on
//! each piece between indicator breakpoints.

use crate::error::{Error, Result};
use crate::kind::TestKind;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_059,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_114,
    0.562_757_134_668_604_683_339_000_099_272,
    0.433_395_394_129_247_190_799_265_943_165,
    0.294_392_862_701_460_198_131_126_603_103,
    0.148_874_338_981_631_210_884_826_001_129,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_244,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_325,
    0.123_491_976_262_065_851_077_600_934_574,
    0.134_709_217_311_473_325_928_054_001_771,
    0.142_775_938_577_060_080_797_094_273_138,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_389,
];

// Gauss weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_657,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Tolerances for [`Integrator`].
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(10).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

impl Integrator {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Integrator {
            abs_tol,
            ..Default::default()
        }
    }

    /// Integrates `f` over the finite interval `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::domain("integration bounds must be finite"));
        }
        let mut segments = vec![kronrod21(&mut f, a, b)];
        loop {
            let total: f64 = segments.iter().map(|s| s.value).sum();
            let err: f64 = segments.iter().map(|s| s.error).sum();
            if !total.is_finite() {
                return Err(Error::numeric(format!(
                    "non-finite integrand on [{a}, {b}]"
                )));
            }
            if err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                return Ok(total);
            }
            if segments.len() >= self.max_intervals {
                return Err(Error::numeric(format!(
                    "quadrature on [{a}, {b}] did not converge: estimate {total:e}, error {err:e}"
                )));
            }
            let (worst, _) = segments
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .expect("non-empty");
            let seg = segments.swap_remove(worst);
            let mid = 0.5 * (seg.a + seg.b);
            if mid <= seg.a || mid >= seg.b {
                return Err(Error::numeric(format!(
                    "quadrature interval collapsed near {mid}"
                )));
            }
            segments.push(kronrod21(&mut f, seg.a, mid));
            segments.push(kronrod21(&mut f, mid, seg.b));
        }
    }

    /// Integrates `f` over `[a, b]`, restarting the rule at every breakpoint
    /// strictly inside the interval.
    pub fn integrate_pieces<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        breakpoints: &[f64],
    ) -> Result<f64> {
        let mut cuts: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&c| c > a && c < b)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut lo = a;
        let mut total = 0.0;
        for hi in cuts.into_iter().chain(std::iter::once(b)) {
            total += self.integrate(&mut f, lo, hi)?;
            lo = hi;
        }
        Ok(total)
    }

    /// Integrates `f` over the support of the `kind` null family with unit
    /// parameter. The substitution `x = F0^{-1}(u)` is applied and the
    /// breakpoints (given on the `x` scale) are mapped to the `u` scale.
    pub fn integrate_support<F: FnMut(f64) -> f64>(
        &self,
        kind: TestKind,
        mut f: F,
        breakpoints: &[f64],
    ) -> Result<f64> {
        let cuts: Vec<f64> = breakpoints.iter().map(|&x| support_to_unit(kind, x)).collect();
        self.integrate_pieces(
            |u| {
                let (x, jac) = unit_to_support(kind, u);
                let v = f(x);
                if v == 0.0 {
                    0.0
                } else {
                    v * jac
                }
            },
            0.0,
            1.0,
            &cuts,
        )
    }
}

/// Maps `u` in `(0, 1)` to the support point `x = F0^{-1}(u)` and returns the
/// Jacobian `dx/du`.
pub fn unit_to_support(kind: TestKind, u: f64) -> (f64, f64) {
    match kind {
        TestKind::Pareto => {
            let r = 1.0 - u;
            (1.0 / r, 1.0 / (r * r))
        }
        TestKind::Exponential => (-(-u).ln_1p(), 1.0 / (1.0 - u)),
        TestKind::Logistic => ((u / (1.0 - u)).ln(), 1.0 / (u * (1.0 - u))),
    }
}

/// Inverse of [`unit_to_support`]: the null c.d.f. with unit parameter.
pub fn support_to_unit(kind: TestKind, x: f64) -> f64 {
    match kind {
        TestKind::Pareto => {
            if x <= 1.0 {
                0.0
            } else {
                1.0 - 1.0 / x
            }
        }
        TestKind::Exponential => {
            if x <= 0.0 {
                0.0
            } else {
                -(-x).exp_m1()
            }
        }
        TestKind::Logistic => {
            if x >= 0.0 {
                1.0 / (1.0 + (-x).exp())
            } else {
                let e = x.exp();
                e / (1.0 + e)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = Integrator::default();
        // Degree 31 is within the Kronrod rule's exactness.
        let v = q.integrate(|x| x.powi(30), 0.0, 1.0).unwrap();
        assert!((v - 1.0 / 31.0).abs() < 1e-15);
        let v = q.integrate(|x| 3.0 * x * x - 2.0 * x, -1.0, 2.0).unwrap();
        assert!((v - 6.0).abs() < 1e-13);
    }

    #[test]
    fn smooth_transcendental() {
        let q = Integrator::default();
        let v = q.integrate(f64::sin, 0.0, std::f64::consts::PI).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = q.integrate(|x| 1.0 / (1.0 + x * x), -50.0, 50.0).unwrap();
        assert!((v - 2.0 * 50f64.atan()).abs() < 1e-12);
    }

    #[test]
    fn log_singularity_converges() {
        let q = Integrator::with_abs_tol(1e-10);
        let v = q.integrate(|x| x.ln(), 0.0, 1.0).unwrap();
        assert!((v + 1.0).abs() < 1e-9);
    }

    #[test]
    fn step_function_with_breakpoints() {
        let q = Integrator::default();
        let v = q
            .integrate_pieces(|x| if x > 0.3 { 2.0 } else { -1.0 }, 0.0, 1.0, &[0.3])
            .unwrap();
        assert!((v - (1.4 - 0.3)).abs() < 1e-14);
    }

    #[test]
    fn support_integrals_of_densities() {
        let q = Integrator::default();
        let pa = q
            .integrate_support(TestKind::Pareto, |x| x.powi(-2), &[])
            .unwrap();
        let ex = q
            .integrate_support(TestKind::Exponential, |x| x * (-x).exp(), &[])
            .unwrap();
        let lo = q
            .integrate_support(
                TestKind::Logistic,
                |x| {
                    let e = (-x.abs()).exp();
                    x * x * e / ((1.0 + e) * (1.0 + e))
                },
                &[],
            )
            .unwrap();
        assert!((pa - 1.0).abs() < 1e-12);
        assert!((ex - 1.0).abs() < 1e-12);
        assert!((lo - std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-10);
    }

    #[test]
    fn unit_maps_round_trip() {
        for kind in TestKind::ALL {
            for &u in &[1e-6, 0.1, 0.5, 0.9, 1.0 - 1e-6] {
                let (x, _) = unit_to_support(kind, u);
                assert!((support_to_unit(kind, x) - u).abs() < 1e-12, "{kind} {u}");
            }
        }
    }
}
