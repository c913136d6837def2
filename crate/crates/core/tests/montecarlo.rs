//! Simulation reproducibility and coarse statistical sanity.

use chargof::empirical::SupMode;
use chargof::montecarlo::{critical_value, power, NullDistribution, SimPlan};
use chargof::streams::stream;
use chargof::{Alternative, GridSpec, NullFamily, TestKind};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn results_do_not_depend_on_thread_count() {
    for kind in TestKind::ALL {
        let plan = SimPlan::new(kind, 15, 300, 77, 0.05);
        let one = in_pool(1, || NullDistribution::simulate(&plan).unwrap());
        let four = in_pool(4, || NullDistribution::simulate(&plan).unwrap());
        assert_eq!(one, four, "{kind}");
    }
    let plan = SimPlan::new(TestKind::Exponential, 20, 200, 5, 0.05);
    let one = in_pool(1, || power(&plan, &Alternative::Weibull, 0.5).unwrap());
    let four = in_pool(4, || power(&plan, &Alternative::Weibull, 0.5).unwrap());
    assert_eq!(one, four);
}

#[test]
fn critical_values_shrink_with_n() {
    for kind in TestKind::ALL {
        let c: Vec<f64> = [15, 30, 60]
            .iter()
            .map(|&n| critical_value(&SimPlan::new(kind, n, 1000, 9, 0.05)).unwrap())
            .collect();
        assert!(c[0] > c[1] && c[1] > c[2], "{kind}: {c:?}");
    }
}

#[test]
fn power_grows_with_theta() {
    for alt in [Alternative::LeyPaindaveine, Alternative::ShiftedLogistic, Alternative::Weibull] {
        let plan = SimPlan::new(alt.null_kind(), 40, 1000, 21, 0.05);
        let low = power(&plan, &alt, 0.0).unwrap().power;
        let high = power(&plan, &alt, 0.9 * alt.theta_upper().min(2.0)).unwrap().power;
        assert!(high > low, "{alt}: {low} -> {high}");
    }
}

#[test]
fn power_at_the_null_is_the_level() {
    for alt in Alternative::STUDIED {
        let plan = SimPlan::new(alt.null_kind(), 20, 4000, 31, 0.05);
        let est = power(&plan, &alt, 0.0).unwrap();
        let se = (0.05f64 * 0.95 / 4000.0).sqrt();
        assert!((est.power - 0.05).abs() < 4.0 * se, "{alt}: {}", est.power);
    }
}

#[test]
fn doubling_replications_moves_the_quantile_within_two_binomial_errors() {
    // the doubled run must land between the order statistics two binomial
    // standard errors either side of the quantile index of the first run
    let (reps, alpha) = (2000usize, 0.05);
    for kind in TestKind::ALL {
        let base = NullDistribution::simulate(&SimPlan::new(kind, 20, reps, 13, alpha)).unwrap();
        let doubled = critical_value(&SimPlan::new(kind, 20, 2 * reps, 13, alpha)).unwrap();
        let k = ((1.0 - alpha) * reps as f64).ceil();
        let se = (reps as f64 * alpha * (1.0 - alpha)).sqrt();
        let lo = base.sorted[(k - 2.0 * se).floor() as usize - 1];
        let hi = base.sorted[((k + 2.0 * se).ceil() as usize).min(reps) - 1];
        assert!(lo <= doubled && doubled <= hi, "{kind}: {doubled} outside [{lo}, {hi}]");
    }
}

#[test]
fn statistic_concentrates_for_large_samples() {
    for kind in [TestKind::Pareto, TestKind::Exponential] {
        let median = |n: usize| {
            let plan = SimPlan {
                grid: GridSpec::new(64, 64),
                ..SimPlan::new(kind, n, 100, 55, 0.5).with_mode(SupMode::Grid)
            };
            NullDistribution::simulate(&plan).unwrap().critical_value(0.5).unwrap()
        };
        let (small, large) = (median(100), median(1000));
        assert!(large < small, "{kind}: {small} vs {large}");
    }
}

#[test]
fn p_values_lie_on_the_replication_lattice() {
    let kind = TestKind::Logistic;
    let sample = NullFamily::standard(kind).sample(12, &mut stream(1, 1)).unwrap();
    let p = chargof::montecarlo::p_value(kind, &sample, 199, 3).unwrap();
    let k = p * 200.0;
    assert!((k - k.round()).abs() < 1e-9 && (1.0..=200.0).contains(&k.round()), "{p}");
}

#[test]
fn exact_plans_beyond_the_cap_are_refused() {
    let plan = SimPlan::new(TestKind::Pareto, 500, 100, 1, 0.05);
    assert!(matches!(plan.validate(), Err(chargof::Error::Refused(_))));
}
