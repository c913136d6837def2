//! Invariance and symmetry properties of the statistics.

use chargof::empirical::{diff, diff_ex, diff_ex_upper};
use chargof::streams::stream;
use chargof::{k_statistic, NullFamily, Sample, StatisticConfig, TestKind};
use proptest::prelude::*;

fn sample(kind: TestKind, n: usize, seed: u64) -> Sample {
    NullFamily::standard(kind).sample(n, &mut stream(seed, 0)).unwrap()
}

fn point(kind: TestKind, u1: f64, u2: f64) -> (f64, f64) {
    let null = NullFamily::standard(kind);
    (null.quantile(u1).unwrap(), null.quantile(u2).unwrap())
}

fn exact(kind: TestKind, s: &Sample) -> f64 {
    k_statistic(kind, s, &StatisticConfig::exact()).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pareto_power_transform(seed in any::<u64>(), n in 2usize..30, p in 0.3f64..3.0,
                              u1 in 0.01f64..0.99, u2 in 0.01f64..0.99) {
        let s = sample(TestKind::Pareto, n, seed);
        let sp = s.map(|x| x.powf(p)).unwrap();
        let (t1, t2) = point(TestKind::Pareto, u1, u2);
        let a = diff(TestKind::Pareto, &s, t1, t2).unwrap();
        let b = diff(TestKind::Pareto, &sp, t1.powf(p), t2.powf(p)).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((exact(TestKind::Pareto, &s) - exact(TestKind::Pareto, &sp)).abs() < 1e-12);
    }

    #[test]
    fn logistic_scale(seed in any::<u64>(), n in 3usize..25, c in 0.2f64..5.0,
                      u1 in 0.01f64..0.99, u2 in 0.01f64..0.99) {
        let s = sample(TestKind::Logistic, n, seed);
        let sc = s.map(|x| c * x).unwrap();
        let (t1, t2) = point(TestKind::Logistic, u1, u2);
        let a = diff(TestKind::Logistic, &s, t1, t2).unwrap();
        let b = diff(TestKind::Logistic, &sc, c * t1, c * t2).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((exact(TestKind::Logistic, &s) - exact(TestKind::Logistic, &sc)).abs() < 1e-12);
    }

    #[test]
    fn exponential_scale(seed in any::<u64>(), n in 2usize..30, c in 0.2f64..5.0,
                         u1 in 0.01f64..0.99, u2 in 0.01f64..0.99) {
        let s = sample(TestKind::Exponential, n, seed);
        let sc = s.map(|x| c * x).unwrap();
        let (t1, t2) = point(TestKind::Exponential, u1, u2);
        let a = diff(TestKind::Exponential, &s, t1, t2).unwrap();
        let b = diff(TestKind::Exponential, &sc, c * t1, c * t2).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((exact(TestKind::Exponential, &s) - exact(TestKind::Exponential, &sc)).abs() < 1e-12);
    }

    #[test]
    fn exponential_orientation(seed in any::<u64>(), n in 2usize..30,
                               u1 in 0.01f64..0.99, u2 in 0.01f64..0.99) {
        let s = sample(TestKind::Exponential, n, seed);
        let (t1, t2) = point(TestKind::Exponential, u1, u2);
        let lower = diff_ex(&s, t1, t2).unwrap();
        let upper = diff_ex_upper(&s, t1, t2).unwrap();
        prop_assert!((lower + upper).abs() < 1e-12);
    }

    #[test]
    fn pareto_and_logistic_symmetry(seed in any::<u64>(), n in 3usize..30,
                                    u1 in 0.01f64..0.99, u2 in 0.01f64..0.99) {
        for kind in [TestKind::Pareto, TestKind::Logistic] {
            let s = sample(kind, n, seed);
            let (t1, t2) = point(kind, u1, u2);
            let a = diff(kind, &s, t1, t2).unwrap();
            let b = diff(kind, &s, t2, t1).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn statistic_is_a_probability_gap(seed in any::<u64>(), n in 3usize..40) {
        for kind in TestKind::ALL {
            let k = exact(kind, &sample(kind, n, seed));
            prop_assert!((0.0..=1.0).contains(&k));
        }
    }

    #[test]
    fn statistic_ignores_observation_order(seed in any::<u64>(), n in 3usize..25) {
        for kind in TestKind::ALL {
            let s = sample(kind, n, seed);
            let mut rev = s.values().to_vec();
            rev.reverse();
            let r = Sample::new(rev).unwrap();
            prop_assert_eq!(exact(kind, &s), exact(kind, &r));
        }
    }
}
