#![no_main]

use chargof::{k_statistic, Sample, StatisticConfig, TestKind};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(sample) = Sample::parse_bytes(data) {
        assert!(sample.values().iter().all(|x| x.is_finite()));
        assert_eq!(sample.sorted().len(), sample.len());
        if sample.len() <= 12 {
            for kind in TestKind::ALL {
                if let Ok(k) = k_statistic(kind, &sample, &StatisticConfig::exact()) {
                    assert!((0.0..=1.0).contains(&k.value));
                }
            }
        }
    }
});
