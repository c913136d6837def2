#![no_main]

use chargof::bahadur::Convention;
use chargof::{Alternative, SupMode, TestKind};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(kind) = s.parse::<TestKind>() {
            assert_eq!(kind.to_string().parse::<TestKind>().unwrap(), kind);
        }
        if let Ok(alt) = s.parse::<Alternative>() {
            assert_eq!(alt.to_string().parse::<Alternative>().unwrap(), alt);
        }
        let _ = s.parse::<Convention>();
        let _ = s.parse::<SupMode>();
    }
});
