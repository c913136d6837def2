#![no_main]

use chargof::GridSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = s.parse::<GridSpec>() {
            // display output must parse back to the same spec
            let again: GridSpec = spec.to_string().parse().unwrap();
            assert_eq!(again, spec);
        }
    }
});
