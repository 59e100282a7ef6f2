#![no_main]

use libfuzzer_sys::fuzz_target;
use streamdt::plan::StreamSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = StreamSpec::parse(text) {
            let _ = spec.canonical();
            let _ = spec.length();
        }
    }
});
