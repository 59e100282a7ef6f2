#![no_main]

use libfuzzer_sys::fuzz_target;
use streamdt::plan::ExperimentPlan;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(plan) = ExperimentPlan::from_toml(text) {
            let _ = plan.validate();
        }
    }
});
