#![no_main]

use std::sync::Arc;

use libfuzzer_sys::fuzz_target;
use streamdt::stream::{CsvStream, Feature, InstanceStream, Schema};

fuzz_target!(|data: &[u8]| {
    let schema = Arc::new(
        Schema::new(
            vec![
                Feature::numeric("x"),
                Feature::nominal("color", ["red", "green", "blue"]),
            ],
            ["yes", "no"].map(String::from).to_vec(),
        )
        .expect("fixed schema is valid"),
    );
    if let Ok(mut stream) = CsvStream::from_reader(data, schema) {
        while let Some(record) = stream.next_instance() {
            if record.is_err() {
                break;
            }
        }
    }
});
