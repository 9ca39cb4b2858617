#![no_main]

use lax_markov_core::matrix::{from_json_str, to_json_value};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = from_json_str(text) {
        assert_eq!(from_json_str(&to_json_value(&m).to_string()).expect("round trip"), m);
    }
});
