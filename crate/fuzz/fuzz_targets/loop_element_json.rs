#![no_main]

use lax_markov_core::loopalg::LoopElement;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = LoopElement::from_json_str(text) {
        let again = LoopElement::from_json_str(&x.to_json_value().to_string()).expect("round trip");
        assert_eq!(again, x);
    }
});
