#![no_main]

use lax_markov_lab::Profile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = text.parse::<Profile>() {
        let _ = p.eval(0.5) + p.derivative(-0.5);
        assert_eq!(p.to_string().parse::<Profile>().expect("round trip"), p);
    }
});
