#![no_main]

use lax_markov_lab::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = ExperimentConfig::from_json_str(text) {
        let _ = config.sweep_meshes();
    }
});
