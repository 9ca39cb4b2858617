#![no_main]

use lax_markov_core::calogero::Mesh;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(mesh) = Mesh::from_json_str(text) {
        // whatever parses must serialize back to an equal mesh
        let again = Mesh::from_json_str(&mesh.to_json_value().to_string()).expect("round trip");
        assert_eq!(again.nodes(), mesh.nodes());
    }
});
