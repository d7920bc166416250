#![no_main]

use dmincut::graph::{generate, GenSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = text.parse::<GenSpec>() else { return };
    let shown = spec.to_string();
    assert_eq!(shown.parse::<GenSpec>().ok(), Some(spec.clone()), "{shown}");
    // keep the generator cheap; planted graphs run the brute-force check
    if spec.n() <= 12 {
        let _ = generate(&spec, 0);
    }
});
