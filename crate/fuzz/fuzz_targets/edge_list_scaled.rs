#![no_main]

use dmincut::graph::parse_edge_list_scaled;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // first byte picks the denominator, 0 included
    let Some((&d, rest)) = data.split_first() else { return };
    if let Ok(text) = std::str::from_utf8(rest) {
        let _ = parse_edge_list_scaled(text, u64::from(d));
    }
});
