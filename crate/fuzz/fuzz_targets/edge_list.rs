#![no_main]

use dmincut::graph::{parse_edge_list, Graph};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(g) = parse_edge_list(text) else { return };
    // anything accepted must survive being written back out and re-read
    let mut out = format!("{} {}\n", g.n(), g.m());
    for e in g.edges() {
        out.push_str(&format!("{} {} {}\n", e.u, e.v, e.w));
    }
    let again: Graph = parse_edge_list(&out).expect("re-parse of accepted graph");
    assert_eq!(again, g);
});
