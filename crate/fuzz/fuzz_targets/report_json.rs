#![no_main]

use dmincut::harness::Report;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = Report::from_json(text) {
        let _ = report.passed();
        let _ = report.to_text();
        let _ = report.to_csv();
    }
});
