//! Replays the checked-in fuzz seeds through the same checks the fuzz
//! targets make, so the stable test run covers them too.

use std::fs;
use std::path::PathBuf;

use dmincut::graph::{generate, parse_edge_list, parse_edge_list_scaled, GenSpec};
use dmincut::harness::Report;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn edge_list_seeds() {
    let mut accepted = 0;
    for (name, data) in seeds("edge_list") {
        let Ok(g) = parse_edge_list(std::str::from_utf8(&data).unwrap()) else { continue };
        let mut out = format!("{} {}\n", g.n(), g.m());
        for e in g.edges() {
            out.push_str(&format!("{} {} {}\n", e.u, e.v, e.w));
        }
        assert_eq!(parse_edge_list(&out).unwrap(), g, "{name}");
        accepted += 1;
    }
    assert_eq!(accepted, 4);
}

#[test]
fn edge_list_scaled_seeds() {
    let results: Vec<_> = seeds("edge_list_scaled")
        .into_iter()
        .map(|(name, data)| {
            let (&d, rest) = data.split_first().unwrap();
            (name, parse_edge_list_scaled(std::str::from_utf8(rest).unwrap(), u64::from(d)))
        })
        .collect();
    for (name, r) in &results {
        assert_eq!(r.is_ok(), name == "quarters", "{name}: {r:?}");
    }
    let g = results.iter().find(|(n, _)| n == "quarters").unwrap().1.as_ref().unwrap();
    assert_eq!(g.edges().iter().map(|e| e.w).collect::<Vec<_>>(), [5, 7]);
}

#[test]
fn gen_spec_seeds() {
    for (name, data) in seeds("gen_spec") {
        let Ok(spec) = std::str::from_utf8(&data).unwrap().parse::<GenSpec>() else { continue };
        assert_eq!(spec.to_string().parse::<GenSpec>().ok(), Some(spec.clone()), "{name}");
        if spec.n() <= 12 {
            let _ = generate(&spec, 0);
        }
    }
}

#[test]
fn report_json_seeds() {
    let mut parsed = 0;
    for (_, data) in seeds("report_json") {
        if let Ok(report) = Report::from_json(std::str::from_utf8(&data).unwrap()) {
            let _ = report.passed();
            let _ = report.to_text();
            report.to_csv().unwrap();
            assert_eq!(Report::from_json(&report.to_json().unwrap()).unwrap(), report);
            parsed += 1;
        }
    }
    assert_eq!(parsed, 4);
}
