use super::commands::{binomial_lower_tail, first_divergence};
use super::*;
use crate::graph::Graph;

fn gen(spec: &str, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(GraphSource::Gen { spec: spec.parse().unwrap(), seed })
}

fn file(text: &str) -> (tempfile::TempDir, ExperimentConfig) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(&path, text).unwrap();
    (dir, ExperimentConfig::new(GraphSource::File(path)))
}

fn run(r: Report) -> RunReport {
    match r {
        Report::Run(r) => r,
        other => panic!("expected a run report, got {other:?}"),
    }
}

#[test]
fn run_on_p3_file_matches_brute_force() {
    let (_dir, mut cfg) = file("3 2\n1 2 3\n2 3 4\n");
    cfg.trials = Some(50);
    cfg.seed = 1;
    let r = run(cmd_run(&cfg).unwrap());
    assert_eq!(r.best.value, 3);
    assert_eq!(r.best.sides, [vec![1], vec![2, 3]]);
    let o = r.oracle.unwrap();
    assert_eq!((o.kind.as_str(), o.value, o.matches), ("brute", 3, true));
    assert_eq!(r.per_trial.len(), 50);
    assert_eq!(r.best.value, r.per_trial.iter().map(|t| t.value).min().unwrap());
}

#[test]
fn run_on_k2() {
    let (_dir, cfg) = file("2 1\n1 2 5\n");
    let r = run(cmd_run(&cfg).unwrap());
    assert_eq!(r.best.value, 5);
    assert!(r.best.contractions.is_empty());
    assert_eq!(r.aggregate.trials, 3);
    assert_eq!(r.success_rate, Some(1.0));
}

#[test]
fn k_below_five_is_a_config_error() {
    let mut cfg = gen("cycle:4", 0);
    cfg.k = 4;
    let err = cmd_run(&cfg).unwrap_err();
    assert!(matches!(err, HarnessError::Config(_)));
    assert_eq!(err.exit_code(), 2);

    let mut cfg = gen("cycle:4", 0);
    cfg.trials = Some(0);
    assert_eq!(cmd_run(&cfg).unwrap_err().exit_code(), 2);
}

#[test]
fn bad_graph_inputs_have_their_own_exit_codes() {
    let (_dir, cfg) = file("3 1\n1 2 1\n");
    assert_eq!(cmd_run(&cfg).unwrap_err().exit_code(), 3);
    let cfg = ExperimentConfig::new(GraphSource::File("/nonexistent/graph.txt".into()));
    assert_eq!(cmd_run(&cfg).unwrap_err().exit_code(), 6);
}

#[test]
fn reports_are_reproducible_and_round_trip() {
    let mut cfg = gen("random:7,0.4,1,9", 3);
    cfg.seed = 42;
    cfg.trials = Some(20);
    let a = cmd_run(&cfg).unwrap();
    let b = cmd_run(&cfg).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    assert_eq!(Report::from_json(&a.to_json().unwrap()).unwrap(), a);

    cfg.graphs = 3;
    cfg.trials = Some(4);
    let v = cmd_verify(&cfg).unwrap();
    assert_eq!(Report::from_json(&v.to_json().unwrap()).unwrap(), v);

    let s = cmd_stats(&StatsConfig { experiment: cfg.clone(), single_trials: 30, repetitions: 2, alpha: 0.01 }).unwrap();
    assert_eq!(Report::from_json(&s.to_json().unwrap()).unwrap(), s);

    let c = cmd_complexity(&ComplexityConfig {
        family: Family::Cycle,
        sizes: vec![4, 6],
        seed: 1,
        trials: 2,
        k: 5,
        pulse_budget_const: 20,
    })
    .unwrap();
    assert_eq!(Report::from_json(&c.to_json().unwrap()).unwrap(), c);
    for r in [&a, &v, &s, &c] {
        assert!(!r.to_text().is_empty());
        r.to_csv().unwrap();
    }
}

#[test]
fn verify_small_graphs() {
    let mut cfg = gen("random:9,0.3,1,10", 100);
    cfg.graphs = 5;
    cfg.trials = Some(4);
    let Report::Verify(v) = cmd_verify(&cfg).unwrap() else { panic!() };
    assert_eq!(v.pairs, 20);
    assert!(v.passed, "{v:?}");

    let (_dir, cfg) = file("2 1\n1 2 5\n");
    let Report::Verify(v) = cmd_verify(&cfg).unwrap() else { panic!() };
    assert!(v.passed);
    assert!(v.cases.iter().all(|c| c.contractions == 0));

    let mut cfg = gen("cycle:4", 0);
    cfg.seed = 77;
    let Report::Verify(v) = cmd_verify(&cfg).unwrap() else { panic!() };
    assert!(v.cases.iter().all(|c| c.distributed_value >= 2));
}

#[test]
fn divergence_points_at_first_difference() {
    let d = first_divergence(&[(2, 1), (3, 2)], &[(2, 1), (3, 1)]).unwrap();
    assert_eq!((d.index, d.distributed, d.sequential), (1, Some([3, 2]), Some([3, 1])));
    let d = first_divergence(&[(2, 1)], &[(2, 1), (4, 3)]).unwrap();
    assert_eq!((d.index, d.distributed, d.sequential), (1, None, Some([4, 3])));
    assert_eq!(first_divergence(&[(2, 1)], &[(2, 1)]), None);
}

#[test]
fn stats_on_trivial_and_small_graphs() {
    let (_dir, cfg) = file("2 1\n1 2 5\n");
    let s = StatsConfig { experiment: cfg, single_trials: 50, repetitions: 3, alpha: 0.01 };
    let Report::Stats(r) = cmd_stats(&s).unwrap() else { panic!() };
    assert_eq!(r.graphs[0].per_trial_rate, 1.0);
    assert_eq!(r.graphs[0].repetition_successes, 3);
    assert!(r.passed);

    let s = StatsConfig { experiment: gen("cycle:4", 0), single_trials: 2000, repetitions: 0, alpha: 0.01 };
    let Report::Stats(r) = cmd_stats(&s).unwrap() else { panic!() };
    let c4 = &r.graphs[0];
    assert_eq!(c4.min_cut_count, Some(6));
    assert!(c4.per_trial_rate >= 1.0 / 6.0, "{}", c4.per_trial_rate);
    assert!(r.passed);
}

#[test]
fn binomial_tail_against_direct_sum() {
    fn direct(x: u64, n: u64, p: f64) -> f64 {
        let mut total = 0.0;
        let mut coeff = 1.0f64;
        for k in 0..=n {
            if k > 0 {
                coeff *= (n - k + 1) as f64 / k as f64;
            }
            if k <= x {
                total += coeff * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            }
        }
        total
    }
    for (x, n, p) in [(0, 10, 0.1), (3, 20, 0.25), (50, 200, 1.0 / 28.0), (7, 200, 1.0 / 28.0)] {
        let got = binomial_lower_tail(x, n, p);
        assert!((got - direct(x, n, p)).abs() < 1e-9, "{x} {n} {p}: {got}");
    }
}

#[test]
fn complexity_base_case() {
    let cfg = ComplexityConfig { family: Family::Complete, sizes: vec![2], seed: 0, trials: 1, k: 5, pulse_budget_const: 20 };
    let Report::Complexity(r) = cmd_complexity(&cfg).unwrap() else { panic!() };
    assert_eq!(r.rows[0].pulses_max, 18);
    assert!(r.within_budget);
    assert_eq!(r.rows[0].pulse_budget, 80);
}

#[test]
fn family_and_choice_parsing() {
    assert_eq!("cycle".parse::<Family>().unwrap(), Family::Cycle);
    assert_eq!("random:0.5".parse::<Family>().unwrap(), Family::Random { density: 0.5 });
    assert!("random:2".parse::<Family>().is_err());
    assert!("star".parse::<Family>().is_err());
    assert_eq!("sw".parse::<OracleChoice>().unwrap(), OracleChoice::Sw);
    assert_eq!("csv".parse::<EmitFormat>().unwrap(), EmitFormat::Csv);
    assert!("xml".parse::<EmitFormat>().is_err());
}

#[test]
fn oracle_choices_agree() {
    let g = Graph::new(4, [(1, 2, 1), (2, 3, 1), (3, 4, 1), (1, 4, 1)]).unwrap();
    assert_eq!(oracle_value(&g, OracleChoice::Brute).unwrap(), ("brute", 2));
    assert_eq!(oracle_value(&g, OracleChoice::Sw).unwrap(), ("sw", 2));
    assert_eq!(oracle_value(&g, OracleChoice::Auto).unwrap().1, 2);
}
