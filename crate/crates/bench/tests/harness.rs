use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use robci_bench::*;

fn small(methods: Vec<BenchMethod>) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(
        methods,
        vec![60, 80],
        4,
        vec![0.0, 0.2, 0.4],
        vec![NoiseFamily::Gaussian],
        17,
    );
    c.replicates = 8;
    c.timing = false;
    c
}

fn hash_dataset(d: &robci::Dataset64) -> u64 {
    let mut h = DefaultHasher::new();
    for v in d.y().iter().chain(d.x().iter()) {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

#[test]
fn json_config_defaults() {
    let cfg = ExperimentConfig::from_json(
        r#"{"methods": ["alg1", "ols-t"], "n_values": [200], "p": 20,
            "epsilons": [0.0, 0.5], "noise_families": ["gaussian", "cauchy"],
            "master_seed": 42}"#,
    )
    .unwrap();
    assert_eq!(cfg.replicates, 500);
    assert_eq!(cfg.alpha, 0.05);
    assert_eq!(cfg.design, DesignConfig::Ar1 { rho: 0.6 });
    assert_eq!(cfg.coefficients(), vec![0.0; 20]);
    assert!(cfg.timing);
    assert_eq!(cfg.methods, vec![BenchMethod::Alg1, BenchMethod::OlsT]);
}

#[test]
fn json_config_explicit_fields() {
    let cfg = ExperimentConfig::from_json(
        r#"{"methods": ["quantile-loc"], "n_values": [50], "p": 2,
            "epsilons": [0.1], "noise_families": ["cauchy"], "master_seed": 1,
            "replicates": 3, "alpha": 0.1, "design": {"explicit": [[1, 0.5], [0.5, 1]]},
            "b": [1.5, 0], "timing": false}"#,
    )
    .unwrap();
    assert_eq!(cfg.replicates, 3);
    assert_eq!(cfg.coefficients(), vec![1.5, 0.0]);
    assert!(matches!(cfg.design, DesignConfig::Explicit(_)));
}

#[test]
fn json_config_rejections() {
    let base = r#""methods": ["alg1"], "n_values": [50], "p": 3, "noise_families": ["gaussian"], "master_seed": 1"#;
    for bad in [
        format!(r#"{{{base}, "epsilons": [1.0]}}"#),
        format!(r#"{{{base}, "epsilons": [0.1], "replicates": 0}}"#),
        format!(r#"{{{base}, "epsilons": [0.1], "b": [1]}}"#),
        format!(r#"{{{base}, "epsilons": [0.1], "typo": 1}}"#),
        format!(r#"{{{base}, "epsilons": [0.1], "design": {{"ar1": {{"rho": 1.5}}}}}}"#),
        r#"{"methods": ["alg2"], "n_values": [50], "p": 3, "epsilons": [0], "noise_families": ["gaussian"], "master_seed": 1}"#.to_string(),
        r#"{"methods": ["alg1"], "n_values": [50], "p": 1, "epsilons": [0], "noise_families": ["gaussian"], "master_seed": 1}"#.to_string(),
    ] {
        assert!(ExperimentConfig::from_json(&bad).is_err(), "{bad}");
    }
}

#[test]
fn grid_order_and_count() {
    let cfg = small(vec![BenchMethod::OlsT, BenchMethod::Alg1]);
    let recs = run_grid(&cfg, None).unwrap();
    assert_eq!(recs.len(), 12);
    let keys: Vec<_> = recs.iter().map(|r| (r.method, r.n, r.epsilon)).collect();
    let mut expected = Vec::new();
    for m in [BenchMethod::OlsT, BenchMethod::Alg1] {
        for n in [60, 80] {
            for e in [0.0, 0.2, 0.4] {
                expected.push((m, n, e));
            }
        }
    }
    assert_eq!(keys, expected);
}

#[test]
fn empty_methods_give_no_records() {
    let cfg = small(vec![]);
    assert!(run_grid(&cfg, None).unwrap().is_empty());
}

#[test]
fn cell_is_deterministic() {
    let cfg = small(vec![BenchMethod::Alg1]);
    let cell = cells(&cfg)[3];
    assert_eq!(run_cell(&cfg, cell).unwrap(), run_cell(&cfg, cell).unwrap());
}

#[test]
fn grid_independent_of_thread_count() {
    let cfg = small(vec![BenchMethod::Alg1, BenchMethod::QuantileLoc]);
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = one.install(|| run_grid(&cfg, None)).unwrap();
    let b = four.install(|| run_grid(&cfg, None)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn methods_share_datasets_and_design_ignores_epsilon() {
    let cfg = small(vec![BenchMethod::Alg1, BenchMethod::OlsT]);
    let design = cfg.design.spec(cfg.p).unwrap();
    for r in 0..cfg.replicates {
        let a = replicate_dataset(&cfg, &design, 60, 1, NoiseFamily::Gaussian, r).unwrap();
        let b = replicate_dataset(&cfg, &design, 60, 1, NoiseFamily::Gaussian, r).unwrap();
        assert_eq!(hash_dataset(&a), hash_dataset(&b));
        let c = replicate_dataset(&cfg, &design, 60, 2, NoiseFamily::Gaussian, r).unwrap();
        assert_eq!(a.x(), c.x());
        assert_ne!(a.y(), c.y());
    }
    let a = replicate_dataset(&cfg, &design, 60, 1, NoiseFamily::Gaussian, 0).unwrap();
    let b = replicate_dataset(&cfg, &design, 60, 1, NoiseFamily::Gaussian, 1).unwrap();
    assert_ne!(hash_dataset(&a), hash_dataset(&b));
}

#[test]
fn single_replicate_aggregation() {
    let mut cfg = small(vec![BenchMethod::OlsT]);
    cfg.replicates = 1;
    cfg.epsilons = vec![0.0];
    let cell = cells(&cfg)[0];
    let rec = run_cell(&cfg, cell).unwrap();
    let design = cfg.design.spec(cfg.p).unwrap();
    let d = replicate_dataset(&cfg, &design, cell.n, 0, cell.noise, 0).unwrap();
    let iv = run_method(BenchMethod::OlsT, &d, cfg.alpha, 0).unwrap();
    if iv.contains(0.0) {
        assert_eq!(rec.coverage, Some(1.0));
        assert_eq!(rec.avg_length_covered, iv.length());
    } else {
        assert_eq!(rec.coverage, Some(0.0));
        assert_eq!(rec.avg_length_covered, None);
    }
    assert_eq!(rec.error_count, 0);
}

#[test]
fn errors_are_counted_not_fatal() {
    // n = p makes every regression fit fail.
    let mut cfg = small(vec![BenchMethod::OlsT]);
    cfg.n_values = vec![4];
    cfg.epsilons = vec![0.0];
    let rec = run_cell(&cfg, cells(&cfg)[0]).unwrap();
    assert_eq!(rec.error_count, cfg.replicates);
    assert_eq!(rec.coverage, None);
    let mut out = Vec::new();
    write_csv(&[rec], &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[7], "");
    assert_eq!(row[8], "");
}

#[test]
fn csv_layout() {
    let mut out = Vec::new();
    write_csv(&[], &mut out).unwrap();
    assert_eq!(
        String::from_utf8(out).unwrap(),
        "method,n,p,epsilon,noise,replicates,covered,coverage,avg_length_covered,unbounded_count,error_count,mean_runtime_ms,master_seed\n"
    );

    let cfg = small(vec![BenchMethod::Alg1]);
    let rec = run_cell(&cfg, cells(&cfg)[0]).unwrap();
    let mut out = Vec::new();
    write_csv(std::slice::from_ref(&rec), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 2);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), 13);
    assert_eq!(row[0], "alg1");
    assert_eq!(row[1].parse::<usize>().unwrap(), rec.n);
    assert_eq!(
        row[3].parse::<f64>().unwrap().to_bits(),
        rec.epsilon.to_bits()
    );
    assert_eq!(row[4], "gaussian");
    assert_eq!(row[7].parse::<f64>().unwrap(), rec.coverage.unwrap());
    assert_eq!(
        row[8].parse::<f64>().unwrap(),
        rec.avg_length_covered.unwrap()
    );
    assert_eq!(row[12].parse::<u64>().unwrap(), 17);
}

#[test]
fn quantile_loc_covers_under_zero_coefficients() {
    let mut cfg = ExperimentConfig::new(
        vec![BenchMethod::QuantileLoc],
        vec![300],
        3,
        vec![0.3],
        vec![NoiseFamily::Cauchy],
        5,
    );
    cfg.replicates = 200;
    let rec = run_cell(&cfg, cells(&cfg)[0]).unwrap();
    assert_eq!(rec.error_count, 0);
    assert!(rec.coverage.unwrap() >= 0.9, "{rec:?}");
}

#[test]
fn alg1_not_worse_than_gaussian_threshold_without_contamination() {
    let mut cfg = ExperimentConfig::new(
        vec![BenchMethod::Alg1, BenchMethod::Alg1Ga],
        vec![200],
        5,
        vec![0.0],
        vec![NoiseFamily::Gaussian],
        23,
    );
    cfg.replicates = 300;
    let recs = run_grid(&cfg, None).unwrap();
    let (a, g) = (recs[0].coverage.unwrap(), recs[1].coverage.unwrap());
    assert!(a >= g - 0.02, "alg1 {a} alg1-ga {g}");
}

#[test]
fn progress_sink_sees_every_cell() {
    use std::sync::atomic::{AtomicUsize, Ordering};
    let cfg = small(vec![BenchMethod::OlsT]);
    let seen = AtomicUsize::new(0);
    let sink = |_: &ExperimentRecord| {
        seen.fetch_add(1, Ordering::Relaxed);
    };
    let recs = run_grid(&cfg, Some(&sink)).unwrap();
    assert_eq!(seen.load(Ordering::Relaxed), recs.len());
}
