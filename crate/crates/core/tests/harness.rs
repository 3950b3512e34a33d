use std::fs;
use std::io::Write;

use bayestree_core::harness::{
    accuracy_percent, cross_validate, emit_report, generate_synthetic, load_csv, predict, scaling_sweep, DataSource,
    ExperimentConfig, ModelFile, Preset, RunReport, SyntheticSpec,
};
use bayestree_core::samplers::{run_mcmc, run_sumd};
use bayestree_core::{Dataset, Error, Hyperparams, LikelihoodMode, Method};

fn csv_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

fn small_hp(iterations: usize, workers: usize, seed: u64) -> Hyperparams {
    Hyperparams {
        iterations,
        burn_in: iterations / 2,
        workers,
        seed,
        ..Hyperparams::default()
    }
}

#[test]
fn csv_string_labels_map_by_first_occurrence() {
    let f = csv_file("1,2,a\n3,4,b\n5,6,a\n");
    let d = load_csv(f.path(), None, false).unwrap();
    assert_eq!(
        (d.dataset.n_rows(), d.dataset.n_features(), d.dataset.n_classes()),
        (3, 2, 2)
    );
    assert_eq!(d.dataset.labels(), &[0, 1, 0]);
    assert_eq!(d.label_names, vec!["a", "b"]);
}

#[test]
fn csv_header_and_label_column() {
    let f = csv_file("label,x,y\nyes,1,2\nno,3,4\nyes,5,6\nno,7,8\n");
    let d = load_csv(f.path(), Some(0), true).unwrap();
    assert_eq!(d.dataset.n_rows(), 4);
    assert_eq!(d.dataset.row(1), &[3.0, 4.0]);
    assert_eq!(d.dataset.labels(), &[0, 1, 0, 1]);
}

#[test]
fn abalone_shaped_file() {
    let mut text = String::new();
    let sexes = ["M", "F", "I"];
    for i in 0..50 {
        text.push_str(&format!(
            "{},{:.3},{:.3},{:.3},{:.4},{:.4},{:.4},{:.3},{}\n",
            sexes[i % 3].len() + i % 3,
            0.3 + i as f64 * 0.005,
            0.2 + i as f64 * 0.004,
            0.1,
            0.5 + i as f64 * 0.01,
            0.2,
            0.1,
            0.15,
            5 + i % 7
        ));
    }
    let f = csv_file(&text);
    let d = load_csv(f.path(), None, false).unwrap();
    assert_eq!(d.dataset.n_features(), 8);
    assert_eq!(d.dataset.n_rows(), 50);
    assert_eq!(d.dataset.n_classes(), 7);
}

#[test]
fn csv_errors() {
    let bad = csv_file("1,2,a\n3,x,b\n");
    match load_csv(bad.path(), None, false) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected parse error, got {other:?}"),
    }
    assert!(load_csv(csv_file("1,2,a\n3,4,a\n").path(), None, false).is_err());
    assert!(load_csv(csv_file("").path(), None, false).is_err());
}

#[test]
fn synthetic_generation() {
    let spec = SyntheticSpec {
        rows: 100,
        features: 4,
        classes: 2,
        seed: 7,
    };
    assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
    let four = generate_synthetic(&SyntheticSpec { classes: 4, ..spec }).unwrap();
    for k in 0..4 {
        assert!(four.labels().contains(&k));
    }
    let sd = Preset::SdSf.spec(0);
    assert_eq!((sd.rows, sd.features), (2_000, 8));
    assert_eq!("bd/bf".parse::<Preset>().unwrap(), Preset::BdBf);
}

#[test]
fn planted_signal_is_learnable() {
    let data = generate_synthetic(&SyntheticSpec {
        rows: 1000,
        features: 4,
        classes: 2,
        seed: 1,
    })
    .unwrap();
    let mut hp = small_hp(3000, 1, 2);
    hp.moves.max_depth = Some(3);
    let sample = run_mcmc(&data, &hp, LikelihoodMode::Sequential).unwrap();
    let acc = accuracy_percent(&sample, &data);
    assert!(acc > 60.0, "accuracy {acc}");
}

#[test]
fn separable_data_is_learned() {
    let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64, (i % 5) as f64]).collect();
    let labels: Vec<usize> = (0..60).map(|i| usize::from(i >= 30)).collect();
    let data = Dataset::new(rows, labels, 2).unwrap();
    let sample = run_mcmc(&data, &small_hp(2000, 1, 3), LikelihoodMode::Sequential).unwrap();
    let acc = accuracy_percent(&sample, &data);
    assert!(acc >= 95.0, "accuracy {acc}");
}

#[test]
fn predictions_are_probability_vectors() {
    let data = generate_synthetic(&SyntheticSpec {
        rows: 300,
        features: 3,
        classes: 3,
        seed: 4,
    })
    .unwrap();
    let sample = run_sumd(&data, &small_hp(800, 8, 5)).unwrap();
    for x in [vec![0.0, 0.0, 0.0], vec![1e9, -1e9, 0.5], data.row(17).to_vec()] {
        let p = predict(&sample, &x);
        assert_eq!(p.len(), 3);
        assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn model_file_round_trip_preserves_predictions() {
    let data = generate_synthetic(&SyntheticSpec {
        rows: 200,
        features: 3,
        classes: 2,
        seed: 9,
    })
    .unwrap();
    let hp = small_hp(600, 1, 1);
    let sample = run_mcmc(&data, &hp, LikelihoodMode::Sequential).unwrap();
    let names = vec!["neg".to_string(), "pos".to_string()];
    let file = ModelFile::new(Method::Mcmc, &hp, 3, &names, &sample);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    file.save(&path).unwrap();

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json["format_version"], 1);
    assert_eq!(json["hyperparams"]["iterations"], 600);
    let first = &json["trees"][0]["nodes"][0];
    assert!(first["kind"] == "internal" || first["kind"] == "leaf");

    let back = ModelFile::load(&path).unwrap().to_sample().unwrap();
    assert_eq!(back.len(), sample.len());
    for i in 0..data.n_rows() {
        let a = predict(&sample, data.row(i));
        let b = predict(&back, data.row(i));
        assert_eq!(a, b);
    }
}

fn cv_config(source: DataSource, method: Method, seed: u64) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(method, source, small_hp(400, 4, seed));
    config.folds = 4;
    config
}

#[test]
fn cv_metrics_are_reproducible() {
    let source = DataSource::Synthetic(SyntheticSpec {
        rows: 240,
        features: 3,
        classes: 3,
        seed: 2,
    });
    for method in [Method::Mcmc, Method::Sumd, Method::Dp] {
        let config = cv_config(source.clone(), method, 13);
        let a = cross_validate(&config).unwrap();
        let b = cross_validate(&config).unwrap();
        assert_eq!(a.metrics_json().unwrap(), b.metrics_json().unwrap());
        let acc = &a.metrics.accuracy[0];
        assert_eq!(acc.folds, 4);
        assert!(acc.per_fold.iter().all(|v| (0.0..=100.0).contains(v)));
        assert!(acc.std >= 0.0);
    }
}

#[test]
fn cv_accuracy_ignores_label_names() {
    let data = generate_synthetic(&SyntheticSpec {
        rows: 150,
        features: 2,
        classes: 3,
        seed: 6,
    })
    .unwrap();
    let write = |names: [&str; 3]| {
        let mut text = String::new();
        for i in 0..data.n_rows() {
            let r = data.row(i);
            text.push_str(&format!("{},{},{}\n", r[0], r[1], names[data.label(i)]));
        }
        csv_file(&text)
    };
    let original = write(["a", "b", "c"]);
    let permuted = write(["zebra", "apple", "mango"]);
    let run = |path: &std::path::Path| {
        let source = DataSource::Csv {
            path: path.to_path_buf(),
            label_column: None,
            header: false,
        };
        cross_validate(&cv_config(source, Method::Mcmc, 4)).unwrap()
    };
    let (a, b) = (run(original.path()), run(permuted.path()));
    assert_eq!(a.metrics.accuracy, b.metrics.accuracy);
    let renamed: Vec<&str> = a
        .metrics
        .dataset
        .label_names
        .iter()
        .map(|n| ["zebra", "apple", "mango"][["a", "b", "c"].iter().position(|x| x == n).unwrap()])
        .collect();
    assert_eq!(b.metrics.dataset.label_names, renamed);
}

#[test]
fn sweep_and_report_files() {
    let source = DataSource::Synthetic(SyntheticSpec {
        rows: 300,
        features: 3,
        classes: 2,
        seed: 1,
    });
    let mut report: Option<RunReport> = None;
    for method in [Method::Sumd, Method::Dp] {
        let mut config = ExperimentConfig::new(method, source.clone(), small_hp(240, 1, 3));
        config.workers_list = vec![1, 2, 4];
        let r = scaling_sweep(&config).unwrap();
        assert_eq!(r.timings.len(), 3);
        assert!(r
            .timings
            .iter()
            .all(|t| t.repetitions == 3 && t.min_seconds <= t.median_seconds));
        match &mut report {
            None => report = Some(r),
            Some(acc) => acc.merge(r),
        }
    }
    let report = report.unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_report(&report, dir.path()).unwrap();

    let csv = fs::read_to_string(&paths.csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "method,workers,run_seconds");
    assert_eq!(lines.len(), 1 + 6);
    assert!(lines[1].starts_with("sumd,1,"));

    let back: RunReport = serde_json::from_str(&fs::read_to_string(&paths.json).unwrap()).unwrap();
    assert_eq!(back, report);
    assert!(fs::read_to_string(&paths.summary).unwrap().contains("sumd"));
}

#[test]
fn sweep_clamps_oversized_worker_counts() {
    let source = DataSource::Synthetic(SyntheticSpec {
        rows: 50,
        features: 2,
        classes: 2,
        seed: 1,
    });
    let mut config = ExperimentConfig::new(Method::Sumd, source, small_hp(64, 1, 3));
    config.workers_list = vec![1000];
    let r = scaling_sweep(&config).unwrap();
    assert_eq!(r.timings[0].workers, 64);
}
