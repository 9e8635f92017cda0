use fuzzex_bench::*;
use fuzzex_core::fuzzy::{fcm_type2, FcmConfig};
use fuzzex_core::ingest::Dataset;
use fuzzex_core::ndarray::Array2;
use fuzzex_core::MetricsReport;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const MEANS: [[f64; 3]; 3] = [[0.0, 0.0, 0.0], [5.0, 0.0, 1.0], [0.0, 5.0, 2.0]];

fn blob_dataset(per_blob: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let n = per_blob * 3;
    let m = Array2::from_shape_fn((n, 3), |(i, j)| MEANS[i % 3][j] + noise.sample(&mut rng));
    Dataset::from_matrix(m, vec!["a".into(), "b".into(), "c".into()]).unwrap()
}

fn blob_plan(dir: &std::path::Path, per_blob: usize) -> ExperimentPlan {
    let path = dir.join("blobs.csv");
    blob_dataset(per_blob, 3).save_csv(&path).unwrap();
    let mut plan = ExperimentPlan::new(DatasetSpec::new(path, DataFormat::Csv));
    plan.variance_threshold = 0.99;
    plan
}

#[test]
fn split_sizes_and_coverage() {
    let ds = blob_dataset(4, 0).select_rows(&(0..10).collect::<Vec<_>>());
    let s = split(&ds, 0.8, 7).unwrap();
    assert_eq!((s.train.n_rows(), s.test.n_rows()), (8, 2));
    let mut all: Vec<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..10).collect::<Vec<_>>());
    let again = split(&ds, 0.8, 7).unwrap();
    assert_eq!(again.train_indices, s.train_indices);
    assert_eq!(s.train.values().row(0), ds.values().row(s.train_indices[0]));
    assert_ne!(split(&ds, 0.8, 8).unwrap().train_indices, s.train_indices);
}

#[test]
fn split_rejects_degenerate_sides() {
    let ds = blob_dataset(2, 0);
    assert!(split(&ds, 0.99, 0).is_err());
    assert!(split(&ds, 1.0, 0).is_err());
    assert!(split(&ds.select_rows(&[0, 1, 2, 3]), 0.5, 0).is_err());
}

#[test]
fn type2_only_plan_on_blobs() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = blob_plan(dir.path(), 40);
    plan.methods = vec![MethodSpec::Type2(FcmConfig::default())];
    let r = run_plan(&plan).unwrap();
    assert_eq!(r.comparison.len(), 1);
    let cell = &r.comparison[0];
    assert!(cell.error.is_none(), "{:?}", cell.error);
    assert!(cell.train.as_ref().unwrap().silhouette_overall.unwrap() > 0.5);
    assert!(cell.test.as_ref().unwrap().silhouette_overall.unwrap() > 0.5);
    assert_eq!(cell.rules.as_ref().unwrap().rules.len(), 3);
    assert_eq!((r.n_train, r.n_test), (96, 24));
}

#[test]
fn empty_method_list_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = blob_plan(dir.path(), 10);
    plan.methods.clear();
    assert!(run_plan(&plan).is_err());
}

#[test]
fn comparison_matches_manual_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = blob_plan(dir.path(), 30);
    plan.methods = vec![MethodSpec::Type2(FcmConfig::default())];
    plan.seeds = vec![4];
    let r = run_plan(&plan).unwrap();

    let data = plan.dataset.load().unwrap();
    let parts = split(&data, 0.8, plan.split_seed).unwrap();
    let pipeline = fuzzex_core::FittedPipeline::fit(&parts.train, plan.variance_threshold).unwrap();
    let z = pipeline.transform(&parts.train).unwrap();
    let p = fcm_type2(z.view(), &FcmConfig { seed: 4, ..Default::default() }).unwrap();
    let labels: Vec<Option<usize>> = p.labels.iter().copied().map(Some).collect();
    let manual = MetricsReport::evaluate("type2", z.view(), &labels, 0.0, Default::default()).unwrap();
    let got = r.comparison[0].train.as_ref().unwrap();
    assert_eq!(got.silhouette_overall, manual.silhouette_overall);
    assert_eq!(got.entropy, manual.entropy);
}

#[test]
fn four_methods_fill_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = blob_plan(dir.path(), 30);
    plan.seeds = vec![0, 1];
    let r = run_plan(&plan).unwrap();
    let names: Vec<&str> = r.comparison.iter().map(|c| c.method.as_str()).collect();
    assert_eq!(names, ["type2", "type1", "dbscan", "agglomerative"].repeat(2));
    for c in &r.comparison {
        assert!(c.error.is_none(), "{}: {:?}", c.method, c.error);
        assert_eq!(c.test.is_some(), c.spec.is_fuzzy());
    }
    let table = fuzzex_core::compare_methods(&r.train_reports());
    assert_eq!(table.rows.len(), 8);
    let csv = table.to_csv();
    assert!(csv.starts_with(fuzzex_core::metrics::COMPARISON_HEADER));
}

#[test]
fn single_cell_sweep_equals_direct_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = blob_plan(dir.path(), 30);
    plan.methods = vec![MethodSpec::Type2(FcmConfig::default())];
    plan.sweep = Some(SweepSpec {
        fuzzifiers: vec![2.0],
        clusters: vec![3],
        repetitions: 1,
        ..Default::default()
    });
    let r = run_plan(&plan).unwrap();
    let s = r.sensitivity.unwrap();
    assert_eq!(s.cells.len(), 1);
    assert_eq!(s.cells[0].mean, r.comparison[0].train.as_ref().unwrap().silhouette_overall);
    assert_eq!(s.best, Some(0));
}

#[test]
fn failing_sweep_cell_does_not_stop_others() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = blob_plan(dir.path(), 5);
    plan.methods = vec![MethodSpec::Type2(FcmConfig::default())];
    plan.sweep = Some(SweepSpec {
        fuzzifiers: vec![2.0],
        clusters: vec![3, 50],
        repetitions: 2,
        ..Default::default()
    });
    let r = run_plan(&plan).unwrap();
    let s = r.sensitivity.unwrap();
    assert_eq!(s.cells[0].silhouettes.len(), 2);
    assert_eq!(s.cells[0].seeds, vec![0, 1]);
    assert_eq!(s.cells[1].seeds, vec![2, 3]);
    assert_eq!(s.cells[1].errors.len(), 2);
    assert_eq!(s.cells[1].mean, None);
    assert_eq!(s.best, Some(0));
}

#[test]
fn scalability_series() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = blob_plan(dir.path(), 100);
    plan.methods = vec![MethodSpec::Type2(FcmConfig::default())];
    plan.scalability = Some(ScalabilitySpec {
        sizes: vec![60, 120, 240],
        repetitions: 3,
        ..Default::default()
    });
    let r = run_plan(&plan).unwrap();
    let s = r.scalability.unwrap();
    assert_eq!(s.points.len(), 3);
    for p in &s.points {
        assert_eq!(p.timings.len(), 3);
        let mut t = p.timings.clone();
        t.sort_by(f64::total_cmp);
        assert_eq!(p.median_seconds, t[1]);
    }
    assert!(s.fit.is_some());

    plan.scalability = Some(ScalabilitySpec {
        sizes: vec![100],
        repetitions: 1,
        ..Default::default()
    });
    assert!(run_plan(&plan).unwrap().scalability.unwrap().fit.is_none());
    plan.scalability = Some(ScalabilitySpec {
        sizes: vec![100, 100_000],
        ..Default::default()
    });
    assert!(run_plan(&plan).is_err());
}

#[test]
fn results_are_reproducible_apart_from_timings() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = blob_plan(dir.path(), 20);
    plan.sweep = Some(SweepSpec {
        repetitions: 2,
        ..Default::default()
    });
    let a = canonical_json(&run_plan(&plan).unwrap()).unwrap();
    let b = canonical_json(&run_plan(&plan).unwrap()).unwrap();
    assert_eq!(a, b);
    assert!(!a.contains("runtime_seconds"));
}

#[test]
fn result_directory_layout() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = blob_plan(dir.path(), 20);
    plan.sweep = Some(SweepSpec {
        repetitions: 1,
        ..Default::default()
    });
    plan.scalability = Some(ScalabilitySpec {
        sizes: vec![30, 60],
        repetitions: 1,
        ..Default::default()
    });
    let r = run_plan(&plan).unwrap();
    let out = dir.path().join("results");
    write_results(&r, &out).unwrap();
    for f in ["comparison.csv", "comparison_test.csv", "sensitivity.csv", "scalability.csv", "rules.txt", "result.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let sens = std::fs::read_to_string(out.join("sensitivity.csv")).unwrap();
    assert_eq!(sens.lines().count(), 10);
    assert!(sens.starts_with(SENSITIVITY_HEADER));
    let back: ExperimentResult = serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn plan_from_toml() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("plan.toml");
    std::fs::write(
        &cfg,
        r#"
seeds = [1, 2]
theta = 0.6

[dataset]
path = "air.csv"
format = "uci"
features = ["CO(GT)", "NOx(GT)"]

[[methods]]
kind = "type2"
clusters = 4
spread = 0.1

[[methods]]
kind = "dbscan"
eps = 0.3

[[methods]]
kind = "agglomerative"
linkage = "complete"

[sweep]
fuzzifiers = [1.5, 2.0]
"#,
    )
    .unwrap();
    let plan = ExperimentPlan::from_file(&cfg).unwrap();
    assert_eq!(plan.dataset.path, dir.path().join("air.csv"));
    assert_eq!(plan.split_fraction, 0.8);
    assert_eq!(plan.seeds, vec![1, 2]);
    match &plan.methods[0] {
        MethodSpec::Type2(c) => assert_eq!((c.clusters, c.spread, c.fuzzifier), (4, 0.1, 2.0)),
        other => panic!("{other:?}"),
    }
    assert_eq!(plan.methods[1], MethodSpec::Dbscan(DbscanParams { eps: 0.3, min_pts: 5 }));
    let sweep = plan.sweep.unwrap();
    assert_eq!((sweep.clusters, sweep.repetitions), (vec![2, 3, 4], 5));

    assert!(ExperimentPlan::from_toml("split_fraction = 1.5\n[dataset]\npath = \"x\"\n").is_err());
    assert!(ExperimentPlan::from_toml("[dataset]\npath = \"x\"\n[scalability]\nsizes = [10, 5]\n").is_err());
    assert!(ExperimentPlan::from_toml("[dataset]\n").is_err());
}
