//! Harness-level contract tests: config parsing, report cardinality,
//! dataset robustness, and the baseline's independence from the detector.

use sargd_cli::config::ExperimentConfig;
use sargd_cli::{corpus, experiment};

fn write_config(path: &std::path::Path, body: &str) {
    std::fs::write(path, body).unwrap();
}

fn small_experiment(root: &std::path::Path, extra: &str) -> ExperimentConfig {
    let corpus_dir = root.join("corpus");
    corpus::gen_corpus(&corpus_dir, 1, 3).unwrap();
    let cfg_path = root.join("exp.toml");
    write_config(
        &cfg_path,
        &format!(
            r#"
dataset_dir = "{}"
output_dir = "{}"
scales = [2]
variants = ["baseline", "rgr_only", "rgr_sag"]
master_seed = 5
total_steps = 20
deterministic_timing = true
{extra}
"#,
            corpus_dir.display(),
            root.join("out").display()
        ),
    );
    ExperimentConfig::load(&cfg_path).unwrap()
}

#[test]
fn results_csv_has_one_row_per_image_scale_variant() {
    let root = tempfile::tempdir().unwrap();
    let cfg = small_experiment(root.path(), "");
    let out = experiment::run_experiment(&cfg).unwrap();
    assert_eq!(out.records.len(), 3); // 1 image x 1 scale x 3 variants
    let text = std::fs::read_to_string(&out.results_csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "header + 3 data rows");
    assert_eq!(lines[0], "image,scale,variant,psnr_y,ssim_y,wall_ms,seed");
    // traces and summary exist
    assert!(out.summary_md.exists());
    for r in &out.records {
        assert!(
            r.trace_path.exists(),
            "missing trace {}",
            r.trace_path.display()
        );
        let trace = std::fs::read_to_string(&r.trace_path).unwrap();
        assert!(trace.starts_with("t,s_r,artifact_fraction,rgr_applied,sag_updated\n"));
        assert_eq!(trace.lines().count(), 21, "header + T rows");
    }
}

#[test]
fn unreadable_images_are_skipped_not_fatal() {
    let root = tempfile::tempdir().unwrap();
    let corpus_dir = root.path().join("corpus");
    corpus::gen_corpus(&corpus_dir, 2, 3).unwrap();
    std::fs::write(corpus_dir.join("broken.png"), b"not a png at all").unwrap();
    let images = experiment::load_dataset(&corpus_dir).unwrap();
    assert_eq!(images.len(), 2, "the broken file is skipped");
}

#[test]
fn empty_dataset_is_an_error() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("empty");
    std::fs::create_dir_all(&dir).unwrap();
    assert!(experiment::load_dataset(&dir).is_err());
}

#[test]
fn baseline_is_invariant_to_detector_choice() {
    let root = tempfile::tempdir().unwrap();
    let cfg_stat = {
        let mut c = small_experiment(root.path(), "[detector]\nkind = \"stat_divergence\"\n");
        c.output_dir = root.path().join("out_stat");
        c.variants = vec!["baseline".into()];
        c
    };
    let cfg_oracle = {
        let mut c = cfg_stat.clone();
        c.detector.kind = "oracle".into();
        c.output_dir = root.path().join("out_oracle");
        c
    };
    let a = experiment::run_experiment(&cfg_stat).unwrap();
    let b = experiment::run_experiment(&cfg_oracle).unwrap();
    assert_eq!(
        std::fs::read(&a.results_csv).unwrap(),
        std::fs::read(&b.results_csv).unwrap(),
        "baseline never invokes the detector"
    );
}

#[test]
fn step_sweep_rows_are_sorted_finite_and_positive() {
    let root = tempfile::tempdir().unwrap();
    let mut cfg = small_experiment(root.path(), "");
    cfg.step_sweep = vec![40, 10, 20];
    let (path, rows) = experiment::run_step_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 3);
    let ts: Vec<usize> = rows.iter().map(|(t, _)| *t).collect();
    assert_eq!(ts, vec![10, 20, 40], "sorted by T");
    for (_, p) in &rows {
        assert!(p.is_finite() && *p > 0.0);
    }
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("T,mean_psnr_y\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn single_step_sweep_on_one_image_gives_one_row() {
    let root = tempfile::tempdir().unwrap();
    let mut cfg = small_experiment(root.path(), "");
    cfg.step_sweep = vec![50];
    let (_, rows) = experiment::run_step_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].0, 50);
}

#[test]
fn config_validation_rejects_bad_values() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path();
    let write = |name: &str, body: &str| {
        let p = dir.join(name);
        write_config(&p, body);
        p
    };
    let base = |scales: &str, variants: &str, extra: &str| {
        format!(
            r#"
dataset_dir = "d"
output_dir = "o"
scales = {scales}
variants = {variants}
master_seed = 1
{extra}
"#
        )
    };
    assert!(ExperimentConfig::load(&write("a.toml", &base("[5]", "[\"baseline\"]", ""))).is_err());
    assert!(ExperimentConfig::load(&write("b.toml", &base("[]", "[\"baseline\"]", ""))).is_err());
    assert!(ExperimentConfig::load(&write("c.toml", &base("[2]", "[\"nonsense\"]", ""))).is_err());
    assert!(ExperimentConfig::load(&write(
        "d.toml",
        &base("[2]", "[\"baseline\"]", "step_sweep = [5]")
    ))
    .is_err());
    assert!(ExperimentConfig::load(&write(
        "e.toml",
        &base("[2]", "[\"baseline\"]", "[corruptor]\nmode = \"weird\"")
    ))
    .is_err());
    assert!(ExperimentConfig::load(&write(
        "f.toml",
        &base("[2]", "[\"baseline\"]", "total_steps = 0")
    ))
    .is_err());
}

#[test]
fn explicit_corruptor_regions_are_honored() {
    let root = tempfile::tempdir().unwrap();
    let cfg = small_experiment(
        root.path(),
        "[corruptor]\nregions = [[0, 0, 4, 4]]\nmode = \"bias\"\nmagnitude = 4.0\n",
    );
    // runs cleanly and produces overlays for detector-backed variants
    let out = experiment::run_experiment(&cfg).unwrap();
    assert_eq!(out.records.len(), 3);
    let overlays: Vec<_> = std::fs::read_dir(cfg.output_dir.join("overlays"))
        .unwrap()
        .collect();
    assert_eq!(overlays.len(), 2, "rgr_only and rgr_sag emit overlays");
}
