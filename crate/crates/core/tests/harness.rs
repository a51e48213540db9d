use std::fs;
use std::path::{Path, PathBuf};

use svrnaq_core::harness::{
    self, compare_member_path, compare_merged_path, OptimizerKind, Prepared, RunConfig, RunStatus,
};
use svrnaq_core::Objective;
use tempfile::TempDir;

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn wine(out: &Path) -> RunConfig {
    let mut c = RunConfig::preset("wine-b32").unwrap();
    let root = workspace_root();
    c.set("dataset", root.join("data/winequality-white.csv").to_str().unwrap()).unwrap();
    c.set("fallback_dataset", root.join("data/winequality-red.csv").to_str().unwrap()).unwrap();
    c.out = out.to_path_buf();
    c
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn quadratic_preset_reaches_tight_gradient_norm() {
    let dir = TempDir::new().unwrap();
    let mut c = RunConfig::preset("quadratic").unwrap();
    c.out = dir.path().join("q.csv");
    let prepared = Prepared::new(&c).unwrap();
    let s = harness::run_prepared(&prepared, &c, &c.out).unwrap();
    assert_eq!(s.status, RunStatus::Completed);
    let g = prepared.objective().full_gradient(&s.params).unwrap();
    assert!(g.norm() < 1e-6, "gradient norm {}", g.norm());
}

#[test]
fn wine_svrlnaq_twenty_epochs() {
    let dir = TempDir::new().unwrap();
    let c = wine(&dir.path().join("w.csv"));
    assert_eq!(c.optimizer, OptimizerKind::SvrLnaq);
    let s = harness::run(&c).unwrap();
    assert_eq!(s.status, RunStatus::Completed);
    assert_eq!(s.records.len(), 21);
    let first = s.records[1].train_rmse.unwrap();
    let last = s.final_record().unwrap().train_rmse.unwrap();
    assert!(last < first, "{last} vs {first}");
    assert!(s.records.iter().all(|r| r.train_loss.is_finite()));
    assert_eq!(data_rows(&c.out).len(), 21);
    assert_eq!(harness::read_params(&s.params_path).unwrap(), s.params);
}

#[test]
fn svrg_beats_plain_sgd_on_wine() {
    let dir = TempDir::new().unwrap();
    let base = wine(&dir.path().join("w.csv"));
    let configs: Vec<_> = [OptimizerKind::Sgd, OptimizerKind::Svrg]
        .into_iter()
        .map(|k| {
            let mut c = base.clone();
            c.optimizer = k;
            c.epochs = 10;
            c
        })
        .collect();
    let cmp = harness::compare(&configs, &dir.path().join("cmp")).unwrap();
    let fin = |i: usize| cmp.runs[i].final_record().unwrap().train_loss;
    assert!(fin(1) < fin(0), "svrg {} sgd {}", fin(1), fin(0));
}

#[test]
fn compare_writes_member_and_merged_files() {
    let dir = TempDir::new().unwrap();
    let base = wine(&dir.path().join("w.csv"));
    let kinds = [OptimizerKind::Svrg, OptimizerKind::SvrLnaq, OptimizerKind::Adam];
    let configs: Vec<_> = kinds
        .iter()
        .map(|&k| {
            let mut c = base.clone();
            c.optimizer = k;
            c.epochs = 3;
            c
        })
        .collect();
    let prefix = dir.path().join("run");
    let cmp = harness::compare(&configs, &prefix).unwrap();
    assert_eq!(cmp.merged_path, compare_merged_path(&prefix));
    for k in kinds {
        let rows = data_rows(&compare_member_path(&prefix, k));
        assert_eq!(rows.len(), 4);
    }
    let merged = data_rows(&cmp.merged_path);
    assert_eq!(merged.len(), 4);
    assert!(merged.iter().all(|r| r.len() == merged[0].len()));
    // Every run starts from the same weights, so the epoch-0 losses agree.
    let losses: Vec<f64> = cmp.runs.iter().map(|s| s.records[0].train_loss).collect();
    assert!(losses.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn identical_configs_give_identical_metrics() {
    let dir = TempDir::new().unwrap();
    let mut a = wine(&dir.path().join("a.csv"));
    a.epochs = 3;
    let mut b = a.clone();
    b.out = dir.path().join("b.csv");
    let sa = harness::run(&a).unwrap();
    let sb = harness::run(&b).unwrap();
    assert_eq!(sa.params, sb.params);
    let strip = |p: &Path| -> Vec<Vec<String>> {
        data_rows(p).into_iter().map(|mut r| {
            r.pop();
            r
        }).collect()
    };
    assert_eq!(strip(&a.out), strip(&b.out));
}

#[test]
fn zero_epochs_write_only_the_header() {
    let dir = TempDir::new().unwrap();
    let mut c = wine(&dir.path().join("z.csv"));
    c.epochs = 0;
    let s = harness::run(&c).unwrap();
    assert_eq!(s.status, RunStatus::Completed);
    assert!(data_rows(&c.out).is_empty());
}

#[test]
fn divergence_leaves_a_parseable_prefix() {
    let dir = TempDir::new().unwrap();
    let mut c = wine(&dir.path().join("d.csv"));
    c.alpha0 = 1e6;
    c.epochs = 5;
    let s = harness::run(&c).unwrap();
    let RunStatus::Diverged { epoch, .. } = s.status else {
        panic!("expected divergence, got {:?}", s.status);
    };
    let text = fs::read_to_string(&c.out).unwrap();
    assert!(text.lines().last().unwrap().starts_with(&format!("# diverged epoch={epoch}")));
    let rows = data_rows(&c.out);
    assert_eq!(rows.len(), epoch);
    for r in rows {
        assert_eq!(r.len(), harness::METRICS_HEADER.len());
        assert!(r[1].parse::<f64>().unwrap().is_finite());
    }
}

#[test]
fn preset_directory_override() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("tiny.conf"),
        "dataset = synthetic:quadratic:3:4\nlayers = 3-1\noptimizer = svrg\nbatch = 4\nepochs = 2\n",
    )
    .unwrap();
    std::env::set_var(harness::PRESET_DIR_ENV, dir.path());
    let c = RunConfig::preset("tiny");
    let builtin = RunConfig::preset("quadratic");
    std::env::remove_var(harness::PRESET_DIR_ENV);
    let c = c.unwrap();
    assert_eq!(c.optimizer, OptimizerKind::Svrg);
    assert_eq!(c.layers, vec![3, 1]);
    assert!(builtin.is_ok());
}

#[test]
fn gradcheck_passes_on_wine_network() {
    let dir = TempDir::new().unwrap();
    let c = wine(&dir.path().join("g.csv"));
    let r = harness::gradcheck(&c, 1e-6).unwrap();
    assert!(r.passed(), "max rel err {}", r.max_rel_err);
    assert_eq!(r.coordinates, 169);
    assert!(!harness::gradcheck(&c, 0.0).unwrap().passed());
}
