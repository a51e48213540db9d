//! Training runs, metrics files and optimizer comparisons.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};

use crate::data::{load_csv, split_indices, znormalize, Dataset, SplitSpec, SyntheticQuadratic, TeacherRegression};
use crate::error::{Error, Result};
use crate::model::{self, Batch, NetworkObjective, NetworkSpec, OutputActivation};
use crate::numerics::{uniform_init, Rng, Stream, Vector};
use crate::optim::{
    Adam, AdamConfig, BatchSampler, Counters, Memory, Naq, NaqConfig, Optimizer, Sgd, Svrg, SvrgII, SvrgIIConfig,
    SvrNaq, SvrNaqConfig,
};

use super::config::{DataSource, OptimizerKind, RunConfig, TeacherKind};

/// Column names of a metrics file, in order.
pub const METRICS_HEADER: [&str; 9] = [
    "epoch",
    "train_loss",
    "train_rmse",
    "test_rmse_or_error",
    "test_accuracy",
    "full_grad_evals",
    "minibatch_grad_evals",
    "curvature_skips",
    "wall_time_s",
];

/// Half-width of the uniform weight initialization.
pub const INIT_RANGE: f64 = 0.5;

/// Metrics after one epoch. Epoch 0 describes the initial weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub epoch: usize,
    pub train_loss: f64,
    /// `None` for classifiers.
    pub train_rmse: Option<f64>,
    /// Test RMSE for regression, test error rate for classification.
    /// `None` without a test set.
    pub test_rmse_or_error: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub full_grad_evals: u64,
    pub minibatch_grad_evals: u64,
    pub curvature_skips: u64,
    pub wall_time_s: f64,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RunRecord {
    fn csv_cells(&self) -> Vec<String> {
        vec![
            self.epoch.to_string(),
            self.train_loss.to_string(),
            cell(self.train_rmse),
            cell(self.test_rmse_or_error),
            cell(self.test_accuracy),
            self.full_grad_evals.to_string(),
            self.minibatch_grad_evals.to_string(),
            self.curvature_skips.to_string(),
            format!("{:.6}", self.wall_time_s),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    Diverged { epoch: usize, reason: String },
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub optimizer: OptimizerKind,
    pub records: Vec<RunRecord>,
    pub status: RunStatus,
    pub metrics_path: PathBuf,
    pub params_path: PathBuf,
    /// Parameters after the last completed epoch.
    pub params: Vector,
}

impl RunSummary {
    pub fn final_record(&self) -> Option<&RunRecord> {
        self.records.last()
    }

    pub fn diverged(&self) -> bool {
        matches!(self.status, RunStatus::Diverged { .. })
    }
}

/// Data, architecture and initial weights shared by every optimizer of a
/// comparison.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub spec: NetworkSpec,
    pub train: Dataset,
    pub test: Dataset,
    pub w0: Vector,
}

fn generate(source: &DataSource, config: &RunConfig) -> Result<Dataset> {
    let k = *config.layers.last().expect("validated");
    let n_features = config.layers[0];
    match source {
        DataSource::Csv(path) => load_csv(path, n_features, config.target.columns(k)),
        DataSource::Quadratic { features, cond } => {
            Ok(SyntheticQuadratic::new(*features, *cond, config.data_seed).generate()?.0)
        }
        DataSource::Teacher(TeacherKind::Casp) => TeacherRegression::casp_like(config.data_seed).generate(),
        DataSource::Teacher(TeacherKind::Wine) => TeacherRegression::wine_like(config.data_seed).generate(),
    }
}

/// Loads the configured dataset, or the fallback when the primary CSV file
/// does not exist.
pub fn load_dataset(config: &RunConfig) -> Result<Dataset> {
    if let (DataSource::Csv(path), Some(fallback)) = (&config.dataset, &config.fallback_dataset) {
        if !path.exists() {
            warn!("{} not found, using {fallback}", path.display());
            return generate(fallback, config);
        }
    }
    generate(&config.dataset, config)
}

impl Prepared {
    /// Loads, splits and normalizes the data, then draws initial weights.
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let spec = NetworkSpec::new(
            config.layers.clone(),
            model::HiddenActivation::Sigmoid,
            config.output,
            match config.output {
                OutputActivation::Linear => model::LossKind::Mse,
                OutputActivation::Softmax => model::LossKind::CrossEntropy,
            },
        )?;
        let data = load_dataset(config)?;
        let (train_rows, test_rows) = split_indices(
            data.rows(),
            SplitSpec {
                train_fraction: config.train_fraction,
                shuffle_seed: config.split_seed,
            },
        )?;
        let data = if config.normalize {
            znormalize(&data, &train_rows, !spec.is_classifier())?
        } else {
            data
        };
        let train = data.subset(&train_rows);
        let test = data.subset(&test_rows);
        if config.batch > train.rows() {
            return Err(Error::Config(format!(
                "batch {} exceeds the {} training rows",
                config.batch,
                train.rows()
            )));
        }
        let mut rng = Rng::substream(config.seed, Stream::Init);
        let w0 = uniform_init(&mut rng, spec.param_count(), -INIT_RANGE, INIT_RANGE)?;
        Ok(Prepared { spec, train, test, w0 })
    }

    pub fn objective(&self) -> NetworkObjective<'_> {
        NetworkObjective {
            spec: &self.spec,
            data: &self.train,
        }
    }

    fn all_rows(ds: &Dataset) -> Vec<usize> {
        (0..ds.rows()).collect()
    }

    /// Metrics of `w` without counters or timing.
    pub fn evaluate(&self, w: &Vector) -> Result<RunRecord> {
        let train_rows = Self::all_rows(&self.train);
        let train = Batch::from_dataset(&self.train, &train_rows)?;
        let train_loss = model::loss(&self.spec, w, &train)?;
        let classifier = self.spec.is_classifier();
        let train_rmse = if classifier {
            None
        } else {
            Some(model::rmse(&self.spec, w, &train)?)
        };
        let (test_rmse_or_error, test_accuracy) = if self.test.rows() == 0 {
            (None, None)
        } else {
            let rows = Self::all_rows(&self.test);
            let test = Batch::from_dataset(&self.test, &rows)?;
            if classifier {
                let acc = model::accuracy(&self.spec, w, &test)?;
                (Some(1.0 - acc), Some(acc))
            } else {
                (Some(model::rmse(&self.spec, w, &test)?), None)
            }
        };
        Ok(RunRecord {
            epoch: 0,
            train_loss,
            train_rmse,
            test_rmse_or_error,
            test_accuracy,
            full_grad_evals: 0,
            minibatch_grad_evals: 0,
            curvature_skips: 0,
            wall_time_s: 0.0,
        })
    }
}

/// The optimizer `config` describes, starting from `w0`.
pub fn build_optimizer(config: &RunConfig, w0: Vector) -> Result<Box<dyn Optimizer + Send>> {
    let kind = config.optimizer;
    let memory = kind.memory(config.memory);
    let mu = kind.momentum(config).unwrap_or(0.0);
    Ok(match kind {
        OptimizerKind::Sgd => Box::new(Sgd::new(w0, config.svrg_alpha)?),
        OptimizerKind::Svrg => Box::new(Svrg::new(w0, config.svrg_alpha)?),
        OptimizerKind::Adam => Box::new(Adam::new(
            w0,
            AdamConfig {
                alpha: config.adam_alpha,
                ..AdamConfig::default()
            },
        )?),
        OptimizerKind::Svrg2 => {
            let mut c = SvrgIIConfig::new(config.alpha0, Memory::Full)?;
            c.bootstrap_alpha = config.svrg_alpha;
            Box::new(SvrgII::new(w0, c)?)
        }
        OptimizerKind::Naq | OptimizerKind::Lnaq => {
            Box::new(Naq::full_batch(w0, NaqConfig::new(mu, config.alpha0, memory.expect("qn"))?)?)
        }
        OptimizerKind::Bfgs | OptimizerKind::Lbfgs => {
            Box::new(Naq::full_batch(w0, NaqConfig::new(0.0, config.alpha0, memory.expect("qn"))?)?)
        }
        OptimizerKind::Onaq | OptimizerKind::Olnaq => {
            Box::new(Naq::online(w0, NaqConfig::new(mu, config.alpha0, memory.expect("qn"))?)?)
        }
        OptimizerKind::SvrNaq | OptimizerKind::SvrLnaq => {
            let mut c = SvrNaqConfig::new(mu, config.alpha0, memory.expect("qn"))?;
            c.bootstrap_alpha = config.svrg_alpha;
            Box::new(SvrNaq::new(w0, c)?)
        }
    })
}

/// `metrics.csv` → `metrics.params`
pub fn params_path_for(metrics: &Path) -> PathBuf {
    metrics.with_extension("params")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

struct MetricsWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl MetricsWriter {
    fn create(path: &Path, config: &RunConfig) -> Result<Self> {
        let mut w = MetricsWriter {
            path: path.to_owned(),
            out: create(path)?,
        };
        w.line(&format!("# {}", config.summary_line()))?;
        w.line(&METRICS_HEADER.join(","))?;
        Ok(w)
    }

    fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.out, "{text}")
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(&self.path, e))
    }

    fn record(&mut self, r: &RunRecord) -> Result<()> {
        self.line(&r.csv_cells().join(","))
    }
}

fn write_params(path: &Path, w: &Vector) -> Result<()> {
    let mut out = create(path)?;
    for x in w.iter() {
        writeln!(out, "{x}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a parameter file written by [`run`].
pub fn read_params(path: impl AsRef<Path>) -> Result<Vector> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|_| Error::Parse {
                row: i + 1,
                column: 1,
                message: format!("`{l}` is not a number"),
            })
        })
        .collect()
}

/// Trains on prepared data and writes metrics to `metrics_path`.
///
/// Metrics are flushed after every epoch. A divergence ends the run with a
/// `# diverged` marker line rather than an error.
pub fn run_prepared(prepared: &Prepared, config: &RunConfig, metrics_path: &Path) -> Result<RunSummary> {
    let mut optimizer = build_optimizer(config, prepared.w0.clone())?;
    let objective = prepared.objective();
    let mut batches = BatchSampler::new(config.seed, prepared.train.rows(), config.batch)?;
    let mut writer = MetricsWriter::create(metrics_path, config)?;
    let params_path = params_path_for(metrics_path);
    let mut records = Vec::with_capacity(config.epochs + 1);
    let mut status = RunStatus::Completed;

    if config.epochs > 0 {
        let r = prepared.evaluate(optimizer.params())?;
        writer.record(&r)?;
        records.push(r);
    }
    for epoch in 1..=config.epochs {
        let started = Instant::now();
        let report = optimizer.run_epoch(&objective, &mut batches);
        let wall_time_s = started.elapsed().as_secs_f64();
        let reason = match report {
            Ok(_) => {
                let r = prepared.evaluate(optimizer.params())?;
                if r.train_loss.is_finite() {
                    let Counters {
                        full_grad_evals,
                        minibatch_grad_evals,
                        curvature_skips,
                    } = optimizer.counters();
                    let r = RunRecord {
                        epoch,
                        full_grad_evals,
                        minibatch_grad_evals,
                        curvature_skips,
                        wall_time_s,
                        ..r
                    };
                    writer.record(&r)?;
                    info!(
                        "{} epoch {epoch}: train loss {:.6e}, test {}",
                        optimizer.name(),
                        r.train_loss,
                        cell(r.test_rmse_or_error)
                    );
                    records.push(r);
                    continue;
                }
                "train loss is not finite".to_owned()
            }
            Err(e @ Error::Divergence { .. }) => e.to_string(),
            Err(e) => return Err(e),
        };
        warn!("{} diverged in epoch {epoch}: {reason}", optimizer.name());
        writer.line(&format!("# diverged epoch={epoch}: {reason}"))?;
        status = RunStatus::Diverged { epoch, reason };
        break;
    }

    let params = optimizer.params().clone();
    if params.is_finite() {
        write_params(&params_path, &params)?;
    }
    Ok(RunSummary {
        optimizer: config.optimizer,
        records,
        status,
        metrics_path: metrics_path.to_owned(),
        params_path,
        params,
    })
}

/// Validates `config`, loads its data and trains, writing metrics to
/// `config.out` and final parameters next to it.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let prepared = Prepared::new(config)?;
    run_prepared(&prepared, config, &config.out)
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub runs: Vec<RunSummary>,
    pub merged_path: PathBuf,
}

/// `<prefix>_<optimizer>.csv`
pub fn compare_member_path(prefix: &Path, kind: OptimizerKind) -> PathBuf {
    suffixed(prefix, kind.as_str())
}

/// `<prefix>_compare.csv`
pub fn compare_merged_path(prefix: &Path) -> PathBuf {
    suffixed(prefix, "compare")
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!("_{suffix}.csv"));
    prefix.with_file_name(name)
}

/// Trains every config on the same data, initial weights and batch stream,
/// one worker thread per config, then writes a merged table keyed by epoch.
pub fn compare(configs: &[RunConfig], prefix: &Path) -> Result<Comparison> {
    let first = configs
        .first()
        .ok_or_else(|| Error::Config("compare needs at least one config".into()))?;
    let shared = first.shared_pairs();
    for c in configs {
        c.validate()?;
        let other = c.shared_pairs();
        if let Some(((k, a), (_, b))) = shared.iter().zip(&other).find(|(x, y)| x != y) {
            return Err(Error::Config(format!(
                "compared configs differ in `{k}` ({a} vs {b})"
            )));
        }
    }
    for (i, c) in configs.iter().enumerate() {
        if configs[..i].iter().any(|d| d.optimizer == c.optimizer) {
            return Err(Error::Config(format!("optimizer {} listed twice", c.optimizer)));
        }
    }
    let prepared = Prepared::new(first)?;
    let results: Vec<Result<RunSummary>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| {
                let prepared = &prepared;
                let path = compare_member_path(prefix, c.optimizer);
                scope.spawn(move || run_prepared(prepared, c, &path))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let merged_path = compare_merged_path(prefix);
    write_merged(&merged_path, &runs)?;
    Ok(Comparison { runs, merged_path })
}

/// Columns repeated per optimizer in the merged table; wall time is left
/// out so the table is reproducible byte for byte.
const MERGED_COLUMNS: [&str; 7] = [
    "train_loss",
    "train_rmse",
    "test_rmse_or_error",
    "test_accuracy",
    "full_grad_evals",
    "minibatch_grad_evals",
    "curvature_skips",
];

fn write_merged(path: &Path, runs: &[RunSummary]) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    let mut header = vec!["epoch".to_owned()];
    for r in runs {
        header.extend(MERGED_COLUMNS.iter().map(|c| format!("{}_{c}", r.optimizer)));
    }
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    let rows = runs.iter().map(|r| r.records.len()).max().unwrap_or(0);
    for i in 0..rows {
        let epoch = runs
            .iter()
            .find_map(|r| r.records.get(i))
            .map(|r| r.epoch)
            .unwrap_or(i);
        let mut line = vec![epoch.to_string()];
        for r in runs {
            match r.records.get(i) {
                Some(rec) => line.extend(rec.csv_cells()[1..=MERGED_COLUMNS.len()].iter().cloned()),
                None => line.extend(std::iter::repeat_n(String::new(), MERGED_COLUMNS.len())),
            }
        }
        writeln!(out, "{}", line.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(dir: &Path, optimizer: &str) -> RunConfig {
        let mut c = RunConfig::new(DataSource::Quadratic { features: 3, cond: 4.0 }, vec![3, 1]);
        c.set("optimizer", optimizer).unwrap();
        c.epochs = 3;
        c.batch = 10;
        c.normalize = false;
        c.out = dir.join("m.csv");
        c
    }

    #[test]
    fn metrics_file_layout() {
        let dir = tempfile::tempdir().unwrap();
        let c = tiny(dir.path(), "svrlnaq");
        let s = run(&c).unwrap();
        assert_eq!(s.status, RunStatus::Completed);
        assert_eq!(s.records.len(), 4);
        let text = std::fs::read_to_string(&c.out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# {}", c.summary_line()));
        assert!(!lines[0].contains("m.csv"));
        assert_eq!(lines[1], METRICS_HEADER.join(","));
        assert_eq!(lines.len(), 6);
        assert!(lines[2].starts_with("0,"));
        let params = read_params(&s.params_path).unwrap();
        assert_eq!(params, s.params);
        assert_eq!(params.len(), 4);
    }

    #[test]
    fn zero_epochs_writes_only_the_header() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = tiny(dir.path(), "svrg");
        c.epochs = 0;
        let s = run(&c).unwrap();
        assert!(s.records.is_empty());
        let text = std::fs::read_to_string(&c.out).unwrap();
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn counters_never_decrease() {
        let dir = tempfile::tempdir().unwrap();
        for opt in ["sgd", "adam", "svrg", "svrg2", "naq", "lnaq", "onaq", "olnaq", "svrnaq", "svrlnaq"] {
            let s = run(&tiny(dir.path(), opt)).unwrap();
            for w in s.records.windows(2) {
                assert!(w[1].full_grad_evals >= w[0].full_grad_evals, "{opt}");
                assert!(w[1].minibatch_grad_evals >= w[0].minibatch_grad_evals, "{opt}");
                assert!(w[1].train_loss.is_finite(), "{opt}");
            }
        }
    }

    #[test]
    fn divergence_leaves_marker_and_prefix() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = tiny(dir.path(), "sgd");
        c.dataset = DataSource::Quadratic { features: 3, cond: 1e6 };
        c.svrg_alpha = 10.0;
        c.epochs = 50;
        let s = run(&c).unwrap();
        assert!(s.diverged());
        let text = std::fs::read_to_string(&c.out).unwrap();
        assert!(text.lines().last().unwrap().starts_with("# diverged epoch="));
    }

    #[test]
    fn batch_larger_than_train_set_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = tiny(dir.path(), "svrg");
        c.batch = 10_000;
        assert!(matches!(run(&c), Err(Error::Config(_))));
        assert!(!c.out.exists());
    }

    #[test]
    fn compare_rejects_mismatched_configs() {
        let dir = tempfile::tempdir().unwrap();
        let a = tiny(dir.path(), "svrg");
        let mut b = tiny(dir.path(), "adam");
        b.batch = 5;
        assert!(compare(&[a.clone(), b], &dir.path().join("p")).is_err());
        assert!(compare(&[a.clone(), a], &dir.path().join("p")).is_err());
    }

    #[test]
    fn single_config_compare_matches_run() {
        let dir = tempfile::tempdir().unwrap();
        let c = tiny(dir.path(), "svrnaq");
        let s = run(&c).unwrap();
        let cmp = compare(std::slice::from_ref(&c), &dir.path().join("p")).unwrap();
        assert_eq!(cmp.runs[0].params, s.params);
        let strip = |p: &Path| -> Vec<String> {
            std::fs::read_to_string(p)
                .unwrap()
                .lines()
                .map(|l| l.rsplit_once(',').map(|(a, _)| a.to_owned()).unwrap_or(l.to_owned()))
                .collect()
        };
        assert_eq!(strip(&c.out), strip(&compare_member_path(&dir.path().join("p"), c.optimizer)));
    }

    #[test]
    fn merged_table_shape() {
        let dir = tempfile::tempdir().unwrap();
        let configs: Vec<RunConfig> = ["svrg", "adam", "olnaq"].iter().map(|o| tiny(dir.path(), o)).collect();
        let cmp = compare(&configs, &dir.path().join("cmp")).unwrap();
        let text = std::fs::read_to_string(&cmp.merged_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0].split(',').count(), 1 + 3 * MERGED_COLUMNS.len());
        assert!(lines[0].starts_with("epoch,svrg_train_loss"));
        assert!(dir.path().join("cmp_olnaq.csv").is_file());
    }

    #[test]
    fn fallback_dataset_used_when_file_missing() {
        let mut c = RunConfig::new(DataSource::Csv("does/not/exist.csv".into()), vec![3, 1]);
        c.fallback_dataset = Some(DataSource::Quadratic { features: 3, cond: 2.0 });
        assert_eq!(load_dataset(&c).unwrap().n_features(), 3);
        c.fallback_dataset = None;
        assert!(matches!(load_dataset(&c), Err(Error::Io { .. })));
    }
}
