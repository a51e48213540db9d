//! Flat `key = value` run configurations and the named presets.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::TargetColumns;
use crate::error::{Error, Result};
use crate::model::OutputActivation;
use crate::optim::Memory;

/// Environment variable naming a directory searched for `<name>.conf`
/// before the built-in presets.
pub const PRESET_DIR_ENV: &str = "SVRNAQ_PRESET_DIR";

const BUILTIN_PRESETS: &[(&str, &str)] = &[
    ("wine-b32", include_str!("../../presets/wine-b32.conf")),
    ("wine-b8", include_str!("../../presets/wine-b8.conf")),
    ("casp-b64", include_str!("../../presets/casp-b64.conf")),
    ("casp-b16", include_str!("../../presets/casp-b16.conf")),
    ("quadratic", include_str!("../../presets/quadratic.conf")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Sgd,
    Adam,
    Svrg,
    Svrg2,
    Naq,
    Lnaq,
    Onaq,
    Olnaq,
    SvrNaq,
    SvrLnaq,
    /// Full-batch NAQ with `μ = 0`.
    Bfgs,
    /// Full-batch LNAQ with `μ = 0`.
    Lbfgs,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 12] = [
        OptimizerKind::Sgd,
        OptimizerKind::Adam,
        OptimizerKind::Svrg,
        OptimizerKind::Svrg2,
        OptimizerKind::Naq,
        OptimizerKind::Lnaq,
        OptimizerKind::Onaq,
        OptimizerKind::Olnaq,
        OptimizerKind::SvrNaq,
        OptimizerKind::SvrLnaq,
        OptimizerKind::Bfgs,
        OptimizerKind::Lbfgs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Svrg => "svrg",
            OptimizerKind::Svrg2 => "svrg2",
            OptimizerKind::Naq => "naq",
            OptimizerKind::Lnaq => "lnaq",
            OptimizerKind::Onaq => "onaq",
            OptimizerKind::Olnaq => "olnaq",
            OptimizerKind::SvrNaq => "svrnaq",
            OptimizerKind::SvrLnaq => "svrlnaq",
            OptimizerKind::Bfgs => "bfgs",
            OptimizerKind::Lbfgs => "lbfgs",
        }
    }

    /// Memory mode for curvature-based methods; `None` for first-order ones.
    pub fn memory(self, m: usize) -> Option<Memory> {
        match self {
            OptimizerKind::Sgd | OptimizerKind::Adam | OptimizerKind::Svrg => None,
            OptimizerKind::Svrg2
            | OptimizerKind::Naq
            | OptimizerKind::Onaq
            | OptimizerKind::SvrNaq
            | OptimizerKind::Bfgs => Some(Memory::Full),
            OptimizerKind::Lnaq | OptimizerKind::Olnaq | OptimizerKind::SvrLnaq | OptimizerKind::Lbfgs => {
                Some(Memory::Limited(m))
            }
        }
    }

    pub fn is_limited_memory(self) -> bool {
        matches!(self.memory(1), Some(Memory::Limited(_)))
    }

    /// Momentum actually used by this optimizer under `config`.
    pub fn momentum(self, config: &RunConfig) -> Option<f64> {
        match self {
            OptimizerKind::Naq | OptimizerKind::Lnaq | OptimizerKind::SvrNaq | OptimizerKind::SvrLnaq => {
                Some(config.mu)
            }
            OptimizerKind::Onaq | OptimizerKind::Olnaq => Some(config.onaq_mu.unwrap_or(config.mu)),
            _ => None,
        }
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let alias = match s.as_str() {
            "svrg+ii" | "svrg-ii" => "svrg2",
            "svr-naq" => "svrnaq",
            "svr-lnaq" => "svrlnaq",
            "l-bfgs" => "lbfgs",
            other => other,
        };
        OptimizerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == alias)
            .ok_or_else(|| Error::Config(format!("unknown optimizer `{s}`")))
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Built-in synthetic regression problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TeacherKind {
    /// 9 inputs, 45 730 rows.
    Casp,
    /// 11 inputs, 4 898 rows.
    Wine,
}

/// Where the rows come from.
///
/// Text forms: a CSV path, `synthetic:quadratic:<features>:<cond>`,
/// `synthetic:casp` or `synthetic:wine`.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Csv(PathBuf),
    Quadratic { features: usize, cond: f64 },
    Teacher(TeacherKind),
}

impl FromStr for DataSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(rest) = s.strip_prefix("synthetic:") else {
            if s.is_empty() {
                return Err(Error::Config("empty dataset".into()));
            }
            return Ok(DataSource::Csv(PathBuf::from(s)));
        };
        let parts: Vec<&str> = rest.split(':').collect();
        match parts.as_slice() {
            ["casp"] => Ok(DataSource::Teacher(TeacherKind::Casp)),
            ["wine"] => Ok(DataSource::Teacher(TeacherKind::Wine)),
            ["quadratic", features, cond] => Ok(DataSource::Quadratic {
                features: parse_value("dataset features", features)?,
                cond: parse_value("dataset cond", cond)?,
            }),
            _ => Err(Error::Config(format!("unknown synthetic dataset `{s}`"))),
        }
    }
}

impl fmt::Display for DataSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataSource::Csv(path) => write!(f, "{}", path.display()),
            DataSource::Quadratic { features, cond } => write!(f, "synthetic:quadratic:{features}:{cond}"),
            DataSource::Teacher(TeacherKind::Casp) => f.write_str("synthetic:casp"),
            DataSource::Teacher(TeacherKind::Wine) => f.write_str("synthetic:wine"),
        }
    }
}

/// Which side of a CSV row holds the targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetSide {
    First,
    Last,
}

impl TargetSide {
    pub fn columns(self, k: usize) -> TargetColumns {
        match self {
            TargetSide::First => TargetColumns::First(k),
            TargetSide::Last => TargetColumns::Last(k),
        }
    }
}

/// Everything needed to reproduce one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: DataSource,
    /// Used when `dataset` is a CSV path that does not exist.
    pub fallback_dataset: Option<DataSource>,
    pub target: TargetSide,
    pub layers: Vec<usize>,
    pub output: OutputActivation,
    pub optimizer: OptimizerKind,
    pub batch: usize,
    /// Curvature pairs kept by limited-memory optimizers.
    pub memory: usize,
    pub mu: f64,
    /// Momentum for oNAQ / oLNAQ; falls back to `mu`.
    pub onaq_mu: Option<f64>,
    /// Initial step of the `α0 / √t` schedule.
    pub alpha0: f64,
    /// Step of SGD, SVRG and every SVRG bootstrap epoch.
    pub svrg_alpha: f64,
    pub adam_alpha: f64,
    pub epochs: usize,
    /// Drives weight initialization and mini-batch sampling.
    pub seed: u64,
    /// Drives the train/test shuffle.
    pub split_seed: u64,
    /// Drives synthetic data generation.
    pub data_seed: u64,
    pub train_fraction: f64,
    pub normalize: bool,
    pub out: PathBuf,
}

const KEYS: [&str; 21] = [
    "dataset",
    "fallback_dataset",
    "target",
    "layers",
    "output",
    "optimizer",
    "batch",
    "memory",
    "mu",
    "onaq_mu",
    "alpha0",
    "svrg_alpha",
    "adam_alpha",
    "epochs",
    "seed",
    "split_seed",
    "data_seed",
    "train_fraction",
    "normalize",
    "out",
    "preset",
];

/// Keys that `compare` allows to differ between member runs.
const OPTIMIZER_KEYS: [&str; 8] = [
    "optimizer",
    "memory",
    "mu",
    "onaq_mu",
    "alpha0",
    "svrg_alpha",
    "adam_alpha",
    "out",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("bad value `{value}` for `{key}`"))),
    }
}

fn parse_layers(value: &str) -> Result<Vec<usize>> {
    value
        .split(['-', ','])
        .map(|p| parse_value("layers", p))
        .collect()
}

impl RunConfig {
    /// Defaults for everything except the data source and architecture.
    pub fn new(dataset: DataSource, layers: Vec<usize>) -> Self {
        RunConfig {
            dataset,
            fallback_dataset: None,
            target: TargetSide::Last,
            layers,
            output: OutputActivation::Linear,
            optimizer: OptimizerKind::SvrLnaq,
            batch: 32,
            memory: 4,
            mu: 0.95,
            onaq_mu: None,
            alpha0: 1.0,
            svrg_alpha: crate::optim::DEFAULT_SVRG_ALPHA,
            adam_alpha: 1e-3,
            epochs: 20,
            seed: 0,
            split_seed: 0,
            data_seed: 0,
            train_fraction: 0.8,
            normalize: true,
            out: PathBuf::from("metrics.csv"),
        }
    }

    /// Parses `key = value` lines. `#` starts a comment; `dataset` and
    /// `layers` are required unless a `preset` line supplies them.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config: Option<RunConfig> = None;
        let mut pending: Vec<(String, String)> = Vec::new();
        let mut seen = HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            if !seen.insert(key.clone()) {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", n + 1)));
            }
            if key == "preset" {
                config = Some(RunConfig::preset(value.trim())?);
            } else {
                pending.push((key, value.trim().to_owned()));
            }
        }
        let mut config = match config {
            Some(c) => c,
            None => {
                let get = |k: &str| pending.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
                let dataset = get("dataset").ok_or_else(|| Error::Config("missing `dataset`".into()))?;
                let layers = get("layers").ok_or_else(|| Error::Config("missing `layers`".into()))?;
                RunConfig::new(dataset.parse()?, parse_layers(layers)?)
            }
        };
        for (key, value) in &pending {
            config.set(key, value)?;
        }
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// A named preset, looked up in `$SVRNAQ_PRESET_DIR` first.
    pub fn preset(name: &str) -> Result<Self> {
        if let Some(dir) = std::env::var_os(PRESET_DIR_ENV) {
            let path = Path::new(&dir).join(format!("{name}.conf"));
            if path.is_file() {
                return Self::from_file(path);
            }
        }
        let text = BUILTIN_PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?;
        Self::parse(text)
    }

    pub fn preset_names() -> Vec<&'static str> {
        BUILTIN_PRESETS.iter().map(|(n, _)| *n).collect()
    }

    /// A config file if `spec` names an existing file, otherwise a preset.
    pub fn load(spec: &str) -> Result<Self> {
        if Path::new(spec).is_file() {
            Self::from_file(spec)
        } else {
            Self::preset(spec).map_err(|_| Error::Config(format!("`{spec}` is neither a file nor a preset")))
        }
    }

    /// Applies one override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "dataset" => self.dataset = value.parse()?,
            "fallback_dataset" => {
                self.fallback_dataset = match value {
                    "" | "none" => None,
                    v => Some(v.parse()?),
                }
            }
            "target" => {
                self.target = match value.to_ascii_lowercase().as_str() {
                    "first" => TargetSide::First,
                    "last" => TargetSide::Last,
                    _ => return Err(Error::Config(format!("bad value `{value}` for `target`"))),
                }
            }
            "layers" => self.layers = parse_layers(value)?,
            "output" => self.output = value.parse()?,
            "optimizer" => self.optimizer = value.parse()?,
            "batch" => self.batch = parse_value(key, value)?,
            "memory" => self.memory = parse_value(key, value)?,
            "mu" => self.mu = parse_value(key, value)?,
            "onaq_mu" => {
                self.onaq_mu = match value {
                    "" | "none" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "alpha0" => self.alpha0 = parse_value(key, value)?,
            "svrg_alpha" => self.svrg_alpha = parse_value(key, value)?,
            "adam_alpha" => self.adam_alpha = parse_value(key, value)?,
            "epochs" => self.epochs = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "split_seed" => self.split_seed = parse_value(key, value)?,
            "data_seed" => self.data_seed = parse_value(key, value)?,
            "train_fraction" => self.train_fraction = parse_value(key, value)?,
            "normalize" => self.normalize = parse_bool(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "preset" => return Err(Error::Config("`preset` must come from a config file".into())),
            _ => {
                return Err(Error::Config(format!(
                    "unknown key `{key}` (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Checks everything that does not need the data.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.layers.len() < 2 || self.layers.contains(&0) {
            return bad(format!("invalid layers {:?}", self.layers));
        }
        if self.batch == 0 {
            return bad("batch must be at least 1".into());
        }
        if self.optimizer.is_limited_memory() && self.memory == 0 {
            return bad(format!("{} needs memory >= 1", self.optimizer));
        }
        if let Some(mu) = self.optimizer.momentum(self) {
            if !(0.0..1.0).contains(&mu) {
                return bad(format!("{} needs 0 <= mu < 1, got {mu}", self.optimizer));
            }
        }
        for (key, v) in [
            ("alpha0", self.alpha0),
            ("svrg_alpha", self.svrg_alpha),
            ("adam_alpha", self.adam_alpha),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{key} must be positive, got {v}"));
            }
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train_fraction must be in (0, 1), got {}", self.train_fraction));
        }
        if let DataSource::Quadratic { features, cond } = self.dataset {
            if self.layers != [features, 1] {
                return bad(format!("synthetic quadratic needs layers {features}-1"));
            }
            if !(cond >= 1.0) {
                return bad(format!("condition number {cond} < 1"));
            }
        }
        Ok(())
    }

    /// Canonical `(key, value)` pairs, excluding `out`.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let opt = |v: &Option<String>| v.clone().unwrap_or_else(|| "none".into());
        vec![
            ("dataset", self.dataset.to_string()),
            ("fallback_dataset", opt(&self.fallback_dataset.as_ref().map(|d| d.to_string()))),
            (
                "target",
                match self.target {
                    TargetSide::First => "first".into(),
                    TargetSide::Last => "last".into(),
                },
            ),
            (
                "layers",
                self.layers.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("-"),
            ),
            ("output", self.output.to_string()),
            ("optimizer", self.optimizer.to_string()),
            ("batch", self.batch.to_string()),
            ("memory", self.memory.to_string()),
            ("mu", self.mu.to_string()),
            ("onaq_mu", opt(&self.onaq_mu.map(|m| m.to_string()))),
            ("alpha0", self.alpha0.to_string()),
            ("svrg_alpha", self.svrg_alpha.to_string()),
            ("adam_alpha", self.adam_alpha.to_string()),
            ("epochs", self.epochs.to_string()),
            ("seed", self.seed.to_string()),
            ("split_seed", self.split_seed.to_string()),
            ("data_seed", self.data_seed.to_string()),
            ("train_fraction", self.train_fraction.to_string()),
            ("normalize", self.normalize.to_string()),
        ]
    }

    /// One-line `key=value` rendering used in metrics headers.
    pub fn summary_line(&self) -> String {
        self.pairs()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// The pairs `compare` requires to agree.
    pub(crate) fn shared_pairs(&self) -> Vec<(&'static str, String)> {
        self.pairs()
            .into_iter()
            .filter(|(k, _)| !OPTIMIZER_KEYS.contains(k))
            .collect()
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.pairs() {
            writeln!(f, "{k} = {v}")?;
        }
        writeln!(f, "out = {}", self.out.display())
    }
}
