//! Datasets: CSV ingestion, train/test splitting, z-normalization and
//! synthetic problems with known structure.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::NetworkSpec;
use crate::numerics::{uniform_init, Rng, Stream, Vector};

/// Per-column statistics applied by [`znormalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    /// Empty when targets were left in raw units.
    pub target_means: Vec<f64>,
    pub target_stds: Vec<f64>,
}

/// Rectangular table of features and targets, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    n_features: usize,
    n_outputs: usize,
    features: Vec<f64>,
    targets: Vec<f64>,
    column_names: Vec<String>,
    normalization: Option<Normalization>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        n_features: usize,
        n_outputs: usize,
        features: Vec<f64>,
        targets: Vec<f64>,
    ) -> Result<Self> {
        if n_features == 0 || n_outputs == 0 {
            return Err(Error::Schema("need at least one feature and one target".into()));
        }
        if !features.len().is_multiple_of(n_features) {
            return Err(Error::Schema(format!(
                "{} feature values do not fill rows of width {n_features}",
                features.len()
            )));
        }
        let rows = features.len() / n_features;
        if targets.len() != rows * n_outputs {
            return Err(Error::Schema(format!(
                "{rows} feature rows but {} target values for {n_outputs} outputs",
                targets.len()
            )));
        }
        let column_names = (0..n_features)
            .map(|i| format!("x{i}"))
            .chain((0..n_outputs).map(|i| format!("y{i}")))
            .collect();
        Ok(Dataset {
            name: name.into(),
            n_features,
            n_outputs,
            features,
            targets,
            column_names,
            normalization: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rows(&self) -> usize {
        self.features.len() / self.n_features
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn features(&self, row: usize) -> &[f64] {
        &self.features[row * self.n_features..(row + 1) * self.n_features]
    }

    pub fn targets(&self, row: usize) -> &[f64] {
        &self.targets[row * self.n_outputs..(row + 1) * self.n_outputs]
    }

    /// Feature names followed by target names.
    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn normalization(&self) -> Option<&Normalization> {
        self.normalization.as_ref()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut targets = Vec::with_capacity(indices.len() * self.n_outputs);
        for &i in indices {
            features.extend_from_slice(self.features(i));
            targets.extend_from_slice(self.targets(i));
        }
        Dataset {
            features,
            targets,
            ..self.clone_header()
        }
    }

    fn clone_header(&self) -> Dataset {
        Dataset {
            name: self.name.clone(),
            n_features: self.n_features,
            n_outputs: self.n_outputs,
            features: Vec::new(),
            targets: Vec::new(),
            column_names: self.column_names.clone(),
            normalization: self.normalization.clone(),
        }
    }

    fn with_column_names(mut self, names: Vec<String>) -> Self {
        if names.len() == self.n_features + self.n_outputs {
            self.column_names = names;
        }
        self
    }
}

/// Which CSV columns hold the targets; the remaining columns are features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetColumns {
    /// The last `k` columns (UCI wine quality: `Last(1)`).
    Last(usize),
    /// The first `k` columns (UCI CASP: `First(1)`).
    First(usize),
}

impl TargetColumns {
    fn count(self) -> usize {
        match self {
            TargetColumns::Last(k) | TargetColumns::First(k) => k,
        }
    }

    fn is_target(self, col: usize, width: usize) -> bool {
        match self {
            TargetColumns::Last(k) => col >= width - k,
            TargetColumns::First(k) => col < k,
        }
    }
}

fn detect_delimiter(line: &str) -> u8 {
    b";,\t"
        .iter()
        .copied()
        .max_by_key(|&d| line.bytes().filter(|&b| b == d).count())
        .unwrap()
}

/// Reads a numeric CSV. The delimiter (`;`, `,` or tab) and the presence of
/// a header row are detected from the first line.
pub fn load_csv(path: impl AsRef<Path>, n_features: usize, targets: TargetColumns) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut first_line = String::new();
    BufReader::new(file)
        .read_line(&mut first_line)
        .map_err(|e| Error::io(path, e))?;
    if first_line.trim().is_empty() {
        return Err(Error::Schema(format!("{} is empty", path.display())));
    }
    let delimiter = detect_delimiter(&first_line);

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Schema(e.to_string()))?;

    let width = n_features + targets.count();
    let mut names: Option<Vec<String>> = None;
    let mut features = Vec::new();
    let mut target_values = Vec::new();
    for (line_no, record) in reader.records().enumerate() {
        let row = line_no + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if row == 1 && record.iter().any(|f| f.parse::<f64>().is_err()) {
            names = Some(record.iter().map(str::to_owned).collect());
            if record.len() != width {
                return Err(Error::Schema(format!(
                    "header has {} columns, expected {width}",
                    record.len()
                )));
            }
            continue;
        }
        if record.len() != width {
            return Err(Error::Schema(format!(
                "row {row} has {} columns, expected {width}",
                record.len()
            )));
        }
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                column: col + 1,
                message: format!("`{field}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: col + 1,
                    message: "non-finite value".into(),
                });
            }
            if targets.is_target(col, width) {
                target_values.push(value);
            } else {
                features.push(value);
            }
        }
    }
    if features.is_empty() {
        return Err(Error::Schema(format!("{} has no data rows", path.display())));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ds = Dataset::new(name, n_features, targets.count(), features, target_values)?;
    Ok(match names {
        Some(mut names) => {
            // Store features first, then targets, whatever the file order.
            let mut ordered: Vec<String> = Vec::with_capacity(width);
            let mut tail = Vec::new();
            for (col, name) in names.drain(..).enumerate() {
                if targets.is_target(col, width) {
                    tail.push(name);
                } else {
                    ordered.push(name);
                }
            }
            ordered.extend(tail);
            ds.with_column_names(ordered)
        }
        None => ds,
    })
}

/// Writes features then targets, comma-delimited, with a header row.
/// `load_csv(path, n_features, TargetColumns::Last(n_outputs))` reads it back.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = std::io::BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let io = |e| Error::io(path, e);
    writeln!(out, "{}", ds.column_names.join(",")).map_err(io)?;
    for r in 0..ds.rows() {
        let fields: Vec<String> = ds
            .features(r)
            .iter()
            .chain(ds.targets(r))
            .map(|v| format!("{v:?}"))
            .collect();
        writeln!(out, "{}", fields.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}

fn column_stats(values: &[f64], width: usize, col: usize, rows: &[usize]) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|&r| values[r * width + col]).sum::<f64>() / n;
    let var = rows
        .iter()
        .map(|&r| {
            let d = values[r * width + col] - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    (mean, var.sqrt())
}

/// Z-normalizes every feature column (and the targets when
/// `include_targets`) with mean and population standard deviation taken from
/// the `stats_rows` only, then applies them to all rows.
pub fn znormalize(ds: &Dataset, stats_rows: &[usize], include_targets: bool) -> Result<Dataset> {
    if stats_rows.is_empty() {
        return Err(Error::Argument("normalization needs at least one row".into()));
    }
    if let Some(&bad) = stats_rows.iter().find(|&&r| r >= ds.rows()) {
        return Err(Error::Argument(format!("row {bad} out of range")));
    }
    let mut out = ds.clone();
    let fit = |values: &mut Vec<f64>, width: usize, name_offset: usize| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut means = Vec::with_capacity(width);
        let mut stds = Vec::with_capacity(width);
        for col in 0..width {
            let (mean, std) = column_stats(values, width, col, stats_rows);
            if !(std > 0.0) {
                return Err(Error::Normalization {
                    column: ds.column_names[name_offset + col].clone(),
                });
            }
            for v in values.iter_mut().skip(col).step_by(width) {
                *v = (*v - mean) / std;
            }
            means.push(mean);
            stds.push(std);
        }
        Ok((means, stds))
    };
    let (feature_means, feature_stds) = fit(&mut out.features, ds.n_features, 0)?;
    let (target_means, target_stds) = if include_targets {
        fit(&mut out.targets, ds.n_outputs, ds.n_features)?
    } else {
        (Vec::new(), Vec::new())
    };
    out.normalization = Some(Normalization {
        feature_means,
        feature_stds,
        target_means,
        target_stds,
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub shuffle_seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            shuffle_seed: 0,
        }
    }
}

/// Shuffled row indices partitioned into `(train, test)`, with
/// `|train| = ⌊fraction · rows⌋`.
pub fn split_indices(rows: usize, spec: SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Argument(format!(
            "train fraction must be in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    // The epsilon keeps products like 0.8 * 45730 from landing just under an integer.
    let n_train = (spec.train_fraction * rows as f64 + 1e-9).floor() as usize;
    if n_train == 0 || n_train >= rows {
        return Err(Error::Argument(format!(
            "split of {rows} rows at {} leaves an empty side",
            spec.train_fraction
        )));
    }
    let mut order: Vec<usize> = (0..rows).collect();
    Rng::substream(spec.shuffle_seed, Stream::Split).shuffle(&mut order);
    let test = order.split_off(n_train);
    Ok((order, test))
}

pub fn split(ds: &Dataset, spec: SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(ds.rows(), spec)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Least-squares problem for a linear `features → 1` network whose
/// objective is a strongly convex quadratic with a prescribed condition number.
///
/// Columns are centred, so the Hessian is block-diagonal with the bias block
/// equal to 1 and the weight block `Q diag(λ) Qᵀ`, `λ` log-spaced in
/// `[1, cond]`. Residuals are orthogonal to the design, so the returned
/// optimum is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticQuadratic {
    pub features: usize,
    pub rows: usize,
    pub cond: f64,
    /// Root-mean-square residual at the optimum.
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticQuadratic {
    pub fn new(features: usize, cond: f64, seed: u64) -> Self {
        SyntheticQuadratic {
            features,
            rows: (20 * (features + 1)).max(200),
            cond,
            noise: 0.1,
            seed,
        }
    }

    pub fn network(&self) -> NetworkSpec {
        NetworkSpec::regression(vec![self.features, 1]).expect("features >= 1")
    }

    /// Returns the dataset and the minimizing parameter vector, packed as the
    /// network expects (weights, then bias).
    pub fn generate(&self) -> Result<(Dataset, Vector)> {
        let (d, n) = (self.features, self.rows);
        if d == 0 {
            return Err(Error::Argument("need at least one feature".into()));
        }
        if !(self.cond >= 1.0) {
            return Err(Error::Argument(format!("condition number {} < 1", self.cond)));
        }
        if n < d + 2 {
            return Err(Error::Argument(format!("{n} rows cannot support {d} features")));
        }
        if !(self.noise >= 0.0) {
            return Err(Error::Argument("noise must be non-negative".into()));
        }
        let mut rng = Rng::substream(self.seed, Stream::Synthetic);

        // Orthonormal, centred columns (n × d), stored column-wise.
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
        for _ in 0..d {
            let mut c: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            center(&mut c);
            for _ in 0..2 {
                for prev in &cols {
                    let proj: f64 = c.iter().zip(prev).map(|(a, b)| a * b).sum();
                    c.iter_mut().zip(prev).for_each(|(a, b)| *a -= proj * b);
                }
            }
            normalize(&mut c);
            cols.push(c);
        }
        let q = random_orthogonal(&mut rng, d);
        let lambdas: Vec<f64> = (0..d)
            .map(|j| if d == 1 { 1.0 } else { self.cond.powf(j as f64 / (d - 1) as f64) })
            .collect();
        // X = sqrt(n) U diag(sqrt λ) Qᵀ
        let scale = (n as f64).sqrt();
        let mut features = vec![0.0; n * d];
        for r in 0..n {
            for c in 0..d {
                let mut v = 0.0;
                for j in 0..d {
                    v += cols[j][r] * lambdas[j].sqrt() * q[c][j];
                }
                features[r * d + c] = scale * v;
            }
        }

        let w_star: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let b_star = rng.normal();
        let mut resid: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        for _ in 0..2 {
            center(&mut resid);
            for c in &cols {
                let proj: f64 = resid.iter().zip(c).map(|(a, b)| a * b).sum();
                resid.iter_mut().zip(c).for_each(|(a, b)| *a -= proj * b);
            }
        }
        let rms = (resid.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
        if rms > 0.0 {
            resid.iter_mut().for_each(|r| *r *= self.noise / rms);
        }
        let targets: Vec<f64> = (0..n)
            .map(|r| {
                let x = &features[r * d..(r + 1) * d];
                x.iter().zip(&w_star).map(|(a, b)| a * b).sum::<f64>() + b_star + resid[r]
            })
            .collect();

        let ds = Dataset::new(format!("quadratic-d{d}-cond{}", self.cond), d, 1, features, targets)?;
        let optimum: Vector = w_star.into_iter().chain(std::iter::once(b_star)).collect();
        Ok((ds, optimum))
    }
}

/// [`SyntheticQuadratic`] with default row count and noise.
pub fn synth_quadratic(features: usize, cond: f64, seed: u64) -> Result<(Dataset, Vector)> {
    SyntheticQuadratic::new(features, cond, seed).generate()
}

fn center(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Rows of a random orthogonal matrix (Gram-Schmidt on Gaussian rows).
fn random_orthogonal(rng: &mut Rng, d: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d);
    for _ in 0..d {
        let mut r: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        for _ in 0..2 {
            for prev in &rows {
                let proj: f64 = r.iter().zip(prev).map(|(a, b)| a * b).sum();
                r.iter_mut().zip(prev).for_each(|(a, b)| *a -= proj * b);
            }
        }
        normalize(&mut r);
        rows.push(r);
    }
    rows
}

/// Regression data labelled by a fixed random "teacher" network plus
/// Gaussian noise. Features are correlated Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct TeacherRegression {
    pub name: String,
    pub teacher: Vec<usize>,
    pub rows: usize,
    pub weight_scale: f64,
    pub noise: f64,
    pub seed: u64,
}

impl TeacherRegression {
    /// 45,730 rows × 9 features, one target: the shape of the UCI CASP table.
    pub fn casp_like(seed: u64) -> Self {
        TeacherRegression {
            name: "casp-surrogate".into(),
            teacher: vec![9, 16, 1],
            rows: 45_730,
            weight_scale: 1.5,
            noise: 0.5,
            seed,
        }
    }

    /// 4,898 rows × 11 features, one target: the shape of the UCI white wine table.
    pub fn wine_like(seed: u64) -> Self {
        TeacherRegression {
            name: "wine-surrogate".into(),
            teacher: vec![11, 12, 1],
            rows: 4_898,
            weight_scale: 1.0,
            noise: 0.5,
            seed,
        }
    }

    pub fn generate(&self) -> Result<Dataset> {
        let spec = NetworkSpec::regression(self.teacher.clone())?;
        let n_in = spec.input_size();
        let mut rng = Rng::substream(self.seed, Stream::Synthetic);
        let mixing: Vec<f64> = (0..n_in * n_in)
            .map(|k| rng.uniform(-0.5, 0.5) + if k % (n_in + 1) == 0 { 1.0 } else { 0.0 })
            .collect();
        let w = uniform_init(&mut rng, spec.param_count(), -self.weight_scale, self.weight_scale)?;
        let mut features = Vec::with_capacity(self.rows * n_in);
        let mut targets = Vec::with_capacity(self.rows * spec.output_size());
        for _ in 0..self.rows {
            let z: Vec<f64> = (0..n_in).map(|_| rng.normal()).collect();
            let x: Vec<f64> = (0..n_in)
                .map(|i| (0..n_in).map(|j| mixing[i * n_in + j] * z[j]).sum())
                .collect();
            let y = crate::model::predict(&spec, &w, &x)?;
            targets.extend(y.into_iter().map(|v| v + self.noise * rng.normal()));
            features.extend(x);
        }
        Dataset::new(self.name.clone(), n_in, spec.output_size(), features, targets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NetworkObjective;
    use crate::objective::Objective;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn small_csv_round_trips_exactly() {
        let f = write_tmp("a;b;target\n1.5;2;3\n-0.25;1e-3;4\n7;8;9\n");
        let ds = load_csv(f.path(), 2, TargetColumns::Last(1)).unwrap();
        assert_eq!(ds.rows(), 3);
        assert_eq!(ds.features(1), &[-0.25, 1e-3]);
        assert_eq!(ds.targets(2), &[9.0]);
        assert_eq!(ds.column_names(), &["a", "b", "target"]);
    }

    #[test]
    fn headerless_comma_csv_with_leading_target() {
        let f = write_tmp("10,1,2\n20,3,4\n");
        let ds = load_csv(f.path(), 2, TargetColumns::First(1)).unwrap();
        assert_eq!(ds.targets(1), &[20.0]);
        assert_eq!(ds.features(1), &[3.0, 4.0]);
    }

    #[test]
    fn csv_errors() {
        let empty = write_tmp("");
        assert!(matches!(
            load_csv(empty.path(), 2, TargetColumns::Last(1)),
            Err(Error::Schema(_))
        ));
        let bad = write_tmp("1,2,3\n4,x,6\n");
        match load_csv(bad.path(), 2, TargetColumns::Last(1)) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("{other:?}"),
        }
        let narrow = write_tmp("1,2\n");
        assert!(matches!(
            load_csv(narrow.path(), 2, TargetColumns::Last(1)),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            load_csv("/nonexistent/file.csv", 2, TargetColumns::Last(1)),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn write_then_read_is_identical() {
        let (ds, _) = synth_quadratic(3, 5.0, 1).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_csv(&ds, f.path()).unwrap();
        let back = load_csv(f.path(), 3, TargetColumns::Last(1)).unwrap();
        for r in 0..ds.rows() {
            assert_eq!(ds.features(r), back.features(r));
            assert_eq!(ds.targets(r), back.targets(r));
        }
    }

    #[test]
    fn znormalize_uses_train_rows_only() {
        let ds = Dataset::new(
            "t",
            1,
            1,
            vec![1.0, 3.0, 100.0],
            vec![0.0, 2.0, 50.0],
        )
        .unwrap();
        let out = znormalize(&ds, &[0, 1], true).unwrap();
        assert_eq!(out.features(0), &[-1.0]);
        assert_eq!(out.features(1), &[1.0]);
        assert_eq!(out.features(2), &[98.0]);
        let stats = out.normalization().unwrap();
        assert_eq!(stats.feature_means, vec![2.0]);
        assert_eq!(stats.target_stds, vec![1.0]);
    }

    #[test]
    fn znormalize_shifted_column_has_zero_mean() {
        let ds = Dataset::new("t", 1, 1, vec![5.0, 5.5, 6.0, 6.5], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let out = znormalize(&ds, &[0, 1, 2, 3], false).unwrap();
        let mean: f64 = (0..4).map(|r| out.features(r)[0]).sum::<f64>() / 4.0;
        assert_eq!(mean, 0.0);
        assert_eq!(out.targets(3), &[3.0]);
    }

    #[test]
    fn znormalize_idempotent_on_unit_stats() {
        let ds = Dataset::new("t", 1, 1, vec![-1.0, 1.0, -1.0, 1.0], vec![0.0; 4]).unwrap();
        let out = znormalize(&ds, &[0, 1, 2, 3], false).unwrap();
        for r in 0..4 {
            assert!((out.features(r)[0] - ds.features(r)[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn znormalize_zero_variance_names_column() {
        let f = write_tmp("a,const,t\n1,4,0\n2,4,1\n");
        let ds = load_csv(f.path(), 2, TargetColumns::Last(1)).unwrap();
        match znormalize(&ds, &[0, 1], false) {
            Err(Error::Normalization { column }) => assert_eq!(column, "const"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn split_sizes_of_published_tables() {
        let spec = SplitSpec::default();
        let (tr, te) = split_indices(4898, spec).unwrap();
        assert_eq!((tr.len(), te.len()), (3918, 980));
        let (tr, te) = split_indices(45_730, spec).unwrap();
        assert_eq!((tr.len(), te.len()), (36_584, 9146));
    }

    #[test]
    fn split_partitions_rows() {
        let ds = Dataset::new("t", 1, 1, vec![1.0, 2.0], vec![3.0, 4.0]).unwrap();
        let spec = SplitSpec {
            train_fraction: 0.5,
            shuffle_seed: 9,
        };
        let (tr, te) = split(&ds, spec).unwrap();
        assert_eq!((tr.rows(), te.rows()), (1, 1));
        let mut both = vec![tr.features(0)[0], te.features(0)[0]];
        both.sort_by(f64::total_cmp);
        assert_eq!(both, vec![1.0, 2.0]);

        let (a, _) = split_indices(100, spec).unwrap();
        let (b, _) = split_indices(100, spec).unwrap();
        assert_eq!(a, b);
        assert!(split_indices(1, spec).is_err());
        assert!(split_indices(10, SplitSpec { train_fraction: 1.0, shuffle_seed: 0 }).is_err());
    }

    #[test]
    fn quadratic_optimum_is_stationary() {
        let q = SyntheticQuadratic::new(10, 100.0, 3);
        let (ds, opt) = q.generate().unwrap();
        let spec = q.network();
        let obj = NetworkObjective::new(&spec, &ds).unwrap();
        let g = obj.full_gradient(&opt).unwrap();
        assert!(g.norm() < 1e-10, "{}", g.norm());
        let rmse = (2.0 * obj.full_loss(&opt).unwrap()).sqrt();
        assert!((rmse - 0.1).abs() < 1e-9);
    }

    #[test]
    fn quadratic_one_newton_step_in_1d() {
        let q = SyntheticQuadratic::new(1, 1.0, 8);
        let (ds, opt) = q.generate().unwrap();
        let spec = q.network();
        let obj = NetworkObjective::new(&spec, &ds).unwrap();
        // Hessian is the 2×2 identity, so the Newton step from 0 is -∇E(0).
        let step = obj.full_gradient(&Vector::zeros(2)).unwrap().neg();
        assert!(step.sub(&opt).unwrap().norm_inf() < 1e-10);
    }

    #[test]
    fn quadratic_is_deterministic() {
        let a = synth_quadratic(4, 10.0, 5).unwrap();
        let b = synth_quadratic(4, 10.0, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn teacher_surrogate_shape() {
        let ds = TeacherRegression {
            rows: 50,
            ..TeacherRegression::casp_like(1)
        }
        .generate()
        .unwrap();
        assert_eq!((ds.rows(), ds.n_features(), ds.n_outputs()), (50, 9, 1));
    }
}
