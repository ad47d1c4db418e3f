//! Datasets: the XOR truth table, delimited-file ingestion, min-max
//! scaling and seeded (stratified) splits.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    /// One row per sample: one-hot for classification, raw values for
    /// regression.
    pub targets: Vec<Vec<f64>>,
    /// Class index per sample, classification only.
    pub labels: Option<Vec<usize>>,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub feature_scaling: Option<MinMax>,
    pub target_scaling: Option<MinMax>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn target_dim(&self) -> usize {
        self.targets.first().map_or(0, Vec::len)
    }

    pub fn is_classification(&self) -> bool {
        self.labels.is_some()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i].clone()).collect(),
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
            feature_scaling: self.feature_scaling.clone(),
            target_scaling: self.target_scaling.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.len() != self.targets.len() {
            return Err(Error::Data(format!(
                "{} feature rows but {} target rows",
                self.features.len(),
                self.targets.len()
            )));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.features.len() {
                return Err(Error::Data("label count differs from sample count".into()));
            }
        }
        let (d, t) = (self.feature_dim(), self.target_dim());
        for (row, target) in self.features.iter().zip(&self.targets) {
            if row.len() != d || target.len() != t {
                return Err(Error::Data("ragged feature or target rows".into()));
            }
            if row.iter().chain(target).any(|v| !v.is_finite()) {
                return Err(Error::Data("non-finite value in dataset".into()));
            }
        }
        Ok(())
    }
}

/// Per-column min-max scaling to `[0, 1]`. Constant columns map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMax {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::Data("cannot fit scaling on zero rows".into()));
        };
        let mut min = first.clone();
        let mut max = first.clone();
        for row in rows {
            for (k, &v) in row.iter().enumerate() {
                min[k] = min[k].min(v);
                max[k] = max[k].max(v);
            }
        }
        Ok(MinMax { min, max })
    }

    fn range(&self, k: usize) -> f64 {
        let r = self.max[k] - self.min[k];
        if r > 0.0 {
            r
        } else {
            1.0
        }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(k, v)| (v - self.min[k]) / self.range(k))
            .collect()
    }

    pub fn invert(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(k, v)| v * self.range(k) + self.min[k])
            .collect()
    }

    /// Factor that converts a squared error in scaled units back to raw
    /// units for column `k`.
    pub fn squared_scale(&self, k: usize) -> f64 {
        self.range(k).powi(2)
    }
}

/// Fits feature scaling (and optionally target scaling) on `train` and
/// applies it to both splits.
pub fn normalize_split(train: &Dataset, test: &Dataset, scale_targets: bool) -> Result<(Dataset, Dataset)> {
    let fx = MinMax::fit(&train.features)?;
    let ft = if scale_targets {
        Some(MinMax::fit(&train.targets)?)
    } else {
        None
    };
    let apply = |d: &Dataset| {
        let mut out = d.clone();
        out.features = d.features.iter().map(|r| fx.apply(r)).collect();
        if let Some(ft) = &ft {
            out.targets = d.targets.iter().map(|r| ft.apply(r)).collect();
        }
        out.feature_scaling = Some(fx.clone());
        out.target_scaling = ft.clone();
        out
    };
    Ok((apply(train), apply(test)))
}

/// The four-row exclusive-or table. Targets are the two-pulse encoding
/// read by the threshold head: `[1, 0]` for 0 and `[0, 1]` for 1.
pub fn xor_dataset() -> Dataset {
    let features = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
    let labels = vec![0, 1, 1, 0];
    let targets = labels
        .iter()
        .map(|&y| if y == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
        .collect();
    Dataset {
        features,
        targets,
        labels: Some(labels),
        class_names: vec!["0".into(), "1".into()],
        feature_names: vec!["a".into(), "b".into()],
        feature_scaling: None,
        target_scaling: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delimiter {
    Comma,
    Tab,
    /// Any run of spaces or tabs.
    Whitespace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetKind {
    /// Labels are matched exactly against `classes`; the class index is the
    /// position in this list.
    Categorical {
        classes: Vec<String>,
    },
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub delimiter: Delimiter,
    pub has_header: bool,
    pub columns: usize,
    pub feature_columns: Vec<usize>,
    pub target_column: usize,
    pub target: TargetKind,
    pub feature_names: Vec<String>,
}

impl CsvSchema {
    /// UCI `iris.data`: four measurements then the species name.
    pub fn iris() -> Self {
        CsvSchema {
            delimiter: Delimiter::Comma,
            has_header: false,
            columns: 5,
            feature_columns: vec![0, 1, 2, 3],
            target_column: 4,
            target: TargetKind::Categorical {
                classes: vec!["Iris-setosa".into(), "Iris-versicolor".into(), "Iris-virginica".into()],
            },
            feature_names: ["sepal_length", "sepal_width", "petal_length", "petal_width"]
                .map(String::from)
                .to_vec(),
        }
    }

    /// UCI `airfoil_self_noise.dat`: five inputs, scaled sound pressure
    /// level (dB) last.
    pub fn airfoil() -> Self {
        CsvSchema {
            delimiter: Delimiter::Whitespace,
            has_header: false,
            columns: 6,
            feature_columns: vec![0, 1, 2, 3, 4],
            target_column: 5,
            target: TargetKind::Continuous,
            feature_names: [
                "frequency_hz",
                "angle_of_attack_deg",
                "chord_length_m",
                "free_stream_velocity_ms",
                "suction_side_displacement_thickness_m",
            ]
            .map(String::from)
            .to_vec(),
        }
    }
}

pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_delimited(&text, path, schema)
}

pub fn parse_delimited(text: &str, path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    if schema.feature_columns.is_empty() {
        return Err(Error::Config("schema declares no feature columns".into()));
    }
    if let Some(&bad) = schema
        .feature_columns
        .iter()
        .chain(std::iter::once(&schema.target_column))
        .find(|&&c| c >= schema.columns)
    {
        return Err(Error::Config(format!(
            "schema column {bad} is outside the declared {} columns",
            schema.columns
        )));
    }

    let mut features = Vec::new();
    let mut targets = Vec::new();
    let mut labels = Vec::new();
    let mut feature_names = schema.feature_names.clone();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = match schema.delimiter {
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Tab => line.split('\t').map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        };
        if schema.has_header && features.is_empty() && idx == first_content_line(text) {
            if feature_names.is_empty() {
                feature_names = schema
                    .feature_columns
                    .iter()
                    .filter_map(|&c| fields.get(c).map(|s| s.to_string()))
                    .collect();
            }
            continue;
        }
        if fields.len() != schema.columns {
            return Err(err(
                line_no,
                format!("expected {} columns, found {}", schema.columns, fields.len()),
            ));
        }
        let row = schema
            .feature_columns
            .iter()
            .map(|&c| parse_number(fields[c]).map_err(|m| err(line_no, format!("column {c}: {m}"))))
            .collect::<Result<Vec<_>>>()?;
        let target_field = fields[schema.target_column];
        match &schema.target {
            TargetKind::Categorical { classes } => {
                let Some(class) = classes.iter().position(|c| c == target_field) else {
                    return Err(err(line_no, format!("unknown label {target_field:?}")));
                };
                let mut one_hot = vec![0.0; classes.len()];
                one_hot[class] = 1.0;
                targets.push(one_hot);
                labels.push(class);
            }
            TargetKind::Continuous => {
                let v = parse_number(target_field)
                    .map_err(|m| err(line_no, format!("target column {}: {m}", schema.target_column)))?;
                targets.push(vec![v]);
            }
        }
        features.push(row);
    }

    if features.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    let (labels, class_names) = match &schema.target {
        TargetKind::Categorical { classes } => (Some(labels), classes.clone()),
        TargetKind::Continuous => (None, Vec::new()),
    };
    let ds = Dataset {
        features,
        targets,
        labels,
        class_names,
        feature_names,
        feature_scaling: None,
        target_scaling: None,
    };
    ds.validate()?;
    Ok(ds)
}

fn first_content_line(text: &str) -> usize {
    text.lines().position(|l| !l.trim().is_empty()).unwrap_or(0)
}

fn parse_number(field: &str) -> std::result::Result<f64, String> {
    let v: f64 = field.parse().map_err(|_| format!("not a number: {field:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite value {field:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded partition of sample indices. Classification data are split per
/// class, taking `round(count · fraction)` of each class for training.
pub fn split_indices(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<SplitIndices> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Usage(format!(
            "train fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    let mut rng = seeded(seed);
    let groups: Vec<Vec<usize>> = match &dataset.labels {
        Some(labels) => {
            let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
            (0..classes)
                .map(|c| (0..labels.len()).filter(|&i| labels[i] == c).collect())
                .collect()
        }
        None => vec![(0..dataset.len()).collect()],
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut group in groups {
        group.shuffle(&mut rng);
        let k = (group.len() as f64 * train_fraction).round() as usize;
        train.extend_from_slice(&group[..k]);
        test.extend_from_slice(&group[k..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::Usage(format!(
            "train fraction {train_fraction} leaves an empty split for {} samples",
            dataset.len()
        )));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let idx = split_indices(dataset, train_fraction, seed)?;
    Ok((dataset.subset(&idx.train), dataset.subset(&idx.test)))
}

/// Provenance record written next to experiment outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataManifest {
    pub source_path: PathBuf,
    pub sha256: String,
    pub schema: CsvSchema,
    pub rows: usize,
    pub split_seed: u64,
    pub train_fraction: f64,
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn iris_like() -> Dataset {
        let mut text = String::new();
        for (c, name) in ["Iris-setosa", "Iris-versicolor", "Iris-virginica"].iter().enumerate() {
            for k in 0..50 {
                text.push_str(&format!("{}.{},3.0,1.{},0.{},{name}\n", 4 + c, k % 10, k % 7, k % 5));
            }
        }
        parse_delimited(&text, Path::new("iris.csv"), &CsvSchema::iris()).unwrap()
    }

    #[test]
    fn xor_table() {
        let d = xor_dataset();
        assert_eq!(d.len(), 4);
        let expect = [([0.0, 0.0], 0), ([0.0, 1.0], 1), ([1.0, 0.0], 1), ([1.0, 1.0], 0)];
        for (i, (x, y)) in expect.iter().enumerate() {
            assert_eq!(d.features[i], x.to_vec());
            assert_eq!(d.labels.as_ref().unwrap()[i], *y);
        }
    }

    #[test]
    fn parses_iris_layout() {
        let d = iris_like();
        assert_eq!(d.len(), 150);
        assert_eq!(d.feature_dim(), 4);
        assert_eq!(d.class_names.len(), 3);
        for t in &d.targets {
            assert_eq!(t.iter().filter(|v| **v == 1.0).count(), 1);
            assert_eq!(t.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn whitespace_rows() {
        let text = "800\t0\t0.3048\t71.3\t0.00266337\t126.201\n1000  0 0.3048 71.3 0.00266337 125.201\n\n";
        let d = parse_delimited(text, Path::new("a.dat"), &CsvSchema::airfoil()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.feature_dim(), 5);
        assert_eq!(d.targets[1], vec![125.201]);
        assert!(d.labels.is_none());
    }

    #[test]
    fn truncated_row_names_line() {
        let text = "5.1,3.5,1.4,0.2,Iris-setosa\n4.9,3.0,1.4\n";
        let e = parse_delimited(text, Path::new("iris.csv"), &CsvSchema::iris()).unwrap_err();
        match e {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("columns"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_label_and_bad_number() {
        let e = parse_delimited("5.1,3.5,1.4,0.2,Iris-rosa\n", Path::new("x"), &CsvSchema::iris()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = parse_delimited("5.1,abc,1.4,0.2,Iris-setosa\n", Path::new("x"), &CsvSchema::iris()).unwrap_err();
        assert!(e.to_string().contains("not a number"));
    }

    #[test]
    fn header_is_skipped() {
        let schema = CsvSchema {
            delimiter: Delimiter::Comma,
            has_header: true,
            columns: 3,
            feature_columns: vec![0, 1],
            target_column: 2,
            target: TargetKind::Continuous,
            feature_names: vec![],
        };
        let d = parse_delimited("u,v,y\n1,2,3\n4,5,6\n", Path::new("h.csv"), &schema).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.feature_names, vec!["u", "v"]);
    }

    #[test]
    fn missing_file() {
        let e = load_csv(Path::new("/nonexistent/iris.csv"), &CsvSchema::iris()).unwrap_err();
        assert!(matches!(e, Error::Io { .. }));
    }

    #[test]
    fn stratified_split_counts() {
        let d = iris_like();
        let (train, test) = split(&d, 0.8, 17).unwrap();
        assert_eq!(train.len(), 120);
        assert_eq!(test.len(), 30);
        for c in 0..3 {
            assert_eq!(train.labels.as_ref().unwrap().iter().filter(|&&l| l == c).count(), 40);
            assert_eq!(test.labels.as_ref().unwrap().iter().filter(|&&l| l == c).count(), 10);
        }
    }

    #[test]
    fn split_is_deterministic_partition() {
        let d = iris_like();
        let a = split_indices(&d, 0.8, 99).unwrap();
        assert_eq!(a, split_indices(&d, 0.8, 99).unwrap());
        assert_ne!(a, split_indices(&d, 0.8, 100).unwrap());
        let mut all: Vec<usize> = a.train.iter().chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..150).collect::<Vec<_>>());
    }

    #[test]
    fn degenerate_fractions() {
        let d = iris_like();
        for f in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(split_indices(&d, f, 0), Err(Error::Usage(_))));
        }
    }

    #[test]
    fn scaling_from_train_only() {
        let d = iris_like();
        let (train, test) = split(&d, 0.8, 1).unwrap();
        let (ntrain, ntest) = normalize_split(&train, &test, false).unwrap();
        let s = ntrain.feature_scaling.as_ref().unwrap();
        assert_eq!(s, &MinMax::fit(&train.features).unwrap());
        assert_eq!(ntest.feature_scaling.as_ref(), Some(s));
        for row in &ntrain.features {
            assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        for (raw, scaled) in test.features.iter().zip(&ntest.features) {
            let back = s.invert(scaled);
            for (a, b) in raw.iter().zip(&back) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let s = MinMax::fit(&[vec![2.0, 1.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(s.apply(&[2.0, 2.0]), vec![0.0, 0.5]);
        assert_eq!(s.invert(&[0.0, 0.5]), vec![2.0, 2.0]);
    }
}
