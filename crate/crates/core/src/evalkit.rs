//! Evaluation: per-flight confusion matrices, regression summaries,
//! permutation importance, band-width sweep, sensor ablation and the
//! leave-one-group-out baseline.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cascade::{split_dataset, CascadeConfig, CascadeModel, LabeledDataset, Split, SplitLevel, HIDDEN_LAYERS};
use crate::cluster::balance_classes;
use crate::error::{Error, Result};
use crate::flightlog::{DamageKind, DamageLabel, FlightLog, TypeClass};
use crate::mlp::{mlp_init, mlp_train, MlpModel, RegressionTarget, TrainConfig};
use crate::spectral::{band_count, FeatureSchema, SensorGroup, Standardizer, DEFAULT_STRIDE, N_CHANNELS, N_MOMENT_FEATURES};
use crate::svm::{argmax, svm_train_multiclass, LinearSvmModel, SvmParams};

/// Rows/columns of strings rendered as CSV or aligned plain text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn to_text(&self) -> String {
        let ncol = self.header.len();
        let mut width = vec![0; ncol];
        for r in std::iter::once(&self.header).chain(&self.rows) {
            for (c, cell) in r.iter().enumerate().take(ncol) {
                width[c] = width[c].max(cell.chars().count());
            }
        }
        let mut s = String::new();
        for (k, r) in std::iter::once(&self.header).chain(&self.rows).enumerate() {
            let cells: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    if c == 0 {
                        format!("{cell:<w$}", w = width[c])
                    } else {
                        format!("{cell:>w$}", w = width[c])
                    }
                })
                .collect();
            s.push_str(cells.join("  ").trim_end());
            s.push('\n');
            if k == 0 {
                let total = width.iter().sum::<usize>() + 2 * ncol.saturating_sub(1);
                s.push_str(&"-".repeat(total));
                s.push('\n');
            }
        }
        s
    }
}

fn f2(v: f64) -> String {
    format!("{v:.2}")
}

fn f4(v: f64) -> String {
    format!("{v:.4}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn add(&mut self, truth: usize, pred: usize) {
        self.counts[truth][pred] += 1;
    }

    /// Row-normalized percentages; rows without samples stay all zero.
    pub fn percentages(&self) -> Vec<Vec<f64>> {
        self.counts.iter().map(|r| row_percent(r)).collect()
    }

    pub fn accuracy(&self) -> f64 {
        let total: usize = self.counts.iter().flatten().sum();
        let diag: usize = (0..self.labels.len()).map(|i| self.counts[i][i]).sum();
        if total == 0 {
            0.0
        } else {
            diag as f64 / total as f64
        }
    }

    pub fn row_accuracy(&self, i: usize) -> f64 {
        let n: usize = self.counts[i].iter().sum();
        if n == 0 {
            0.0
        } else {
            self.counts[i][i] as f64 / n as f64
        }
    }

    pub fn table(&self) -> Table {
        let mut header = vec!["true\\pred".to_string()];
        header.extend(self.labels.iter().cloned());
        let mut t = Table {
            header,
            rows: Vec::new(),
        };
        for (l, p) in self.labels.iter().zip(self.percentages()) {
            let mut row = vec![l.clone()];
            row.extend(p.iter().map(|v| f2(*v)));
            t.push(row);
        }
        t
    }
}

fn row_percent(r: &[usize]) -> Vec<f64> {
    let n: usize = r.iter().sum();
    if n == 0 {
        vec![0.0; r.len()]
    } else {
        r.iter().map(|&c| 100.0 * c as f64 / n as f64).collect()
    }
}

/// Which rows an evaluation looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    /// Only rows tagged test.
    TestOnly,
    /// Every window of each flight, training rows included.
    WholeFlight,
}

impl Population {
    pub fn name(self) -> &'static str {
        match self {
            Self::TestOnly => "test-only",
            Self::WholeFlight => "whole-flight",
        }
    }

    fn rows(self, ds: &LabeledDataset) -> Vec<usize> {
        match self {
            Self::TestOnly => ds.indices(Some(Split::Test)),
            Self::WholeFlight => ds.indices(None),
        }
    }
}

/// Flight id without the rotation-augmentation suffix.
pub fn base_flight_id(id: &str) -> &str {
    match id.rfind(".rot") {
        Some(p) if id[p + 4..].chars().all(|c| c.is_ascii_digit()) && p + 4 < id.len() => &id[..p],
        _ => id,
    }
}

/// Standardized copies of the selected rows.
pub fn standardized_rows(model: &CascadeModel, ds: &LabeledDataset, idx: &[usize]) -> Result<Array2<f64>> {
    let mut z = ds.features.select(Axis(0), idx);
    for mut row in z.rows_mut() {
        model.standardizer.apply_in_place(row.as_slice_mut().expect("standard layout"))?;
    }
    Ok(z)
}

pub fn svm_predictions(svm: &LinearSvmModel, z: ArrayView2<f64>) -> Result<Vec<usize>> {
    z.rows()
        .into_iter()
        .map(|r| svm.predict(r.as_slice().expect("standard layout")))
        .collect()
}

/// Per-flight rows of type-class percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightConfusion {
    pub population: Population,
    pub labels: Vec<String>,
    /// `(flight, true class, counts per predicted class)`.
    pub rows: Vec<(String, String, Vec<usize>)>,
}

impl FlightConfusion {
    pub fn percent(&self, flight: &str) -> Option<Vec<f64>> {
        self.rows.iter().find(|r| r.0 == flight).map(|r| row_percent(&r.2))
    }

    pub fn table(&self) -> Table {
        let mut header = vec!["flight".to_string(), "true".to_string(), "n".to_string()];
        header.extend(self.labels.iter().cloned());
        let mut t = Table {
            header,
            rows: Vec::new(),
        };
        for (f, truth, counts) in &self.rows {
            let mut row = vec![f.clone(), truth.clone(), counts.iter().sum::<usize>().to_string()];
            row.extend(row_percent(counts).into_iter().map(f2));
            t.push(row);
        }
        t
    }
}

fn type_labels() -> Vec<String> {
    TypeClass::ALL.iter().map(|t| t.name().to_string()).collect()
}

/// Type-classifier percentages per flight (rotations merged).
pub fn confusion_by_flight(model: &CascadeModel, ds: &LabeledDataset, population: Population) -> Result<FlightConfusion> {
    let idx = population.rows(ds);
    let z = standardized_rows(model, ds, &idx)?;
    let pred = svm_predictions(&model.type_svm, z.view())?;
    let mut groups: BTreeMap<String, (TypeClass, Vec<usize>)> = BTreeMap::new();
    for (k, &i) in idx.iter().enumerate() {
        let e = groups
            .entry(base_flight_id(&ds.flight_ids[i]).to_string())
            .or_insert((ds.type_class(i), vec![0; 3]));
        e.1[pred[k]] += 1;
    }
    for l in ds.flight_ids.iter().map(|f| base_flight_id(f)).collect::<std::collections::BTreeSet<_>>() {
        if !groups.contains_key(l) {
            log::warn!("flight {l} has no {} windows; skipped", population.name());
        }
    }
    Ok(FlightConfusion {
        population,
        labels: type_labels(),
        rows: groups
            .into_iter()
            .map(|(f, (t, c))| (f, t.name().to_string(), c))
            .collect(),
    })
}

/// Pooled type confusion matrix over a population.
pub fn type_confusion(model: &CascadeModel, ds: &LabeledDataset, population: Population) -> Result<ConfusionMatrix> {
    let idx = population.rows(ds);
    let z = standardized_rows(model, ds, &idx)?;
    let pred = svm_predictions(&model.type_svm, z.view())?;
    let mut cm = ConfusionMatrix::new(type_labels());
    for (k, &i) in idx.iter().enumerate() {
        cm.add(ds.type_class(i).index(), pred[k]);
    }
    Ok(cm)
}

fn branch_rows(ds: &LabeledDataset, branch: TypeClass, population: Population) -> Vec<usize> {
    population
        .rows(ds)
        .into_iter()
        .filter(|&i| ds.type_class(i) == branch)
        .collect()
}

fn branch_parts(model: &CascadeModel, branch: TypeClass) -> Result<(&MlpModel, &LinearSvmModel)> {
    match branch {
        TypeClass::C1 => Ok((&model.tipcut_nn, &model.tipcut_loc_svm)),
        TypeClass::C2 => Ok((&model.long_nn, &model.long_loc_svm)),
        TypeClass::C0 => Err(Error::InvalidInput("the healthy class has no branch".into())),
    }
}

/// Motor confusion of a branch's localization SVM on rows of that type.
pub fn localization_confusion(
    model: &CascadeModel,
    ds: &LabeledDataset,
    branch: TypeClass,
    population: Population,
) -> Result<ConfusionMatrix> {
    let (_, loc) = branch_parts(model, branch)?;
    let idx = branch_rows(ds, branch, population);
    let z = standardized_rows(model, ds, &idx)?;
    let pred = svm_predictions(loc, z.view())?;
    let n = model.record.config.n_motors;
    let mut cm = ConfusionMatrix::new((1..=n).map(|m| format!("m{m}")).collect());
    for (k, &i) in idx.iter().enumerate() {
        let truth = ds.labels[i].motor.expect("damaged row") - 1;
        cm.add(truth, pred[k] - 1);
    }
    Ok(cm)
}

/// Off-diagonal mass on the opposite rotor and on each adjacent side.
pub fn opposite_vs_adjacent(cm: &ConfusionMatrix) -> (usize, usize, usize) {
    let n = cm.labels.len();
    let (mut opp, mut next, mut prev) = (0, 0, 0);
    for t in 0..n {
        if n.is_multiple_of(2) {
            opp += cm.counts[t][(t + n / 2) % n];
        }
        next += cm.counts[t][(t + 1) % n];
        prev += cm.counts[t][(t + n - 1) % n];
    }
    (opp, next, prev)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub flight: String,
    pub n: usize,
    pub truth: Vec<f64>,
    pub mean: Vec<f64>,
    /// `mean - truth`.
    pub error: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSummary {
    pub population: Population,
    pub outputs: Vec<String>,
    pub rows: Vec<RegressionRow>,
    /// Every (true sum, predicted sum) pair, for rank statistics.
    pub sum_pairs: Vec<(f64, f64)>,
}

impl RegressionSummary {
    pub fn table(&self) -> Table {
        let mut header = vec!["flight".to_string(), "n".to_string()];
        for o in &self.outputs {
            header.push(format!("{o}_true"));
            header.push(format!("{o}_mean"));
            header.push(format!("{o}_error"));
            header.push(format!("{o}_std"));
        }
        let mut t = Table {
            header,
            rows: Vec::new(),
        };
        for r in &self.rows {
            let mut row = vec![r.flight.clone(), r.n.to_string()];
            for k in 0..self.outputs.len() {
                row.extend([f2(r.truth[k]), f4(r.mean[k]), f4(r.error[k]), f4(r.std[k])]);
            }
            t.push(row);
        }
        t
    }

    pub fn spearman_sum(&self) -> f64 {
        let (a, b): (Vec<f64>, Vec<f64>) = self.sum_pairs.iter().cloned().unzip();
        spearman(&a, &b)
    }
}

/// Per-flight mean, error and population std of a branch network's outputs.
pub fn summarize_predictions(
    population: Population,
    outputs: Vec<String>,
    flights: &[String],
    truths: &[Vec<f64>],
    preds: &[Vec<f64>],
) -> Result<RegressionSummary> {
    if flights.is_empty() {
        return Err(Error::InsufficientData("no rows in this branch".into()));
    }
    let k = outputs.len();
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, f) in flights.iter().enumerate() {
        groups.entry(base_flight_id(f)).or_default().push(i);
    }
    let rows = groups
        .into_iter()
        .map(|(f, idx)| {
            let n = idx.len() as f64;
            let mean: Vec<f64> = (0..k).map(|o| idx.iter().map(|&i| preds[i][o]).sum::<f64>() / n).collect();
            let std: Vec<f64> = (0..k)
                .map(|o| (idx.iter().map(|&i| (preds[i][o] - mean[o]).powi(2)).sum::<f64>() / n).sqrt())
                .collect();
            let truth = truths[idx[0]].clone();
            let error = mean.iter().zip(&truth).map(|(m, t)| m - t).collect();
            RegressionRow {
                flight: f.to_string(),
                n: idx.len(),
                truth,
                mean,
                error,
                std,
            }
        })
        .collect();
    let sum_pairs = truths.iter().zip(preds).map(|(t, p)| (t[0], p[0])).collect();
    Ok(RegressionSummary {
        population,
        outputs,
        rows,
        sum_pairs,
    })
}

/// Magnitude-network summary for a branch, on rows whose true type is that branch.
pub fn regression_summary(
    model: &CascadeModel,
    ds: &LabeledDataset,
    branch: TypeClass,
    population: Population,
) -> Result<RegressionSummary> {
    let (nn, _) = branch_parts(model, branch)?;
    let idx = branch_rows(ds, branch, population);
    if idx.is_empty() {
        return Err(Error::InsufficientData(format!("no {} rows in the {} population", branch.name(), population.name())));
    }
    let z = standardized_rows(model, ds, &idx)?;
    let pred = nn.forward_batch(z.view())?;
    let preds: Vec<Vec<f64>> = pred.rows().into_iter().map(|r| r.to_vec()).collect();
    let truths: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| RegressionTarget::from_label(&ds.labels[i]).expect("damaged").values())
        .collect();
    let flights: Vec<String> = idx.iter().map(|&i| ds.flight_ids[i].clone()).collect();
    let outputs = if nn.output_dim() == 2 {
        vec!["sum".to_string(), "diff".to_string()]
    } else {
        vec!["sum".to_string()]
    };
    summarize_predictions(population, outputs, &flights, &truths, &preds)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&ranks(a), &ranks(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub index: usize,
    pub name: String,
    /// Mean metric degradation over the repeats.
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub metric: String,
    pub baseline: f64,
    /// Sorted by decreasing mean importance.
    pub features: Vec<FeatureImportance>,
}

impl ImportanceReport {
    pub fn table(&self, top: usize) -> Table {
        let mut t = Table::new(&["rank", "feature", "importance", "std"]);
        for (r, f) in self.features.iter().take(top).enumerate() {
            t.push(vec![(r + 1).to_string(), f.name.clone(), format!("{:.6}", f.mean), format!("{:.6}", f.std)]);
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Higher is better.
    Accuracy,
    /// Lower is better.
    Mse,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Self::Accuracy => "accuracy",
            Self::Mse => "mse",
        }
    }
}

/// Mean degradation of `score` when each column is shuffled, over `repeats` shuffles.
pub fn permutation_importance<F>(
    x: ArrayView2<f64>,
    names: &[String],
    metric: Metric,
    repeats: usize,
    seed: u64,
    score: F,
) -> Result<ImportanceReport>
where
    F: Fn(ArrayView2<f64>) -> Result<f64>,
{
    if x.nrows() < 2 {
        return Err(Error::InsufficientData("permutation importance needs at least 2 rows".into()));
    }
    if names.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: names.len(),
        });
    }
    let baseline = score(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut work = x.to_owned();
    let mut perm: Vec<usize> = (0..x.nrows()).collect();
    let mut features = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let original = x.column(j);
        let mut drops = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            perm.shuffle(&mut rng);
            for (r, &p) in perm.iter().enumerate() {
                work[[r, j]] = original[p];
            }
            let s = score(work.view())?;
            drops.push(match metric {
                Metric::Accuracy => baseline - s,
                Metric::Mse => s - baseline,
            });
        }
        work.column_mut(j).assign(&original);
        let n = drops.len().max(1) as f64;
        let mean = drops.iter().sum::<f64>() / n;
        let std = (drops.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
        features.push(FeatureImportance {
            index: j,
            name: names[j].clone(),
            mean,
            std,
        });
    }
    features.sort_by(|a, b| b.mean.total_cmp(&a.mean).then(a.index.cmp(&b.index)));
    Ok(ImportanceReport {
        metric: metric.name().to_string(),
        baseline,
        features,
    })
}

pub fn accuracy_of(svm: &LinearSvmModel, x: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
    let pred = svm_predictions(svm, x)?;
    Ok(pred.iter().zip(labels).filter(|(p, t)| p == t).count() as f64 / labels.len().max(1) as f64)
}

pub fn mse_of(nn: &MlpModel, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64> {
    let p = nn.forward_batch(x)?;
    Ok(p.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / p.len().max(1) as f64)
}

/// Which cascade component an importance run probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    TypeSvm,
    TipcutLoc,
    LongLoc,
    TipcutNn,
    LongNn,
}

impl Component {
    pub const ALL: [Component; 5] = [Self::TypeSvm, Self::TipcutLoc, Self::LongLoc, Self::TipcutNn, Self::LongNn];

    pub fn name(self) -> &'static str {
        match self {
            Self::TypeSvm => "type_svm",
            Self::TipcutLoc => "tipcut_loc_svm",
            Self::LongLoc => "long_loc_svm",
            Self::TipcutNn => "tipcut_nn",
            Self::LongNn => "long_nn",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Permutation importance of one cascade component on test rows (at most `max_rows`).
pub fn component_importance(
    model: &CascadeModel,
    ds: &LabeledDataset,
    component: Component,
    repeats: usize,
    seed: u64,
    max_rows: usize,
) -> Result<ImportanceReport> {
    let test = ds.indices(Some(Split::Test));
    let mut idx: Vec<usize> = match component {
        Component::TypeSvm => test,
        Component::TipcutLoc | Component::TipcutNn => test.into_iter().filter(|&i| ds.type_class(i) == TypeClass::C1).collect(),
        Component::LongLoc | Component::LongNn => test.into_iter().filter(|&i| ds.type_class(i) == TypeClass::C2).collect(),
    };
    if idx.len() > max_rows {
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0xabcd));
        idx.truncate(max_rows);
        idx.sort_unstable();
    }
    let z = standardized_rows(model, ds, &idx)?;
    let names = ds.schema.feature_names();
    match component {
        Component::TypeSvm => {
            let y: Vec<usize> = idx.iter().map(|&i| ds.type_class(i).index()).collect();
            permutation_importance(z.view(), &names, Metric::Accuracy, repeats, seed, |x| accuracy_of(&model.type_svm, x, &y))
        }
        Component::TipcutLoc | Component::LongLoc => {
            let svm = if component == Component::TipcutLoc { &model.tipcut_loc_svm } else { &model.long_loc_svm };
            let y: Vec<usize> = idx.iter().map(|&i| ds.labels[i].motor.expect("damaged")).collect();
            permutation_importance(z.view(), &names, Metric::Accuracy, repeats, seed, |x| accuracy_of(svm, x, &y))
        }
        Component::TipcutNn | Component::LongNn => {
            let nn = if component == Component::TipcutNn { &model.tipcut_nn } else { &model.long_nn };
            let flat: Vec<f64> = idx
                .iter()
                .flat_map(|&i| RegressionTarget::from_label(&ds.labels[i]).expect("damaged").values())
                .collect();
            let y = Array2::from_shape_vec((idx.len(), nn.output_dim()), flat).expect("target width");
            permutation_importance(z.view(), &names, Metric::Mse, repeats, seed, |x| mse_of(nn, x, y.view()))
        }
    }
}

fn stack(classes: &[Array2<f64>]) -> (Array2<f64>, Vec<usize>) {
    let views: Vec<_> = classes.iter().map(|c| c.view()).collect();
    let x = ndarray::concatenate(Axis(0), &views).expect("equal widths");
    let labels = classes
        .iter()
        .enumerate()
        .flat_map(|(c, m)| std::iter::repeat_n(c, m.nrows()))
        .collect();
    (x, labels)
}

fn fit_standardizer(x: ArrayView2<f64>) -> Result<Standardizer> {
    let x = x.as_standard_layout();
    let d = x.ncols();
    Standardizer::fit(&x.as_slice().expect("contiguous").chunks(d).collect::<Vec<_>>())
}

fn apply_standardizer(std: &Standardizer, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    let mut z = x.as_standard_layout().into_owned();
    for mut row in z.rows_mut() {
        std.apply_in_place(row.as_slice_mut().expect("standard layout"))?;
    }
    Ok(z)
}

/// Balances the type classes of the train rows and fits the type SVM; returns the
/// fitted standardizer and model.
fn train_type_svm(ds: &LabeledDataset, cfg: &CascadeConfig) -> Result<(Standardizer, LinearSvmModel)> {
    let train = ds.indices(Some(Split::Train));
    let xt = ds.features.select(Axis(0), &train);
    let std = fit_standardizer(xt.view())?;
    let z = apply_standardizer(&std, xt.view())?;
    let classes: Vec<Array2<f64>> = TypeClass::ALL
        .iter()
        .map(|&t| {
            let idx: Vec<usize> = (0..train.len()).filter(|&k| ds.type_class(train[k]) == t).collect();
            z.select(Axis(0), &idx)
        })
        .collect();
    let target = cfg
        .type_balance_target
        .unwrap_or_else(|| classes.iter().map(|c| c.nrows()).min().unwrap_or(0));
    let balanced = balance_classes(&classes, target.max(1), cfg.seed.wrapping_add(11), cfg.kmeans_max_iter, cfg.kmeans_tol)?;
    let (xb, lb) = stack(&balanced);
    let svm = svm_train_multiclass(
        xb.view(),
        &lb,
        &SvmParams {
            seed: cfg.seed.wrapping_add(12),
            ..cfg.svm
        },
        &ds.schema.id(),
    )?;
    Ok((std, svm))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStudyRow {
    pub band_width_hz: usize,
    pub n_features: usize,
    /// Test-split accuracy for C0, C1, C2.
    pub class_accuracy: [f64; 3],
}

pub fn band_study_table(rows: &[BandStudyRow]) -> Table {
    let mut t = Table::new(&["band_width_hz", "n_features", "acc_C0", "acc_C1", "acc_C2"]);
    for r in rows {
        t.push(vec![
            r.band_width_hz.to_string(),
            r.n_features.to_string(),
            f2(100.0 * r.class_accuracy[0]),
            f2(100.0 * r.class_accuracy[1]),
            f2(100.0 * r.class_accuracy[2]),
        ]);
    }
    t
}

/// Rebuilds features for every width, rebalances and retrains the type SVM.
pub fn band_width_study(logs: &[FlightLog], widths: &[usize], cfg: &CascadeConfig) -> Result<Vec<BandStudyRow>> {
    let mut out = Vec::new();
    for &bw in widths {
        let schema = FeatureSchema::new(bw)?;
        let mut ds = LabeledDataset::from_logs(logs, schema, DEFAULT_STRIDE)?;
        let expected = band_count(bw) * N_CHANNELS + N_MOMENT_FEATURES;
        if ds.features.ncols() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: ds.features.ncols(),
            });
        }
        split_dataset(&mut ds, cfg.seed, SplitLevel::Row)?;
        let (std, svm) = train_type_svm(&ds, cfg)?;
        let test = ds.indices(Some(Split::Test));
        let z = apply_standardizer(&std, ds.features.select(Axis(0), &test).view())?;
        let pred = svm_predictions(&svm, z.view())?;
        let mut cm = ConfusionMatrix::new(type_labels());
        for (k, &i) in test.iter().enumerate() {
            cm.add(ds.type_class(i).index(), pred[k]);
        }
        out.push(BandStudyRow {
            band_width_hz: bw,
            n_features: expected,
            class_accuracy: [cm.row_accuracy(0), cm.row_accuracy(1), cm.row_accuracy(2)],
        });
    }
    Ok(out)
}

/// A set of sensor groups whose features are kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask {
    pub groups: Vec<SensorGroup>,
}

impl FeatureMask {
    pub fn new(groups: &[SensorGroup]) -> Self {
        Self { groups: groups.to_vec() }
    }

    /// Full set followed by the reduced sets, thrust dropped from all reduced sets.
    pub fn default_set() -> Vec<Self> {
        use SensorGroup::*;
        vec![
            Self::new(&[Acc, Gyro, Torque, Thrust]),
            Self::new(&[Acc, Torque]),
            Self::new(&[Gyro, Torque]),
            Self::new(&[Acc, Gyro]),
            Self::new(&[Acc]),
        ]
    }

    pub fn columns(&self, schema: &FeatureSchema) -> Vec<usize> {
        schema
            .feature_groups()
            .iter()
            .enumerate()
            .filter(|(_, g)| self.groups.contains(g))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn has(&self, g: SensorGroup) -> bool {
        self.groups.contains(&g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub mask: FeatureMask,
    pub n_features: usize,
    pub mse_symmetric: f64,
    pub mse_asymmetric: f64,
    /// Relative change against the first row.
    pub delta_symmetric: f64,
    pub delta_asymmetric: f64,
    pub loc_accuracy: f64,
}

pub fn ablation_table(rows: &[AblationRow]) -> Table {
    use SensorGroup::*;
    let mut t = Table::new(&["acc", "gyro", "torque", "thrust", "n_features", "mse_symm", "delta_symm", "mse_asymm", "delta_asymm", "loc_acc"]);
    let mark = |b: bool| if b { "x".to_string() } else { String::new() };
    let pct = |v: f64| format!("{:+.0}%", 100.0 * v);
    for (k, r) in rows.iter().enumerate() {
        t.push(vec![
            mark(r.mask.has(Acc)),
            mark(r.mask.has(Gyro)),
            mark(r.mask.has(Torque)),
            mark(r.mask.has(Thrust)),
            r.n_features.to_string(),
            f2(r.mse_symmetric),
            if k == 0 { "-".into() } else { pct(r.delta_symmetric) },
            f2(r.mse_asymmetric),
            if k == 0 { "-".into() } else { pct(r.delta_asymmetric) },
            f2(100.0 * r.loc_accuracy),
        ]);
    }
    t
}

fn is_symmetric(l: &DamageLabel) -> bool {
    matches!(l.kind, DamageKind::TipCut { cut1_mm, cut2_mm } if cut1_mm == cut2_mm)
}

/// Trains a tip-cut magnitude network (and a localization SVM on at most
/// `cfg.loc_per_class` rows per motor) on train rows restricted to `cols`.
fn train_tipcut_parts(
    ds: &LabeledDataset,
    cols: &[usize],
    cfg: &CascadeConfig,
    exclude: Option<(f64, f64)>,
) -> Result<(Standardizer, MlpModel, Option<LinearSvmModel>)> {
    let train: Vec<usize> = ds
        .indices(Some(Split::Train))
        .into_iter()
        .filter(|&i| ds.type_class(i) == TypeClass::C1 && exclude.is_none_or(|c| ds.labels[i].cuts_mm() != c))
        .collect();
    if train.is_empty() {
        return Err(Error::InsufficientData("no tip-cut training rows".into()));
    }
    let x = ds.features.select(Axis(0), &train).select(Axis(1), cols);
    let std = fit_standardizer(x.view())?;
    let z = apply_standardizer(&std, x.view())?;
    let flat: Vec<f64> = train
        .iter()
        .flat_map(|&i| RegressionTarget::from_label(&ds.labels[i]).expect("damaged").values())
        .collect();
    let y = Array2::from_shape_vec((train.len(), 2), flat).expect("two targets");
    let mut layers = vec![cols.len()];
    layers.extend(HIDDEN_LAYERS);
    layers.push(2);
    let seed = cfg.seed.wrapping_add(21);
    let mut nn = mlp_init(&layers, seed, &ds.schema.id())?;
    nn.center_output(y.view())?;
    mlp_train(&mut nn, z.view(), y.view(), &TrainConfig { seed, ..cfg.mlp })?;
    let loc = if exclude.is_none() {
        let motors: Vec<usize> = train.iter().map(|&i| ds.labels[i].motor.expect("damaged")).collect();
        let mut per_motor: Vec<Vec<usize>> = vec![Vec::new(); cfg.n_motors];
        for (k, m) in motors.iter().enumerate() {
            per_motor[m - 1].push(k);
        }
        // a seeded subsample keeps the ablation cheap; the cascade itself uses centroids
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(22));
        let mut keep = Vec::new();
        for mut v in per_motor {
            v.shuffle(&mut rng);
            v.truncate(cfg.loc_per_class);
            keep.extend(v);
        }
        keep.sort_unstable();
        let xl = z.select(Axis(0), &keep);
        let ll: Vec<usize> = keep.iter().map(|&k| motors[k]).collect();
        Some(svm_train_multiclass(
            xl.view(),
            &ll,
            &SvmParams {
                seed: cfg.seed.wrapping_add(23),
                ..cfg.svm
            },
            &ds.schema.id(),
        )?)
    } else {
        None
    };
    Ok((std, nn, loc))
}

/// Retrains the tip-cut network for every mask; MSE on symmetric and asymmetric test rows.
pub fn ablation_study(ds: &LabeledDataset, masks: &[FeatureMask], cfg: &CascadeConfig) -> Result<Vec<AblationRow>> {
    if masks.is_empty() {
        return Err(Error::InvalidInput("no feature masks given".into()));
    }
    if ds.split.len() != ds.len() {
        return Err(Error::Config("dataset has no train/val/test tags".into()));
    }
    let test: Vec<usize> = ds
        .indices(Some(Split::Test))
        .into_iter()
        .filter(|&i| ds.type_class(i) == TypeClass::C1)
        .collect();
    let mut rows: Vec<AblationRow> = Vec::new();
    for mask in masks {
        let cols = mask.columns(&ds.schema);
        if cols.is_empty() {
            return Err(Error::InvalidInput("empty feature mask".into()));
        }
        let (std, nn, loc) = train_tipcut_parts(ds, &cols, cfg, None)?;
        let z = apply_standardizer(&std, ds.features.select(Axis(0), &test).select(Axis(1), &cols).view())?;
        let pred = nn.forward_batch(z.view())?;
        let (mut s_err, mut s_n, mut a_err, mut a_n) = (0.0, 0usize, 0.0, 0usize);
        for (k, &i) in test.iter().enumerate() {
            let t = RegressionTarget::from_label(&ds.labels[i]).expect("damaged").values();
            let e: f64 = (0..2).map(|o| (pred[[k, o]] - t[o]).powi(2)).sum::<f64>() / 2.0;
            if is_symmetric(&ds.labels[i]) {
                s_err += e;
                s_n += 1;
            } else {
                a_err += e;
                a_n += 1;
            }
        }
        let loc = loc.expect("trained with localization");
        let motors: Vec<usize> = test.iter().map(|&i| ds.labels[i].motor.expect("damaged")).collect();
        let loc_accuracy = accuracy_of(&loc, z.view(), &motors)?;
        let mse_symmetric = s_err / s_n.max(1) as f64;
        let mse_asymmetric = a_err / a_n.max(1) as f64;
        let (d_s, d_a) = match rows.first() {
            Some(base) => (
                mse_symmetric / base.mse_symmetric - 1.0,
                mse_asymmetric / base.mse_asymmetric - 1.0,
            ),
            None => (0.0, 0.0),
        };
        rows.push(AblationRow {
            mask: mask.clone(),
            n_features: cols.len(),
            mse_symmetric,
            mse_asymmetric,
            delta_symmetric: d_s,
            delta_asymmetric: d_a,
            loc_accuracy,
        });
    }
    Ok(rows)
}

/// Frequency-weighted cut estimate `d_i = (1/N)·Σ_j N_j·d_{i,j}` from per-class
/// prediction counts `(N_j, (d_1j, d_2j))`.
pub fn weighted_cut_estimate(counts: &[(usize, (f64, f64))]) -> Result<(f64, f64)> {
    let n: usize = counts.iter().map(|c| c.0).sum();
    if n == 0 {
        return Err(Error::InsufficientData("no predictions to average".into()));
    }
    let (mut d1, mut d2) = (0.0, 0.0);
    for &(nj, (a, b)) in counts {
        d1 += nj as f64 * a;
        d2 += nj as f64 * b;
    }
    Ok((d1 / n as f64, d2 / n as f64))
}

/// Cuts implied by a predicted `(sum, diff)` pair, smaller tip first.
pub fn cuts_from_sum_diff(sum: f64, diff: f64) -> (f64, f64) {
    ((sum - diff) / 2.0, (sum + diff) / 2.0)
}

/// Indices of the `k` columns with the largest one-way ANOVA F statistic.
pub fn anova_top_k(x: ArrayView2<f64>, labels: &[usize], k: usize) -> Vec<usize> {
    let n = x.nrows() as f64;
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut scores: Vec<(f64, usize)> = (0..x.ncols())
        .map(|j| {
            let col = x.column(j);
            let grand = col.sum() / n;
            let mut sums = vec![0.0; n_classes];
            let mut cnt = vec![0usize; n_classes];
            for (v, &l) in col.iter().zip(labels) {
                sums[l] += v;
                cnt[l] += 1;
            }
            let means: Vec<f64> = sums.iter().zip(&cnt).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect();
            let between: f64 = means.iter().zip(&cnt).map(|(m, &c)| c as f64 * (m - grand).powi(2)).sum();
            let within: f64 = col.iter().zip(labels).map(|(v, &l)| (v - means[l]).powi(2)).sum();
            let groups = cnt.iter().filter(|&&c| c > 0).count() as f64;
            let f = if within > 0.0 {
                (between / (groups - 1.0).max(1.0)) / (within / (n - groups).max(1.0))
            } else if between > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            (f, j)
        })
        .collect();
    scores.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut top: Vec<usize> = scores.into_iter().take(k).map(|s| s.1).collect();
    top.sort_unstable();
    top
}

/// Linear, squared and pairwise-product terms of every row.
pub fn quadratic_expand(x: ArrayView2<f64>) -> Array2<f64> {
    let d = x.ncols();
    let width = d + d * (d + 1) / 2;
    let mut out = Array2::zeros((x.nrows(), width));
    for (r, row) in x.rows().into_iter().enumerate() {
        let mut k = 0;
        for j in 0..d {
            out[[r, k]] = row[j];
            k += 1;
        }
        for a in 0..d {
            for b in a..d {
                out[[r, k]] = row[a] * row[b];
                k += 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LooConfig {
    pub seed: u64,
    /// Features kept (by ANOVA F) before the degree-2 expansion.
    pub anova_features: usize,
    /// Rows per class used to train the quadratic classifier.
    pub rows_per_class: usize,
    pub svm: SvmParams,
    pub cascade: CascadeConfig,
}

impl Default for LooConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            anova_features: 51,
            rows_per_class: 600,
            svm: SvmParams {
                tol: 1e-5,
                max_iter: 200,
                ..Default::default()
            },
            cascade: CascadeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooReport {
    pub held_out: (f64, f64),
    pub n_held_out: usize,
    pub classifier_test_accuracy: f64,
    /// Share of held-out windows per predicted class, largest first.
    pub predicted_classes: Vec<((f64, f64), f64)>,
    pub svm_d: (f64, f64),
    pub nn_sum_diff: (f64, f64),
    pub nn_d: (f64, f64),
}

impl LooReport {
    pub fn svm_error(&self) -> (f64, f64) {
        ((self.svm_d.0 - self.held_out.0).abs(), (self.svm_d.1 - self.held_out.1).abs())
    }

    pub fn nn_error(&self) -> (f64, f64) {
        ((self.nn_d.0 - self.held_out.0).abs(), (self.nn_d.1 - self.held_out.1).abs())
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["method", "d1_prediction", "d1_error", "d2_prediction", "d2_error"]);
        let (se, ne) = (self.svm_error(), self.nn_error());
        t.push(vec!["svm_classifier".into(), f4(self.svm_d.0), f4(se.0), f4(self.svm_d.1), f4(se.1)]);
        t.push(vec!["neural_network".into(), f4(self.nn_d.0), f4(ne.0), f4(self.nn_d.1), f4(ne.1)]);
        t
    }
}

/// Leave-one-group-out comparison for one tip-cut class `(cut1, cut2)`.
/// `ds` must hold the whole (augmented) corpus; split tags are ignored and rebuilt.
pub fn loo_baseline(ds: &LabeledDataset, held_out: (f64, f64), cfg: &LooConfig) -> Result<LooReport> {
    let is_tip = |i: usize| ds.type_class(i) == TypeClass::C1;
    let held: Vec<usize> = (0..ds.len()).filter(|&i| is_tip(i) && ds.labels[i].cuts_mm() == held_out).collect();
    if held.is_empty() {
        return Err(Error::InvalidInput(format!(
            "held-out class {}-{} is not a tip-cut class of this corpus",
            held_out.0, held_out.1
        )));
    }
    let mut classes: Vec<(f64, f64)> = (0..ds.len())
        .filter(|&i| is_tip(i))
        .map(|i| ds.labels[i].cuts_mm())
        .filter(|&c| c != held_out)
        .collect();
    classes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InsufficientData("need at least two remaining tip-cut classes".into()));
    }
    let class_of = |c: (f64, f64)| classes.iter().position(|&k| k == c);

    // (a) quadratic classifier on a 70/30 split of the remaining classes
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in &classes {
        let mut rows: Vec<usize> = (0..ds.len()).filter(|&i| is_tip(i) && ds.labels[i].cuts_mm() == *c).collect();
        rows.shuffle(&mut rng);
        let cut = (rows.len() as f64 * 0.7).round() as usize;
        let (tr, te) = rows.split_at(cut);
        train.extend(tr.iter().take(cfg.rows_per_class));
        test.extend_from_slice(te);
    }
    train.sort_unstable();
    let labels_of = |idx: &[usize]| -> Vec<usize> { idx.iter().map(|&i| class_of(ds.labels[i].cuts_mm()).expect("known class")).collect() };
    let xt = ds.features.select(Axis(0), &train);
    let std = fit_standardizer(xt.view())?;
    let zt = apply_standardizer(&std, xt.view())?;
    let yt = labels_of(&train);
    let cols = anova_top_k(zt.view(), &yt, cfg.anova_features.min(zt.ncols()));
    let qt = quadratic_expand(zt.select(Axis(1), &cols).view());
    let qstd = fit_standardizer(qt.view())?;
    let qt = apply_standardizer(&qstd, qt.view())?;
    let svm = svm_train_multiclass(qt.view(), &yt, &SvmParams { seed: cfg.seed, ..cfg.svm }, "quadratic")?;
    let transform = |idx: &[usize]| -> Result<Array2<f64>> {
        let z = apply_standardizer(&std, ds.features.select(Axis(0), idx).view())?;
        apply_standardizer(&qstd, quadratic_expand(z.select(Axis(1), &cols).view()).view())
    };
    let classifier_test_accuracy = accuracy_of(&svm, transform(&test)?.view(), &labels_of(&test))?;
    let pred = svm_predictions(&svm, transform(&held)?.view())?;
    let mut counts = vec![0usize; classes.len()];
    for p in pred {
        counts[p] += 1;
    }
    let weighted: Vec<(usize, (f64, f64))> = counts.iter().zip(&classes).map(|(&n, &c)| (n, c)).collect();
    let svm_d = weighted_cut_estimate(&weighted)?;
    let mut predicted_classes: Vec<((f64, f64), f64)> = weighted
        .iter()
        .filter(|w| w.0 > 0)
        .map(|&(n, c)| (c, 100.0 * n as f64 / held.len() as f64))
        .collect();
    predicted_classes.sort_by(|a, b| b.1.total_cmp(&a.1));

    // (b) tip-cut network retrained on the usual split without the held-out class
    let mut nn_ds = ds.clone();
    split_dataset(&mut nn_ds, cfg.cascade.seed, SplitLevel::Row)?;
    let cols_all: Vec<usize> = (0..ds.schema.len()).collect();
    let (nstd, nn, _) = train_tipcut_parts(&nn_ds, &cols_all, &cfg.cascade, Some(held_out))?;
    let zh = apply_standardizer(&nstd, ds.features.select(Axis(0), &held).view())?;
    let out = nn.forward_batch(zh.view())?;
    let m = out.mean_axis(Axis(0)).expect("non-empty");
    let nn_sum_diff = (m[0], m[1]);
    Ok(LooReport {
        held_out,
        n_held_out: held.len(),
        classifier_test_accuracy,
        predicted_classes,
        svm_d,
        nn_sum_diff,
        nn_d: cuts_from_sum_diff(m[0], m[1]),
    })
}

/// Per-window type predictions with the argmax of the calibrated probabilities.
pub fn predict_types(model: &CascadeModel, z: ArrayView2<f64>) -> Result<Vec<TypeClass>> {
    z.rows()
        .into_iter()
        .map(|r| {
            let p = model.type_svm.predict_proba(r.as_slice().expect("standard layout"))?;
            Ok(TypeClass::from_index(argmax(&p)).expect("three classes"))
        })
        .collect()
}

/// Headline numbers of an evaluation on the test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub healthy_accuracy: f64,
    /// Share of tip-cut windows with sum >= 30 mm classified as tip-cut.
    pub tipcut_ge30_accuracy: f64,
    pub longitudinal_accuracy: f64,
    pub tipcut_loc_accuracy: f64,
    pub long_loc_accuracy: f64,
    /// Opposite-rotor share of the localization errors.
    pub tipcut_loc_opposite_share: f64,
    pub long_loc_opposite_share: f64,
    pub spearman_sum: f64,
    /// Largest per-flight `|mean error| / true sum` over tip-cut flights with sum >= 30 mm.
    pub max_rel_sum_error_ge30: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metrics: EvalMetrics,
    pub type_test: ConfusionMatrix,
    pub type_whole: ConfusionMatrix,
    pub flights_test: FlightConfusion,
    pub flights_whole: FlightConfusion,
    pub loc_tipcut: ConfusionMatrix,
    pub loc_long: ConfusionMatrix,
    pub regression_tipcut: RegressionSummary,
    pub regression_long: RegressionSummary,
}

impl EvalReport {
    /// `(file stem, table)` pairs for every table of the report.
    pub fn tables(&self) -> Vec<(String, Table)> {
        vec![
            ("type_confusion_test-only".into(), self.type_test.table()),
            ("type_confusion_whole-flight".into(), self.type_whole.table()),
            ("flight_confusion_test-only".into(), self.flights_test.table()),
            ("flight_confusion_whole-flight".into(), self.flights_whole.table()),
            ("loc_confusion_tipcut".into(), self.loc_tipcut.table()),
            ("loc_confusion_longitudinal".into(), self.loc_long.table()),
            ("regression_tipcut".into(), self.regression_tipcut.table()),
            ("regression_longitudinal".into(), self.regression_long.table()),
            ("metrics".into(), self.metrics_table()),
        ]
    }

    pub fn metrics_table(&self) -> Table {
        let m = &self.metrics;
        let mut t = Table::new(&["metric", "value"]);
        for (k, v) in [
            ("healthy_accuracy", m.healthy_accuracy),
            ("tipcut_ge30_accuracy", m.tipcut_ge30_accuracy),
            ("longitudinal_accuracy", m.longitudinal_accuracy),
            ("tipcut_loc_accuracy", m.tipcut_loc_accuracy),
            ("long_loc_accuracy", m.long_loc_accuracy),
            ("tipcut_loc_opposite_share", m.tipcut_loc_opposite_share),
            ("long_loc_opposite_share", m.long_loc_opposite_share),
            ("spearman_sum", m.spearman_sum),
            ("max_rel_sum_error_ge30", m.max_rel_sum_error_ge30),
        ] {
            t.push(vec![k.to_string(), f4(v)]);
        }
        t
    }
}

fn opposite_share(cm: &ConfusionMatrix) -> f64 {
    let total: usize = cm.counts.iter().flatten().sum();
    let diag: usize = (0..cm.labels.len()).map(|i| cm.counts[i][i]).sum();
    let off = total - diag;
    if off == 0 {
        1.0
    } else {
        opposite_vs_adjacent(cm).0 as f64 / off as f64
    }
}

/// Every evaluation table plus the headline metrics.
pub fn evaluate(model: &CascadeModel, ds: &LabeledDataset) -> Result<EvalReport> {
    if ds.split.len() != ds.len() {
        return Err(Error::Config("dataset has no train/val/test tags".into()));
    }
    let test = ds.indices(Some(Split::Test));
    let z = standardized_rows(model, ds, &test)?;
    let pred = svm_predictions(&model.type_svm, z.view())?;
    let (mut h, mut t30, mut l) = ((0, 0), (0, 0), (0, 0));
    for (k, &i) in test.iter().enumerate() {
        let truth = ds.type_class(i);
        let hit = usize::from(pred[k] == truth.index());
        let slot = match truth {
            TypeClass::C0 => &mut h,
            TypeClass::C1 if ds.labels[i].sum_mm() >= 30.0 => &mut t30,
            TypeClass::C1 => continue,
            TypeClass::C2 => &mut l,
        };
        slot.0 += hit;
        slot.1 += 1;
    }
    let frac = |p: (usize, usize)| if p.1 == 0 { 0.0 } else { p.0 as f64 / p.1 as f64 };
    let loc_tipcut = localization_confusion(model, ds, TypeClass::C1, Population::TestOnly)?;
    let loc_long = localization_confusion(model, ds, TypeClass::C2, Population::TestOnly)?;
    let regression_tipcut = regression_summary(model, ds, TypeClass::C1, Population::TestOnly)?;
    let regression_long = regression_summary(model, ds, TypeClass::C2, Population::TestOnly)?;
    let max_rel = regression_tipcut
        .rows
        .iter()
        .filter(|r| r.truth[0] >= 30.0)
        .map(|r| r.error[0].abs() / r.truth[0])
        .fold(0.0, f64::max);
    let metrics = EvalMetrics {
        healthy_accuracy: frac(h),
        tipcut_ge30_accuracy: frac(t30),
        longitudinal_accuracy: frac(l),
        tipcut_loc_accuracy: loc_tipcut.accuracy(),
        long_loc_accuracy: loc_long.accuracy(),
        tipcut_loc_opposite_share: opposite_share(&loc_tipcut),
        long_loc_opposite_share: opposite_share(&loc_long),
        spearman_sum: regression_tipcut.spearman_sum(),
        max_rel_sum_error_ge30: max_rel,
    };
    Ok(EvalReport {
        metrics,
        type_test: type_confusion(model, ds, Population::TestOnly)?,
        type_whole: type_confusion(model, ds, Population::WholeFlight)?,
        flights_test: confusion_by_flight(model, ds, Population::TestOnly)?,
        flights_whole: confusion_by_flight(model, ds, Population::WholeFlight)?,
        loc_tipcut,
        loc_long,
        regression_tipcut,
        regression_long,
    })
}

/// Plain-text report of several tables with titles.
pub fn render_report(sections: &[(&str, &Table)]) -> String {
    let mut s = String::new();
    for (title, t) in sections {
        let _ = writeln!(s, "== {title} ==");
        s.push_str(&t.to_text());
        s.push('\n');
    }
    s
}
