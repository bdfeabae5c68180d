//! The full detector: damage-type SVM gating a tip-cut branch and a
//! longitudinal branch, each with a magnitude regressor and a rotor
//! localization SVM.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{balance_classes, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::flightlog::{DamageKind, DamageLabel, FlightLog, TypeClass};
use crate::io::{write_atomic, FeatureRow, Provenance};
use crate::mlp::{mlp_init, mlp_train, MlpModel, RegressionTarget, TrainConfig};
use crate::spectral::{FeatureExtractor, FeatureSchema, Standardizer, DEFAULT_STRIDE};
use crate::svm::{argmax, svm_train_multiclass, LinearSvmModel, SvmParams};

pub const HIDDEN_LAYERS: [usize; 3] = [32, 8, 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitLevel {
    /// Windows are assigned independently.
    Row,
    /// Whole flights are assigned, so no flight straddles two splits.
    Flight,
}

/// Feature matrix with per-row labels, provenance and split tags.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub schema: FeatureSchema,
    /// Raw (unstandardized) features, one window per row.
    pub features: Array2<f64>,
    pub labels: Vec<DamageLabel>,
    pub flight_ids: Vec<String>,
    pub start_indices: Vec<usize>,
    /// Empty until [`split_dataset`] runs.
    pub split: Vec<Split>,
}

impl LabeledDataset {
    pub fn from_logs(logs: &[FlightLog], schema: FeatureSchema, stride: usize) -> Result<Self> {
        let mut ex = FeatureExtractor::new(schema);
        let d = schema.len();
        let mut flat = Vec::new();
        let mut labels = Vec::new();
        let mut ids = Vec::new();
        let mut starts = Vec::new();
        for log in logs {
            for (start, fv) in ex.extract_log(log, stride)? {
                flat.extend_from_slice(&fv.values);
                labels.push(log.label);
                ids.push(log.flight_id.clone());
                starts.push(start);
            }
        }
        let n = labels.len();
        Ok(Self {
            schema,
            features: Array2::from_shape_vec((n, d), flat).map_err(|e| Error::InvalidInput(e.to_string()))?,
            labels,
            flight_ids: ids,
            start_indices: starts,
            split: Vec::new(),
        })
    }

    pub fn from_rows(schema: FeatureSchema, rows: &[FeatureRow]) -> Result<Self> {
        let d = schema.len();
        let mut flat = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.values.len() != d {
                return Err(Error::SchemaMismatch {
                    expected: schema.id(),
                    got: format!("{} features", r.values.len()),
                });
            }
            flat.extend_from_slice(&r.values);
        }
        Ok(Self {
            schema,
            features: Array2::from_shape_vec((rows.len(), d), flat).map_err(|e| Error::InvalidInput(e.to_string()))?,
            labels: rows.iter().map(|r| r.label).collect(),
            flight_ids: rows.iter().map(|r| r.flight_id.clone()).collect(),
            start_indices: rows.iter().map(|r| r.start_index).collect(),
            split: Vec::new(),
        })
    }

    pub fn to_rows(&self) -> Vec<FeatureRow> {
        (0..self.len())
            .map(|i| FeatureRow {
                flight_id: self.flight_ids[i].clone(),
                start_index: self.start_indices[i],
                label: self.labels[i],
                values: self.features.row(i).to_vec(),
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn type_class(&self, i: usize) -> TypeClass {
        self.labels[i].type_class()
    }

    /// Row indices tagged `split` (all rows when untagged and `split` is `None`).
    pub fn indices(&self, split: Option<Split>) -> Vec<usize> {
        match split {
            None => (0..self.len()).collect(),
            Some(s) => (0..self.len()).filter(|&i| self.split.get(i) == Some(&s)).collect(),
        }
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            schema: self.schema,
            features: self.features.select(Axis(0), idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            flight_ids: idx.iter().map(|&i| self.flight_ids[i].clone()).collect(),
            start_indices: idx.iter().map(|&i| self.start_indices[i]).collect(),
            split: if self.split.is_empty() {
                Vec::new()
            } else {
                idx.iter().map(|&i| self.split[i]).collect()
            },
        }
    }

    /// Keeps only the feature columns in `cols` (schema id is kept for reporting).
    pub fn with_columns(&self, cols: &[usize]) -> Self {
        let mut out = self.clone();
        out.features = self.features.select(Axis(1), cols);
        out
    }
}

/// Counts for an exact 40/30/30 split of `n` rows: train and val are rounded
/// to nearest, test takes the remainder.
pub fn split_counts(n: usize) -> (usize, usize, usize) {
    let train = (n as f64 * 0.4).round() as usize;
    let val = (n as f64 * 0.3).round() as usize;
    (train, val, n - train - val)
}

/// Tags every row train/val/test. Deterministic in `seed`.
pub fn split_dataset(ds: &mut LabeledDataset, seed: u64, level: SplitLevel) -> Result<()> {
    let n = ds.len();
    if n < 10 {
        return Err(Error::InsufficientData(format!("{n} rows; splitting needs at least 10")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = vec![Split::Test; n];
    match level {
        SplitLevel::Row => {
            let (train, val, _) = split_counts(n);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            for (k, &i) in idx.iter().enumerate() {
                split[i] = if k < train {
                    Split::Train
                } else if k < train + val {
                    Split::Val
                } else {
                    Split::Test
                };
            }
        }
        SplitLevel::Flight => {
            let mut flights: Vec<&String> = ds.flight_ids.iter().collect();
            flights.sort();
            flights.dedup();
            if flights.len() < 3 {
                return Err(Error::InsufficientData("flight-level split needs at least 3 flights".into()));
            }
            flights.shuffle(&mut rng);
            let (train, val, _) = split_counts(flights.len());
            for (k, f) in flights.iter().enumerate() {
                let tag = if k < train {
                    Split::Train
                } else if k < train + val {
                    Split::Val
                } else {
                    Split::Test
                };
                for i in 0..n {
                    if &ds.flight_ids[i] == *f {
                        split[i] = tag;
                    }
                }
            }
        }
    }
    ds.split = split;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CascadeConfig {
    pub seed: u64,
    pub svm: SvmParams,
    pub mlp: TrainConfig,
    /// Cap on localization training rows per motor.
    pub loc_per_class: usize,
    /// Type-balancing target; `None` uses the smallest class's train count.
    pub type_balance_target: Option<usize>,
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
    pub n_motors: usize,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            svm: SvmParams::default(),
            mlp: TrainConfig::default(),
            loc_per_class: 4000,
            type_balance_target: None,
            kmeans_max_iter: DEFAULT_MAX_ITER,
            kmeans_tol: DEFAULT_TOL,
            n_motors: 4,
        }
    }
}

impl CascadeConfig {
    /// Seeds of the individual components, derived from the master seed.
    fn seeds(&self) -> ComponentSeeds {
        let s = self.seed;
        ComponentSeeds {
            type_balance: s.wrapping_add(11),
            type_svm: s.wrapping_add(12),
            tipcut_nn: s.wrapping_add(21),
            tipcut_loc_balance: s.wrapping_add(22),
            tipcut_loc_svm: s.wrapping_add(23),
            long_nn: s.wrapping_add(31),
            long_loc_balance: s.wrapping_add(32),
            long_loc_svm: s.wrapping_add(33),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentSeeds {
    pub type_balance: u64,
    pub type_svm: u64,
    pub tipcut_nn: u64,
    pub tipcut_loc_balance: u64,
    pub tipcut_loc_svm: u64,
    pub long_nn: u64,
    pub long_loc_balance: u64,
    pub long_loc_svm: u64,
}

impl ComponentSeeds {
    pub fn all(&self) -> Vec<u64> {
        vec![
            self.type_balance,
            self.type_svm,
            self.tipcut_nn,
            self.tipcut_loc_balance,
            self.tipcut_loc_svm,
            self.long_nn,
            self.long_loc_balance,
            self.long_loc_svm,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub config: CascadeConfig,
    pub seeds: ComponentSeeds,
    /// Train rows per type class before balancing (C0, C1, C2).
    pub type_train_counts: [usize; 3],
    pub type_balanced_count: usize,
    pub tipcut_loc_counts: Vec<usize>,
    pub long_loc_counts: Vec<usize>,
    pub tipcut_nn_rows: usize,
    pub long_nn_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeModel {
    pub schema: FeatureSchema,
    pub standardizer: Standardizer,
    pub type_svm: LinearSvmModel,
    pub tipcut_nn: MlpModel,
    pub tipcut_loc_svm: LinearSvmModel,
    pub long_nn: MlpModel,
    pub long_loc_svm: LinearSvmModel,
    pub record: TrainingRecord,
}

fn standardized(std: &Standardizer, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    let mut z = x.to_owned();
    for mut row in z.rows_mut() {
        std.apply_in_place(row.as_slice_mut().expect("standard layout"))?;
    }
    Ok(z)
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

struct Branch {
    nn: MlpModel,
    loc: LinearSvmModel,
    loc_counts: Vec<usize>,
    nn_rows: usize,
}

fn train_branch(
    z: &Array2<f64>,
    ds: &LabeledDataset,
    rows: &[usize],
    out: usize,
    cfg: &CascadeConfig,
    nn_seed: u64,
    bal_seed: u64,
    svm_seed: u64,
) -> Result<Branch> {
    let d = z.ncols();
    let x = z.select(Axis(0), rows);
    let targets: Vec<f64> = rows
        .iter()
        .flat_map(|&i| {
            RegressionTarget::from_label(&ds.labels[i])
                .expect("damaged row")
                .values()
        })
        .collect();
    let y = Array2::from_shape_vec((rows.len(), out), targets).expect("target width");
    let mut layers = vec![d];
    layers.extend(HIDDEN_LAYERS);
    layers.push(out);
    let id = ds.schema.id();
    let mut nn = mlp_init(&layers, nn_seed, &id)?;
    nn.center_output(y.view())?;
    let mlp_cfg = TrainConfig {
        seed: nn_seed,
        ..cfg.mlp
    };
    mlp_train(&mut nn, x.view(), y.view(), &mlp_cfg)?;

    let by_motor: Vec<Array2<f64>> = (1..=cfg.n_motors)
        .map(|m| {
            let idx: Vec<usize> = rows
                .iter()
                .enumerate()
                .filter(|(_, &i)| ds.labels[i].motor == Some(m))
                .map(|(k, _)| k)
                .collect();
            x.select(Axis(0), &idx)
        })
        .collect();
    let balanced = balance_classes(&by_motor, cfg.loc_per_class, bal_seed, cfg.kmeans_max_iter, cfg.kmeans_tol)?;
    let loc_counts = balanced.iter().map(|c| c.nrows()).collect();
    let (xl, ll) = stack(&balanced);
    let motors: Vec<usize> = ll.iter().map(|&c| c + 1).collect();
    let svm_cfg = SvmParams {
        seed: svm_seed,
        ..cfg.svm
    };
    let loc = svm_train_multiclass(xl.view(), &motors, &svm_cfg, &id)?;
    Ok(Branch {
        nn,
        loc,
        loc_counts,
        nn_rows: rows.len(),
    })
}

/// Trains every component on the rows tagged [`Split::Train`].
pub fn train_cascade(ds: &LabeledDataset, cfg: &CascadeConfig) -> Result<CascadeModel> {
    if ds.split.len() != ds.len() {
        return Err(Error::Config("dataset has no train/val/test tags; run the split first".into()));
    }
    let train = ds.indices(Some(Split::Train));
    let by_type = |t: TypeClass| -> Vec<usize> {
        train.iter().copied().filter(|&i| ds.type_class(i) == t).collect()
    };
    let rows: Vec<Vec<usize>> = TypeClass::ALL.iter().map(|&t| by_type(t)).collect();
    for (t, r) in TypeClass::ALL.iter().zip(&rows) {
        if r.len() < 3 {
            return Err(Error::Coverage(format!(
                "type class {} has {} training rows",
                t.name(),
                r.len()
            )));
        }
    }
    for (t, r) in [(TypeClass::C1, &rows[1]), (TypeClass::C2, &rows[2])] {
        for m in 1..=cfg.n_motors {
            let count = r.iter().filter(|&&i| ds.labels[i].motor == Some(m)).count();
            if count < 3 {
                return Err(Error::Coverage(format!(
                    "type class {} has {count} training rows on motor {m}",
                    t.name()
                )));
            }
        }
    }
    let seeds = cfg.seeds();
    let xt = ds.features.select(Axis(0), &train);
    let d = xt.ncols();
    let std = Standardizer::fit(&xt.as_standard_layout().as_slice().expect("contiguous").chunks(d).collect::<Vec<_>>())?;
    let z = standardized(&std, ds.features.view())?;

    let type_counts = [rows[0].len(), rows[1].len(), rows[2].len()];
    let target = cfg
        .type_balance_target
        .unwrap_or_else(|| *type_counts.iter().min().expect("three classes"));
    let classes: Vec<Array2<f64>> = rows.iter().map(|r| z.select(Axis(0), r)).collect();
    let balanced = balance_classes(&classes, target, seeds.type_balance, cfg.kmeans_max_iter, cfg.kmeans_tol)?;
    let type_balanced_count = balanced.iter().map(|c| c.nrows()).min().unwrap_or(0);
    let (xb, lb) = stack(&balanced);
    let id = ds.schema.id();
    let type_svm = svm_train_multiclass(
        xb.view(),
        &lb,
        &SvmParams {
            seed: seeds.type_svm,
            ..cfg.svm
        },
        &id,
    )?;

    let tip = train_branch(&z, ds, &rows[1], 2, cfg, seeds.tipcut_nn, seeds.tipcut_loc_balance, seeds.tipcut_loc_svm)?;
    let long = train_branch(&z, ds, &rows[2], 1, cfg, seeds.long_nn, seeds.long_loc_balance, seeds.long_loc_svm)?;
    Ok(CascadeModel {
        schema: ds.schema,
        standardizer: std,
        type_svm,
        tipcut_nn: tip.nn,
        tipcut_loc_svm: tip.loc,
        long_nn: long.nn,
        long_loc_svm: long.loc,
        record: TrainingRecord {
            config: cfg.clone(),
            seeds,
            type_train_counts: type_counts,
            type_balanced_count,
            tipcut_loc_counts: tip.loc_counts,
            long_loc_counts: long.loc_counts,
            tipcut_nn_rows: tip.nn_rows,
            long_nn_rows: long.nn_rows,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Magnitude {
    pub sum_mm: f64,
    /// Tip-cut branch only; clamped to `[0, sum_mm]`.
    pub diff_mm: Option<f64>,
    /// Unclamped network outputs.
    pub raw: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub type_probs: [f64; 3],
    pub type_class: TypeClass,
    pub magnitude: Option<Magnitude>,
    pub motor: Option<usize>,
    pub motor_probs: Option<Vec<f64>>,
}

impl CascadeModel {
    pub fn schema_id(&self) -> String {
        self.schema.id()
    }

    pub fn infer(&self, features: &[f64]) -> Result<Diagnosis> {
        if features.len() != self.schema.len() {
            return Err(Error::SchemaMismatch {
                expected: self.schema_id(),
                got: format!("{} features", features.len()),
            });
        }
        let z = self.standardizer.apply(features)?;
        self.infer_standardized(&z)
    }

    /// Inference on an already standardized vector.
    pub fn infer_standardized(&self, z: &[f64]) -> Result<Diagnosis> {
        let p = self.type_svm.predict_proba(z)?;
        let type_probs = [p[0], p[1], p[2]];
        let type_class = TypeClass::from_index(argmax(&p)).expect("three classes");
        let (nn, loc) = match type_class {
            TypeClass::C0 => {
                return Ok(Diagnosis {
                    type_probs,
                    type_class,
                    magnitude: None,
                    motor: None,
                    motor_probs: None,
                })
            }
            TypeClass::C1 => (&self.tipcut_nn, &self.tipcut_loc_svm),
            TypeClass::C2 => (&self.long_nn, &self.long_loc_svm),
        };
        let raw = nn.forward(z)?;
        let sum = raw[0];
        let diff = raw.get(1).map(|d| d.clamp(0.0, sum.max(0.0)));
        let mp = loc.predict_proba(z)?;
        Ok(Diagnosis {
            type_probs,
            type_class,
            magnitude: Some(Magnitude {
                sum_mm: sum,
                diff_mm: diff,
                raw,
            }),
            motor: Some(loc.classes[argmax(&mp)]),
            motor_probs: Some(mp),
        })
    }

    /// One diagnosis per window of `log`, plus the throughput in windows/s.
    pub fn infer_log(&self, log: &FlightLog, stride: usize) -> Result<(Vec<(usize, Diagnosis)>, f64)> {
        let t0 = Instant::now();
        let mut ex = FeatureExtractor::new(self.schema);
        let out = ex
            .extract_log(log, stride)?
            .into_iter()
            .map(|(start, fv)| Ok((start, self.infer(&fv.values)?)))
            .collect::<Result<Vec<_>>>()?;
        let secs = t0.elapsed().as_secs_f64().max(1e-9);
        let rate = out.len() as f64 / secs;
        Ok((out, rate))
    }

    /// Every component as JSON, keyed by file name. The bundle index comes last.
    pub fn bundle_files(&self, provenance: &Provenance) -> Result<Vec<(String, String)>> {
        let mut files = vec![
            ("type_svm.json".to_string(), self.type_svm.to_json()?),
            ("tipcut_nn.json".to_string(), self.tipcut_nn.to_json()?),
            ("tipcut_loc_svm.json".to_string(), self.tipcut_loc_svm.to_json()?),
            ("long_nn.json".to_string(), self.long_nn.to_json()?),
            ("long_loc_svm.json".to_string(), self.long_loc_svm.to_json()?),
            (
                "standardizer.json".to_string(),
                serde_json::to_string_pretty(&StandardizerDoc {
                    schema_id: self.schema_id(),
                    standardizer: self.standardizer.clone(),
                })?,
            ),
        ];
        let index = BundleIndex {
            schema_id: self.schema_id(),
            band_width_hz: self.schema.band_width_hz,
            type_svm: files[0].0.clone(),
            tipcut_nn: files[1].0.clone(),
            tipcut_loc_svm: files[2].0.clone(),
            long_nn: files[3].0.clone(),
            long_loc_svm: files[4].0.clone(),
            standardizer: files[5].0.clone(),
            training: self.record.clone(),
            provenance: provenance.clone(),
        };
        files.push(("cascade.json".to_string(), serde_json::to_string_pretty(&index)?));
        Ok(files)
    }

    /// Writes `cascade.json` and its component files into `dir`.
    pub fn save(&self, dir: &Path, provenance: &Provenance) -> Result<()> {
        for (name, text) in self.bundle_files(provenance)? {
            write_atomic(&dir.join(name), text.as_bytes())?;
        }
        Ok(())
    }

    /// Loads a bundle from the path of its `cascade.json`.
    pub fn load(index_path: &Path) -> Result<Self> {
        let dir = index_path.parent().unwrap_or_else(|| Path::new("."));
        let index: BundleIndex = serde_json::from_str(&std::fs::read_to_string(index_path)?)?;
        let read = |name: &str| std::fs::read_to_string(dir.join(name));
        let schema = FeatureSchema::new(index.band_width_hz)?;
        let sdoc: StandardizerDoc = serde_json::from_str(&read(&index.standardizer)?)?;
        let model = Self {
            schema,
            standardizer: sdoc.standardizer,
            type_svm: LinearSvmModel::from_json(&read(&index.type_svm)?)?,
            tipcut_nn: MlpModel::from_json(&read(&index.tipcut_nn)?)?,
            tipcut_loc_svm: LinearSvmModel::from_json(&read(&index.tipcut_loc_svm)?)?,
            long_nn: MlpModel::from_json(&read(&index.long_nn)?)?,
            long_loc_svm: LinearSvmModel::from_json(&read(&index.long_loc_svm)?)?,
            record: index.training,
        };
        let id = model.schema_id();
        let ids = [
            &sdoc.schema_id,
            &model.type_svm.schema_id,
            &model.tipcut_nn.schema_id,
            &model.tipcut_loc_svm.schema_id,
            &model.long_nn.schema_id,
            &model.long_loc_svm.schema_id,
        ];
        if let Some(bad) = ids.iter().find(|s| **s != &id) {
            return Err(Error::SchemaMismatch {
                expected: id,
                got: bad.to_string(),
            });
        }
        if model.standardizer.dim() != schema.len() || model.type_svm.dim() != schema.len() {
            return Err(Error::SchemaMismatch {
                expected: id,
                got: format!("{} standardizer columns", model.standardizer.dim()),
            });
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StandardizerDoc {
    schema_id: String,
    standardizer: Standardizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BundleIndex {
    schema_id: String,
    band_width_hz: usize,
    type_svm: String,
    tipcut_nn: String,
    tipcut_loc_svm: String,
    long_nn: String,
    long_loc_svm: String,
    standardizer: String,
    training: TrainingRecord,
    provenance: Provenance,
}

pub const DIAGNOSIS_HEADER: &str =
    "flight_id,start_index,p_C0,p_C1,p_C2,type,sum_mm,diff_mm,motor,p_m1,p_m2,p_m3,p_m4";

/// Diagnosis stream as CSV; absent fields are empty cells.
pub fn diagnosis_csv(
    flight_id: &str,
    diagnoses: &[(usize, Diagnosis)],
    provenance: Option<&Provenance>,
) -> String {
    let mut s = String::new();
    if let Some(p) = provenance {
        s.push_str(&p.csv_comment());
        s.push('\n');
    }
    s.push_str(DIAGNOSIS_HEADER);
    s.push('\n');
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for (start, d) in diagnoses {
        let _ = write!(
            s,
            "{flight_id},{start},{},{},{},{},",
            d.type_probs[0],
            d.type_probs[1],
            d.type_probs[2],
            d.type_class.name()
        );
        let mag = d.magnitude.as_ref();
        let _ = write!(
            s,
            "{},{},{}",
            opt(mag.map(|m| m.sum_mm)),
            opt(mag.and_then(|m| m.diff_mm)),
            d.motor.map(|m| m.to_string()).unwrap_or_default()
        );
        for k in 0..4 {
            let p = d.motor_probs.as_ref().and_then(|p| p.get(k).copied());
            let _ = write!(s, ",{}", opt(p));
        }
        s.push('\n');
    }
    s
}

/// Builds the default stride dataset of an already augmented corpus and tags it.
pub fn prepare_dataset(
    logs: &[FlightLog],
    schema: FeatureSchema,
    seed: u64,
    level: SplitLevel,
) -> Result<LabeledDataset> {
    let mut ds = LabeledDataset::from_logs(logs, schema, DEFAULT_STRIDE)?;
    split_dataset(&mut ds, seed, level)?;
    Ok(ds)
}

/// True damage sum for reporting, 0 for healthy rows.
pub fn true_sum(label: &DamageLabel) -> f64 {
    match label.kind {
        DamageKind::Healthy => 0.0,
        _ => label.sum_mm(),
    }
}
