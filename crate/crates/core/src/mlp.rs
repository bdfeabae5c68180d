//! Feed-forward regressor: ReLU hidden layers, linear output, mean-squared
//! error, Adadelta updates.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flightlog::{DamageKind, DamageLabel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    pub seed: u64,
    /// Rows per update; `None` trains on the full batch every epoch.
    pub batch_size: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: 0.1,
            rho: 0.95,
            eps: 1e-6,
            seed: 0,
            batch_size: Some(32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub schema_id: String,
    pub layer_sizes: Vec<usize>,
    /// Per layer, an `out × in` matrix flattened row-major.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub training_config: TrainConfig,
    /// Full-training-set loss after each epoch.
    pub loss_history: Vec<f64>,
}

/// Gradient of the loss with respect to every weight and bias, laid out like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradient {
    pub fn norm(&self) -> f64 {
        self.weights
            .iter()
            .chain(&self.biases)
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Regression targets: `(sum, diff)` for tip cuts, `(sum)` for longitudinal cuts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegressionTarget {
    TipCut { sum_mm: f64, diff_mm: f64 },
    Longitudinal { sum_mm: f64 },
}

impl RegressionTarget {
    pub fn from_label(label: &DamageLabel) -> Option<Self> {
        match label.kind {
            DamageKind::Healthy => None,
            DamageKind::TipCut { .. } => Some(Self::TipCut {
                sum_mm: label.sum_mm(),
                diff_mm: label.diff_mm(),
            }),
            DamageKind::Longitudinal { .. } => Some(Self::Longitudinal {
                sum_mm: label.sum_mm(),
            }),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match *self {
            Self::TipCut { sum_mm, diff_mm } => vec![sum_mm, diff_mm],
            Self::Longitudinal { sum_mm } => vec![sum_mm],
        }
    }
}

pub fn mlp_init(layer_sizes: &[usize], seed: u64, schema_id: &str) -> Result<MlpModel> {
    if layer_sizes.len() < 3 {
        return Err(Error::Config("need input, at least one hidden and an output layer".into()));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::Config("zero-width layer".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for pair in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
        weights.push((0..fan_in * fan_out).map(|_| normal.sample(&mut rng)).collect());
        biases.push(vec![0.0; fan_out]);
    }
    Ok(MlpModel {
        schema_id: schema_id.to_string(),
        layer_sizes: layer_sizes.to_vec(),
        weights,
        biases,
        training_config: TrainConfig {
            seed,
            ..Default::default()
        },
        loss_history: Vec::new(),
    })
}

struct Layers {
    w: Vec<Array2<f64>>,
    b: Vec<Array1<f64>>,
}

impl MlpModel {
    pub fn n_params(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(Vec::len).sum()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().expect("non-empty")
    }

    /// Sets the output biases to the column means of `y`, so training starts
    /// from the mean predictor instead of zero.
    pub fn center_output(&mut self, y: ArrayView2<f64>) -> Result<()> {
        if y.ncols() != self.output_dim() || y.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                got: y.ncols(),
            });
        }
        let means = y.mean_axis(ndarray::Axis(0)).expect("non-empty");
        let last = self.biases.last_mut().expect("non-empty");
        last.copy_from_slice(means.as_slice().expect("contiguous"));
        Ok(())
    }

    fn layers(&self) -> Layers {
        let mut w = Vec::new();
        let mut b = Vec::new();
        for (l, pair) in self.layer_sizes.windows(2).enumerate() {
            w.push(
                Array2::from_shape_vec((pair[1], pair[0]), self.weights[l].clone())
                    .expect("consistent layer sizes"),
            );
            b.push(Array1::from(self.biases[l].clone()));
        }
        Layers { w, b }
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: cols,
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x.len())?;
        let xa = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        Ok(self.forward_batch(xa)?.row(0).to_vec())
    }

    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(x.ncols())?;
        let layers = self.layers();
        Ok(forward_all(&layers, x).pop().expect("output layer"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        let n_layers = m.layer_sizes.len().saturating_sub(1);
        let ok = m.layer_sizes.len() >= 2
            && m.weights.len() == n_layers
            && m.biases.len() == n_layers
            && m.layer_sizes.windows(2).enumerate().all(|(l, p)| {
                m.weights[l].len() == p[0] * p[1] && m.biases[l].len() == p[1]
            });
        if !ok {
            return Err(Error::InvalidInput("inconsistent MLP model document".into()));
        }
        Ok(m)
    }
}

/// Activations of every layer, input first; hidden layers after ReLU.
fn forward_all(layers: &Layers, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
    let n_layers = layers.w.len();
    let mut acts = vec![x.to_owned()];
    for l in 0..n_layers {
        let mut z = acts[l].dot(&layers.w[l].t());
        z += &layers.b[l];
        if l + 1 < n_layers {
            z.mapv_inplace(|v| v.max(0.0));
        }
        acts.push(z);
    }
    acts
}

fn mse(pred: &Array2<f64>, y: ArrayView2<f64>) -> f64 {
    let n = pred.len() as f64;
    pred.iter().zip(y.iter()).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / n
}

/// Loss and exact gradient of the mean over rows and outputs of the squared error.
fn loss_and_grad(layers: &Layers, x: ArrayView2<f64>, y: ArrayView2<f64>) -> (f64, Vec<Array2<f64>>, Vec<Array1<f64>>) {
    let acts = forward_all(layers, x);
    let n_layers = layers.w.len();
    let out = &acts[n_layers];
    let loss = mse(out, y);
    let scale = 2.0 / out.len() as f64;
    let mut delta = (out - &y) * scale;
    let mut gw = vec![Array2::zeros((0, 0)); n_layers];
    let mut gb = vec![Array1::zeros(0); n_layers];
    for l in (0..n_layers).rev() {
        gw[l] = delta.t().dot(&acts[l]);
        gb[l] = delta.sum_axis(Axis(0));
        if l > 0 {
            let mut prev = delta.dot(&layers.w[l]);
            // ReLU derivative from the stored post-activation values
            prev.zip_mut_with(&acts[l], |d, &a| {
                if a <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = prev;
        }
    }
    (loss, gw, gb)
}

fn check_batch(model: &MlpModel, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<()> {
    model.check_input(x.ncols())?;
    if y.ncols() != model.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.output_dim(),
            got: y.ncols(),
        });
    }
    if x.nrows() != y.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.nrows(),
        });
    }
    if x.nrows() == 0 {
        return Err(Error::InsufficientData("empty batch".into()));
    }
    Ok(())
}

pub fn mlp_loss(model: &MlpModel, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64> {
    check_batch(model, x, y)?;
    Ok(mse(&model.forward_batch(x)?, y))
}

pub fn mlp_grad(model: &MlpModel, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<Gradient> {
    check_batch(model, x, y)?;
    let (_, gw, gb) = loss_and_grad(&model.layers(), x, y);
    Ok(Gradient {
        weights: gw.into_iter().map(|g| g.into_raw_vec_and_offset().0).collect(),
        biases: gb.into_iter().map(|g| g.to_vec()).collect(),
    })
}

struct AdadeltaState {
    sq: Array2<f64>,
    acc: Array2<f64>,
    sq_b: Array1<f64>,
    acc_b: Array1<f64>,
}

fn adadelta_step(p: &mut f64, g: f64, sq: &mut f64, acc: &mut f64, cfg: &TrainConfig) {
    *sq = cfg.rho * *sq + (1.0 - cfg.rho) * g * g;
    let delta = ((*acc + cfg.eps).sqrt() / (*sq + cfg.eps).sqrt()) * g;
    *acc = cfg.rho * *acc + (1.0 - cfg.rho) * delta * delta;
    *p -= cfg.lr * delta;
}

/// Trains in place and records the full-set loss after every epoch.
pub fn mlp_train(
    model: &mut MlpModel,
    x: ArrayView2<f64>,
    y: ArrayView2<f64>,
    config: &TrainConfig,
) -> Result<()> {
    check_batch(model, x, y)?;
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite training data".into()));
    }
    if config.batch_size == Some(0) {
        return Err(Error::Config("batch size must be positive".into()));
    }
    let mut layers = model.layers();
    let mut state: Vec<AdadeltaState> = layers
        .w
        .iter()
        .zip(&layers.b)
        .map(|(w, b)| AdadeltaState {
            sq: Array2::zeros(w.raw_dim()),
            acc: Array2::zeros(w.raw_dim()),
            sq_b: Array1::zeros(b.len()),
            acc_b: Array1::zeros(b.len()),
        })
        .collect();
    let n = x.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut apply = |layers: &mut Layers, gw: Vec<Array2<f64>>, gb: Vec<Array1<f64>>| {
        for (l, st) in state.iter_mut().enumerate() {
            ndarray::Zip::from(&mut layers.w[l])
                .and(&gw[l])
                .and(&mut st.sq)
                .and(&mut st.acc)
                .for_each(|p, &g, sq, acc| adadelta_step(p, g, sq, acc, config));
            ndarray::Zip::from(&mut layers.b[l])
                .and(&gb[l])
                .and(&mut st.sq_b)
                .and(&mut st.acc_b)
                .for_each(|p, &g, sq, acc| adadelta_step(p, g, sq, acc, config));
        }
    };
    for epoch in 0..config.epochs {
        match config.batch_size {
            Some(bs) if bs < n => {
                order.shuffle(&mut rng);
                for chunk in order.chunks(bs) {
                    let xb = x.select(Axis(0), chunk);
                    let yb = y.select(Axis(0), chunk);
                    let (_, gw, gb) = loss_and_grad(&layers, xb.view(), yb.view());
                    apply(&mut layers, gw, gb);
                }
            }
            _ => {
                let (_, gw, gb) = loss_and_grad(&layers, x, y);
                apply(&mut layers, gw, gb);
            }
        }
        let pred = forward_all(&layers, x).pop().expect("output layer");
        let loss = mse(&pred, y);
        if !loss.is_finite() {
            return Err(Error::Numeric(format!(
                "loss became {loss} at epoch {epoch}; last finite loss {:?}",
                history.last()
            )));
        }
        history.push(loss);
    }
    model.weights = layers.w.into_iter().map(|w| w.into_raw_vec_and_offset().0).collect();
    model.biases = layers.b.into_iter().map(|b| b.to_vec()).collect();
    model.training_config = *config;
    model.loss_history = history;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    fn random_batch(n: usize, d: usize, out: usize, seed: u64) -> (Array2<f64>, Array2<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (
            Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0)),
            Array2::from_shape_fn((n, out), |_| rng.gen_range(-2.0..2.0)),
        )
    }

    #[test]
    fn parameter_count() {
        let m = mlp_init(&[232, 32, 8, 4, 2], 0, "s").unwrap();
        // 232·32+32 + 32·8+8 + 8·4+4 + 4·2+2
        assert_eq!(m.n_params(), 7766);
        assert_eq!(m, mlp_init(&[232, 32, 8, 4, 2], 0, "s").unwrap());
        assert_eq!(mlp_init(&[232, 32, 8, 4, 1], 0, "s").unwrap().output_dim(), 1);
        assert!(mlp_init(&[3, 0, 1], 0, "s").is_err());
        assert!(mlp_init(&[3, 1], 0, "s").is_err());
    }

    #[test]
    fn forward_fixtures() {
        let mut m = mlp_init(&[3, 2, 1], 1, "s").unwrap();
        m.weights.iter_mut().flatten().for_each(|v| *v = 0.0);
        assert_eq!(m.forward(&[5.0, -1.0, 2.0]).unwrap(), vec![0.0]);
        // identity-like hidden layer picking the first two inputs
        m.weights[0] = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        m.weights[1] = vec![1.0, 10.0];
        assert_eq!(m.forward(&[2.0, 3.0, 9.0]).unwrap(), vec![32.0]);
        m.weights[1] = vec![0.0, 0.0];
        m.biases[1] = vec![-4.0];
        assert_eq!(m.forward(&[2.0, 3.0, 9.0]).unwrap(), vec![-4.0]);
        assert!(m.forward(&[1.0]).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut m = mlp_init(&[6, 5, 4, 2], 3, "s").unwrap();
        m.biases.iter_mut().flatten().for_each(|b| *b = 0.1);
        let (x, y) = random_batch(5, 6, 2, 4);
        let g = mlp_grad(&m, x.view(), y.view()).unwrap();
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for l in 0..m.weights.len() {
            for (is_bias, len) in [(false, m.weights[l].len()), (true, m.biases[l].len())] {
                for i in 0..len {
                    let mut plus = m.clone();
                    let mut minus = m.clone();
                    let (p, q) = if is_bias {
                        (&mut plus.biases[l][i], &mut minus.biases[l][i])
                    } else {
                        (&mut plus.weights[l][i], &mut minus.weights[l][i])
                    };
                    *p += h;
                    *q -= h;
                    let fd = (mlp_loss(&plus, x.view(), y.view()).unwrap()
                        - mlp_loss(&minus, x.view(), y.view()).unwrap())
                        / (2.0 * h);
                    let an = if is_bias { g.biases[l][i] } else { g.weights[l][i] };
                    let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-3);
                    worst = worst.max(rel);
                }
            }
        }
        assert!(worst < 1e-5, "worst relative error {worst}");
    }

    #[test]
    fn zero_residual_and_duplicated_batch() {
        let m = mlp_init(&[4, 3, 2], 5, "s").unwrap();
        let (x, _) = random_batch(6, 4, 2, 6);
        let y = m.forward_batch(x.view()).unwrap();
        assert!(mlp_grad(&m, x.view(), y.view()).unwrap().norm() < 1e-12);
        let (x, y) = random_batch(6, 4, 2, 7);
        let g1 = mlp_grad(&m, x.view(), y.view()).unwrap();
        let x2 = ndarray::concatenate![Axis(0), x, x];
        let y2 = ndarray::concatenate![Axis(0), y, y];
        let g2 = mlp_grad(&m, x2.view(), y2.view()).unwrap();
        for (a, b) in g1.weights.iter().flatten().zip(g2.weights.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn learns_a_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = Array2::from_shape_fn((2048, 1), |_| rng.gen_range(-1.0..1.0));
        let y = x.mapv(|v| 2.0 * v);
        let mut m = mlp_init(&[1, 4, 1], 2, "s").unwrap();
        let cfg = TrainConfig { seed: 2, ..Default::default() };
        mlp_train(&mut m, x.view(), y.view(), &cfg).unwrap();
        assert_eq!(m.loss_history.len(), 200);
        let last = *m.loss_history.last().unwrap();
        assert!(last < 1e-3, "final loss {last}");
    }

    #[test]
    fn descent_determinism_and_smoothness() {
        let (x, _) = random_batch(200, 5, 1, 9);
        let y = x.map_axis(Axis(1), |r| r.iter().map(|v| v * v).sum::<f64>()).insert_axis(Axis(1));
        let cfg = TrainConfig { seed: 1, ..Default::default() };
        let mut a = mlp_init(&[5, 8, 4, 1], 1, "s").unwrap();
        let mut b = a.clone();
        mlp_train(&mut a, x.view(), y.view(), &cfg).unwrap();
        mlp_train(&mut b, x.view(), y.view(), &cfg).unwrap();
        assert_eq!(a.loss_history, b.loss_history);
        let h = &a.loss_history;
        assert!(h[199] < h[0]);
        let smooth = |i: usize| h[i + 1 - 10..=i].iter().sum::<f64>() / 10.0;
        assert!(smooth(199) < smooth(9));
    }

    #[test]
    fn full_batch_is_row_order_invariant() {
        let (x, y) = random_batch(40, 3, 2, 10);
        let cfg = TrainConfig { seed: 0, batch_size: None, epochs: 50, ..Default::default() };
        let mut a = mlp_init(&[3, 6, 2], 4, "s").unwrap();
        let mut b = a.clone();
        mlp_train(&mut a, x.view(), y.view(), &cfg).unwrap();
        let mut perm: Vec<usize> = (0..40).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
        let xp = x.select(Axis(0), &perm);
        let yp = y.select(Axis(0), &perm);
        mlp_train(&mut b, xp.view(), yp.view(), &cfg).unwrap();
        for (p, q) in a.weights.iter().flatten().zip(b.weights.iter().flatten()) {
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn json_round_trip_and_nan_abort() {
        let m = mlp_init(&[3, 4, 1], 0, "bands5hz-v1").unwrap();
        assert_eq!(MlpModel::from_json(&m.to_json().unwrap()).unwrap(), m);
        let mut m2 = m.clone();
        let x = array![[1.0, 2.0, 3.0]];
        let y = array![[1e308]];
        let cfg = TrainConfig { batch_size: None, epochs: 3, lr: 1e300, ..Default::default() };
        assert!(mlp_train(&mut m2, x.view(), y.view(), &cfg).is_err());
    }

    #[test]
    fn regression_targets() {
        let t = RegressionTarget::from_label(&DamageLabel::tip_cut(10.0, 15.0, 1)).unwrap();
        assert_eq!(t.values(), vec![25.0, 5.0]);
        let l = RegressionTarget::from_label(&DamageLabel::longitudinal(20.0, 2)).unwrap();
        assert_eq!(l.values(), vec![40.0]);
        assert!(RegressionTarget::from_label(&DamageLabel::healthy()).is_none());
    }
}
