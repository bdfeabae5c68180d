//! Linear soft-margin SVM trained by dual coordinate descent, one-vs-rest for
//! several classes, with Platt-scaled probability outputs.
//!
//! The primal is `½‖w‖² + ½b² + C·Σ max(0, 1 - yᵢ(w·xᵢ + b))`; the bias is
//! handled as an extra constant feature, as liblinear does.

use std::cmp::Ordering;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    /// Maximum outer sweeps of the coordinate-descent solver.
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-4,
            max_iter: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub w: Vec<f64>,
    pub b: f64,
    pub sweeps: usize,
}

impl BinarySvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_finite(x: &ArrayView2<f64>) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature values".into()));
    }
    Ok(())
}

/// Row order independent of how the caller arranged the data.
fn canonical_order(x: &ArrayView2<f64>, y: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.nrows()).collect();
    idx.sort_by(|&a, &b| {
        y[a].total_cmp(&y[b]).then_with(|| {
            for (u, v) in x.row(a).iter().zip(x.row(b).iter()) {
                match u.total_cmp(v) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    });
    idx
}

/// Hinge-loss primal objective of `(w, b)`.
pub fn primal_objective(x: ArrayView2<f64>, y: &[f64], model: &BinarySvm, c: f64) -> f64 {
    let reg = 0.5 * (dot(&model.w, &model.w) + model.b * model.b);
    let loss: f64 = x
        .rows()
        .into_iter()
        .zip(y)
        .map(|(r, &yi)| {
            let f = r.iter().zip(&model.w).map(|(a, b)| a * b).sum::<f64>() + model.b;
            (1.0 - yi * f).max(0.0)
        })
        .sum();
    reg + c * loss
}

/// Binary soft-margin SVM; labels must be ±1.
pub fn svm_train_binary(x: ArrayView2<f64>, y: &[f64], params: &SvmParams) -> Result<BinarySvm> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidInput("binary labels must be +1 or -1".into()));
    }
    if !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(Error::InsufficientData("binary SVM needs both classes".into()));
    }
    if !(params.c > 0.0 && params.tol > 0.0) {
        return Err(Error::Config("C and tol must be positive".into()));
    }
    check_finite(&x)?;
    let d = x.ncols();
    let order = canonical_order(&x, y);
    // augmented rows [x, 1] in canonical order
    let rows: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| {
            let mut r = x.row(i).to_vec();
            r.push(1.0);
            r
        })
        .collect();
    let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let qd: Vec<f64> = rows.iter().map(|r| dot(r, r)).collect();
    let c = params.c;
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; d + 1];
    let mut active: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut pg_max_old = f64::INFINITY;
    let mut pg_min_old = f64::NEG_INFINITY;
    let mut sweeps = 0;
    while sweeps < params.max_iter {
        sweeps += 1;
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        active.shuffle(&mut rng);
        let mut s = 0;
        while s < active.len() {
            let i = active[s];
            let xi = &rows[i];
            let yi = ys[i];
            let g = yi * dot(&w, xi) - 1.0;
            let mut pg = 0.0;
            if alpha[i] == 0.0 {
                if g > pg_max_old {
                    active.swap_remove(s);
                    continue;
                }
                if g < 0.0 {
                    pg = g;
                }
            } else if alpha[i] == c {
                if g < pg_min_old {
                    active.swap_remove(s);
                    continue;
                }
                if g > 0.0 {
                    pg = g;
                }
            } else {
                pg = g;
            }
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 && qd[i] > 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).clamp(0.0, c);
                let step = (alpha[i] - old) * yi;
                for (wj, xj) in w.iter_mut().zip(xi) {
                    *wj += step * xj;
                }
            }
            s += 1;
        }
        if pg_max - pg_min <= params.tol {
            if active.len() == n {
                break;
            }
            // converged on the shrunk set; recheck everything
            active = (0..n).collect();
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
            continue;
        }
        pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
        pg_min_old = if pg_min >= 0.0 { f64::NEG_INFINITY } else { pg_min };
    }
    let b = w.pop().unwrap_or(0.0);
    Ok(BinarySvm { w, b, sweeps })
}

/// Platt sigmoid `P(y = +1 | f) = 1 / (1 + exp(A·f + B))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Platt {
    pub a: f64,
    pub b: f64,
}

impl Platt {
    pub fn prob(&self, f: f64) -> f64 {
        let z = self.a * f + self.b;
        let p = if z >= 0.0 {
            let e = (-z).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + z.exp())
        };
        p.clamp(1e-12, 1.0 - 1e-12)
    }
}

/// Regularized maximum-likelihood sigmoid fit (Newton with backtracking).
pub fn platt_fit(scores: &[f64], positive: &[bool]) -> Platt {
    let n_pos = positive.iter().filter(|&&p| p).count() as f64;
    let n_neg = positive.len() as f64 - n_pos;
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let t: Vec<f64> = positive.iter().map(|&p| if p { hi } else { lo }).collect();
    let fval_of = |a: f64, b: f64| -> f64 {
        scores
            .iter()
            .zip(&t)
            .map(|(&f, &ti)| {
                let z = f * a + b;
                if z >= 0.0 {
                    ti * z + (1.0 + (-z).exp()).ln()
                } else {
                    (ti - 1.0) * z + (1.0 + z.exp()).ln()
                }
            })
            .sum()
    };
    let mut a = 0.0;
    let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();
    let mut fval = fval_of(a, b);
    let sigma = 1e-12;
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (sigma, sigma, 0.0, 0.0, 0.0);
        for (&f, &ti) in scores.iter().zip(&t) {
            let z = f * a + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = ti - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        let mut improved = false;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = fval_of(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                improved = true;
                break;
            }
            step /= 2.0;
        }
        if !improved {
            break;
        }
    }
    Platt { a, b }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassModel {
    pub w: Vec<f64>,
    pub b: f64,
    #[serde(rename = "A")]
    pub platt_a: f64,
    #[serde(rename = "B")]
    pub platt_b: f64,
}

impl ClassModel {
    fn platt(&self) -> Platt {
        Platt {
            a: self.platt_a,
            b: self.platt_b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub schema_id: String,
    pub classes: Vec<usize>,
    pub per_class: Vec<ClassModel>,
    pub hyperparams: SvmParams,
}

const PLATT_FOLDS: usize = 3;

/// Out-of-fold decision values for Platt fitting.
fn oof_scores(x: ArrayView2<f64>, y: &[f64], params: &SvmParams) -> Result<Vec<f64>> {
    let n = x.nrows();
    let order = canonical_order(&x, y);
    let mut shuffled = order.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed ^ 0x5eed_f01d));
    let mut fold = vec![0usize; n];
    // stratified: deal each class round-robin over the folds
    for sign in [1.0, -1.0] {
        for (j, &i) in shuffled.iter().filter(|&&i| y[i] == sign).enumerate() {
            fold[i] = j % PLATT_FOLDS;
        }
    }
    let mut scores = vec![0.0; n];
    for f in 0..PLATT_FOLDS {
        let train: Vec<usize> = (0..n).filter(|&i| fold[i] != f).collect();
        let xt = x.select(ndarray::Axis(0), &train);
        let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let m = svm_train_binary(xt.view(), &yt, params)?;
        for i in (0..n).filter(|&i| fold[i] == f) {
            scores[i] = m.decision(x.row(i).as_slice().expect("standard layout"));
        }
    }
    Ok(scores)
}

fn fit_class(x: ArrayView2<f64>, y: &[f64], params: &SvmParams) -> Result<ClassModel> {
    let m = svm_train_binary(x, y, params)?;
    let oof = oof_scores(x, y, params)?;
    let pos: Vec<bool> = y.iter().map(|&v| v > 0.0).collect();
    let p = platt_fit(&oof, &pos);
    Ok(ClassModel {
        w: m.w,
        b: m.b,
        platt_a: p.a,
        platt_b: p.b,
    })
}

/// One-vs-rest training; two classes reduce to a single binary model and its complement.
pub fn svm_train_multiclass(
    x: ArrayView2<f64>,
    labels: &[usize],
    params: &SvmParams,
    schema_id: &str,
) -> Result<LinearSvmModel> {
    if labels.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: labels.len(),
        });
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InsufficientData("at least two classes are required".into()));
    }
    for &c in &classes {
        let count = labels.iter().filter(|&&l| l == c).count();
        if count < PLATT_FOLDS {
            return Err(Error::InsufficientData(format!(
                "class {c} has {count} samples; probability calibration needs {PLATT_FOLDS}"
            )));
        }
    }
    // canonical row order makes every later step independent of input order
    let keys: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let order = canonical_order(&x, &keys);
    let x = x.select(ndarray::Axis(0), &order);
    let labels: Vec<usize> = order.iter().map(|&i| labels[i]).collect();
    let per_class = if classes.len() == 2 {
        let y: Vec<f64> = labels.iter().map(|&l| if l == classes[0] { 1.0 } else { -1.0 }).collect();
        let m0 = fit_class(x.view(), &y, params)?;
        let m1 = ClassModel {
            w: m0.w.iter().map(|v| -v).collect(),
            b: -m0.b,
            platt_a: m0.platt_a,
            platt_b: -m0.platt_b,
        };
        vec![m0, m1]
    } else {
        classes
            .iter()
            .map(|&c| {
                let y: Vec<f64> = labels.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
                fit_class(x.view(), &y, params)
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(LinearSvmModel {
        schema_id: schema_id.to_string(),
        classes,
        per_class,
        hyperparams: *params,
    })
}

impl LinearSvmModel {
    pub fn dim(&self) -> usize {
        self.per_class.first().map(|m| m.w.len()).unwrap_or(0)
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(self.per_class.iter().map(|m| dot(&m.w, x) + m.b).collect())
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        let scores = self.decision_values(x)?;
        let mut p: Vec<f64> = scores
            .iter()
            .zip(&self.per_class)
            .map(|(&s, m)| m.platt().prob(s))
            .collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        Ok(p)
    }

    /// Class label with the highest probability; ties go to the lowest class index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let p = self.predict_proba(x)?;
        Ok(self.classes[argmax(&p)])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        if m.classes.len() != m.per_class.len() || m.per_class.iter().any(|c| c.w.len() != m.dim()) {
            return Err(Error::InvalidInput("inconsistent SVM model document".into()));
        }
        Ok(m)
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Predicted labels for every row.
pub fn predict_rows(model: &LinearSvmModel, x: ArrayView2<f64>) -> Result<Vec<usize>> {
    x.rows()
        .into_iter()
        .map(|r| model.predict(&r.to_vec()))
        .collect()
}

pub fn rows_to_array(rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let d = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut flat = Vec::with_capacity(rows.len() * d);
    for r in rows {
        if r.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.len(),
            });
        }
        flat.extend_from_slice(r);
    }
    Array2::from_shape_vec((rows.len(), d), flat).map_err(|e| Error::InvalidInput(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn blobs(centers: &[Vec<f64>], per: usize, sigma: f64, seed: u64) -> (Array2<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nd = Normal::new(0.0, sigma).unwrap();
        let d = centers[0].len();
        let mut v = Vec::new();
        let mut l = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..per {
                v.extend(center.iter().map(|m| m + nd.sample(&mut rng)));
                l.push(c);
            }
        }
        (Array2::from_shape_vec((l.len(), d), v).unwrap(), l)
    }

    #[test]
    fn one_dimensional_separable() {
        let x = array![[1.0], [2.0], [-1.0], [-2.0]];
        let y = [1.0, 1.0, -1.0, -1.0];
        let m = svm_train_binary(x.view(), &y, &SvmParams::default()).unwrap();
        assert!(m.w[0] > 0.0);
        for (r, &yi) in x.rows().into_iter().zip(&y) {
            assert!(m.decision(r.as_slice().unwrap()) * yi > 0.0);
        }
    }

    #[test]
    fn xor_is_not_linearly_separable() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let y = [1.0, 1.0, -1.0, -1.0];
        for c in [0.1, 1.0, 100.0] {
            let p = SvmParams { c, ..Default::default() };
            let m = svm_train_binary(x.view(), &y, &p).unwrap();
            let correct = x
                .rows()
                .into_iter()
                .zip(&y)
                .filter(|(r, &yi)| m.decision(r.as_slice().unwrap()) * yi > 0.0)
                .count();
            assert!(correct <= 3);
        }
    }

    #[test]
    fn duplication_keeps_the_boundary() {
        let (x, l) = blobs(&[vec![-3.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]], 40, 0.5, 4);
        let y: Vec<f64> = l.iter().map(|&c| if c == 0 { 1.0 } else { -1.0 }).collect();
        let p = SvmParams { c: 100.0, tol: 1e-10, max_iter: 100_000, seed: 1 };
        let m = svm_train_binary(x.view(), &y, &p).unwrap();
        let x2 = ndarray::concatenate![ndarray::Axis(0), x, x];
        let y2: Vec<f64> = y.iter().chain(&y).cloned().collect();
        let m2 = svm_train_binary(x2.view(), &y2, &p).unwrap();
        for (a, b) in m.w.iter().zip(&m2.w) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!((m.b - m2.b).abs() < 1e-6);
    }

    #[test]
    fn objective_close_to_reference_solve() {
        let (x, l) = blobs(&[vec![0.0; 5], vec![1.0; 5]], 150, 1.0, 5);
        let y: Vec<f64> = l.iter().map(|&c| if c == 0 { 1.0 } else { -1.0 }).collect();
        let p = SvmParams::default();
        let m = svm_train_binary(x.view(), &y, &p).unwrap();
        let reference = SvmParams { tol: 1e-12, max_iter: 200_000, ..p };
        let r = svm_train_binary(x.view(), &y, &reference).unwrap();
        let (fo, fr) = (primal_objective(x.view(), &y, &m, 1.0), primal_objective(x.view(), &y, &r, 1.0));
        assert!((fo - fr) / fr < 1e-3, "{fo} vs {fr}");
    }

    #[test]
    fn separable_with_large_c_has_no_training_error() {
        let (x, l) = blobs(&[vec![0.0, 0.0], vec![4.0, 4.0], vec![0.0, 8.0]], 50, 0.4, 6);
        let p = SvmParams { c: 100.0, ..Default::default() };
        let m = svm_train_multiclass(x.view(), &l, &p, "t").unwrap();
        assert_eq!(predict_rows(&m, x.view()).unwrap(), l);
    }

    #[test]
    fn three_blobs_and_probabilities() {
        let centers = vec![vec![0.0, 0.0, 0.0], vec![5.0, 0.0, 0.0], vec![0.0, 5.0, 0.0]];
        let (x, l) = blobs(&centers, 100, 0.7, 7);
        let (xt, lt) = blobs(&centers, 100, 0.7, 8);
        let m = svm_train_multiclass(x.view(), &l, &SvmParams::default(), "t").unwrap();
        let pred = predict_rows(&m, xt.view()).unwrap();
        let acc = pred.iter().zip(&lt).filter(|(a, b)| a == b).count() as f64 / lt.len() as f64;
        assert!(acc >= 0.99, "accuracy {acc}");
        for r in xt.rows() {
            let v = r.to_vec();
            let p = m.predict_proba(&v).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|&q| q > 0.0 && q < 1.0));
            assert_eq!(m.classes[argmax(&p)], m.predict(&v).unwrap());
        }
        assert!(m.predict_proba(&[-1.0, -1.0, 0.0]).unwrap()[0] > 0.9);
        assert!(m.predict(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn two_classes_use_the_complement() {
        let (x, l) = blobs(&[vec![0.0, 0.0], vec![3.0, 3.0]], 30, 0.5, 9);
        let m = svm_train_multiclass(x.view(), &l, &SvmParams::default(), "t").unwrap();
        let (a, b) = (&m.per_class[0], &m.per_class[1]);
        assert!(a.w.iter().zip(&b.w).all(|(u, v)| *u == -*v));
        assert_eq!(a.b, -b.b);
        let p = m.predict_proba(&[1.0, 1.2]).unwrap();
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn affine_decision_function() {
        let (x, l) = blobs(&[vec![0.0, 0.0], vec![3.0, 3.0], vec![3.0, 0.0]], 20, 0.5, 10);
        let m = svm_train_multiclass(x.view(), &l, &SvmParams::default(), "t").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x1 = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let x2 = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let a: f64 = rng.gen();
            let mix = [a * x1[0] + (1.0 - a) * x2[0], a * x1[1] + (1.0 - a) * x2[1]];
            let (s1, s2, sm) = (
                m.decision_values(&x1).unwrap(),
                m.decision_values(&x2).unwrap(),
                m.decision_values(&mix).unwrap(),
            );
            for k in 0..3 {
                assert!((sm[k] - (a * s1[k] + (1.0 - a) * s2[k])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn row_order_does_not_matter() {
        let (x, l) = blobs(&[vec![0.0, 0.0, 1.0], vec![1.5, 1.0, 0.0], vec![0.0, 1.5, 1.0]], 60, 1.0, 11);
        let m = svm_train_multiclass(x.view(), &l, &SvmParams::default(), "t").unwrap();
        let mut perm: Vec<usize> = (0..l.len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
        let xp = x.select(ndarray::Axis(0), &perm);
        let lp: Vec<usize> = perm.iter().map(|&i| l[i]).collect();
        let mp = svm_train_multiclass(xp.view(), &lp, &SvmParams::default(), "t").unwrap();
        assert_eq!(m, mp);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let (x, l) = blobs(&[vec![0.0, 0.0], vec![3.0, 3.0], vec![3.0, 0.0]], 10, 0.5, 12);
        let m = svm_train_multiclass(x.view(), &l, &SvmParams::default(), "bands5hz-v1").unwrap();
        let back = LinearSvmModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let one = vec![0usize; 10];
        assert!(svm_train_multiclass(x.slice(ndarray::s![..10, ..]), &one, &SvmParams::default(), "t").is_err());
        let two = [0usize, 0, 1, 1, 1];
        assert!(svm_train_multiclass(x.slice(ndarray::s![..5, ..]), &two, &SvmParams::default(), "t").is_err());
        assert!(svm_train_binary(x.view(), &vec![1.0; 30], &SvmParams::default()).is_err());
        let mut bad = x.clone();
        bad[[0, 0]] = f64::INFINITY;
        assert!(svm_train_multiclass(bad.view(), &l, &SvmParams::default(), "t").is_err());
    }
}
