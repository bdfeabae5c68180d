//! One-vs-rest linear SVM with calibrated probabilities on separable blobs.
//!
//! `cargo run --example linear_svm`

use ndarray::Array2;
use propdamage::svm::{primal_objective, svm_train_binary, svm_train_multiclass, SvmParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> propdamage::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.6).unwrap();
    let centers = [(0.0, 2.0), (2.0, -1.0), (-2.0, -1.0)];
    let n = 90;
    let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let x = Array2::from_shape_fn((n, 2), |(i, j)| {
        let c = centers[labels[i]];
        (if j == 0 { c.0 } else { c.1 }) + noise.sample(&mut rng)
    });

    let params = SvmParams::default();
    let y: Vec<f64> = labels.iter().map(|&l| if l == 0 { 1.0 } else { -1.0 }).collect();
    let bin = svm_train_binary(x.view(), &y, &params)?;
    println!("class 0 vs rest: w = {:.3?}, b = {:.3}", bin.w, bin.b);
    println!("primal objective {:.4}", primal_objective(x.view(), &y, &bin, params.c));

    let model = svm_train_multiclass(x.view(), &labels, &params, "demo")?;
    let correct = (0..n).filter(|&i| model.predict(x.row(i).as_slice().unwrap()).ok() == Some(labels[i])).count();
    println!("training accuracy {:.3}", correct as f64 / n as f64);
    for p in [[0.0, 2.0], [1.0, 0.5], [-3.0, -1.0]] {
        println!("{p:?} -> probs {:.3?}", model.predict_proba(&p)?);
    }
    Ok(())
}
