//! K-means on three blobs, then class balancing by replacing rows with centroids.
//!
//! `cargo run --example kmeans_balance`

use ndarray::Array2;
use propdamage::cluster::{balance_classes, kmeans_fit};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn blob(rng: &mut ChaCha8Rng, n: usize, cx: f64, cy: f64) -> Array2<f64> {
    let noise = Normal::new(0.0, 0.3).unwrap();
    Array2::from_shape_fn((n, 2), |(_, j)| (if j == 0 { cx } else { cy }) + noise.sample(rng))
}

fn main() -> propdamage::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let classes = vec![blob(&mut rng, 400, 0.0, 0.0), blob(&mut rng, 60, 3.0, 0.0), blob(&mut rng, 150, 0.0, 3.0)];

    let all = ndarray::concatenate(ndarray::Axis(0), &[classes[0].view(), classes[1].view(), classes[2].view()])
        .expect("same width");
    let fit = kmeans_fit(&all, 3, 1, 100, 1e-6)?;
    println!("k=3 inertia {:.2} after {} iterations", fit.inertia, fit.iterations_run);
    println!("inertia history {:.2?}", fit.inertia_history);
    println!("centroids\n{:.2}", fit.centroids);

    let balanced = balance_classes(&classes, 60, 7, 100, 1e-6)?;
    for (i, (a, b)) in classes.iter().zip(&balanced).enumerate() {
        println!("class {i}: {} rows -> {}", a.nrows(), b.nrows());
    }
    Ok(())
}
