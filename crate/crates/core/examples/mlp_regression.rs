//! Small MLP trained with Adadelta on a two-output regression problem.
//!
//! `cargo run --release --example mlp_regression`

use ndarray::Array2;
use propdamage::mlp::{mlp_grad, mlp_init, mlp_loss, mlp_train, TrainConfig};

fn main() -> propdamage::Result<()> {
    let n = 256;
    let x = Array2::from_shape_fn((n, 3), |(i, j)| ((i * (j + 3)) % 17) as f64 / 8.0 - 1.0);
    let y = Array2::from_shape_fn((n, 2), |(i, k)| {
        let r = x.row(i);
        if k == 0 { 3.0 * r[0] + r[1] * r[2] + 10.0 } else { (2.0 * r[1]).sin() + 4.0 }
    });

    let mut model = mlp_init(&[3, 16, 16, 2], 1, "demo")?;
    model.center_output(y.view())?;
    println!("{} parameters, initial loss {:.4}", model.n_params(), mlp_loss(&model, x.view(), y.view())?);
    println!("initial gradient norm {:.4}", mlp_grad(&model, x.view(), y.view())?.norm());

    let cfg = TrainConfig { epochs: 150, ..TrainConfig::default() };
    mlp_train(&mut model, x.view(), y.view(), &cfg)?;
    for (e, l) in model.loss_history.iter().enumerate().step_by(25) {
        println!("epoch {e:>3}: loss {l:.5}");
    }
    println!("final loss {:.5}", model.loss_history.last().unwrap());
    println!("f([0.5, -0.5, 0.25]) = {:.3?}", model.forward(&[0.5, -0.5, 0.25])?);
    Ok(())
}
