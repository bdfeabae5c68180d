//! Rotor layout, rotation angles and force mixing for the default quad-X frame.
//!
//! `cargo run --example geometry`

use propdamage::geometry::{allocation_matrix, mix_forces, VehicleGeometry};

fn main() -> propdamage::Result<()> {
    let geom = VehicleGeometry::default();
    geom.validate()?;
    for i in 0..geom.n_rotors {
        let (x, y) = geom.rotor_position(i);
        println!("motor {} at ({x:+.3}, {y:+.3}) m", i + 1);
    }
    for k in 0..geom.n_rotors {
        println!("rotation step {k}: {:+.1} deg", geom.rotation_angle(k).to_degrees());
    }

    let a = allocation_matrix(&geom)?;
    println!("allocation matrix ({} columns):", a.n_cols());
    for row in &a.rows {
        println!("  {row:+.3?}");
    }
    // 5% thrust loss on motor 1 at hover
    let (moments, thrust) = mix_forces(&geom, &[0.95, 1.0, 1.0, 1.0])?;
    println!("residual moments {moments:+.4?}, total thrust {thrust:.3}");
    Ok(())
}
