//! Rotational augmentation: one flight becomes four, with motor labels remapped.
//!
//! `cargo run --example augmentation`

use propdamage::augment::{rotate_log, rotate_motor};
use propdamage::flightlog::DamageLabel;
use propdamage::geometry::VehicleGeometry;
use propdamage::synthgen::{simulate_flight, SynthScenario};

fn main() -> propdamage::Result<()> {
    let geom = VehicleGeometry::default();
    let log = simulate_flight(
        &SynthScenario::default()
            .with_label(DamageLabel::tip_cut(20.0, 10.0, 1))
            .with_duration(2.0),
    )?;
    for k in 0..geom.n_rotors {
        let r = rotate_log(&log, k, &geom)?;
        let a = &r.records[0];
        println!(
            "{:<22} motor {:?}  acc ({:+.3}, {:+.3})  gyro ({:+.3}, {:+.3})",
            r.flight_id, r.label.motor, a.acc[0], a.acc[1], a.gyro[0], a.gyro[1]
        );
    }
    for m in 1..=4 {
        let path: Vec<usize> = (0..4).map(|k| rotate_motor(m, k, 4)).collect();
        println!("motor {m} maps to {path:?}");
    }
    Ok(())
}
