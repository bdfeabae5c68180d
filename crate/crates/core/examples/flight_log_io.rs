//! Writes a short simulated flight to disk, reads it back and validates it.
//!
//! `cargo run --example flight_log_io`

use propdamage::flightlog::{csv_path, read_flight, validate, write_flight, DamageLabel};
use propdamage::synthgen::{simulate_flight, SynthScenario};

fn main() -> propdamage::Result<()> {
    let scenario = SynthScenario::default()
        .with_label(DamageLabel::tip_cut(10.0, 5.0, 2))
        .with_duration(10.0);
    let log = simulate_flight(&scenario)?;

    let dir = std::env::temp_dir().join("propdamage-flight-log-io");
    std::fs::create_dir_all(&dir)?;
    write_flight(&dir, &log)?;
    let path = csv_path(&dir, &log.flight_id);
    let back = read_flight(&path)?;
    println!("{} -> {} samples, {:.1} s", path.display(), back.len(), back.duration_s());
    println!("label {:?}", back.label);

    let report = validate(&back);
    println!("validation ok: {}", report.all_ok());
    println!("first record {:?}", back.records[0]);
    Ok(())
}
