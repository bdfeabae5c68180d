//! Power spectrum of one window, band energies and the feature-vector layout.
//!
//! `cargo run --example spectral_features`

use propdamage::flightlog::{DamageLabel, WINDOW_LEN};
use propdamage::spectral::{
    band_count, extract_windows, power_spectrum, FeatureExtractor, FeatureSchema, SUPPORTED_BAND_WIDTHS,
};
use propdamage::synthgen::{simulate_flight, SynthScenario};

fn main() -> propdamage::Result<()> {
    let log = simulate_flight(
        &SynthScenario::default()
            .with_label(DamageLabel::longitudinal(4.0, 3))
            .with_duration(5.0),
    )?;
    let windows = extract_windows(&log, WINDOW_LEN, 32)?;
    println!("{} windows of {WINDOW_LEN} samples", windows.len());

    let x: Vec<f64> = log.records[..WINDOW_LEN].iter().map(|r| r.acc[0]).collect();
    let p = power_spectrum(&x)?;
    let mean_sq = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    println!("sum of power {:.6} vs mean square {:.6}", p.iter().sum::<f64>(), mean_sq);
    let peak = (1..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
    println!("strongest non-DC bin: {peak} Hz");

    for bw in SUPPORTED_BAND_WIDTHS {
        let schema = FeatureSchema::new(bw)?;
        println!("bw {bw:>2} Hz: {:>3} bands, {} features", band_count(bw), schema.len());
    }

    let mut fx = FeatureExtractor::new(FeatureSchema::default());
    let fv = fx.extract(&windows[0])?;
    let names = fx.schema().feature_names();
    for (n, v) in names.iter().zip(&fv.values).take(8) {
        println!("  {n:<14} {v:.4e}");
    }
    println!("  ... {} more", names.len() - 8);
    Ok(())
}
