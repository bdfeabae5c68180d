//! Holds out one tip-cut class and compares a quadratic-feature classifier with
//! the sum/difference regressor on it.
//!
//! `cargo run --release --example loo_baseline -- 0.05`

use propdamage::augment::augment_corpus;
use propdamage::cascade::{prepare_dataset, SplitLevel};
use propdamage::evalkit::{loo_baseline, LooConfig};
use propdamage::geometry::VehicleGeometry;
use propdamage::spectral::FeatureSchema;
use propdamage::synthgen::{build_corpus, default_damage_list, CorpusDurations, SynthScenario};

fn main() -> propdamage::Result<()> {
    let scale: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let logs = build_corpus(&SynthScenario::default(), &default_damage_list(), CorpusDurations::Scaled(scale))?;
    let logs = augment_corpus(&logs, &VehicleGeometry::default())?;
    let ds = prepare_dataset(&logs, FeatureSchema::default(), 0, SplitLevel::Row)?;

    let rep = loo_baseline(&ds, (20.0, 20.0), &LooConfig::default())?;
    println!(
        "held out {:?}: {} windows, classifier test accuracy {:.3}",
        rep.held_out, rep.n_held_out, rep.classifier_test_accuracy
    );
    for ((d1, d2), share) in &rep.predicted_classes {
        println!("  predicted ({d1}, {d2}) for {share:.1}% of windows");
    }
    print!("{}", rep.table().to_text());
    Ok(())
}
