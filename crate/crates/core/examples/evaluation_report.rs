//! Trains on a reduced corpus and prints the evaluation tables.
//!
//! `cargo run --release --example evaluation_report -- 0.05`

use propdamage::augment::augment_corpus;
use propdamage::cascade::{prepare_dataset, train_cascade, CascadeConfig, SplitLevel};
use propdamage::evalkit::{evaluate, render_report};
use propdamage::geometry::VehicleGeometry;
use propdamage::spectral::FeatureSchema;
use propdamage::synthgen::{build_corpus, default_damage_list, CorpusDurations, SynthScenario};

fn main() -> propdamage::Result<()> {
    let scale: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let logs = build_corpus(&SynthScenario::default(), &default_damage_list(), CorpusDurations::Scaled(scale))?;
    let logs = augment_corpus(&logs, &VehicleGeometry::default())?;
    let ds = prepare_dataset(&logs, FeatureSchema::default(), 0, SplitLevel::Row)?;
    let model = train_cascade(&ds, &CascadeConfig::default())?;

    let report = evaluate(&model, &ds)?;
    let tables = report.tables();
    let sections: Vec<(&str, &_)> = tables.iter().map(|(name, t)| (name.as_str(), t)).collect();
    print!("{}", render_report(&sections));
    Ok(())
}
