//! Retrains the tip-cut regressor and locator on subsets of sensor groups.
//! Reduced corpora give the optimizer few updates and some masks can plateau;
//! pass `1.0` for the stable comparison (several minutes).
//!
//! `cargo run --release --example sensor_ablation -- 0.3`

use propdamage::augment::augment_corpus;
use propdamage::cascade::{prepare_dataset, CascadeConfig, SplitLevel};
use propdamage::evalkit::{ablation_study, ablation_table, FeatureMask};
use propdamage::geometry::VehicleGeometry;
use propdamage::spectral::FeatureSchema;
use propdamage::synthgen::{build_corpus, default_damage_list, CorpusDurations, SynthScenario};

fn main() -> propdamage::Result<()> {
    let scale: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.3);
    let logs = build_corpus(&SynthScenario::default(), &default_damage_list(), CorpusDurations::Scaled(scale))?;
    let logs = augment_corpus(&logs, &VehicleGeometry::default())?;
    let ds = prepare_dataset(&logs, FeatureSchema::default(), 0, SplitLevel::Row)?;
    let rows = ablation_study(&ds, &FeatureMask::default_set(), &CascadeConfig::default())?;
    print!("{}", ablation_table(&rows).to_text());
    Ok(())
}
