//! Permutation importance of the type classifier and the tip-cut regressor.
//!
//! `cargo run --release --example feature_importance -- 0.05`

use propdamage::augment::augment_corpus;
use propdamage::cascade::{prepare_dataset, train_cascade, CascadeConfig, SplitLevel};
use propdamage::evalkit::{component_importance, Component};
use propdamage::geometry::VehicleGeometry;
use propdamage::spectral::FeatureSchema;
use propdamage::synthgen::{build_corpus, default_damage_list, CorpusDurations, SynthScenario};

fn main() -> propdamage::Result<()> {
    let scale: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let logs = build_corpus(&SynthScenario::default(), &default_damage_list(), CorpusDurations::Scaled(scale))?;
    let logs = augment_corpus(&logs, &VehicleGeometry::default())?;
    let ds = prepare_dataset(&logs, FeatureSchema::default(), 0, SplitLevel::Row)?;
    let model = train_cascade(&ds, &CascadeConfig::default())?;

    for comp in [Component::TypeSvm, Component::TipcutNn] {
        let rep = component_importance(&model, &ds, comp, 3, 1, 2000)?;
        println!("== {} ({} baseline {:.4}) ==", comp.name(), rep.metric, rep.baseline);
        print!("{}", rep.table(10).to_text());
    }
    Ok(())
}
