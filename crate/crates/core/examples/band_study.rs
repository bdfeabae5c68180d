//! Type-classification accuracy as a function of the band width.
//!
//! `cargo run --release --example band_study -- 0.05`

use propdamage::augment::augment_corpus;
use propdamage::cascade::CascadeConfig;
use propdamage::evalkit::{band_study_table, band_width_study};
use propdamage::geometry::VehicleGeometry;
use propdamage::synthgen::{build_corpus, default_damage_list, CorpusDurations, SynthScenario};

fn main() -> propdamage::Result<()> {
    let scale: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let logs = build_corpus(&SynthScenario::default(), &default_damage_list(), CorpusDurations::Scaled(scale))?;
    let logs = augment_corpus(&logs, &VehicleGeometry::default())?;
    let rows = band_width_study(&logs, &[2, 5, 7, 10], &CascadeConfig::default())?;
    print!("{}", band_study_table(&rows).to_text());
    Ok(())
}
