//! End to end: reduced corpus, augmentation, features, cascade training, a saved
//! bundle and per-window diagnoses of a fresh flight.
//!
//! `cargo run --release --example cascade_pipeline -- 0.05`

use propdamage::augment::augment_corpus;
use propdamage::cascade::{prepare_dataset, train_cascade, CascadeConfig, CascadeModel, SplitLevel};
use propdamage::flightlog::DamageLabel;
use propdamage::geometry::VehicleGeometry;
use propdamage::io::Provenance;
use propdamage::spectral::{FeatureSchema, DEFAULT_STRIDE};
use propdamage::synthgen::{build_corpus, default_damage_list, simulate_flight, CorpusDurations, SynthScenario};

fn main() -> propdamage::Result<()> {
    let scale: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let logs = build_corpus(&SynthScenario::default(), &default_damage_list(), CorpusDurations::Scaled(scale))?;
    let logs = augment_corpus(&logs, &VehicleGeometry::default())?;
    let ds = prepare_dataset(&logs, FeatureSchema::default(), 0, SplitLevel::Row)?;
    println!("{} windows from {} flights", ds.len(), logs.len());

    let model = train_cascade(&ds, &CascadeConfig::default())?;
    let r = &model.record;
    println!("type rows {:?} balanced to {}", r.type_train_counts, r.type_balanced_count);
    println!(
        "final losses: tip-cut {:.3}, longitudinal {:.3}",
        model.tipcut_nn.loss_history.last().unwrap(),
        model.long_nn.loss_history.last().unwrap()
    );

    let dir = std::env::temp_dir().join("propdamage-cascade-pipeline");
    model.save(&dir, &Provenance::new("example", r.seeds.all()))?;
    let model = CascadeModel::load(&dir.join("cascade.json"))?;

    let flight = simulate_flight(
        &SynthScenario::default()
            .with_label(DamageLabel::tip_cut(25.0, 15.0, 3))
            .with_seed(999)
            .with_duration(10.0),
    )?;
    let (diagnoses, rate) = model.infer_log(&flight, DEFAULT_STRIDE)?;
    println!("{} windows diagnosed at {:.0} windows/s", diagnoses.len(), rate);
    for (start, d) in diagnoses.iter().step_by(40) {
        let m = d.magnitude.as_ref();
        println!(
            "  @{start:>5}: {:<12} motor {:?} sum {:?} diff {:?}",
            d.type_class.name(),
            d.motor,
            m.map(|m| (m.sum_mm * 10.0).round() / 10.0),
            m.and_then(|m| m.diff_mm).map(|v| (v * 10.0).round() / 10.0)
        );
    }
    Ok(())
}
