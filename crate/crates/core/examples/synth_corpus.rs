//! Builds a reduced synthetic corpus and prints the flights and their spectral lines.
//!
//! `cargo run --release --example synth_corpus -- 0.1`

use propdamage::synthgen::{
    alias_frequency, build_corpus, corpus_scenarios, default_damage_list, CorpusDurations, SynthScenario,
};

fn main() -> propdamage::Result<()> {
    let scale: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let template = SynthScenario::default();
    let damages = default_damage_list();
    let scenarios = corpus_scenarios(&template, &damages, CorpusDurations::Scaled(scale))?;
    let logs = build_corpus(&template, &damages, CorpusDurations::Scaled(scale))?;

    println!("{:<16} {:>8} {:>8}  rotor lines (aliased, Hz)", "flight", "samples", "seconds");
    for (sc, log) in scenarios.iter().zip(&logs) {
        let lines: Vec<String> = sc
            .rotor_frequencies()
            .iter()
            .map(|&f| format!("{:.2}", alias_frequency(f, sc.sample_rate_hz)))
            .collect();
        println!("{:<16} {:>8} {:>8.1}  {}", log.flight_id, log.len(), log.duration_s(), lines.join(" "));
    }
    Ok(())
}
