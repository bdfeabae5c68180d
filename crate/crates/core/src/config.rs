//! Run configuration loaded from TOML. Every field has a default, so an empty
//! file (or no file) is a valid configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cascade::{CascadeConfig, SplitLevel};
use crate::error::{Error, Result};
use crate::evalkit::{FeatureMask, LooConfig};
use crate::flightlog::WINDOW_LEN;
use crate::geometry::VehicleGeometry;
use crate::io::sha256_hex;
use crate::spectral::{SensorGroup, DEFAULT_BAND_WIDTH_HZ, DEFAULT_STRIDE, SUPPORTED_BAND_WIDTHS};
use crate::synthgen::{CorpusDurations, SynthScenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub corpus_dir: PathBuf,
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            corpus_dir: PathBuf::from("corpus"),
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureParams {
    pub band_width_hz: usize,
    /// Fixed at 222 samples; present so configs state it explicitly.
    pub window: usize,
    pub stride: usize,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            band_width_hz: DEFAULT_BAND_WIDTH_HZ,
            window: WINDOW_LEN,
            stride: DEFAULT_STRIDE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    /// Template for every flight; its label, geometry and seed are overwritten.
    pub scenario: SynthScenario,
    pub durations: CorpusDurations,
    /// Also write the rotated copies of every flight.
    pub augment: bool,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            scenario: SynthScenario::default(),
            durations: CorpusDurations::Reference,
            augment: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingParams {
    pub split_level: SplitLevel,
    /// Its `seed` is replaced by the top-level seed.
    pub cascade: CascadeConfig,
}

impl Default for TrainingParams {
    fn default() -> Self {
        Self {
            split_level: SplitLevel::Row,
            cascade: CascadeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyParams {
    pub band_widths: Vec<usize>,
    pub importance_repeats: usize,
    /// Test rows scored per importance run.
    pub importance_max_rows: usize,
    pub importance_top: usize,
    pub ablation_masks: Vec<Vec<SensorGroup>>,
    pub loo_held_out: [f64; 2],
    pub loo_anova_features: usize,
    pub loo_rows_per_class: usize,
    pub loo_tol: f64,
    pub loo_max_iter: usize,
}

impl Default for StudyParams {
    fn default() -> Self {
        let loo = LooConfig::default();
        Self {
            band_widths: SUPPORTED_BAND_WIDTHS.to_vec(),
            importance_repeats: 5,
            importance_max_rows: 4000,
            importance_top: 15,
            ablation_masks: FeatureMask::default_set().into_iter().map(|m| m.groups).collect(),
            loo_held_out: [20.0, 20.0],
            loo_anova_features: loo.anova_features,
            loo_rows_per_class: loo.rows_per_class,
            loo_tol: loo.svm.tol,
            loo_max_iter: loo.svm.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Master seed for synthesis, splitting and training.
    pub seed: u64,
    pub paths: Paths,
    pub geometry: VehicleGeometry,
    pub features: FeatureParams,
    pub synth: SynthParams,
    pub training: TrainingParams,
    pub studies: StudyParams,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate().map_err(|e| Error::Config(e.to_string()))?;
        let f = &self.features;
        if f.window != WINDOW_LEN {
            return Err(Error::Config(format!("window must be {WINDOW_LEN} samples, got {}", f.window)));
        }
        if f.stride == 0 {
            return Err(Error::Config("stride must be positive".into()));
        }
        let widths = std::iter::once(&f.band_width_hz).chain(&self.studies.band_widths);
        if let Some(bw) = widths.into_iter().find(|bw| !SUPPORTED_BAND_WIDTHS.contains(bw)) {
            return Err(Error::Config(format!("unsupported band width {bw} Hz")));
        }
        let c = &self.training.cascade;
        if c.svm.c <= 0.0 || c.svm.tol <= 0.0 || c.mlp.lr <= 0.0 || c.mlp.epochs == 0 {
            return Err(Error::Config("C, tol, lr and epochs must be positive".into()));
        }
        if !(0.0..1.0).contains(&c.mlp.rho) {
            return Err(Error::Config("rho must lie in [0, 1)".into()));
        }
        if c.n_motors != self.geometry.n_rotors {
            return Err(Error::Config(format!(
                "training.cascade.n_motors = {} but the geometry has {} rotors",
                c.n_motors, self.geometry.n_rotors
            )));
        }
        if self.studies.importance_repeats == 0 {
            return Err(Error::Config("importance_repeats must be positive".into()));
        }
        if self.studies.ablation_masks.iter().any(Vec::is_empty) {
            return Err(Error::Config("empty ablation mask".into()));
        }
        Ok(())
    }

    /// Short content hash of the resolved configuration.
    pub fn hash(&self) -> Result<String> {
        Ok(sha256_hex(self.to_toml()?.as_bytes())[..16].to_string())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Cascade settings with the master seed applied.
    pub fn cascade(&self) -> CascadeConfig {
        CascadeConfig {
            seed: self.seed,
            n_motors: self.geometry.n_rotors,
            ..self.training.cascade.clone()
        }
    }

    /// Synthesis template with the master seed and vehicle geometry applied.
    pub fn synth_template(&self) -> SynthScenario {
        SynthScenario {
            seed: self.seed,
            geom: self.geometry.clone(),
            ..self.synth.scenario.clone()
        }
    }

    pub fn loo(&self) -> LooConfig {
        let d = LooConfig::default();
        LooConfig {
            seed: self.seed,
            anova_features: self.studies.loo_anova_features,
            rows_per_class: self.studies.loo_rows_per_class,
            svm: crate::svm::SvmParams {
                tol: self.studies.loo_tol,
                max_iter: self.studies.loo_max_iter,
                ..d.svm
            },
            cascade: self.cascade(),
        }
    }

    pub fn ablation_masks(&self) -> Vec<FeatureMask> {
        self.studies.ablation_masks.iter().map(|g| FeatureMask::new(g)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(RunConfig::from_toml("").unwrap(), cfg);
        assert_eq!(cfg.hash().unwrap().len(), 16);
    }

    #[test]
    fn overrides_and_errors() {
        let cfg = RunConfig::from_toml("seed = 9\n[features]\nband_width_hz = 7\n").unwrap();
        assert_eq!((cfg.seed, cfg.features.band_width_hz), (9, 7));
        assert_eq!(cfg.cascade().seed, 9);
        assert_ne!(cfg.hash().unwrap(), RunConfig::default().hash().unwrap());
        for bad in ["[features]\nwindow = 100", "[features]\nband_width_hz = 9", "seed = \"x\"", "[training.cascade.mlp]\nlr = -1.0"] {
            assert!(matches!(RunConfig::from_toml(bad), Err(Error::Config(_))), "{bad}");
        }
    }
}
