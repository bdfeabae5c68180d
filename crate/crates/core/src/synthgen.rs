//! Synthetic flight generator.
//!
//! Flights are built from phenomenological signatures rather than an
//! aerodynamic model:
//!
//! * maneuver content: low-pass noise (< 20 Hz) whose level follows the
//!   hover / soft / aggressive phase schedule;
//! * rotor vibration: one sinusoid per rotor at its instantaneous speed,
//!   injected into the x/y accelerometer and gyroscope axes (weaker on z) and
//!   leaking into the torque commands. Sinusoids are evaluated at the sample
//!   instants, so rotor speeds above 111 Hz alias exactly as a real 222 Hz
//!   logger would see them;
//! * damage: the damaged rotor speeds up with the total tip cut
//!   (`base·(1 + shift·(cut1 + cut2))`) or slows with longitudinal depth
//!   (`base·(1 - drop·depth)`), vibrates harder with tip imbalance or depth, and
//!   the controller holds a constant roll/pitch torque along the torque axis of
//!   the damaged rotor.
//!
//! The frame couples vibration into body x and y with different gains
//! (`xy_gain`), as a real airframe with unequal roll and pitch inertia would.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flightlog::{DamageKind, DamageLabel, FlightLog, ImuRecord, DEFAULT_SAMPLE_RATE_HZ, WINDOW_LEN};
use crate::geometry::VehicleGeometry;
use crate::spectral::DEFAULT_STRIDE;

const GRAVITY: f64 = 9.81;
const HOVER_THRUST: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SignatureCoeffs {
    /// Relative speed-up of the damaged rotor per mm of total tip cut.
    pub freq_shift_per_mm: f64,
    /// Extra vibration amplitude, m/s² per mm of tip imbalance `|cut1 - cut2|`.
    pub imbalance_amp_per_mm: f64,
    /// Roll/pitch torque bias per mm of total tip cut.
    pub torque_bias_per_mm: f64,
    /// Relative slow-down of the damaged rotor per mm of longitudinal depth.
    pub long_freq_drop_per_mm: f64,
    /// Extra vibration amplitude, m/s² per mm of longitudinal depth.
    pub long_amp_per_mm: f64,
    /// Roll/pitch torque bias per mm of total longitudinal cut (2·depth).
    pub long_torque_bias_per_mm: f64,
}

impl Default for SignatureCoeffs {
    fn default() -> Self {
        Self {
            freq_shift_per_mm: 0.005,
            imbalance_amp_per_mm: 0.06,
            torque_bias_per_mm: 0.00075,
            long_freq_drop_per_mm: 0.005,
            long_amp_per_mm: 0.025,
            long_torque_bias_per_mm: 0.0002,
        }
    }
}

/// Per-channel white-noise standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseStd {
    pub acc: f64,
    pub gyro: f64,
    pub torque: f64,
    pub thrust: f64,
}

impl Default for NoiseStd {
    fn default() -> Self {
        Self {
            acc: 0.15,
            gyro: 0.015,
            torque: 0.002,
            thrust: 0.002,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VibrationModel {
    /// Per-rotor acceleration amplitude of a healthy rotor, m/s².
    pub acc_amp: f64,
    /// Per-rotor angular-rate amplitude of a healthy rotor, rad/s.
    pub gyro_amp: f64,
    /// Vibration leaking into the roll/pitch torque commands.
    pub torque_amp: f64,
    pub thrust_amp: f64,
    /// Fraction of the x/y amplitude seen on z.
    pub z_ratio: f64,
    /// Frame coupling of vibration into body x and y.
    pub xy_gain: [f64; 2],
    /// RMS rotor-speed wander in Hz for hover, soft and aggressive flight.
    pub freq_wander_hz: [f64; 3],
}

impl Default for VibrationModel {
    fn default() -> Self {
        Self {
            acc_amp: 1.0,
            gyro_amp: 0.08,
            torque_amp: 0.004,
            thrust_amp: 0.002,
            z_ratio: 0.3,
            xy_gain: [1.0, 0.7],
            freq_wander_hz: [0.3, 1.2, 2.5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ManeuverModel {
    /// Maneuver level for hover, soft and aggressive phases.
    pub level: [f64; 3],
    pub acc_std: f64,
    pub gyro_std: f64,
    pub torque_std: f64,
    pub thrust_std: f64,
    /// Corner frequency of the maneuver low-pass (four cascaded poles).
    pub cutoff_hz: f64,
}

impl Default for ManeuverModel {
    fn default() -> Self {
        Self {
            level: [0.15, 0.5, 1.0],
            acc_std: 1.5,
            gyro_std: 0.6,
            torque_std: 0.03,
            thrust_std: 0.06,
            cutoff_hz: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthScenario {
    pub label: DamageLabel,
    pub geom: VehicleGeometry,
    pub duration_s: f64,
    /// Hover, soft and aggressive phase lengths; time past their sum stays aggressive.
    pub phase_durations_s: [f64; 3],
    pub base_rotor_hz: f64,
    pub sample_rate_hz: f64,
    pub noise_std: NoiseStd,
    pub coeffs: SignatureCoeffs,
    pub vibration: VibrationModel,
    pub maneuver: ManeuverModel,
    pub seed: u64,
}

impl Default for SynthScenario {
    fn default() -> Self {
        Self {
            label: DamageLabel::healthy(),
            geom: VehicleGeometry::default(),
            duration_s: 120.0,
            phase_durations_s: [40.0, 40.0, 40.0],
            base_rotor_hz: 83.0,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            noise_std: NoiseStd::default(),
            coeffs: SignatureCoeffs::default(),
            vibration: VibrationModel::default(),
            maneuver: ManeuverModel::default(),
            seed: 0,
        }
    }
}

impl SynthScenario {
    pub fn with_label(mut self, label: DamageLabel) -> Self {
        self.label = label;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Sets the duration and splits it evenly over the three phases.
    pub fn with_duration(mut self, duration_s: f64) -> Self {
        self.duration_s = duration_s;
        self.phase_durations_s = [duration_s / 3.0; 3];
        self
    }

    pub fn n_samples(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        self.geom.validate()?;
        self.label.validate()?;
        if let Some(m) = self.label.motor {
            if m > self.geom.n_rotors {
                return bad(format!("motor {m} beyond {} rotors", self.geom.n_rotors));
            }
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return bad("sample rate must be positive".into());
        }
        let phases: f64 = self.phase_durations_s.iter().sum();
        if self.phase_durations_s.iter().any(|p| !(*p >= 0.0)) {
            return bad("phase durations must be non-negative".into());
        }
        if !(self.duration_s >= phases - 1e-9) {
            return bad(format!(
                "duration {} s shorter than the phase schedule {phases} s",
                self.duration_s
            ));
        }
        if self.n_samples() < WINDOW_LEN {
            return bad(format!("duration {} s yields less than one window", self.duration_s));
        }
        let max_rotor = self.sample_rate_hz / 2.0 * 1.35;
        if !(self.base_rotor_hz > 0.0 && self.base_rotor_hz <= max_rotor) {
            return bad(format!(
                "base rotor frequency {} outside (0, {max_rotor}]",
                self.base_rotor_hz
            ));
        }
        let c = &self.coeffs;
        let nonneg = [
            c.freq_shift_per_mm,
            c.imbalance_amp_per_mm,
            c.torque_bias_per_mm,
            c.long_freq_drop_per_mm,
            c.long_amp_per_mm,
            c.long_torque_bias_per_mm,
            self.noise_std.acc,
            self.noise_std.gyro,
            self.noise_std.torque,
            self.noise_std.thrust,
            self.vibration.acc_amp,
            self.vibration.gyro_amp,
            self.vibration.torque_amp,
            self.vibration.thrust_amp,
            self.vibration.z_ratio,
            self.maneuver.acc_std,
            self.maneuver.gyro_std,
            self.maneuver.torque_std,
            self.maneuver.thrust_std,
        ];
        if nonneg.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return bad("coefficients, amplitudes and noise levels must be finite and >= 0".into());
        }
        if !(self.maneuver.cutoff_hz > 0.0 && self.maneuver.cutoff_hz < 20.0) {
            return bad("maneuver cutoff must lie in (0, 20) Hz".into());
        }
        if let DamageKind::Longitudinal { depth_mm } = self.label.kind {
            if c.long_freq_drop_per_mm * depth_mm >= 1.0 {
                return bad("longitudinal drop stops the rotor".into());
            }
        }
        Ok(())
    }

    /// Nominal speed of each rotor in Hz.
    pub fn rotor_frequencies(&self) -> Vec<f64> {
        let mut f = vec![self.base_rotor_hz; self.geom.n_rotors];
        if let Some(m) = self.label.motor {
            f[m - 1] = damaged_rotor_hz(self.base_rotor_hz, &self.label, &self.coeffs);
        }
        f
    }

    /// Extra vibration amplitude of the damaged rotor, m/s².
    fn extra_amplitude(&self) -> f64 {
        match self.label.kind {
            DamageKind::Healthy => 0.0,
            DamageKind::TipCut { .. } => self.coeffs.imbalance_amp_per_mm * self.label.diff_mm(),
            DamageKind::Longitudinal { depth_mm } => self.coeffs.long_amp_per_mm * depth_mm,
        }
    }

    /// Constant commanded `(q_x, q_y)` holding the vehicle level.
    pub fn torque_bias(&self) -> (f64, f64) {
        let Some(m) = self.label.motor else {
            return (0.0, 0.0);
        };
        let mag = match self.label.kind {
            DamageKind::Healthy => 0.0,
            DamageKind::TipCut { .. } => self.coeffs.torque_bias_per_mm * self.label.sum_mm(),
            DamageKind::Longitudinal { .. } => {
                self.coeffs.long_torque_bias_per_mm * self.label.sum_mm()
            }
        };
        let (dx, dy) = self.geom.roll_pitch_direction(m - 1);
        (mag * dx, mag * dy)
    }

    fn phase_at(&self, t: f64) -> usize {
        let [h, s, _] = self.phase_durations_s;
        if t < h {
            0
        } else if t < h + s {
            1
        } else {
            2
        }
    }
}

/// Speed of the damaged rotor, in Hz, before any aliasing.
pub fn damaged_rotor_hz(base_hz: f64, label: &DamageLabel, coeffs: &SignatureCoeffs) -> f64 {
    match label.kind {
        DamageKind::Healthy => base_hz,
        DamageKind::TipCut { .. } => base_hz * (1.0 + coeffs.freq_shift_per_mm * label.sum_mm()),
        DamageKind::Longitudinal { depth_mm } => {
            base_hz * (1.0 - coeffs.long_freq_drop_per_mm * depth_mm)
        }
    }
}

/// Frequency at which a tone of `f_hz` appears after sampling at `fs_hz`.
pub fn alias_frequency(f_hz: f64, fs_hz: f64) -> f64 {
    let r = f_hz.rem_euclid(fs_hz);
    if r > fs_hz / 2.0 {
        fs_hz - r
    } else {
        r
    }
}

/// Unit-RMS noise low-passed by four cascaded one-pole sections.
fn lowpass_noise(rng: &mut ChaCha8Rng, n: usize, cutoff_hz: f64, fs: f64) -> Vec<f64> {
    let alpha = 1.0 - (-2.0 * PI * cutoff_hz / fs).exp();
    let mut state = [0.0f64; 4];
    // settle the filter before the first logged sample
    let warmup = (4.0 * fs / cutoff_hz) as usize;
    let mut out = Vec::with_capacity(n);
    for i in 0..n + warmup {
        let mut x: f64 = StandardNormal.sample(rng);
        for s in state.iter_mut() {
            *s += alpha * (x - *s);
            x = *s;
        }
        if i >= warmup {
            out.push(x);
        }
    }
    let rms = (out.iter().map(|v| v * v).sum::<f64>() / n.max(1) as f64).sqrt();
    if rms > 0.0 {
        out.iter_mut().for_each(|v| *v /= rms);
    }
    out
}

fn white(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    std * z
}

/// Generates one labeled flight. Identical scenarios give bit-identical logs.
pub fn simulate_flight(scenario: &SynthScenario) -> Result<FlightLog> {
    scenario.validate()?;
    let sc = scenario;
    let fs = sc.sample_rate_hz;
    let n = sc.n_samples();
    let n_rot = sc.geom.n_rotors;
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);

    let man = &sc.maneuver;
    // roll, pitch, yaw, vertical
    let mv: Vec<Vec<f64>> = (0..4)
        .map(|_| lowpass_noise(&mut rng, n, man.cutoff_hz, fs))
        .collect();
    let wander: Vec<Vec<f64>> = (0..n_rot)
        .map(|_| lowpass_noise(&mut rng, n, 1.0, fs))
        .collect();
    let mut phase: Vec<f64> = (0..n_rot).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    let offsets: Vec<[f64; 3]> = (0..n_rot)
        .map(|_| {
            [
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.0..2.0 * PI),
            ]
        })
        .collect();

    let nominal = sc.rotor_frequencies();
    let vib = &sc.vibration;
    let mut amp = vec![vib.acc_amp; n_rot];
    if let Some(m) = sc.label.motor {
        amp[m - 1] += sc.extra_amplitude();
    }
    // gyro and torque vibration scale with the acceleration amplitude
    let rel: Vec<f64> = amp
        .iter()
        .map(|a| if vib.acc_amp > 0.0 { a / vib.acc_amp } else { 0.0 })
        .collect();
    let (bias_x, bias_y) = sc.torque_bias();
    let noise = &sc.noise_std;
    let [gx, gy] = vib.xy_gain;

    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / fs;
        let p = sc.phase_at(t);
        let lvl = man.level[p];
        let (roll, pitch, yaw, vert) = (mv[0][i], mv[1][i], mv[2][i], mv[3][i]);

        let mut acc = [
            man.acc_std * lvl * pitch,
            man.acc_std * lvl * roll,
            -GRAVITY + man.acc_std * lvl * vert,
        ];
        let mut gyro = [
            man.gyro_std * lvl * roll,
            man.gyro_std * lvl * pitch,
            man.gyro_std * lvl * yaw,
        ];
        let mut tq = [
            man.torque_std * lvl * roll + bias_x,
            man.torque_std * lvl * pitch + bias_y,
            man.torque_std * lvl * yaw,
        ];
        let mut thrust = HOVER_THRUST + man.thrust_std * lvl * vert;

        for r in 0..n_rot {
            let ph = phase[r];
            let [o1, o2, o3] = offsets[r];
            let a = amp[r];
            acc[0] += gx * a * ph.cos();
            acc[1] += gy * a * ph.sin();
            acc[2] += vib.z_ratio * a * (ph + o1).sin();
            let g = vib.gyro_amp * rel[r];
            gyro[0] += gx * g * (ph + o2).cos();
            gyro[1] += gy * g * (ph + o2).sin();
            gyro[2] += vib.z_ratio * g * (ph + o3).sin();
            let q = vib.torque_amp * rel[r];
            tq[0] += gx * q * (ph + o2 + 0.5).cos();
            tq[1] += gy * q * (ph + o2 + 0.5).sin();
            tq[2] += vib.z_ratio * q * (ph + o3 + 0.5).sin();
            thrust += vib.thrust_amp * rel[r] * (ph + o1).cos();

            let f = nominal[r] + vib.freq_wander_hz[p] * wander[r][i];
            phase[r] = (ph + 2.0 * PI * f / fs).rem_euclid(2.0 * PI);
        }

        for v in acc.iter_mut() {
            *v += white(&mut rng, noise.acc);
        }
        for v in gyro.iter_mut() {
            *v += white(&mut rng, noise.gyro);
        }
        for v in tq.iter_mut() {
            *v += white(&mut rng, noise.torque);
        }
        thrust += white(&mut rng, noise.thrust);

        records.push(ImuRecord {
            t,
            acc,
            gyro,
            torque_cmd: tq,
            thrust_cmd: thrust,
        });
    }
    let id = format!(
        "{}{}",
        sc.label.damage_name(),
        sc.label.motor.map(|m| format!("-m{m}")).unwrap_or_default()
    );
    FlightLog::new(records, fs, sc.label, id)
}

/// The 18 propellers of the reference campaign, all mounted on motor 1.
pub fn default_damage_list() -> Vec<DamageLabel> {
    let mut out = vec![DamageLabel::healthy()];
    for c in (5..=40).step_by(5) {
        out.push(DamageLabel::tip_cut(c as f64, c as f64, 1));
    }
    for (a, b) in [(0, 5), (0, 10), (0, 15), (10, 15), (10, 20)] {
        out.push(DamageLabel::tip_cut(a as f64, b as f64, 1));
    }
    for d in (10..=40).step_by(10) {
        out.push(DamageLabel::longitudinal(d as f64, 1));
    }
    out
}

/// 1 s window count recorded for each propeller of the reference campaign.
pub fn reference_window_count(label: &DamageLabel) -> Option<usize> {
    let (a, b) = label.cuts_mm();
    let key = (a as u32, b as u32);
    let n = match label.kind {
        DamageKind::Healthy => 1005,
        DamageKind::TipCut { .. } => match key {
            (5, 5) => 1098,
            (10, 10) => 1043,
            (15, 15) => 1131,
            (20, 20) => 1051,
            (25, 25) => 902,
            (30, 30) => 784,
            (35, 35) => 763,
            (40, 40) => 752,
            (0, 5) => 847,
            (0, 10) => 879,
            (0, 15) => 465,
            (10, 15) => 885,
            (10, 20) => 766,
            _ => return None,
        },
        DamageKind::Longitudinal { .. } => match key {
            (10, 10) => 863,
            (20, 20) => 954,
            (30, 30) => 875,
            (40, 40) => 968,
            _ => return None,
        },
    };
    Some(n)
}

/// Duration giving exactly `windows` windows at the default width and stride.
pub fn duration_for_windows(windows: usize, sample_rate_hz: f64) -> f64 {
    ((windows.max(1) - 1) * DEFAULT_STRIDE + WINDOW_LEN) as f64 / sample_rate_hz
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusDurations {
    /// Reference window counts where known, template duration otherwise.
    Reference,
    /// The same duration for every flight, in seconds.
    Fixed(f64),
    /// Reference window counts scaled by a factor (for quick experiments).
    Scaled(f64),
}

/// One flight per damage label. Seeds are `template.seed + index`.
pub fn build_corpus(
    template: &SynthScenario,
    damages: &[DamageLabel],
    durations: CorpusDurations,
) -> Result<Vec<FlightLog>> {
    corpus_scenarios(template, damages, durations)?
        .iter()
        .map(simulate_flight)
        .collect()
}

/// The scenarios [`build_corpus`] would simulate.
pub fn corpus_scenarios(
    template: &SynthScenario,
    damages: &[DamageLabel],
    durations: CorpusDurations,
) -> Result<Vec<SynthScenario>> {
    if damages.is_empty() {
        return Err(Error::InvalidInput("empty damage list".into()));
    }
    let fs = template.sample_rate_hz;
    Ok(damages
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let duration = match durations {
                CorpusDurations::Fixed(d) => d,
                CorpusDurations::Reference => reference_window_count(label)
                    .map(|w| duration_for_windows(w, fs))
                    .unwrap_or(template.duration_s),
                CorpusDurations::Scaled(f) => reference_window_count(label)
                    .map(|w| duration_for_windows(((w as f64 * f).round() as usize).max(1), fs))
                    .unwrap_or(template.duration_s * f),
            };
            template
                .clone()
                .with_label(*label)
                .with_seed(template.seed.wrapping_add(i as u64))
                .with_duration(duration)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{extract_windows, power_spectrum, window_count};

    fn short(label: DamageLabel) -> SynthScenario {
        SynthScenario::default().with_label(label).with_duration(12.0).with_seed(7)
    }

    /// Mean one-sided acc_x spectrum over the hover-phase windows.
    fn hover_spectrum(log: &FlightLog, hover_s: f64, f: fn(&ImuRecord) -> f64) -> Vec<f64> {
        let last = (hover_s * log.sample_rate_hz) as usize;
        let wins: Vec<_> = extract_windows(log, 222, 32)
            .unwrap()
            .into_iter()
            .filter(|w| w.start_index + 222 <= last)
            .collect();
        let mut acc = vec![0.0; 112];
        for w in &wins {
            let x: Vec<f64> = w.records.iter().map(f).collect();
            for (a, p) in acc.iter_mut().zip(power_spectrum(&x).unwrap()) {
                *a += p / wins.len() as f64;
            }
        }
        acc
    }

    #[test]
    fn deterministic() {
        let sc = short(DamageLabel::tip_cut(10.0, 15.0, 2));
        let a = simulate_flight(&sc).unwrap();
        let b = simulate_flight(&sc).unwrap();
        assert_eq!(a, b);
        let c = simulate_flight(&sc.clone().with_seed(8)).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn healthy_hover_peak_sits_in_the_base_band() {
        let sc = short(DamageLabel::healthy());
        let log = simulate_flight(&sc).unwrap();
        let p = hover_spectrum(&log, sc.phase_durations_s[0], |r| r.acc[0]);
        let above: f64 = p[40..].iter().sum();
        let base = sc.base_rotor_hz as usize;
        let lo = base / 5 * 5;
        let band: f64 = p[lo..lo + 5].iter().sum();
        assert!(band / above >= 0.9, "only {:.3} of the power in the rotor band", band / above);
        let peak = (40..112).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        assert_eq!(peak / 5, 16);
    }

    #[test]
    fn aliased_peak_for_heavy_symmetric_cut() {
        let coeffs = SignatureCoeffs::default();
        let f = damaged_rotor_hz(83.0, &DamageLabel::tip_cut(40.0, 40.0, 1), &coeffs);
        assert!(f > 111.0);
        let expected = 222.0 - f;
        assert!((alias_frequency(f, 222.0) - expected).abs() < 1e-12);
        // same total cut with a little imbalance so the damaged rotor dominates
        let mut sc = short(DamageLabel::tip_cut(39.0, 41.0, 1));
        sc.vibration.acc_amp = 0.05;
        sc.coeffs.imbalance_amp_per_mm = 0.05;
        let log = simulate_flight(&sc).unwrap();
        let p = hover_spectrum(&log, sc.phase_durations_s[0], |r| r.acc[0]);
        let peak = (40..112).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        assert!((peak as f64 - expected).abs() <= 1.0, "peak {peak}, expected {expected}");
    }

    #[test]
    fn imbalance_raises_the_peak() {
        let peak_power = |c2: f64| {
            let sc = short(DamageLabel::tip_cut(0.0, c2, 1));
            let log = simulate_flight(&sc).unwrap();
            let p = hover_spectrum(&log, sc.phase_durations_s[0], |r| r.acc[0]);
            p[40..].iter().cloned().fold(0.0, f64::max)
        };
        assert!(peak_power(15.0) > peak_power(5.0));
    }

    #[test]
    fn opposite_motors_have_opposite_bias() {
        let mean_tq = |motor: usize| {
            let sc = SynthScenario::default()
                .with_label(DamageLabel::tip_cut(20.0, 20.0, motor))
                .with_duration(30.0)
                .with_seed(11);
            let log = simulate_flight(&sc).unwrap();
            let n = log.len() as f64;
            let mx = log.records.iter().map(|r| r.torque_cmd[0]).sum::<f64>() / n;
            let my = log.records.iter().map(|r| r.torque_cmd[1]).sum::<f64>() / n;
            (mx, my, sc.torque_bias())
        };
        let (x1, y1, b1) = mean_tq(1);
        let (x3, y3, b3) = mean_tq(3);
        assert!((b1.0 + b3.0).abs() < 1e-15 && (b1.1 + b3.1).abs() < 1e-15);
        // the healthy flight with the same seed measures the maneuver-only mean
        let sc = SynthScenario::default().with_duration(30.0).with_seed(11);
        let h = simulate_flight(&sc).unwrap();
        let win_means: Vec<f64> = extract_windows(&h, 222, 222)
            .unwrap()
            .iter()
            .map(|w| w.records.iter().map(|r| r.torque_cmd[0]).sum::<f64>() / 222.0)
            .collect();
        let k = win_means.len() as f64;
        let mu = win_means.iter().sum::<f64>() / k;
        let sigma = (win_means.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / k).sqrt() / k.sqrt();
        assert!((x1 + x3).abs() < 3.0 * 2.0 * sigma.max(1e-6));
        assert!((y1 + y3).abs() < 3.0 * 2.0 * sigma.max(1e-6));
        assert!(x1.signum() == b1.0.signum() && x3.signum() == b3.0.signum());
    }

    #[test]
    fn peak_frequency_moves_monotonically() {
        let peak_band = |label: DamageLabel, coeffs: SignatureCoeffs| {
            let mut sc = short(label);
            sc.coeffs = coeffs;
            sc.vibration.acc_amp = 0.1;
            let log = simulate_flight(&sc).unwrap();
            let p = hover_spectrum(&log, sc.phase_durations_s[0], |r| r.acc[0]);
            let peak = (40..112).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
            peak / 5
        };
        for shift in [0.002, 0.003, 0.004] {
            let coeffs = SignatureCoeffs {
                freq_shift_per_mm: shift,
                imbalance_amp_per_mm: 0.3,
                ..Default::default()
            };
            let mut prev = 0;
            for sum in [10.0, 20.0, 30.0, 40.0, 50.0] {
                // unequal tips so the damaged rotor dominates the spectrum
                let label = DamageLabel::tip_cut(0.0, sum, 1);
                assert!(damaged_rotor_hz(83.0, &label, &coeffs) < 111.0);
                let b = peak_band(label, coeffs);
                assert!(b >= prev, "shift {shift}: band {b} after {prev} at sum {sum}");
                prev = b;
            }
        }
        for drop in [0.002, 0.004, 0.006] {
            let coeffs = SignatureCoeffs {
                long_freq_drop_per_mm: drop,
                long_amp_per_mm: 0.3,
                ..Default::default()
            };
            let mut prev = usize::MAX;
            for depth in [10.0, 20.0, 30.0, 40.0] {
                let b = peak_band(DamageLabel::longitudinal(depth, 1), coeffs);
                assert!(b <= prev, "drop {drop}: band {b} after {prev} at depth {depth}");
                prev = b;
            }
        }
    }

    #[test]
    fn corpus_shapes() {
        let damages = default_damage_list();
        assert_eq!(damages.len(), 18);
        let scen = corpus_scenarios(&SynthScenario::default(), &damages, CorpusDurations::Reference)
            .unwrap();
        for s in &scen {
            let expected = reference_window_count(&s.label).unwrap();
            assert_eq!(window_count(s.n_samples(), 222, 32), expected);
        }
        let healthy = build_corpus(
            &SynthScenario::default(),
            &[DamageLabel::healthy()],
            CorpusDurations::Reference,
        )
        .unwrap();
        assert_eq!(healthy.len(), 1);
        assert_eq!(window_count(healthy[0].len(), 222, 32), 1005);
        let tiny = build_corpus(&SynthScenario::default(), &damages[..3], CorpusDurations::Fixed(1.0))
            .unwrap();
        assert!(tiny.iter().all(|l| window_count(l.len(), 222, 32) == 1));
        assert!(build_corpus(&SynthScenario::default(), &[], CorpusDurations::Reference).is_err());
    }

    #[test]
    fn scenario_validation() {
        let mut sc = SynthScenario::default();
        sc.duration_s = 100.0;
        assert!(sc.validate().is_err());
        let mut sc = SynthScenario::default();
        sc.coeffs.torque_bias_per_mm = -1.0;
        assert!(sc.validate().is_err());
        let mut sc = SynthScenario::default();
        sc.base_rotor_hz = 160.0;
        assert!(sc.validate().is_err());
        let sc = SynthScenario::default().with_label(DamageLabel::tip_cut(5.0, 5.0, 5));
        assert!(sc.validate().is_err());
        assert!(SynthScenario::default().validate().is_ok());
    }
}
