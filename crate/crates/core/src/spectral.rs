//! Window extraction and the band-energy feature descriptor.
//!
//! Every 1 s window is described by the one-sided power spectrum of ten
//! channels, summed into fixed-width frequency bands, followed by the first
//! four moments of the three torque commands. With 5 Hz bands this yields 232
//! features laid out channel-major:
//!
//! ```text
//! acc_x[0..22] acc_y[..] acc_z[..] gyro_x[..] gyro_y[..] gyro_z[..]
//! tq_x[..] tq_y[..] tq_z[..] thrust[..]
//! tq_x(mean,var,skew,kurt) tq_y(..) tq_z(..)
//! ```

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flightlog::{FlightLog, ImuRecord, WINDOW_LEN};

pub const DEFAULT_STRIDE: usize = 32;
pub const DEFAULT_BAND_WIDTH_HZ: usize = 5;
/// Highest one-sided bin of a 222-sample window (1 Hz per bin).
pub const NYQUIST_BIN: usize = WINDOW_LEN / 2;
pub const SUPPORTED_BAND_WIDTHS: [usize; 8] = [2, 3, 4, 5, 6, 7, 8, 10];
pub const N_CHANNELS: usize = 10;
pub const N_MOMENT_FEATURES: usize = 12;
const STD_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    AccX,
    AccY,
    AccZ,
    GyroX,
    GyroY,
    GyroZ,
    TqX,
    TqY,
    TqZ,
    Thrust,
}

impl Channel {
    pub const ALL: [Channel; N_CHANNELS] = [
        Channel::AccX,
        Channel::AccY,
        Channel::AccZ,
        Channel::GyroX,
        Channel::GyroY,
        Channel::GyroZ,
        Channel::TqX,
        Channel::TqY,
        Channel::TqZ,
        Channel::Thrust,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::AccX => "acc_x",
            Channel::AccY => "acc_y",
            Channel::AccZ => "acc_z",
            Channel::GyroX => "gyro_x",
            Channel::GyroY => "gyro_y",
            Channel::GyroZ => "gyro_z",
            Channel::TqX => "tq_x",
            Channel::TqY => "tq_y",
            Channel::TqZ => "tq_z",
            Channel::Thrust => "thrust",
        }
    }

    pub fn value(self, r: &ImuRecord) -> f64 {
        match self {
            Channel::AccX => r.acc[0],
            Channel::AccY => r.acc[1],
            Channel::AccZ => r.acc[2],
            Channel::GyroX => r.gyro[0],
            Channel::GyroY => r.gyro[1],
            Channel::GyroZ => r.gyro[2],
            Channel::TqX => r.torque_cmd[0],
            Channel::TqY => r.torque_cmd[1],
            Channel::TqZ => r.torque_cmd[2],
            Channel::Thrust => r.thrust_cmd,
        }
    }

    /// Sensor group used by ablation masks.
    pub fn group(self) -> SensorGroup {
        match self {
            Channel::AccX | Channel::AccY | Channel::AccZ => SensorGroup::Acc,
            Channel::GyroX | Channel::GyroY | Channel::GyroZ => SensorGroup::Gyro,
            Channel::TqX | Channel::TqY | Channel::TqZ => SensorGroup::Torque,
            Channel::Thrust => SensorGroup::Thrust,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorGroup {
    Acc,
    Gyro,
    Torque,
    Thrust,
}

/// Number of bands for a band width: `111 / bw` rounded, with exact halves
/// rounded down (2 Hz bands give 55, hence 562 features).
pub fn band_count(band_width_hz: usize) -> usize {
    let q = NYQUIST_BIN / band_width_hz;
    let rem2 = 2 * (NYQUIST_BIN % band_width_hz);
    if rem2 > band_width_hz {
        q + 1
    } else {
        q
    }
}

/// Feature layout for a given band width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub band_width_hz: usize,
}

impl Default for FeatureSchema {
    fn default() -> Self {
        Self {
            band_width_hz: DEFAULT_BAND_WIDTH_HZ,
        }
    }
}

impl FeatureSchema {
    pub fn new(band_width_hz: usize) -> Result<Self> {
        if !SUPPORTED_BAND_WIDTHS.contains(&band_width_hz) {
            return Err(Error::UnsupportedBandWidth(band_width_hz));
        }
        Ok(Self { band_width_hz })
    }

    pub fn from_feature_count(n: usize) -> Option<Self> {
        SUPPORTED_BAND_WIDTHS
            .iter()
            .map(|&bw| Self { band_width_hz: bw })
            .find(|s| s.len() == n)
    }

    pub fn n_bands(&self) -> usize {
        band_count(self.band_width_hz)
    }

    pub fn len(&self) -> usize {
        self.n_bands() * N_CHANNELS + N_MOMENT_FEATURES
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self) -> String {
        format!("bands{}hz-v1", self.band_width_hz)
    }

    /// Index of band `band` of `channel`.
    pub fn band_index(&self, channel: Channel, band: usize) -> usize {
        let c = Channel::ALL.iter().position(|&x| x == channel).unwrap();
        c * self.n_bands() + band
    }

    /// Index of moment `m` (0 mean, 1 var, 2 skew, 3 kurt) of torque axis `axis`.
    pub fn moment_index(&self, axis: usize, m: usize) -> usize {
        self.n_bands() * N_CHANNELS + axis * 4 + m
    }

    /// Lower edge in Hz of each band.
    pub fn band_lower_hz(&self, band: usize) -> usize {
        band * self.band_width_hz
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.len());
        for ch in Channel::ALL {
            for b in 0..self.n_bands() {
                out.push(format!("{}_b{:03}", ch.name(), self.band_lower_hz(b)));
            }
        }
        for axis in ["tq_x", "tq_y", "tq_z"] {
            for m in ["mean", "var", "skew", "kurt"] {
                out.push(format!("{axis}_{m}"));
            }
        }
        out
    }

    /// Sensor group each feature belongs to.
    pub fn feature_groups(&self) -> Vec<SensorGroup> {
        let mut out = Vec::with_capacity(self.len());
        for ch in Channel::ALL {
            out.extend(std::iter::repeat_n(ch.group(), self.n_bands()));
        }
        out.extend(std::iter::repeat_n(SensorGroup::Torque, N_MOMENT_FEATURES));
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SampleWindow<'a> {
    pub records: &'a [ImuRecord],
    pub start_index: usize,
    pub flight_id: &'a str,
}

/// Windows starting at `0, stride, 2·stride, …` that fit entirely in the log.
pub fn extract_windows(log: &FlightLog, width: usize, stride: usize) -> Result<Vec<SampleWindow<'_>>> {
    if width == 0 || stride == 0 {
        return Err(Error::InvalidInput("width and stride must be positive".into()));
    }
    if log.records.len() < width {
        return Err(Error::TooShort {
            len: log.records.len(),
            need: width,
        });
    }
    let count = window_count(log.records.len(), width, stride);
    Ok((0..count)
        .map(|i| {
            let s = i * stride;
            SampleWindow {
                records: &log.records[s..s + width],
                start_index: s,
                flight_id: &log.flight_id,
            }
        })
        .collect())
}

pub fn window_count(len: usize, width: usize, stride: usize) -> usize {
    if len < width {
        0
    } else {
        (len - width) / stride + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub schema: FeatureSchema,
}

impl FeatureVector {
    pub fn schema_id(&self) -> String {
        self.schema.id()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

/// Population moments with excess kurtosis; skewness and kurtosis are 0 for a
/// (numerically) constant signal.
pub fn moments(signal: &[f64]) -> Result<Moments> {
    if signal.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "moments need at least 2 samples, got {}",
            signal.len()
        )));
    }
    let n = signal.len() as f64;
    let mean = signal.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in signal {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skewness, kurtosis) = if m2 < 1e-12 * (mean * mean + 1.0) {
        (0.0, 0.0)
    } else {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    };
    Ok(Moments {
        mean,
        variance: m2,
        skewness,
        kurtosis,
    })
}

/// Sums one-sided power bins into bands of `band_width_hz` (1 Hz per bin). The
/// last band also takes every remaining bin up to Nyquist.
pub fn band_energies(power: &[f64], band_width_hz: usize) -> Result<Vec<f64>> {
    if !SUPPORTED_BAND_WIDTHS.contains(&band_width_hz) {
        return Err(Error::UnsupportedBandWidth(band_width_hz));
    }
    if power.len() != NYQUIST_BIN + 1 {
        return Err(Error::DimensionMismatch {
            expected: NYQUIST_BIN + 1,
            got: power.len(),
        });
    }
    let mut out = vec![0.0; band_count(band_width_hz)];
    accumulate_bands(power, band_width_hz, &mut out);
    Ok(out)
}

fn accumulate_bands(power: &[f64], band_width_hz: usize, out: &mut [f64]) {
    let last = out.len() - 1;
    for (k, &p) in power.iter().enumerate() {
        out[(k / band_width_hz).min(last)] += p;
    }
}

/// Reusable FFT plan and buffers for 222-sample windows.
pub struct SpectrumEngine {
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    n: usize,
}

impl SpectrumEngine {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(n);
        let scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        Self {
            fft,
            buf: vec![Complex::default(); n],
            scratch,
            n,
        }
    }

    /// One-sided power `P_0..P_{n/2}` normalised so that `Σ P_k = mean(x²)`.
    pub fn power_into(&mut self, signal: impl Iterator<Item = f64>, out: &mut [f64]) {
        let n = self.n;
        for (b, x) in self.buf.iter_mut().zip(signal) {
            *b = Complex::new(x, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        let norm = 1.0 / (n as f64 * n as f64);
        let half = n / 2;
        for (k, o) in out.iter_mut().enumerate().take(half + 1) {
            let p = self.buf[k].norm_sqr() * norm;
            *o = if k == 0 || (n.is_multiple_of(2) && k == half) { p } else { 2.0 * p };
        }
    }
}

thread_local! {
    static ENGINE: RefCell<SpectrumEngine> = RefCell::new(SpectrumEngine::new(WINDOW_LEN));
}

/// One-sided power spectrum of a 222-sample window sampled at 222 Hz.
pub fn power_spectrum(signal: &[f64]) -> Result<Vec<f64>> {
    if signal.len() != WINDOW_LEN {
        return Err(Error::DimensionMismatch {
            expected: WINDOW_LEN,
            got: signal.len(),
        });
    }
    if signal.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    let mut out = vec![0.0; NYQUIST_BIN + 1];
    ENGINE.with(|e| e.borrow_mut().power_into(signal.iter().copied(), &mut out));
    Ok(out)
}

/// Feature extractor holding an FFT plan; cheap to reuse across windows.
pub struct FeatureExtractor {
    schema: FeatureSchema,
    engine: SpectrumEngine,
    power: Vec<f64>,
    torque: Vec<f64>,
}

impl FeatureExtractor {
    pub fn new(schema: FeatureSchema) -> Self {
        Self {
            schema,
            engine: SpectrumEngine::new(WINDOW_LEN),
            power: vec![0.0; NYQUIST_BIN + 1],
            torque: vec![0.0; WINDOW_LEN],
        }
    }

    pub fn schema(&self) -> FeatureSchema {
        self.schema
    }

    pub fn extract(&mut self, window: &SampleWindow<'_>) -> Result<FeatureVector> {
        let recs = window.records;
        if recs.len() != WINDOW_LEN {
            return Err(Error::DimensionMismatch {
                expected: WINDOW_LEN,
                got: recs.len(),
            });
        }
        let nb = self.schema.n_bands();
        let mut values = vec![0.0; self.schema.len()];
        for (c, ch) in Channel::ALL.iter().enumerate() {
            self.engine
                .power_into(recs.iter().map(|r| ch.value(r)), &mut self.power);
            accumulate_bands(
                &self.power,
                self.schema.band_width_hz,
                &mut values[c * nb..(c + 1) * nb],
            );
        }
        for axis in 0..3 {
            for (t, r) in self.torque.iter_mut().zip(recs) {
                *t = r.torque_cmd[axis];
            }
            let m = moments(&self.torque)?;
            let base = self.schema.moment_index(axis, 0);
            values[base..base + 4].copy_from_slice(&[m.mean, m.variance, m.skewness, m.kurtosis]);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite feature in window at {}",
                window.start_index
            )));
        }
        Ok(FeatureVector {
            values,
            schema: self.schema,
        })
    }

    /// Features of every window of `log`.
    pub fn extract_log(&mut self, log: &FlightLog, stride: usize) -> Result<Vec<(usize, FeatureVector)>> {
        extract_windows(log, WINDOW_LEN, stride)?
            .iter()
            .map(|w| Ok((w.start_index, self.extract(w)?)))
            .collect()
    }
}

pub fn assemble_features(window: &SampleWindow<'_>, band_width_hz: usize) -> Result<FeatureVector> {
    FeatureExtractor::new(FeatureSchema::new(band_width_hz)?).extract(window)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub fitted: bool,
}

impl Standardizer {
    pub fn unfitted() -> Self {
        Self {
            mean: Vec::new(),
            std: Vec::new(),
            fitted: false,
        }
    }

    /// Per-feature mean and population std; std floored at 1e-12.
    pub fn fit<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Self> {
        if vectors.len() < 2 {
            return Err(Error::InsufficientData(
                "standardizer needs at least 2 vectors".into(),
            ));
        }
        let d = vectors[0].as_ref().len();
        let n = vectors.len() as f64;
        let mut mean = vec![0.0; d];
        for v in vectors {
            let v = v.as_ref();
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for v in vectors {
            for ((s, x), m) in var.iter_mut().zip(v.as_ref()).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        let std = var.iter().map(|s| (s / n).sqrt().max(STD_FLOOR)).collect();
        Ok(Self {
            mean,
            std,
            fitted: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = x.to_vec();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_in_place(&self, x: &mut [f64]) -> Result<()> {
        if !self.fitted {
            return Err(Error::NotFitted);
        }
        if x.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: x.len(),
            });
        }
        for ((v, m), s) in x.iter_mut().zip(&self.mean).zip(&self.std) {
            *v = (*v - m) / s;
        }
        Ok(())
    }

    pub fn apply_vector(&self, fv: &FeatureVector) -> Result<FeatureVector> {
        Ok(FeatureVector {
            values: self.apply(&fv.values)?,
            schema: fv.schema,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flightlog::DamageLabel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Direct O(N²) DFT, independent of the FFT path.
    fn dft_power(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (j, &v) in x.iter().enumerate() {
                    let ang = -2.0 * PI * (k * j % n) as f64 / n as f64;
                    re += v * ang.cos();
                    im += v * ang.sin();
                }
                let p = (re * re + im * im) / (n * n) as f64;
                if k == 0 || k == n / 2 {
                    p
                } else {
                    2.0 * p
                }
            })
            .collect()
    }

    fn log_of(len: usize, f: impl FnMut(usize) -> ImuRecord) -> FlightLog {
        FlightLog::new((0..len).map(f).collect(), 222.0, DamageLabel::healthy(), "w").unwrap()
    }

    fn rec(i: usize) -> ImuRecord {
        ImuRecord {
            t: i as f64 / 222.0,
            ..Default::default()
        }
    }

    #[test]
    fn window_counts() {
        assert_eq!(window_count(26640, 222, 32), 826);
        let log = log_of(26640, rec);
        assert_eq!(extract_windows(&log, 222, 32).unwrap().len(), 826);
        let log = log_of(222, rec);
        assert_eq!(extract_windows(&log, 222, 32).unwrap().len(), 1);
        let log = log_of(253, rec);
        let w = extract_windows(&log, 222, 32).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].start_index, 0);
        assert!(extract_windows(&log, 300, 32).is_err());
        let log = log_of(300, rec);
        let w = extract_windows(&log, 222, 32).unwrap();
        assert_eq!(w.iter().map(|w| w.start_index).collect::<Vec<_>>(), vec![0, 32, 64]);
    }

    #[test]
    fn spectrum_of_constant() {
        let p = power_spectrum(&[3.0; 222]).unwrap();
        assert!((p[0] - 9.0).abs() < 1e-12);
        assert!(p[1..].iter().all(|v| v.abs() < 1e-20));
    }

    #[test]
    fn integer_bin_sinusoid() {
        let a = 1.7;
        let x: Vec<f64> = (0..222).map(|n| a * (2.0 * PI * 10.0 * n as f64 / 222.0).sin()).collect();
        let p = power_spectrum(&x).unwrap();
        assert!((p[10] - a * a / 2.0).abs() < 1e-12);
        for (k, v) in p.iter().enumerate() {
            if k != 10 {
                assert!(v.abs() < 1e-20, "bin {k} = {v}");
            }
        }
    }

    #[test]
    fn super_nyquist_tone_aliases_to_82() {
        let x: Vec<f64> = (0..222).map(|n| (2.0 * PI * 140.0 * n as f64 / 222.0).sin()).collect();
        let p = power_spectrum(&x).unwrap();
        let peak = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        assert_eq!(peak, 82);
    }

    #[test]
    fn fft_matches_direct_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..222).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let a = power_spectrum(&x).unwrap();
        let b = dft_power(&x);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn band_layout() {
        let mut p = vec![0.0; 112];
        p[83] = 4.0;
        let b = band_energies(&p, 5).unwrap();
        assert_eq!(b.len(), 22);
        assert_eq!(b[16], 4.0);
        let b = band_energies(&vec![1.0; 112], 5).unwrap();
        assert!(b[..21].iter().all(|&v| v == 5.0));
        assert_eq!(b[21], 7.0);
        assert_eq!(band_energies(&p, 10).unwrap().len(), 11);
        assert!(matches!(band_energies(&p, 9), Err(Error::UnsupportedBandWidth(9))));
        assert!(band_energies(&p[..100], 5).is_err());
    }

    #[test]
    fn band_counts_follow_feature_law() {
        let expect = [(2, 55), (3, 37), (4, 28), (5, 22), (6, 18), (7, 16), (8, 14), (10, 11)];
        for (bw, n) in expect {
            assert_eq!(band_count(bw), n, "bw={bw}");
        }
        assert_eq!(FeatureSchema::new(2).unwrap().len(), 562);
        assert_eq!(FeatureSchema::new(10).unwrap().len(), 122);
        assert_eq!(FeatureSchema::new(7).unwrap().len(), 172);
    }

    #[test]
    fn moment_fixtures() {
        let m = moments(&[2.5; 10]).unwrap();
        assert_eq!((m.mean, m.variance, m.skewness, m.kurtosis), (2.5, 0.0, 0.0, 0.0));
        let alt: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let m = moments(&alt).unwrap();
        assert!(m.mean.abs() < 1e-15);
        assert!((m.variance - 1.0).abs() < 1e-15);
        assert!(m.skewness.abs() < 1e-15);
        assert!((m.kurtosis + 2.0).abs() < 1e-12);
        let m = moments(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((m.mean - 0.25).abs() < 1e-15);
        assert!((m.variance - 0.1875).abs() < 1e-15);
        // brute force: m3 = (3·0.25³·(-1) + 0.75³)/4, m4 = (3·0.25⁴ + 0.75⁴)/4
        let m3 = (3.0 * (-0.25f64).powi(3) + 0.75f64.powi(3)) / 4.0;
        let m4 = (3.0 * 0.25f64.powi(4) + 0.75f64.powi(4)) / 4.0;
        assert!((m.skewness - m3 / 0.1875f64.powf(1.5)).abs() < 1e-12);
        assert!((m.skewness - 1.1547005383792515).abs() < 1e-9);
        assert!((m.kurtosis - (m4 / (0.1875 * 0.1875) - 3.0)).abs() < 1e-12);
        assert!((m.kurtosis + 2.0 / 3.0).abs() < 1e-9);
        assert!(moments(&[1.0]).is_err());
    }

    #[test]
    fn features_have_expected_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let log = log_of(222, |i| ImuRecord {
            t: i as f64 / 222.0,
            acc: [rng.gen(), rng.gen(), rng.gen()],
            gyro: [rng.gen(), rng.gen(), rng.gen()],
            torque_cmd: [rng.gen(), rng.gen(), rng.gen()],
            thrust_cmd: rng.gen(),
        });
        let w = extract_windows(&log, 222, 32).unwrap();
        for (bw, n) in [(5, 232), (2, 562), (10, 122)] {
            let f = assemble_features(&w[0], bw).unwrap();
            assert_eq!(f.values.len(), n);
        }
        let f = assemble_features(&w[0], 5).unwrap();
        let g = assemble_features(&w[0], 5).unwrap();
        assert_eq!(f, g);
        // torque moments land in the tail
        let tq: Vec<f64> = log.records.iter().map(|r| r.torque_cmd[1]).collect();
        let m = moments(&tq).unwrap();
        let s = FeatureSchema::default();
        assert_eq!(f.values[s.moment_index(1, 0)], m.mean);
        assert_eq!(f.values[s.moment_index(1, 3)], m.kurtosis);
        // channel energies sum to each channel's mean power
        let ax: Vec<f64> = log.records.iter().map(|r| r.acc[0]).collect();
        let total: f64 = f.values[0..22].iter().sum();
        let power = ax.iter().map(|v| v * v).sum::<f64>() / 222.0;
        assert!((total - power).abs() < 1e-12);
    }

    #[test]
    fn zero_window_gives_zero_features() {
        let log = log_of(222, rec);
        let w = extract_windows(&log, 222, 32).unwrap();
        let f = assemble_features(&w[0], 5).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standardizer_behaviour() {
        let v = vec![1.0, 2.0, 3.0];
        let s = Standardizer::fit(&[v.clone(), v.clone()]).unwrap();
        assert_eq!(s.apply(&v).unwrap(), vec![0.0; 3]);
        assert!(matches!(Standardizer::unfitted().apply(&v), Err(Error::NotFitted)));
        assert!(Standardizer::fit(std::slice::from_ref(&v)).is_err());

        use rand_distr::{Distribution, Normal};
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dist = Normal::new(5.0, 2.0).unwrap();
        let data: Vec<Vec<f64>> = (0..4000)
            .map(|_| (0..4).map(|_| dist.sample(&mut rng)).collect())
            .collect();
        let s = Standardizer::fit(&data).unwrap();
        let z: Vec<Vec<f64>> = data.iter().map(|x| s.apply(x).unwrap()).collect();
        for j in 0..4 {
            let m = z.iter().map(|r| r[j]).sum::<f64>() / z.len() as f64;
            let sd = (z.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / z.len() as f64).sqrt();
            assert!(m.abs() < 0.05 && (sd - 1.0).abs() < 0.05);
            assert!((s.mean[j] - 5.0).abs() < 0.1 && (s.std[j] - 2.0).abs() < 0.1);
        }
        let a = vec![0.3, -1.0, 2.0, 7.0];
        let b = vec![1.0, 2.0, -3.0, 0.5];
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (za, zab) = (s.apply(&a).unwrap(), s.apply(&ab).unwrap());
        for j in 0..4 {
            assert!((zab[j] - za[j] - b[j] / s.std[j]).abs() < 1e-12);
        }
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn parseval_and_band_completeness(seed in any::<u64>(), scale in 1e-3f64..1e3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..222).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
            let p = power_spectrum(&x).unwrap();
            let power = x.iter().map(|v| v * v).sum::<f64>() / 222.0;
            let sp: f64 = p.iter().sum();
            prop_assert!(((sp - power) / power).abs() < 1e-9);
            for bw in SUPPORTED_BAND_WIDTHS {
                let b: f64 = band_energies(&p, bw).unwrap().iter().sum();
                prop_assert!(((b - sp) / sp).abs() < 1e-12);
            }
        }

        #[test]
        fn circular_shift_keeps_bands(seed in any::<u64>(), shift in 1usize..222) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..222).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut y = x.clone();
            y.rotate_left(shift);
            let bx = band_energies(&power_spectrum(&x).unwrap(), 5).unwrap();
            let by = band_energies(&power_spectrum(&y).unwrap(), 5).unwrap();
            for (a, b) in bx.iter().zip(&by) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-12));
            }
        }
    }
}
