//! Flight-log records, damage labels and the CSV + JSON-sidecar on-disk layout.
//!
//! A flight is stored as `<flight_id>.csv` with the header
//! `t,ax,ay,az,gx,gy,gz,qx,qy,qz,thrust` and a `<flight_id>.meta.json` sidecar
//! carrying the label and sample rate. Binary autopilot logs must be converted
//! to this layout beforehand; on a Pixhawk the high-rate profile is enabled by
//! setting `SDLOG_PROFILE` to 8.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Control-loop rate of the reference platform.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 222.0;
/// Samples in one analysis window (1 s at the default rate).
pub const WINDOW_LEN: usize = 222;

pub const CSV_HEADER: [&str; 11] = [
    "t", "ax", "ay", "az", "gx", "gy", "gz", "qx", "qy", "qz", "thrust",
];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImuRecord {
    pub t: f64,
    pub acc: [f64; 3],
    pub gyro: [f64; 3],
    pub torque_cmd: [f64; 3],
    pub thrust_cmd: f64,
}

impl ImuRecord {
    pub fn to_row(&self) -> [f64; 11] {
        [
            self.t,
            self.acc[0],
            self.acc[1],
            self.acc[2],
            self.gyro[0],
            self.gyro[1],
            self.gyro[2],
            self.torque_cmd[0],
            self.torque_cmd[1],
            self.torque_cmd[2],
            self.thrust_cmd,
        ]
    }

    pub fn from_row(r: &[f64; 11]) -> Self {
        Self {
            t: r[0],
            acc: [r[1], r[2], r[3]],
            gyro: [r[4], r[5], r[6]],
            torque_cmd: [r[7], r[8], r[9]],
            thrust_cmd: r[10],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_row().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DamageKind {
    Healthy,
    /// Tips cut by `cut1_mm` and `cut2_mm`; equal cuts are symmetric damage.
    #[serde(rename = "tipcut")]
    TipCut { cut1_mm: f64, cut2_mm: f64 },
    /// Lengthwise cut of `depth_mm` into each tip.
    Longitudinal { depth_mm: f64 },
}

/// The three damage families the type classifier separates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TypeClass {
    C0,
    C1,
    C2,
}

impl TypeClass {
    pub const ALL: [TypeClass; 3] = [TypeClass::C0, TypeClass::C1, TypeClass::C2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            TypeClass::C0 => "C0",
            TypeClass::C1 => "C1",
            TypeClass::C2 => "C2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DamageLabel {
    pub kind: DamageKind,
    /// 1-based rotor index, `None` iff healthy.
    pub motor: Option<usize>,
}

impl DamageLabel {
    pub fn healthy() -> Self {
        Self {
            kind: DamageKind::Healthy,
            motor: None,
        }
    }

    pub fn tip_cut(cut1_mm: f64, cut2_mm: f64, motor: usize) -> Self {
        Self {
            kind: DamageKind::TipCut { cut1_mm, cut2_mm },
            motor: Some(motor),
        }
    }

    pub fn longitudinal(depth_mm: f64, motor: usize) -> Self {
        Self {
            kind: DamageKind::Longitudinal { depth_mm },
            motor: Some(motor),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("label: {m}")));
        match self.kind {
            DamageKind::Healthy => {
                if self.motor.is_some() {
                    return bad("healthy label must not name a motor");
                }
            }
            DamageKind::TipCut { cut1_mm, cut2_mm } => {
                if !(cut1_mm >= 0.0 && cut2_mm >= 0.0 && cut1_mm.is_finite() && cut2_mm.is_finite())
                {
                    return bad("tip cuts must be finite and non-negative");
                }
                if cut1_mm + cut2_mm == 0.0 {
                    return bad("a tip cut of 0-0 is a healthy propeller");
                }
            }
            DamageKind::Longitudinal { depth_mm } => {
                if !(depth_mm > 0.0 && depth_mm.is_finite()) {
                    return bad("longitudinal depth must be positive");
                }
            }
        }
        if !matches!(self.kind, DamageKind::Healthy) && !matches!(self.motor, Some(m) if m >= 1) {
            return bad("damaged label needs a 1-based motor index");
        }
        Ok(())
    }

    pub fn type_class(&self) -> TypeClass {
        match self.kind {
            DamageKind::Healthy => TypeClass::C0,
            DamageKind::TipCut { .. } => TypeClass::C1,
            DamageKind::Longitudinal { .. } => TypeClass::C2,
        }
    }

    /// Total cut length over both tips, in mm (0 for healthy).
    pub fn sum_mm(&self) -> f64 {
        match self.kind {
            DamageKind::Healthy => 0.0,
            DamageKind::TipCut { cut1_mm, cut2_mm } => cut1_mm + cut2_mm,
            DamageKind::Longitudinal { depth_mm } => 2.0 * depth_mm,
        }
    }

    /// Tip imbalance `|cut1 - cut2|`, in mm.
    pub fn diff_mm(&self) -> f64 {
        match self.kind {
            DamageKind::TipCut { cut1_mm, cut2_mm } => (cut1_mm - cut2_mm).abs(),
            _ => 0.0,
        }
    }

    /// `(cut1, cut2)` as written in the flight catalogue, e.g. `(10, 15)`.
    pub fn cuts_mm(&self) -> (f64, f64) {
        match self.kind {
            DamageKind::Healthy => (0.0, 0.0),
            DamageKind::TipCut { cut1_mm, cut2_mm } => (cut1_mm, cut2_mm),
            DamageKind::Longitudinal { depth_mm } => (depth_mm, depth_mm),
        }
    }

    /// Short catalogue name: `healthy`, `tip-10-15`, `long-20-20`.
    pub fn damage_name(&self) -> String {
        let (a, b) = self.cuts_mm();
        match self.kind {
            DamageKind::Healthy => "healthy".to_string(),
            DamageKind::TipCut { .. } => format!("tip-{a}-{b}"),
            DamageKind::Longitudinal { .. } => format!("long-{a}-{b}"),
        }
    }
}

/// Sidecar document stored next to each flight CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightMeta {
    pub flight_id: String,
    pub kind: String,
    #[serde(default)]
    pub cut1_mm: f64,
    #[serde(default)]
    pub cut2_mm: f64,
    #[serde(default)]
    pub motor: Option<usize>,
    pub sample_rate_hz: f64,
}

impl FlightMeta {
    pub fn from_label(flight_id: &str, label: &DamageLabel, sample_rate_hz: f64) -> Self {
        let (kind, (c1, c2)) = match label.kind {
            DamageKind::Healthy => ("healthy", (0.0, 0.0)),
            DamageKind::TipCut { .. } => ("tipcut", label.cuts_mm()),
            DamageKind::Longitudinal { .. } => ("longitudinal", label.cuts_mm()),
        };
        Self {
            flight_id: flight_id.to_string(),
            kind: kind.to_string(),
            cut1_mm: c1,
            cut2_mm: c2,
            motor: label.motor,
            sample_rate_hz,
        }
    }

    pub fn label(&self) -> Result<DamageLabel> {
        let kind = match self.kind.to_ascii_lowercase().as_str() {
            "healthy" => DamageKind::Healthy,
            "tipcut" => DamageKind::TipCut {
                cut1_mm: self.cut1_mm,
                cut2_mm: self.cut2_mm,
            },
            "longitudinal" => {
                if self.cut1_mm != self.cut2_mm {
                    return Err(Error::InvalidInput(format!(
                        "longitudinal damage needs equal depths, got {}-{}",
                        self.cut1_mm, self.cut2_mm
                    )));
                }
                DamageKind::Longitudinal {
                    depth_mm: self.cut1_mm,
                }
            }
            other => return Err(Error::InvalidInput(format!("unknown damage kind '{other}'"))),
        };
        let label = DamageLabel {
            kind,
            motor: self.motor,
        };
        label.validate()?;
        Ok(label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlightLog {
    pub records: Vec<ImuRecord>,
    pub sample_rate_hz: f64,
    pub label: DamageLabel,
    pub flight_id: String,
}

impl FlightLog {
    /// Checks finiteness, strictly increasing time and minimum length.
    pub fn new(
        records: Vec<ImuRecord>,
        sample_rate_hz: f64,
        label: DamageLabel,
        flight_id: impl Into<String>,
    ) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        label.validate()?;
        for (i, r) in records.iter().enumerate() {
            if !r.is_finite() {
                return Err(Error::Validation {
                    row: i + 1,
                    msg: "non-finite value".into(),
                });
            }
            if i > 0 && r.t <= records[i - 1].t {
                return Err(Error::Parse {
                    row: i + 1,
                    msg: format!("time {} does not increase", r.t),
                });
            }
        }
        if records.len() < WINDOW_LEN {
            return Err(Error::TooShort {
                len: records.len(),
                need: WINDOW_LEN,
            });
        }
        Ok(Self {
            records,
            sample_rate_hz,
            label,
            flight_id: flight_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.records.len() as f64 / self.sample_rate_hz
    }

    pub fn meta(&self) -> FlightMeta {
        FlightMeta::from_label(&self.flight_id, &self.label, self.sample_rate_hz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub rate_ok: bool,
    pub finite_ok: bool,
    pub length_ok: bool,
    pub gap_count: usize,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.rate_ok && self.finite_ok && self.length_ok && self.gap_count == 0
    }
}

pub fn validate(log: &FlightLog) -> ValidationReport {
    let period = 1.0 / log.sample_rate_hz;
    let mut dts: Vec<f64> = log.records.windows(2).map(|w| w[1].t - w[0].t).collect();
    let gap_count = dts.iter().filter(|&&d| d > 1.5 * period).count();
    let rate_ok = if dts.is_empty() {
        false
    } else {
        dts.sort_by(f64::total_cmp);
        let mid = dts.len() / 2;
        let median = if dts.len().is_multiple_of(2) {
            0.5 * (dts[mid - 1] + dts[mid])
        } else {
            dts[mid]
        };
        ((median - period) / period).abs() <= 0.05
    };
    ValidationReport {
        rate_ok,
        finite_ok: log.records.iter().all(ImuRecord::is_finite),
        length_ok: log.records.len() >= WINDOW_LEN,
        gap_count,
    }
}

/// Parses a flight CSV. Row numbers in errors count data rows from 1.
pub fn parse_log<R: Read>(reader: R, meta: &FlightMeta) -> Result<FlightLog> {
    let label = meta.label()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut cols = [0usize; 11];
    for (c, name) in CSV_HEADER.iter().enumerate() {
        cols[c] = headers
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| Error::Parse {
                row: 0,
                msg: format!("missing column '{name}'"),
            })?;
    }
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            msg: e.to_string(),
        })?;
        let mut vals = [0.0; 11];
        for (c, &idx) in cols.iter().enumerate() {
            let cell = rec.get(idx).ok_or_else(|| Error::Parse {
                row,
                msg: format!("missing cell '{}'", CSV_HEADER[c]),
            })?;
            vals[c] = cell.parse::<f64>().map_err(|_| Error::Parse {
                row,
                msg: format!("non-numeric {} '{cell}'", CSV_HEADER[c]),
            })?;
            if !vals[c].is_finite() {
                return Err(Error::Validation {
                    row,
                    msg: format!("non-finite {} '{cell}'", CSV_HEADER[c]),
                });
            }
        }
        records.push(ImuRecord::from_row(&vals));
    }
    FlightLog::new(records, meta.sample_rate_hz, label, meta.flight_id.clone())
}

pub fn write_log<W: Write>(mut w: W, log: &FlightLog) -> Result<()> {
    writeln!(w, "{}", CSV_HEADER.join(","))?;
    let mut line = String::with_capacity(256);
    for r in &log.records {
        line.clear();
        for (i, v) in r.to_row().iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn csv_path(dir: &Path, flight_id: &str) -> PathBuf {
    dir.join(format!("{flight_id}.csv"))
}

pub fn meta_path(dir: &Path, flight_id: &str) -> PathBuf {
    dir.join(format!("{flight_id}.meta.json"))
}

/// Writes `<flight_id>.csv` and its sidecar into `dir`.
pub fn write_flight(dir: &Path, log: &FlightLog) -> Result<()> {
    write_flight_with(dir, log, None)
}

#[derive(Serialize)]
struct SidecarDoc<'a> {
    #[serde(flatten)]
    meta: FlightMeta,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<&'a crate::io::Provenance>,
}

/// [`write_flight`] with a provenance comment atop the CSV and a provenance
/// entry in the sidecar.
pub fn write_flight_with(dir: &Path, log: &FlightLog, provenance: Option<&crate::io::Provenance>) -> Result<()> {
    let mut buf = Vec::new();
    if let Some(p) = provenance {
        writeln!(buf, "{}", p.csv_comment())?;
    }
    write_log(&mut buf, log)?;
    crate::io::write_atomic(&csv_path(dir, &log.flight_id), &buf)?;
    let meta = serde_json::to_vec_pretty(&SidecarDoc {
        meta: log.meta(),
        provenance,
    })?;
    crate::io::write_atomic(&meta_path(dir, &log.flight_id), &meta)?;
    Ok(())
}

/// Reads a flight CSV and the sidecar next to it.
pub fn read_flight(csv_file: &Path) -> Result<FlightLog> {
    let stem = csv_file
        .file_name()
        .and_then(|s| s.to_str())
        .and_then(|s| s.strip_suffix(".csv"))
        .ok_or_else(|| Error::InvalidInput(format!("not a .csv file: {}", csv_file.display())))?;
    let dir = csv_file.parent().unwrap_or(Path::new("."));
    let meta: FlightMeta = serde_json::from_slice(&fs::read(meta_path(dir, stem))?)?;
    parse_log(fs::File::open(csv_file)?, &meta)
}

/// All flight CSVs in `dir` that have a sidecar, sorted by file name.
pub fn list_flights(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        let Some(name) = p.file_name().and_then(|s| s.to_str()) else {
            continue;
        };
        if let Some(stem) = name.strip_suffix(".csv") {
            if meta_path(dir, stem).exists() {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ideal_records(n: usize, rate: f64) -> Vec<ImuRecord> {
        (0..n)
            .map(|i| ImuRecord {
                t: i as f64 / rate,
                acc: [0.1 * i as f64, -0.2, -9.81],
                gyro: [0.01, 0.02, 0.03],
                torque_cmd: [0.0, 0.001, -0.002],
                thrust_cmd: 0.5,
            })
            .collect()
    }

    fn meta(id: &str) -> FlightMeta {
        FlightMeta::from_label(id, &DamageLabel::healthy(), 222.0)
    }

    fn csv_text(records: &[ImuRecord]) -> String {
        let log = FlightLog {
            records: records.to_vec(),
            sample_rate_hz: 222.0,
            label: DamageLabel::healthy(),
            flight_id: "x".into(),
        };
        let mut buf = Vec::new();
        write_log(&mut buf, &log).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn parses_120_seconds() {
        let text = csv_text(&ideal_records(26640, 222.0));
        let log = parse_log(text.as_bytes(), &meta("h")).unwrap();
        assert_eq!(log.len(), 26640);
        assert!((log.duration_s() - 120.0).abs() < 1e-12);
    }

    #[test]
    fn short_file_is_rejected() {
        let text = csv_text(&ideal_records(100, 222.0));
        assert!(matches!(
            parse_log(text.as_bytes(), &meta("h")),
            Err(Error::TooShort { len: 100, need: 222 })
        ));
    }

    #[test]
    fn nan_cell_names_its_row() {
        let mut text = csv_text(&ideal_records(300, 222.0));
        // third data row
        let lines: Vec<&str> = text.lines().collect();
        let mut fields: Vec<String> = lines[3].split(',').map(String::from).collect();
        fields[1] = "nan".into();
        let patched = fields.join(",");
        text = lines
            .iter()
            .enumerate()
            .map(|(i, l)| if i == 3 { patched.clone() } else { l.to_string() })
            .collect::<Vec<_>>()
            .join("\n");
        match parse_log(text.as_bytes(), &meta("h")) {
            Err(Error::Validation { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn missing_column_and_bad_cells() {
        let text = "t,ax,ay,az,gx,gy,gz,qx,qy,qz\n0,0,0,0,0,0,0,0,0,0\n";
        assert!(matches!(
            parse_log(text.as_bytes(), &meta("h")),
            Err(Error::Parse { row: 0, .. })
        ));
        let mut text = csv_text(&ideal_records(300, 222.0));
        text = text.replacen("\n0,", "\nzero,", 1);
        assert!(matches!(
            parse_log(text.as_bytes(), &meta("h")),
            Err(Error::Parse { row: 1, .. })
        ));
        let mut recs = ideal_records(300, 222.0);
        recs[10].t = recs[9].t;
        let text = csv_text(&recs);
        assert!(matches!(
            parse_log(text.as_bytes(), &meta("h")),
            Err(Error::Parse { row: 11, .. })
        ));
    }

    #[test]
    fn validate_reports() {
        let log = FlightLog::new(ideal_records(500, 222.0), 222.0, DamageLabel::healthy(), "a")
            .unwrap();
        let before = log.clone();
        let rep = validate(&log);
        assert!(rep.all_ok());
        assert_eq!(rep.gap_count, 0);
        assert_eq!(log, before);

        let mut recs = ideal_records(501, 222.0);
        recs.remove(250);
        let log = FlightLog::new(recs, 222.0, DamageLabel::healthy(), "b").unwrap();
        let rep = validate(&log);
        assert_eq!(rep.gap_count, 1);
        assert!(rep.rate_ok);

        let log = FlightLog::new(ideal_records(500, 111.0), 222.0, DamageLabel::healthy(), "c")
            .unwrap();
        let rep = validate(&log);
        assert!(!rep.rate_ok);
    }

    #[test]
    fn sidecar_round_trip() {
        let label = DamageLabel::tip_cut(10.0, 15.0, 2);
        let m = FlightMeta::from_label("f1", &label, 222.0);
        let text = serde_json::to_string(&m).unwrap();
        let back: FlightMeta = serde_json::from_str(&text).unwrap();
        assert_eq!(back.label().unwrap(), label);
        let long = DamageLabel::longitudinal(20.0, 1);
        assert_eq!(
            FlightMeta::from_label("f", &long, 222.0).label().unwrap(),
            long
        );
        let bad = FlightMeta {
            kind: "healthy".into(),
            motor: Some(1),
            ..m
        };
        assert!(bad.label().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn serialize_then_parse_is_identity(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut t = 0.0;
            let recs: Vec<ImuRecord> = (0..240)
                .map(|_| {
                    t += rng.gen_range(0.001..0.01);
                    let mut row = [0.0; 11];
                    row[0] = t;
                    for v in row.iter_mut().skip(1) {
                        *v = rng.gen_range(-1e3..1e3) * 10f64.powi(rng.gen_range(-8..3));
                    }
                    ImuRecord::from_row(&row)
                })
                .collect();
            let text = csv_text(&recs);
            let log = parse_log(text.as_bytes(), &meta("p")).unwrap();
            for (a, b) in log.records.iter().zip(&recs) {
                for (x, y) in a.to_row().iter().zip(b.to_row().iter()) {
                    prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
                }
            }
        }
    }
}
