//! File helpers: atomic writes, provenance blocks and feature-matrix CSVs.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::flightlog::{DamageKind, DamageLabel};
use crate::spectral::FeatureSchema;

/// Writes to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let name = path
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::InvalidInput(format!("bad output path {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
}

impl Provenance {
    pub fn new(config_hash: impl Into<String>, seeds: Vec<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash.into(),
            seeds,
        }
    }

    /// `# key=value` comment line placed at the top of CSV outputs.
    pub fn csv_comment(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        format!(
            "# {} {} config={} seeds={}",
            self.tool,
            self.version,
            self.config_hash,
            seeds.join(";")
        )
    }
}

/// One row of a persisted feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub flight_id: String,
    pub start_index: usize,
    pub label: DamageLabel,
    pub values: Vec<f64>,
}

const META_COLS: [&str; 6] = ["flight_id", "start_index", "kind", "cut1_mm", "cut2_mm", "motor"];

fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

/// Feature matrix CSV: metadata columns then one column per feature, 17 significant digits.
pub fn write_feature_csv<W: Write>(
    mut w: W,
    schema: &FeatureSchema,
    rows: &[FeatureRow],
    provenance: Option<&Provenance>,
) -> Result<()> {
    if let Some(p) = provenance {
        writeln!(w, "{}", p.csv_comment())?;
    }
    let mut header: Vec<String> = META_COLS.iter().map(|s| s.to_string()).collect();
    header.extend(schema.feature_names());
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        if r.values.len() != schema.len() {
            return Err(Error::DimensionMismatch {
                expected: schema.len(),
                got: r.values.len(),
            });
        }
        let (kind, (c1, c2)) = match r.label.kind {
            DamageKind::Healthy => ("healthy", (0.0, 0.0)),
            DamageKind::TipCut { .. } => ("tipcut", r.label.cuts_mm()),
            DamageKind::Longitudinal { .. } => ("longitudinal", r.label.cuts_mm()),
        };
        let motor = r.label.motor.map(|m| m.to_string()).unwrap_or_default();
        let mut line = format!("{},{},{kind},{c1},{c2},{motor}", r.flight_id, r.start_index);
        for v in &r.values {
            line.push(',');
            line.push_str(&fmt_full(*v));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_feature_csv(text: &str) -> Result<(FeatureSchema, Vec<FeatureRow>)> {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let mut rdr = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.len() < META_COLS.len() + 1 || headers.iter().take(6).ne(META_COLS.iter().copied()) {
        return Err(Error::Parse {
            row: 0,
            msg: "not a feature matrix header".into(),
        });
    }
    let n_features = headers.len() - META_COLS.len();
    let schema = FeatureSchema::from_feature_count(n_features).ok_or_else(|| Error::Parse {
        row: 0,
        msg: format!("{n_features} feature columns match no band width"),
    })?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let num = |idx: usize| -> Result<f64> {
            rec[idx].parse::<f64>().map_err(|_| Error::Parse {
                row,
                msg: format!("non-numeric cell '{}'", &rec[idx]),
            })
        };
        let c1 = num(3)?;
        let c2 = num(4)?;
        let motor = if rec[5].is_empty() {
            None
        } else {
            Some(rec[5].parse::<usize>().map_err(|_| Error::Parse {
                row,
                msg: "bad motor".into(),
            })?)
        };
        let kind = match &rec[2] {
            "healthy" => DamageKind::Healthy,
            "tipcut" => DamageKind::TipCut {
                cut1_mm: c1,
                cut2_mm: c2,
            },
            "longitudinal" => DamageKind::Longitudinal { depth_mm: c1 },
            other => {
                return Err(Error::Parse {
                    row,
                    msg: format!("unknown kind '{other}'"),
                })
            }
        };
        let values = (META_COLS.len()..headers.len())
            .map(num)
            .collect::<Result<Vec<f64>>>()?;
        rows.push(FeatureRow {
            flight_id: rec[0].to_string(),
            start_index: rec[1].parse().map_err(|_| Error::Parse {
                row,
                msg: "bad start_index".into(),
            })?,
            label: DamageLabel { kind, motor },
            values,
        });
    }
    Ok((schema, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_csv_is_bit_exact() {
        let schema = FeatureSchema::new(10).unwrap();
        let rows = vec![
            FeatureRow {
                flight_id: "a.rot1".into(),
                start_index: 32,
                label: DamageLabel::tip_cut(10.0, 15.0, 2),
                values: (0..schema.len()).map(|i| (i as f64).sqrt() * 1e-7 + 1.0 / 3.0).collect(),
            },
            FeatureRow {
                flight_id: "h".into(),
                start_index: 0,
                label: DamageLabel::healthy(),
                values: vec![f64::MIN_POSITIVE; schema.len()],
            },
        ];
        let mut buf = Vec::new();
        let prov = Provenance::new("abc", vec![1, 2]);
        write_feature_csv(&mut buf, &schema, &rows, Some(&prov)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let (s2, back) = read_feature_csv(&text).unwrap();
        assert_eq!(s2, schema);
        assert_eq!(back, rows);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
