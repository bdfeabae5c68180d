//! Rotation augmentation: a flight with damage on motor `m` is turned into a
//! flight with damage on motor `m + k` by rotating the body-frame `(x, y)`
//! components of the accelerometer, gyroscope and torque commands about `z`.
//!
//! The rotation angle is taken from the vehicle geometry so that rotor 1's
//! position lands on rotor `1 + k`. Under the default numbering (counter-clockwise
//! seen from above, `z` down) one step is `-2π/n` in the `x → y` sense.
//!
//! A 90° step on a quadrotor also maps a CCW rotor onto a CW one. The yaw
//! channels are left untouched, so yaw signatures keep motor 1's spin sense.

use crate::error::{Error, Result};
use crate::flightlog::{FlightLog, ImuRecord};
use crate::geometry::VehicleGeometry;

fn rotate_xy(v: &mut [f64; 3], cos: f64, sin: f64) {
    let (x, y) = (v[0], v[1]);
    v[0] = cos * x - sin * y;
    v[1] = sin * x + cos * y;
}

pub fn rotate_record(r: &ImuRecord, angle: f64) -> ImuRecord {
    let (sin, cos) = angle.sin_cos();
    let mut out = *r;
    rotate_xy(&mut out.acc, cos, sin);
    rotate_xy(&mut out.gyro, cos, sin);
    rotate_xy(&mut out.torque_cmd, cos, sin);
    out
}

/// Relabels motor `m` as `((m - 1 + k) mod n) + 1`.
pub fn rotate_motor(motor: usize, k: usize, n_rotors: usize) -> usize {
    (motor - 1 + k) % n_rotors + 1
}

/// Rotates a log by `k` rotor steps. The flight id gets a `.rot{k}` suffix.
pub fn rotate_log(log: &FlightLog, k: usize, geom: &VehicleGeometry) -> Result<FlightLog> {
    geom.validate()?;
    let n = geom.n_rotors;
    if k >= n {
        return Err(Error::InvalidInput(format!(
            "rotation step {k} out of range 0..{n}"
        )));
    }
    if let Some(m) = log.label.motor {
        if m == 0 || m > n {
            return Err(Error::InvalidInput(format!(
                "motor {m} does not exist on a {n}-rotor vehicle"
            )));
        }
    }
    let angle = geom.rotation_angle(k);
    let records = if k == 0 {
        log.records.clone()
    } else {
        log.records.iter().map(|r| rotate_record(r, angle)).collect()
    };
    let mut label = log.label;
    label.motor = label.motor.map(|m| rotate_motor(m, k, n));
    Ok(FlightLog {
        records,
        sample_rate_hz: log.sample_rate_hz,
        label,
        flight_id: format!("{}.rot{k}", log.flight_id),
    })
}

/// All `n_rotors` rotations (including the identity) of every log.
pub fn augment_corpus(logs: &[FlightLog], geom: &VehicleGeometry) -> Result<Vec<FlightLog>> {
    let mut out = Vec::with_capacity(logs.len() * geom.n_rotors);
    for log in logs {
        for k in 0..geom.n_rotors {
            out.push(rotate_log(log, k, geom)?);
        }
    }
    Ok(out)
}

/// Like [`augment_corpus`] for logs that each carry their own geometry; all
/// geometries must be identical.
pub fn augment_tagged(logs: &[(FlightLog, VehicleGeometry)]) -> Result<Vec<FlightLog>> {
    let Some((_, first)) = logs.first() else {
        return Ok(Vec::new());
    };
    if logs.iter().any(|(_, g)| g != first) {
        return Err(Error::InvalidInput(
            "cannot augment a corpus with mixed geometries".into(),
        ));
    }
    let plain: Vec<FlightLog> = logs.iter().map(|(l, _)| l.clone()).collect();
    augment_corpus(&plain, first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flightlog::DamageLabel;
    use crate::spectral::{band_energies, power_spectrum};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_log(seed: u64, label: DamageLabel) -> FlightLog {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let recs = (0..222)
            .map(|i| {
                let mut row = [0.0; 11];
                row[0] = i as f64 / 222.0;
                for v in row.iter_mut().skip(1) {
                    *v = rng.gen_range(-5.0..5.0);
                }
                ImuRecord::from_row(&row)
            })
            .collect();
        FlightLog::new(recs, 222.0, label, "f").unwrap()
    }

    fn max_diff(a: &FlightLog, b: &FlightLog) -> f64 {
        a.records
            .iter()
            .zip(&b.records)
            .flat_map(|(x, y)| {
                x.to_row()
                    .into_iter()
                    .zip(y.to_row())
                    .map(|(u, v)| (u - v).abs())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn quarter_turn_moves_x_onto_rotor_two_side() {
        let g = VehicleGeometry::default();
        let r = ImuRecord {
            acc: [1.0, 0.0, -9.8],
            ..Default::default()
        };
        let out = rotate_record(&r, g.rotation_angle(1));
        assert!(out.acc[0].abs() < 1e-15);
        assert!((out.acc[1] + 1.0).abs() < 1e-15);
        assert_eq!(out.acc[2], -9.8);
        // motor 1's position vector lands on motor 2's
        let (x1, y1) = g.rotor_position(0);
        let (x2, y2) = g.rotor_position(1);
        let p = rotate_record(
            &ImuRecord {
                acc: [x1, y1, 0.0],
                ..Default::default()
            },
            g.rotation_angle(1),
        );
        assert!((p.acc[0] - x2).abs() < 1e-12 && (p.acc[1] - y2).abs() < 1e-12);
    }

    #[test]
    fn full_turn_and_labels() {
        let g = VehicleGeometry::default();
        let log = random_log(1, DamageLabel::tip_cut(5.0, 5.0, 1));
        let mut cur = log.clone();
        for _ in 0..4 {
            cur = rotate_log(&cur, 1, &g).unwrap();
        }
        assert!(max_diff(&cur, &log) < 1e-12);
        assert_eq!(cur.label, log.label);
        assert_eq!(rotate_log(&log, 2, &g).unwrap().label.motor, Some(3));
        assert_eq!(rotate_log(&log, 3, &g).unwrap().label.motor, Some(4));
        assert!(rotate_log(&log, 4, &g).is_err());
        let t = rotate_log(&log, 3, &g).unwrap();
        for (a, b) in t.records.iter().zip(&log.records) {
            assert_eq!((a.t, a.acc[2], a.gyro[2], a.torque_cmd[2], a.thrust_cmd),
                       (b.t, b.acc[2], b.gyro[2], b.torque_cmd[2], b.thrust_cmd));
        }
    }

    #[test]
    fn corpus_sizes() {
        let g = VehicleGeometry::default();
        let logs: Vec<FlightLog> = (0..18)
            .map(|i| random_log(i, DamageLabel::tip_cut(5.0, 10.0, 1)))
            .collect();
        assert_eq!(augment_corpus(&logs, &g).unwrap().len(), 72);

        let healthy = augment_corpus(&[random_log(2, DamageLabel::healthy())], &g).unwrap();
        let ids: Vec<&str> = healthy.iter().map(|l| l.flight_id.as_str()).collect();
        assert_eq!(ids, vec!["f.rot0", "f.rot1", "f.rot2", "f.rot3"]);
        assert!(healthy.iter().all(|l| l.label == DamageLabel::healthy()));

        let hex = VehicleGeometry::symmetric(6, 0.3, 0.02);
        assert_eq!(
            augment_corpus(&[random_log(3, DamageLabel::longitudinal(10.0, 1))], &hex)
                .unwrap()
                .len(),
            6
        );
        let mixed = vec![
            (random_log(4, DamageLabel::healthy()), g.clone()),
            (random_log(5, DamageLabel::healthy()), hex),
        ];
        assert!(augment_tagged(&mixed).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn rotation_is_an_isometry_and_a_group(seed in any::<u64>(), a in 0usize..4, b in 0usize..4) {
            let g = VehicleGeometry::default();
            let log = random_log(seed, DamageLabel::tip_cut(10.0, 20.0, 2));
            let ra = rotate_log(&log, a, &g).unwrap();
            for (x, y) in ra.records.iter().zip(&log.records) {
                for (u, v) in [(x.acc, y.acc), (x.gyro, y.gyro), (x.torque_cmd, y.torque_cmd)] {
                    prop_assert!((u[0].hypot(u[1]) - v[0].hypot(v[1])).abs() < 1e-12);
                }
            }
            let rab = rotate_log(&ra, b, &g).unwrap();
            let direct = rotate_log(&log, (a + b) % 4, &g).unwrap();
            prop_assert!(max_diff(&rab, &direct) < 1e-12);
            prop_assert_eq!(rab.label, direct.label);
        }

        #[test]
        fn xy_band_energy_is_preserved(seed in any::<u64>(), k in 1usize..4) {
            let g = VehicleGeometry::default();
            let log = random_log(seed, DamageLabel::healthy());
            let rot = rotate_log(&log, k, &g).unwrap();
            let bands = |l: &FlightLog, f: fn(&ImuRecord) -> f64| {
                let x: Vec<f64> = l.records.iter().map(f).collect();
                band_energies(&power_spectrum(&x).unwrap(), 5).unwrap()
            };
            let pairs: [(fn(&ImuRecord) -> f64, fn(&ImuRecord) -> f64); 3] = [
                (|r| r.acc[0], |r| r.acc[1]),
                (|r| r.gyro[0], |r| r.gyro[1]),
                (|r| r.torque_cmd[0], |r| r.torque_cmd[1]),
            ];
            for (fx, fy) in pairs {
                let (bx, by) = (bands(&log, fx), bands(&log, fy));
                let (rx, ry) = (bands(&rot, fx), bands(&rot, fy));
                for b in 0..bx.len() {
                    let before = bx[b] + by[b];
                    prop_assert!(((rx[b] + ry[b]) - before).abs() <= 1e-9 * before);
                }
            }
            let zs: [fn(&ImuRecord) -> f64; 3] = [|r| r.acc[2], |r| r.gyro[2], |r| r.thrust_cmd];
            for f in zs {
                prop_assert_eq!(bands(&log, f), bands(&rot, f));
            }
        }
    }
}
