//! Vehicle geometry, rotor numbering and the force-to-torque allocation map.
//!
//! Body frame: `x` to the nose, `y` to the right, `z` down. Rotor azimuths are
//! measured counter-clockwise *as seen from above*, starting at `+x`, so motor 1
//! of the default X-quad (front-right) sits at `-π/4` and the numbering proceeds
//! front-left, rear-left, rear-right. A rotor at azimuth `a` is located at
//! `(l·cos a, -l·sin a)` in body coordinates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rotation sense of a rotor seen from above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinDir {
    Cw,
    Ccw,
}

impl SpinDir {
    /// Sign of the reaction torque about body `+z` (down).
    pub fn yaw_sign(self) -> f64 {
        match self {
            SpinDir::Ccw => 1.0,
            SpinDir::Cw => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            SpinDir::Cw => SpinDir::Ccw,
            SpinDir::Ccw => SpinDir::Cw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleGeometry {
    pub n_rotors: usize,
    pub arm_length_m: f64,
    pub torque_const: f64,
    pub rotor_angles_rad: Vec<f64>,
    pub spin_dirs: Vec<SpinDir>,
}

impl Default for VehicleGeometry {
    fn default() -> Self {
        Self::quad_x(0.225, 0.02)
    }
}

impl VehicleGeometry {
    /// Symmetric X-configuration quadrotor, motor 1 front-right.
    pub fn quad_x(arm_length_m: f64, torque_const: f64) -> Self {
        Self::symmetric(4, arm_length_m, torque_const)
    }

    /// `n` equally spaced rotors with alternating spin, motor 1 at `-π/n`.
    pub fn symmetric(n_rotors: usize, arm_length_m: f64, torque_const: f64) -> Self {
        let step = 2.0 * PI / n_rotors.max(1) as f64;
        let first = -PI / n_rotors.max(1) as f64;
        let rotor_angles_rad = (0..n_rotors).map(|i| first + i as f64 * step).collect();
        let spin_dirs = (0..n_rotors)
            .map(|i| if i % 2 == 0 { SpinDir::Ccw } else { SpinDir::Cw })
            .collect();
        Self {
            n_rotors,
            arm_length_m,
            torque_const,
            rotor_angles_rad,
            spin_dirs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rotors < 3 {
            return Err(Error::InvalidGeometry(format!(
                "need at least 3 rotors, got {}",
                self.n_rotors
            )));
        }
        if self.rotor_angles_rad.len() != self.n_rotors || self.spin_dirs.len() != self.n_rotors {
            return Err(Error::InvalidGeometry(
                "rotor_angles_rad and spin_dirs must have n_rotors entries".into(),
            ));
        }
        if !(self.arm_length_m.is_finite() && self.arm_length_m > 0.0) {
            return Err(Error::InvalidGeometry("arm length must be positive".into()));
        }
        if !self.torque_const.is_finite() {
            return Err(Error::InvalidGeometry("torque constant must be finite".into()));
        }
        // strictly increasing modulo 2π: the successive CCW gaps add up to one turn
        let mut total = 0.0;
        for i in 0..self.n_rotors {
            let a = self.rotor_angles_rad[i];
            let b = self.rotor_angles_rad[(i + 1) % self.n_rotors];
            if !a.is_finite() {
                return Err(Error::InvalidGeometry("non-finite rotor angle".into()));
            }
            let gap = (b - a).rem_euclid(2.0 * PI);
            if gap <= 0.0 {
                return Err(Error::InvalidGeometry("coincident rotor angles".into()));
            }
            total += gap;
        }
        if (total - 2.0 * PI).abs() > 1e-9 {
            return Err(Error::InvalidGeometry(
                "rotor angles are not increasing counter-clockwise".into(),
            ));
        }
        for i in 0..self.n_rotors {
            let next = self.spin_dirs[(i + 1) % self.n_rotors];
            if self.spin_dirs[i] == next && (self.n_rotors.is_multiple_of(2) || i + 1 < self.n_rotors) {
                return Err(Error::InvalidGeometry(format!(
                    "rotors {} and {} spin in the same direction",
                    i + 1,
                    (i + 1) % self.n_rotors + 1
                )));
            }
        }
        Ok(())
    }

    /// Body-frame `(x, y)` position of rotor `index` (0-based).
    pub fn rotor_position(&self, index: usize) -> (f64, f64) {
        let a = self.rotor_angles_rad[index];
        (self.arm_length_m * a.cos(), -self.arm_length_m * a.sin())
    }

    /// Unit `(q_x, q_y)` direction of the roll/pitch torque produced by rotor `index`.
    pub fn roll_pitch_direction(&self, index: usize) -> (f64, f64) {
        let (x, y) = self.rotor_position(index);
        let norm = x.hypot(y);
        (-y / norm, x / norm)
    }

    /// Angle, in the body `x → y` sense, of the planar rotation that carries
    /// rotor 1 onto rotor `1 + k`.
    pub fn rotation_angle(&self, k: usize) -> f64 {
        let (x0, y0) = self.rotor_position(0);
        let (xk, yk) = self.rotor_position(k % self.n_rotors);
        let a0 = y0.atan2(x0);
        let ak = yk.atan2(xk);
        ak - a0
    }
}

/// Row-major 4×n map from rotor forces to `[q_x, q_y, q_z, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationMatrix {
    pub rows: [Vec<f64>; 4],
}

impl AllocationMatrix {
    pub fn n_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn apply(&self, forces: &[f64]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().zip(forces).map(|(a, f)| a * f).sum();
        }
        out
    }
}

/// Torques about x, y, z follow `r × F` for a force along `-z`; the yaw row carries
/// `±k_t` by spin direction and the thrust row is `-1` (forces point along `-z`).
pub fn allocation_matrix(geom: &VehicleGeometry) -> Result<AllocationMatrix> {
    geom.validate()?;
    let n = geom.n_rotors;
    let mut rows: [Vec<f64>; 4] = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![-1.0; n]];
    for i in 0..n {
        let (x, y) = geom.rotor_position(i);
        rows[0][i] = -y;
        rows[1][i] = x;
        rows[2][i] = geom.torque_const * geom.spin_dirs[i].yaw_sign();
    }
    Ok(AllocationMatrix { rows })
}

/// Body torques `(q_x, q_y, q_z)` and thrust `T` for the given rotor forces.
pub fn mix_forces(geom: &VehicleGeometry, forces: &[f64]) -> Result<([f64; 3], f64)> {
    let a = allocation_matrix(geom)?;
    if forces.len() != geom.n_rotors {
        return Err(Error::DimensionMismatch {
            expected: geom.n_rotors,
            got: forces.len(),
        });
    }
    if let Some((i, f)) = forces.iter().enumerate().find(|(_, f)| !(**f >= 0.0)) {
        return Err(Error::Domain(format!(
            "rotor {} force {f} is negative or not finite",
            i + 1
        )));
    }
    let v = a.apply(forces);
    Ok(([v[0], v[1], v[2]], v[3]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad() -> VehicleGeometry {
        VehicleGeometry::quad_x(0.225, 0.02)
    }

    #[test]
    fn yaw_row_alternates() {
        let a = allocation_matrix(&quad()).unwrap();
        assert_eq!(a.rows[2], vec![0.02, -0.02, 0.02, -0.02]);
        assert_eq!(a.rows[3], vec![-1.0; 4]);
    }

    #[test]
    fn roll_pitch_rows_match_x_quad_sign_pattern() {
        let a = allocation_matrix(&quad()).unwrap();
        let c = 0.225 * (PI / 4.0).cos();
        let qx = [-c, c, c, -c];
        let qy = [c, c, -c, -c];
        for i in 0..4 {
            assert!((a.rows[0][i] - qx[i]).abs() < 1e-12);
            assert!((a.rows[1][i] - qy[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_forces_cancel_torques() {
        let (q, t) = mix_forces(&quad(), &[1.0; 4]).unwrap();
        for v in q {
            assert!(v.abs() < 1e-15);
        }
        assert_eq!(t, -4.0);
        let (q, t) = mix_forces(&quad(), &[0.0; 4]).unwrap();
        assert_eq!((q, t), ([0.0; 3], 0.0));
    }

    #[test]
    fn opposite_rotors_negate_roll_pitch() {
        let g = quad();
        let (q1, t1) = mix_forces(&g, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let (q3, t3) = mix_forces(&g, &[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!((q1[0] + q3[0]).abs() < 1e-15);
        assert!((q1[1] + q3[1]).abs() < 1e-15);
        assert_eq!(q1[2], q3[2]);
        assert_eq!(t1, t3);
    }

    #[test]
    fn single_heavy_rotor_signs_follow_motor_one_position() {
        // motor 1 front-right: extra lift rolls left (-q_x) and pitches nose up (+q_y)
        let (q, t) = mix_forces(&quad(), &[2.0, 1.0, 1.0, 1.0]).unwrap();
        let c = 0.225 * (PI / 4.0).cos();
        assert!((q[0] + c).abs() < 1e-12);
        assert!((q[1] - c).abs() < 1e-12);
        assert!((q[2] - 0.02).abs() < 1e-12);
        assert_eq!(t, -5.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = VehicleGeometry::symmetric(2, 0.2, 0.02);
        assert!(matches!(allocation_matrix(&g), Err(Error::InvalidGeometry(_))));
        assert!(matches!(
            mix_forces(&quad(), &[1.0, -0.1, 1.0, 1.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            mix_forces(&quad(), &[1.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut g = quad();
        g.spin_dirs[1] = SpinDir::Ccw;
        assert!(g.validate().is_err());
        let mut g = quad();
        g.rotor_angles_rad.swap(1, 2);
        assert!(g.validate().is_err());
    }

    fn rank(rows: &[Vec<f64>]) -> usize {
        let mut m: Vec<Vec<f64>> = rows.to_vec();
        let (r, c) = (m.len(), m[0].len());
        let mut rank = 0;
        for col in 0..c {
            let Some(p) = (rank..r).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            else {
                break;
            };
            if m[p][col].abs() < 1e-12 {
                continue;
            }
            m.swap(rank, p);
            for i in 0..r {
                if i != rank {
                    let f = m[i][col] / m[rank][col];
                    for j in 0..c {
                        m[i][j] -= f * m[rank][j];
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn quad_is_fully_actuated() {
        let a = allocation_matrix(&quad()).unwrap();
        assert_eq!(rank(&a.rows), 4);
    }

    #[test]
    fn shifting_forces_rotates_roll_pitch_and_flips_yaw() {
        let g = quad();
        let step = 2.0 * PI / 4.0;
        for i in 0..4 {
            let mut f = [0.0; 4];
            f[i] = 1.0;
            let mut shifted = [0.0; 4];
            shifted[(i + 1) % 4] = 1.0;
            let (q, _) = mix_forces(&g, &f).unwrap();
            let (qs, _) = mix_forces(&g, &shifted).unwrap();
            // one CCW rotor step turns (q_x, q_y) by -step in the x→y sense
            let (s, c) = (-step).sin_cos();
            let rx = c * q[0] - s * q[1];
            let ry = s * q[0] + c * q[1];
            assert!((rx - qs[0]).abs() < 1e-12 && (ry - qs[1]).abs() < 1e-12);
            assert!((q[2] + qs[2]).abs() < 1e-15);
        }
    }

    #[test]
    fn rotation_angle_of_default_quad() {
        let g = quad();
        assert!((g.rotation_angle(1) + PI / 2.0).abs() < 1e-12);
        assert!(g.rotation_angle(0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn mix_is_linear(
            f in proptest::collection::vec(0.0f64..10.0, 4),
            h in proptest::collection::vec(0.0f64..10.0, 4),
            a in 0.0f64..3.0,
            b in 0.0f64..3.0,
        ) {
            let g = quad();
            let comb: Vec<f64> = f.iter().zip(&h).map(|(x, y)| a * x + b * y).collect();
            let (qf, tf) = mix_forces(&g, &f).unwrap();
            let (qh, th) = mix_forces(&g, &h).unwrap();
            let (qc, tc) = mix_forces(&g, &comb).unwrap();
            for k in 0..3 {
                prop_assert!((qc[k] - (a * qf[k] + b * qh[k])).abs() < 1e-12);
            }
            prop_assert!((tc - (a * tf + b * th)).abs() < 1e-12);
        }
    }
}
