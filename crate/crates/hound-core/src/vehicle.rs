//! Shared domain types, frame conventions, and kinematic helpers.
//!
//! Frames: world is Z-up right-handed; body is x-forward, y-left, z-up.
//! Attitude is ZYX Euler (yaw, pitch, roll). Positive steering turns left
//! (positive yaw rate at positive speed). Pitch is positive nose-down, so
//! gravity contributes `+g*sin(theta)` along body x. Roll is stored with the
//! sign that makes `+g*sin(phi)` point downslope along body y: positive roll
//! means the right side of the vehicle sits higher.
//!
//! Body accelerations are specific force (accelerometer convention): at rest
//! on flat ground `A_z = +g`.

use crate::error::{Error, Result};
use crate::kv::KvConfig;
use std::path::Path as FsPath;

/// Standard gravity used by controller-side math that has no parameter set.
pub const GRAVITY: f64 = 9.81;

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = x % two_pi;
    if a <= -std::f64::consts::PI {
        a += two_pi;
    } else if a > std::f64::consts::PI {
        a -= two_pi;
    }
    a
}

/// Geometry, inertia, tire, and actuation limits of the car.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct VehicleParams {
    pub mass_kg: f64,
    /// Wheelbase L_fr = com_to_front + com_to_rear.
    pub wheelbase_m: f64,
    pub com_to_front_m: f64,
    pub com_to_rear_m: f64,
    pub track_width_m: f64,
    pub com_height_m: f64,
    pub yaw_inertia_kgm2: f64,
    pub roll_inertia_kgm2: f64,
    pub steering_max_rad: f64,
    pub steering_rate_rad_s: f64,
    pub wheelspeed_max_m_s: f64,
    pub gravity_m_s2: f64,
}

impl Default for VehicleParams {
    /// Small-car parameter set used everywhere a scenario does not override.
    fn default() -> Self {
        Self {
            mass_kg: 4.0,
            wheelbase_m: 0.246,
            com_to_front_m: 0.123,
            com_to_rear_m: 0.123,
            track_width_m: 0.25,
            com_height_m: 0.139,
            yaw_inertia_kgm2: 0.10,
            roll_inertia_kgm2: 0.03,
            steering_max_rad: 0.38,
            steering_rate_rad_s: 5.24,
            wheelspeed_max_m_s: 23.0,
            gravity_m_s2: GRAVITY,
        }
    }
}

impl VehicleParams {
    /// Big-car variant: lengths x2, mass x8, inertias x32.
    pub fn big_car() -> Self {
        let small = Self::default();
        Self {
            mass_kg: small.mass_kg * 8.0,
            wheelbase_m: small.wheelbase_m * 2.0,
            com_to_front_m: small.com_to_front_m * 2.0,
            com_to_rear_m: small.com_to_rear_m * 2.0,
            track_width_m: small.track_width_m * 2.0,
            com_height_m: small.com_height_m * 2.0,
            yaw_inertia_kgm2: small.yaw_inertia_kgm2 * 32.0,
            roll_inertia_kgm2: small.roll_inertia_kgm2 * 32.0,
            ..small
        }
    }

    /// Static rollover limit RI_L = L_t / (2 H_com).
    pub fn ri_limit(&self) -> f64 {
        self.track_width_m / (2.0 * self.com_height_m)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass_kg", self.mass_kg),
            ("wheelbase_m", self.wheelbase_m),
            ("com_to_front_m", self.com_to_front_m),
            ("com_to_rear_m", self.com_to_rear_m),
            ("track_width_m", self.track_width_m),
            ("com_height_m", self.com_height_m),
            ("yaw_inertia_kgm2", self.yaw_inertia_kgm2),
            ("roll_inertia_kgm2", self.roll_inertia_kgm2),
            ("steering_rate_rad_s", self.steering_rate_rad_s),
            ("wheelspeed_max_m_s", self.wheelspeed_max_m_s),
            ("gravity_m_s2", self.gravity_m_s2),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        let sum = self.com_to_front_m + self.com_to_rear_m;
        if (sum - self.wheelbase_m).abs() > 1e-9 * self.wheelbase_m.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "com_to_front_m + com_to_rear_m = {sum} must equal wheelbase_m = {}",
                self.wheelbase_m
            )));
        }
        if !(self.steering_max_rad > 0.0
            && self.steering_max_rad < std::f64::consts::FRAC_PI_2)
        {
            return Err(Error::InvalidParameter(format!(
                "steering_max_rad must lie in (0, pi/2), got {}",
                self.steering_max_rad
            )));
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvConfig {
        let mut kv = KvConfig::new();
        kv.set("mass_kg", self.mass_kg);
        kv.set("wheelbase_m", self.wheelbase_m);
        kv.set("com_to_front_m", self.com_to_front_m);
        kv.set("com_to_rear_m", self.com_to_rear_m);
        kv.set("track_width_m", self.track_width_m);
        kv.set("com_height_m", self.com_height_m);
        kv.set("yaw_inertia_kgm2", self.yaw_inertia_kgm2);
        kv.set("roll_inertia_kgm2", self.roll_inertia_kgm2);
        kv.set("steering_max_rad", self.steering_max_rad);
        kv.set("steering_rate_rad_s", self.steering_rate_rad_s);
        kv.set("wheelspeed_max_m_s", self.wheelspeed_max_m_s);
        kv.set("gravity_m_s2", self.gravity_m_s2);
        kv
    }

    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let d = Self::default();
        let p = Self {
            mass_kg: kv.f64_or("mass_kg", d.mass_kg)?,
            wheelbase_m: kv.f64_or("wheelbase_m", d.wheelbase_m)?,
            com_to_front_m: kv.f64_or("com_to_front_m", d.com_to_front_m)?,
            com_to_rear_m: kv.f64_or("com_to_rear_m", d.com_to_rear_m)?,
            track_width_m: kv.f64_or("track_width_m", d.track_width_m)?,
            com_height_m: kv.f64_or("com_height_m", d.com_height_m)?,
            yaw_inertia_kgm2: kv.f64_or("yaw_inertia_kgm2", d.yaw_inertia_kgm2)?,
            roll_inertia_kgm2: kv.f64_or("roll_inertia_kgm2", d.roll_inertia_kgm2)?,
            steering_max_rad: kv.f64_or("steering_max_rad", d.steering_max_rad)?,
            steering_rate_rad_s: kv.f64_or("steering_rate_rad_s", d.steering_rate_rad_s)?,
            wheelspeed_max_m_s: kv.f64_or("wheelspeed_max_m_s", d.wheelspeed_max_m_s)?,
            gravity_m_s2: kv.f64_or("gravity_m_s2", d.gravity_m_s2)?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn save(&self, path: &FsPath) -> Result<()> {
        self.to_kv().save(path)
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        Self::from_kv(&KvConfig::load(path)?)
    }
}

/// Full controller state: world pose, attitude, body velocity/acceleration/rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RigidState {
    pub position_world_m: [f64; 3],
    /// Roll, pitch, yaw, each wrapped to (-pi, pi].
    pub rpy_rad: [f64; 3],
    pub vel_body_m_s: [f64; 3],
    /// Specific force: A_z is about +g at rest.
    pub acc_body_m_s2: [f64; 3],
    pub rates_body_rad_s: [f64; 3],
    /// Angle between body z and world z, in [0, pi].
    pub tilt_rad: f64,
}

impl RigidState {
    pub fn new(position_world_m: [f64; 3], rpy_rad: [f64; 3]) -> Self {
        let rpy = [
            wrap_angle(rpy_rad[0]),
            wrap_angle(rpy_rad[1]),
            wrap_angle(rpy_rad[2]),
        ];
        Self {
            position_world_m,
            rpy_rad: rpy,
            tilt_rad: tilt_from_rpy(rpy),
            ..Self::default()
        }
    }
}

/// Steering angle and wheel-speed target, the universal actuator interface.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlCommand {
    pub steering_rad: f64,
    pub wheelspeed_m_s: f64,
}

impl ControlCommand {
    pub fn new(steering_rad: f64, wheelspeed_m_s: f64) -> Self {
        Self { steering_rad, wheelspeed_m_s }
    }

    /// Clamp into the vehicle's physical actuation range (forward-only).
    pub fn clamped(self, params: &VehicleParams) -> Self {
        Self {
            steering_rad: self
                .steering_rad
                .clamp(-params.steering_max_rad, params.steering_max_rad),
            wheelspeed_m_s: self.wheelspeed_m_s.clamp(0.0, params.wheelspeed_max_m_s),
        }
    }
}

/// Transform world-frame roll-pitch-yaw rates into body rates.
///
/// ZYX convention: omega_x = dphi - dpsi*sin(theta), etc. Errors inside the
/// gimbal guard band |theta| >= pi/2 - 1e-3.
pub fn euler_rates_to_body_rates(rpy: [f64; 3], rpy_rates: [f64; 3]) -> Result<[f64; 3]> {
    let (phi, theta) = (rpy[0], rpy[1]);
    if theta.abs() >= std::f64::consts::FRAC_PI_2 - 1e-3 {
        return Err(Error::GimbalProximity { pitch_rad: theta });
    }
    let (dphi, dtheta, dpsi) = (rpy_rates[0], rpy_rates[1], rpy_rates[2]);
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    Ok([
        dphi - dpsi * st,
        dtheta * cp + dpsi * ct * sp,
        -dtheta * sp + dpsi * ct * cp,
    ])
}

/// Inverse of [`euler_rates_to_body_rates`].
pub fn body_rates_to_euler_rates(rpy: [f64; 3], omega: [f64; 3]) -> Result<[f64; 3]> {
    let (phi, theta) = (rpy[0], rpy[1]);
    if theta.abs() >= std::f64::consts::FRAC_PI_2 - 1e-3 {
        return Err(Error::GimbalProximity { pitch_rad: theta });
    }
    let (wx, wy, wz) = (omega[0], omega[1], omega[2]);
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let dpsi = (wy * sp + wz * cp) / ct;
    let dtheta = wy * cp - wz * sp;
    let dphi = wx + dpsi * st;
    Ok([dphi, dtheta, dpsi])
}

/// Tilt angle beta = arccos(cos(phi) * cos(theta)), clamped to [0, pi].
pub fn tilt_from_rpy(rpy: [f64; 3]) -> f64 {
    (rpy[0].cos() * rpy[1].cos()).clamp(-1.0, 1.0).acos()
}

/// Body->world rotation for ZYX Euler angles; returns row-major 3x3.
pub fn rotation_body_to_world(rpy: [f64; 3]) -> [[f64; 3]; 3] {
    let (sp, cp) = rpy[0].sin_cos();
    let (st, ct) = rpy[1].sin_cos();
    let (sy, cy) = rpy[2].sin_cos();
    [
        [cy * ct, cy * st * sp - sy * cp, cy * st * cp + sy * sp],
        [sy * ct, sy * st * sp + cy * cp, sy * st * cp - cy * sp],
        [-st, ct * sp, ct * cp],
    ]
}

/// Ordered 2D waypoints with cumulative arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    waypoints: Vec<[f64; 2]>,
    cumulative_m: Vec<f64>,
}

/// Result of projecting a point onto a [`Path`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathProjection {
    /// Index of the segment containing the foot point.
    pub segment: usize,
    /// Closest point on the path.
    pub point: [f64; 2],
    /// Perpendicular distance from the query to the path.
    pub cross_track_m: f64,
    /// Arc length from the path start to the foot point.
    pub arc_length_m: f64,
    /// Unit tangent of the segment at the foot point.
    pub tangent: [f64; 2],
}

impl Path {
    pub fn new(waypoints: Vec<[f64; 2]>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidParameter(
                "path needs at least 2 waypoints".into(),
            ));
        }
        let mut cumulative_m = Vec::with_capacity(waypoints.len());
        cumulative_m.push(0.0);
        for i in 1..waypoints.len() {
            let dx = waypoints[i][0] - waypoints[i - 1][0];
            let dy = waypoints[i][1] - waypoints[i - 1][1];
            let d = (dx * dx + dy * dy).sqrt();
            if d <= 1e-6 {
                return Err(Error::InvalidParameter(format!(
                    "waypoints {} and {} are coincident",
                    i - 1,
                    i
                )));
            }
            cumulative_m.push(cumulative_m[i - 1] + d);
        }
        Ok(Self { waypoints, cumulative_m })
    }

    pub fn waypoints(&self) -> &[[f64; 2]] {
        &self.waypoints
    }

    pub fn total_length_m(&self) -> f64 {
        *self.cumulative_m.last().unwrap()
    }

    pub fn end(&self) -> [f64; 2] {
        *self.waypoints.last().unwrap()
    }

    /// Closest point on the path to `p`, clamped to the path extent.
    pub fn project(&self, p: [f64; 2]) -> PathProjection {
        let mut best: Option<PathProjection> = None;
        for i in 0..self.waypoints.len() - 1 {
            let a = self.waypoints[i];
            let b = self.waypoints[i + 1];
            let ab = [b[0] - a[0], b[1] - a[1]];
            let len2 = ab[0] * ab[0] + ab[1] * ab[1];
            let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
            let foot = [a[0] + t * ab[0], a[1] + t * ab[1]];
            let d = ((p[0] - foot[0]).powi(2) + (p[1] - foot[1]).powi(2)).sqrt();
            let better = match &best {
                None => true,
                Some(prev) => d < prev.cross_track_m - 1e-12,
            };
            if better {
                let seg_len = len2.sqrt();
                best = Some(PathProjection {
                    segment: i,
                    point: foot,
                    cross_track_m: d,
                    arc_length_m: self.cumulative_m[i] + t * seg_len,
                    tangent: [ab[0] / seg_len, ab[1] / seg_len],
                });
            }
        }
        best.unwrap()
    }

    /// Remaining arc length to the final waypoint plus the perpendicular offset.
    pub fn distance_to_goal(&self, p: [f64; 2]) -> f64 {
        let proj = self.project(p);
        (self.total_length_m() - proj.arc_length_m) + proj.cross_track_m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn ri_limit_matches_track_over_twice_height() {
        let p = VehicleParams::default();
        assert_relative_eq!(p.ri_limit(), 0.25 / (2.0 * 0.139), epsilon = 1e-15);
        assert!(p.ri_limit() > 0.88 && p.ri_limit() < 0.92);
    }

    #[test]
    fn default_and_big_params_validate() {
        VehicleParams::default().validate().unwrap();
        VehicleParams::big_car().validate().unwrap();
        let big = VehicleParams::big_car();
        assert_relative_eq!(big.mass_kg, 32.0);
        assert_relative_eq!(big.wheelbase_m, 0.492);
    }

    #[test]
    fn validation_rejects_inconsistent_wheelbase() {
        let p = VehicleParams { com_to_front_m: 0.2, ..VehicleParams::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn params_kv_round_trip() {
        let p = VehicleParams::big_car();
        let text = p.to_kv().to_text();
        let q = VehicleParams::from_kv(&KvConfig::parse(&text).unwrap()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn euler_rates_identity_at_zero_attitude() {
        let w = euler_rates_to_body_rates([0.0; 3], [0.1, 0.2, 0.3]).unwrap();
        assert_relative_eq!(w[0], 0.1, epsilon = 1e-15);
        assert_relative_eq!(w[1], 0.2, epsilon = 1e-15);
        assert_relative_eq!(w[2], 0.3, epsilon = 1e-15);
    }

    #[test]
    fn yaw_only_is_attitude_invariant_about_body_z() {
        for psi in [0.0, 1.0, -2.5] {
            let w = euler_rates_to_body_rates([0.0, 0.0, psi], [0.0, 0.0, 0.7]).unwrap();
            assert_relative_eq!(w[0], 0.0, epsilon = 1e-15);
            assert_relative_eq!(w[1], 0.0, epsilon = 1e-15);
            assert_relative_eq!(w[2], 0.7, epsilon = 1e-15);
        }
    }

    #[test]
    fn gimbal_guard_errors_near_vertical_pitch() {
        let rpy = [0.0, std::f64::consts::FRAC_PI_2 - 1e-4, 0.0];
        assert!(euler_rates_to_body_rates(rpy, [0.1, 0.1, 0.1]).is_err());
    }

    proptest! {
        #[test]
        fn euler_rate_round_trip(
            phi in -1.2f64..1.2,
            theta in -1.0f64..1.0,
            psi in -3.0f64..3.0,
            dphi in -5.0f64..5.0,
            dtheta in -5.0f64..5.0,
            dpsi in -5.0f64..5.0,
        ) {
            let rpy = [phi, theta, psi];
            let rates = [dphi, dtheta, dpsi];
            let w = euler_rates_to_body_rates(rpy, rates).unwrap();
            let back = body_rates_to_euler_rates(rpy, w).unwrap();
            for i in 0..3 {
                prop_assert!((back[i] - rates[i]).abs() < 1e-9);
            }
        }

        #[test]
        fn tilt_is_independent_of_yaw(phi in -1.4f64..1.4, theta in -1.4f64..1.4) {
            let base = tilt_from_rpy([phi, theta, 0.0]);
            for k in 1..8 {
                let psi = k as f64 * 0.7 - 2.4;
                prop_assert!((tilt_from_rpy([phi, theta, psi]) - base).abs() < 1e-12);
            }
        }

        #[test]
        fn wrap_is_idempotent(x in -50.0f64..50.0) {
            let w = wrap_angle(x);
            prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
            prop_assert_eq!(wrap_angle(w), w);
        }
    }

    #[test]
    fn tilt_examples() {
        assert_relative_eq!(tilt_from_rpy([0.0, 0.0, 2.0]), 0.0, epsilon = 1e-15);
        assert_relative_eq!(
            tilt_from_rpy([std::f64::consts::FRAC_PI_2, 0.0, 0.0]),
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-12
        );
        // Direct evaluation of the rotated body-z axis dotted with world z.
        let (phi, theta) = (0.3, 0.4);
        let r = rotation_body_to_world([phi, theta, 1.0]);
        let cos_beta = r[2][2];
        assert_relative_eq!(
            tilt_from_rpy([phi, theta, 1.0]),
            cos_beta.acos(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            tilt_from_rpy([phi, theta, 1.0]),
            (phi.cos() * theta.cos()).acos(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn rigid_state_tilt_consistency() {
        let s = RigidState::new([0.0; 3], [0.2, -0.3, 2.9]);
        assert!((s.tilt_rad.cos() - s.rpy_rad[0].cos() * s.rpy_rad[1].cos()).abs() < 1e-9);
    }

    #[test]
    fn path_projection_and_goal_distance() {
        let path = Path::new(vec![[0.0, 0.0], [10.0, 0.0], [10.0, 5.0]]).unwrap();
        assert_relative_eq!(path.total_length_m(), 15.0);
        let proj = path.project([3.0, 2.0]);
        assert_relative_eq!(proj.cross_track_m, 2.0, epsilon = 1e-12);
        assert_relative_eq!(proj.arc_length_m, 3.0, epsilon = 1e-12);
        assert_relative_eq!(proj.tangent[0], 1.0, epsilon = 1e-12);
        // Beyond the end clamps to the final waypoint.
        let end = path.project([20.0, 20.0]);
        assert_relative_eq!(end.point[0], 10.0, epsilon = 1e-12);
        assert_relative_eq!(end.point[1], 5.0, epsilon = 1e-12);
        assert_relative_eq!(
            path.distance_to_goal([3.0, 2.0]),
            12.0 + 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn path_rejects_degenerate_input() {
        assert!(Path::new(vec![[0.0, 0.0]]).is_err());
        assert!(Path::new(vec![[0.0, 0.0], [0.0, 0.0]]).is_err());
    }

    #[test]
    fn command_clamps_to_physical_range() {
        let p = VehicleParams::default();
        let c = ControlCommand::new(1.0, -3.0).clamped(&p);
        assert_relative_eq!(c.steering_rad, p.steering_max_rad);
        assert_relative_eq!(c.wheelspeed_m_s, 0.0);
    }
}
