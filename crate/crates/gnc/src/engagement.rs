//! Engagement scenario generation: initial-condition sampling, collision
//! triangle lead geometry, heading-error perturbation, target maneuver
//! schedules, and path-constraint evaluation.
//!
//! Scenarios live in the engagement frame (z up). The target is placed along
//! the +x azimuth at the sampled range and elevation; its velocity is drawn
//! within a cone around the target-to-missile direction (skewed head-on
//! geometry).

use nalgebra::{UnitQuaternion, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::aero::AeroPerturbation;
use crate::dynamics::TargetState;
use crate::error::{GncError, Result};
use crate::frames::orthogonal_unit;
use crate::sensors::RadomeParams;

/// Sampling bounds for one engagement ensemble. Angles in degrees, distances
/// in meters, speeds in m/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioBounds {
    pub range: [f64; 2],
    pub elevation_deg: [f64; 2],
    pub missile_speed: [f64; 2],
    pub target_speed: [f64; 2],
    /// Half apex angle of the target-velocity cone about the line of sight.
    pub cone_half_angle_deg: f64,
    pub heading_error_deg: [f64; 2],
    pub alpha0_deg: [f64; 2],
    pub beta0_deg: [f64; 2],
    pub roll0_deg: [f64; 2],
    /// Target maximum acceleration capability (m/s²) before dynamic-pressure
    /// scaling; zero disables maneuvers.
    pub target_accel_max: f64,
    pub bang_duration: [f64; 2],
    pub bang_start: [f64; 2],
    pub weave_period: [f64; 2],
    pub weave_offset: [f64; 2],
    /// Missile initial altitude range (m).
    pub missile_altitude: [f64; 2],
    /// Target speed that defines the sea-level reference dynamic pressure for
    /// maneuver-acceleration scaling.
    pub target_speed_ref: f64,
}

impl Default for ScenarioBounds {
    fn default() -> Self {
        ScenarioBounds {
            range: [5000.0, 10000.0],
            elevation_deg: [-30.0, 30.0],
            missile_speed: [800.0, 1000.0],
            target_speed: [250.0, 600.0],
            cone_half_angle_deg: 45.0,
            heading_error_deg: [0.0, 5.0],
            alpha0_deg: [-10.0, 10.0],
            beta0_deg: [-5.0, 5.0],
            roll0_deg: [-30.0, 30.0],
            target_accel_max: 10.0 * 9.81,
            bang_duration: [1.0, 8.0],
            bang_start: [0.0, 6.0],
            weave_period: [1.0, 8.0],
            weave_offset: [1.0, 5.0],
            missile_altitude: [2000.0, 15000.0],
            target_speed_ref: 600.0,
        }
    }
}

fn uniform<R: Rng>(rng: &mut R, bounds: [f64; 2]) -> f64 {
    if bounds[0] == bounds[1] {
        bounds[0]
    } else {
        rng.random_range(bounds[0]..bounds[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManeuverKind {
    BangBang,
    Weave,
}

/// Target evasive maneuver schedule. Acceleration is always applied within
/// the maneuver plane, orthogonal to the current target velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct ManeuverSchedule {
    pub kind: ManeuverKind,
    /// Commanded acceleration magnitude (m/s²).
    pub accel: f64,
    /// Bang-bang initiation time (s).
    pub start: f64,
    /// Bang-bang switching interval (s).
    pub duration: f64,
    /// Weave period (s).
    pub period: f64,
    /// Weave phase offset (s).
    pub offset: f64,
    /// Maneuver plane normal (unit), fixed at sampling time.
    pub plane_normal: Vector3<f64>,
    /// Reference speed defining the sea-level maximum dynamic pressure.
    pub speed_ref: f64,
}

impl ManeuverSchedule {
    /// Non-maneuvering placeholder.
    pub fn none() -> Self {
        ManeuverSchedule {
            kind: ManeuverKind::BangBang,
            accel: 0.0,
            start: 0.0,
            duration: 1.0,
            period: 1.0,
            offset: 0.0,
            plane_normal: Vector3::z(),
            speed_ref: 600.0,
        }
    }

    /// Signed commanded magnitude at time `t`.
    pub fn commanded(&self, t: f64) -> f64 {
        match self.kind {
            ManeuverKind::BangBang => {
                if t < self.start {
                    0.0
                } else {
                    let phase = ((t - self.start) / self.duration).floor() as i64;
                    if phase % 2 == 0 {
                        self.accel
                    } else {
                        -self.accel
                    }
                }
            }
            ManeuverKind::Weave => {
                self.accel * (std::f64::consts::TAU * (t - self.offset) / self.period).sin()
            }
        }
    }

    /// Applied acceleration vector at time `t`: the commanded magnitude
    /// clipped to the dynamic-pressure-scaled capability, directed in-plane
    /// orthogonal to the target velocity.
    pub fn accel(&self, target: &TargetState, t: f64, rho: f64, rho0: f64) -> Vector3<f64> {
        if self.accel == 0.0 {
            return Vector3::zeros();
        }
        let speed = target.speed();
        if speed <= 0.0 {
            return Vector3::zeros();
        }
        let q0 = 0.5 * rho * speed * speed;
        let q0_max = 0.5 * rho0 * self.speed_ref * self.speed_ref;
        let available = self.accel * (q0 / q0_max).min(1.0);
        let commanded = self.commanded(t);
        let magnitude = commanded.abs().min(available);
        let dir = self.plane_normal.cross(&(target.v / speed));
        let dir_norm = dir.norm();
        if dir_norm < 1e-12 {
            // Velocity drifted onto the plane normal; maneuver degenerates.
            return Vector3::zeros();
        }
        dir / dir_norm * magnitude * commanded.signum()
    }
}

/// Draws a maneuver schedule: kind equiprobable, full capability with
/// probability one half (otherwise uniform in `[0, max]`), all timing
/// parameters uniform in their bounds.
pub fn sample_maneuver<R: Rng>(
    rng: &mut R,
    bounds: &ScenarioBounds,
    v_t0: Vector3<f64>,
) -> ManeuverSchedule {
    let kind = if rng.random::<bool>() { ManeuverKind::BangBang } else { ManeuverKind::Weave };
    let accel = if bounds.target_accel_max == 0.0 || v_t0.norm() < 1e-9 {
        0.0
    } else if rng.random::<f64>() < 0.5 {
        bounds.target_accel_max
    } else {
        rng.random_range(0.0..bounds.target_accel_max)
    };
    let start = uniform(rng, bounds.bang_start);
    let duration = uniform(rng, bounds.bang_duration);
    let period = uniform(rng, bounds.weave_period);
    let offset = uniform(rng, bounds.weave_offset);

    // Random maneuver plane containing the initial velocity.
    let az = rng.random_range(0.0..std::f64::consts::TAU);
    let plane_normal = if v_t0.norm() < 1e-9 {
        Vector3::z()
    } else {
        let e1 = orthogonal_unit(&v_t0);
        let e2 = v_t0.normalize().cross(&e1);
        (e1 * az.cos() + e2 * az.sin()).normalize()
    };

    ManeuverSchedule {
        kind,
        accel,
        start,
        duration,
        period,
        offset,
        plane_normal,
        speed_ref: bounds.target_speed_ref,
    }
}

/// Missile velocity on the collision triangle: the in-plane lead angle whose
/// transverse velocity component matches the target's, at the requested
/// speed.
pub fn lead_velocity(
    r_tm: Vector3<f64>,
    v_t: Vector3<f64>,
    vm_speed: f64,
) -> Result<Vector3<f64>> {
    let range = r_tm.norm();
    if !(range > 0.0) || !(vm_speed > 0.0) {
        return Err(GncError::Config("lead geometry requires positive range and speed".into()));
    }
    let los = r_tm / range;
    let normal = v_t.cross(&los);
    if normal.norm() < 1e-9 * v_t.norm().max(1.0) {
        // Stationary target or velocity collinear with the line of sight:
        // zero lead, fly straight down the LOS.
        return Ok(los * vm_speed);
    }
    let in_plane = normal.normalize().cross(&los); // ⊥ LOS, in the engagement plane
    let transverse = v_t.dot(&in_plane);
    let sin_lead = transverse / vm_speed;
    if sin_lead.abs() > 1.0 {
        return Err(GncError::OutOfEnvelope(format!(
            "collision triangle infeasible: required transverse speed {transverse} exceeds {vm_speed}"
        )));
    }
    let cos_lead = (1.0 - sin_lead * sin_lead).sqrt();
    Ok((los * cos_lead + in_plane * sin_lead) * vm_speed)
}

/// Rotates `v` by an angle drawn uniformly in `[0, he_max]` about a uniformly
/// random axis orthogonal to it; magnitude is preserved.
pub fn apply_heading_error<R: Rng>(v: Vector3<f64>, he_max: f64, rng: &mut R) -> Vector3<f64> {
    debug_assert!(he_max >= 0.0);
    if he_max == 0.0 {
        return v;
    }
    let he = rng.random_range(0.0..he_max);
    let az = rng.random_range(0.0..std::f64::consts::TAU);
    let speed = v.norm();
    let dir = v / speed;
    let e1 = orthogonal_unit(&v);
    let e2 = dir.cross(&e1);
    (dir * he.cos() + (e1 * az.cos() + e2 * az.sin()) * he.sin()) * speed
}

/// Everything random about one episode's engagement geometry and target.
#[derive(Debug, Clone)]
pub struct EngagementScenario {
    pub missile_r: Vector3<f64>,
    /// Missile velocity (engagement frame) after lead and heading error.
    pub missile_v: Vector3<f64>,
    pub target: TargetState,
    pub alpha0: f64,
    pub beta0: f64,
    pub roll0: f64,
    pub heading_error: f64,
    pub maneuver: ManeuverSchedule,
    pub radome: RadomeParams,
    pub perturb: AeroPerturbation,
}

/// Samples a scenario; radome and aero perturbations are drawn by the caller
/// (they belong to other subsystems' bounds) and injected here.
pub fn sample_scenario<R: Rng>(
    rng: &mut R,
    bounds: &ScenarioBounds,
    radome: RadomeParams,
    perturb: AeroPerturbation,
) -> Result<EngagementScenario> {
    let altitude = uniform(rng, bounds.missile_altitude);
    let range = uniform(rng, bounds.range);

    // Resample elevation until the target stays within the altitude envelope.
    let mut elevation = 0.0;
    let mut target_alt = -1.0;
    for _ in 0..100 {
        elevation = uniform(rng, bounds.elevation_deg).to_radians();
        target_alt = altitude + range * elevation.sin();
        if (100.0..=20_000.0).contains(&target_alt) {
            break;
        }
        target_alt = -1.0;
    }
    if target_alt < 0.0 {
        return Err(GncError::Config("could not place target within the altitude envelope".into()));
    }

    let missile_r = Vector3::new(0.0, 0.0, altitude);
    let r_tm = Vector3::new(range * elevation.cos(), 0.0, range * elevation.sin());
    let target_r = missile_r + r_tm;

    // Target velocity within a cone (uniform over solid angle) about the
    // target-to-missile direction: skewed head-on.
    let target_speed = uniform(rng, bounds.target_speed);
    let cone = bounds.cone_half_angle_deg.to_radians();
    let cos_phi = rng.random_range(cone.cos()..=1.0);
    let phi = cos_phi.clamp(-1.0, 1.0).acos();
    let axis = -r_tm / range;
    let e1 = orthogonal_unit(&axis);
    let e2 = axis.cross(&e1);
    let az = rng.random_range(0.0..std::f64::consts::TAU);
    let target_v = (axis * phi.cos() + (e1 * az.cos() + e2 * az.sin()) * phi.sin()) * target_speed;

    let missile_speed = uniform(rng, bounds.missile_speed);
    let ideal = lead_velocity(r_tm, target_v, missile_speed)?;
    let he_max = uniform(rng, bounds.heading_error_deg).to_radians();
    let missile_v = apply_heading_error(ideal, he_max, rng);

    let alpha0 = uniform(rng, bounds.alpha0_deg).to_radians();
    let beta0 = uniform(rng, bounds.beta0_deg).to_radians();
    let roll0 = uniform(rng, bounds.roll0_deg).to_radians();
    let target = TargetState { r: target_r, v: target_v };
    let maneuver = sample_maneuver(rng, bounds, target_v);

    Ok(EngagementScenario {
        missile_r,
        missile_v,
        target,
        alpha0,
        beta0,
        roll0,
        heading_error: he_max,
        maneuver,
        radome,
        perturb,
    })
}

/// Path constraint limits. Attitude limits apply to 321 Euler angles
/// extracted from the attitude quaternion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathConstraints {
    pub min_speed: f64,
    pub max_pitch_deg: f64,
    pub max_yaw_deg: f64,
    pub max_roll_deg: f64,
    pub max_roll_rate_dps: f64,
    pub max_look_deg: f64,
    pub max_load_g: f64,
}

impl Default for PathConstraints {
    fn default() -> Self {
        PathConstraints {
            min_speed: 400.0,
            max_pitch_deg: 85.0,
            max_yaw_deg: 85.0,
            max_roll_deg: 100.0,
            max_roll_rate_dps: 6.0,
            max_look_deg: 80.0,
            max_load_g: 35.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    MinSpeed,
    Pitch,
    Yaw,
    Roll,
    RollRate,
    LookAngle,
    Load,
}

/// One violated constraint with the offending value and its limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub kind: ConstraintKind,
    pub value: f64,
    pub limit: f64,
}

impl PathConstraints {
    /// Evaluates every constraint; pure and side-effect free.
    pub fn check(
        &self,
        speed: f64,
        attitude: &UnitQuaternion<f64>,
        omega: &Vector3<f64>,
        look_angle: f64,
        lateral_force: f64,
        mass: f64,
    ) -> Vec<Violation> {
        let mut out = Vec::new();
        if speed < self.min_speed {
            out.push(Violation {
                kind: ConstraintKind::MinSpeed,
                value: speed,
                limit: self.min_speed,
            });
        }
        let (roll, pitch, yaw) = attitude.euler_angles();
        if pitch.abs().to_degrees() > self.max_pitch_deg {
            out.push(Violation {
                kind: ConstraintKind::Pitch,
                value: pitch.to_degrees(),
                limit: self.max_pitch_deg,
            });
        }
        if yaw.abs().to_degrees() > self.max_yaw_deg {
            out.push(Violation {
                kind: ConstraintKind::Yaw,
                value: yaw.to_degrees(),
                limit: self.max_yaw_deg,
            });
        }
        if roll.abs().to_degrees() > self.max_roll_deg {
            out.push(Violation {
                kind: ConstraintKind::Roll,
                value: roll.to_degrees(),
                limit: self.max_roll_deg,
            });
        }
        if omega.x.abs().to_degrees() > self.max_roll_rate_dps {
            out.push(Violation {
                kind: ConstraintKind::RollRate,
                value: omega.x.to_degrees(),
                limit: self.max_roll_rate_dps,
            });
        }
        if look_angle.to_degrees() > self.max_look_deg {
            out.push(Violation {
                kind: ConstraintKind::LookAngle,
                value: look_angle.to_degrees(),
                limit: self.max_look_deg,
            });
        }
        let load_g = lateral_force / (mass * crate::frames::G);
        if load_g > self.max_load_g {
            out.push(Violation {
                kind: ConstraintKind::Load,
                value: load_g,
                limit: self.max_load_g,
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stationary_target_lead_is_pure_pursuit() {
        let r_tm = Vector3::new(8000.0, 100.0, -300.0);
        let v = lead_velocity(r_tm, Vector3::zeros(), 900.0).unwrap();
        assert_relative_eq!(v, r_tm.normalize() * 900.0, epsilon = 1e-9);
    }

    /// Straight-line closest approach for two constant-velocity points.
    fn closest_approach(r0: Vector3<f64>, v_rel: Vector3<f64>) -> f64 {
        let t_star = (-r0.dot(&v_rel) / v_rel.norm_squared()).max(0.0);
        (r0 + v_rel * t_star).norm()
    }

    #[test]
    fn lead_velocity_closes_the_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let r_tm = Vector3::new(
                rng.random_range(3000.0..9000.0),
                rng.random_range(-3000.0..3000.0),
                rng.random_range(-3000.0..3000.0),
            );
            let dir = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
            .normalize();
            let v_t = dir * rng.random_range(100.0..600.0);
            let vm = rng.random_range(800.0..1000.0);
            let v_m = lead_velocity(r_tm, v_t, vm).unwrap();
            assert_abs_diff_eq!(v_m.norm(), vm, epsilon = 1e-12 * vm);
            let miss = closest_approach(r_tm, v_t - v_m);
            assert!(miss < 1e-6, "closest approach {miss}");
        }
    }

    #[test]
    fn planar_head_on_matches_transverse_balance() {
        let r_tm = Vector3::new(7000.0, 0.0, 0.0);
        let v_t = Vector3::new(-400.0, 150.0, 0.0);
        let v_m = lead_velocity(r_tm, v_t, 900.0).unwrap();
        // Equal transverse components relative to the LOS line.
        assert_relative_eq!(v_m.y, v_t.y, epsilon = 1e-9);
        assert!(closest_approach(r_tm, v_t - v_m) < 1e-6);
    }

    #[test]
    fn infeasible_lead_is_an_error() {
        let r_tm = Vector3::new(5000.0, 0.0, 0.0);
        let v_t = Vector3::new(0.0, 500.0, 0.0);
        assert!(lead_velocity(r_tm, v_t, 400.0).is_err());
    }

    #[test]
    fn heading_error_angle_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = Vector3::new(800.0, 100.0, -50.0);
        assert_eq!(apply_heading_error(v, 0.0, &mut rng), v);
        for _ in 0..100 {
            let he = 5.0_f64.to_radians();
            let out = apply_heading_error(v, he, &mut rng);
            let angle = (out.dot(&v) / (out.norm() * v.norm())).clamp(-1.0, 1.0).acos();
            assert!(angle <= he + 1e-9);
            assert_relative_eq!(out.norm(), v.norm(), epsilon = 1e-9);
        }
    }

    #[test]
    fn heading_error_azimuth_is_uniform() {
        // Chi-square test on the cone azimuth at the 1% level.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let v = Vector3::new(900.0, 0.0, 0.0);
        let e1 = orthogonal_unit(&v);
        let e2 = v.normalize().cross(&e1);
        let bins = 12;
        let n = 10_000;
        let mut counts = vec![0usize; bins];
        for _ in 0..n {
            let out = apply_heading_error(v, 0.1, &mut rng);
            let az = out.dot(&e2).atan2(out.dot(&e1));
            let idx = (((az + std::f64::consts::PI) / std::f64::consts::TAU) * bins as f64)
                .floor()
                .clamp(0.0, bins as f64 - 1.0) as usize;
            counts[idx] += 1;
        }
        let expected = n as f64 / bins as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 1% critical value for 11 degrees of freedom.
        assert!(chi2 < 24.725, "chi2 {chi2}, counts {counts:?}");
    }

    #[test]
    fn maneuver_kind_frequency_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bounds = ScenarioBounds::default();
        let v_t0 = Vector3::new(-400.0, 50.0, 0.0);
        let n = 10_000;
        let mut bang = 0usize;
        let mut at_max = 0usize;
        for _ in 0..n {
            let m = sample_maneuver(&mut rng, &bounds, v_t0);
            if m.kind == ManeuverKind::BangBang {
                bang += 1;
            }
            assert!(m.accel <= 10.0 * 9.81);
            assert!((1.0..=8.0).contains(&m.duration));
            assert!((0.0..=6.0).contains(&m.start));
            assert!((1.0..=8.0).contains(&m.period));
            assert!((1.0..=5.0).contains(&m.offset));
            if m.accel == 10.0 * 9.81 {
                at_max += 1;
            }
        }
        let f = bang as f64 / n as f64;
        assert!((f - 0.5).abs() < 0.02, "bang-bang frequency {f}");
        let fm = at_max as f64 / n as f64;
        assert!((fm - 0.5).abs() < 0.02, "max-capability frequency {fm}");
    }

    #[test]
    fn long_period_bang_bang_is_a_step() {
        let mut m = ManeuverSchedule::none();
        m.accel = 50.0;
        m.start = 1.0;
        m.duration = 60.0; // longer than any episode
        let values: Vec<f64> = (0..300).map(|i| m.commanded(i as f64 * 0.1)).collect();
        assert!(values[..10].iter().all(|&s| s == 0.0)); // before initiation
        assert!(values[10..].iter().all(|&s| s == 50.0)); // no switch afterwards
    }

    #[test]
    fn bang_bang_alternates_sign() {
        let mut m = ManeuverSchedule::none();
        m.accel = 50.0;
        m.start = 0.0;
        m.duration = 2.0;
        assert_eq!(m.commanded(1.0), 50.0);
        assert_eq!(m.commanded(3.0), -50.0);
        assert_eq!(m.commanded(5.0), 50.0);
    }

    #[test]
    fn target_accel_is_orthogonal_and_scaled() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let bounds = ScenarioBounds::default();
        for _ in 0..200 {
            let v = Vector3::new(
                rng.random_range(-500.0..500.0),
                rng.random_range(-500.0..500.0),
                rng.random_range(-200.0..200.0),
            );
            if v.norm() < 50.0 {
                continue;
            }
            let m = sample_maneuver(&mut rng, &bounds, v);
            let target = TargetState { r: Vector3::zeros(), v };
            let t = rng.random_range(0.0..20.0);
            let rho = crate::dynamics::Atmosphere::at(rng.random_range(0.0..15000.0)).rho;
            let a = m.accel(&target, t, rho, crate::dynamics::RHO0);
            assert!(a.dot(&v).abs() < 1e-9 * a.norm().max(1.0));
            let q0 = 0.5 * rho * v.norm_squared();
            let q0_max = 0.5 * crate::dynamics::RHO0 * 600.0 * 600.0;
            assert!(a.norm() <= m.accel * (q0 / q0_max) + 1e-9);
        }
    }

    #[test]
    fn target_accel_full_at_reference_condition() {
        let mut m = ManeuverSchedule::none();
        m.accel = 98.1;
        m.start = 0.0;
        m.duration = 100.0;
        m.plane_normal = Vector3::z();
        let target = TargetState { r: Vector3::zeros(), v: Vector3::new(600.0, 0.0, 0.0) };
        let a = m.accel(&target, 1.0, crate::dynamics::RHO0, crate::dynamics::RHO0);
        assert_relative_eq!(a.norm(), 98.1, epsilon = 1e-12);

        // 10 km, 300 m/s: hand-checked availability ratio.
        let rho = crate::dynamics::Atmosphere::at(10_000.0).rho;
        let slow = TargetState { r: Vector3::zeros(), v: Vector3::new(300.0, 0.0, 0.0) };
        let a = m.accel(&slow, 1.0, rho, crate::dynamics::RHO0);
        let expected = 98.1 * (rho * 300.0 * 300.0) / (crate::dynamics::RHO0 * 600.0 * 600.0);
        assert_relative_eq!(a.norm(), expected, epsilon = 1e-12);
    }

    #[test]
    fn scenario_fields_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let bounds = ScenarioBounds::default();
        for _ in 0..2000 {
            let s =
                sample_scenario(&mut rng, &bounds, RadomeParams::zero(), AeroPerturbation::zero())
                    .unwrap();
            let r_tm = s.target.r - s.missile_r;
            assert!((5000.0..=10000.0).contains(&r_tm.norm()));
            assert!((2000.0..=15000.0).contains(&s.missile_r.z));
            assert!((100.0..=20000.0).contains(&s.target.r.z));
            assert!((250.0..=600.0).contains(&s.target.speed()));
            assert!((800.0..=1000.0).contains(&s.missile_v.norm()));
            assert!(s.alpha0.abs() <= 10.0_f64.to_radians() + 1e-12);
            assert!(s.beta0.abs() <= 5.0_f64.to_radians() + 1e-12);
            assert!(s.roll0.abs() <= 30.0_f64.to_radians() + 1e-12);
            // Head-on: target velocity within the cone around -LOS.
            let cos_angle = s.target.v.normalize().dot(&(-r_tm.normalize()));
            assert!(cos_angle >= 45.0_f64.to_radians().cos() - 1e-12);
        }
    }

    #[test]
    fn constraint_checker_flags_each_limit() {
        let c = PathConstraints::default();
        let level = UnitQuaternion::identity();
        let nominal = c.check(900.0, &level, &Vector3::zeros(), 0.1, 1000.0, 455.0);
        assert!(nominal.is_empty());

        let slow = c.check(399.0, &level, &Vector3::zeros(), 0.1, 1000.0, 455.0);
        assert_eq!(slow[0].kind, ConstraintKind::MinSpeed);

        let fast_roll = c.check(900.0, &level, &Vector3::new(0.2, 0.0, 0.0), 0.1, 1000.0, 455.0);
        assert_eq!(fast_roll[0].kind, ConstraintKind::RollRate);

        let wide_look =
            c.check(900.0, &level, &Vector3::zeros(), 81.0_f64.to_radians(), 1000.0, 455.0);
        assert_eq!(wide_look[0].kind, ConstraintKind::LookAngle);

        let pitched = UnitQuaternion::from_euler_angles(0.0, 86.0_f64.to_radians(), 0.0);
        let att = c.check(900.0, &pitched, &Vector3::zeros(), 0.1, 1000.0, 455.0);
        assert_eq!(att[0].kind, ConstraintKind::Pitch);

        let loaded = c.check(900.0, &level, &Vector3::zeros(), 0.1, 36.0 * 455.0 * 9.81, 455.0);
        assert_eq!(loaded[0].kind, ConstraintKind::Load);
    }
}
