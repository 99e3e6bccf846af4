//! Reference frames and attitude utilities.
//!
//! Three frames are used throughout:
//!
//! - **Engagement frame (E)**: inertial, right-handed, z **up**. All vehicle
//!   positions (`r_M`, `r_T`) and inertial velocities live here; altitude is
//!   the z component.
//! - **Nav frame (N)**: inertial, z **down** (NED-style). Related to E by a
//!   180° rotation about x: `v_E = [v_N.x, -v_N.y, -v_N.z]`. Gravity is
//!   `[0, 0, +G]` in N.
//! - **Body frame (B)**: x out the nose, y right, z down. The attitude
//!   quaternion `q` maps body to nav: `v_N = R(q) v_B`.
//!
//! Quaternions are Hamilton, scalar-first `[w, x, y, z]`. The kinematic
//! equation is `q̇ = ½ q ⊗ (0, ω)` with `ω` the body rates, which keeps the
//! body→nav convention exact under right-composition of attitude increments.

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

/// Gravitational acceleration magnitude (m/s²).
pub const G: f64 = 9.81;

/// Engagement ↔ nav frame conversion (involution: applies both ways).
#[inline]
pub fn flip_yz(v: Vector3<f64>) -> Vector3<f64> {
    Vector3::new(v.x, -v.y, -v.z)
}

/// Quaternion kinematics `q̇ = ½ q ⊗ (0, ω)` with body rates `ω`.
#[inline]
pub fn quat_derivative(q: &Quaternion<f64>, omega: &Vector3<f64>) -> Quaternion<f64> {
    let omega_q = Quaternion::new(0.0, omega.x, omega.y, omega.z);
    (q * omega_q) * 0.5
}

/// One classical RK4 step of the quaternion kinematics under constant body
/// rates, renormalized afterwards.
pub fn rk4_quat_step(q: &UnitQuaternion<f64>, omega: &Vector3<f64>, dt: f64) -> UnitQuaternion<f64> {
    let q0 = *q.quaternion();
    let k1 = quat_derivative(&q0, omega);
    let k2 = quat_derivative(&(q0 + k1 * (dt / 2.0)), omega);
    let k3 = quat_derivative(&(q0 + k2 * (dt / 2.0)), omega);
    let k4 = quat_derivative(&(q0 + k3 * dt), omega);
    let q1 = q0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    UnitQuaternion::from_quaternion(q1)
}

/// Attitude whose body x-axis points along `dir` with zero roll
/// (321 Euler construction from the direction's yaw and pitch).
pub fn align_x_to(dir: Vector3<f64>) -> UnitQuaternion<f64> {
    let d = dir.normalize();
    let yaw = d.y.atan2(d.x);
    let pitch = (-d.z).asin().clamp(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
    UnitQuaternion::from_euler_angles(0.0, pitch, yaw)
}

/// Shortest-arc rotation taking `from` onto `to` (both nonzero).
pub fn shortest_arc(from: &Vector3<f64>, to: &Vector3<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::rotation_between(from, to).unwrap_or_else(|| {
        // Antiparallel: rotate 180° about any axis orthogonal to `from`.
        let axis = orthogonal_unit(from);
        UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(axis), std::f64::consts::PI)
    })
}

/// Some unit vector orthogonal to `v`.
pub fn orthogonal_unit(v: &Vector3<f64>) -> Vector3<f64> {
    let candidate = if v.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    (candidate - v * (candidate.dot(v) / v.norm_squared())).normalize()
}

/// 321 Euler angles (roll, pitch, yaw) of an attitude quaternion.
#[inline]
pub fn euler321(q: &UnitQuaternion<f64>) -> (f64, f64, f64) {
    q.euler_angles()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flip_is_involution() {
        let v = Vector3::new(1.0, -2.0, 3.0);
        assert_eq!(flip_yz(flip_yz(v)), v);
    }

    #[test]
    fn rk4_quat_matches_axis_angle() {
        let omega = Vector3::new(0.0, 0.0, 1.3);
        let mut q = UnitQuaternion::identity();
        let dt = 1e-3;
        for _ in 0..1000 {
            q = rk4_quat_step(&q, &omega, dt);
        }
        let expected = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 1.3);
        assert!(q.angle_to(&expected) < 1e-9);
    }

    #[test]
    fn rk4_quat_is_fourth_order() {
        // Halving dt should shrink the angle error by ~16x.
        let omega = Vector3::new(0.4, -0.8, 1.1);
        let angle = omega.norm();
        let axis = nalgebra::Unit::new_normalize(omega);
        let exact = UnitQuaternion::from_axis_angle(&axis, angle);
        let mut errors = Vec::new();
        for n in [8usize, 16, 32, 64] {
            let dt = 1.0 / n as f64;
            let mut q = UnitQuaternion::identity();
            for _ in 0..n {
                q = rk4_quat_step(&q, &omega, dt);
            }
            errors.push(q.angle_to(&exact));
        }
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 3.5 && order < 4.5, "order {order}");
        }
    }

    #[test]
    fn align_x_points_along_direction() {
        let dir = Vector3::new(0.3, -0.9, 0.4);
        let q = align_x_to(dir);
        let x = q.transform_vector(&Vector3::x());
        assert_relative_eq!(x.dot(&dir.normalize()), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn shortest_arc_handles_antiparallel() {
        let a = Vector3::new(1.0, 0.0, 0.0);
        let b = Vector3::new(-1.0, 0.0, 0.0);
        let q = shortest_arc(&a, &b);
        assert_relative_eq!(q.transform_vector(&a).dot(&b), 1.0, epsilon = 1e-12);
    }
}
