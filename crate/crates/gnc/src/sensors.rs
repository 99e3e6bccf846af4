//! Seeker, rate gyro, and accelerometer models.
//!
//! The strapdown seeker measures the body-frame line of sight, distorted by a
//! look-angle-dependent radome refraction, then computationally stabilized by
//! rotating with the gyro-integrated attitude change `dq_obs`. Because the
//! gyro carries scale-factor bias and noise, stabilization is imperfect; the
//! residual coupling with radome slope is the parasitic attitude loop.

use nalgebra::{UnitQuaternion, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{RigidBodyState, TargetState};
use crate::error::{GncError, Result};
use crate::frames::{flip_yz, rk4_quat_step};

/// Radome aberration parameters for one episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadomeParams {
    /// Azimuthal aberration amplitude (rad).
    pub a_u: f64,
    /// Elevation aberration amplitude (rad).
    pub a_v: f64,
    /// Azimuthal ripple wavenumber.
    pub k_u: f64,
    /// Elevation ripple wavenumber.
    pub k_v: f64,
}

impl RadomeParams {
    pub fn zero() -> Self {
        RadomeParams { a_u: 0.0, a_v: 0.0, k_u: 1.0, k_v: 1.0 }
    }
}

/// Sampling bounds for [`RadomeParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadomeBounds {
    /// Amplitude magnitude bound (rad); amplitudes are drawn uniformly in
    /// `[-amp, amp]`.
    pub amp: f64,
    pub k_min: f64,
    pub k_max: f64,
}

impl Default for RadomeBounds {
    fn default() -> Self {
        RadomeBounds { amp: 1.0e-2, k_min: 1.0, k_max: 3.0 }
    }
}

impl RadomeBounds {
    pub fn zero() -> Self {
        RadomeBounds { amp: 0.0, k_min: 1.0, k_max: 1.0 }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> RadomeParams {
        let mut uniform = |lo: f64, hi: f64| if lo == hi { lo } else { rng.random_range(lo..hi) };
        RadomeParams {
            a_u: uniform(-self.amp, self.amp),
            a_v: uniform(-self.amp, self.amp),
            k_u: uniform(self.k_min, self.k_max),
            k_v: uniform(self.k_min, self.k_max),
        }
    }
}

/// Azimuthal and elevation refraction errors at one look angle (rad).
pub fn refraction_angles(look_angle: f64, params: &RadomeParams) -> (f64, f64) {
    let ramp = 0.75 * look_angle / std::f64::consts::FRAC_PI_2;
    let theta_u =
        params.a_u * (ramp + 0.25 * (2.0 * std::f64::consts::PI / params.k_u * look_angle).cos());
    let theta_v =
        params.a_v * (ramp + 0.25 * (2.0 * std::f64::consts::PI / params.k_v * look_angle).cos());
    (theta_u, theta_v)
}

/// Applies the radome aberration to a body-frame LOS unit vector: a 321 Euler
/// rotation with yaw `θ_u` and pitch `θ_v` evaluated at the true look angle.
pub fn radome_refract(los_b: &Vector3<f64>, params: &RadomeParams) -> Vector3<f64> {
    debug_assert!((los_b.norm() - 1.0).abs() < 1e-9);
    let look_angle = los_b.x.clamp(-1.0, 1.0).acos();
    let (theta_u, theta_v) = refraction_angles(look_angle, params);
    let rot = UnitQuaternion::from_euler_angles(0.0, theta_v, theta_u);
    rot.transform_vector(los_b).normalize()
}

/// Fixed sensor error magnitudes for an episode ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorErrorParams {
    /// Gyro scale-factor bound.
    pub eps_omega: f64,
    /// Gyro additive noise standard deviation (rad/s).
    pub sigma_omega: f64,
    /// Accelerometer scale-factor bound.
    pub eps_acc: f64,
}

impl Default for SensorErrorParams {
    fn default() -> Self {
        SensorErrorParams { eps_omega: 0.001, sigma_omega: 0.001, eps_acc: 0.001 }
    }
}

impl SensorErrorParams {
    pub fn zero() -> Self {
        SensorErrorParams { eps_omega: 0.0, sigma_omega: 0.0, eps_acc: 0.0 }
    }
}

/// Per-episode sensor state: fixed scale factors, the integrated attitude
/// change, and the previous stabilized LOS sample.
#[derive(Debug, Clone)]
pub struct SensorState {
    pub dq_obs: UnitQuaternion<f64>,
    pub lambda_prev: Option<Vector3<f64>>,
    pub gyro_scale: Vector3<f64>,
    pub accel_scale: Vector3<f64>,
    pub sigma_omega: f64,
}

impl SensorState {
    /// Episode-start state: scale factors drawn once, `dq_obs` reset to
    /// identity, no previous LOS sample.
    pub fn sample<R: Rng>(rng: &mut R, params: &SensorErrorParams) -> Self {
        let mut scale = |eps: f64| {
            Vector3::from_fn(|_, _| if eps == 0.0 { 0.0 } else { rng.random_range(-eps..eps) })
        };
        let gyro_scale = scale(params.eps_omega);
        let accel_scale = scale(params.eps_acc);
        SensorState {
            dq_obs: UnitQuaternion::identity(),
            lambda_prev: None,
            gyro_scale,
            accel_scale,
            sigma_omega: params.sigma_omega,
        }
    }

    pub fn ideal() -> Self {
        SensorState {
            dq_obs: UnitQuaternion::identity(),
            lambda_prev: None,
            gyro_scale: Vector3::zeros(),
            accel_scale: Vector3::zeros(),
            sigma_omega: 0.0,
        }
    }

    /// Gyro sample: scale-factor bias fixed for the episode, fresh Gaussian
    /// noise per call.
    pub fn gyro_measure<R: Rng>(&self, omega_gt: Vector3<f64>, rng: &mut R) -> Vector3<f64> {
        let mut out = omega_gt.component_mul(&Vector3::from_fn(|i, _| 1.0 + self.gyro_scale[i]));
        if self.sigma_omega > 0.0 {
            let normal = rand_distr::Normal::new(0.0, self.sigma_omega).expect("valid sigma");
            for i in 0..3 {
                out[i] += rng.sample(normal);
            }
        }
        out
    }

    /// Accelerometer sample: scale-factor corruption only.
    pub fn accel_measure(&self, a_gt_b: Vector3<f64>) -> Vector3<f64> {
        a_gt_b.component_mul(&Vector3::from_fn(|i, _| 1.0 + self.accel_scale[i]))
    }

    /// Advances the integrated attitude change with one RK4 step of the
    /// quaternion kinematics under the held gyro sample.
    pub fn integrate_dq(&mut self, omega_obs: Vector3<f64>, dt: f64) {
        debug_assert!(dt > 0.0);
        self.dq_obs = rk4_quat_step(&self.dq_obs, &omega_obs, dt);
    }
}

/// Seeker outputs at one navigation frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeekerOutput {
    /// Stabilized body-frame LOS unit vector.
    pub lambda_hat: Vector3<f64>,
    /// Surrogate LOS rotation rate (rad/s).
    pub omega_surr: Vector3<f64>,
    /// Closing speed (m/s), positive while closing.
    pub v_c: f64,
    /// Range (m).
    pub range: f64,
    /// Seeker-apparent look angle (rad).
    pub look_angle: f64,
}

/// One navigation-rate seeker frame: ground-truth LOS rotated to the body,
/// refracted, stabilized with `dq_obs`, differenced against the stored
/// previous sample for the surrogate rate.
pub fn seeker_frame(
    state: &RigidBodyState,
    target: &TargetState,
    sensor: &mut SensorState,
    radome: &RadomeParams,
    dt_nav: f64,
) -> Result<SeekerOutput> {
    let r_tm_e = target.r - state.r;
    let range = r_tm_e.norm();
    if !(range > 0.0) {
        return Err(GncError::Fault("seeker frame at zero range".into()));
    }
    let los_b = state.q.inverse_transform_vector(&flip_yz(r_tm_e / range));
    let refracted = radome_refract(&los_b, radome);
    let look_angle = refracted.x.clamp(-1.0, 1.0).acos();

    let v_tm_e = target.v - state.velocity_e();
    let v_tm_b = state.q.inverse_transform_vector(&flip_yz(v_tm_e));
    let v_c = -refracted.dot(&v_tm_b);

    let lambda_hat = sensor.dq_obs.transform_vector(&refracted).normalize();
    let omega_surr = match sensor.lambda_prev {
        Some(prev) => lambda_hat.cross(&prev) / dt_nav,
        None => Vector3::zeros(),
    };
    sensor.lambda_prev = Some(lambda_hat);

    Ok(SeekerOutput { lambda_hat, omega_surr, v_c, range, look_angle })
}
