//! Rigid-body and target equations of motion with dual-rate RK4 integration,
//! plus the exponential atmosphere and wind-angle utilities.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};

use crate::actuation::{ActuatorMode, ActuatorState, FinTrajectory};
use crate::aero::{aero_loads, AeroPerturbation, MissileGeometry};
use crate::error::{GncError, Result};
use crate::frames::{flip_yz, quat_derivative, G};

/// Sea-level density (kg/m³).
pub const RHO0: f64 = 1.225;
/// Density scale height (m).
pub const H_SCALE: f64 = 7018.003_44;
/// Sea-level temperature (K), linear lapse 6.5 K/km up to 11 km, isothermal above.
const T0: f64 = 288.15;
const LAPSE: f64 = 0.0065;
const T_TROPOPAUSE: f64 = 216.65;
const H_TROPOPAUSE: f64 = 11_000.0;
const GAMMA_R: f64 = 1.4 * 287.053;

/// Coarse integration step used while the range exceeds [`FINE_RANGE`] (s).
pub const DT_COARSE: f64 = 0.02;
/// Fine integration step for terminal homing (s).
pub const DT_FINE: f64 = 2.0e-4;
/// Range at and below which the fine step is used (m).
pub const FINE_RANGE: f64 = 160.0;

/// Integration step as a function of range to go; the boundary itself is
/// assigned to the fine regime.
#[inline]
pub fn select_timestep(range: f64) -> f64 {
    debug_assert!(range >= 0.0);
    if range > FINE_RANGE {
        DT_COARSE
    } else {
        DT_FINE
    }
}

/// Atmosphere sample at one altitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atmosphere {
    pub rho: f64,
    pub speed_of_sound: f64,
    /// Set when the requested altitude was negative and clamped to zero.
    pub clamped: bool,
}

impl Atmosphere {
    pub fn at(altitude: f64) -> Atmosphere {
        let clamped = altitude < 0.0;
        let h = altitude.max(0.0);
        let rho = RHO0 * (-h / H_SCALE).exp();
        let temp = if h <= H_TROPOPAUSE { T0 - LAPSE * h } else { T_TROPOPAUSE };
        Atmosphere { rho, speed_of_sound: (GAMMA_R * temp).sqrt(), clamped }
    }

    #[inline]
    pub fn mach(&self, speed: f64) -> f64 {
        speed / self.speed_of_sound
    }

    #[inline]
    pub fn q_dyn(&self, speed: f64) -> f64 {
        0.5 * self.rho * speed * speed
    }
}

/// Angle of attack and sideslip from a body-frame velocity.
pub fn wind_angles(v_b: &Vector3<f64>) -> Result<(f64, f64)> {
    let speed = v_b.norm();
    if !(speed > 0.0) {
        return Err(GncError::Fault("wind angles undefined at zero speed".into()));
    }
    Ok((v_b.z.atan2(v_b.x), (v_b.y / speed).asin()))
}

/// Body-frame velocity with the given speed, angle of attack, and sideslip.
pub fn velocity_from_wind_angles(speed: f64, alpha: f64, beta: f64) -> Vector3<f64> {
    Vector3::new(
        speed * alpha.cos() * beta.cos(),
        speed * beta.sin(),
        speed * alpha.sin() * beta.cos(),
    )
}

/// Missile rigid-body state. Position is in the engagement frame (z up);
/// velocity is body-frame; `q` maps body to the nav frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidBodyState {
    pub r: Vector3<f64>,
    pub v_b: Vector3<f64>,
    pub q: UnitQuaternion<f64>,
    pub omega: Vector3<f64>,
    pub act: ActuatorState,
}

impl RigidBodyState {
    pub fn speed(&self) -> f64 {
        self.v_b.norm()
    }

    pub fn altitude(&self) -> f64 {
        self.r.z
    }

    /// Inertial velocity in the engagement frame.
    pub fn velocity_e(&self) -> Vector3<f64> {
        flip_yz(self.q.transform_vector(&self.v_b))
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().all(|v| v.is_finite())
            && self.v_b.iter().all(|v| v.is_finite())
            && self.q.coords.iter().all(|v| v.is_finite())
            && self.omega.iter().all(|v| v.is_finite())
            && self.act.fins.iter().chain(self.act.rates.iter()).all(|v| v.is_finite())
    }
}

/// Point-mass target: engagement-frame position and velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub r: Vector3<f64>,
    pub v: Vector3<f64>,
}

impl TargetState {
    pub fn speed(&self) -> f64 {
        self.v.norm()
    }
}

/// Time derivatives of the integrable missile and target states.
#[derive(Debug, Clone)]
pub struct SimDeriv {
    pub r_dot: Vector3<f64>,
    pub v_b_dot: Vector3<f64>,
    pub q_dot: Quaternion<f64>,
    pub omega_dot: Vector3<f64>,
    pub r_t_dot: Vector3<f64>,
    pub v_t_dot: Vector3<f64>,
}

impl SimDeriv {
    fn is_finite(&self) -> bool {
        self.r_dot.iter().all(|v| v.is_finite())
            && self.v_b_dot.iter().all(|v| v.is_finite())
            && self.q_dot.coords.iter().all(|v| v.is_finite())
            && self.omega_dot.iter().all(|v| v.is_finite())
            && self.r_t_dot.iter().all(|v| v.is_finite())
            && self.v_t_dot.iter().all(|v| v.is_finite())
    }
}

/// Everything fixed within one episode that the equations of motion need.
#[derive(Debug, Clone)]
pub struct MissileModel {
    pub geom: MissileGeometry,
    pub perturb: AeroPerturbation,
    pub inertia: Matrix3<f64>,
    pub inertia_inv: Matrix3<f64>,
    pub act_mode: ActuatorMode,
    /// Envelope guard: effective Mach never drops below this inside episode
    /// integration (the minimum-speed termination fires first in practice).
    pub mach_floor: f64,
    /// Disables aerodynamic loads entirely (ballistic test trajectories).
    pub aero_enabled: bool,
}

impl MissileModel {
    pub fn new(geom: MissileGeometry, perturb: AeroPerturbation, act_mode: ActuatorMode) -> Result<Self> {
        geom.validate()?;
        let inertia = geom.inertia_tensor();
        let inertia_inv = inertia.try_inverse().ok_or_else(|| GncError::Config("singular inertia tensor".into()))?;
        Ok(MissileModel { geom, perturb, inertia, inertia_inv, act_mode, mach_floor: 1.05, aero_enabled: true })
    }

    /// Body-frame specific force (aero only, N/kg) at the current state; what
    /// an ideal accelerometer reports.
    pub fn specific_force(&self, state: &RigidBodyState) -> Result<Vector3<f64>> {
        let loads = self.loads(state, state.act.fins)?;
        Ok(loads.force / self.geom.mass)
    }

    pub fn loads(&self, state: &RigidBodyState, fins: [f64; 4]) -> Result<crate::aero::AeroLoads> {
        if !self.aero_enabled {
            return Ok(crate::aero::AeroLoads::ZERO);
        }
        let speed = state.speed();
        let (alpha, beta) = wind_angles(&state.v_b)?;
        let atmo = Atmosphere::at(state.altitude());
        let mach = atmo.mach(speed).max(self.mach_floor);
        aero_loads(
            &self.geom,
            &self.perturb,
            atmo.q_dyn(speed),
            alpha,
            beta,
            mach,
            fins,
            state.omega,
            speed,
        )
    }

    /// Missile and target time derivatives; `fins` are the deflections to use
    /// for this evaluation and `a_t` is the (held) target acceleration.
    fn derivatives(
        &self,
        state: &RigidBodyState,
        target: &TargetState,
        fins: [f64; 4],
        a_t: Vector3<f64>,
    ) -> Result<SimDeriv> {
        let loads = self.loads(state, fins)?;
        let q_unit = state.q;

        let omega_dot = self.inertia_inv
            * (-state.omega.cross(&(self.inertia * state.omega)) + loads.torque);
        let q_dot = quat_derivative(q_unit.quaternion(), &state.omega);
        let gravity_b = q_unit.inverse_transform_vector(&Vector3::new(0.0, 0.0, G));
        let v_b_dot = -state.omega.cross(&state.v_b) + loads.force / self.geom.mass + gravity_b;
        let r_dot = flip_yz(q_unit.transform_vector(&state.v_b));

        Ok(SimDeriv {
            r_dot,
            v_b_dot,
            q_dot,
            omega_dot,
            r_t_dot: target.v,
            v_t_dot: a_t,
        })
    }

    /// One classical RK4 step of the coupled missile/target dynamics.
    ///
    /// `fin_cmd` is held for the step; the actuator trajectory is advanced
    /// first (exactly for the first-order lag, with nested fixed substeps for
    /// the second-order model) and sampled at the RK4 stage times. The target
    /// acceleration is held constant across stages, and the target speed is
    /// restored after the step since maneuver acceleration is orthogonal to
    /// its velocity.
    pub fn rk4_step(
        &self,
        state: &RigidBodyState,
        target: &TargetState,
        fin_cmd: [f64; 4],
        a_t: Vector3<f64>,
        dt: f64,
    ) -> Result<(RigidBodyState, TargetState)> {
        debug_assert!(dt > 0.0);
        let traj: FinTrajectory = self.act_mode.advance(&state.act, fin_cmd, dt);

        let eval = |s: &RigidBodyState, t: &TargetState, fins: [f64; 4]| -> Result<SimDeriv> {
            let d = self.derivatives(s, t, fins, a_t)?;
            if !d.is_finite() {
                return Err(GncError::Fault(format!(
                    "non-finite derivative at state {s:?} target {t:?} fins {fins:?}"
                )));
            }
            Ok(d)
        };

        let shift = |d: &SimDeriv, h: f64| -> (RigidBodyState, TargetState) {
            let q_raw = state.q.quaternion() + d.q_dot * h;
            (
                RigidBodyState {
                    r: state.r + d.r_dot * h,
                    v_b: state.v_b + d.v_b_dot * h,
                    q: UnitQuaternion::from_quaternion(q_raw),
                    omega: state.omega + d.omega_dot * h,
                    act: state.act.clone(),
                },
                TargetState { r: target.r + d.r_t_dot * h, v: target.v + d.v_t_dot * h },
            )
        };

        let k1 = eval(state, target, traj.start)?;
        let (s2, t2) = shift(&k1, dt / 2.0);
        let k2 = eval(&s2, &t2, traj.mid)?;
        let (s3, t3) = shift(&k2, dt / 2.0);
        let k3 = eval(&s3, &t3, traj.mid)?;
        let (s4, t4) = shift(&k3, dt);
        let k4 = eval(&s4, &t4, traj.end)?;

        let w = dt / 6.0;
        let combine3 = |a: Vector3<f64>, b: Vector3<f64>, c: Vector3<f64>, d: Vector3<f64>| {
            (a + b * 2.0 + c * 2.0 + d) * w
        };

        let q_new = state.q.quaternion()
            + (k1.q_dot + k2.q_dot * 2.0 + k3.q_dot * 2.0 + k4.q_dot) * w;
        let target_speed = target.speed();
        let mut v_t = target.v + combine3(k1.v_t_dot, k2.v_t_dot, k3.v_t_dot, k4.v_t_dot);
        if a_t != Vector3::zeros() {
            // Orthogonal maneuver acceleration holds speed; remove the O(dt²)
            // chord-vs-arc magnitude drift.
            v_t *= target_speed / v_t.norm();
        }

        let new_state = RigidBodyState {
            r: state.r + combine3(k1.r_dot, k2.r_dot, k3.r_dot, k4.r_dot),
            v_b: state.v_b + combine3(k1.v_b_dot, k2.v_b_dot, k3.v_b_dot, k4.v_b_dot),
            q: UnitQuaternion::from_quaternion(q_new),
            omega: state.omega + combine3(k1.omega_dot, k2.omega_dot, k3.omega_dot, k4.omega_dot),
            act: traj.state,
        };
        let new_target = TargetState {
            r: target.r + combine3(k1.r_t_dot, k2.r_t_dot, k3.r_t_dot, k4.r_t_dot),
            v: v_t,
        };
        if !new_state.is_finite() {
            return Err(GncError::Fault(format!("non-finite state after step: {new_state:?}")));
        }
        Ok((new_state, new_target))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actuation::ActuatorMode;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ballistic_model() -> MissileModel {
        let mut m = MissileModel::new(
            MissileGeometry::default(),
            AeroPerturbation::zero(),
            ActuatorMode::FirstOrder { tau: 0.02 },
        )
        .unwrap();
        m.aero_enabled = false;
        m
    }

    fn still_target() -> TargetState {
        TargetState { r: Vector3::new(1.0e4, 0.0, 5.0e3), v: Vector3::zeros() }
    }

    #[test]
    fn atmosphere_sea_level_and_scale_height() {
        assert_relative_eq!(Atmosphere::at(0.0).rho, 1.225);
        assert_relative_eq!(Atmosphere::at(H_SCALE).rho, 1.225 / std::f64::consts::E, epsilon = 1e-12);
        assert!(Atmosphere::at(-5.0).clamped);
        assert_relative_eq!(Atmosphere::at(-5.0).rho, 1.225);
        let atmo = Atmosphere::at(5000.0);
        assert_relative_eq!(atmo.q_dyn(900.0), 0.5 * 1.225 * (-5000.0_f64 / H_SCALE).exp() * 900.0 * 900.0);
    }

    #[test]
    fn wind_angle_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let v = Vector3::new(
                rng.random_range(300.0..1000.0),
                rng.random_range(-200.0..200.0),
                rng.random_range(-200.0..200.0),
            );
            let (alpha, beta) = wind_angles(&v).unwrap();
            let rebuilt = velocity_from_wind_angles(v.norm(), alpha, beta);
            assert_relative_eq!(rebuilt, v, epsilon = 1e-9, max_relative = 1e-12);
        }
        let (alpha, beta) =
            wind_angles(&Vector3::new(800.0, 0.0, 800.0 * 5.0_f64.to_radians().tan())).unwrap();
        assert_relative_eq!(alpha, 5.0_f64.to_radians(), epsilon = 1e-12);
        assert_eq!(beta, 0.0);
        assert!(wind_angles(&Vector3::zeros()).is_err());
    }

    #[test]
    fn axisymmetric_spin_is_torque_free() {
        let model = ballistic_model();
        let state = RigidBodyState {
            r: Vector3::new(0.0, 0.0, 8000.0),
            v_b: Vector3::new(900.0, 0.0, 0.0),
            q: UnitQuaternion::identity(),
            omega: Vector3::new(2.0, 0.0, 0.0),
            act: ActuatorState::default(),
        };
        let d = model
            .derivatives(&state, &still_target(), [0.0; 4], Vector3::zeros())
            .unwrap();
        assert_abs_diff_eq!(d.omega_dot.norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn free_fall_matches_analytic_parabola() {
        let model = ballistic_model();
        let mut state = RigidBodyState {
            r: Vector3::new(0.0, 0.0, 10_000.0),
            v_b: Vector3::zeros(),
            q: UnitQuaternion::identity(),
            omega: Vector3::zeros(),
            act: ActuatorState::default(),
        };
        // Zero-speed states cannot be evaluated (wind angles undefined) when
        // aero is on; with aero disabled this is a pure gravity drop.
        let mut target = still_target();
        let dt = 0.02;
        let steps = 500; // 10 s
        for _ in 0..steps {
            let (s, t) = model.rk4_step(&state, &target, [0.0; 4], Vector3::zeros(), dt).unwrap();
            state = s;
            target = t;
        }
        let t_total = dt * steps as f64;
        // Identity attitude: body z is nav down, so fall reduces altitude.
        let expected_drop = 0.5 * G * t_total * t_total;
        assert_abs_diff_eq!(state.r.z, 10_000.0 - expected_drop, epsilon = 1e-6);
        assert_abs_diff_eq!(state.r.x, 0.0, epsilon = 1e-9);
        assert_relative_eq!(state.v_b.z, G * t_total, epsilon = 1e-9);
    }

    #[test]
    fn straight_line_target_is_exact() {
        let model = ballistic_model();
        let state = RigidBodyState {
            r: Vector3::new(0.0, 0.0, 8000.0),
            v_b: Vector3::new(900.0, 0.0, 0.0),
            q: UnitQuaternion::identity(),
            omega: Vector3::zeros(),
            act: ActuatorState::default(),
        };
        let mut target = TargetState {
            r: Vector3::new(9000.0, 100.0, 8000.0),
            v: Vector3::new(-300.0, 17.0, 4.0),
        };
        let r0 = target.r;
        let v0 = target.v;
        let mut s = state;
        for _ in 0..250 {
            let (s2, t2) = model.rk4_step(&s, &target, [0.0; 4], Vector3::zeros(), 0.02).unwrap();
            s = s2;
            target = t2;
        }
        let t_total = 5.0;
        assert_relative_eq!(target.r, r0 + v0 * t_total, epsilon = 1e-9, max_relative = 1e-12);
        assert_eq!(target.v, v0);
    }

    #[test]
    fn target_speed_held_under_orthogonal_acceleration() {
        let model = ballistic_model();
        let state = RigidBodyState {
            r: Vector3::new(0.0, 0.0, 8000.0),
            v_b: Vector3::new(900.0, 0.0, 0.0),
            q: UnitQuaternion::identity(),
            omega: Vector3::zeros(),
            act: ActuatorState::default(),
        };
        let mut target = TargetState {
            r: Vector3::new(9000.0, 0.0, 8000.0),
            v: Vector3::new(-400.0, 0.0, 0.0),
        };
        let speed0 = target.speed();
        let mut s = state;
        for _ in 0..500 {
            // Re-derive an orthogonal acceleration each step, as the env does.
            let dir = Vector3::new(0.0, 0.0, 1.0);
            let a_t = (dir - target.v * (dir.dot(&target.v) / target.v.norm_squared()))
                .normalize()
                * 98.1;
            let before = target.speed();
            let (s2, t2) = model.rk4_step(&s, &target, [0.0; 4], a_t, 0.02).unwrap();
            s = s2;
            target = t2;
            assert!((target.speed() - before).abs() / before < 1e-6);
        }
        assert_relative_eq!(target.speed(), speed0, epsilon = 1e-6);
    }

    #[test]
    fn quaternion_norm_stays_unit_over_long_run() {
        let model = ballistic_model();
        let mut state = RigidBodyState {
            r: Vector3::new(0.0, 0.0, 9000.0),
            v_b: Vector3::new(900.0, 3.0, -4.0),
            q: UnitQuaternion::from_euler_angles(0.2, -0.1, 0.4),
            omega: Vector3::new(1.5, 0.7, -0.9),
            act: ActuatorState::default(),
        };
        let mut target = still_target();
        for _ in 0..1500 {
            let (s, t) = model.rk4_step(&state, &target, [0.0; 4], Vector3::zeros(), 0.02).unwrap();
            state = s;
            target = t;
            assert!((state.q.quaternion().norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mechanical_energy_conserved_without_aero() {
        // Drift over a fixed 10 s horizon must scale as O(dt^4) and be tiny
        // in absolute terms at the production coarse step.
        let model = ballistic_model();
        let m = model.geom.mass;
        let energy = |s: &RigidBodyState| {
            0.5 * m * s.velocity_e().norm_squared()
                + m * G * s.r.z
                + 0.5 * s.omega.dot(&(model.inertia * s.omega))
        };
        let run = |dt: f64| -> f64 {
            let mut state = RigidBodyState {
                r: Vector3::new(0.0, 0.0, 9000.0),
                v_b: Vector3::new(600.0, 40.0, -30.0),
                q: UnitQuaternion::from_euler_angles(0.3, 0.2, -0.5),
                omega: Vector3::new(0.5, 1.0, -0.7),
                act: ActuatorState::default(),
            };
            let mut target = still_target();
            let e0 = energy(&state);
            let steps = (10.0 / dt).round() as usize;
            for _ in 0..steps {
                let (s, t) = model.rk4_step(&state, &target, [0.0; 4], Vector3::zeros(), dt).unwrap();
                state = s;
                target = t;
            }
            ((energy(&state) - e0) / e0).abs()
        };
        let coarse = run(0.02);
        let fine = run(0.01);
        assert!(coarse < 1e-6, "relative drift {coarse}");
        let order = (coarse / fine).log2();
        assert!(order > 3.0, "energy drift convergence order {order}");
    }

    #[test]
    fn timestep_selection_boundary() {
        assert_eq!(select_timestep(5000.0), DT_COARSE);
        assert_eq!(select_timestep(160.0), DT_FINE);
        assert_eq!(select_timestep(100.0), DT_FINE);
    }

    #[test]
    fn engagement_frame_flip_from_identity_attitude() {
        let state = RigidBodyState {
            r: Vector3::zeros(),
            v_b: Vector3::new(1.0, 2.0, 3.0),
            q: UnitQuaternion::identity(),
            omega: Vector3::zeros(),
            act: ActuatorState::default(),
        };
        assert_eq!(state.velocity_e(), Vector3::new(1.0, -2.0, -3.0));
    }
}
