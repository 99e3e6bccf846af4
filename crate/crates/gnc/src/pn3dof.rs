//! 3-DOF proportional navigation benchmark: point-mass missile whose lateral
//! acceleration follows the PN command through a dynamic-pressure limit and a
//! guidance-filter lag, with induced drag shrinking the speed. Runs over the
//! same engagement ensemble as the 6-DOF environment for side-by-side tables.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{select_timestep, Atmosphere, TargetState, RHO0};
use crate::engagement::{sample_scenario, ConstraintKind, ScenarioBounds};
use crate::env::{derive_seed, NAV_DT};
use crate::error::{GncError, Result};
use crate::frames::G;
use crate::sensors::RadomeParams;
use crate::stats::{EpisodeOutcome, EvalStats, MissTracker, RunningStat};

/// Benchmark parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Pn3dofConfig {
    /// Navigation ratio N.
    pub nav_ratio: f64,
    /// Maximum lateral acceleration (in g) at sea level and the reference speed.
    pub a_ref_g: f64,
    /// Reference speed for the dynamic-pressure scaling (m/s).
    pub ref_speed: f64,
    /// Guidance low-pass time constant (s).
    pub guidance_tau: f64,
    /// Induced-drag constant in `V̇ = -k‖a_M‖`.
    pub drag_k: f64,
    /// Minimum speed termination (m/s).
    pub min_speed: f64,
    pub scenario: ScenarioBounds,
    /// Safety cap (s).
    pub max_time: f64,
}

impl Default for Pn3dofConfig {
    fn default() -> Self {
        Pn3dofConfig {
            nav_ratio: 3.0,
            a_ref_g: 74.0,
            ref_speed: 1000.0,
            guidance_tau: 0.3,
            drag_k: 4.0,
            min_speed: 400.0,
            scenario: ScenarioBounds::default(),
            max_time: 200.0,
        }
    }
}

/// Point-mass missile state for the benchmark.
#[derive(Debug, Clone)]
pub struct Pn3dofState {
    pub r: Vector3<f64>,
    pub v: Vector3<f64>,
    /// Low-pass-filtered applied acceleration.
    pub a_filtered: Vector3<f64>,
}

/// PN acceleration command from relative position and velocity.
pub fn pn_command(r_tm: Vector3<f64>, v_tm: Vector3<f64>, nav_ratio: f64) -> Vector3<f64> {
    let r_sq = r_tm.norm_squared();
    debug_assert!(r_sq > 0.0);
    let omega = r_tm.cross(&v_tm) / r_sq;
    let r_hat = r_tm / r_sq.sqrt();
    let v_c = -r_hat.dot(&v_tm);
    -nav_ratio * v_c * r_hat.cross(&omega)
}

/// Dynamic-pressure-limited acceleration magnitude (m/s²).
pub fn accel_bound(cfg: &Pn3dofConfig, altitude: f64, speed: f64) -> f64 {
    let rho = Atmosphere::at(altitude).rho;
    cfg.a_ref_g * G * (rho * speed * speed) / (RHO0 * cfg.ref_speed * cfg.ref_speed)
}

/// Removes the component of `a` parallel to `v`.
fn perp_to(a: Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
    a - v * (a.dot(v) / v.norm_squared())
}

/// Projects the command perpendicular to the missile velocity, clips it to
/// the dynamic-pressure bound, advances the guidance filter over `dt`, and
/// returns the applied acceleration (re-projected so the perpendicularity
/// invariant survives the lag).
pub fn limit_and_filter(
    cfg: &Pn3dofConfig,
    a_com: Vector3<f64>,
    state: &mut Pn3dofState,
    altitude: f64,
    dt: f64,
) -> Vector3<f64> {
    let a_perp = perp_to(a_com, &state.v);
    let bound = accel_bound(cfg, altitude, state.v.norm());
    let norm = a_perp.norm();
    let a_cmd = if norm > bound && norm > 0.0 { a_perp * (bound / norm) } else { a_perp };

    let decay = (-dt / cfg.guidance_tau).exp();
    state.a_filtered = a_cmd + (state.a_filtered - a_cmd) * decay;
    let applied = perp_to(state.a_filtered, &state.v);
    // Projection only shrinks, so the bound still holds.
    debug_assert!(applied.norm() <= bound + 1e-9);
    applied
}

/// Speed reduction from induced drag: `V̇ = -k‖a_M‖`, direction preserved.
pub fn drag_update(speed: f64, a_m_norm: f64, k: f64, dt: f64) -> f64 {
    (speed - k * a_m_norm * dt).max(1.0)
}

/// One integration substep: RK4 translation under the held acceleration,
/// then the drag speed rescale.
fn substep(state: &mut Pn3dofState, target: &mut TargetState, a_m: Vector3<f64>, a_t: Vector3<f64>, k: f64, dt: f64) {
    let speed_before = state.v.norm();
    let target_speed = target.speed();

    // RK4 on [r, v] with constant acceleration (exact for this quadratic).
    let k1v = a_m;
    let k1r = state.v;
    let k2r = state.v + k1v * (dt / 2.0);
    let k3r = k2r;
    let k4r = state.v + k1v * dt;
    state.r += (k1r + k2r * 2.0 + k3r * 2.0 + k4r) * (dt / 6.0);
    state.v += k1v * dt;

    target.r += (target.v + a_t * (dt / 2.0)) * dt;
    target.v += a_t * dt;
    if a_t != Vector3::zeros() && target_speed > 0.0 {
        target.v *= target_speed / target.v.norm();
    }

    // Chord-vs-arc correction plus drag: enforce the speed ODE exactly.
    let new_speed = drag_update(speed_before, a_m.norm(), k, dt);
    state.v *= new_speed / state.v.norm();
}

/// Runs one benchmark episode. The engagement ensemble, timestep policy, and
/// guidance cadence match the 6-DOF environment.
pub fn run_pn_episode(cfg: &Pn3dofConfig, seed: u64) -> Result<EpisodeOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scenario = sample_scenario(
        &mut rng,
        &cfg.scenario,
        RadomeParams::zero(),
        crate::aero::AeroPerturbation::zero(),
    )?;
    let mut state = Pn3dofState {
        r: scenario.missile_r,
        v: scenario.missile_v,
        a_filtered: Vector3::zeros(),
    };
    let mut target = scenario.target.clone();
    let maneuver = scenario.maneuver.clone();

    let mut miss = MissTracker::new();
    miss.push((target.r - state.r).norm());
    let mut accel = RunningStat::new();
    let mut t = 0.0;
    let mut steps = 0usize;

    loop {
        // Guidance update at the navigation rate.
        let r_tm = target.r - state.r;
        let v_tm = target.v - state.v;
        let a_com = pn_command(r_tm, v_tm, cfg.nav_ratio);
        let rho_t = Atmosphere::at(target.r.z).rho;
        let a_t = maneuver.accel(&target, t, rho_t, RHO0);

        let mut applied_last = Vector3::zeros();
        let mut remaining = NAV_DT;
        while remaining > 1e-12 {
            let range = (target.r - state.r).norm();
            let dt = select_timestep(range).min(remaining);
            applied_last = limit_and_filter(cfg, a_com, &mut state, state.r.z, dt);
            substep(&mut state, &mut target, applied_last, a_t, cfg.drag_k, dt);
            miss.push((target.r - state.r).norm());
            remaining -= dt;
        }
        t += NAV_DT;
        steps += 1;
        accel.push(applied_last.norm());

        let r_tm = target.r - state.r;
        let v_c = -r_tm.normalize().dot(&(target.v - state.v));
        let speed = state.v.norm();
        if v_c < 0.0 {
            return Ok(EpisodeOutcome {
                miss: miss.miss(),
                final_speed: speed,
                steps,
                violation: None,
                total_reward: 0.0,
                accel,
                flight_time: t,
            });
        }
        if speed < cfg.min_speed || t >= cfg.max_time {
            return Ok(EpisodeOutcome {
                miss: miss.miss(),
                final_speed: speed,
                steps,
                violation: Some(ConstraintKind::MinSpeed),
                total_reward: 0.0,
                accel,
                flight_time: t,
            });
        }
    }
}

/// Monte Carlo benchmark over `n` episodes; parallel, reduced in index order.
pub fn run_benchmark(cfg: &Pn3dofConfig, seed: u64, n: usize) -> Result<EvalStats> {
    if n == 0 {
        return Err(GncError::Usage("benchmark requires at least one episode".into()));
    }
    let outcomes: Result<Vec<EpisodeOutcome>> = (0..n)
        .into_par_iter()
        .map(|i| run_pn_episode(cfg, derive_seed(seed, i as u64)))
        .collect();
    Ok(EvalStats::from_outcomes(&outcomes?))
}
