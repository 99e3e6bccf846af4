//! Episodic guidance-and-control environment.
//!
//! One step advances the simulation by a 0.04 s navigation period (dual-rate
//! RK4 underneath), produces the 20-dimensional observation, evaluates the
//! reward, and decides termination. Everything random in an episode is drawn
//! from a single seeded stream at reset, so `(seed, config, actions)` fully
//! determines every step result.

use nalgebra::{UnitQuaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actuation::{map_action, ActuatorCommandState, ActuatorLimits, ActuatorMode, ActuatorState};
use crate::aero::{sample_perturbation, MissileGeometry, PerturbationBounds};
use crate::dynamics::{
    select_timestep, velocity_from_wind_angles, Atmosphere, MissileModel, RigidBodyState,
    TargetState, RHO0,
};
use crate::engagement::{
    sample_scenario, ConstraintKind, ManeuverSchedule, PathConstraints, ScenarioBounds, Violation,
};
use crate::error::{GncError, Result};
use crate::frames::{align_x_to, flip_yz, shortest_arc};
use crate::sensors::{
    seeker_frame, RadomeBounds, RadomeParams, SensorErrorParams, SensorState,
};
use crate::stats::{EpisodeOutcome, EvalStats, MissTracker, RunningStat};

/// Observation dimension (fixed layout, see [`ObsLayout`]).
pub const OBS_DIM: usize = 20;
/// Action dimension.
pub const ACT_DIM: usize = 4;
/// Navigation period (s): sensing, action, and reward cadence.
pub const NAV_DT: f64 = 0.04;

pub type Observation = [f64; OBS_DIM];
pub type Action = [f64; ACT_DIM];

/// Index map of the observation vector.
pub struct ObsLayout;

impl ObsLayout {
    pub const LAMBDA: std::ops::Range<usize> = 0..3;
    pub const OMEGA_SURR: std::ops::Range<usize> = 3..6;
    pub const ATTITUDE_EST: std::ops::Range<usize> = 6..10;
    pub const OMEGA_OBS: std::ops::Range<usize> = 10..13;
    pub const ACCEL_OBS: std::ops::Range<usize> = 13..16;
    pub const FIN_CMDS: std::ops::Range<usize> = 16..20;
}

/// Reward weights. The roll-rate term is evaluated in deg/s, matching the
/// roll-rate path constraint's units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardParams {
    /// Shaping weight on `exp(-|Ω|²/σ²)`.
    pub alpha: f64,
    /// Roll-rate weight (per deg/s, negative).
    pub beta: f64,
    /// Control-effort weight.
    pub delta: f64,
    /// Terminal bonus when the miss distance is below `miss_limit`.
    pub bonus: f64,
    /// Terminal penalty when a path constraint is violated.
    pub penalty: f64,
    /// Shaping width σ_Ω (rad/s).
    pub sigma_omega: f64,
    /// Miss-distance threshold for the bonus (m).
    pub miss_limit: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            alpha: 1.0,
            beta: -0.05,
            delta: 0.0,
            bonus: 10.0,
            penalty: -10.0,
            sigma_omega: 0.02,
            miss_limit: 3.0,
        }
    }
}

/// Reward split into the two discount streams used by the trainer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RewardComponents {
    pub shaping: f64,
    pub rollrate: f64,
    pub ctrl: f64,
    pub bonus: f64,
    pub penalty: f64,
}

impl RewardComponents {
    pub fn total(&self) -> f64 {
        self.shaping + self.rollrate + self.ctrl + self.bonus + self.penalty
    }

    /// Per-step stream, discounted at the shaping rate.
    pub fn dense(&self) -> f64 {
        self.shaping + self.rollrate + self.ctrl
    }

    /// Terminal stream, discounted at the terminal rate.
    pub fn terminal(&self) -> f64 {
        self.bonus + self.penalty
    }
}

/// Reward evaluation; pure function of its inputs.
pub fn reward(
    params: &RewardParams,
    omega_surr: &Vector3<f64>,
    omega_x: f64,
    action: &Action,
    done: bool,
    miss: f64,
    violated: bool,
) -> RewardComponents {
    let omega_sq = omega_surr.norm_squared();
    let shaping = params.alpha * (-omega_sq / (params.sigma_omega * params.sigma_omega)).exp();
    let rollrate = params.beta * omega_x.to_degrees().abs();
    let u_norm = action.iter().map(|u| u * u).sum::<f64>().sqrt();
    let ctrl = params.delta * u_norm;
    let bonus = if done && miss < params.miss_limit { params.bonus } else { 0.0 };
    let penalty = if violated { params.penalty } else { 0.0 };
    RewardComponents { shaping, rollrate, ctrl, bonus, penalty }
}

/// Full environment configuration; defaults reproduce the nominal ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub geometry: MissileGeometry,
    pub scenario: ScenarioBounds,
    pub perturb: PerturbationBounds,
    pub radome: RadomeBounds,
    pub sensors: SensorErrorParams,
    pub limits: ActuatorLimits,
    pub actuator: ActuatorMode,
    pub constraints: PathConstraints,
    pub reward: RewardParams,
    /// Safety cap on episode duration (s); exceeding it terminates without a
    /// penalty and should not happen in sane configurations.
    pub max_time: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            geometry: MissileGeometry::default(),
            scenario: ScenarioBounds::default(),
            perturb: PerturbationBounds::default(),
            radome: RadomeBounds::default(),
            sensors: SensorErrorParams::default(),
            limits: ActuatorLimits::default(),
            actuator: ActuatorMode::first_order_default(),
            constraints: PathConstraints::default(),
            reward: RewardParams::default(),
            max_time: 100.0,
        }
    }
}

/// Why an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Termination {
    /// Closing velocity turned negative (flyby complete).
    Intercept,
    /// A path constraint was violated.
    Violation(ConstraintKind),
    /// Safety time cap.
    Timeout,
}

/// Ground-truth diagnostics exposed for logging, scripted controllers, and
/// tests; not part of the policy observation.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub range: f64,
    pub v_c: f64,
    pub speed: f64,
    pub altitude: f64,
    pub alpha: f64,
    pub beta: f64,
    pub look_angle: f64,
    pub omega: [f64; 3],
    pub los_body: [f64; 3],
    pub specific_force: [f64; 3],
    pub fins: [f64; 4],
    pub load_g: f64,
    pub missile_r: [f64; 3],
    pub target_r: [f64; 3],
    pub missile_v: [f64; 3],
    pub target_v: [f64; 3],
}

/// One step result.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub components: RewardComponents,
    pub done: bool,
    pub miss: Option<f64>,
    pub termination: Option<Termination>,
    pub violations: Vec<Violation>,
    pub diag: Diagnostics,
}

struct Episode {
    model: MissileModel,
    state: RigidBodyState,
    target: TargetState,
    sensor: SensorState,
    cmd: ActuatorCommandState,
    maneuver: ManeuverSchedule,
    radome: RadomeParams,
    q_init: UnitQuaternion<f64>,
    rng: ChaCha8Rng,
    t: f64,
    steps: usize,
    done: bool,
    miss: MissTracker,
    /// Diagnostics counter for negative-altitude atmosphere clamps.
    clamp_count: u64,
}

/// The episodic environment. One instance per worker; no shared state.
pub struct GncEnv {
    pub cfg: EnvConfig,
    ep: Option<Episode>,
}

impl GncEnv {
    pub fn new(cfg: EnvConfig) -> Self {
        GncEnv { cfg, ep: None }
    }

    /// Starts a fresh episode and returns the first observation.
    pub fn reset(&mut self, seed: u64) -> Result<Observation> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scenario = None;
        for _ in 0..20 {
            let perturb = sample_perturbation(&mut rng, &self.cfg.perturb);
            let radome = self.cfg.radome.sample(&mut rng);
            match sample_scenario(&mut rng, &self.cfg.scenario, radome, perturb) {
                Ok(s) => {
                    scenario = Some(s);
                    break;
                }
                Err(_) => continue,
            }
        }
        let scenario = scenario
            .ok_or_else(|| GncError::Fault("scenario sampling failed after bounded retries".into()))?;
        let sensor = SensorState::sample(&mut rng, &self.cfg.sensors);

        // Initial attitude: body x along the launch velocity with the sampled
        // roll, then offset so the velocity sits at the sampled wind angles.
        let v_n = flip_yz(scenario.missile_v);
        let speed = v_n.norm();
        let aligned = align_x_to(v_n)
            * UnitQuaternion::from_axis_angle(&Vector3::x_axis(), scenario.roll0);
        let v_b_target = velocity_from_wind_angles(1.0, scenario.alpha0, scenario.beta0);
        let q = aligned * shortest_arc(&v_b_target, &Vector3::x());
        let v_b = q.inverse_transform_vector(&v_n);
        debug_assert!((v_b.norm() - speed).abs() < 1e-9 * speed);

        let state = RigidBodyState {
            r: scenario.missile_r,
            v_b,
            q,
            omega: Vector3::zeros(),
            act: ActuatorState::default(),
        };
        let model = MissileModel::new(
            self.cfg.geometry.clone(),
            scenario.perturb.clone(),
            self.cfg.actuator,
        )?;

        let mut ep = Episode {
            model,
            state,
            target: scenario.target.clone(),
            sensor,
            cmd: ActuatorCommandState::default(),
            maneuver: scenario.maneuver.clone(),
            radome: scenario.radome,
            q_init: q,
            rng,
            t: 0.0,
            steps: 0,
            done: false,
            miss: MissTracker::new(),
            clamp_count: 0,
        };
        ep.miss.push((ep.target.r - ep.state.r).norm());
        let (obs, _) = ep.observe()?;
        self.ep = Some(ep);
        Ok(obs)
    }

    /// Advances one navigation period under `action`.
    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        let cfg = &self.cfg;
        let ep = self
            .ep
            .as_mut()
            .ok_or_else(|| GncError::Usage("step called before reset".into()))?;
        if ep.done {
            return Err(GncError::Usage("step called on a finished episode".into()));
        }

        let rates = map_action(action, &cfg.limits)?;
        let fin_cmd = ep.cmd.integrate_and_mix(rates, NAV_DT, &cfg.limits);

        // Maneuver acceleration held constant across the period.
        let rho_t = Atmosphere::at(ep.target.r.z).rho;
        let a_t = ep.maneuver.accel(&ep.target, ep.t, rho_t, RHO0);

        let mut remaining = NAV_DT;
        while remaining > 1e-12 {
            let range = (ep.target.r - ep.state.r).norm();
            let dt = select_timestep(range).min(remaining);
            let (s, t) = ep.model.rk4_step(&ep.state, &ep.target, fin_cmd, a_t, dt)?;
            ep.state = s;
            ep.target = t;
            if ep.state.r.z < 0.0 {
                ep.clamp_count += 1;
            }
            ep.miss.push((ep.target.r - ep.state.r).norm());
            remaining -= dt;
        }
        ep.t += NAV_DT;
        ep.steps += 1;

        let (obs, seeker) = ep.observe()?;

        // Termination and constraints at the navigation rate. A negative
        // closing velocity means the flyby already happened; constraint
        // checks on the post-pass geometry are meaningless, so the intercept
        // takes precedence.
        let lateral = {
            let f = ep.model.specific_force(&ep.state)? * cfg.geometry.mass;
            (f.y * f.y + f.z * f.z).sqrt()
        };
        let intercept = seeker.v_c < 0.0;
        let violations = if intercept {
            Vec::new()
        } else {
            cfg.constraints.check(
                ep.state.speed(),
                &ep.state.q,
                &ep.state.omega,
                seeker.look_angle,
                lateral,
                cfg.geometry.mass,
            )
        };
        let violated = !violations.is_empty();
        let timeout = ep.t >= cfg.max_time;
        let done = violated || intercept || timeout;
        let termination = if intercept {
            Some(Termination::Intercept)
        } else if violated {
            Some(Termination::Violation(violations[0].kind))
        } else if timeout {
            Some(Termination::Timeout)
        } else {
            None
        };

        let miss = ep.miss.miss();
        let components = reward(
            &cfg.reward,
            &seeker.omega_surr,
            ep.state.omega.x,
            &action,
            done,
            miss,
            violated,
        );
        ep.done = done;

        let diag = ep.diagnostics(&seeker, lateral / (cfg.geometry.mass * crate::frames::G))?;
        Ok(StepResult {
            observation: obs,
            reward: components.total(),
            components,
            done,
            miss: if done { Some(miss) } else { None },
            termination,
            violations,
            diag,
        })
    }

    /// Diagnostics counter: atmosphere clamps observed this episode.
    pub fn clamp_count(&self) -> u64 {
        self.ep.as_ref().map_or(0, |e| e.clamp_count)
    }

    pub fn episode_time(&self) -> f64 {
        self.ep.as_ref().map_or(0.0, |e| e.t)
    }
}

impl Episode {
    /// Samples the sensors and assembles the observation for the current state.
    fn observe(&mut self) -> Result<(Observation, crate::sensors::SeekerOutput)> {
        let omega_obs = self.sensor.gyro_measure(self.state.omega, &mut self.rng);
        if self.steps > 0 {
            self.sensor.integrate_dq(omega_obs, NAV_DT);
        }
        let seeker = seeker_frame(&self.state, &self.target, &mut self.sensor, &self.radome, NAV_DT)?;
        let a_gt = self.model.specific_force(&self.state)?;
        let a_obs = self.sensor.accel_measure(a_gt);
        let q_est = self.q_init * self.sensor.dq_obs;

        let mut obs = [0.0; OBS_DIM];
        obs[ObsLayout::LAMBDA].copy_from_slice(seeker.lambda_hat.as_slice());
        obs[ObsLayout::OMEGA_SURR].copy_from_slice(seeker.omega_surr.as_slice());
        let qc = q_est.quaternion();
        obs[ObsLayout::ATTITUDE_EST].copy_from_slice(&[qc.w, qc.i, qc.j, qc.k]);
        obs[ObsLayout::OMEGA_OBS].copy_from_slice(omega_obs.as_slice());
        obs[ObsLayout::ACCEL_OBS].copy_from_slice(a_obs.as_slice());
        obs[ObsLayout::FIN_CMDS].copy_from_slice(&self.cmd.as_observation());
        if obs.iter().any(|v| !v.is_finite()) {
            return Err(GncError::Fault(format!("non-finite observation {obs:?}")));
        }
        Ok((obs, seeker))
    }

    fn diagnostics(&self, seeker: &crate::sensors::SeekerOutput, load_g: f64) -> Result<Diagnostics> {
        let (alpha, beta) = crate::dynamics::wind_angles(&self.state.v_b)?;
        let los_b = self
            .state
            .q
            .inverse_transform_vector(&flip_yz((self.target.r - self.state.r).normalize()));
        let sf = self.model.specific_force(&self.state)?;
        Ok(Diagnostics {
            t: self.t,
            range: seeker.range,
            v_c: seeker.v_c,
            speed: self.state.speed(),
            altitude: self.state.r.z,
            alpha,
            beta,
            look_angle: seeker.look_angle,
            omega: self.state.omega.into(),
            los_body: los_b.into(),
            specific_force: sf.into(),
            fins: self.state.act.fins,
            load_g,
            missile_r: self.state.r.into(),
            target_r: self.target.r.into(),
            missile_v: self.state.velocity_e().into(),
            target_v: self.target.v.into(),
        })
    }
}

/// Anything that can drive the environment: trained policies, scripted
/// controllers, or fixed action sequences.
pub trait ActionSource {
    /// Called at episode start; `seed` derives any internal sampling stream.
    fn begin_episode(&mut self, seed: u64);
    fn act(&mut self, obs: &Observation, diag: Option<&Diagnostics>) -> Action;
}

/// Zero-action source: fins stay at their trim position.
pub struct ZeroController;

impl ActionSource for ZeroController {
    fn begin_episode(&mut self, _seed: u64) {}
    fn act(&mut self, _obs: &Observation, _diag: Option<&Diagnostics>) -> Action {
        [0.0; 4]
    }
}

/// Acceleration-tracking controller built on the ground-truth diagnostics: a
/// proportional-navigation command mapped to fin rates with rate damping and
/// an active roll damper. Test oracle and trace utility, not a deployable
/// policy (it reads diagnostics, not observations).
pub struct ScriptedController {
    pub nav_ratio: f64,
    pub accel_gain: f64,
    pub rate_gain: f64,
    pub roll_gain: f64,
    last_diag: Option<Diagnostics>,
}

impl ScriptedController {
    pub fn new() -> Self {
        ScriptedController {
            nav_ratio: 3.0,
            accel_gain: 0.02,
            rate_gain: 1.2,
            roll_gain: 40.0,
            last_diag: None,
        }
    }
}

impl Default for ScriptedController {
    fn default() -> Self {
        Self::new()
    }
}

impl ActionSource for ScriptedController {
    fn begin_episode(&mut self, _seed: u64) {
        self.last_diag = None;
    }

    fn act(&mut self, _obs: &Observation, diag: Option<&Diagnostics>) -> Action {
        let Some(d) = diag else { return [0.0; 4] };
        // LOS rate from consecutive ground-truth body LOS samples.
        let los = Vector3::from(d.los_body);
        let omega_los = match &self.last_diag {
            Some(prev) => {
                let prev_los = Vector3::from(prev.los_body);
                // Remove the body rotation between samples to approximate the
                // inertial LOS rate expressed in the body frame.
                let rot = UnitQuaternion::from_scaled_axis(Vector3::from(d.omega) * NAV_DT);
                let prev_in_now = rot.inverse_transform_vector(&prev_los);
                prev_in_now.cross(&los) / NAV_DT
            }
            None => Vector3::zeros(),
        };
        self.last_diag = Some(d.clone());

        // PN acceleration command, perpendicular components only.
        let a_cmd = omega_los.cross(&los) * (-self.nav_ratio * d.v_c);
        let sf = Vector3::from(d.specific_force);
        // Positive symmetric H deflection raises a_z; positive V raises a_y.
        let u_h = self.accel_gain * (a_cmd.z - sf.z) - self.rate_gain * d.omega[1];
        let u_v = self.accel_gain * (a_cmd.y - sf.y) - self.rate_gain * d.omega[2];
        // Differential channels only damp roll.
        let u_roll = -self.roll_gain * d.omega[0];
        [
            u_v.clamp(-1.0, 1.0),
            u_h.clamp(-1.0, 1.0),
            u_roll.clamp(-1.0, 1.0),
            u_roll.clamp(-1.0, 1.0),
        ]
    }
}

/// Runs one full episode and reduces it to an outcome row.
pub fn run_episode(
    cfg: &EnvConfig,
    seed: u64,
    source: &mut dyn ActionSource,
) -> Result<EpisodeOutcome> {
    let mut env = GncEnv::new(cfg.clone());
    let mut obs = env.reset(seed)?;
    source.begin_episode(seed);
    let mut accel = RunningStat::new();
    let mut total_reward = 0.0;
    let mut diag: Option<Diagnostics> = None;
    loop {
        let action = source.act(&obs, diag.as_ref());
        let step = env.step(action)?;
        total_reward += step.reward;
        let sf = Vector3::from(step.diag.specific_force);
        accel.push((sf.y * sf.y + sf.z * sf.z).sqrt());
        obs = step.observation;
        if step.done {
            let violation = match step.termination {
                Some(Termination::Violation(kind)) => Some(kind),
                _ => None,
            };
            return Ok(EpisodeOutcome {
                miss: step.miss.unwrap_or(f64::INFINITY),
                final_speed: step.diag.speed,
                steps: env.ep.as_ref().map_or(0, |e| e.steps),
                violation,
                total_reward,
                accel,
                flight_time: env.episode_time(),
            });
        }
        diag = Some(step.diag);
    }
}

/// Evaluates an action source over `n` episodes with per-episode seeds
/// derived from `seed`; episodes run in parallel and reduce in index order.
pub fn evaluate<F, S>(cfg: &EnvConfig, seed: u64, n: usize, make_source: F) -> Result<EvalStats>
where
    F: Fn() -> S + Sync,
    S: ActionSource,
{
    if n == 0 {
        return Err(GncError::Usage("evaluation requires at least one episode".into()));
    }
    let outcomes: Result<Vec<EpisodeOutcome>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut source = make_source();
            run_episode(cfg, derive_seed(seed, i as u64), &mut source)
        })
        .collect();
    Ok(EvalStats::from_outcomes(&outcomes?))
}

/// Stable per-episode seed derivation (splitmix64 over the pair).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}
