//! Fin actuation: policy actions become commanded deflection rates, which are
//! integrated, clipped, mixed into per-fin commands, and passed through an
//! actuator lag model.
//!
//! Channel order for commands is `[V, H, dV, dH]`: symmetric vertical-fin
//! (bottom/upper) deflection, symmetric horizontal-fin (left/right)
//! deflection, and the two differential channels. Per-fin order everywhere
//! is `[LT, RT, BT, UT]`.

use serde::{Deserialize, Serialize};

use crate::error::{GncError, Result};

/// Deflection and rate limits, radians and radians/second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActuatorLimits {
    /// Symmetric channel rate limit (rad/s); 20 deg/s.
    pub rate_sym: f64,
    /// Differential channel rate limit (rad/s); 0.1 deg/s.
    pub rate_diff: f64,
    /// Symmetric channel deflection limit (rad); 20 deg.
    pub defl_sym: f64,
    /// Differential channel deflection limit (rad); 0.1 deg.
    pub defl_diff: f64,
}

impl Default for ActuatorLimits {
    fn default() -> Self {
        ActuatorLimits {
            rate_sym: 20.0_f64.to_radians(),
            rate_diff: 0.1_f64.to_radians(),
            defl_sym: 20.0_f64.to_radians(),
            defl_diff: 0.1_f64.to_radians(),
        }
    }
}

/// Commanded deflection rates (rad/s, `[V, H, dV, dH]`) from a raw policy
/// action: each component is clipped to [-1, 1] and scaled by its rate limit.
pub fn map_action(u: [f64; 4], limits: &ActuatorLimits) -> Result<[f64; 4]> {
    if u.iter().any(|v| !v.is_finite()) {
        return Err(GncError::Fault(format!("non-finite action {u:?}")));
    }
    let gains = [limits.rate_sym, limits.rate_sym, limits.rate_diff, limits.rate_diff];
    let mut rates = [0.0; 4];
    for i in 0..4 {
        rates[i] = gains[i] * u[i].clamp(-1.0, 1.0);
    }
    Ok(rates)
}

/// Integrated commanded deflections (rad). The integrator state itself is
/// clamped to the deflection limits, so commands cannot wind up.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ActuatorCommandState {
    pub theta_v: f64,
    pub theta_h: f64,
    pub theta_dv: f64,
    pub theta_dh: f64,
}

impl ActuatorCommandState {
    /// Integrates the commanded rates over `dt`, clips, and mixes into per-fin
    /// commanded deflections `[LT, RT, BT, UT]`.
    pub fn integrate_and_mix(&mut self, rates: [f64; 4], dt: f64, limits: &ActuatorLimits) -> [f64; 4] {
        debug_assert!(dt > 0.0);
        self.theta_v = (self.theta_v + rates[0] * dt).clamp(-limits.defl_sym, limits.defl_sym);
        self.theta_h = (self.theta_h + rates[1] * dt).clamp(-limits.defl_sym, limits.defl_sym);
        self.theta_dv = (self.theta_dv + rates[2] * dt).clamp(-limits.defl_diff, limits.defl_diff);
        self.theta_dh = (self.theta_dh + rates[3] * dt).clamp(-limits.defl_diff, limits.defl_diff);
        self.mix()
    }

    /// Per-fin commanded deflections `[LT, RT, BT, UT]` for the current
    /// integrated commands.
    pub fn mix(&self) -> [f64; 4] {
        [
            self.theta_h - self.theta_dh,
            self.theta_h + self.theta_dh,
            self.theta_v - self.theta_dv,
            self.theta_v + self.theta_dv,
        ]
    }

    /// Observation slice `[V, H, dV, dH]`.
    pub fn as_observation(&self) -> [f64; 4] {
        [self.theta_v, self.theta_h, self.theta_dv, self.theta_dh]
    }
}

/// Actuator lag dynamics applied between fin commands and actual deflections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActuatorMode {
    /// First-order lag used during optimization.
    FirstOrder { tau: f64 },
    /// Second-order model used for evaluation; integrated with nested
    /// fixed substeps because of its high-frequency pole.
    SecondOrder { zeta: f64, omega: f64 },
}

impl ActuatorMode {
    pub fn first_order_default() -> Self {
        ActuatorMode::FirstOrder { tau: 0.02 }
    }

    pub fn second_order_default() -> Self {
        ActuatorMode::SecondOrder { zeta: 0.7, omega: 150.0 }
    }
}

/// Actual fin deflections plus the deflection-rate state used by the
/// second-order model. Order `[LT, RT, BT, UT]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActuatorState {
    pub fins: [f64; 4],
    pub rates: [f64; 4],
}

/// Fin deflections sampled at the RK4 stage times of one outer step.
#[derive(Debug, Clone)]
pub struct FinTrajectory {
    pub start: [f64; 4],
    pub mid: [f64; 4],
    pub end: [f64; 4],
    pub state: ActuatorState,
}

/// Internal substep ceiling for the second-order model (s).
const SECOND_ORDER_SUBSTEP: f64 = 1.0e-3;

impl ActuatorMode {
    /// Advances the actuator over `dt` with the command held, returning the
    /// deflections at the start, midpoint, and end of the interval.
    pub fn advance(&self, act: &ActuatorState, cmd: [f64; 4], dt: f64) -> FinTrajectory {
        match *self {
            ActuatorMode::FirstOrder { tau } => {
                let decay_half = (-dt / (2.0 * tau)).exp();
                let decay_full = decay_half * decay_half;
                let mut mid = [0.0; 4];
                let mut end = [0.0; 4];
                for i in 0..4 {
                    mid[i] = cmd[i] + (act.fins[i] - cmd[i]) * decay_half;
                    end[i] = cmd[i] + (act.fins[i] - cmd[i]) * decay_full;
                }
                FinTrajectory {
                    start: act.fins,
                    mid,
                    end,
                    state: ActuatorState { fins: end, rates: [0.0; 4] },
                }
            }
            ActuatorMode::SecondOrder { zeta, omega } => {
                // Even substep count so the midpoint lands on a boundary.
                let mut n = (dt / SECOND_ORDER_SUBSTEP).ceil() as usize;
                n = n.max(2);
                if n % 2 == 1 {
                    n += 1;
                }
                let h = dt / n as f64;
                let mut fins = act.fins;
                let mut rates = act.rates;
                let mut mid = act.fins;
                for step in 0..n {
                    rk4_second_order(&mut fins, &mut rates, cmd, zeta, omega, h);
                    if step + 1 == n / 2 {
                        mid = fins;
                    }
                }
                FinTrajectory { start: act.fins, mid, end: fins, state: ActuatorState { fins, rates } }
            }
        }
    }
}

fn rk4_second_order(fins: &mut [f64; 4], rates: &mut [f64; 4], cmd: [f64; 4], zeta: f64, omega: f64, h: f64) {
    for i in 0..4 {
        let f = |theta: f64, rate: f64| -> (f64, f64) {
            (rate, omega * omega * (cmd[i] - theta) - 2.0 * zeta * omega * rate)
        };
        let (k1t, k1r) = f(fins[i], rates[i]);
        let (k2t, k2r) = f(fins[i] + 0.5 * h * k1t, rates[i] + 0.5 * h * k1r);
        let (k3t, k3r) = f(fins[i] + 0.5 * h * k2t, rates[i] + 0.5 * h * k2r);
        let (k4t, k4r) = f(fins[i] + h * k3t, rates[i] + h * k3r);
        fins[i] += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        rates[i] += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
    }
}
