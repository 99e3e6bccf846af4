//! Aerodynamic model: slender-body / slender-wing component buildup.
//!
//! Forces are assembled from five components (nose, wing, body, and two tail
//! fins per channel) with per-component normal/side force coefficients and
//! centers of pressure. Supersonic only: the lifting-surface terms carry a
//! `1/η` factor with `η = √(M² − 1)`.
//!
//! Row order of every 5×3 coefficient / center-of-pressure matrix:
//! `[nose, wing, body, left-or-bottom tail, right-or-upper tail]`.
//! The normal set uses the horizontal (left/right) tail fins, the side set
//! the vertical (bottom/upper) ones.
//!
//! Fin deflections are always passed as `[θ_LT, θ_RT, θ_BT, θ_UT]` radians.

use nalgebra::{Matrix3, SMatrix, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::GncError;

pub type Matrix5x3 = SMatrix<f64, 5, 3>;

/// Fin index order used everywhere: left tail, right tail, bottom tail, upper tail.
pub const FIN_LT: usize = 0;
pub const FIN_RT: usize = 1;
pub const FIN_BT: usize = 2;
pub const FIN_UT: usize = 3;

/// Airframe dimensions and fixed aerodynamic constants.
///
/// Stations (`x_*`) are measured from the nose tip, in meters. The default
/// set is chosen for internal consistency: hinge line ahead of the body end,
/// tip chords equal to the tail root chord, `a_B = d·(x_L − x_N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MissileGeometry {
    /// Body diameter (m).
    pub d: f64,
    /// Wing semi-span height (m).
    pub h_w: f64,
    /// Tail semi-span height (m).
    pub h_t: f64,
    /// Wing root chord (m).
    pub c_rw: f64,
    /// Wing tip chord (m).
    pub c_tw: f64,
    /// Tail root chord (m).
    pub c_rt: f64,
    /// Tail tip chord (m).
    pub c_tt: f64,
    /// Nose station (m).
    pub x_n: f64,
    /// Wing station offset (m).
    pub x_w: f64,
    /// Body length (m).
    pub x_l: f64,
    /// Tail hinge-line station (m).
    pub x_hl: f64,
    /// Center-of-gravity station (m).
    pub x_cg: f64,
    /// Mass (kg).
    pub mass: f64,
    /// Zero-lift axial force coefficient.
    pub c_a0: f64,
    /// Induced-drag constant multiplying the lateral coefficient norm.
    pub k_drag: f64,
}

impl Default for MissileGeometry {
    fn default() -> Self {
        MissileGeometry {
            d: 0.31,
            h_w: 0.63,
            h_t: 0.63,
            c_rw: 1.88,
            c_tw: 0.63,
            c_rt: 0.63,
            c_tt: 0.63,
            x_n: 0.94,
            x_w: 1.25,
            x_l: 6.25,
            x_hl: 6.09,
            x_cg: 3.13,
            mass: 455.0,
            c_a0: 0.35,
            k_drag: 4.0,
        }
    }
}

impl MissileGeometry {
    pub fn validate(&self) -> Result<(), GncError> {
        let lengths = [
            self.d, self.h_w, self.h_t, self.c_rw, self.c_tw, self.c_rt, self.c_tt, self.x_n,
            self.x_w, self.x_l, self.x_hl,
        ];
        if lengths.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(GncError::Config("geometry lengths must be strictly positive".into()));
        }
        if !(self.x_n < self.x_w && self.x_w < self.x_hl && self.x_hl <= self.x_l) {
            return Err(GncError::Config(format!(
                "station ordering violated: need x_n < x_w < x_hl <= x_l, got {} {} {} {}",
                self.x_n, self.x_w, self.x_hl, self.x_l
            )));
        }
        if !(self.x_cg > 0.0 && self.x_cg < self.x_l) {
            return Err(GncError::Config("x_cg must lie within (0, x_l)".into()));
        }
        if !(self.mass > 0.0) {
            return Err(GncError::Config("mass must be positive".into()));
        }
        Ok(())
    }

    /// Reference area πd²/4 (m²).
    pub fn s_ref(&self) -> f64 {
        std::f64::consts::PI * self.d * self.d / 4.0
    }

    /// Wing planform area (m²).
    pub fn s_wing(&self) -> f64 {
        self.h_w * (self.c_rw + self.c_tw) / 2.0
    }

    /// Body planform area (m²).
    pub fn s_plan(&self) -> f64 {
        self.d * (self.x_l - self.x_n) + 0.67 * self.d * self.x_n
    }

    /// Tail planform area (m²).
    pub fn s_tail(&self) -> f64 {
        self.h_w * (self.c_rt + self.c_tt) / 2.0
    }

    /// Tail fin lateral offset from the centerline (m).
    pub fn tail_offset(&self) -> f64 {
        self.h_t + self.d / 2.0
    }

    /// Diagonal inertia tensor of the cylinder approximation (kg·m²).
    pub fn inertia_tensor(&self) -> Matrix3<f64> {
        let r = self.d / 2.0;
        let j_xx = self.mass * r * r / 2.0;
        let j_yy = self.mass * (3.0 * r * r + self.x_l * self.x_l) / 12.0;
        Matrix3::from_diagonal(&Vector3::new(j_xx, j_yy, j_yy))
    }
}

/// Per-episode multiplicative coefficient offsets: each affected quantity is
/// scaled by `(1 + ε)` elementwise.
#[derive(Debug, Clone, PartialEq)]
pub struct AeroPerturbation {
    pub eps_force_n: Matrix5x3,
    pub eps_force_y: Matrix5x3,
    pub eps_force_a: f64,
    pub eps_cp_n: Matrix5x3,
    pub eps_cp_y: Matrix5x3,
}

impl AeroPerturbation {
    pub fn zero() -> Self {
        AeroPerturbation {
            eps_force_n: Matrix5x3::zeros(),
            eps_force_y: Matrix5x3::zeros(),
            eps_force_a: 0.0,
            eps_cp_n: Matrix5x3::zeros(),
            eps_cp_y: Matrix5x3::zeros(),
        }
    }
}

/// Symmetric sampling bounds for [`AeroPerturbation`] entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationBounds {
    /// Max |ε| for the normal force coefficient matrix.
    pub force_n: f64,
    /// Max |ε| for the side force coefficient matrix.
    pub force_y: f64,
    /// Max |ε| for the axial force coefficient.
    pub force_a: f64,
    /// Max |ε| for the normal-set center of pressure matrix.
    pub cp_n: f64,
    /// Max |ε| for the side-set center of pressure matrix.
    pub cp_y: f64,
}

impl Default for PerturbationBounds {
    fn default() -> Self {
        PerturbationBounds { force_n: 0.1, force_y: 0.1, force_a: 0.1, cp_n: 0.01, cp_y: 0.01 }
    }
}

impl PerturbationBounds {
    pub fn zero() -> Self {
        PerturbationBounds { force_n: 0.0, force_y: 0.0, force_a: 0.0, cp_n: 0.0, cp_y: 0.0 }
    }

    pub fn scaled(force: f64, cp: f64) -> Self {
        PerturbationBounds { force_n: force, force_y: force, force_a: force, cp_n: cp, cp_y: cp }
    }
}

/// One entry of the mixture law: uniform within the bound with probability
/// one half, otherwise pinned to ±max with equal probability.
fn sample_entry<R: Rng>(rng: &mut R, max: f64) -> f64 {
    debug_assert!(max >= 0.0);
    if rng.random::<f64>() < 0.5 {
        rng.random_range(-max..=max)
    } else if rng.random::<bool>() {
        max
    } else {
        -max
    }
}

/// Draws a fresh per-episode perturbation from the configured bounds.
pub fn sample_perturbation<R: Rng>(rng: &mut R, bounds: &PerturbationBounds) -> AeroPerturbation {
    fn draw<R: Rng>(rng: &mut R, max: f64) -> Matrix5x3 {
        Matrix5x3::from_fn(|_, _| sample_entry(rng, max))
    }
    let eps_force_n = draw(rng, bounds.force_n);
    let eps_force_y = draw(rng, bounds.force_y);
    let eps_force_a = sample_entry(rng, bounds.force_a);
    let eps_cp_n = draw(rng, bounds.cp_n);
    let eps_cp_y = draw(rng, bounds.cp_y);
    AeroPerturbation { eps_force_n, eps_force_y, eps_force_a, eps_cp_n, eps_cp_y }
}

/// Unperturbed center-of-pressure matrices `(cp_N, cp_Y)`.
pub fn centers_of_pressure(geom: &MissileGeometry) -> Result<(Matrix5x3, Matrix5x3), GncError> {
    geom.validate()?;
    let a_n = 0.67 * geom.d * geom.x_n;
    let a_b = geom.d * (geom.x_l - geom.x_n);
    let cp_nose = Vector3::new(0.67 * geom.x_n, 0.0, 0.0);
    let cp_wing = Vector3::new(geom.x_n + geom.x_w + 0.7 * geom.c_rw - 0.2 * geom.c_tw, 0.0, 0.0);
    let cp_body = Vector3::new(
        (0.67 * a_n * geom.x_n + a_b * (geom.x_n + 0.5 * (geom.x_l - geom.x_n))) / (a_n + a_b),
        0.0,
        0.0,
    );
    let t = geom.tail_offset();
    let cp_lt = Vector3::new(geom.x_hl, -t, 0.0);
    let cp_rt = Vector3::new(geom.x_hl, t, 0.0);
    let cp_bt = Vector3::new(geom.x_hl, 0.0, -t);
    let cp_ut = Vector3::new(geom.x_hl, 0.0, t);

    let cp_n = Matrix5x3::from_rows(&[
        cp_nose.transpose(),
        cp_wing.transpose(),
        cp_body.transpose(),
        cp_lt.transpose(),
        cp_rt.transpose(),
    ]);
    let cp_y = Matrix5x3::from_rows(&[
        cp_nose.transpose(),
        cp_wing.transpose(),
        cp_body.transpose(),
        cp_bt.transpose(),
        cp_ut.transpose(),
    ]);
    Ok((cp_n, cp_y))
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Perturbed force coefficient matrices and axial coefficient.
///
/// `fins` are the actual deflections `[θ_LT, θ_RT, θ_BT, θ_UT]` (rad).
/// Requires supersonic flow; the axial coefficient is built from the
/// unperturbed lateral sums before its own scale factor is applied.
pub fn force_coefficients(
    geom: &MissileGeometry,
    perturb: &AeroPerturbation,
    alpha: f64,
    beta: f64,
    mach: f64,
    fins: [f64; 4],
) -> Result<(Matrix5x3, Matrix5x3, f64), GncError> {
    if !(mach > 1.0) {
        return Err(GncError::OutOfEnvelope(format!("mach {mach} <= 1: supersonic model only")));
    }
    debug_assert!(alpha.abs() < std::f64::consts::FRAC_PI_2);
    debug_assert!(beta.abs() < std::f64::consts::FRAC_PI_2);

    let eta = (mach * mach - 1.0).sqrt();
    let s_ref = geom.s_ref();
    let wing_gain = 8.0 * geom.s_wing() / (eta * s_ref);
    let body_gain = 1.5 * geom.s_plan() / (eta * s_ref);
    let tail_gain = 8.0 * geom.s_tail() / (eta * s_ref);

    let mut c_n = Matrix5x3::zeros();
    c_n[(0, 2)] = 2.0 * alpha.sin();
    c_n[(1, 2)] = wing_gain * alpha.sin();
    c_n[(2, 2)] = body_gain * sign(alpha) * alpha.sin() * alpha.sin();
    c_n[(3, 2)] = tail_gain * (alpha - fins[FIN_LT]).sin();
    c_n[(4, 2)] = tail_gain * (alpha - fins[FIN_RT]).sin();

    let mut c_y = Matrix5x3::zeros();
    c_y[(0, 1)] = 2.0 * beta.sin();
    c_y[(1, 1)] = wing_gain * beta.sin();
    c_y[(2, 1)] = body_gain * sign(beta) * beta.sin() * beta.sin();
    c_y[(3, 1)] = tail_gain * (beta - fins[FIN_BT]).sin();
    c_y[(4, 1)] = tail_gain * (beta - fins[FIN_UT]).sin();

    let sum_n: Vector3<f64> = c_n.row_sum().transpose();
    let sum_y: Vector3<f64> = c_y.row_sum().transpose();
    let lateral_norm = (sum_n.norm_squared() + sum_y.norm_squared()).sqrt();
    let c_a = (geom.c_a0 + geom.k_drag * lateral_norm) * (1.0 + perturb.eps_force_a);

    let c_n = c_n.zip_map(&perturb.eps_force_n, |c, e| c * (1.0 + e));
    let c_y = c_y.zip_map(&perturb.eps_force_y, |c, e| c * (1.0 + e));
    Ok((c_n, c_y, c_a))
}

/// Body-frame aerodynamic force (N) and torque (N·m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroLoads {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl AeroLoads {
    pub const ZERO: AeroLoads =
        AeroLoads { force: Vector3::new(0.0, 0.0, 0.0), torque: Vector3::new(0.0, 0.0, 0.0) };
}

/// Full load computation: per-component forces, moments about the center of
/// gravity, roll damping, and the sideslip-roll coupling torque.
#[allow(clippy::too_many_arguments)]
pub fn aero_loads(
    geom: &MissileGeometry,
    perturb: &AeroPerturbation,
    q_dyn: f64,
    alpha: f64,
    beta: f64,
    mach: f64,
    fins: [f64; 4],
    omega: Vector3<f64>,
    speed: f64,
) -> Result<AeroLoads, GncError> {
    debug_assert!(q_dyn >= 0.0);
    debug_assert!(speed > 0.0);
    let (c_n, c_y, c_a) = force_coefficients(geom, perturb, alpha, beta, mach, fins)?;
    let (cp_n, cp_y) = centers_of_pressure(geom)?;
    let cp_n = cp_n.zip_map(&perturb.eps_cp_n, |c, e| c * (1.0 + e));
    let cp_y = cp_y.zip_map(&perturb.eps_cp_y, |c, e| c * (1.0 + e));

    let q_s = q_dyn * geom.s_ref();
    let f_n = c_n * q_s;
    let f_y = c_y * q_s;
    let f_a = q_s * c_a;

    let force = Vector3::new(-f_a, -f_y.column(1).sum(), -f_n.column(2).sum());

    let cg = Vector3::new(geom.x_cg, 0.0, 0.0);
    let mut torque = Vector3::zeros();
    for i in 0..5 {
        let arm_n: Vector3<f64> = cp_n.row(i).transpose() - cg;
        let arm_y: Vector3<f64> = cp_y.row(i).transpose() - cg;
        torque += arm_n.cross(&f_n.row(i).transpose());
        torque += arm_y.cross(&f_y.row(i).transpose());
    }

    // Roll damping proportional to the pre-damping roll torque and the
    // degree-valued roll rate, plus the fixed sideslip-roll coupling.
    let roll_damp =
        4.0 * (-2.15 * geom.h_t / geom.d) * (torque.x * omega.x.to_degrees() * geom.d / (2.0 * speed));
    torque.x += roll_damp + 100.0 * beta;

    Ok(AeroLoads { force, torque })
}
