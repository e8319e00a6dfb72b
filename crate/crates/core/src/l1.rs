//! Adaptive controller with a state predictor, smooth-projection adaptation
//! laws, a DC feedforward gain, and an integrator-type feedback filter whose
//! diagonal gain is supplied per step (constant or externally scheduled).
//!
//! The controller estimates an input-gain matrix `omega_hat` and four
//! disturbance blocks: `theta1_hat`/`sigma1_hat` act through the matched
//! channel `b_m`, `theta2_hat`/`sigma2_hat` through the unmatched channel
//! `b_um`. The control signal is the state of the integrator
//! `du/dt = -K·eta_hat`, which closes a first-order low-pass filter around
//! the estimate channel.

use crate::error::CoreError;
use crate::numerics::{inf_norm, rk4_step, solve_lyapunov, Matrix};
use crate::plant::{INPUT_DIM, STATE_DIM, UNMATCHED_DIM};
use alloc::vec::Vec;

/// A closed scalar interval used as a per-component projection bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    /// Lower bound.
    pub lo: f64,
    /// Upper bound.
    pub hi: f64,
}

impl Interval {
    /// Symmetric interval `[-w, w]`.
    pub const fn symmetric(w: f64) -> Self {
        Interval { lo: -w, hi: w }
    }

    /// Midpoint of the interval.
    #[inline]
    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Half the interval length.
    #[inline]
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    fn validate(&self, field: &str) -> Result<(), CoreError> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(CoreError::InvalidConfig {
                field: field.into(),
                reason: "interval must satisfy lo < hi with finite bounds".into(),
            });
        }
        Ok(())
    }
}

/// Projection boxes for the five adaptive estimate blocks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptationBounds {
    /// Per-component box for the matched state-norm gain (2 components).
    pub theta1: Interval,
    /// Per-component box for the unmatched state-norm gain (4 components).
    pub theta2: Interval,
    /// Per-component box for the matched disturbance (2 components).
    pub sigma1: Interval,
    /// Per-component box for the unmatched disturbance (4 components).
    pub sigma2: Interval,
    /// Box for the diagonal entries of the input-gain estimate.
    pub omega_diag: Interval,
    /// Box for the off-diagonal entries of the input-gain estimate.
    pub omega_offdiag: Interval,
}

impl Default for AdaptationBounds {
    fn default() -> Self {
        AdaptationBounds {
            theta1: Interval::symmetric(50.0),
            theta2: Interval::symmetric(50.0),
            sigma1: Interval::symmetric(15.0),
            sigma2: Interval::symmetric(15.0),
            omega_diag: Interval { lo: 0.25, hi: 5.0 },
            omega_offdiag: Interval::symmetric(0.5),
        }
    }
}

impl AdaptationBounds {
    fn validate(&self) -> Result<(), CoreError> {
        self.theta1.validate("bounds.theta1")?;
        self.theta2.validate("bounds.theta2")?;
        self.sigma1.validate("bounds.sigma1")?;
        self.sigma2.validate("bounds.sigma2")?;
        self.omega_diag.validate("bounds.omega_diag")?;
        self.omega_offdiag.validate("bounds.omega_offdiag")?;
        Ok(())
    }

    /// Bounds for the input-gain estimate flattened row-major.
    fn omega_boxes(&self) -> [Interval; 4] {
        [
            self.omega_diag,
            self.omega_offdiag,
            self.omega_offdiag,
            self.omega_diag,
        ]
    }
}

/// How the 4-dimensional unmatched estimate enters the 2-dimensional
/// control channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnmatchedMode {
    /// Map through the DC approximation
    /// `M = (C·A_m⁻¹·B_m)⁻¹ · (C·A_m⁻¹·B_um)` (default).
    DcMap,
    /// Drop the unmatched estimate from the control law (`M = 0`).
    Ignore,
}

/// Static controller configuration.
#[derive(Clone, Debug)]
pub struct L1Config {
    /// 6×6 Hurwitz design matrix the predictor follows.
    pub a_m: Matrix,
    /// 6×2 matched input channel.
    pub b_m: Matrix,
    /// 6×4 unmatched channel.
    pub b_um: Matrix,
    /// 2×6 output selector.
    pub c: Matrix,
    /// 6×6 symmetric positive-definite Lyapunov right-hand side.
    pub q: Matrix,
    /// Scalar adaptation gain.
    pub gamma: f64,
    /// Default diagonal feedback filter gain (used when no schedule runs).
    pub k_const: [f64; INPUT_DIM],
    /// Projection boxes.
    pub bounds: AdaptationBounds,
    /// Smooth-projection tolerance as a fraction of each box half-width.
    pub proj_epsilon: f64,
    /// Treatment of the unmatched estimate in the control law.
    pub unmatched_mode: UnmatchedMode,
}

impl L1Config {
    /// Configuration with the standard defaults around the given design
    /// matrices: adaptation gain `1e5`, filter gain `10·I`, boxes `±50`
    /// (state-norm gains) and `±15` (disturbances), input-gain diagonal in
    /// `[0.25, 5]`, projection tolerance `0.1`, DC-mapped unmatched channel.
    pub fn with_design(a_m: Matrix, b_m: Matrix, b_um: Matrix, c: Matrix) -> Self {
        L1Config {
            a_m,
            b_m,
            b_um,
            c,
            q: Matrix::identity(STATE_DIM),
            gamma: 1e5,
            k_const: [10.0, 10.0],
            bounds: AdaptationBounds::default(),
            proj_epsilon: 0.1,
            unmatched_mode: UnmatchedMode::DcMap,
        }
    }

    fn validate(&self) -> Result<(), CoreError> {
        let dims: [(&Matrix, &str, usize, usize); 5] = [
            (&self.a_m, "a_m", STATE_DIM, STATE_DIM),
            (&self.b_m, "b_m", STATE_DIM, INPUT_DIM),
            (&self.b_um, "b_um", STATE_DIM, UNMATCHED_DIM),
            (&self.c, "c", INPUT_DIM, STATE_DIM),
            (&self.q, "q", STATE_DIM, STATE_DIM),
        ];
        for (m, name, r, c) in dims {
            if m.rows() != r || m.cols() != c {
                return Err(CoreError::InvalidConfig {
                    field: name.into(),
                    reason: "wrong shape".into(),
                });
            }
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(CoreError::InvalidConfig {
                field: "gamma".into(),
                reason: "must be positive and finite".into(),
            });
        }
        if self.k_const.iter().any(|k| !(*k > 0.0)) {
            return Err(CoreError::InvalidConfig {
                field: "k_const".into(),
                reason: "diagonal entries must be positive".into(),
            });
        }
        if !(self.proj_epsilon > 0.0) {
            return Err(CoreError::InvalidConfig {
                field: "proj_epsilon".into(),
                reason: "must be positive".into(),
            });
        }
        self.bounds.validate()
    }
}

/// Runtime state of the controller.
#[derive(Clone, Debug, PartialEq)]
pub struct ControllerState {
    /// Predictor state.
    pub x_hat: [f64; STATE_DIM],
    /// Input-gain estimate, row-major 2×2, initialized to the identity.
    pub omega_hat: [f64; 4],
    /// Matched state-norm gain estimate.
    pub theta1_hat: [f64; INPUT_DIM],
    /// Unmatched state-norm gain estimate.
    pub theta2_hat: [f64; UNMATCHED_DIM],
    /// Matched disturbance estimate.
    pub sigma1_hat: [f64; INPUT_DIM],
    /// Unmatched disturbance estimate.
    pub sigma2_hat: [f64; UNMATCHED_DIM],
    /// Control integrator state (the applied command).
    pub u: [f64; INPUT_DIM],
}

impl ControllerState {
    /// Initial state: predictor aligned with the measured state, identity
    /// input-gain estimate, all other estimates and the control at zero.
    pub fn init(x0: &[f64]) -> Self {
        assert_eq!(x0.len(), STATE_DIM, "state must have 6 entries");
        let mut x_hat = [0.0; STATE_DIM];
        x_hat.copy_from_slice(x0);
        ControllerState {
            x_hat,
            omega_hat: [1.0, 0.0, 0.0, 1.0],
            theta1_hat: [0.0; INPUT_DIM],
            theta2_hat: [0.0; UNMATCHED_DIM],
            sigma1_hat: [0.0; INPUT_DIM],
            sigma2_hat: [0.0; UNMATCHED_DIM],
            u: [0.0; INPUT_DIM],
        }
    }

    /// The 16 estimate values in trace order: the four input-gain entries
    /// row-major, then the matched and unmatched state-norm gains, then the
    /// matched and unmatched disturbances.
    pub fn estimates(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        out[..4].copy_from_slice(&self.omega_hat);
        out[4..6].copy_from_slice(&self.theta1_hat);
        out[6..10].copy_from_slice(&self.theta2_hat);
        out[10..12].copy_from_slice(&self.sigma1_hat);
        out[12..16].copy_from_slice(&self.sigma2_hat);
        out
    }
}

/// Derivatives of the five estimate blocks, already projected and scaled by
/// the adaptation gain.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateDerivatives {
    /// Input-gain estimate derivative, row-major 2×2.
    pub omega: [f64; 4],
    /// Matched state-norm gain derivative.
    pub theta1: [f64; INPUT_DIM],
    /// Unmatched state-norm gain derivative.
    pub theta2: [f64; UNMATCHED_DIM],
    /// Matched disturbance derivative.
    pub sigma1: [f64; INPUT_DIM],
    /// Unmatched disturbance derivative.
    pub sigma2: [f64; UNMATCHED_DIM],
}

/// The bundled reference design around a plant's hover linearization:
/// state feedback folded directly into the angle rows (pitch stiffness +6
/// and damping +1.5; yaw stiffness +10 and damping +2) and both rotor
/// poles moved to −1.5. The gravity term stays inside the pitch-stiffness
/// entry, so the design matrix keeps the linearization's structure — this
/// is the matrix checked into the bundled configs.
pub fn reference_design_matrix(plant: &crate::plant::PlantParams) -> Matrix {
    let dec = crate::plant::decompose(plant);
    let mut a_m = dec.a.clone();
    a_m.set(1, 0, a_m.get(1, 0) - 6.0);
    a_m.set(1, 1, a_m.get(1, 1) - 1.5);
    a_m.set(3, 2, a_m.get(3, 2) - 10.0);
    a_m.set(3, 3, a_m.get(3, 3) - 2.0);
    a_m.set(4, 4, -1.5);
    a_m.set(5, 5, -1.5);
    a_m
}

/// Feedforward gain achieving unit DC gain from reference to output:
/// `K_g = -(C·A_m⁻¹·B_m)⁻¹`.
pub fn compute_kg(a_m: &Matrix, b_m: &Matrix, c: &Matrix) -> Result<Matrix, CoreError> {
    let x = a_m.solve_multi(b_m)?;
    let g = c.matmul(&x)?;
    Ok(g.inverse()
        .map_err(|_| CoreError::SingularMatrix { context: "DC gain" })?
        .scale(-1.0))
}

/// DC map carrying the unmatched estimate into the control channel:
/// `M = (C·A_m⁻¹·B_m)⁻¹ · (C·A_m⁻¹·B_um)`.
pub fn unmatched_dc_map(
    a_m: &Matrix,
    b_m: &Matrix,
    b_um: &Matrix,
    c: &Matrix,
) -> Result<Matrix, CoreError> {
    let xm = a_m.solve_multi(b_m)?;
    let g = c.matmul(&xm)?;
    let ginv = g
        .inverse()
        .map_err(|_| CoreError::SingularMatrix { context: "DC gain" })?;
    let xum = a_m.solve_multi(b_um)?;
    ginv.matmul(&c.matmul(&xum)?)
}

/// Smooth projection of a candidate derivative `y` for a parameter `theta`
/// bounded per component by `bounds`, with boundary-layer fraction
/// `epsilon`.
///
/// Per component, with center `c` and half-width `w`, the boundary function
/// is `f = ((theta-c)² - w²)/(epsilon·w²)`; the derivative passes unchanged
/// while `f < 0` (interior) or while it points inward, and is scaled by
/// `(1 - f)` otherwise, vanishing at the inflated boundary `f = 1`. Under
/// forward-Euler updates this keeps the parameter inside the inflated box
/// `c ± w·√(1+epsilon)`.
pub fn proj(
    theta: &[f64],
    y: &[f64],
    bounds: &[Interval],
    epsilon: f64,
) -> Result<Vec<f64>, CoreError> {
    assert_eq!(theta.len(), y.len(), "theta and y must have equal length");
    assert_eq!(theta.len(), bounds.len(), "one bound per component");
    let mut out = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        out.push(proj_scalar(theta[i], y[i], bounds[i], epsilon)?);
    }
    Ok(out)
}

fn proj_scalar(theta: f64, y: f64, iv: Interval, epsilon: f64) -> Result<f64, CoreError> {
    let c = iv.center();
    let w = iv.half_width();
    let d = theta - c;
    let f = (d * d - w * w) / (epsilon * w * w);
    if f > 1.0 + 1e-12 {
        return Err(CoreError::StateCorruption {
            context: "adaptive estimate outside its inflated projection set",
        });
    }
    if f < 0.0 || d * y <= 0.0 {
        Ok(y)
    } else {
        Ok(y * (1.0 - f.min(1.0)))
    }
}

/// Hard clamp into the ε-inflated box `c ± w·√(1+epsilon)`; the backstop
/// that absorbs the finite overshoot a forward-Euler step can produce.
pub fn clamp_inflated(v: f64, iv: Interval, epsilon: f64) -> f64 {
    let c = iv.center();
    let w = iv.half_width() * libm::sqrt(1.0 + epsilon);
    v.clamp(c - w, c + w)
}

/// The controller with its derived matrices (Lyapunov certificate,
/// feedforward gain, unmatched DC map) precomputed from an [`L1Config`].
#[derive(Clone, Debug)]
pub struct L1Controller {
    cfg: L1Config,
    p: Matrix,
    k_g: Matrix,
    m_map: Matrix,
    /// `P·B_m`, 6×2.
    pb_m: Matrix,
    /// `P·B_um`, 6×4.
    pb_um: Matrix,
}

impl L1Controller {
    /// Validates the configuration, certifies `a_m` (the Lyapunov solve must
    /// produce a positive-definite `P`), and precomputes the derived gains.
    pub fn new(cfg: L1Config) -> Result<Self, CoreError> {
        cfg.validate()?;
        let p = solve_lyapunov(&cfg.a_m, &cfg.q)?;
        p.cholesky()?;
        let k_g = compute_kg(&cfg.a_m, &cfg.b_m, &cfg.c)?;
        let m_map = match cfg.unmatched_mode {
            UnmatchedMode::DcMap => unmatched_dc_map(&cfg.a_m, &cfg.b_m, &cfg.b_um, &cfg.c)?,
            UnmatchedMode::Ignore => Matrix::zeros(INPUT_DIM, UNMATCHED_DIM),
        };
        let pb_m = p.matmul(&cfg.b_m)?;
        let pb_um = p.matmul(&cfg.b_um)?;
        Ok(L1Controller {
            cfg,
            p,
            k_g,
            m_map,
            pb_m,
            pb_um,
        })
    }

    /// The validated configuration.
    pub fn config(&self) -> &L1Config {
        &self.cfg
    }

    /// Lyapunov certificate for the design matrix.
    pub fn p(&self) -> &Matrix {
        &self.p
    }

    /// Feedforward gain.
    pub fn k_g(&self) -> &Matrix {
        &self.k_g
    }

    /// Active unmatched-to-control map (zero under `Ignore`).
    pub fn dc_map(&self) -> &Matrix {
        &self.m_map
    }

    /// Matched regressor `x̃ᵀ·P·B_m` (length 2) and unmatched regressor
    /// `x̃ᵀ·P·B_um` (length 4) for the prediction error `x̃ = x̂ - x`.
    fn regressors(&self, cs: &ControllerState, x: &[f64]) -> ([f64; 2], [f64; 4]) {
        let mut xt = [0.0; STATE_DIM];
        for i in 0..STATE_DIM {
            xt[i] = cs.x_hat[i] - x[i];
        }
        let mut rm = [0.0; 2];
        let mut rum = [0.0; 4];
        for j in 0..INPUT_DIM {
            let mut acc = 0.0;
            for i in 0..STATE_DIM {
                acc += xt[i] * self.pb_m.get(i, j);
            }
            rm[j] = acc;
        }
        for j in 0..UNMATCHED_DIM {
            let mut acc = 0.0;
            for i in 0..STATE_DIM {
                acc += xt[i] * self.pb_um.get(i, j);
            }
            rum[j] = acc;
        }
        (rm, rum)
    }

    /// Matched and unmatched uncertainty reconstructions
    /// `eta1 = theta1_hat·‖x‖∞ + sigma1_hat` and
    /// `eta2 = theta2_hat·‖x‖∞ + sigma2_hat`.
    fn eta_components(&self, cs: &ControllerState, x: &[f64]) -> ([f64; 2], [f64; 4]) {
        let xinf = inf_norm(x);
        let mut eta1 = [0.0; 2];
        for i in 0..INPUT_DIM {
            eta1[i] = cs.theta1_hat[i] * xinf + cs.sigma1_hat[i];
        }
        let mut eta2 = [0.0; 4];
        for i in 0..UNMATCHED_DIM {
            eta2[i] = cs.theta2_hat[i] * xinf + cs.sigma2_hat[i];
        }
        (eta1, eta2)
    }

    /// Predictor derivative
    /// `A_m·x̂ + B_m·(omega_hat·u + theta1_hat·‖x‖∞ + sigma1_hat) +
    /// B_um·(theta2_hat·‖x‖∞ + sigma2_hat)`.
    ///
    /// The state norm is of the measured `x`, not the predictor state.
    pub fn predictor_derivative(
        &self,
        cs: &ControllerState,
        x: &[f64],
        u: &[f64; INPUT_DIM],
    ) -> [f64; STATE_DIM] {
        let (eta1, eta2) = self.eta_components(cs, x);
        self.predictor_derivative_raw(&cs.x_hat, &cs.omega_hat, u, &eta1, &eta2)
    }

    fn predictor_derivative_raw(
        &self,
        x_hat: &[f64],
        omega_hat: &[f64; 4],
        u: &[f64; INPUT_DIM],
        eta1: &[f64; 2],
        eta2: &[f64; 4],
    ) -> [f64; STATE_DIM] {
        let mut matched = [0.0; 2];
        matched[0] = omega_hat[0] * u[0] + omega_hat[1] * u[1] + eta1[0];
        matched[1] = omega_hat[2] * u[0] + omega_hat[3] * u[1] + eta1[1];
        let mut d = [0.0; STATE_DIM];
        for i in 0..STATE_DIM {
            let mut acc = 0.0;
            for j in 0..STATE_DIM {
                acc += self.cfg.a_m.get(i, j) * x_hat[j];
            }
            for j in 0..INPUT_DIM {
                acc += self.cfg.b_m.get(i, j) * matched[j];
            }
            for j in 0..UNMATCHED_DIM {
                acc += self.cfg.b_um.get(i, j) * eta2[j];
            }
            d[i] = acc;
        }
        d
    }

    /// Projected adaptation-law derivatives, each scaled by the adaptation
    /// gain. The drive terms are built from the prediction error: matched
    /// blocks regress on `x̃ᵀ·P·B_m`, unmatched blocks on `x̃ᵀ·P·B_um`; the
    /// state-norm gains carry an extra `‖x‖∞` factor and the input-gain
    /// estimate multiplies the current command.
    pub fn adaptation_derivative(
        &self,
        cs: &ControllerState,
        x: &[f64],
        u: &[f64; INPUT_DIM],
    ) -> Result<EstimateDerivatives, CoreError> {
        let (rm, rum) = self.regressors(cs, x);
        let xinf = inf_norm(x);
        let g = self.cfg.gamma;
        let eps = self.cfg.proj_epsilon;
        let b = &self.cfg.bounds;
        let ob = b.omega_boxes();

        let mut omega = [0.0; 4];
        for i in 0..INPUT_DIM {
            for j in 0..INPUT_DIM {
                let idx = 2 * i + j;
                let drive = -rm[i] * u[j];
                omega[idx] = g * proj_scalar(cs.omega_hat[idx], drive, ob[idx], eps)?;
            }
        }
        let mut theta1 = [0.0; 2];
        let mut sigma1 = [0.0; 2];
        for i in 0..INPUT_DIM {
            theta1[i] = g * proj_scalar(cs.theta1_hat[i], -rm[i] * xinf, b.theta1, eps)?;
            sigma1[i] = g * proj_scalar(cs.sigma1_hat[i], -rm[i], b.sigma1, eps)?;
        }
        let mut theta2 = [0.0; 4];
        let mut sigma2 = [0.0; 4];
        for i in 0..UNMATCHED_DIM {
            theta2[i] = g * proj_scalar(cs.theta2_hat[i], -rum[i] * xinf, b.theta2, eps)?;
            sigma2[i] = g * proj_scalar(cs.sigma2_hat[i], -rum[i], b.sigma2, eps)?;
        }
        Ok(EstimateDerivatives {
            omega,
            theta1,
            theta2,
            sigma1,
            sigma2,
        })
    }

    /// Filter input `eta_hat = omega_hat·u + eta1 + M·eta2 - K_g·r`.
    pub fn eta_hat(
        &self,
        cs: &ControllerState,
        x: &[f64],
        r: &[f64; INPUT_DIM],
    ) -> [f64; INPUT_DIM] {
        let (eta1, eta2) = self.eta_components(cs, x);
        let base = self.control_bias(&eta1, &eta2, r);
        [
            cs.omega_hat[0] * cs.u[0] + cs.omega_hat[1] * cs.u[1] + base[0],
            cs.omega_hat[2] * cs.u[0] + cs.omega_hat[3] * cs.u[1] + base[1],
        ]
    }

    /// The command-independent part of the filter input:
    /// `eta1 + M·eta2 - K_g·r`.
    fn control_bias(
        &self,
        eta1: &[f64; 2],
        eta2: &[f64; 4],
        r: &[f64; INPUT_DIM],
    ) -> [f64; INPUT_DIM] {
        let mut out = [0.0; INPUT_DIM];
        for i in 0..INPUT_DIM {
            let mut acc = eta1[i];
            for j in 0..UNMATCHED_DIM {
                acc += self.m_map.get(i, j) * eta2[j];
            }
            for j in 0..INPUT_DIM {
                acc -= self.k_g.get(i, j) * r[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Control integrator derivative `du/dt = -K·eta_hat` for a diagonal
    /// positive gain.
    pub fn control_derivative(
        eta: &[f64; INPUT_DIM],
        k_diag: &[f64; INPUT_DIM],
    ) -> Result<[f64; INPUT_DIM], CoreError> {
        if k_diag.iter().any(|k| !(*k > 0.0)) {
            return Err(CoreError::InvalidConfig {
                field: "K".into(),
                reason: "filter gain diagonal must be positive".into(),
            });
        }
        Ok([-k_diag[0] * eta[0], -k_diag[1] * eta[1]])
    }

    /// Advances the controller one integration step of size `dt`.
    ///
    /// The predictor state and the control integrator advance jointly by
    /// one RK4 step; within it the measured state, the reference, the
    /// estimates, and the held command in the predictor's input term stay
    /// frozen at their step-start values, while the control integrator sees
    /// its own live state through `omega_hat·u`. The five estimate blocks
    /// advance by projected forward Euler and are then hard-clamped into
    /// their inflated boxes.
    pub fn controller_step(
        &self,
        cs: &ControllerState,
        x: &[f64],
        r: &[f64; INPUT_DIM],
        k_diag: [f64; INPUT_DIM],
        dt: f64,
    ) -> Result<ControllerState, CoreError> {
        assert_eq!(x.len(), STATE_DIM, "state must have 6 entries");
        if k_diag.iter().any(|k| !(*k > 0.0)) {
            return Err(CoreError::InvalidConfig {
                field: "K".into(),
                reason: "filter gain diagonal must be positive".into(),
            });
        }
        let (eta1, eta2) = self.eta_components(cs, x);
        let bias = self.control_bias(&eta1, &eta2, r);
        let u_held = cs.u;
        let d_est = self.adaptation_derivative(cs, x, &u_held)?;

        // Joint predictor + control-integrator step. Layout: z = [x_hat; u].
        let mut z0 = [0.0; STATE_DIM + INPUT_DIM];
        z0[..STATE_DIM].copy_from_slice(&cs.x_hat);
        z0[STATE_DIM..].copy_from_slice(&cs.u);
        let omega_hat = cs.omega_hat;
        let mut f = |_t: f64, z: &[f64], dz: &mut [f64]| {
            let d = self.predictor_derivative_raw(
                &z[..STATE_DIM],
                &omega_hat,
                &u_held,
                &eta1,
                &eta2,
            );
            dz[..STATE_DIM].copy_from_slice(&d);
            for i in 0..INPUT_DIM {
                let live = omega_hat[2 * i] * z[STATE_DIM]
                    + omega_hat[2 * i + 1] * z[STATE_DIM + 1];
                dz[STATE_DIM + i] = -k_diag[i] * (live + bias[i]);
            }
        };
        let z1 = rk4_step(&mut f, &z0, 0.0, dt)?;

        let eps = self.cfg.proj_epsilon;
        let b = &self.cfg.bounds;
        let ob = b.omega_boxes();
        let mut next = cs.clone();
        next.x_hat.copy_from_slice(&z1[..STATE_DIM]);
        next.u.copy_from_slice(&z1[STATE_DIM..]);
        for i in 0..4 {
            next.omega_hat[i] =
                clamp_inflated(cs.omega_hat[i] + dt * d_est.omega[i], ob[i], eps);
        }
        for i in 0..INPUT_DIM {
            next.theta1_hat[i] =
                clamp_inflated(cs.theta1_hat[i] + dt * d_est.theta1[i], b.theta1, eps);
            next.sigma1_hat[i] =
                clamp_inflated(cs.sigma1_hat[i] + dt * d_est.sigma1[i], b.sigma1, eps);
        }
        for i in 0..UNMATCHED_DIM {
            next.theta2_hat[i] =
                clamp_inflated(cs.theta2_hat[i] + dt * d_est.theta2[i], b.theta2, eps);
            next.sigma2_hat[i] =
                clamp_inflated(cs.sigma2_hat[i] + dt * d_est.sigma2[i], b.sigma2, eps);
        }
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{decompose, PlantParams};
    use approx::assert_abs_diff_eq;

    fn design_a_m() -> Matrix {
        reference_design_matrix(&PlantParams::default())
    }

    fn test_controller() -> L1Controller {
        let dec = decompose(&PlantParams::default());
        let cfg = L1Config::with_design(design_a_m(), dec.b_m, dec.b_um, dec.c);
        L1Controller::new(cfg).unwrap()
    }

    #[test]
    fn feedforward_gain_toy_cases() {
        // A = -I, B = C = I: -C·A⁻¹·B = I, so K_g = I.
        let kg = compute_kg(
            &Matrix::identity(2).scale(-1.0),
            &Matrix::identity(2),
            &Matrix::identity(2),
        )
        .unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(kg.get(i, j), if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
        // Diagonal case: A = diag(-2,-4) → K_g = diag(2,4).
        let a = Matrix::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, -4.0]).unwrap();
        let kg = compute_kg(&a, &Matrix::identity(2), &Matrix::identity(2)).unwrap();
        assert_abs_diff_eq!(kg.get(0, 0), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(kg.get(1, 1), 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(kg.get(0, 1), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn feedforward_identity_on_design_matrix() {
        let ctrl = test_controller();
        let cfg = ctrl.config();
        // -C·A_m⁻¹·B_m·K_g must be I within 1e-9.
        let x = cfg.a_m.solve_multi(&cfg.b_m).unwrap();
        let g = cfg.c.matmul(&x).unwrap().scale(-1.0);
        let prod = g.matmul(ctrl.k_g()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod.get(i, j) - expect).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn lyapunov_certificate_holds_for_design_matrix() {
        let ctrl = test_controller();
        let p = ctrl.p();
        // Symmetric and positive definite by construction; spot-check the
        // residual directly.
        let res =
            crate::numerics::lyapunov_residual(&ctrl.config().a_m, p, &ctrl.config().q).unwrap();
        assert!(res <= 1e-9 * ctrl.config().q.frobenius_norm());
        assert!(p.cholesky().is_ok());
    }

    #[test]
    fn predictor_derivative_single_term_activations() {
        let ctrl = test_controller();
        let mut cs = ControllerState::init(&[0.0; 6]);
        cs.omega_hat = [0.0; 4];
        // All estimates zero: derivative vanishes.
        let d = ctrl.predictor_derivative(&cs, &[0.0; 6], &[0.0; 2]);
        assert_eq!(d, [0.0; 6]);
        // sigma1 = e1 alone: derivative is the first column of b_m.
        cs.sigma1_hat = [1.0, 0.0];
        let d = ctrl.predictor_derivative(&cs, &[0.0; 6], &[0.0; 2]);
        for i in 0..6 {
            assert_abs_diff_eq!(d[i], ctrl.config().b_m.get(i, 0), epsilon = 1e-15);
        }
        // Predictor state e1 alone: derivative is the first column of a_m.
        cs.sigma1_hat = [0.0; 2];
        cs.x_hat = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let d = ctrl.predictor_derivative(&cs, &[0.0; 6], &[0.0; 2]);
        for i in 0..6 {
            assert_abs_diff_eq!(d[i], ctrl.config().a_m.get(i, 0), epsilon = 1e-15);
        }
        // The norm factor uses the measured state: theta1 = e1 with x = 2e3.
        cs.x_hat = [0.0; 6];
        cs.theta1_hat = [1.0, 0.0];
        let x = [0.0, 0.0, 2.0, 0.0, 0.0, 0.0];
        let d = ctrl.predictor_derivative(&cs, &x, &[0.0; 2]);
        for i in 0..6 {
            assert_abs_diff_eq!(d[i], 2.0 * ctrl.config().b_m.get(i, 0), epsilon = 1e-15);
        }
    }

    #[test]
    fn projection_interior_boundary_and_outward() {
        let iv = Interval::symmetric(50.0);
        // Interior: pass-through.
        assert_eq!(proj_scalar(0.0, 123.0, iv, 0.1).unwrap(), 123.0);
        // On the nominal boundary moving inward: pass-through.
        assert_eq!(proj_scalar(50.0, -7.0, iv, 0.1).unwrap(), -7.0);
        // At the inflated boundary moving outward: fully removed.
        let th = 50.0 * (1.1f64).sqrt();
        let y = proj_scalar(th, 9.0, iv, 0.1).unwrap();
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-9);
        // Outside the inflated set: invariant breach.
        assert!(proj_scalar(th + 1.0, 1.0, iv, 0.1).is_err());
        // Vector form applies per component.
        let out = proj(&[0.0, 50.0], &[3.0, -1.0], &[iv, iv], 0.1).unwrap();
        assert_eq!(out, alloc::vec![3.0, -1.0]);
    }

    #[test]
    fn projection_scales_outward_drive_between_boundaries() {
        let iv = Interval::symmetric(50.0);
        // Halfway into the boundary layer (f = 0.5) the outward drive is
        // halved: (theta² - w²)/(0.1·w²) = 0.5 at theta² = 1.05·w².
        let th = 50.0 * (1.05f64).sqrt();
        let y = proj_scalar(th, 10.0, iv, 0.1).unwrap();
        assert_abs_diff_eq!(y, 5.0, epsilon = 1e-9);
    }

    #[test]
    fn adaptation_derivative_matches_hand_regressors() {
        let ctrl = test_controller();
        let mut cs = ControllerState::init(&[0.0; 6]);
        // Make x_hat - x = e1 with ‖x‖∞ = 1: x = -e1·0 … choose x_hat = e1,
        // x = [0,0,0,0,1,0] so the norm is 1 but xt = e1 - e5.
        // Simpler: x_hat = e1 + x with x = e5.
        let x = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        cs.x_hat = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let d = ctrl.adaptation_derivative(&cs, &x, &[0.0; 2]).unwrap();
        let g = ctrl.config().gamma;
        for j in 0..2 {
            // xt = e1: regressor row is row 0 of P·B_m.
            let expect = -g * ctrl.pb_m.get(0, j);
            assert_abs_diff_eq!(d.theta1[j], expect, epsilon = 1e-9 * g);
            assert_abs_diff_eq!(d.sigma1[j], expect, epsilon = 1e-9 * g);
        }
        for j in 0..4 {
            let expect = -g * ctrl.pb_um.get(0, j);
            assert_abs_diff_eq!(d.theta2[j], expect, epsilon = 1e-9 * g);
            assert_abs_diff_eq!(d.sigma2[j], expect, epsilon = 1e-9 * g);
        }
        // Zero command: the input-gain estimate does not move.
        assert_eq!(d.omega, [0.0; 4]);
        // Zero prediction error: everything is still.
        let cs0 = ControllerState::init(&x);
        let d0 = ctrl.adaptation_derivative(&cs0, &x, &[1.0, -2.0]).unwrap();
        assert_eq!(d0.omega, [0.0; 4]);
        assert_eq!(d0.theta1, [0.0; 2]);
        assert_eq!(d0.theta2, [0.0; 4]);
        assert_eq!(d0.sigma1, [0.0; 2]);
        assert_eq!(d0.sigma2, [0.0; 4]);
    }

    #[test]
    fn eta_hat_feedforward_only() {
        let ctrl = test_controller();
        let cs = ControllerState::init(&[0.0; 6]);
        let eta = ctrl.eta_hat(&cs, &[0.0; 6], &[0.0; 2]);
        assert_eq!(eta, [0.0; 2]);
        // All estimates zero, r = e1: eta = -K_g·e1 (first column of K_g,
        // negated).
        let eta = ctrl.eta_hat(&cs, &[0.0; 6], &[1.0, 0.0]);
        assert_abs_diff_eq!(eta[0], -ctrl.k_g().get(0, 0), epsilon = 1e-12);
        assert_abs_diff_eq!(eta[1], -ctrl.k_g().get(1, 0), epsilon = 1e-12);
    }

    #[test]
    fn unmatched_mode_ignore_drops_eta2() {
        let dec = decompose(&PlantParams::default());
        let mut cfg = L1Config::with_design(design_a_m(), dec.b_m, dec.b_um, dec.c);
        cfg.unmatched_mode = UnmatchedMode::Ignore;
        let ignore = L1Controller::new(cfg).unwrap();
        let dcmap = test_controller();
        let mut cs = ControllerState::init(&[0.0; 6]);
        cs.sigma2_hat = [1.0, -2.0, 0.5, 3.0];
        let r = [0.2, -0.1];
        let e_ignore = ignore.eta_hat(&cs, &[0.0; 6], &r);
        let e_dcmap = dcmap.eta_hat(&cs, &[0.0; 6], &r);
        assert_ne!(e_ignore, e_dcmap);
        // With eta2 = 0 the two modes agree.
        cs.sigma2_hat = [0.0; 4];
        cs.theta1_hat = [0.3, -0.4];
        let e_ignore = ignore.eta_hat(&cs, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], &r);
        let e_dcmap = dcmap.eta_hat(&cs, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], &r);
        for i in 0..2 {
            assert_abs_diff_eq!(e_ignore[i], e_dcmap[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn control_derivative_examples() {
        assert_eq!(
            L1Controller::control_derivative(&[0.0, 0.0], &[10.0, 10.0]).unwrap(),
            [0.0, 0.0]
        );
        assert_eq!(
            L1Controller::control_derivative(&[1.0, 1.0], &[10.0, 10.0]).unwrap(),
            [-10.0, -10.0]
        );
        assert!(L1Controller::control_derivative(&[1.0, 1.0], &[0.0, 10.0]).is_err());
    }

    #[test]
    fn filter_subsystem_settles_to_unit_dc_gain() {
        // Frozen estimates, identity input-gain estimate, constant source s0
        // standing in for the estimate channel: du/dt = -K(u + s0). The
        // filter's DC gain is unit, so u → -s0; within 1% after 10/k
        // seconds.
        let s0 = [0.7, -0.3];
        let k = [10.0, 10.0];
        let mut u = alloc::vec![0.0, 0.0];
        let dt = 1e-3;
        let mut f = |_t: f64, z: &[f64], dz: &mut [f64]| {
            let eta = [z[0] + s0[0], z[1] + s0[1]];
            let d = L1Controller::control_derivative(&eta, &k).unwrap();
            dz[0] = d[0];
            dz[1] = d[1];
        };
        let horizon = (10.0 / k[0] / dt) as usize;
        for _ in 0..horizon {
            u = rk4_step(&mut f, &u, 0.0, dt).unwrap();
        }
        for i in 0..2 {
            assert!(
                (u[i] + s0[i]).abs() <= 0.01 * s0[i].abs(),
                "channel {i} settled to {} (target {})",
                u[i],
                -s0[i]
            );
        }
    }

    #[test]
    fn zero_everything_stays_zero() {
        let ctrl = test_controller();
        let mut cs = ControllerState::init(&[0.0; 6]);
        for _ in 0..100 {
            cs = ctrl
                .controller_step(&cs, &[0.0; 6], &[0.0, 0.0], [10.0, 10.0], 0.001)
                .unwrap();
        }
        assert_eq!(cs.x_hat, [0.0; 6]);
        assert_eq!(cs.u, [0.0; 2]);
        assert_eq!(cs.omega_hat, [1.0, 0.0, 0.0, 1.0]);
        assert_eq!(cs.theta1_hat, [0.0; 2]);
        assert_eq!(cs.sigma2_hat, [0.0; 4]);
    }

    #[test]
    fn predictor_consistency_against_its_own_model() {
        // Plant replaced by the predictor model itself: zero nonlinearity,
        // true input gain = identity, estimates frozen at truth (gamma → 0).
        // The prediction error must stay at integration-noise level.
        let dec = decompose(&PlantParams::default());
        let mut cfg = L1Config::with_design(design_a_m(), dec.b_m, dec.b_um, dec.c);
        cfg.gamma = 1e-30; // freeze adaptation without touching the laws
        let ctrl = L1Controller::new(cfg).unwrap();
        let a_m = ctrl.config().a_m.clone();
        let b_m = ctrl.config().b_m.clone();

        let mut x = alloc::vec![0.0; 6];
        let mut cs = ControllerState::init(&x);
        let dt = 0.01;
        let mut max_xt = 0.0f64;
        for k in 0..2300 {
            let t = k as f64 * dt;
            let r = [0.45 * libm::sin(0.2 * t), 0.45 * libm::sin(0.2 * t)];
            let u_held = cs.u;
            cs = ctrl.controller_step(&cs, &x, &r, [10.0, 10.0], dt).unwrap();
            let mut f = |_t: f64, xx: &[f64], dx: &mut [f64]| {
                let lin = a_m.matvec(xx).unwrap();
                let drive = b_m.matvec(&u_held).unwrap();
                for i in 0..6 {
                    dx[i] = lin[i] + drive[i];
                }
            };
            x = rk4_step(&mut f, &x, t, dt).unwrap();
            for i in 0..6 {
                max_xt = max_xt.max((cs.x_hat[i] - x[i]).abs());
            }
        }
        assert!(
            max_xt <= 1e-10,
            "prediction error should vanish, got {max_xt}"
        );
        // The run actually moved.
        assert!(inf_norm(&x) > 0.01);
    }

    #[test]
    fn estimates_stay_inside_inflated_boxes_under_adversarial_drive() {
        let ctrl = test_controller();
        let b = ctrl.config().bounds;
        let eps = ctrl.config().proj_epsilon;
        let mut cs = ControllerState::init(&[0.0; 6]);
        // Large persistent prediction error drives every law at full rate.
        cs.x_hat = [5.0, -5.0, 5.0, -5.0, 5.0, -5.0];
        let x = [0.1, 0.2, -0.1, 0.0, 0.3, -0.2];
        for _ in 0..500 {
            cs = ctrl
                .controller_step(&cs, &x, &[0.45, -0.45], [10.0, 10.0], 0.001)
                .unwrap();
            // Reset the predictor state so the error stays adversarial.
            cs.x_hat = [5.0, -5.0, 5.0, -5.0, 5.0, -5.0];
            let infl = |iv: Interval| iv.half_width() * (1.0 + eps).sqrt();
            for v in cs.theta1_hat {
                assert!(v.abs() <= infl(b.theta1) + 1e-12);
            }
            for v in cs.theta2_hat {
                assert!(v.abs() <= infl(b.theta2) + 1e-12);
            }
            for v in cs.sigma1_hat {
                assert!(v.abs() <= infl(b.sigma1) + 1e-12);
            }
            for v in cs.sigma2_hat {
                assert!(v.abs() <= infl(b.sigma2) + 1e-12);
            }
            for (i, v) in cs.omega_hat.iter().enumerate() {
                let iv = ctrl.config().bounds.omega_boxes()[i];
                let c = iv.center();
                let w = infl(iv);
                assert!(*v >= c - w - 1e-12 && *v <= c + w + 1e-12);
            }
        }
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let dec = decompose(&PlantParams::default());
        let good = L1Config::with_design(design_a_m(), dec.b_m.clone(), dec.b_um.clone(), dec.c.clone());
        assert!(L1Controller::new(good.clone()).is_ok());
        let mut bad = good.clone();
        bad.gamma = 0.0;
        assert!(L1Controller::new(bad).is_err());
        let mut bad = good.clone();
        bad.k_const = [10.0, 0.0];
        assert!(L1Controller::new(bad).is_err());
        let mut bad = good.clone();
        bad.bounds.theta1 = Interval { lo: 1.0, hi: 1.0 };
        assert!(L1Controller::new(bad).is_err());
        // A non-Hurwitz design matrix must be rejected by the certificate.
        let mut bad = good.clone();
        bad.a_m = Matrix::identity(6);
        assert!(L1Controller::new(bad).is_err());
    }
}
