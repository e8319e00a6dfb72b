//! Six-state twin-rotor aerodynamic plant: nonlinear dynamics, the structured
//! decomposition into matched/unmatched channels, and the time-varying
//! parameter schedule used by the robustness scenario.
//!
//! State layout: `x = [pitch, pitch rate, yaw, yaw rate, pitch-rotor torque,
//! yaw-rotor torque]` in `[rad, rad/s, rad, rad/s, N·m, N·m]`.

use crate::error::CoreError;
use crate::numerics::Matrix;

/// Number of plant states.
pub const STATE_DIM: usize = 6;
/// Number of control inputs (pitch rotor, yaw rotor).
pub const INPUT_DIM: usize = 2;
/// Width of the unmatched channel (first four state equations).
pub const UNMATCHED_DIM: usize = 4;

/// How the quadratic rotor-torque terms treat negative rotor states.
///
/// `Signed` uses `x·|x|`, which keeps the torque an odd, monotone function of
/// the rotor state so both rotors produce thrust of either sign. `Even` uses
/// the plain square `x²`, under which the pitch torque is bounded below by
/// `-a5²/(4·a3)` and the yaw input gain reverses sign for sufficiently
/// negative rotor torque — negative setpoints beyond a few hundredths of a
/// radian become unreachable. `Signed` is the default; `Even` is kept for
/// audits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorqueModel {
    /// Sign-preserving quadratic `x·|x|` (default).
    Signed,
    /// Plain even square `x²`.
    Even,
}

/// Which rotor state the yaw-rotor damping term acts on.
///
/// The self-consistent reading (`OnX6`, default) damps the yaw rotor with its
/// own torque state, giving a first-order lag; the literal alternative
/// (`OnX5`) couples the damping to the pitch-rotor state instead. Both are
/// supported so the discrepancy can be audited; the structured decomposition
/// is exact under either choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RotorDamping {
    /// `dx6/dt = -(a18/a17)·x6 + (a14/a17)·u2` (default).
    OnX6,
    /// `dx6/dt = -(a18/a17)·x5 + (a14/a17)·u2`.
    OnX5,
}

/// Physical parameters of the plant.
///
/// `a[i]` stores the constant conventionally named `a(i+1)`, so `a[0]` is
/// `a1`. Units: moments of inertia in kg·m² (`a1`, `a2`), torque and friction
/// coefficients in SI, rotor gains dimensionless. `a9` and `a11` are carried
/// for completeness but appear in no equation.
#[derive(Clone, Debug)]
pub struct PlantParams {
    /// Constants `a1..a18` (index shifted down by one).
    pub a: [f64; 18],
    /// Cross-coupling constant between pitch-rotor torque and yaw dynamics.
    pub k_c: f64,
    /// True 2×2 input gain; the physical input is `omega · u`.
    pub omega: Matrix,
    /// Rotor-torque nonlinearity convention.
    pub torque_model: TorqueModel,
    /// Yaw-rotor damping convention.
    pub rotor_damping: RotorDamping,
}

impl Default for PlantParams {
    /// Nominal bench values.
    fn default() -> Self {
        PlantParams {
            a: [
                6.8e-2, 2.0e-2, 0.0135, 0.0924, 0.02, 0.09, 0.32, 6e-3, 1e-3,
                0.1, 0.01, 0.5, 1.1, 0.8, 1.1, 1.0, 1.0, 1.0,
            ],
            k_c: -0.2,
            omega: Matrix::identity(2),
            torque_model: TorqueModel::Signed,
            rotor_damping: RotorDamping::OnX6,
        }
    }
}

impl PlantParams {
    /// One-based accessor: `ai(3)` returns the constant named `a3`.
    #[inline]
    pub fn ai(&self, i: usize) -> f64 {
        self.a[i - 1]
    }

    /// Checks the structural invariants: the four denominators `a1`, `a2`,
    /// `a15`, `a17` must be strictly positive, and the input gain must be a
    /// nonsingular 2×2 matrix with positive diagonal entries.
    pub fn validate(&self) -> Result<(), CoreError> {
        for (idx, name) in [(1usize, "a1"), (2, "a2"), (15, "a15"), (17, "a17")] {
            if !(self.ai(idx) > 0.0) {
                return Err(CoreError::InvalidConfig {
                    field: name.into(),
                    reason: "must be strictly positive (appears as a denominator)".into(),
                });
            }
        }
        if self.omega.rows() != 2 || self.omega.cols() != 2 {
            return Err(CoreError::InvalidConfig {
                field: "omega".into(),
                reason: "must be 2x2".into(),
            });
        }
        let det = self.omega.get(0, 0) * self.omega.get(1, 1)
            - self.omega.get(0, 1) * self.omega.get(1, 0);
        if det == 0.0 || !det.is_finite() {
            return Err(CoreError::InvalidConfig {
                field: "omega".into(),
                reason: "must be nonsingular".into(),
            });
        }
        if self.omega.get(0, 0) <= 0.0 || self.omega.get(1, 1) <= 0.0 {
            return Err(CoreError::InvalidConfig {
                field: "omega".into(),
                reason: "diagonal entries must be positive".into(),
            });
        }
        Ok(())
    }

    /// Quadratic-plus-linear rotor torque under the configured convention.
    #[inline]
    fn torque(&self, quad: f64, lin: f64, x: f64) -> f64 {
        match self.torque_model {
            TorqueModel::Signed => quad * x * libm::fabs(x) + lin * x,
            TorqueModel::Even => quad * x * x + lin * x,
        }
    }

    /// Pitch-rotor aerodynamic torque `tau_p(x5)`.
    #[inline]
    fn tau_pitch(&self, x5: f64) -> f64 {
        self.torque(self.ai(3), self.ai(5), x5)
    }
}

/// Time-varying parameter perturbation applied to the plant constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UncertaintyMode {
    /// Nominal constants at all times.
    None,
    /// Sinusoidal scaling of `a1..a14`: odd-indexed constants by
    /// `1 + amplitude·sin(freq_odd·t)`, even-indexed by
    /// `1 + amplitude·cos(freq_even·t)`.
    Case2,
}

/// Schedule describing how plant constants drift over a run.
#[derive(Clone, Copy, Debug)]
pub struct UncertaintySchedule {
    /// Perturbation family.
    pub mode: UncertaintyMode,
    /// Relative amplitude; must lie in `[0, 1)` so every constant keeps its
    /// sign.
    pub amplitude: f64,
    /// Angular frequency (rad/s) for the odd-indexed constants.
    pub freq_odd: f64,
    /// Angular frequency (rad/s) for the even-indexed constants.
    pub freq_even: f64,
}

impl Default for UncertaintySchedule {
    fn default() -> Self {
        UncertaintySchedule {
            mode: UncertaintyMode::None,
            amplitude: 0.2,
            freq_odd: 0.3,
            freq_even: 0.25,
        }
    }
}

impl UncertaintySchedule {
    /// Checks `amplitude ∈ [0, 1)`.
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.amplitude >= 0.0 && self.amplitude < 1.0) {
            return Err(CoreError::InvalidConfig {
                field: "uncertainty.amplitude".into(),
                reason: "must lie in [0, 1) so scaled constants keep their sign".into(),
            });
        }
        Ok(())
    }
}

/// Returns the plant constants in effect at time `t` under `sched`.
///
/// Only `a1..a14` participate in the `Case2` drift (the drifting subset);
/// `a15..a18`, `k_c`, and the input gain are never scaled.
pub fn scheduled_params(
    p_nominal: &PlantParams,
    sched: &UncertaintySchedule,
    t: f64,
) -> PlantParams {
    let mut p = p_nominal.clone();
    if let UncertaintyMode::Case2 = sched.mode {
        let odd = 1.0 + sched.amplitude * libm::sin(sched.freq_odd * t);
        let even = 1.0 + sched.amplitude * libm::cos(sched.freq_even * t);
        for i in 0..14 {
            // `a[i]` holds the constant numbered i+1.
            p.a[i] *= if (i + 1) % 2 == 1 { odd } else { even };
        }
    }
    p
}

/// Full nonlinear state derivative.
///
/// `u` is the commanded input; the physical input applied to the rotors is
/// `omega · u`. The dynamics are autonomous — time dependence enters only
/// through [`scheduled_params`], which callers apply before this call.
pub fn trms_derivative(x: &[f64], u: &[f64], p: &PlantParams) -> [f64; STATE_DIM] {
    assert_eq!(x.len(), STATE_DIM, "state must have 6 entries");
    assert_eq!(u.len(), INPUT_DIM, "input must have 2 entries");
    let (a1, a2) = (p.ai(1), p.ai(2));
    let (x1, x2, x4, x5, x6) = (x[0], x[1], x[3], x[4], x[5]);
    // Physical rotor inputs.
    let up1 = p.omega.get(0, 0) * u[0] + p.omega.get(0, 1) * u[1];
    let up2 = p.omega.get(1, 0) * u[0] + p.omega.get(1, 1) * u[1];
    let tau_p = p.tau_pitch(x5);
    let tau_y = p.torque(p.ai(4), p.ai(6), x6);
    let mut d = [0.0; STATE_DIM];
    d[0] = x2;
    d[1] = tau_p / a1 - (p.ai(7) / a1) * libm::sin(x1) - (p.ai(8) / a1) * x2
        + (0.0362 / a1) * x4 * x4 * libm::sin(2.0 * x1)
        - (p.ai(12) / a1) * tau_p * x4 * libm::cos(x1);
    d[2] = x4;
    d[3] = tau_y / a2 - (p.ai(10) / a2) * x4 - 1.75 * (p.k_c / a2) * tau_p;
    d[4] = -(p.ai(16) / p.ai(15)) * x5 + (p.ai(13) / p.ai(15)) * up1;
    d[5] = match p.rotor_damping {
        RotorDamping::OnX6 => -(p.ai(18) / p.ai(17)) * x6,
        RotorDamping::OnX5 => -(p.ai(18) / p.ai(17)) * x5,
    } + (p.ai(14) / p.ai(17)) * up2;
    d
}

/// Structured split of the dynamics into a linear part, a matched input
/// channel, and an unmatched nonlinearity channel.
///
/// The defining identity, exact for every state and input, is
/// `trms_derivative(x, u) = A·x + B_m·(omega·u + f1(x)) + B_um·f2(x)`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// 6×6 linear part (hover linearization without gravity stiffness).
    pub a: Matrix,
    /// 6×2 matched input channel.
    pub b_m: Matrix,
    /// 6×4 unmatched channel, `[I4; 0]`.
    pub b_um: Matrix,
    /// 2×6 output selector picking pitch and yaw angles.
    pub c: Matrix,
    params: PlantParams,
}

impl Decomposition {
    /// Matched nonlinearity; identically zero for this plant.
    pub fn f1(&self, _x: &[f64]) -> [f64; INPUT_DIM] {
        [0.0; INPUT_DIM]
    }

    /// Unmatched nonlinearity entering through `b_um`: everything in the
    /// first four state equations that the linear part does not carry.
    pub fn f2(&self, x: &[f64]) -> [f64; UNMATCHED_DIM] {
        assert_eq!(x.len(), STATE_DIM, "state must have 6 entries");
        let p = &self.params;
        let (a1, a2) = (p.ai(1), p.ai(2));
        let (x1, x4, x5, x6) = (x[0], x[3], x[4], x[5]);
        let tau_p = p.tau_pitch(x5);
        // Quadratic-only remainders: the linear parts a5·x5 and a6·x6 of the
        // torques already live in `a`.
        let tau_p_quad = tau_p - p.ai(5) * x5;
        let tau_y_quad = p.torque(p.ai(4), p.ai(6), x6) - p.ai(6) * x6;
        let f_pitch = tau_p_quad / a1 - (p.ai(7) / a1) * libm::sin(x1)
            + (0.0362 / a1) * x4 * x4 * libm::sin(2.0 * x1)
            - (p.ai(12) / a1) * tau_p * x4 * libm::cos(x1);
        let f_yaw = tau_y_quad / a2 - 1.75 * (p.k_c / a2) * tau_p_quad;
        [0.0, f_pitch, 0.0, f_yaw]
    }
}

/// Builds the structured decomposition for the given parameters.
pub fn decompose(p: &PlantParams) -> Decomposition {
    let (a1, a2) = (p.ai(1), p.ai(2));
    let mut a = Matrix::zeros(STATE_DIM, STATE_DIM);
    a.set(0, 1, 1.0);
    a.set(1, 1, -p.ai(8) / a1);
    a.set(1, 4, p.ai(5) / a1);
    a.set(2, 3, 1.0);
    a.set(3, 3, -p.ai(10) / a2);
    a.set(3, 4, -1.75 * (p.k_c / a2) * p.ai(5));
    a.set(3, 5, p.ai(6) / a2);
    a.set(4, 4, -p.ai(16) / p.ai(15));
    match p.rotor_damping {
        RotorDamping::OnX6 => a.set(5, 5, -p.ai(18) / p.ai(17)),
        RotorDamping::OnX5 => a.set(5, 4, -p.ai(18) / p.ai(17)),
    }
    let mut b_m = Matrix::zeros(STATE_DIM, INPUT_DIM);
    b_m.set(4, 0, p.ai(13) / p.ai(15));
    b_m.set(5, 1, p.ai(14) / p.ai(17));
    let mut b_um = Matrix::zeros(STATE_DIM, UNMATCHED_DIM);
    for i in 0..UNMATCHED_DIM {
        b_um.set(i, i, 1.0);
    }
    let mut c = Matrix::zeros(INPUT_DIM, STATE_DIM);
    c.set(0, 0, 1.0);
    c.set(1, 2, 1.0);
    Decomposition {
        a,
        b_m,
        b_um,
        c,
        params: p.clone(),
    }
}
