//! Small dense linear-algebra and integration routines.
//!
//! Everything here is sized for the problem at hand (6-state plant, 2×2
//! gain blocks, 36×36 Lyapunov systems): plain row-major storage, partial
//! pivoting, no blocking. The routines return [`CoreError`](crate::CoreError)
//! on shape mismatches, singular pivots, and non-finite intermediate values
//! rather than panicking.

mod lyapunov;
mod matrix;
mod ode;

pub use lyapunov::{lyapunov_residual, solve_lyapunov};
pub use matrix::Matrix;
pub use ode::rk4_step;

/// Time-grid settings for a fixed-step simulation.
///
/// `dt` is the capture interval (one trace row per `dt`); `substeps` splits
/// each capture interval into finer integration steps so fast adaptation
/// dynamics stay stable without inflating the trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Capture step in seconds.
    pub dt: f64,
    /// Final time in seconds.
    pub t_end: f64,
    /// Integration substeps per capture step (≥ 1).
    pub substeps: usize,
    /// Upper bound on total integration substeps for the whole run.
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 0.01,
            t_end: 23.0,
            substeps: 1,
            max_steps: 100_000_000,
        }
    }
}

impl IntegratorConfig {
    /// Number of capture intervals (trace rows minus one).
    pub fn capture_steps(&self) -> usize {
        libm::round(self.t_end / self.dt) as usize
    }

    /// Checks `dt > 0`, `t_end ≥ dt`, `substeps ≥ 1`, and the total substep
    /// count against `max_steps`.
    pub fn validate(&self) -> Result<(), crate::CoreError> {
        use crate::CoreError::InvalidConfig;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(InvalidConfig {
                field: "integrator.dt".into(),
                reason: "must be a positive finite step".into(),
            });
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(InvalidConfig {
                field: "integrator.t_end".into(),
                reason: "must be at least one step long".into(),
            });
        }
        if self.substeps == 0 {
            return Err(InvalidConfig {
                field: "integrator.substeps".into(),
                reason: "must be at least 1".into(),
            });
        }
        let total = self.capture_steps().saturating_mul(self.substeps);
        if total > self.max_steps {
            return Err(InvalidConfig {
                field: "integrator.t_end".into(),
                reason: "total step count exceeds max_steps".into(),
            });
        }
        Ok(())
    }
}

/// Infinity norm of a vector: the largest absolute component.
///
/// Returns 0 for an empty slice.
pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, &x| {
        let a = x.abs();
        if a > acc {
            a
        } else {
            acc
        }
    })
}
