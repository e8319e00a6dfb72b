//! Closed-loop simulation: the adaptive controller and the twin-rotor
//! plant advanced in lockstep on a fixed grid, with the feedback-filter
//! gain either constant or scheduled by the fuzzy engine at the capture
//! rate.
//!
//! The loop runs at the substep rate `h = dt/substeps`. Every substep the
//! controller advances one step (measured state, reference, estimates, and
//! held command frozen at substep start) and the plant integrates one RK4
//! step under the same held command, with time-varying parameters sampled
//! at the integrator's stage times. Every `substeps`-th step is a capture:
//! the tracking error and its backward-difference rate are formed, the
//! gain schedule runs, and one trace row is recorded. Divergence truncates
//! the trace and sets a flag instead of failing.

use alloc::vec::Vec;

use crate::error::CoreError;
use crate::fuzzy::{
    decode_and_repair, rate_estimate, schedule_gain, DecodedMfs, FilterSchedule,
    FuzzyParamVector, RuleBase,
};
use crate::l1::{ControllerState, L1Config, L1Controller};
use crate::mopso::ObjectivePair;
use crate::numerics::{inf_norm, rk4_step, IntegratorConfig};
use crate::plant::{scheduled_params, trms_derivative, PlantParams, UncertaintyMode, UncertaintySchedule};

/// State magnitude beyond which a run is declared divergent (shared with
/// the optimizer's objective sentinel policy).
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// One additive term of a reference channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SignalTerm {
    /// `amplitude · sin(frequency·t + phase)`.
    Sinusoid {
        /// Peak value.
        amplitude: f64,
        /// Angular frequency in rad/s.
        frequency: f64,
        /// Phase offset in rad.
        phase: f64,
    },
    /// `amplitude` for `t ≥ time`, zero before.
    Step {
        /// Plateau value.
        amplitude: f64,
        /// Onset time in seconds.
        time: f64,
    },
    /// A constant offset.
    Constant {
        /// The offset value.
        value: f64,
    },
}

impl SignalTerm {
    fn eval(&self, t: f64) -> f64 {
        match *self {
            SignalTerm::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => amplitude * libm::sin(frequency * t + phase),
            SignalTerm::Step { amplitude, time } => {
                if t >= time {
                    amplitude
                } else {
                    0.0
                }
            }
            SignalTerm::Constant { value } => value,
        }
    }

    fn validate(&self, field: &str) -> Result<(), CoreError> {
        let finite = match *self {
            SignalTerm::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => amplitude.is_finite() && frequency.is_finite() && phase.is_finite(),
            SignalTerm::Step { amplitude, time } => amplitude.is_finite() && time.is_finite(),
            SignalTerm::Constant { value } => value.is_finite(),
        };
        if finite {
            Ok(())
        } else {
            Err(CoreError::InvalidConfig {
                field: field.into(),
                reason: "signal term has a non-finite parameter".into(),
            })
        }
    }
}

/// Two-channel reference: each channel is a sum of terms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Reference {
    /// Terms per output channel (pitch, yaw).
    pub channels: [Vec<SignalTerm>; 2],
}

impl Reference {
    /// The same sinusoid `amplitude·sin(frequency·t + phase)` on both
    /// channels.
    pub fn sine_both(amplitude: f64, frequency: f64, phase: f64) -> Self {
        let term = SignalTerm::Sinusoid {
            amplitude,
            frequency,
            phase,
        };
        Reference {
            channels: [alloc::vec![term], alloc::vec![term]],
        }
    }

    /// Zero on both channels.
    pub fn zero() -> Self {
        Reference::default()
    }

    /// The reference value at `t`.
    pub fn eval(&self, t: f64) -> [f64; 2] {
        [
            self.channels[0].iter().map(|s| s.eval(t)).sum(),
            self.channels[1].iter().map(|s| s.eval(t)).sum(),
        ]
    }

    fn validate(&self) -> Result<(), CoreError> {
        for (ch, terms) in self.channels.iter().enumerate() {
            for term in terms {
                term.validate(if ch == 0 {
                    "reference.channel1"
                } else {
                    "reference.channel2"
                })?;
            }
        }
        Ok(())
    }
}

/// Feedback-filter gain source.
#[derive(Clone, Debug, PartialEq)]
pub enum FilterSpec {
    /// Fixed diagonal gain.
    Constant {
        /// The two diagonal entries.
        k_diag: [f64; 2],
    },
    /// Fuzzy-scheduled gain from a 32-parameter membership vector.
    Fuzzy {
        /// Membership parameters (repaired on load).
        params: FuzzyParamVector,
        /// Scaling constants and deadband of the schedule.
        schedule: FilterSchedule,
    },
}

/// A complete closed-loop scenario, pure of any I/O concern.
#[derive(Clone, Debug)]
pub struct SimScenario {
    /// Nominal plant constants.
    pub plant: PlantParams,
    /// Time variation applied to the plant constants.
    pub uncertainty: UncertaintySchedule,
    /// Controller design and adaptation configuration.
    pub controller: L1Config,
    /// Feedback-filter gain source.
    pub filter: FilterSpec,
    /// Reference signal.
    pub reference: Reference,
    /// Plant initial state.
    pub initial_state: [f64; 6],
    /// Optional initial tracking error: when set, the two output angles
    /// are overwritten with `r(0) − e(0)` so the run starts at exactly
    /// this error.
    pub initial_error: Option<[f64; 2]>,
    /// Grid and substep configuration.
    pub integrator: IntegratorConfig,
}

/// One captured sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    /// Capture time.
    pub t: f64,
    /// Plant state.
    pub x: [f64; 6],
    /// Predictor state.
    pub x_hat: [f64; 6],
    /// Measured outputs (pitch, yaw).
    pub y: [f64; 2],
    /// Reference values.
    pub r: [f64; 2],
    /// Tracking error `r − y`.
    pub e: [f64; 2],
    /// Control command.
    pub u: [f64; 2],
    /// Feedback-filter diagonal in effect.
    pub k_diag: [f64; 2],
    /// Adaptive estimates: ω̂ (row-major 4), θ̂1 (2), θ̂2 (4), σ̂1 (2),
    /// σ̂2 (4).
    pub estimates: [f64; 16],
}

/// A completed run: uniformly spaced capture rows, truncated early when
/// divergence was detected.
#[derive(Clone, Debug)]
pub struct Trace {
    /// Captured samples.
    pub rows: Vec<TraceRow>,
    /// Whether the run blew past the divergence threshold (or produced a
    /// non-finite state) before the final capture.
    pub diverged: bool,
}

impl Trace {
    /// Per-sample tracking errors.
    pub fn errors(&self) -> Vec<[f64; 2]> {
        self.rows.iter().map(|row| row.e).collect()
    }

    /// Per-sample control commands.
    pub fn controls(&self) -> Vec<[f64; 2]> {
        self.rows.iter().map(|row| row.u).collect()
    }

    /// The bi-objective evaluation of this run: the divergence sentinel
    /// when flagged, otherwise (Σ squared errors, Σ per-channel control
    /// peaks).
    pub fn objectives(&self) -> ObjectivePair {
        if self.diverged {
            ObjectivePair::sentinel()
        } else {
            ObjectivePair::from_samples(&self.errors(), &self.controls())
        }
    }

    /// Per-channel RMS tracking error over capture times in `[t0, t1]`
    /// (window edges tolerant to half a sample of grid rounding).
    pub fn rms_error(&self, t0: f64, t1: f64) -> [f64; 2] {
        let dt = if self.rows.len() >= 2 {
            self.rows[1].t - self.rows[0].t
        } else {
            0.0
        };
        let lo = t0 - 0.5 * dt;
        let hi = t1 + 0.5 * dt;
        let mut sums = [0.0f64; 2];
        let mut count = 0usize;
        for row in &self.rows {
            if row.t >= lo && row.t <= hi {
                sums[0] += row.e[0] * row.e[0];
                sums[1] += row.e[1] * row.e[1];
                count += 1;
            }
        }
        if count == 0 {
            return [f64::NAN; 2];
        }
        [
            (sums[0] / count as f64).sqrt(),
            (sums[1] / count as f64).sqrt(),
        ]
    }

    /// Largest `‖x‖∞` over the captured samples.
    pub fn max_state_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| inf_norm(&row.x))
            .fold(0.0, f64::max)
    }
}

/// Runs one closed-loop scenario to completion (or divergence).
///
/// Configuration problems return errors; numeric divergence does not — it
/// truncates the trace and sets the flag. The returned row count is
/// `t_end/dt + 1` for a completed run.
pub fn run_scenario(scenario: &SimScenario) -> Result<Trace, CoreError> {
    scenario.plant.validate()?;
    scenario.uncertainty.validate()?;
    scenario.integrator.validate()?;
    scenario.reference.validate()?;
    for v in scenario
        .initial_state
        .iter()
        .chain(scenario.initial_error.iter().flatten())
    {
        if !v.is_finite() {
            return Err(CoreError::InvalidConfig {
                field: "initial_state/initial_error".into(),
                reason: "must be finite".into(),
            });
        }
    }
    let ctrl = L1Controller::new(scenario.controller.clone())?;
    let fuzzy_ctx: Option<(DecodedMfs, FilterSchedule)> = match &scenario.filter {
        FilterSpec::Constant { k_diag } => {
            if k_diag.iter().any(|k| !(*k > 0.0) || !k.is_finite()) {
                return Err(CoreError::InvalidConfig {
                    field: "filter.k_diag".into(),
                    reason: "constant gain entries must be positive and finite".into(),
                });
            }
            None
        }
        FilterSpec::Fuzzy { params, schedule } => {
            let (mfs, _) = decode_and_repair(params);
            Some((mfs, *schedule))
        }
    };
    let rules = RuleBase::standard();

    let dt = scenario.integrator.dt;
    let nsub = scenario.integrator.substeps;
    let h = dt / nsub as f64;
    let total = scenario.integrator.capture_steps() * nsub;

    let mut x = scenario.initial_state;
    if let Some(e0) = scenario.initial_error {
        let r0 = scenario.reference.eval(0.0);
        x[0] = r0[0] - e0[0];
        x[2] = r0[1] - e0[1];
    }
    let mut cs = ControllerState::init(&x);
    let mut k_diag = match &scenario.filter {
        FilterSpec::Constant { k_diag } => *k_diag,
        FilterSpec::Fuzzy { schedule, .. } => [schedule.k_bar; 2],
    };
    let mut prev_e: Option<[f64; 2]> = None;
    let mut prev_kf: Option<f64> = None;
    let mut rows = Vec::with_capacity(scenario.integrator.capture_steps() + 1);
    let mut diverged = false;

    for k in 0..=total {
        let t = k as f64 * h;
        let r = scenario.reference.eval(t);
        if k % nsub == 0 {
            let y = [x[0], x[2]];
            let e = [r[0] - y[0], r[1] - y[1]];
            let e_dot = rate_estimate(&e, prev_e.as_ref(), dt);
            prev_e = Some(e);
            if let Some((mfs, sched)) = &fuzzy_ctx {
                k_diag = schedule_gain(&e, &e_dot, sched, mfs, &rules, &mut prev_kf);
            }
            rows.push(TraceRow {
                t,
                x,
                x_hat: cs.x_hat,
                y,
                r,
                e,
                u: cs.u,
                k_diag,
                estimates: cs.estimates(),
            });
        }
        if k == total {
            break;
        }
        // One substep: controller and plant both advance from the same
        // snapshot, sharing the command held at substep start.
        let u_held = cs.u;
        let new_cs = match ctrl.controller_step(&cs, &x, &r, k_diag, h) {
            Ok(s) => s,
            Err(CoreError::NonFiniteState { .. }) => {
                diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let mut plant_f = |tt: f64, xx: &[f64], dx: &mut [f64]| {
            let d = match scenario.uncertainty.mode {
                UncertaintyMode::None => trms_derivative(xx, &u_held, &scenario.plant),
                UncertaintyMode::Case2 => {
                    let pt = scheduled_params(&scenario.plant, &scenario.uncertainty, tt);
                    trms_derivative(xx, &u_held, &pt)
                }
            };
            dx.copy_from_slice(&d);
        };
        let new_x = match rk4_step(&mut plant_f, &x, t, h) {
            Ok(v) => v,
            Err(CoreError::NonFiniteState { .. }) => {
                diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        cs = new_cs;
        x.copy_from_slice(&new_x);
        if inf_norm(&x) > DIVERGENCE_THRESHOLD {
            diverged = true;
            break;
        }
    }
    Ok(Trace { rows, diverged })
}

/// Evaluates a membership parameter vector on a scenario by swapping it
/// into the fuzzy filter and running the closed loop; any failure or
/// divergence maps to the objective sentinel. This is the optimizer's
/// fitness function.
pub fn evaluate_filter_params(
    scenario: &SimScenario,
    params: &FuzzyParamVector,
) -> ObjectivePair {
    let schedule = match &scenario.filter {
        FilterSpec::Fuzzy { schedule, .. } => *schedule,
        FilterSpec::Constant { .. } => FilterSchedule::default(),
    };
    let mut sc = scenario.clone();
    sc.filter = FilterSpec::Fuzzy {
        params: *params,
        schedule,
    };
    match run_scenario(&sc) {
        Ok(trace) => trace.objectives(),
        Err(_) => ObjectivePair::sentinel(),
    }
}
