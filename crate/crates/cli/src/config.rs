//! JSON scenario configuration: schema, parsing with dotted-path errors,
//! and conversion into a runnable [`SimScenario`].
//!
//! Every model constant lives in the config file — plant coefficients, the
//! design matrix, adaptation gain and boxes, filter parameters, reference
//! terms, and grid settings — so a run is fully described by one document.
//! The five scenarios shipped under `configs/` are embedded into the binary
//! so `fuzzyl1 scenario <name>` works from any directory; the files remain
//! the source of truth.

use anyhow::{anyhow, Result};
use fuzzyl1_core::fuzzy::{FilterSchedule, PARAM_DIM};
use fuzzyl1_core::l1::{AdaptationBounds, Interval, L1Config, L1Controller, UnmatchedMode};
use fuzzyl1_core::numerics::{IntegratorConfig, Matrix};
use fuzzyl1_core::plant::{
    decompose, PlantParams, RotorDamping, TorqueModel, UncertaintyMode, UncertaintySchedule,
};
use fuzzyl1_core::sim::{FilterSpec, Reference, SignalTerm, SimScenario};
use serde::{Deserialize, Serialize};

/// Names accepted by the `scenario` subcommand.
pub const BUNDLED_SCENARIOS: [&str; 5] = ["case1", "case2", "coldstart-scheduled", "coldstart-fixed", "tuning-ref"];

/// Returns the embedded JSON text of a bundled configuration.
///
/// `tuning-ref` resolves to the tuning campaign document; callers wanting
/// its scenario section should use [`load_bundled_scenario`].
pub fn bundled_config(name: &str) -> Option<&'static str> {
    match name {
        "case1" => Some(include_str!("../../../configs/case1.json")),
        "case2" => Some(include_str!("../../../configs/case2.json")),
        "coldstart-scheduled" => Some(include_str!("../../../configs/coldstart-scheduled.json")),
        "coldstart-fixed" => Some(include_str!("../../../configs/coldstart-fixed.json")),
        "tuning-ref" => Some(include_str!("../../../configs/tuning.json")),
        _ => None,
    }
}

/// Parses a bundled scenario by name; for `tuning-ref` this extracts the
/// scenario section of the tuning campaign document.
pub fn load_bundled_scenario(name: &str) -> Result<ScenarioConfig> {
    let text = bundled_config(name)
        .ok_or_else(|| anyhow!("unknown scenario `{name}`; expected one of {BUNDLED_SCENARIOS:?}"))?;
    if name == "tuning-ref" {
        Ok(crate::tune::parse_tuning(text)?.scenario)
    } else {
        parse_scenario(text)
    }
}

/// Plant constants block. Keys `a1..a18` name the rig coefficients;
/// `kc` is the cross-coupling constant and `omega` the true 2×2 input gain.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub a7: f64,
    pub a8: f64,
    pub a9: f64,
    pub a10: f64,
    pub a11: f64,
    pub a12: f64,
    pub a13: f64,
    pub a14: f64,
    pub a15: f64,
    pub a16: f64,
    pub a17: f64,
    pub a18: f64,
    pub kc: f64,
    pub omega: [[f64; 2]; 2],
    /// Rotor torque convention: `signed` (odd, default) or `even`.
    #[serde(default)]
    pub torque_model: TorqueModelConfig,
    /// Yaw-rotor damping convention: `on_x6` (default) or `on_x5`.
    #[serde(default)]
    pub rotor_damping: RotorDampingConfig,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TorqueModelConfig {
    #[default]
    Signed,
    Even,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RotorDampingConfig {
    #[default]
    OnX6,
    OnX5,
}

/// Time-varying plant-constant drift block.
#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
#[serde(deny_unknown_fields)]
pub struct UncertaintyConfig {
    pub mode: UncertaintyModeConfig,
    #[serde(default = "d_amplitude")]
    pub amplitude: f64,
    #[serde(default = "d_freq_odd")]
    pub freq_odd: f64,
    #[serde(default = "d_freq_even")]
    pub freq_even: f64,
}

fn d_amplitude() -> f64 {
    0.2
}
fn d_freq_odd() -> f64 {
    0.3
}
fn d_freq_even() -> f64 {
    0.25
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyModeConfig {
    None,
    Case2,
}

/// Projection boxes: symmetric half-widths for the state-norm gains and
/// disturbances, an explicit `[lo, hi]` pair for the input-gain diagonal.
#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub theta1: f64,
    pub theta2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub omega_diag: [f64; 2],
    pub omega_offdiag: f64,
}

/// Controller design block: the checked-in 6×6 design matrix plus the
/// adaptation constants. `b_m`, `b_um`, and the output selector are
/// structural and derived from the plant decomposition, not configured.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    /// Row-major 6×6 Hurwitz design matrix (certified at load time by the
    /// Lyapunov solve).
    pub a_m: Vec<Vec<f64>>,
    /// Lyapunov right-hand side; identity when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(default = "d_gamma")]
    pub gamma: f64,
    pub bounds: BoundsConfig,
    #[serde(default = "d_proj_epsilon")]
    pub proj_epsilon: f64,
    #[serde(default)]
    pub unmatched_mode: UnmatchedModeConfig,
    /// Fallback diagonal filter gain used where no schedule applies.
    #[serde(default = "d_k_const")]
    pub k_const: [f64; 2],
}

fn d_gamma() -> f64 {
    1e5
}
fn d_proj_epsilon() -> f64 {
    0.1
}
fn d_k_const() -> [f64; 2] {
    [10.0, 10.0]
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum UnmatchedModeConfig {
    #[default]
    DcMap,
    Ignore,
}

/// Feedback-filter gain source: a fixed diagonal or the fuzzy schedule.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FilterConfig {
    Constant {
        k_diag: [f64; 2],
    },
    Fuzzy {
        /// The 32 membership parameters (repaired into valid triangles on
        /// load).
        params: Vec<f64>,
        #[serde(default)]
        schedule: ScheduleConfig,
    },
}

/// Gain-schedule constants; any omitted field takes the standard default.
#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub k_p: f64,
    pub k_d: f64,
    pub k_e: f64,
    pub k_bar: f64,
    pub k_f_min: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        let s = FilterSchedule::default();
        ScheduleConfig {
            k_p: s.k_p,
            k_d: s.k_d,
            k_e: s.k_e,
            k_bar: s.k_bar,
            k_f_min: s.k_f_min,
        }
    }
}

/// One additive reference term.
#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TermConfig {
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    Step {
        amplitude: f64,
        time: f64,
    },
    Constant {
        value: f64,
    },
}

/// Per-channel reference terms; an omitted channel is zero.
#[derive(Serialize, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    #[serde(default)]
    pub channel1: Vec<TermConfig>,
    #[serde(default)]
    pub channel2: Vec<TermConfig>,
}

/// Time-grid block: capture step `dt`, horizon `t_end`, integrator
/// substeps per capture step.
#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
#[serde(deny_unknown_fields)]
pub struct IntegratorJson {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "d_substeps")]
    pub substeps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

fn d_substeps() -> usize {
    1
}

/// A complete scenario document.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Carried into output metadata; simulations themselves are
    /// deterministic.
    #[serde(default)]
    pub seed: u64,
    /// When set, a diverged run is reported in metadata but does not fail
    /// the process.
    #[serde(default)]
    pub expect_divergence: bool,
    pub plant: PlantConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<UncertaintyConfig>,
    pub controller: ControllerConfig,
    pub filter: FilterConfig,
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub initial_state: [f64; 6],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_error: Option<[f64; 2]>,
    pub integrator: IntegratorJson,
}

/// Parses a scenario document, reporting schema problems with the dotted
/// path of the offending field (`plant.a1: missing field`).
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(format_serde_err)
}

/// Formats a deserialization error as `path.field: message`.
pub(crate) fn format_serde_err(err: serde_path_to_error::Error<serde_json::Error>) -> anyhow::Error {
    let path = err.path().to_string();
    let inner = err.inner().to_string();
    let at_root = path.is_empty() || path == ".";
    if let Some(rest) = inner.strip_prefix("missing field `") {
        if let Some(field) = rest.split('`').next() {
            let full = if at_root {
                field.to_string()
            } else {
                format!("{path}.{field}")
            };
            return anyhow!("{full}: missing field");
        }
    }
    if at_root {
        anyhow!("{inner}")
    } else {
        anyhow!("{path}: {inner}")
    }
}

fn require_finite(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(anyhow!("{path}: must be finite"))
    }
}

fn require_positive(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(anyhow!("{path}: must be positive and finite"))
    }
}

fn matrix_6x6(rows: &[Vec<f64>], path: &str) -> Result<Matrix> {
    if rows.len() != 6 || rows.iter().any(|r| r.len() != 6) {
        return Err(anyhow!("{path}: must be 6 rows of 6 numbers"));
    }
    let mut flat = Vec::with_capacity(36);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            require_finite(&format!("{path}[{i}][{j}]"), v)?;
            flat.push(v);
        }
    }
    Matrix::from_row_slice(6, 6, &flat).map_err(|e| anyhow!("{path}: {e}"))
}

impl PlantConfig {
    fn to_params(&self) -> Result<PlantParams> {
        let a = [
            self.a1, self.a2, self.a3, self.a4, self.a5, self.a6, self.a7, self.a8, self.a9,
            self.a10, self.a11, self.a12, self.a13, self.a14, self.a15, self.a16, self.a17,
            self.a18,
        ];
        for (i, v) in a.iter().enumerate() {
            require_finite(&format!("plant.a{}", i + 1), *v)?;
        }
        require_finite("plant.kc", self.kc)?;
        let mut omega = Matrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                require_finite(&format!("plant.omega[{i}][{j}]"), self.omega[i][j])?;
                omega.set(i, j, self.omega[i][j]);
            }
        }
        let p = PlantParams {
            a,
            k_c: self.kc,
            omega,
            torque_model: match self.torque_model {
                TorqueModelConfig::Signed => TorqueModel::Signed,
                TorqueModelConfig::Even => TorqueModel::Even,
            },
            rotor_damping: match self.rotor_damping {
                RotorDampingConfig::OnX6 => RotorDamping::OnX6,
                RotorDampingConfig::OnX5 => RotorDamping::OnX5,
            },
        };
        p.validate().map_err(|e| anyhow!("plant.{e}"))?;
        Ok(p)
    }
}

impl TermConfig {
    fn to_term(&self, path: &str) -> Result<SignalTerm> {
        Ok(match *self {
            TermConfig::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => SignalTerm::Sinusoid {
                amplitude: require_finite(&format!("{path}.amplitude"), amplitude)?,
                frequency: require_finite(&format!("{path}.frequency"), frequency)?,
                phase: require_finite(&format!("{path}.phase"), phase)?,
            },
            TermConfig::Step { amplitude, time } => SignalTerm::Step {
                amplitude: require_finite(&format!("{path}.amplitude"), amplitude)?,
                time: require_finite(&format!("{path}.time"), time)?,
            },
            TermConfig::Constant { value } => SignalTerm::Constant {
                value: require_finite(&format!("{path}.value"), value)?,
            },
        })
    }
}

impl ScenarioConfig {
    /// Converts the document into a runnable scenario, checking every
    /// semantic constraint and reporting failures by dotted field path.
    pub fn to_scenario(&self) -> Result<SimScenario> {
        let plant = self.plant.to_params()?;
        let uncertainty = match &self.uncertainty {
            None => UncertaintySchedule {
                mode: UncertaintyMode::None,
                ..UncertaintySchedule::default()
            },
            Some(u) => {
                let sched = UncertaintySchedule {
                    mode: match u.mode {
                        UncertaintyModeConfig::None => UncertaintyMode::None,
                        UncertaintyModeConfig::Case2 => UncertaintyMode::Case2,
                    },
                    amplitude: require_finite("uncertainty.amplitude", u.amplitude)?,
                    freq_odd: require_finite("uncertainty.freq_odd", u.freq_odd)?,
                    freq_even: require_finite("uncertainty.freq_even", u.freq_even)?,
                };
                sched.validate().map_err(|e| anyhow!("{e}"))?;
                sched
            }
        };

        let dec = decompose(&plant);
        let a_m = matrix_6x6(&self.controller.a_m, "controller.a_m")?;
        let q = match &self.controller.q {
            Some(rows) => matrix_6x6(rows, "controller.q")?,
            None => Matrix::identity(6),
        };
        let b = &self.controller.bounds;
        require_positive("controller.bounds.theta1", b.theta1)?;
        require_positive("controller.bounds.theta2", b.theta2)?;
        require_positive("controller.bounds.sigma1", b.sigma1)?;
        require_positive("controller.bounds.sigma2", b.sigma2)?;
        require_positive("controller.bounds.omega_diag[0]", b.omega_diag[0])?;
        require_finite("controller.bounds.omega_diag[1]", b.omega_diag[1])?;
        if !(b.omega_diag[0] < b.omega_diag[1]) {
            return Err(anyhow!(
                "controller.bounds.omega_diag: lower bound must be below upper"
            ));
        }
        require_positive("controller.bounds.omega_offdiag", b.omega_offdiag)?;
        let bounds = AdaptationBounds {
            theta1: Interval::symmetric(b.theta1),
            theta2: Interval::symmetric(b.theta2),
            sigma1: Interval::symmetric(b.sigma1),
            sigma2: Interval::symmetric(b.sigma2),
            omega_diag: Interval {
                lo: b.omega_diag[0],
                hi: b.omega_diag[1],
            },
            omega_offdiag: Interval::symmetric(b.omega_offdiag),
        };
        require_positive("controller.gamma", self.controller.gamma)?;
        require_positive("controller.proj_epsilon", self.controller.proj_epsilon)?;
        require_positive("controller.k_const[0]", self.controller.k_const[0])?;
        require_positive("controller.k_const[1]", self.controller.k_const[1])?;

        let controller = L1Config {
            a_m,
            b_m: dec.b_m.clone(),
            b_um: dec.b_um.clone(),
            c: dec.c.clone(),
            q,
            gamma: self.controller.gamma,
            k_const: self.controller.k_const,
            bounds,
            proj_epsilon: self.controller.proj_epsilon,
            unmatched_mode: match self.controller.unmatched_mode {
                UnmatchedModeConfig::DcMap => UnmatchedMode::DcMap,
                UnmatchedModeConfig::Ignore => UnmatchedMode::Ignore,
            },
        };

        let filter = match &self.filter {
            FilterConfig::Constant { k_diag } => {
                require_positive("filter.k_diag[0]", k_diag[0])?;
                require_positive("filter.k_diag[1]", k_diag[1])?;
                FilterSpec::Constant { k_diag: *k_diag }
            }
            FilterConfig::Fuzzy { params, schedule } => {
                if params.len() != PARAM_DIM {
                    return Err(anyhow!(
                        "filter.params: expected {PARAM_DIM} values, got {}",
                        params.len()
                    ));
                }
                let mut p = [0.0; PARAM_DIM];
                for (i, v) in params.iter().enumerate() {
                    p[i] = require_finite(&format!("filter.params[{i}]"), *v)?;
                }
                require_finite("filter.schedule.k_p", schedule.k_p)?;
                require_finite("filter.schedule.k_d", schedule.k_d)?;
                if !(schedule.k_p >= 0.0 && schedule.k_d >= 0.0) {
                    return Err(anyhow!("filter.schedule: k_p and k_d must be nonnegative"));
                }
                if !(schedule.k_e >= 0.0) || !schedule.k_e.is_finite() {
                    return Err(anyhow!("filter.schedule.k_e: must be nonnegative and finite"));
                }
                require_positive("filter.schedule.k_bar", schedule.k_bar)?;
                require_positive("filter.schedule.k_f_min", schedule.k_f_min)?;
                FilterSpec::Fuzzy {
                    params: p,
                    schedule: FilterSchedule {
                        k_p: schedule.k_p,
                        k_d: schedule.k_d,
                        k_e: schedule.k_e,
                        k_bar: schedule.k_bar,
                        k_f_min: schedule.k_f_min,
                    },
                }
            }
        };

        let mut channels: [Vec<SignalTerm>; 2] = [Vec::new(), Vec::new()];
        for (ch, (terms, label)) in [
            (&self.reference.channel1, "reference.channel1"),
            (&self.reference.channel2, "reference.channel2"),
        ]
        .iter()
        .enumerate()
        {
            for (i, term) in terms.iter().enumerate() {
                channels[ch].push(term.to_term(&format!("{label}[{i}]"))?);
            }
        }
        let reference = Reference { channels };

        for (i, v) in self.initial_state.iter().enumerate() {
            require_finite(&format!("initial_state[{i}]"), *v)?;
        }
        if let Some(e0) = &self.initial_error {
            require_finite("initial_error[0]", e0[0])?;
            require_finite("initial_error[1]", e0[1])?;
        }

        let integrator = IntegratorConfig {
            dt: self.integrator.dt,
            t_end: self.integrator.t_end,
            substeps: self.integrator.substeps,
            max_steps: self
                .integrator
                .max_steps
                .unwrap_or(IntegratorConfig::default().max_steps),
        };
        integrator.validate().map_err(|e| anyhow!("{e}"))?;

        Ok(SimScenario {
            plant,
            uncertainty,
            controller,
            filter,
            reference,
            initial_state: self.initial_state,
            initial_error: self.initial_error,
            integrator,
        })
    }

    /// Full validation: semantic checks plus the controller build, which
    /// certifies the design matrix (Lyapunov solve and Cholesky of the
    /// resulting P) and every dimension.
    pub fn validated_scenario(&self) -> Result<SimScenario> {
        let scenario = self.to_scenario()?;
        L1Controller::new(scenario.controller.clone())
            .map_err(|e| anyhow!("controller.{e}"))?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_constant_config() -> String {
        // A small, fast, self-consistent document used by the unit tests.
        let a_m = serde_json::to_string(&am_rows()).unwrap();
        format!(
            r#"{{
  "name": "unit",
  "plant": {{
    "a1": 0.068, "a2": 0.02, "a3": 0.0135, "a4": 0.0924, "a5": 0.02,
    "a6": 0.09, "a7": 0.32, "a8": 0.006, "a9": 0.001, "a10": 0.1,
    "a11": 0.01, "a12": 0.5, "a13": 1.1, "a14": 0.8, "a15": 1.1,
    "a16": 1.0, "a17": 1.0, "a18": 1.0,
    "kc": -0.2,
    "omega": [[1.0, 0.0], [0.0, 1.0]]
  }},
  "controller": {{
    "a_m": {a_m},
    "gamma": 100000.0,
    "bounds": {{
      "theta1": 0.5, "theta2": 0.5, "sigma1": 15.0, "sigma2": 15.0,
      "omega_diag": [0.25, 5.0], "omega_offdiag": 0.5
    }}
  }},
  "filter": {{ "type": "constant", "k_diag": [10.0, 10.0] }},
  "reference": {{
    "channel1": [ {{ "type": "sinusoid", "amplitude": 0.45, "frequency": 0.2 }} ],
    "channel2": [ {{ "type": "sinusoid", "amplitude": 0.45, "frequency": 0.2 }} ]
  }},
  "integrator": {{ "dt": 0.01, "t_end": 1.0, "substeps": 2 }}
}}"#
        )
    }

    fn am_rows() -> Vec<Vec<f64>> {
        let plant = PlantParams::default();
        let a_m = fuzzyl1_core::l1::reference_design_matrix(&plant);
        (0..6)
            .map(|i| (0..6).map(|j| a_m.get(i, j)).collect())
            .collect()
    }

    #[test]
    fn minimal_config_parses_and_validates() {
        let cfg = parse_scenario(&minimal_constant_config()).unwrap();
        let scenario = cfg.validated_scenario().unwrap();
        assert_eq!(scenario.integrator.substeps, 2);
        assert_eq!(scenario.initial_state, [0.0; 6]);
        assert!(scenario.initial_error.is_none());
        match scenario.filter {
            FilterSpec::Constant { k_diag } => assert_eq!(k_diag, [10.0, 10.0]),
            _ => panic!("expected constant filter"),
        }
    }

    #[test]
    fn missing_plant_constant_is_reported_by_path() {
        let text = minimal_constant_config().replace(r#""a1": 0.068, "#, "");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("plant.a1"), "unexpected message: {err}");
        assert!(err.contains("missing field"), "unexpected message: {err}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        let text = minimal_constant_config().replace(
            r#""name": "unit","#,
            r#""name": "unit", "typo_field": 1,"#,
        );
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("typo_field"), "unexpected message: {err}");
    }

    #[test]
    fn wrong_param_count_is_rejected_with_path() {
        let text = minimal_constant_config().replace(
            r#"{ "type": "constant", "k_diag": [10.0, 10.0] }"#,
            r#"{ "type": "fuzzy", "params": [0.5, 0.5] }"#,
        );
        let cfg = parse_scenario(&text).unwrap();
        let err = cfg.to_scenario().unwrap_err().to_string();
        assert!(err.contains("filter.params"), "unexpected message: {err}");
        assert!(err.contains("expected 32"), "unexpected message: {err}");
    }

    #[test]
    fn non_hurwitz_design_matrix_fails_certification() {
        let mut rows = am_rows();
        // Flip the sign of the whole matrix: eigenvalues move to the right
        // half plane, so the Lyapunov certificate must fail.
        for row in &mut rows {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        let cfg_text = minimal_constant_config();
        let want = serde_json::to_string(&am_rows()).unwrap();
        let have = serde_json::to_string(&rows).unwrap();
        let text = cfg_text.replace(&want, &have);
        let cfg = parse_scenario(&text).unwrap();
        assert!(cfg.to_scenario().is_ok(), "shape checks alone should pass");
        let err = cfg.validated_scenario().unwrap_err().to_string();
        assert!(err.contains("controller"), "unexpected message: {err}");
    }

    #[test]
    fn bad_design_matrix_shape_is_rejected() {
        let cfg_text = minimal_constant_config();
        let want = serde_json::to_string(&am_rows()).unwrap();
        let text = cfg_text.replace(&want, "[[1.0, 2.0], [3.0, 4.0]]");
        let cfg = parse_scenario(&text).unwrap();
        let err = cfg.to_scenario().unwrap_err().to_string();
        assert!(err.contains("controller.a_m"), "unexpected message: {err}");
    }

    #[test]
    fn all_bundled_scenarios_load_and_validate() {
        for name in BUNDLED_SCENARIOS {
            let cfg = load_bundled_scenario(name)
                .unwrap_or_else(|e| panic!("loading {name}: {e}"));
            cfg.validated_scenario()
                .unwrap_or_else(|e| panic!("validating {name}: {e}"));
        }
    }

    #[test]
    fn scenario_config_round_trips_through_json() {
        let cfg = parse_scenario(&minimal_constant_config()).unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = parse_scenario(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&cfg).unwrap());
    }
}
