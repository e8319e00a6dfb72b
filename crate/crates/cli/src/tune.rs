//! Tuning-campaign driver: swarm configuration, parallel fitness
//! evaluation, and the campaign output files (`pareto.csv`,
//! `history.csv`, `best_compromise.json`).

use crate::config::{format_serde_err, parse_scenario, ScenarioConfig, ScheduleConfig};
use anyhow::{anyhow, Context, Result};
use fuzzyl1_core::fuzzy::{FuzzyParamVector, PARAM_DIM};
use fuzzyl1_core::mopso::{
    best_compromise, run_mapped, Archive, ArchiveEntry, ObjectivePair, RunResult, SwarmConfig,
};
use fuzzyl1_core::sim::evaluate_filter_params;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::{Duration, Instant};

/// Swarm settings block; omitted fields take the standard defaults.
#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct SwarmSettings {
    pub population: usize,
    pub generations: usize,
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    pub n_int: usize,
    pub seed: u64,
    pub archive_capacity: usize,
    pub local_capacity: usize,
}

impl Default for SwarmSettings {
    fn default() -> Self {
        let c = SwarmConfig::default();
        SwarmSettings {
            population: c.population,
            generations: c.generations,
            alpha: c.alpha,
            c1: c.c1,
            c2: c.c2,
            n_int: c.n_int,
            seed: c.seed,
            archive_capacity: c.archive_capacity,
            local_capacity: c.local_capacity,
        }
    }
}

impl SwarmSettings {
    /// Checks the settings against the optimizer's constraints.
    pub fn validate(&self) -> Result<(), fuzzyl1_core::CoreError> {
        self.to_core().validate()
    }

    fn to_core(self) -> SwarmConfig {
        SwarmConfig {
            population: self.population,
            generations: self.generations,
            alpha: self.alpha,
            c1: self.c1,
            c2: self.c2,
            n_int: self.n_int,
            seed: self.seed,
            archive_capacity: self.archive_capacity,
            local_capacity: self.local_capacity,
        }
    }
}

/// A tuning campaign document: the evaluation scenario plus swarm
/// settings.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct TuningConfig {
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub swarm: SwarmSettings,
}

/// Parses a tuning campaign document with dotted-path errors.
pub fn parse_tuning(text: &str) -> Result<TuningConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(format_serde_err)
}

/// A finished campaign.
pub struct CampaignOutcome {
    /// Raw optimizer output (final archive plus per-generation log).
    pub result: RunResult,
    /// The selected compromise member, when any run evaluated finitely.
    pub best: Option<ArchiveEntry>,
    /// Total closed-loop evaluations performed.
    pub evaluations: usize,
    /// Wall-clock duration of the optimization loop.
    pub elapsed: Duration,
    /// Hash of the campaign document, recorded in the output files.
    pub config_hash: String,
}

/// Runs the campaign: every particle evaluation simulates the scenario
/// with the candidate membership parameters swapped into the fuzzy
/// filter; evaluations within a generation run in a parallel map.
pub fn run_campaign(cfg: &TuningConfig) -> Result<CampaignOutcome> {
    let scenario = cfg.scenario.validated_scenario()?;
    let swarm = cfg.swarm.to_core();
    swarm.validate().map_err(|e| anyhow!("swarm.{e}"))?;
    let config_hash = hash_config(cfg)?;
    let start = Instant::now();
    let result = run_mapped(&swarm, |positions: &[FuzzyParamVector]| {
        positions
            .par_iter()
            .map(|p| evaluate_filter_params(&scenario, p))
            .collect()
    })
    .map_err(|e| anyhow!("optimization failed: {e}"))?;
    let elapsed = start.elapsed();
    let evaluations = result.history.iter().map(|g| g.evaluations.len()).sum();
    let best = best_compromise(&result.pareto);
    Ok(CampaignOutcome {
        result,
        best,
        evaluations,
        elapsed,
        config_hash,
    })
}

/// FNV-1a 64-bit hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Canonical hash of a campaign document: FNV-1a over the re-serialized
/// parsed form, so formatting differences do not change the hash.
pub fn hash_config(cfg: &TuningConfig) -> Result<String> {
    let canonical = serde_json::to_string(cfg)?;
    Ok(format!("fnv1a64:{:016x}", fnv1a64(canonical.as_bytes())))
}

/// Best-compromise record written by a campaign.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct BestCompromiseFile {
    /// Swarm seed the campaign ran with.
    pub seed: u64,
    /// Hash of the campaign document.
    pub config_hash: String,
    /// Objectives of the selected member.
    pub objectives: CompromiseObjectives,
    /// The 32 membership parameters of the selected member.
    pub params: Vec<f64>,
}

/// Objective pair as stored in campaign files.
#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
pub struct CompromiseObjectives {
    pub e: f64,
    pub u: f64,
}

/// Writes `pareto.csv`, `history.csv`, and `best_compromise.json` into
/// `out_dir`.
pub fn write_outputs(out_dir: &Path, cfg: &TuningConfig, outcome: &CampaignOutcome) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    let mut pareto = String::from("index,E,U");
    for i in 1..=PARAM_DIM {
        pareto.push_str(&format!(",p{i}"));
    }
    pareto.push('\n');
    for (i, entry) in outcome.result.pareto.entries().iter().enumerate() {
        pareto.push_str(&format!("{i},{},{}", entry.objectives.e, entry.objectives.u));
        for v in entry.position.iter() {
            pareto.push_str(&format!(",{v}"));
        }
        pareto.push('\n');
    }
    let pareto_path = out_dir.join("pareto.csv");
    std::fs::write(&pareto_path, pareto)
        .with_context(|| format!("writing {}", pareto_path.display()))?;

    let mut history = String::from("generation,particle,E,U\n");
    for log in &outcome.result.history {
        for (particle, obj) in log.evaluations.iter().enumerate() {
            history.push_str(&format!("{},{particle},{},{}\n", log.generation, obj.e, obj.u));
        }
    }
    let history_path = out_dir.join("history.csv");
    std::fs::write(&history_path, history)
        .with_context(|| format!("writing {}", history_path.display()))?;

    if let Some(best) = &outcome.best {
        let record = BestCompromiseFile {
            seed: cfg.swarm.seed,
            config_hash: outcome.config_hash.clone(),
            objectives: CompromiseObjectives {
                e: best.objectives.e,
                u: best.objectives.u,
            },
            params: best.position.to_vec(),
        };
        let path = out_dir.join("best_compromise.json");
        std::fs::write(&path, serde_json::to_string_pretty(&record)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Replaces the filter block of a scenario config file with the fuzzy
/// schedule around `params`, preserving the rest of the document
/// (including key order). An existing fuzzy schedule block is kept; a
/// constant filter gains the default schedule.
pub fn install_params(path: &Path, params: &FuzzyParamVector) -> Result<()> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut doc: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| anyhow!("{}: not a JSON object", path.display()))?;
    let schedule = obj
        .get("filter")
        .and_then(|f| f.get("schedule"))
        .cloned()
        .unwrap_or_else(|| serde_json::to_value(ScheduleConfig::default()).unwrap());
    obj.insert(
        "filter".to_string(),
        serde_json::json!({
            "type": "fuzzy",
            "params": params.to_vec(),
            "schedule": schedule,
        }),
    );
    let updated = serde_json::to_string_pretty(&doc)? + "\n";
    // Refuse to write a file the loader would then reject.
    parse_scenario(&updated)
        .map_err(|e| anyhow!("{}: install would produce an invalid config: {e}", path.display()))?;
    std::fs::write(path, updated).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// One row of a saved `history.csv`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRow {
    pub generation: usize,
    pub particle: usize,
    pub objectives: ObjectivePair,
}

/// Parses a saved `history.csv`.
pub fn parse_history(text: &str) -> Result<Vec<HistoryRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("generation,particle,E,U") => {}
        _ => return Err(anyhow!("unrecognized history CSV header")),
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(anyhow!("line {}: expected 4 fields", lineno + 2));
        }
        let parse_err =
            |what: &str, e: &dyn std::fmt::Display| anyhow!("line {}: bad {what}: {e}", lineno + 2);
        rows.push(HistoryRow {
            generation: fields[0]
                .parse()
                .map_err(|e: std::num::ParseIntError| parse_err("generation", &e))?,
            particle: fields[1]
                .parse()
                .map_err(|e: std::num::ParseIntError| parse_err("particle", &e))?,
            objectives: ObjectivePair {
                e: fields[2]
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| parse_err("E", &e))?,
                u: fields[3]
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| parse_err("U", &e))?,
            },
        });
    }
    Ok(rows)
}

/// The non-dominated front re-extracted from a saved history, plus the
/// compromise selection over it.
pub struct ExtractedFront {
    /// Front members sorted by ascending E, each attributed to the first
    /// history row achieving its objectives.
    pub front: Vec<HistoryRow>,
    /// Compromise member of the front.
    pub compromise: Option<HistoryRow>,
}

/// Rebuilds the non-dominated set over every evaluation in a saved
/// history and re-selects the compromise member.
pub fn extract_front(rows: &[HistoryRow]) -> ExtractedFront {
    let mut archive = Archive::new(usize::MAX);
    for row in rows {
        archive.insert([0.0; PARAM_DIM], row.objectives);
    }
    let attribute = |obj: &ObjectivePair| -> Option<HistoryRow> {
        rows.iter()
            .find(|r| r.objectives.e == obj.e && r.objectives.u == obj.u)
            .copied()
    };
    let mut front: Vec<HistoryRow> = archive
        .entries()
        .iter()
        .filter_map(|e| attribute(&e.objectives))
        .collect();
    front.sort_by(|a, b| a.objectives.e.total_cmp(&b.objectives.e));
    let compromise = best_compromise(&archive).and_then(|e| attribute(&e.objectives));
    ExtractedFront { front, compromise }
}
