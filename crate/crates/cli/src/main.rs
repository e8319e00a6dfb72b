//! `fuzzyl1` — simulation and tuning harness for the twin-rotor adaptive
//! control toolkit.
//!
//! Exit codes: 0 success, 1 invalid input (arguments or configuration),
//! 2 runtime failure (I/O or internal error), 3 diverged simulation
//! (unless the scenario declares divergence expected).

use anyhow::{anyhow, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use fuzzyl1_cli::config::{
    bundled_config, load_bundled_scenario, parse_scenario, ScenarioConfig, BUNDLED_SCENARIOS,
};
use fuzzyl1_cli::trace_io;
use fuzzyl1_cli::tune;
use std::path::{Path, PathBuf};

const EXIT_OK: i32 = 0;
const EXIT_INVALID: i32 = 1;
const EXIT_RUNTIME: i32 = 2;
const EXIT_DIVERGED: i32 = 3;

#[derive(Parser)]
#[command(
    name = "fuzzyl1",
    version,
    about = "Closed-loop twin-rotor simulation and fuzzy-filter tuning",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario from a JSON config and write trace files.
    Simulate {
        /// Scenario config path.
        config: PathBuf,
        /// Output directory for <name>.csv / <name>.meta.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write <name>.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Run a tuning campaign from a JSON campaign config.
    Tune {
        /// Campaign config path ({"scenario": ..., "swarm": ...}).
        config: PathBuf,
        /// Output directory for pareto.csv / history.csv / best_compromise.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Scenario config file(s) to rewrite with the best-compromise
        /// fuzzy filter (repeatable).
        #[arg(long)]
        install: Vec<PathBuf>,
    },
    /// Run a bundled scenario by name.
    Scenario {
        /// One of: case1, case2, coldstart-scheduled, coldstart-fixed, tuning-ref.
        name: String,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write <name>.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Re-extract the non-dominated front and compromise from a saved
    /// history.csv.
    Pareto {
        /// Path to a history.csv written by `tune`.
        history: PathBuf,
        /// Output directory for front.csv / compromise.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check a config file (scenario or campaign) without running it.
    Validate {
        /// Config path.
        config: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(dispatch(cli));
}

fn dispatch(cli: Cli) -> i32 {
    match cli.cmd {
        Cmd::Simulate { config, out, plot } => {
            let text = match read_input(&config) {
                Ok(t) => t,
                Err(e) => return invalid(e),
            };
            let cfg = match parse_scenario(&text) {
                Ok(c) => c,
                Err(e) => return invalid(e),
            };
            simulate(&cfg, &out, plot)
        }
        Cmd::Scenario { name, out, plot } => {
            if bundled_config(&name).is_none() {
                return invalid(anyhow!(
                    "unknown scenario `{name}`; expected one of {BUNDLED_SCENARIOS:?}"
                ));
            }
            let cfg = match load_bundled_scenario(&name) {
                Ok(c) => c,
                Err(e) => return invalid(e),
            };
            simulate(&cfg, &out, plot)
        }
        Cmd::Tune { config, out, install } => {
            let text = match read_input(&config) {
                Ok(t) => t,
                Err(e) => return invalid(e),
            };
            let cfg = match tune::parse_tuning(&text) {
                Ok(c) => c,
                Err(e) => return invalid(e),
            };
            if let Err(e) = cfg.scenario.validated_scenario() {
                return invalid(e);
            }
            run_tune(&cfg, &out, &install)
        }
        Cmd::Pareto { history, out } => {
            let text = match read_input(&history) {
                Ok(t) => t,
                Err(e) => return invalid(e),
            };
            let rows = match tune::parse_history(&text) {
                Ok(r) => r,
                Err(e) => return invalid(e),
            };
            run_pareto(&rows, &out)
        }
        Cmd::Validate { config } => {
            let text = match read_input(&config) {
                Ok(t) => t,
                Err(e) => return invalid(e),
            };
            match validate_document(&text) {
                Ok(name) => {
                    println!("ok: {name}");
                    EXIT_OK
                }
                Err(e) => invalid(e),
            }
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| anyhow!("cannot read {}: {e}", path.display()))
}

fn invalid(e: anyhow::Error) -> i32 {
    eprintln!("error: {e:#}");
    EXIT_INVALID
}

fn runtime_err(e: anyhow::Error) -> i32 {
    eprintln!("error: {e:#}");
    EXIT_RUNTIME
}

/// Validates either document kind: a campaign (has a top-level
/// `scenario` key) or a plain scenario.
fn validate_document(text: &str) -> Result<String> {
    let looks_like_campaign = serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .map(|v| v.get("scenario").is_some())
        .unwrap_or(false);
    if looks_like_campaign {
        let cfg = tune::parse_tuning(text)?;
        cfg.scenario.validated_scenario()?;
        cfg.swarm.validate().map_err(|e| anyhow!("swarm.{e}"))?;
        Ok(format!("{} (campaign)", cfg.scenario.name))
    } else {
        let cfg = parse_scenario(text)?;
        cfg.validated_scenario()?;
        Ok(cfg.name)
    }
}

fn simulate(cfg: &ScenarioConfig, out: &Path, plot: bool) -> i32 {
    let scenario = match cfg.validated_scenario() {
        Ok(s) => s,
        Err(e) => return invalid(e),
    };
    let trace = match fuzzyl1_core::sim::run_scenario(&scenario) {
        Ok(t) => t,
        Err(e) => return runtime_err(anyhow!("simulation failed: {e}")),
    };
    if let Err(e) = std::fs::create_dir_all(out) {
        return runtime_err(anyhow!("creating {}: {e}", out.display()));
    }
    let csv_path = out.join(format!("{}.csv", cfg.name));
    let meta_path = out.join(format!("{}.meta.json", cfg.name));
    if let Err(e) = trace_io::emit_csv(&trace, &csv_path) {
        return runtime_err(e);
    }
    let meta = trace_io::summarize(
        &cfg.name,
        cfg.seed,
        cfg.expect_divergence,
        scenario.integrator.dt,
        scenario.integrator.t_end,
        scenario.integrator.substeps,
        &trace,
    );
    if let Err(e) = trace_io::emit_meta(&meta, &meta_path) {
        return runtime_err(e);
    }
    if plot {
        let svg_path = out.join(format!("{}.svg", cfg.name));
        if let Err(e) = fuzzyl1_cli::plot::emit_plot(&trace, &cfg.name, &svg_path) {
            return runtime_err(e);
        }
        println!("wrote {}", svg_path.display());
    }
    println!("wrote {}", csv_path.display());
    println!("wrote {}", meta_path.display());
    println!(
        "{}: {} samples, diverged={}, E={:.6}, U={:.6}, max|x|={:.4}",
        cfg.name,
        trace.rows.len(),
        trace.diverged,
        meta.objectives.e,
        meta.objectives.u,
        meta.max_state_norm
    );
    if trace.diverged && !cfg.expect_divergence {
        eprintln!("run diverged; trace truncated at t={:.2}", trace.rows.last().map(|r| r.t).unwrap_or(0.0));
        EXIT_DIVERGED
    } else {
        EXIT_OK
    }
}

fn run_tune(cfg: &tune::TuningConfig, out: &Path, install: &[PathBuf]) -> i32 {
    let outcome = match tune::run_campaign(cfg) {
        Ok(o) => o,
        Err(e) => return runtime_err(e),
    };
    if let Err(e) = tune::write_outputs(out, cfg, &outcome) {
        return runtime_err(e);
    }
    println!(
        "tuning finished: {} evaluations over {} generations in {:.1} s",
        outcome.evaluations,
        outcome.result.history.len(),
        outcome.elapsed.as_secs_f64()
    );
    println!(
        "front size {}, files in {}",
        outcome.result.pareto.len(),
        out.display()
    );
    match &outcome.best {
        Some(best) => {
            println!(
                "best compromise: E={:.6}, U={:.6}",
                best.objectives.e, best.objectives.u
            );
            for path in install {
                if let Err(e) = tune::install_params(path, &best.position) {
                    return runtime_err(e);
                }
                println!("installed best compromise into {}", path.display());
            }
            EXIT_OK
        }
        None => {
            eprintln!("no finite evaluation found; nothing to install");
            if install.is_empty() {
                EXIT_OK
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn run_pareto(rows: &[tune::HistoryRow], out: &Path) -> i32 {
    let extracted = tune::extract_front(rows);
    if let Err(e) = std::fs::create_dir_all(out) {
        return runtime_err(anyhow!("creating {}: {e}", out.display()));
    }
    let mut front = String::from("E,U,generation,particle\n");
    for row in &extracted.front {
        front.push_str(&format!(
            "{},{},{},{}\n",
            row.objectives.e, row.objectives.u, row.generation, row.particle
        ));
    }
    let front_path = out.join("front.csv");
    if let Err(e) = std::fs::write(&front_path, front) {
        return runtime_err(anyhow!("writing {}: {e}", front_path.display()));
    }
    let compromise = extracted.compromise.map(|c| {
        serde_json::json!({
            "objectives": { "e": c.objectives.e, "u": c.objectives.u },
            "generation": c.generation,
            "particle": c.particle,
        })
    });
    let comp_path = out.join("compromise.json");
    let body = serde_json::to_string_pretty(&serde_json::json!({
        "front_size": extracted.front.len(),
        "compromise": compromise,
    }))
    .expect("serializing compromise");
    if let Err(e) = std::fs::write(&comp_path, body) {
        return runtime_err(anyhow!("writing {}: {e}", comp_path.display()));
    }
    println!(
        "front: {} of {} evaluations; wrote {} and {}",
        extracted.front.len(),
        rows.len(),
        front_path.display(),
        comp_path.display()
    );
    EXIT_OK
}
