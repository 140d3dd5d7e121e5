//! Experiment orchestration behind the `thinshell` binary.

pub mod config;
pub mod plot;
pub mod report;
pub mod suites;

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

pub use config::{ConfigPresence, ExperimentConfig, Suite};
pub use report::{Assertion, Row, SuiteOutput};

use crate::error::{Error, Result};
use crate::rng::RNG_ID;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn version_info() -> String {
    format!(
        "thinshell {VERSION}\nrng: {RNG_ID}\nbuild: {} {}, {} profile",
        std::env::consts::ARCH,
        std::env::consts::OS,
        if cfg!(debug_assertions) { "debug" } else { "release" }
    )
}

/// What a run wrote and whether every assertion held.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub rows: usize,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
}

impl RunSummary {
    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }
}

fn config_json(cfg: &ExperimentConfig) -> Value {
    json!({
        "experiment": cfg.suite.name(),
        "bodies": cfg.bodies.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
        "n_grid": cfg.n_grid,
        "samples": cfg.samples,
        "seed": cfg.seed,
        "output_dir": cfg.output_dir.display().to_string(),
        "plot": cfg.plot,
    })
}

/// Runs the configured suite (each suite for `All`) and writes
/// `report.csv`, `report.json` and any plots into `cfg.output_dir`.
pub fn run(cfg: &ExperimentConfig, presence: ConfigPresence, dump: Option<&Path>) -> Result<RunSummary> {
    cfg.validate()?;
    let io = |what: &Path, e: std::io::Error| Error::Io(format!("{}: {e}", what.display()));
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| io(&cfg.output_dir, e))?;
    if let Some(d) = dump {
        std::fs::create_dir_all(d).map_err(|e| io(d, e))?;
    }
    let suites: Vec<Suite> = if cfg.suite == Suite::All { Suite::EACH.to_vec() } else { vec![cfg.suite] };
    let mut combined = SuiteOutput::default();
    let mut results = Map::new();
    for suite in suites {
        let sub = if cfg.suite == Suite::All { cfg.for_suite(suite, presence.bodies, presence.n_grid) } else { cfg.clone() };
        let out = suites::run_suite(&sub, dump)?;
        results.insert(
            suite.name().to_string(),
            json!({"config": config_json(&sub), "summary": out.results, "passed": out.passed()}),
        );
        combined.rows.extend(out.rows);
        combined.assertions.extend(out.assertions);
        combined.plots.extend(out.plots);
    }
    let csv_path = cfg.output_dir.join("report.csv");
    std::fs::write(&csv_path, report::to_csv(&combined.rows)).map_err(|e| io(&csv_path, e))?;
    for (name, svg) in &combined.plots {
        let p = cfg.output_dir.join(name);
        std::fs::write(&p, svg).map_err(|e| io(&p, e))?;
    }
    let passed = combined.passed();
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let report = json!({
        "version": VERSION,
        "rng": RNG_ID,
        "timestamp_unix": timestamp,
        "config": config_json(cfg),
        "tolerances": {
            "ci_sigmas": crate::estimators::CI_SIGMAS,
            "dkw_alpha": crate::estimators::DKW_ALPHA,
            "slope_range": [suites::SLOPE_RANGE.0, suites::SLOPE_RANGE.1],
            "quadrature_tol": crate::clt::QUAD_TOL,
            "identity_tol": suites::IDENTITY_TOL,
            "spectral_rel_tol": suites::SPECTRAL_TOL,
            "symmetry_tol": suites::SYMMETRY_TOL,
        },
        "results": results,
        "assertions": combined.assertions.iter().map(|a| json!({
            "id": a.id,
            "anchor": a.anchor,
            "measured": report::json_num(a.measured),
            "bound": report::json_num(a.bound),
            "passed": a.passed,
            "note": a.note,
        })).collect::<Vec<_>>(),
        "passed": passed,
    });
    let json_path = cfg.output_dir.join("report.json");
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&json_path, text + "\n").map_err(|e| io(&json_path, e))?;
    Ok(RunSummary { rows: combined.rows.len(), assertions: combined.assertions, passed })
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidBody(_) | Error::UnsupportedKind { .. } | Error::DimensionMismatch { .. } => 2,
        Error::Io(_) => 3,
        _ => 1,
    }
}
