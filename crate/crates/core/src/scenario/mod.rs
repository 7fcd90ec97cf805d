//! Named scenarios: frozen defaults, configuration overrides, the run
//! pipelines and the run manifest.
//!
//! A config is resolved in layers, each overriding the previous: built-in
//! defaults, the scenario's shipped defaults, a user JSON file, and
//! `key.path=value` assignments.

mod config;
mod manifest;
mod run;

use std::path::Path;
use std::time::Instant;

use serde_json::Value;

pub use config::{
    apply_override, merge, parse_config_text, resolve, BasisConfig, Expectation, Numerics, Physics, PointerSlot,
    PostConfig, Preparation, ScanConfig, ScenarioConfig, Study, TimeSlot,
};
pub use manifest::{Artifacts, CheckOutcome, FileRecord, Relation, RunManifest, MANIFEST_NAME};

use crate::{Error, Exec, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pipeline {
    Single,
    WeakPointer,
    MomentumFilter,
    ShiftScaling,
    BohmCoupled,
    BohmFree,
}

#[derive(Debug, Clone, Copy)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    defaults: &'static str,
    pipeline: Pipeline,
}

impl ScenarioInfo {
    /// The shipped default overrides as JSON text.
    pub fn defaults(&self) -> &'static str {
        self.defaults
    }
}

macro_rules! scenario {
    ($name:literal, $pipeline:ident, $desc:literal) => {
        ScenarioInfo {
            name: $name,
            description: $desc,
            defaults: include_str!(concat!("../../scenarios/", $name, ".json")),
            pipeline: Pipeline::$pipeline,
        }
    };
}

static REGISTRY: &[ScenarioInfo] = &[
    scenario!("single", Single, "single packet, self post-selected: weak value equals the density"),
    scenario!("fig2a", WeakPointer, "pointer a at t1: only the post-selected packet (type 1)"),
    scenario!("fig2b", WeakPointer, "pointer c at t1: only the orthogonal packet (type 2) and its reflected paths"),
    scenario!("fig2c", WeakPointer, "pointer b at t2: both packets interfere at the midpoint (type 3)"),
    scenario!("fig3a", BohmCoupled, "Bohmian trajectories with a weakly coupled pointer at w_a: no crossings"),
    scenario!("fig3b", BohmCoupled, "Bohmian trajectories with a stronger coupling, y starting at w_a - 2"),
    scenario!("gscale", ShiftScaling, "simulated pointer shift against g Re(A) for decreasing g"),
    scenario!("pfilter", MomentumFilter, "momentum-filtering post-selection suppresses the type 2 weak value"),
    scenario!("bohm1d", BohmFree, "free two-packet Bohmian ensemble: equivariance and non-crossing"),
];

pub fn list_scenarios() -> &'static [ScenarioInfo] {
    REGISTRY
}

pub fn find_scenario(name: &str) -> Result<&'static ScenarioInfo> {
    REGISTRY.iter().find(|s| s.name == name).ok_or_else(|| Error::UnknownScenario {
        name: name.to_string(),
        valid: REGISTRY.iter().map(|s| s.name).collect::<Vec<_>>().join(", "),
    })
}

/// Resolves a config. `scenario` overrides any name inside `user_config`;
/// one of them must supply it.
pub fn load_config(scenario: Option<&str>, user_config: Option<&str>, overrides: &[String]) -> Result<ScenarioConfig> {
    let user = user_config.map(parse_config_text).transpose()?;
    let from_file = user
        .as_ref()
        .and_then(|u| u.get("scenario"))
        .and_then(Value::as_str)
        .map(str::to_string);
    let name = scenario
        .map(str::to_string)
        .or(from_file)
        .ok_or_else(|| Error::Config("no scenario given; pass one on the command line or in the config".into()))?;
    let info = find_scenario(&name)?;
    let mut doc = serde_json::to_value(ScenarioConfig::default())?;
    let shipped = serde_json::from_str(info.defaults)
        .map_err(|e| Error::Config(format!("shipped defaults of `{name}`: {e}")))?;
    merge(&mut doc, shipped);
    if let Some(u) = user {
        merge(&mut doc, u);
    }
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    doc["scenario"] = Value::String(name);
    resolve(doc)
}

/// Runs the scenario named in `cfg`. With `out` the outputs and the
/// manifest are written there; without it they are only hashed.
pub fn run_scenario(cfg: &ScenarioConfig, out: Option<&Path>, exec: Exec) -> Result<RunManifest> {
    let clock = Instant::now();
    cfg.validate()?;
    let name = cfg
        .scenario
        .as_deref()
        .ok_or_else(|| Error::Config("config does not name a scenario".into()))?;
    let info = find_scenario(name)?;
    log::info!("running scenario {name}");
    let mut art = Artifacts::new(out)?;
    let ctx = run::Ctx { cfg, name, exec };
    let outcome = match info.pipeline {
        Pipeline::Single => run::single(&ctx, &mut art),
        Pipeline::WeakPointer => run::weak_pointer(&ctx, &mut art),
        Pipeline::MomentumFilter => run::momentum_filter(&ctx, &mut art),
        Pipeline::ShiftScaling => run::shift_scaling(&ctx, &mut art),
        Pipeline::BohmCoupled => run::bohm_coupled(&ctx, &mut art),
        Pipeline::BohmFree => run::bohm_free(&ctx, &mut art),
    }
    .map_err(|e| Error::Scenario {
        scenario: name.to_string(),
        source: Box::new(e),
    })?;
    let manifest = RunManifest {
        scenario: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        files: art.into_files(),
        passed: outcome.checks.iter().all(|c| c.passed),
        checks: outcome.checks,
        results: outcome.results,
    };
    if let Some(dir) = out {
        manifest.write(dir)?;
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests;
