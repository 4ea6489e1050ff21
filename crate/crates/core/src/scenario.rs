//! Scenario files: JSON experiment descriptions with validated defaults.

use crate::dynamics::{InitialData, Scheme};
use crate::model::{BoundaryCase, CouplingKind, CouplingModel};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    Spectrum,
    Resolvent,
    AbscissaTable,
    ContinuousRoots,
    Simulate,
    SmoothnessSweep,
    DiscontinuitySweep,
    Verify,
}

impl Task {
    pub fn slug(&self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Resolvent => "resolvent",
            Task::AbscissaTable => "abscissa",
            Task::ContinuousRoots => "roots",
            Task::Simulate => "simulate",
            Task::SmoothnessSweep => "sweep_smooth",
            Task::DiscontinuitySweep => "sweep_disc",
            Task::Verify => "verify",
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
}

fn default_name() -> String {
    String::new()
}
fn default_model() -> String {
    "weak".into()
}
fn default_bc() -> String {
    "DD".into()
}
fn default_n() -> usize {
    100
}
fn default_gamma() -> f64 {
    0.05
}
fn default_t() -> f64 {
    100.0
}
fn default_dt() -> f64 {
    0.1
}
fn default_alpha() -> f64 {
    0.0
}
fn default_scheme() -> Scheme {
    Scheme::TrapezoidalImplicit
}
fn default_initial() -> InitialData {
    InitialData {
        v0: crate::dynamics::FieldSpec::SineMode { j: 1 },
        ..Default::default()
    }
}
fn default_ns() -> Vec<usize> {
    vec![8, 16, 24, 32]
}
fn default_js() -> Vec<u32> {
    vec![1, 2, 3]
}
fn default_s_min() -> f64 {
    1.0
}
fn default_s_max() -> f64 {
    1e3
}
fn default_points_per_decade() -> usize {
    crate::spectral::SCAN_POINTS_PER_DECADE
}
fn default_k_lo() -> u32 {
    5
}
fn default_k_hi() -> u32 {
    40
}
fn default_seed() -> u64 {
    42
}

/// One experiment description. Unset fields take the documented defaults
/// (n = 100, T = 100, dt = 0.1, gamma = 0.05, N_grid = n, seed = 42).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_bc")]
    pub bc: String,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub task: Task,
    #[serde(rename = "T", default = "default_t")]
    pub t_final: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_initial")]
    pub initial: InitialData,
    /// Mode counts for the abscissa table.
    #[serde(default = "default_ns")]
    pub ns: Vec<usize>,
    /// Initial-data frequencies for the smoothness sweep.
    #[serde(default = "default_js")]
    pub js: Vec<u32>,
    #[serde(default = "default_s_min")]
    pub s_min: f64,
    #[serde(default = "default_s_max")]
    pub s_max: f64,
    #[serde(default = "default_points_per_decade")]
    pub points_per_decade: usize,
    #[serde(default = "default_k_lo")]
    pub k_lo: u32,
    #[serde(default = "default_k_hi")]
    pub k_hi: u32,
    /// Reconstruction grid size; defaults to n.
    #[serde(default)]
    pub n_grid: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory; the THERMO_OUT_DIR environment variable overrides it.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl Scenario {
    pub fn with_task(task: Task) -> Self {
        serde_json::from_value(serde_json::json!({ "task": task }))
            .expect("defaults are self-consistent")
    }

    pub fn coupling(&self) -> Result<CouplingModel, ScenarioError> {
        let kind: CouplingKind = self
            .model
            .parse()
            .map_err(|e| ScenarioError::Validation(vec![format!("model: {e}")]))?;
        CouplingModel::new(kind, self.gamma)
            .map_err(|e| ScenarioError::Validation(vec![format!("gamma: {e}")]))
    }

    pub fn boundary(&self) -> Result<BoundaryCase, ScenarioError> {
        self.bc
            .parse()
            .map_err(|e| ScenarioError::Validation(vec![format!("bc: {e}")]))
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid.unwrap_or(self.n)
    }

    /// Default fit window: the second half of the simulation.
    pub fn window(&self) -> (f64, f64) {
        (0.5 * self.t_final, self.t_final)
    }

    pub fn effective_name(&self) -> String {
        if self.name.is_empty() {
            format!(
                "{}_{}_{}_n{}",
                self.task.slug(),
                self.model,
                self.bc,
                self.n
            )
        } else {
            self.name.clone()
        }
    }

    /// All range violations at once, so a bad file is reported in one pass.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut errs = Vec::new();
        if self.model.parse::<CouplingKind>().is_err() {
            errs.push(format!("model: unknown coupling kind {:?}", self.model));
        }
        if self.bc.parse::<BoundaryCase>().is_err() {
            errs.push(format!("bc: unknown boundary case {:?}", self.bc));
        }
        if !(1..=512).contains(&self.n) {
            errs.push(format!("n: {} outside [1, 512]", self.n));
        }
        if !(self.gamma > 0.0 && self.gamma <= 10.0) {
            errs.push(format!("gamma: {} outside (0, 10]", self.gamma));
        }
        if !(self.dt > 0.0 && self.dt <= 1.0) {
            errs.push(format!("dt: {} outside (0, 1]", self.dt));
        }
        if !(self.t_final > 0.0 && self.t_final <= 1e4) {
            errs.push(format!("T: {} outside (0, 1e4]", self.t_final));
        }
        if self.dt > self.t_final {
            errs.push(format!("dt: {} exceeds T = {}", self.dt, self.t_final));
        }
        if self.alpha < 0.0 {
            errs.push(format!("alpha: {} negative", self.alpha));
        }
        if !(self.s_min > 0.0 && self.s_min < self.s_max) {
            errs.push(format!(
                "s_min/s_max: ({}, {}) not an increasing positive pair",
                self.s_min, self.s_max
            ));
        }
        if self.points_per_decade < 2 {
            errs.push("points_per_decade: need at least 2".into());
        }
        if !(5..=60).contains(&self.k_lo) || !(5..=60).contains(&self.k_hi) || self.k_lo > self.k_hi
        {
            errs.push(format!(
                "k range: [{}, {}] must sit inside [5, 60]",
                self.k_lo, self.k_hi
            ));
        }
        if self.ns.is_empty() || self.ns.iter().any(|&n| !(1..=512).contains(&n)) {
            errs.push("ns: must be nonempty with every entry in [1, 512]".into());
        }
        if self.js.is_empty() || self.js.iter().any(|&j| j == 0) {
            errs.push("js: must be nonempty positive frequencies".into());
        }
        if let Some(g) = self.n_grid {
            if g < 2 {
                errs.push(format!("n_grid: {g} below 2"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Validation(errs))
        }
    }
}

/// Read and validate a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Parse(format!("{}: {e}", path.display())))?;
    let scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| ScenarioError::Parse(format!("{}: {e}", path.display())))?;
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let s: Scenario = serde_json::from_str(
            r#"{"model":"weak","bc":"DD","n":100,"gamma":0.05,"task":"Simulate"}"#,
        )
        .unwrap();
        s.validate().unwrap();
        assert_eq!(s.dt, 0.1);
        assert_eq!(s.t_final, 100.0);
        assert_eq!(s.n_grid(), 100);
        assert_eq!(s.seed, 42);
        assert_eq!(
            s.initial.v0,
            crate::dynamics::FieldSpec::SineMode { j: 1 }
        );
    }

    #[test]
    fn negative_gamma_names_the_field() {
        let s: Scenario =
            serde_json::from_str(r#"{"task":"Spectrum","gamma":-1.0}"#).unwrap();
        match s.validate() {
            Err(ScenarioError::Validation(errs)) => {
                assert!(errs.iter().any(|e| e.starts_with("gamma")));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn abscissa_table_shape() {
        let s: Scenario = serde_json::from_str(
            r#"{"task":"AbscissaTable","model":"strong","ns":[8,16,24,32]}"#,
        )
        .unwrap();
        s.validate().unwrap();
        assert_eq!(s.ns, vec![8, 16, 24, 32]);
    }

    #[test]
    fn out_of_range_collects_all_violations() {
        let s: Scenario = serde_json::from_str(
            r#"{"task":"Simulate","n":1000,"dt":2.0,"T":1e6}"#,
        )
        .unwrap();
        match s.validate() {
            Err(ScenarioError::Validation(errs)) => assert_eq!(errs.len(), 3),
            other => panic!("expected validation error, got {other:?}"),
        }
    }
}
