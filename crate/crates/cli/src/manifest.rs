//! Run manifests and the spec/config documents they point at.

use std::fs;
use std::path::{Path, PathBuf};

use artcloud_core::experiment::{Arm, CompareSettings};
use artcloud_core::{SimConfig, Slack, WorkloadSpec};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::CliError;

/// Which policy arms a comparison runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmSelection {
    Baseline,
    Art2,
    Both,
}

impl ArmSelection {
    pub fn arms(self) -> Vec<Arm> {
        match self {
            ArmSelection::Baseline => vec![Arm::Baseline],
            ArmSelection::Art2 => vec![Arm::Art2],
            ArmSelection::Both => vec![Arm::Baseline, Arm::Art2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Workload spec file; `[workload]` entries are applied on top.
    #[serde(default)]
    pub spec: Option<PathBuf>,
    /// Simulator config file; `[sim]` entries are applied on top.
    #[serde(default)]
    pub config: Option<PathBuf>,
    #[serde(default)]
    pub workload: Option<toml::Table>,
    #[serde(default)]
    pub sim: Option<toml::Table>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_arms")]
    pub arms: ArmSelection,
    #[serde(default = "default_slacks")]
    pub slacks: Vec<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_arms() -> ArmSelection {
    ArmSelection::Both
}

fn default_slacks() -> Vec<String> {
    vec!["tight".into(), "relaxed".into()]
}

fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Csv]
}

impl Default for RunManifest {
    fn default() -> Self {
        Self {
            spec: None,
            config: None,
            workload: None,
            sim: None,
            out: None,
            arms: default_arms(),
            slacks: default_slacks(),
            formats: default_formats(),
            workers: None,
        }
    }
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let manifest: RunManifest = toml::from_str(&text).map_err(|e| CliError::parse_in(path, e))?;
        // relative paths inside the manifest are relative to it
        let base = path.parent().unwrap_or(Path::new(""));
        Ok(RunManifest {
            spec: manifest.spec.map(|p| base.join(p)),
            config: manifest.config.map(|p| base.join(p)),
            out: manifest.out.map(|p| base.join(p)),
            ..manifest
        })
    }

    pub fn settings(&self) -> Result<CompareSettings, CliError> {
        let workload: WorkloadSpec = layered(self.spec.as_deref(), self.workload.as_ref())?;
        let sim: SimConfig = layered(self.config.as_deref(), self.sim.as_ref())?;
        let slacks = self
            .slacks
            .iter()
            .map(|s| s.parse::<Slack>().map_err(CliError::Validation))
            .collect::<Result<Vec<_>, _>>()?;
        if slacks.is_empty() {
            return Err(CliError::Validation("manifest selects no deadline slack".into()));
        }
        if self.formats.is_empty() {
            return Err(CliError::Validation("manifest selects no report format".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Validation("workers must be at least 1".into()));
        }
        workload.validate()?;
        if workload.replications == 0 || workload.durations.is_empty() {
            return Err(CliError::Validation("manifest selects no replication or no duration".into()));
        }
        if let Some(d) = workload.durations.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(CliError::Validation(format!("duration {d} must be positive")));
        }
        Ok(CompareSettings { workload, sim, arms: self.arms.arms(), slacks })
    }
}

/// Reads a TOML (or, by extension, JSON) document into `T`.
pub fn load_document<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| CliError::parse_in(path, e))
    } else {
        toml::from_str(&text).map_err(|e| CliError::parse_in(path, e))
    }
}

/// Defaults, then the file at `path`, then the inline `overrides`.
fn layered<T: DeserializeOwned + serde::Serialize + Default>(
    path: Option<&Path>,
    overrides: Option<&toml::Table>,
) -> Result<T, CliError> {
    let base: T = match path {
        Some(p) => load_document(p)?,
        None => T::default(),
    };
    let Some(overrides) = overrides else {
        return Ok(base);
    };
    let mut table = toml::Table::try_from(&base).map_err(|e| CliError::Runtime(e.to_string()))?;
    merge(&mut table, overrides);
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Parse(format!("manifest override: {e}")))
}

fn merge(into: &mut toml::Table, from: &toml::Table) {
    for (key, value) in from {
        match (into.get_mut(key), value) {
            (Some(toml::Value::Table(a)), toml::Value::Table(b)) => merge(a, b),
            _ => {
                into.insert(key.clone(), value.clone());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_overrides_win() {
        let manifest: RunManifest = toml::from_str(
            r#"
            arms = "art2"
            slacks = ["tight"]
            [workload]
            replications = 2
            durations = [500.0]
            [sim.art2]
            rho = 0.9
            "#,
        )
        .unwrap();
        let s = manifest.settings().unwrap();
        assert_eq!(s.workload.replications, 2);
        assert_eq!(s.workload.durations, vec![500.0]);
        assert_eq!(s.workload.n_clients, 50);
        assert_eq!(s.sim.art2.rho, 0.9);
        assert_eq!(s.sim.art2.a, 10.0);
        assert_eq!(s.arms, vec![Arm::Art2]);
        assert_eq!(s.slacks, vec![Slack::Tight]);
    }

    #[test]
    fn bad_slack_and_unknown_keys_are_rejected() {
        let m: RunManifest = toml::from_str("slacks = [\"loose\"]").unwrap();
        assert!(matches!(m.settings(), Err(CliError::Validation(_))));
        assert!(toml::from_str::<RunManifest>("colour = 1").is_err());
    }
}
