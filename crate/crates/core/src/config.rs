//! JSON run configuration shared by every command.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisOptions;
use crate::error::{GeimError, Result};
use crate::families::{build_dictionary, build_family, DictionarySpec, FamilySpec};
use crate::greedy::GreedyConfig;
use crate::rates::AuditOptions;
use crate::space::{FunctionSet, Functional, NormMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilySpec,
    /// Defaults to the mode's standard dictionary when absent.
    #[serde(default)]
    pub dictionary: Option<DictionarySpec>,
    pub greedy: GreedyConfig,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default)]
    pub emit_plots: bool,
    #[serde(default)]
    pub analysis: AnalysisOptions,
    #[serde(default)]
    pub audit: AuditOptions,
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    /// Parse and validate; syntax errors quote the offending line.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            let line = text.lines().nth(e.line().saturating_sub(1)).unwrap_or("").trim_end();
            GeimError::InvalidConfig(format!("line {}, column {}: {e}\n    {line}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            GeimError::InvalidConfig(m) => GeimError::InvalidConfig(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.greedy.validate(usize::MAX, usize::MAX)?;
        if !(self.audit.zeta_beta > 0.5) {
            return Err(GeimError::InvalidConfig(format!(
                "audit.zeta_beta must exceed 1/2, got {}",
                self.audit.zeta_beta
            )));
        }
        Ok(())
    }

    pub fn mode(&self) -> NormMode {
        self.greedy.mode
    }

    pub fn dictionary_spec(&self) -> DictionarySpec {
        self.dictionary.clone().unwrap_or_else(|| DictionarySpec::default_for(self.mode()))
    }

    /// Snapshot set and dictionary on the configured grid.
    pub fn build_inputs(&self) -> Result<(FunctionSet, Vec<Functional>)> {
        let set = build_family(&self.family, self.mode())?;
        let dict = build_dictionary(&self.dictionary_spec(), set.grid(), self.mode())?;
        Ok((set, dict))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg =
            RunConfig::from_json(r#"{"family": {"kind": "GaussianBump"}, "greedy": {"n_max": 5, "mode": "hilbert"}}"#)
                .unwrap();
        assert_eq!(cfg.outputs, PathBuf::from("out"));
        assert!(!cfg.emit_plots);
        assert_eq!(cfg.dictionary_spec(), DictionarySpec::default_for(NormMode::Hilbert));
    }

    #[test]
    fn syntax_errors_carry_the_line() {
        let text = "{\n  \"family\": {\"kind\": \"GaussianBump\"},\n  \"greedy\": {\"n_max\": 5 \"mode\": \"sup\"}\n}";
        let msg = RunConfig::from_json(text).unwrap_err().to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("\"greedy\""), "{msg}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"family": {"kind": "GaussianBump"}, "greedy": {"n_max": 5, "mode": "sup"}, "outptus": "x"}"#;
        assert!(RunConfig::from_json(text).is_err());
    }
}
