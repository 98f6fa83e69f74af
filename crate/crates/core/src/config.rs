//! TOML configuration files.
//!
//! ```toml
//! m = 8            # label bits per QAM symbol
//! m_sb = 4         # shaped label bits per QAM symbol
//!
//! [[layers]]       # top-down; the top layer has no `t` or `r`
//! l = 2
//! s = 2
//! v = 2
//! u = 4
//!
//! [[layers]]
//! l = 1
//! t = 2            # LUTs per parent LUT
//! T = 2            # optional, checked when present
//! r = 2
//! s = 1
//! v = 3
//! u = 4
//!
//! # optional sections
//! amplitude_classes = [[1, 3], [5, 7], [9, 11], [13, 15]]
//!
//! [ccdm]
//! composition = [157, 104, 46, 13]
//! k = 507
//!
//! [mb]
//! target_two_h = 7.169
//! ```
//!
//! Unknown keys are rejected. `amplitude_classes` must precede the first
//! `[[layers]]` table (a TOML rule for top-level keys); when omitted, the
//! adjacent-magnitude pairs of the modulation are used.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccdm::{CcdmCode, CcdmError, Composition};
use crate::lut_synthesis::{ClassEnergyTable, LutSet, SynthesisError};
use crate::tree_config::{RawLayer, TreeError, TreeSpec};

/// The 7-layer PS-256-QAM configuration shipped with the crate.
pub const BUNDLED_CONFIG: &str = include_str!("../configs/ps256qam_7layer.toml");
pub const BUNDLED_CONFIG_NAME: &str = "ps256qam_7layer";

/// Toy trees small enough to enumerate exhaustively, as `(name, toml)`.
pub const TOY_CONFIGS: [(&str, &str); 3] = [
    ("toy_2layer", include_str!("../configs/toy_2layer.toml")),
    ("toy_3layer", include_str!("../configs/toy_3layer.toml")),
    ("toy_ternary", include_str!("../configs/toy_ternary.toml")),
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config has no [{0}] section")]
    MissingSection(&'static str),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Ccdm(#[from] CcdmError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcdmSection {
    pub composition: Vec<u32>,
    pub k: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MbSection {
    pub target_two_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolConfig {
    pub m: usize,
    pub m_sb: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_classes: Option<Vec<Vec<u32>>>,
    pub layers: Vec<RawLayer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ccdm: Option<CcdmSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mb: Option<MbSection>,
}

impl ToolConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_CONFIG).expect("bundled config parses")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn tree_spec(&self) -> Result<TreeSpec, ConfigError> {
        Ok(TreeSpec::validate(&self.layers, self.m, self.m_sb)?)
    }

    pub fn class_energies(&self) -> Result<ClassEnergyTable, ConfigError> {
        if let Some(classes) = &self.amplitude_classes {
            return Ok(ClassEnergyTable::from_amplitude_classes(classes)?);
        }
        // validates m / m_sb before the layout is derived from them
        TreeSpec::validate(&self.layers, self.m, self.m_sb)?;
        Ok(ClassEnergyTable::for_modulation(self.m, self.m_sb))
    }

    pub fn synthesize(&self) -> Result<LutSet, ConfigError> {
        let spec = self.tree_spec()?;
        Ok(LutSet::synthesize(&spec, &self.class_energies()?)?)
    }

    pub fn ccdm_code(&self) -> Result<CcdmCode, ConfigError> {
        let section = self
            .ccdm
            .as_ref()
            .ok_or(ConfigError::MissingSection("ccdm"))?;
        let composition = Composition::new(section.composition.clone())?;
        Ok(CcdmCode::new(composition, section.k)?)
    }

    pub fn mb_target(&self) -> Result<f64, ConfigError> {
        self.mb
            .as_ref()
            .map(|mb| mb.target_two_h)
            .ok_or(ConfigError::MissingSection("mb"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config() {
        let cfg = ToolConfig::bundled();
        let spec = cfg.tree_spec().unwrap();
        assert_eq!(spec.n_info(), 507);
        assert_eq!(cfg.ccdm_code().unwrap().input_bits(), 507);
        assert_eq!(cfg.mb_target().unwrap(), 7.169);
        assert_eq!(
            cfg.class_energies().unwrap().as_slice(),
            &[5.0, 37.0, 101.0, 197.0]
        );
    }

    #[test]
    fn toy_configs_validate() {
        let sizes: Vec<usize> = TOY_CONFIGS
            .iter()
            .map(|(_, text)| {
                ToolConfig::parse(text)
                    .unwrap()
                    .tree_spec()
                    .unwrap()
                    .n_info()
            })
            .collect();
        assert_eq!(sizes, vec![4, 11, 10]);
        let toy = ToolConfig::parse(TOY_CONFIGS[0].1).unwrap();
        assert!(matches!(
            toy.ccdm_code(),
            Err(ConfigError::MissingSection("ccdm"))
        ));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = BUNDLED_CONFIG.replacen("s = 5", "s = 5\nw = 1", 1);
        assert!(matches!(
            ToolConfig::parse(&text),
            Err(ConfigError::Parse(_))
        ));
        let text = format!("{BUNDLED_CONFIG}\n[extra]\nx = 1\n");
        assert!(matches!(
            ToolConfig::parse(&text),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ToolConfig::bundled();
        assert_eq!(ToolConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn custom_amplitude_classes() {
        let text = format!(
            "amplitude_classes = [[1, 3], [5, 7], [9, 11], [13, 15]]\n{}",
            TOY_CONFIGS[0].1
        );
        let cfg = ToolConfig::parse(&text).unwrap();
        assert_eq!(
            cfg.class_energies().unwrap(),
            ClassEnergyTable::for_modulation(8, 4)
        );
    }
}
