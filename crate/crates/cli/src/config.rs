//! Optional TOML configuration.
//!
//! ```toml
//! [viewport]
//! hfov = 90.0       # degrees
//! vfov = 90.0
//! sampling = 64     # overlap grid steps per axis
//!
//! [dash]
//! vwpt_scheme = "urn:example:omaf:vwpt"
//! ovly_scheme = "urn:example:omaf:ovly"
//! ```
//!
//! Command-line flags override the file, which overrides built-in defaults.

use crate::error::CliError;
use omaf_core::dash::DashConfig;
use omaf_core::geometry::OverlapSampling;
use omaf_core::strategy::ViewportParams;
use serde::Deserialize;
use std::path::{Path, PathBuf};

pub const CONFIG_ENV: &str = "OMAF_TOOLKIT_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub viewport: ViewportSection,
    #[serde(default)]
    pub dash: DashSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewportSection {
    pub hfov: Option<f64>,
    pub vfov: Option<f64>,
    pub sampling: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DashSection {
    pub vwpt_scheme: Option<String>,
    pub ovly_scheme: Option<String>,
}

impl Config {
    /// Reads the file named by `--config`, else by the environment variable,
    /// else returns the defaults.
    pub fn load(flag: Option<&Path>) -> Result<Self, CliError> {
        let path = match flag {
            Some(p) => p.to_path_buf(),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => PathBuf::from(p),
                _ => return Ok(Self::default()),
            },
        };
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        Self::parse(&text).map_err(|e| CliError::parse(&path, e))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn viewport(&self, hfov: Option<f64>, vfov: Option<f64>, sampling: Option<u32>) -> ViewportParams {
        let d = ViewportParams::default();
        let pick = |flag: Option<u32>, file: Option<u32>| flag.or(file).map(OverlapSampling::square);
        ViewportParams {
            hfov: hfov.or(self.viewport.hfov).unwrap_or(d.hfov),
            vfov: vfov.or(self.viewport.vfov).unwrap_or(d.vfov),
            sampling: pick(sampling, self.viewport.sampling).unwrap_or(d.sampling),
        }
    }

    pub fn dash(&self) -> DashConfig {
        let d = DashConfig::default();
        DashConfig {
            vwpt_scheme: self.dash.vwpt_scheme.clone().unwrap_or(d.vwpt_scheme),
            ovly_scheme: self.dash.ovly_scheme.clone().unwrap_or(d.ovly_scheme),
        }
    }
}
