use std::path::Path;

use serde::Deserialize;
use tomocheck_core::{Error, Result};

/// Optional defaults read from `--config`; keys mirror the long flag names.
/// A flag given on the command line always wins.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub tolerance: Option<f64>,
    pub purity_tolerance: Option<f64>,
    pub phases: Option<usize>,
    pub nx: Option<usize>,
    pub x_max: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                serde_json::from_str(&text).map_err(Error::from)
            }
        }
    }
}
