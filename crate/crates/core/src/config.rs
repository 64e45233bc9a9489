use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::Parameters;
use crate::error::{Error, Result};
use crate::harness::{ChainId, Settings};

/// Pseudo-chain name that runs the sharp-constant self test.
pub const SPECFUN: &str = "specfun";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// A flat JSON document; missing keys take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub chains: Vec<String>,
    pub dimensions: Vec<usize>,
    /// Corpus entries to run; empty means all.
    pub functions: Vec<String>,
    pub affine_hls_alphas: Vec<f64>,
    pub affine_frac_l2_alphas: Vec<f64>,
    /// Dilations for the chains without an α.
    pub dilations: Vec<f64>,
    pub m: usize,
    pub sphere_nodes: usize,
    pub tolerance_multiplier: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = Parameters::default();
        let s = Settings::default();
        RunConfig {
            chains: ChainId::ALL.iter().map(|c| c.name().to_string()).collect(),
            dimensions: vec![1, 2],
            functions: Vec::new(),
            affine_hls_alphas: p.affine_hls,
            affine_frac_l2_alphas: p.affine_frac_l2,
            dilations: p.dilations,
            m: 128,
            sphere_nodes: s.sphere_nodes,
            tolerance_multiplier: s.tolerance_multiplier,
            seed: 20_240_601,
            output_dir: PathBuf::from("reports"),
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))
    }

    pub fn settings(&self) -> Settings {
        Settings {
            tolerance_multiplier: self.tolerance_multiplier,
            sphere_nodes: self.sphere_nodes,
        }
    }

    pub fn parameters(&self) -> Parameters {
        Parameters {
            affine_hls: self.affine_hls_alphas.clone(),
            affine_frac_l2: self.affine_frac_l2_alphas.clone(),
            dilations: self.dilations.clone(),
        }
    }

    /// The selected chains, without the self-test pseudo-chain.
    pub fn chain_ids(&self) -> Vec<ChainId> {
        self.chains
            .iter()
            .filter_map(|c| ChainId::parse(c))
            .collect()
    }

    pub fn runs_self_test(&self) -> bool {
        self.chains.iter().any(|c| c == SPECFUN)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chains.is_empty() {
            return Err(Error::config("chains", "at least one chain is required"));
        }
        for (i, c) in self.chains.iter().enumerate() {
            if c != SPECFUN && ChainId::parse(c).is_none() {
                let known: Vec<&str> = ChainId::ALL.iter().map(|c| c.name()).collect();
                return Err(Error::config(
                    format!("chains[{i}]"),
                    format!(
                        "unknown chain `{c}` (expected one of {}, {SPECFUN})",
                        known.join(", ")
                    ),
                ));
            }
        }
        if self.dimensions.is_empty() {
            return Err(Error::config(
                "dimensions",
                "at least one dimension is required",
            ));
        }
        for (i, n) in self.dimensions.iter().enumerate() {
            if !(1..=2).contains(n) {
                return Err(Error::config(
                    format!("dimensions[{i}]"),
                    format!("{n} is not 1 or 2"),
                ));
            }
        }
        if !(self.m.is_power_of_two() && (32..=512).contains(&self.m)) {
            return Err(Error::config(
                "m",
                format!("{} is not a power of two in [32, 512]", self.m),
            ));
        }
        if self.sphere_nodes < 8 {
            return Err(Error::config(
                "sphere_nodes",
                format!("{} is below 8", self.sphere_nodes),
            ));
        }
        if !(self.tolerance_multiplier > 0.0 && self.tolerance_multiplier.is_finite()) {
            return Err(Error::config(
                "tolerance_multiplier",
                format!("{} is not a positive number", self.tolerance_multiplier),
            ));
        }
        let n_max = *self.dimensions.iter().max().unwrap() as f64;
        for (i, a) in self.affine_hls_alphas.iter().enumerate() {
            if !(*a > 0.0 && *a < n_max) {
                return Err(Error::config(
                    format!("affine_hls_alphas[{i}]"),
                    format!("{a} is outside (0, {n_max})"),
                ));
            }
        }
        let lo = -(1.0f64).min(n_max / 2.0);
        for (i, a) in self.affine_frac_l2_alphas.iter().enumerate() {
            if !(*a > lo && *a < 0.0) {
                return Err(Error::config(
                    format!("affine_frac_l2_alphas[{i}]"),
                    format!("{a} is outside ({lo}, 0)"),
                ));
            }
        }
        for (i, c) in self.dilations.iter().enumerate() {
            if !(*c > 0.0 && c.is_finite()) {
                return Err(Error::config(
                    format!("dilations[{i}]"),
                    format!("{c} is not a positive number"),
                ));
            }
        }
        if self.formats.is_empty() {
            return Err(Error::config(
                "formats",
                "at least one output format is required",
            ));
        }
        Ok(())
    }
}
