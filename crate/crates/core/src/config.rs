//! `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys and
//! repeated keys are errors.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::decoding::DecodeParams;
use crate::encoding::EncodeParams;
use crate::error::{Error, Result};
use crate::losses::LossWeights;
use crate::rw::RwParams;

pub const KEYS: &[&str] = &[
    "erosion_radius",
    "center_distance_threshold",
    "encode_connectivity",
    "inside_threshold",
    "center_threshold",
    "decode_connectivity",
    "min_instance_area",
    "rw_beta",
    "rw_cg_tolerance",
    "rw_cg_max_iters",
    "rw_connectivity",
    "loss_alpha",
    "loss_beta",
    "loss_gamma",
    "output_dir",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub encode: EncodeParams,
    pub decode: DecodeParams,
    pub rw: RwParams,
    pub loss: LossWeights,
    pub output_dir: Option<PathBuf>,
}

fn parse_value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Config {
        line,
        message: format!("cannot parse value {raw:?} for {key}"),
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, got {trimmed:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key {key}"),
                });
            }
            cfg.set(line, key, value)?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<()> {
        match key {
            "erosion_radius" => self.encode.erosion_radius = parse_value(line, key, v)?,
            "center_distance_threshold" => self.encode.center_distance_threshold = parse_value(line, key, v)?,
            "encode_connectivity" => self.encode.connectivity = parse_value(line, key, v)?,
            "inside_threshold" => self.decode.inside_threshold = parse_value(line, key, v)?,
            "center_threshold" => self.decode.center_threshold = parse_value(line, key, v)?,
            "decode_connectivity" => self.decode.connectivity = parse_value(line, key, v)?,
            "min_instance_area" => self.decode.min_instance_area = parse_value(line, key, v)?,
            "rw_beta" => self.rw.beta = parse_value(line, key, v)?,
            "rw_cg_tolerance" => self.rw.cg_tolerance = parse_value(line, key, v)?,
            "rw_cg_max_iters" => self.rw.cg_max_iters = parse_value(line, key, v)?,
            "rw_connectivity" => self.rw.connectivity = parse_value(line, key, v)?,
            "loss_alpha" => self.loss.alpha = parse_value(line, key, v)?,
            "loss_beta" => self.loss.beta = parse_value(line, key, v)?,
            "loss_gamma" => self.loss.gamma = parse_value(line, key, v)?,
            "output_dir" => self.output_dir = Some(PathBuf::from(v)),
            other => {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key {other:?}"),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.encode.validate()?;
        self.decode.validate()?;
        self.rw.validate()?;
        self.loss.validate()
    }
}
