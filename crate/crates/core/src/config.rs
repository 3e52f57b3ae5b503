//! Run configuration files (JSON).
//!
//! Relative paths are resolved against the directory holding the config file. Unknown keys
//! are rejected and every error names the offending key.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{check_tileability, GridSpec, TileFamily, MAX_ORDER};
use crate::io;
use crate::pattern::element::ElementPattern;
use crate::pattern::mask::Mask;
use crate::pattern::scan::ScanSpec;
use crate::pattern::weights::{direction_cosines, steering_phases, PhaseMean, WeightSet};
use crate::rtam::RtamConfig;

pub const DEFAULT_RESOLUTION: usize = 301;
pub const DEFAULT_ENUMERATION_THRESHOLD: u64 = 100_000;
pub const DEFAULT_SAMPLE_BUDGET: usize = 10_000;

fn half() -> f64 {
    0.5
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    rows: usize,
    cols: usize,
    #[serde(default = "half")]
    dx: f64,
    #[serde(default = "half")]
    dy: f64,
}

/// Where the reference excitations come from.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSource {
    Uniform {
        #[serde(default)]
        steer_theta_deg: f64,
        #[serde(default)]
        steer_phi_deg: f64,
    },
    RaisedCosine {
        pedestal: f64,
        exponent: f64,
        #[serde(default)]
        steer_theta_deg: f64,
        #[serde(default)]
        steer_phi_deg: f64,
    },
    Csv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementSource {
    #[default]
    Isotropic,
    Csv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub theta_max_deg: f64,
    pub theta_steps: usize,
    pub phi_steps: usize,
    /// Cone used for the max/avg summary; defaults to the whole map.
    #[serde(default)]
    pub summary_theta_deg: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    grid: GridFile,
    #[serde(default = "default_family")]
    family: TileFamily,
    #[serde(default)]
    max_order: Option<u32>,
    #[serde(default)]
    q_max: Option<usize>,
    mask: PathBuf,
    reference: ReferenceSource,
    #[serde(default)]
    element_pattern: ElementSource,
    #[serde(default)]
    resolution: Option<usize>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    scan: Option<ScanConfig>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    enumeration_threshold: Option<u64>,
    #[serde(default)]
    sample_budget: Option<usize>,
    #[serde(default)]
    phase_mean: PhaseMean,
    #[serde(default)]
    raise_order: bool,
    #[serde(default)]
    snapshot_q: Vec<usize>,
}

fn default_family() -> TileFamily {
    TileFamily::LTromino
}

/// A validated run configuration with defaults applied and paths resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub family: TileFamily,
    pub max_order: u32,
    pub q_max: usize,
    pub mask: PathBuf,
    pub reference: ReferenceSource,
    pub element_pattern: ElementSource,
    pub resolution: usize,
    pub output_dir: PathBuf,
    pub scan: Option<ScanConfig>,
    pub seed: u64,
    pub enumeration_threshold: u64,
    pub sample_budget: usize,
    pub phase_mean: PhaseMean,
    pub raise_order: bool,
    /// Cluster counts whose layouts are written next to the final one.
    pub snapshot_q: Vec<usize>,
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn resolve(base: &Path, p: &Path, key: &str) -> Result<PathBuf> {
    let full = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    if !full.exists() {
        return Err(config_error(key, format!("file {} does not exist", full.display())));
    }
    Ok(full)
}

/// Highest order whose tiles cover the grid exactly, if any.
pub fn highest_tileable_order(grid: &GridSpec, family: TileFamily) -> Option<u32> {
    (1..=MAX_ORDER)
        .rev()
        .find(|&r| check_tileability(grid, r, family).is_ok_and(|v| v.tileable))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parse config text, resolving relative paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(&path, e.into_inner().to_string())
        })?;

        let g = &file.grid;
        let grid = GridSpec::new(g.rows, g.cols, g.dx, g.dy).map_err(|e| config_error("grid", e.to_string()))?;
        let family = file.family;

        let max_order = match file.max_order {
            Some(r) => {
                if r == 0 || r > MAX_ORDER {
                    return Err(config_error("max_order", format!("must be in 1..={MAX_ORDER}, got {r}")));
                }
                r
            }
            None => highest_tileable_order(&grid, family)
                .ok_or_else(|| config_error("max_order", "the grid is not tileable at any order; set it explicitly"))?,
        };

        let ceiling = grid.len() / family.base_cells();
        let q_max = file.q_max.unwrap_or(ceiling);
        if q_max > ceiling {
            return Err(config_error("q_max", format!("{q_max} exceeds M*N/I(1) = {ceiling}")));
        }

        let resolution = file.resolution.unwrap_or(DEFAULT_RESOLUTION);
        if resolution < crate::pattern::field::MIN_RESOLUTION {
            return Err(config_error(
                "resolution",
                format!("must be at least {}, got {resolution}", crate::pattern::field::MIN_RESOLUTION),
            ));
        }

        let mask = resolve(base, &file.mask, "mask")?;
        let reference = match file.reference {
            ReferenceSource::Csv { path } => ReferenceSource::Csv {
                path: resolve(base, &path, "reference.path")?,
            },
            ReferenceSource::RaisedCosine { pedestal, exponent, .. } if !(0.0..=1.0).contains(&pedestal) || exponent.is_nan() || exponent < 0.0 => {
                return Err(config_error("reference", "pedestal must lie in [0, 1] and exponent be >= 0"));
            }
            other => other,
        };
        let element_pattern = match file.element_pattern {
            ElementSource::Csv { path } => ElementSource::Csv {
                path: resolve(base, &path, "element_pattern.path")?,
            },
            other => other,
        };

        if let Some(scan) = &file.scan {
            let spec = ScanSpec {
                theta_max_deg: scan.theta_max_deg,
                theta_steps: scan.theta_steps,
                phi_steps: scan.phi_steps,
                theta0_deg: 0.0,
                phi0_deg: 0.0,
            };
            spec.validate().map_err(|e| config_error("scan", e.to_string()))?;
        }

        let sample_budget = file.sample_budget.unwrap_or(DEFAULT_SAMPLE_BUDGET);
        if sample_budget == 0 {
            return Err(config_error("sample_budget", "must be positive"));
        }

        let output_dir = file.output_dir.unwrap_or_else(|| PathBuf::from("out"));
        let output_dir = if output_dir.is_absolute() { output_dir } else { base.join(output_dir) };

        Ok(RunConfig {
            grid,
            family,
            max_order,
            q_max,
            mask,
            reference,
            element_pattern,
            resolution,
            output_dir,
            scan: file.scan,
            seed: file.seed,
            enumeration_threshold: file.enumeration_threshold.unwrap_or(DEFAULT_ENUMERATION_THRESHOLD),
            sample_budget,
            phase_mean: file.phase_mean,
            raise_order: file.raise_order,
            snapshot_q: file.snapshot_q,
        })
    }

    pub fn rtam(&self) -> RtamConfig {
        RtamConfig {
            family: self.family,
            max_order: self.max_order,
            q_max: self.q_max,
            resolution: self.resolution,
            enumeration_threshold: self.enumeration_threshold,
            sample_budget: self.sample_budget,
            seed: self.seed,
            phase_mean: self.phase_mean,
            raise_order: self.raise_order,
        }
    }

    pub fn load_mask(&self) -> Result<Mask> {
        io::load_mask(&self.mask)
    }

    /// Pointing direction `(theta, phi)` in degrees of a generated reference.
    pub fn pointing_deg(&self) -> (f64, f64) {
        match self.reference {
            ReferenceSource::Uniform {
                steer_theta_deg,
                steer_phi_deg,
            }
            | ReferenceSource::RaisedCosine {
                steer_theta_deg,
                steer_phi_deg,
                ..
            } => (steer_theta_deg, steer_phi_deg),
            ReferenceSource::Csv { .. } => (0.0, 0.0),
        }
    }

    pub fn build_reference(&self) -> Result<WeightSet> {
        let steer = |w: WeightSet, theta: f64, phi: f64| -> Result<WeightSet> {
            if theta == 0.0 {
                return Ok(w);
            }
            let (u, v) = direction_cosines(theta, phi);
            w.with_phases(steering_phases(&self.grid, u, v)?)
        };
        match &self.reference {
            ReferenceSource::Uniform {
                steer_theta_deg,
                steer_phi_deg,
            } => steer(WeightSet::uniform(self.grid), *steer_theta_deg, *steer_phi_deg),
            ReferenceSource::RaisedCosine {
                pedestal,
                exponent,
                steer_theta_deg,
                steer_phi_deg,
            } => steer(WeightSet::raised_cosine(self.grid, *pedestal, *exponent)?, *steer_theta_deg, *steer_phi_deg),
            ReferenceSource::Csv { path } => io::load_excitations(path, &self.grid),
        }
    }

    pub fn load_element(&self) -> Result<ElementPattern> {
        match &self.element_pattern {
            ElementSource::Isotropic => Ok(ElementPattern::Isotropic),
            ElementSource::Csv { path } => Ok(ElementPattern::Tabulated(io::load_element_table(path)?)),
        }
    }

    pub fn scan_spec(&self) -> Option<ScanSpec> {
        let (theta0_deg, phi0_deg) = self.pointing_deg();
        self.scan.map(|s| ScanSpec {
            theta_max_deg: s.theta_max_deg,
            theta_steps: s.theta_steps,
            phi_steps: s.phi_steps,
            theta0_deg,
            phi0_deg,
        })
    }
}
