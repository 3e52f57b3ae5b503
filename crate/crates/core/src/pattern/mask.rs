//! Power upper-bound masks over the visible region.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(p: f64) -> f64 {
    10.0 * p.log10()
}

/// Region shapes in the `(u, v)` plane. Bounds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionShape {
    Rect {
        u_min: f64,
        u_max: f64,
        v_min: f64,
        v_max: f64,
    },
    Annulus {
        center_u: f64,
        center_v: f64,
        r_inner: f64,
        r_outer: f64,
    },
}

impl RegionShape {
    fn contains(&self, u: f64, v: f64) -> bool {
        match *self {
            RegionShape::Rect {
                u_min,
                u_max,
                v_min,
                v_max,
            } => (u_min..=u_max).contains(&u) && (v_min..=v_max).contains(&v),
            RegionShape::Annulus {
                center_u,
                center_v,
                r_inner,
                r_outer,
            } => {
                let r = (u - center_u).hypot(v - center_v);
                (r_inner..=r_outer).contains(&r)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskRegion {
    pub shape: RegionShape,
    /// Linear power level in `(0, 1]`.
    pub level: f64,
}

/// Piecewise-constant upper bound `Psi(u, v)`: 1 inside the mainlobe rectangle, else the
/// level of the first matching region, else the default level.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub center_u: f64,
    pub center_v: f64,
    pub bw_u: f64,
    pub bw_v: f64,
    pub regions: Vec<MaskRegion>,
    pub default_level: f64,
}

fn check_level(level: f64, what: &str) -> Result<()> {
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::param(format!("{what} must lie in (0, 1] (linear), got {level}")));
    }
    Ok(())
}

impl Mask {
    pub fn new(center: (f64, f64), bw_u: f64, bw_v: f64, regions: Vec<MaskRegion>, default_level: f64) -> Result<Self> {
        if !(bw_u > 0.0 && bw_v > 0.0) {
            return Err(Error::param("mainlobe widths must be positive"));
        }
        check_level(default_level, "default level")?;
        for r in &regions {
            check_level(r.level, "region level")?;
        }
        Ok(Mask {
            center_u: center.0,
            center_v: center.1,
            bw_u,
            bw_v,
            regions,
            default_level,
        })
    }

    /// Mainlobe rectangle plus concentric sidelobe rings around the mask center.
    ///
    /// `rings` lists `(outer radius, level in dB)` from the inside out; directions beyond
    /// the last ring get `default_db`.
    pub fn with_rings(center: (f64, f64), bw_u: f64, bw_v: f64, rings: &[(f64, f64)], default_db: f64) -> Result<Self> {
        let mut inner = 0.0;
        let regions = rings
            .iter()
            .map(|&(outer, db)| {
                let region = MaskRegion {
                    shape: RegionShape::Annulus {
                        center_u: center.0,
                        center_v: center.1,
                        r_inner: inner,
                        r_outer: outer,
                    },
                    level: db_to_linear(db),
                };
                inner = outer;
                region
            })
            .collect();
        Self::new(center, bw_u, bw_v, regions, db_to_linear(default_db))
    }

    /// A constant bound everywhere (no mainlobe special case needed when `level == 1`).
    pub fn flat(level: f64) -> Result<Self> {
        Self::new((0.0, 0.0), 1e-9, 1e-9, Vec::new(), level)
    }

    pub fn in_mainlobe(&self, u: f64, v: f64) -> bool {
        (u - self.center_u).abs() <= self.bw_u / 2.0 && (v - self.center_v).abs() <= self.bw_v / 2.0
    }

    /// Same mask with the mainlobe rectangle moved to `(u, v)`.
    pub fn recentered(&self, u: f64, v: f64) -> Mask {
        Mask {
            center_u: u,
            center_v: v,
            ..self.clone()
        }
    }

    pub fn level(&self, u: f64, v: f64) -> f64 {
        if self.in_mainlobe(u, v) {
            return 1.0;
        }
        self.regions
            .iter()
            .find(|r| r.shape.contains(u, v))
            .map_or(self.default_level, |r| r.level)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: MaskFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        file.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&MaskFile::from(self)).expect("mask serializes")
    }
}

/// On-disk mask layout; levels in dB.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskFile {
    #[serde(default)]
    pub center_u: f64,
    #[serde(default)]
    pub center_v: f64,
    pub bw_u: f64,
    pub bw_v: f64,
    #[serde(default)]
    pub regions: Vec<MaskRegionFile>,
    pub default_level_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum MaskRegionFile {
    Rect {
        u_min: f64,
        u_max: f64,
        v_min: f64,
        v_max: f64,
        level_db: f64,
    },
    Annulus {
        #[serde(default)]
        center_u: f64,
        #[serde(default)]
        center_v: f64,
        r_inner: f64,
        r_outer: f64,
        level_db: f64,
    },
}

impl MaskRegionFile {
    fn to_region(&self) -> MaskRegion {
        match *self {
            MaskRegionFile::Rect {
                u_min,
                u_max,
                v_min,
                v_max,
                level_db,
            } => MaskRegion {
                shape: RegionShape::Rect {
                    u_min,
                    u_max,
                    v_min,
                    v_max,
                },
                level: db_to_linear(level_db),
            },
            MaskRegionFile::Annulus {
                center_u,
                center_v,
                r_inner,
                r_outer,
                level_db,
            } => MaskRegion {
                shape: RegionShape::Annulus {
                    center_u,
                    center_v,
                    r_inner,
                    r_outer,
                },
                level: db_to_linear(level_db),
            },
        }
    }

    fn from_region(r: &MaskRegion) -> Self {
        let level_db = linear_to_db(r.level);
        match r.shape {
            RegionShape::Rect {
                u_min,
                u_max,
                v_min,
                v_max,
            } => MaskRegionFile::Rect {
                u_min,
                u_max,
                v_min,
                v_max,
                level_db,
            },
            RegionShape::Annulus {
                center_u,
                center_v,
                r_inner,
                r_outer,
            } => MaskRegionFile::Annulus {
                center_u,
                center_v,
                r_inner,
                r_outer,
                level_db,
            },
        }
    }
}

impl TryFrom<MaskFile> for Mask {
    type Error = Error;

    fn try_from(f: MaskFile) -> Result<Mask> {
        let regions = f
            .regions
            .iter()
            .map(MaskRegionFile::to_region)
            .collect();
        Mask::new((f.center_u, f.center_v), f.bw_u, f.bw_v, regions, db_to_linear(f.default_level_db))
    }
}

impl From<&Mask> for MaskFile {
    fn from(m: &Mask) -> Self {
        MaskFile {
            center_u: m.center_u,
            center_v: m.center_v,
            bw_u: m.bw_u,
            bw_v: m.bw_v,
            regions: m
                .regions
                .iter()
                .map(MaskRegionFile::from_region)
                .collect(),
            default_level_db: linear_to_db(m.default_level),
        }
    }
}
