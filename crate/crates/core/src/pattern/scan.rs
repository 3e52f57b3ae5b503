//! Sidelobe level over a cone of scan directions around the pointing direction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::element::ElementPattern;
use super::field::Aperture;
use super::mask::Mask;
use super::metrics::sidelobe_level;
use super::weights::{cluster_excitations, steering_phases, PhaseMean, WeightSet};
use crate::error::{Error, Result};
use crate::geometry::Clustering;

/// Scan cone sampling. Angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub theta_max_deg: f64,
    pub theta_steps: usize,
    pub phi_steps: usize,
    #[serde(default)]
    pub theta0_deg: f64,
    #[serde(default)]
    pub phi0_deg: f64,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.theta_steps < 1 || self.phi_steps < 1 {
            return Err(Error::param("scan step counts must be at least 1"));
        }
        if !(0.0..=90.0).contains(&self.theta_max_deg) {
            return Err(Error::param("scan theta_max must lie in [0, 90] degrees"));
        }
        Ok(())
    }

    /// Offsets `theta_s`, evenly spaced from 0 to `theta_max` inclusive.
    pub fn thetas(&self) -> Vec<f64> {
        if self.theta_steps == 1 {
            return vec![0.0];
        }
        (0..self.theta_steps)
            .map(|i| i as f64 * self.theta_max_deg / (self.theta_steps - 1) as f64)
            .collect()
    }

    /// Offsets `phi_s`, evenly spaced over `[0, 360)`.
    pub fn phis(&self) -> Vec<f64> {
        (0..self.phi_steps).map(|j| j as f64 * 360.0 / self.phi_steps as f64).collect()
    }

    /// Direction cosines of the beam at offset `(theta_s, phi_s)`.
    pub fn direction(&self, theta_s: f64, phi_s: f64) -> (f64, f64) {
        let t = (self.theta0_deg + theta_s).to_radians();
        let p = (self.phi0_deg + phi_s).to_radians();
        (t.sin() * p.cos(), t.sin() * p.sin())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanMap {
    pub theta_deg: Vec<f64>,
    pub phi_deg: Vec<f64>,
    /// `sll_db[it * phi.len() + ip]`.
    pub sll_db: Vec<f64>,
}

impl ScanMap {
    pub fn get(&self, it: usize, ip: usize) -> f64 {
        self.sll_db[it * self.phi_deg.len() + ip]
    }

    /// Maximum and mean SLL over samples with `theta_s <= theta_limit`.
    pub fn summary(&self, theta_limit: f64) -> Option<(f64, f64)> {
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        let mut count = 0usize;
        for (it, &t) in self.theta_deg.iter().enumerate() {
            if t > theta_limit + 1e-12 {
                continue;
            }
            for ip in 0..self.phi_deg.len() {
                let s = self.get(it, ip);
                max = max.max(s);
                sum += s;
                count += 1;
            }
        }
        (count > 0).then(|| (max, sum / count as f64))
    }
}

/// For every scan offset: steer the reference, re-match the cluster phases and record the SLL
/// with the mask mainlobe moved onto the scanned beam.
pub fn scan_sll_map(
    clustering: Option<&Clustering>,
    amplitudes: &WeightSet,
    element: &ElementPattern,
    mask: &Mask,
    spec: &ScanSpec,
    resolution: usize,
    mode: PhaseMean,
) -> Result<ScanMap> {
    spec.validate()?;
    let grid = *amplitudes.grid();
    if let Some(c) = clustering {
        if c.grid().len() != grid.len() {
            return Err(Error::param("clustering and excitations disagree on the grid size"));
        }
    }
    let thetas = spec.thetas();
    let phis = spec.phis();
    let samples: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| phis.iter().map(move |&p| (t, p))).collect();
    let sll_db = samples
        .par_iter()
        .map(|&(t, p)| {
            let (us, vs) = spec.direction(t, p);
            let steered = amplitudes.with_phases(steering_phases(&grid, us, vs)?)?;
            let weights = match clustering {
                Some(c) => cluster_excitations(&steered, c, mode)?.expand(c),
                None => steered.complex(),
            };
            let pattern = Aperture::new(grid, weights, element)?.sample(resolution)?;
            Ok(sidelobe_level(&pattern, &mask.recentered(us, vs)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ScanMap {
        theta_deg: thetas,
        phi_deg: phis,
        sll_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GridSpec, TileFamily};
    use crate::pattern::mask::db_to_linear;

    fn setup() -> (Clustering, WeightSet, Mask) {
        let grid = GridSpec::half_wave(4, 6).unwrap();
        let labels = [1, 2, 2, 3, 4, 4, 1, 1, 2, 3, 3, 4, 5, 6, 6, 7, 8, 8, 5, 5, 6, 7, 7, 8];
        let c = Clustering::from_labels(grid, TileFamily::LTromino, &labels).unwrap();
        let w = WeightSet::raised_cosine(grid, 0.3, 1.0).unwrap();
        let mask = Mask::new((0.0, 0.0), 0.7, 1.0, Vec::new(), db_to_linear(-15.0)).unwrap();
        (c, w, mask)
    }

    #[test]
    fn map_shape_and_origin_consistency() {
        let (c, w, mask) = setup();
        let spec = ScanSpec {
            theta_max_deg: 10.0,
            theta_steps: 3,
            phi_steps: 4,
            theta0_deg: 0.0,
            phi0_deg: 0.0,
        };
        let map = scan_sll_map(Some(&c), &w, &ElementPattern::Isotropic, &mask, &spec, 64, PhaseMean::Arithmetic).unwrap();
        assert_eq!(map.theta_deg.len(), 3);
        assert_eq!(map.phi_deg.len(), 4);
        assert_eq!(map.sll_db.len(), 12);

        let cw = cluster_excitations(&w, &c, PhaseMean::Arithmetic).unwrap();
        let el = ElementPattern::Isotropic;
        let p = Aperture::clustered(&c, &cw, &el).sample(64).unwrap();
        assert_eq!(map.get(0, 0), sidelobe_level(&p, &mask));
        let (max, avg) = map.summary(5.0).unwrap();
        assert!(max >= avg);
    }

    #[test]
    fn full_population_matches_ideal_array() {
        let (_, w, mask) = setup();
        let grid = *w.grid();
        let spec = ScanSpec {
            theta_max_deg: 8.0,
            theta_steps: 2,
            phi_steps: 3,
            theta0_deg: 0.0,
            phi0_deg: 0.0,
        };
        let el = ElementPattern::Isotropic;
        let map = scan_sll_map(None, &w, &el, &mask, &spec, 64, PhaseMean::Arithmetic).unwrap();
        let (us, vs) = spec.direction(8.0, 120.0);
        let steered = w.with_phases(steering_phases(&grid, us, vs).unwrap()).unwrap();
        let p = Aperture::new(grid, steered.complex(), &el).unwrap().sample(64).unwrap();
        assert_eq!(map.get(1, 1), sidelobe_level(&p, &mask.recentered(us, vs)));
    }
}
