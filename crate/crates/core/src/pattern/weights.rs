//! Reference excitations, excitation matching and beam steering.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Clustering, GridSpec};

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_phase(phase: f64) -> f64 {
    if phase > -PI && phase <= PI {
        return phase;
    }
    let y = phase.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Per-element reference excitations `w_ref = a * exp(j*phase)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    grid: GridSpec,
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
}

impl WeightSet {
    pub fn new(grid: GridSpec, amplitudes: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != grid.len() || phases.len() != grid.len() {
            return Err(Error::param(format!(
                "expected {} excitations, got {} amplitudes and {} phases",
                grid.len(),
                amplitudes.len(),
                phases.len()
            )));
        }
        if let Some(bad) = amplitudes.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::param(format!("amplitudes must be finite and non-negative, got {bad}")));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::param("phases must be finite"));
        }
        Ok(WeightSet {
            grid,
            amplitudes,
            phases: phases.into_iter().map(wrap_phase).collect(),
        })
    }

    pub fn uniform(grid: GridSpec) -> Self {
        WeightSet {
            grid,
            amplitudes: vec![1.0; grid.len()],
            phases: vec![0.0; grid.len()],
        }
    }

    /// Separable raised-cosine-power taper `p + (1-p) cos^e(pi t)` along both axes, with `t`
    /// the element offset from the array center divided by the array length.
    pub fn raised_cosine(grid: GridSpec, pedestal: f64, exponent: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pedestal) || exponent.is_nan() || exponent < 0.0 {
            return Err(Error::param(format!(
                "raised-cosine taper needs pedestal in [0, 1] and exponent >= 0, got {pedestal}, {exponent}"
            )));
        }
        let profile = |k: usize, len: usize| {
            let t = (k as f64 - (len as f64 - 1.0) / 2.0) / len as f64;
            pedestal + (1.0 - pedestal) * (PI * t).cos().powf(exponent)
        };
        let amplitudes = (0..grid.len())
            .map(|i| {
                let (m, n) = grid.cell(i);
                profile(m, grid.rows) * profile(n, grid.cols)
            })
            .collect();
        Ok(WeightSet {
            grid,
            amplitudes,
            phases: vec![0.0; grid.len()],
        })
    }

    /// Same amplitudes with new phases.
    pub fn with_phases(&self, phases: Vec<f64>) -> Result<Self> {
        Self::new(self.grid, self.amplitudes.clone(), phases)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Phases in radians, in `(-pi, pi]`.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn weight(&self, i: usize) -> Complex64 {
        Complex64::from_polar(self.amplitudes[i], self.phases[i])
    }

    pub fn complex(&self) -> Vec<Complex64> {
        (0..self.grid.len()).map(|i| self.weight(i)).collect()
    }
}

/// How member phases are averaged into a cluster phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMean {
    /// Arithmetic mean of the stored phases.
    #[default]
    Arithmetic,
    /// Argument of the mean unit phasor; immune to the branch cut at +-pi.
    Circular,
}

/// Per-cluster excitations `w_q = alpha_q * exp(j*beta_q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterWeights {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ClusterWeights {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn weight(&self, q: usize) -> Complex64 {
        Complex64::from_polar(self.alpha[q], self.beta[q])
    }

    pub fn complex(&self) -> Vec<Complex64> {
        (0..self.len()).map(|q| self.weight(q)).collect()
    }

    /// Effective per-element weights `w_{c_mn}`.
    pub fn expand(&self, clustering: &Clustering) -> Vec<Complex64> {
        let w = self.complex();
        clustering.labels().iter().map(|&q| w[q as usize - 1]).collect()
    }
}

/// Excitation matching: each cluster takes the mean amplitude and the mean phase of its
/// members.
pub fn cluster_excitations(reference: &WeightSet, clustering: &Clustering, mode: PhaseMean) -> Result<ClusterWeights> {
    if reference.grid.len() != clustering.grid().len() {
        return Err(Error::param("reference excitations and clustering disagree on the grid size"));
    }
    let mut alpha = Vec::with_capacity(clustering.len());
    let mut beta = Vec::with_capacity(clustering.len());
    for members in clustering.members() {
        if members.is_empty() {
            return Err(Error::InvalidClustering("empty cluster".into()));
        }
        let count = members.len() as f64;
        alpha.push(members.iter().map(|&i| reference.amplitudes[i]).sum::<f64>() / count);
        beta.push(match mode {
            PhaseMean::Arithmetic => members.iter().map(|&i| reference.phases[i]).sum::<f64>() / count,
            PhaseMean::Circular => {
                let s: Complex64 = members.iter().map(|&i| Complex64::from_polar(1.0, reference.phases[i])).sum();
                if s.norm() == 0.0 {
                    0.0
                } else {
                    s.arg()
                }
            }
        });
    }
    Ok(ClusterWeights { alpha, beta })
}

/// Excitation-matching residual `sum_mn |w_ref_mn - w_{c_mn}|^2`.
pub fn matching_residual(reference: &WeightSet, clustering: &Clustering, weights: &ClusterWeights) -> f64 {
    let effective = weights.expand(clustering);
    effective
        .iter()
        .enumerate()
        .map(|(i, w)| (reference.weight(i) - w).norm_sqr())
        .sum()
}

fn check_direction(u: f64, v: f64) -> Result<()> {
    if !(u.is_finite() && v.is_finite()) || u * u + v * v > 1.0 {
        return Err(Error::param(format!("steering direction ({u}, {v}) lies outside the unit disc")));
    }
    Ok(())
}

/// `-k (x u_s + y v_s)` for every element, not wrapped.
pub fn steering_phases_unwrapped(grid: &GridSpec, u_s: f64, v_s: f64) -> Result<Vec<f64>> {
    check_direction(u_s, v_s)?;
    Ok((0..grid.len())
        .map(|i| {
            let (x, y) = grid.position(grid.cell(i));
            -2.0 * PI * (x * u_s + y * v_s)
        })
        .collect())
}

/// Steering phases wrapped into `(-pi, pi]`.
pub fn steering_phases(grid: &GridSpec, u_s: f64, v_s: f64) -> Result<Vec<f64>> {
    Ok(steering_phases_unwrapped(grid, u_s, v_s)?.into_iter().map(wrap_phase).collect())
}

/// Direction cosines of `(theta, phi)` given in degrees.
pub fn direction_cosines(theta_deg: f64, phi_deg: f64) -> (f64, f64) {
    let (t, p) = (theta_deg.to_radians(), phi_deg.to_radians());
    (t.sin() * p.cos(), t.sin() * p.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{TileFamily, TilePlacement};

    fn grid(m: usize, n: usize) -> GridSpec {
        GridSpec::half_wave(m, n).unwrap()
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_phase(0.25)).eq(&0.25));
    }

    #[test]
    fn mean_of_one_tromino() {
        let g3 = grid(2, 3);
        let c = Clustering::new(g3, vec![TilePlacement::tromino(0, (0, 0)), TilePlacement::tromino(2, (0, 1))]).unwrap();
        // tile 1 = {(0,0),(1,0),(1,1)} -> indices 0, 3, 4
        let mut amps = vec![0.0; 6];
        amps[0] = 1.0;
        amps[3] = 1.0;
        amps[4] = 4.0;
        let r = WeightSet::new(g3, amps, vec![0.0; 6]).unwrap();
        let cw = cluster_excitations(&r, &c, PhaseMean::Arithmetic).unwrap();
        assert_eq!(cw.alpha[0], 2.0);
        assert_eq!(cw.beta[0], 0.0);
    }

    #[test]
    fn uniform_reference_gives_unit_clusters() {
        let g = grid(4, 6);
        let inst = crate::exact_cover::build_cover_instance(&g, TileFamily::LTromino, &[1]).unwrap();
        let (sols, _) = crate::exact_cover::collect_exact_covers(&inst, &Default::default()).unwrap();
        let c = inst.clustering(&sols[3]).unwrap();
        let cw = cluster_excitations(&WeightSet::uniform(g), &c, PhaseMean::Arithmetic).unwrap();
        assert!(cw.alpha.iter().all(|&a| a == 1.0));
        assert!(cw.beta.iter().all(|&b| b == 0.0));
        assert_eq!(matching_residual(&WeightSet::uniform(g), &c, &cw), 0.0);
    }

    #[test]
    fn single_tile_takes_global_mean() {
        let g = grid(2, 2);
        let c = Clustering::new(g, vec![TilePlacement::new(TileFamily::Square, 1, 0, (0, 0)).unwrap()]).unwrap();
        let r = WeightSet::new(g, vec![1.0, 2.0, 3.0, 6.0], vec![0.0; 4]).unwrap();
        let cw = cluster_excitations(&r, &c, PhaseMean::Arithmetic).unwrap();
        assert_eq!(cw.alpha, vec![3.0]);
    }

    #[test]
    fn arithmetic_and_circular_phase_means() {
        let g = grid(2, 2);
        let c = Clustering::new(g, vec![TilePlacement::new(TileFamily::Square, 1, 0, (0, 0)).unwrap()]).unwrap();
        // phases straddling the branch cut
        let r = WeightSet::new(g, vec![1.0; 4], vec![PI - 0.1, PI - 0.1, -PI + 0.1, -PI + 0.1]).unwrap();
        let arith = cluster_excitations(&r, &c, PhaseMean::Arithmetic).unwrap();
        let circ = cluster_excitations(&r, &c, PhaseMean::Circular).unwrap();
        assert!(arith.beta[0].abs() < 1e-12);
        assert!((circ.beta[0].abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn steering_basics() {
        let g = grid(3, 4);
        assert!(steering_phases(&g, 0.0, 0.0).unwrap().iter().all(|&p| p == 0.0));
        let a = steering_phases_unwrapped(&g, 0.2, -0.1).unwrap();
        let b = steering_phases_unwrapped(&g, 0.4, -0.2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((2.0 * x - y).abs() < 1e-12);
        }
        assert!(steering_phases(&g, 0.9, 0.9).is_err());
        assert!(steering_phases(&g, 0.5, 0.5).unwrap().iter().all(|p| *p > -PI && *p <= PI));
    }

    #[test]
    fn rejects_negative_amplitude() {
        assert!(WeightSet::new(grid(1, 2), vec![1.0, -1.0], vec![0.0; 2]).is_err());
        assert!(WeightSet::new(grid(1, 2), vec![1.0], vec![0.0; 2]).is_err());
    }

    #[test]
    fn raised_cosine_is_symmetric_and_peaks_in_center() {
        let w = WeightSet::raised_cosine(grid(8, 12), 0.2, 2.0).unwrap();
        let a = w.amplitudes();
        let g = w.grid();
        for m in 0..8 {
            for n in 0..12 {
                let i = g.index((m, n));
                let j = g.index((7 - m, 11 - n));
                assert!((a[i] - a[j]).abs() < 1e-12);
            }
        }
        let max = a.iter().cloned().fold(0.0, f64::max);
        assert!(a[g.index((3, 5))] == max || a[g.index((4, 6))] == max);
        assert!(a.iter().all(|&x| x > 0.0 && x <= 1.0));
    }
}
