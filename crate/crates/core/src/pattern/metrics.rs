//! Mask matching index and pattern quality metrics.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::field::{Aperture, PatternGrid};
use super::mask::{linear_to_db, Mask};

/// Sub-samples per cell side used to split boundary cells between mask levels.
const CELL_SPLIT: usize = 8;

/// Mask levels over the cells of a fixed sampling grid, for repeated Gamma evaluation.
///
/// Each sample stands for the square cell around it. A cell straddling the edge of the
/// visible disc or of a mask region is split into area fractions per mask level, so the
/// jump of the integrand across those edges costs second-order rather than first-order error.
#[derive(Debug, Clone)]
pub struct GammaGrid {
    resolution: usize,
    /// `(sample index, area fraction, mask level)`, sorted by sample index.
    parts: Vec<(usize, f64, f64)>,
    psi_sum: f64,
}

impl GammaGrid {
    pub fn new(resolution: usize, mask: &Mask) -> Self {
        let step = 2.0 / (resolution - 1) as f64;
        let axis = |k: usize| -1.0 + k as f64 * step;
        let sub = |k: usize| ((k as f64 + 0.5) / CELL_SPLIT as f64 - 0.5) * step;
        let rows: Vec<Vec<(usize, f64, f64)>> = (0..resolution)
            .into_par_iter()
            .map(|j| {
                let mut row = Vec::new();
                let mut levels: Vec<(f64, usize)> = Vec::new();
                for i in 0..resolution {
                    let (u0, v0) = (axis(i), axis(j));
                    if (u0.abs() - step).max(0.0).powi(2) + (v0.abs() - step).max(0.0).powi(2) > 1.0 {
                        continue;
                    }
                    levels.clear();
                    for a in 0..CELL_SPLIT {
                        for b in 0..CELL_SPLIT {
                            let (u, v) = (u0 + sub(a), v0 + sub(b));
                            if u * u + v * v > 1.0 {
                                continue;
                            }
                            let psi = mask.level(u, v);
                            match levels.iter_mut().find(|(l, _)| *l == psi) {
                                Some((_, n)) => *n += 1,
                                None => levels.push((psi, 1)),
                            }
                        }
                    }
                    let total = (CELL_SPLIT * CELL_SPLIT) as f64;
                    row.extend(levels.iter().map(|&(psi, n)| (j * resolution + i, n as f64 / total, psi)));
                }
                row
            })
            .collect();
        let parts: Vec<(usize, f64, f64)> = rows.into_iter().flatten().collect();
        let psi_sum = parts.iter().map(|&(_, w, psi)| w * psi).sum();
        GammaGrid {
            resolution,
            parts,
            psi_sum,
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Mask matching index: area-weighted sum of `(P - Psi) H{P - Psi}` over that of `Psi`.
    pub fn eval(&self, pattern: &PatternGrid) -> f64 {
        assert_eq!(pattern.resolution(), self.resolution, "pattern sampled on a different grid");
        let values = pattern.values();
        let excess: f64 = self
            .parts
            .iter()
            .map(|&(k, w, psi)| {
                let d = values[k] - psi;
                if d > 0.0 {
                    w * d
                } else {
                    0.0
                }
            })
            .sum();
        excess / self.psi_sum
    }

    /// Number of samples whose value exceeds the mask somewhere in their visible cell.
    pub fn violations(&self, pattern: &PatternGrid) -> usize {
        assert_eq!(pattern.resolution(), self.resolution, "pattern sampled on a different grid");
        let values = pattern.values();
        let mut count = 0;
        let mut last = usize::MAX;
        for &(k, _, psi) in &self.parts {
            if k != last && values[k] > psi {
                count += 1;
                last = k;
            }
        }
        count
    }
}

/// Mask matching index of a sampled pattern.
pub fn gamma(pattern: &PatternGrid, mask: &Mask) -> f64 {
    GammaGrid::new(pattern.resolution(), mask).eval(pattern)
}

/// Number of samples above the mask anywhere in their visible cell.
pub fn violations(pattern: &PatternGrid, mask: &Mask) -> usize {
    GammaGrid::new(pattern.resolution(), mask).violations(pattern)
}

/// Peak sidelobe level in dB: the largest visible sample outside the mask's mainlobe rectangle.
pub fn sidelobe_level(pattern: &PatternGrid, mask: &Mask) -> f64 {
    let peak = pattern
        .visible()
        .filter(|&(u, v, _)| !mask.in_mainlobe(u, v))
        .map(|(_, _, p)| p)
        .fold(0.0f64, f64::max);
    linear_to_db(peak)
}

/// Climb from `start` to a local maximum of the power pattern inside the visible disc.
pub fn refine_peak(aperture: &Aperture, start: (f64, f64), step: f64) -> (f64, f64, f64) {
    let (mut u, mut v) = start;
    let mut best = aperture.power(u, v);
    let mut h = step;
    while h > 1e-12 {
        let mut moved = false;
        for (du, dv) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let (cu, cv) = (u + du, v + dv);
            if cu * cu + cv * cv > 1.0 {
                continue;
            }
            let p = aperture.power(cu, cv);
            if p > best {
                (u, v, best) = (cu, cv, p);
                moved = true;
            }
        }
        if !moved {
            h /= 2.0;
        }
    }
    (u, v, best)
}

/// Quadrature sizes in `(theta, phi)` for an aperture spanning `extent` wavelengths.
fn quadrature_size(extent: f64) -> (usize, usize) {
    ((12.6 * extent).ceil().max(180.0) as usize, (50.0 * extent).ceil().max(360.0) as usize)
}

/// Directivity (linear) `4 pi P_peak / iint_Omega P du dv`, integrated with a midpoint
/// `(theta, phi)` rule where `du dv = sin(theta) cos(theta) dtheta dphi`.
///
/// This is the projected-aperture measure: a uniform half-wave lattice approaches
/// `pi M N`, while a lone isotropic element gives 4.
pub fn directivity(aperture: &Aperture, peak_power: f64) -> f64 {
    let grid = aperture.grid();
    let extent = (grid.rows as f64 * grid.dy).max(grid.cols as f64 * grid.dx);
    let (nt, np) = quadrature_size(extent);
    let dt = 0.5 * PI / nt as f64;
    let dp = 2.0 * PI / np as f64;
    let rows: Vec<f64> = (0..nt)
        .into_par_iter()
        .map(|it| {
            let theta = (it as f64 + 0.5) * dt;
            let (s, c) = theta.sin_cos();
            let w = s * c * dt * dp;
            (0..np)
                .map(|ip| {
                    let (ps, pc) = ((ip as f64 + 0.5) * dp).sin_cos();
                    w * aperture.power(s * pc, s * ps)
                })
                .sum::<f64>()
        })
        .collect();
    4.0 * PI * peak_power / rows.iter().sum::<f64>()
}

/// Width in degrees between the -3 dB points of `f` around `x0`, or `None` when a side never
/// drops below half power inside `[lo, hi]`.
fn half_power_width(f: impl Fn(f64) -> f64, x0: f64, lo: f64, hi: f64, step: f64) -> Option<f64> {
    let crossing = |dir: f64| -> Option<f64> {
        let mut inside = x0;
        loop {
            let next = inside + dir * step;
            if next < lo || next > hi {
                return None;
            }
            if f(next) < 0.5 {
                let mut outside = next;
                for _ in 0..80 {
                    let mid = 0.5 * (inside + outside);
                    if f(mid) < 0.5 {
                        outside = mid;
                    } else {
                        inside = mid;
                    }
                }
                return Some(0.5 * (inside + outside));
            }
            inside = next;
        }
    };
    let a = crossing(-1.0)?;
    let b = crossing(1.0)?;
    Some((b.asin() - a.asin()).abs().to_degrees())
}

/// Half-power beamwidths (degrees) of the cuts through the peak along `u` (azimuth) and `v`
/// (elevation).
pub fn half_power_beamwidths(aperture: &Aperture, peak: (f64, f64, f64)) -> (Option<f64>, Option<f64>) {
    let (up, vp, pp) = peak;
    let grid = aperture.grid();
    let su = 1.0 / (8.0 * grid.cols as f64 * grid.dx);
    let sv = 1.0 / (8.0 * grid.rows as f64 * grid.dy);
    let ulim = (1.0 - vp * vp).max(0.0).sqrt();
    let vlim = (1.0 - up * up).max(0.0).sqrt();
    let az = half_power_width(|u| aperture.power(u, vp) / pp, up, -ulim, ulim, su);
    let el = half_power_width(|v| aperture.power(up, v) / pp, vp, -vlim, vlim, sv);
    (az, el)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternMetrics {
    pub gamma: f64,
    pub sll_db: f64,
    pub directivity_db: f64,
    /// `None` when no -3 dB crossing exists along the cut.
    pub hpbw_az_deg: Option<f64>,
    pub hpbw_el_deg: Option<f64>,
    pub peak_u: f64,
    pub peak_v: f64,
}

/// Gamma and SLL from the sampled pattern; directivity and beamwidths from the aperture itself.
pub fn pattern_metrics(aperture: &Aperture, pattern: &PatternGrid, mask: &Mask) -> PatternMetrics {
    let peak = refine_peak(aperture, pattern.peak_uv(), pattern.step());
    let (hpbw_az_deg, hpbw_el_deg) = half_power_beamwidths(aperture, peak);
    PatternMetrics {
        gamma: gamma(pattern, mask),
        sll_db: sidelobe_level(pattern, mask),
        directivity_db: linear_to_db(directivity(aperture, peak.2)),
        hpbw_az_deg,
        hpbw_el_deg,
        peak_u: peak.0,
        peak_v: peak.1,
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::geometry::GridSpec;
    use crate::pattern::element::ElementPattern;
    use crate::pattern::mask::db_to_linear;

    fn uniform(rows: usize, cols: usize) -> (GridSpec, Vec<Complex64>) {
        let grid = GridSpec::half_wave(rows, cols).unwrap();
        (grid, vec![Complex64::new(1.0, 0.0); grid.len()])
    }

    #[test]
    fn gamma_zero_below_mask_and_one_at_double() {
        let (grid, w) = uniform(4, 4);
        let iso = ElementPattern::Isotropic;
        let p = Aperture::new(grid, w, &iso).unwrap().sample(81).unwrap();
        assert_eq!(gamma(&p, &Mask::flat(1.0).unwrap()), 0.0);

        // constant pattern against a half-level flat mask: excess equals the mask everywhere
        let single = GridSpec::half_wave(1, 1).unwrap();
        let q = Aperture::new(single, vec![Complex64::new(1.0, 0.0)], &iso)
            .unwrap()
            .sample(81)
            .unwrap();
        let mut half = Mask::flat(0.5).unwrap();
        half.bw_u = 1e-12;
        half.bw_v = 1e-12;
        half.center_u = 5.0;
        assert!((gamma(&q, &half) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_element_directivity() {
        let grid = GridSpec::half_wave(1, 1).unwrap();
        let ap = Aperture::new(grid, vec![Complex64::new(1.0, 0.0)], &ElementPattern::Isotropic).unwrap();
        assert!((directivity(&ap, 1.0) - 4.0).abs() < 1e-4);
    }

    #[test]
    fn uniform_directivity_near_aperture_limit() {
        let (grid, w) = uniform(8, 8);
        let ap = Aperture::new(grid, w, &ElementPattern::Isotropic).unwrap();
        let d = directivity(&ap, ap.power(0.0, 0.0));
        let ideal = PI * 64.0;
        assert!((d / ideal - 1.0).abs() < 0.01, "D = {d}, ideal {ideal}");
    }

    #[test]
    fn line_array_beamwidth() {
        let (grid, w) = uniform(1, 12);
        let ap = Aperture::new(grid, w, &ElementPattern::Isotropic).unwrap();
        let (az, el) = half_power_beamwidths(&ap, (0.0, 0.0, ap.power(0.0, 0.0)));
        let expected = (0.886 * 2.0 / 12.0f64).to_degrees();
        let az = az.unwrap();
        assert!((az / expected - 1.0).abs() < 0.03, "{az} vs {expected}");
        assert!(el.is_none());
    }

    #[test]
    fn sll_of_uniform_line() {
        // first sidelobe of a uniform 12-element line sits near -13.3 dB
        let (grid, w) = uniform(1, 12);
        let ap = Aperture::new(grid, w, &ElementPattern::Isotropic).unwrap();
        let p = ap.sample(601).unwrap();
        let mask = Mask::new((0.0, 0.0), 2.0 * 1.0 / 6.0, 2.5, Vec::new(), db_to_linear(-20.0)).unwrap();
        let sll = sidelobe_level(&p, &mask);
        assert!((sll + 13.3).abs() < 0.3, "{sll}");
        assert!(violations(&p, &mask) > 0);
        assert!(gamma(&p, &mask) > 0.0);
    }

    #[test]
    fn peak_refinement_finds_steered_beam() {
        let (grid, _) = uniform(8, 8);
        let phases = crate::pattern::weights::steering_phases(&grid, 0.3, -0.2).unwrap();
        let w: Vec<Complex64> = phases.iter().map(|&b| Complex64::from_polar(1.0, b)).collect();
        let ap = Aperture::new(grid, w, &ElementPattern::Isotropic).unwrap();
        let p = ap.sample(101).unwrap();
        let (u, v, _) = refine_peak(&ap, p.peak_uv(), p.step());
        assert!((u - 0.3).abs() < 1e-6 && (v + 0.2).abs() < 1e-6);
    }
}
