//! Array factor and power-pattern evaluation in direction-cosine space.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::element::ElementPattern;
use super::weights::ClusterWeights;
use crate::error::{Error, Result};
use crate::geometry::{Clustering, GridSpec, TilePlacement};

/// Smallest accepted sampling resolution per axis.
pub const MIN_RESOLUTION: usize = 64;

fn phasor(x: f64, y: f64, u: f64, v: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (x * u + y * v))
}

/// Centroid of the member element positions, used as the tile phase center.
pub fn phase_center(tile: &TilePlacement, grid: &GridSpec) -> (f64, f64) {
    let cells = tile.cells();
    let n = cells.len() as f64;
    let (sx, sy) = cells.iter().fold((0.0, 0.0), |(sx, sy), &c| {
        let (x, y) = grid.position(c);
        (sx + x, sy + y)
    });
    (sx / n, sy / n)
}

/// Space factor of one tile, with member offsets taken from its phase center.
pub fn space_factor(tile: &TilePlacement, grid: &GridSpec, u: f64, v: f64) -> Complex64 {
    let (xq, yq) = phase_center(tile, grid);
    tile.cells()
        .into_iter()
        .map(|c| {
            let (x, y) = grid.position(c);
            phasor(x - xq, y - yq, u, v)
        })
        .sum()
}

/// Tile-level array factor `sum_q w_q S_q(u, v) exp(jk(x_q u + y_q v))`.
pub fn array_factor(clustering: &Clustering, weights: &ClusterWeights, u: f64, v: f64) -> Complex64 {
    let grid = clustering.grid();
    clustering
        .tiles()
        .iter()
        .enumerate()
        .map(|(q, tile)| {
            let (xq, yq) = phase_center(tile, grid);
            weights.weight(q) * space_factor(tile, grid, u, v) * phasor(xq, yq, u, v)
        })
        .sum()
}

/// Element-level array factor `sum_mn w_mn exp(jk(x_mn u + y_mn v))`.
pub fn element_array_factor(grid: &GridSpec, weights: &[Complex64], u: f64, v: f64) -> Complex64 {
    weights
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let (x, y) = grid.position(grid.cell(i));
            w * phasor(x, y, u, v)
        })
        .sum()
}

/// A fully specified radiating aperture: element weights on a grid plus the element pattern.
#[derive(Debug, Clone)]
pub struct Aperture<'a> {
    grid: GridSpec,
    weights: Vec<Complex64>,
    element: &'a ElementPattern,
}

impl<'a> Aperture<'a> {
    pub fn new(grid: GridSpec, weights: Vec<Complex64>, element: &'a ElementPattern) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::param(format!("expected {} element weights, got {}", grid.len(), weights.len())));
        }
        Ok(Aperture { grid, weights, element })
    }

    /// Aperture fed through a clustered network.
    pub fn clustered(clustering: &Clustering, weights: &ClusterWeights, element: &'a ElementPattern) -> Self {
        Aperture {
            grid: *clustering.grid(),
            weights: weights.expand(clustering),
            element,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn element(&self) -> &ElementPattern {
        self.element
    }

    /// Array factor by nested Horner evaluation over rows and columns.
    pub fn af(&self, u: f64, v: f64) -> Complex64 {
        let zu = Complex64::from_polar(1.0, 2.0 * PI * self.grid.dx * u);
        let zv = Complex64::from_polar(1.0, 2.0 * PI * self.grid.dy * v);
        let cols = self.grid.cols;
        let mut acc = Complex64::new(0.0, 0.0);
        for row in self.weights.chunks(cols).rev() {
            let inner = row.iter().rev().fold(Complex64::new(0.0, 0.0), |a, w| a * zu + w);
            acc = acc * zv + inner;
        }
        acc
    }

    /// Unnormalized `|e(u, v) A(u, v)|^2`.
    pub fn power(&self, u: f64, v: f64) -> f64 {
        if self.element.is_isotropic() {
            self.af(u, v).norm_sqr()
        } else {
            (self.element.eval(u, v) * self.af(u, v)).norm_sqr()
        }
    }

    /// Sample the power pattern on a uniform `resolution x resolution` grid over `[-1, 1]^2`.
    pub fn sample(&self, resolution: usize) -> Result<PatternGrid> {
        check_resolution(resolution)?;
        let (rows, cols) = (self.grid.rows, self.grid.cols);
        let axis: Vec<f64> = (0..resolution).map(|i| axis_value(i, resolution)).collect();
        let steering = |d: f64, count: usize| -> Vec<Vec<Complex64>> {
            (0..count)
                .map(|k| axis.iter().map(|&t| Complex64::from_polar(1.0, 2.0 * PI * d * k as f64 * t)).collect())
                .collect()
        };
        let ex = steering(self.grid.dx, cols);
        let ey = steering(self.grid.dy, rows);

        // b[m][i] = sum_n w_mn ex[n][i]
        let b: Vec<Vec<Complex64>> = self
            .weights
            .par_chunks(cols)
            .map(|row| {
                let mut out = vec![Complex64::new(0.0, 0.0); resolution];
                for (w, e) in row.iter().zip(&ex) {
                    if *w == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (o, z) in out.iter_mut().zip(e) {
                        *o += w * z;
                    }
                }
                out
            })
            .collect();

        let mut raw = vec![0.0; resolution * resolution];
        raw.par_chunks_mut(resolution).enumerate().for_each(|(j, out)| {
            let v = axis[j];
            let mut acc = vec![Complex64::new(0.0, 0.0); resolution];
            for (bm, eym) in b.iter().zip(&ey) {
                let z = eym[j];
                for (a, bb) in acc.iter_mut().zip(bm) {
                    *a += z * bb;
                }
            }
            for (i, (o, a)) in out.iter_mut().zip(&acc).enumerate() {
                let u = axis[i];
                *o = if self.element.is_isotropic() {
                    a.norm_sqr()
                } else {
                    (self.element.eval(u, v) * a).norm_sqr()
                };
            }
        });
        PatternGrid::from_raw(resolution, raw)
    }
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::param(format!("pattern resolution must be at least {MIN_RESOLUTION}, got {resolution}")));
    }
    Ok(())
}

fn axis_value(i: usize, resolution: usize) -> f64 {
    -1.0 + 2.0 * i as f64 / (resolution - 1) as f64
}

/// Power pattern sampled on a square `(u, v)` grid and normalized to a visible peak of 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternGrid {
    resolution: usize,
    /// `values[j * resolution + i]` at `(u_i, v_j)`.
    values: Vec<f64>,
    raw_peak: f64,
}

impl PatternGrid {
    /// Normalize raw power samples by their largest visible value.
    pub fn from_raw(resolution: usize, mut values: Vec<f64>) -> Result<Self> {
        check_resolution(resolution)?;
        if values.len() != resolution * resolution {
            return Err(Error::param("pattern sample count does not match the resolution"));
        }
        let mut peak = 0.0f64;
        for j in 0..resolution {
            for i in 0..resolution {
                if is_visible(axis_value(i, resolution), axis_value(j, resolution)) {
                    peak = peak.max(values[j * resolution + i]);
                }
            }
        }
        if !peak.is_finite() || peak <= 0.0 {
            return Err(Error::ZeroPattern);
        }
        values.iter_mut().for_each(|p| *p /= peak);
        Ok(PatternGrid {
            resolution,
            values,
            raw_peak: peak,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Sample spacing along either axis.
    pub fn step(&self) -> f64 {
        2.0 / (self.resolution - 1) as f64
    }

    pub fn axis(&self, i: usize) -> f64 {
        axis_value(i, self.resolution)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.resolution + i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Unnormalized peak power, before scaling to 1.
    pub fn raw_peak(&self) -> f64 {
        self.raw_peak
    }

    pub fn is_visible(&self, i: usize, j: usize) -> bool {
        is_visible(self.axis(i), self.axis(j))
    }

    /// `(u, v, P)` over the visible samples, row by row.
    pub fn visible(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.resolution).flat_map(move |j| {
            (0..self.resolution).filter_map(move |i| {
                let (u, v) = (self.axis(i), self.axis(j));
                is_visible(u, v).then(|| (u, v, self.value(i, j)))
            })
        })
    }

    /// Grid indices `(i, j)` of the largest visible sample (first in row-major order).
    pub fn peak_index(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_p = f64::NEG_INFINITY;
        for j in 0..self.resolution {
            for i in 0..self.resolution {
                if self.is_visible(i, j) && self.value(i, j) > best_p {
                    best_p = self.value(i, j);
                    best = (i, j);
                }
            }
        }
        best
    }

    pub fn peak_uv(&self) -> (f64, f64) {
        let (i, j) = self.peak_index();
        (self.axis(i), self.axis(j))
    }

    /// Visible samples along `v = v_j`, as `(u, P)`.
    pub fn cut_u(&self, j: usize) -> Vec<(f64, f64)> {
        (0..self.resolution)
            .filter(|&i| self.is_visible(i, j))
            .map(|i| (self.axis(i), self.value(i, j)))
            .collect()
    }

    /// Visible samples along `u = u_i`, as `(v, P)`.
    pub fn cut_v(&self, i: usize) -> Vec<(f64, f64)> {
        (0..self.resolution)
            .filter(|&j| self.is_visible(i, j))
            .map(|j| (self.axis(j), self.value(i, j)))
            .collect()
    }
}

fn is_visible(u: f64, v: f64) -> bool {
    u * u + v * v <= 1.0
}

/// `|e A|^2` of a clustered aperture, sampled and normalized.
pub fn power_pattern(
    clustering: &Clustering,
    weights: &ClusterWeights,
    element: &ElementPattern,
    resolution: usize,
) -> Result<PatternGrid> {
    Aperture::clustered(clustering, weights, element).sample(resolution)
}
