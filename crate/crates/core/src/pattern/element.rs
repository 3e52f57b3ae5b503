//! Embedded element patterns.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Element pattern `e(u, v)`, identical for every element.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ElementPattern {
    #[default]
    Isotropic,
    Tabulated(ElementTable),
}

/// Complex samples on a regular `(theta, phi)` grid, bilinearly interpolated.
///
/// `theta` spans `[0, 90]` degrees; `phi` spans `[0, 360)` and wraps around.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementTable {
    theta_deg: Vec<f64>,
    phi_deg: Vec<f64>,
    /// `values[it * phi.len() + ip]`
    values: Vec<Complex64>,
}

impl ElementTable {
    pub fn new(theta_deg: Vec<f64>, phi_deg: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if theta_deg.len() < 2 || phi_deg.is_empty() || !increasing(&theta_deg) || !increasing(&phi_deg) {
            return Err(Error::param("element table axes must be strictly increasing (>= 2 theta samples)"));
        }
        if theta_deg[0] > 0.0 || *theta_deg.last().unwrap() < 90.0 {
            return Err(Error::param("element table must cover theta from 0 to 90 degrees"));
        }
        if phi_deg[0] < 0.0 || *phi_deg.last().unwrap() >= 360.0 || phi_deg[0] > 0.0 {
            return Err(Error::param("element table phi samples must start at 0 and stay below 360 degrees"));
        }
        if values.len() != theta_deg.len() * phi_deg.len() {
            return Err(Error::param(format!(
                "element table needs {} samples, got {}",
                theta_deg.len() * phi_deg.len(),
                values.len()
            )));
        }
        Ok(ElementTable {
            theta_deg,
            phi_deg,
            values,
        })
    }

    /// Constant-valued table on a coarse grid.
    pub fn constant(value: Complex64) -> Self {
        let theta_deg = vec![0.0, 45.0, 90.0];
        let phi_deg: Vec<f64> = (0..8).map(|k| k as f64 * 45.0).collect();
        let values = vec![value; theta_deg.len() * phi_deg.len()];
        ElementTable {
            theta_deg,
            phi_deg,
            values,
        }
    }

    pub fn theta_deg(&self) -> &[f64] {
        &self.theta_deg
    }

    pub fn phi_deg(&self) -> &[f64] {
        &self.phi_deg
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn sample(&self, theta: f64, phi: f64) -> Complex64 {
        let nt = self.theta_deg.len();
        let np = self.phi_deg.len();
        let theta = theta.clamp(self.theta_deg[0], self.theta_deg[nt - 1]);
        let it = match self.theta_deg.partition_point(|&t| t <= theta) {
            0 => 0,
            k if k >= nt => nt - 2,
            k => k - 1,
        };
        let ft = (theta - self.theta_deg[it]) / (self.theta_deg[it + 1] - self.theta_deg[it]);

        let phi = phi.rem_euclid(360.0);
        let ip = self.phi_deg.partition_point(|&p| p <= phi).saturating_sub(1);
        let ip1 = (ip + 1) % np;
        let p0 = self.phi_deg[ip];
        let p1 = if ip1 == 0 { self.phi_deg[0] + 360.0 } else { self.phi_deg[ip1] };
        let fp = if np == 1 { 0.0 } else { (phi - p0) / (p1 - p0) };

        let at = |i: usize, j: usize| self.values[i * np + j];
        let lo = at(it, ip) * (1.0 - fp) + at(it, ip1) * fp;
        let hi = at(it + 1, ip) * (1.0 - fp) + at(it + 1, ip1) * fp;
        lo * (1.0 - ft) + hi * ft
    }
}

impl ElementPattern {
    /// `e(u, v)` at a visible direction.
    pub fn eval(&self, u: f64, v: f64) -> Complex64 {
        match self {
            ElementPattern::Isotropic => Complex64::new(1.0, 0.0),
            ElementPattern::Tabulated(table) => {
                let r = (u * u + v * v).sqrt().min(1.0);
                let theta = r.asin().to_degrees();
                let phi = v.atan2(u).to_degrees();
                table.sample(theta, phi)
            }
        }
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self, ElementPattern::Isotropic)
    }
}
