use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use super::grid::{Grid, GridSpec};
use super::problem::Field;
use super::solve::Solution;
use crate::error::{domain, Result};

/// Evaluator of a fundamental-domain field on the whole square `[-R, R]^2`
/// (triangle kind) or disk of radius `R` (sector kind).
#[derive(Clone, Debug)]
pub struct Extension {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

/// Builds the full-plane evaluator of a converged solution.
pub fn extend_full(solution: &Solution) -> Result<Extension> {
    if !solution.converged {
        return domain("solution did not converge");
    }
    Ok(Extension::new(&solution.field))
}

impl Extension {
    /// Extension of any field; no convergence requirement.
    pub fn new(field: &Field) -> Self {
        Self {
            grid: field.grid.clone(),
            values: field.values.clone(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn radius(&self) -> f64 {
        self.grid.radius()
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        if !(x.is_finite() && y.is_finite()) {
            return domain(format!("query ({x}, {y}) is not finite"));
        }
        match self.grid.spec {
            GridSpec::QuadrantTriangle { .. } => self.eval_cartesian(x, y),
            GridSpec::PolarSector { .. } => {
                self.eval_polar(x.hypot(y), y.atan2(x))
            }
        }
    }

    fn eval_cartesian(&self, x: f64, y: f64) -> Result<f64> {
        let r = self.radius();
        let slack = 1e-12 * r;
        if x.abs() > r + slack || y.abs() > r + slack {
            return domain(format!("({x}, {y}) outside [-{r}, {r}]^2"));
        }
        if x == 0.0 || y == 0.0 {
            return Ok(0.0);
        }
        let sign = x.signum() * y.signum();
        let (a, b) = (x.abs().max(y.abs()), x.abs().min(y.abs()));
        let h = self.grid.h();
        let (n, _) = self.grid.dims();
        let (i, s) = locate(a / h, n);
        let (k, t) = locate(b / h, n);
        Ok(sign * self.bilinear(i, k, s, t))
    }

    /// Value at polar coordinates `(rho, theta)` with any real `theta`.
    pub fn eval_polar(&self, rho: f64, theta: f64) -> Result<f64> {
        let j = match self.grid.j() {
            Some(j) => j,
            None => return domain("polar evaluation of a Cartesian field"),
        };
        let r = self.radius();
        if !(rho >= 0.0 && rho <= r * (1.0 + 1e-12)) || !theta.is_finite() {
            return domain(format!("(rho, theta) = ({rho}, {theta}) outside the disk of radius {r}"));
        }
        if rho == 0.0 {
            return Ok(0.0);
        }
        // angle from the nodal ray theta = pi/2, rotated into [-w, 0)
        let w = PI / j as f64;
        let phi = theta - FRAC_PI_2;
        let m = (phi / w).floor() + 1.0;
        let mut p = phi - m * w;
        if p >= 0.0 {
            p -= w;
        }
        let sign = if (m as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        if p == -w {
            return Ok(0.0);
        }
        if p < -0.5 * w {
            p = -w - p;
        }
        let dth = self.grid.dtheta().expect("polar grid");
        let t0 = self.grid.theta_min().expect("polar grid");
        let (n_rho, n_theta) = self.grid.dims();
        let (i, s) = locate(rho / self.grid.h(), n_rho);
        let (k, t) = locate((FRAC_PI_2 + p - t0) / dth, n_theta);
        Ok(sign * self.bilinear(i, k, s, t))
    }

    fn bilinear(&self, i: usize, k: usize, s: f64, t: f64) -> f64 {
        let g = &self.grid;
        let u = |a: usize, b: usize| self.values[g.owner(a, b)];
        (1.0 - s) * (1.0 - t) * u(i, k)
            + s * (1.0 - t) * u(i + 1, k)
            + (1.0 - s) * t * u(i, k + 1)
            + s * t * u(i + 1, k + 1)
    }
}

/// Cell index and local coordinate of lattice coordinate `x` on `n` nodes.
fn locate(x: f64, n: usize) -> (usize, f64) {
    let x = x.clamp(0.0, (n - 1) as f64);
    let i = (x.floor() as usize).min(n - 2);
    (i, x - i as f64)
}
