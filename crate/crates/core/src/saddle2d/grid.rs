use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Smallest accepted resolution along any grid direction.
pub const MIN_RESOLUTION: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryRole {
    Interior,
    /// Value pinned to zero by antisymmetry.
    NodalZero,
    /// Free node on a symmetry line of the fundamental domain.
    Mirror,
    /// Value prescribed by far-field data.
    FarDirichlet,
}

impl BoundaryRole {
    pub fn is_fixed(self) -> bool {
        matches!(self, Self::NodalZero | Self::FarDirichlet)
    }
}

/// Parameters that fully determine a [`Grid`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridSpec {
    /// `{0 <= y <= x <= R}` with `n` nodes per side.
    QuadrantTriangle { r: f64, n: usize },
    /// `{0 <= rho <= R, pi/2 - pi/(2j) <= theta <= pi/2}`.
    PolarSector {
        r: f64,
        n_rho: usize,
        n_theta: usize,
        j: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    /// First lattice index (`x` or `rho`).
    pub i: usize,
    /// Second lattice index (`y` or `theta`).
    pub k: usize,
    pub x: f64,
    pub y: f64,
    pub role: BoundaryRole,
}

#[derive(Clone, Debug)]
pub struct Grid {
    pub spec: GridSpec,
    pub nodes: Vec<Node>,
    /// Lattice `(i, k)` to node index; `usize::MAX` outside the domain.
    index: Vec<usize>,
    dims: (usize, usize),
}

impl Grid {
    pub fn quadrant_triangle(r: f64, n: usize) -> Result<Self> {
        build_grid(GridSpec::QuadrantTriangle { r, n })
    }

    pub fn polar_sector(r: f64, n_rho: usize, n_theta: usize, j: u32) -> Result<Self> {
        build_grid(GridSpec::PolarSector { r, n_rho, n_theta, j })
    }

    pub fn radius(&self) -> f64 {
        match self.spec {
            GridSpec::QuadrantTriangle { r, .. } | GridSpec::PolarSector { r, .. } => r,
        }
    }

    pub fn is_polar(&self) -> bool {
        matches!(self.spec, GridSpec::PolarSector { .. })
    }

    pub fn j(&self) -> Option<u32> {
        match self.spec {
            GridSpec::PolarSector { j, .. } => Some(j),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lattice extents `(n_i, n_k)`.
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// Spacing in the first lattice direction (`h` or `drho`).
    pub fn h(&self) -> f64 {
        match self.spec {
            GridSpec::QuadrantTriangle { r, n } => r / (n - 1) as f64,
            GridSpec::PolarSector { r, n_rho, .. } => r / (n_rho - 1) as f64,
        }
    }

    /// Angular spacing of the polar kind.
    pub fn dtheta(&self) -> Option<f64> {
        match self.spec {
            GridSpec::PolarSector { n_theta, j, .. } => {
                Some(FRAC_PI_2 / j as f64 / (n_theta - 1) as f64)
            }
            _ => None,
        }
    }

    /// Mirror ray `pi/2 - pi/(2j)` of the polar kind.
    pub fn theta_min(&self) -> Option<f64> {
        self.j().map(|j| FRAC_PI_2 - FRAC_PI_2 / j as f64)
    }

    pub fn index(&self, i: usize, k: usize) -> Option<usize> {
        if i >= self.dims.0 || k >= self.dims.1 {
            return None;
        }
        match self.index[k * self.dims.0 + i] {
            usize::MAX => None,
            v => Some(v),
        }
    }

    /// Node index of lattice point `(i, k)`, reflecting across the diagonal
    /// for the triangle kind.
    pub fn owner(&self, i: usize, k: usize) -> usize {
        match self.spec {
            GridSpec::QuadrantTriangle { .. } if k > i => self.index(k, i),
            _ => self.index(i, k),
        }
        .expect("lattice point inside the covered square")
    }

    pub fn count(&self, role: BoundaryRole) -> usize {
        self.nodes.iter().filter(|n| n.role == role).count()
    }

    /// Polar coordinates `(rho, theta)` of the polar lattice point `(i, k)`.
    pub fn polar_coords(&self, i: usize, k: usize) -> Option<(f64, f64)> {
        let dt = self.dtheta()?;
        Some((i as f64 * self.h(), self.theta_min()? + k as f64 * dt))
    }
}

/// Builds the node set, spacings and boundary roles of a fundamental domain.
///
/// Nodes are ordered row-major by increasing `y` then `x` (triangle) or by
/// increasing `theta` then `rho` (sector).
pub fn build_grid(spec: GridSpec) -> Result<Grid> {
    match spec {
        GridSpec::QuadrantTriangle { r, n } => {
            check_radius(r)?;
            if n < MIN_RESOLUTION {
                return domain(format!("resolution {n} below {MIN_RESOLUTION}"));
            }
            let last = n - 1;
            let h = r / last as f64;
            let mut nodes = Vec::with_capacity(n * (n + 1) / 2);
            let mut index = vec![usize::MAX; n * n];
            for k in 0..n {
                for i in k..n {
                    let role = if k == 0 {
                        BoundaryRole::NodalZero
                    } else if i == last {
                        BoundaryRole::FarDirichlet
                    } else if i == k {
                        BoundaryRole::Mirror
                    } else {
                        BoundaryRole::Interior
                    };
                    index[k * n + i] = nodes.len();
                    nodes.push(Node {
                        i,
                        k,
                        x: i as f64 * h,
                        y: k as f64 * h,
                        role,
                    });
                }
            }
            Ok(Grid {
                spec,
                nodes,
                index,
                dims: (n, n),
            })
        }
        GridSpec::PolarSector { r, n_rho, n_theta, j } => {
            check_radius(r)?;
            if j < 2 {
                return domain("j must be ≥ 2");
            }
            if n_rho < MIN_RESOLUTION || n_theta < MIN_RESOLUTION {
                return domain(format!(
                    "resolution ({n_rho}, {n_theta}) below {MIN_RESOLUTION}"
                ));
            }
            let drho = r / (n_rho - 1) as f64;
            let theta0 = FRAC_PI_2 - FRAC_PI_2 / j as f64;
            let dtheta = (FRAC_PI_2 - theta0) / (n_theta - 1) as f64;
            let mut nodes = Vec::with_capacity(n_rho * n_theta);
            let mut index = vec![usize::MAX; n_rho * n_theta];
            for k in 0..n_theta {
                let theta = if k + 1 == n_theta {
                    FRAC_PI_2
                } else {
                    theta0 + k as f64 * dtheta
                };
                for i in 0..n_rho {
                    let rho = i as f64 * drho;
                    let role = if i == 0 || k + 1 == n_theta {
                        BoundaryRole::NodalZero
                    } else if i + 1 == n_rho {
                        BoundaryRole::FarDirichlet
                    } else if k == 0 {
                        BoundaryRole::Mirror
                    } else {
                        BoundaryRole::Interior
                    };
                    index[k * n_rho + i] = nodes.len();
                    nodes.push(Node {
                        i,
                        k,
                        x: rho * theta.cos(),
                        y: rho * theta.sin(),
                        role,
                    });
                }
            }
            Ok(Grid {
                spec,
                nodes,
                index,
                dims: (n_rho, n_theta),
            })
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("R must be positive, got {r}"));
    }
    Ok(())
}
