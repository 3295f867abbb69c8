//! Assembled discrete energy on a fundamental domain.
//!
//! Every lattice cell contributes
//!
//! ```text
//! w * Phi_L(|grad_h u|) + sum_corners (w/4) A(corner) V(u_corner)
//! ```
//!
//! where `|grad_h u|^2` averages the squared edge differences of the cell (two
//! per direction), which keeps the stencil free of checkerboard modes. On the
//! triangle the cells straddling the diagonal read their upper corner from the
//! mirrored node and carry half weight; the sector needs no ghosts because its
//! cells never cross the mirror ray.

use std::sync::Arc;

use rayon::prelude::*;

use super::grid::{BoundaryRole, Grid, GridSpec};
use crate::error::{domain, Result};
use crate::model::{CoefficientField, Potential};
use crate::nfunc::NFunctionSpec;
use crate::numeric::pairwise_sum;
use crate::optim::Objective;

const PAR_MIN_LEN: usize = 2048;

/// One lattice cell with corners ordered `(00, 10, 01, 11)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Cell {
    pub nodes: [u32; 4],
    pub weight: f64,
    /// Coefficients of the squared differences on the edges `00-10` and `01-11`.
    pub cx: [f64; 2],
    /// Coefficients of the squared differences on the edges `00-01` and `10-11`.
    pub cy: [f64; 2],
    /// `(w/4) A(corner)`.
    pub mass: [f64; 4],
}

impl Cell {
    #[inline]
    fn grad_sq(&self, u: &[f64]) -> f64 {
        let [a, b, c, d] = self.corner_values(u);
        self.cx[0] * (b - a).powi(2)
            + self.cx[1] * (d - c).powi(2)
            + self.cy[0] * (c - a).powi(2)
            + self.cy[1] * (d - b).powi(2)
    }

    #[inline]
    fn corner_values(&self, u: &[f64]) -> [f64; 4] {
        [
            u[self.nodes[0] as usize],
            u[self.nodes[1] as usize],
            u[self.nodes[2] as usize],
            u[self.nodes[3] as usize],
        ]
    }
}

#[derive(Debug)]
pub(crate) struct Assembly {
    pub cells: Vec<Cell>,
    /// CSR map node -> `cell * 4 + corner`.
    offsets: Vec<usize>,
    refs: Vec<u32>,
    pub free: Vec<bool>,
    /// Lumped quadrature weight of each node.
    pub lumped: Vec<f64>,
    pub scale: Vec<f64>,
}

/// A discrete energy on a fundamental domain, ready to minimise.
#[derive(Debug)]
pub struct Problem {
    pub grid: Arc<Grid>,
    pub phi: NFunctionSpec,
    pub potential: Potential,
    pub coefficient: CoefficientField,
    /// Prescribed values on the far-Dirichlet nodes, in node order.
    pub far_data: Vec<f64>,
    pub(crate) asm: Assembly,
    far_nodes: Vec<usize>,
}

/// Node values on a fundamental domain.
#[derive(Clone, Debug)]
pub struct Field {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return domain(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, v: f64) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![v; n],
        }
    }
}

impl Problem {
    pub fn new(
        grid: Arc<Grid>,
        phi: NFunctionSpec,
        potential: Potential,
        coefficient: CoefficientField,
        far_data: Vec<f64>,
    ) -> Result<Self> {
        let far_nodes: Vec<usize> = grid
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.role == BoundaryRole::FarDirichlet)
            .map(|(i, _)| i)
            .collect();
        if far_data.len() != far_nodes.len() {
            return domain(format!(
                "{} far-field values for {} far-Dirichlet nodes",
                far_data.len(),
                far_nodes.len()
            ));
        }
        let alpha = potential.alpha;
        if let Some(v) = far_data.iter().find(|v| !(**v >= 0.0 && **v <= alpha)) {
            return domain(format!("far-field value {v} outside [0, {alpha}]"));
        }
        let asm = assemble(&grid, &coefficient, &potential)?;
        Ok(Self {
            grid,
            phi,
            potential,
            coefficient,
            far_data,
            asm,
            far_nodes,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.potential.alpha
    }

    pub fn level(&self) -> Option<f64> {
        self.phi.level()
    }

    /// Overwrites the far-Dirichlet entries of `values` with the problem data.
    pub fn impose_far_data(&self, values: &mut [f64]) {
        for (&i, &v) in self.far_nodes.iter().zip(&self.far_data) {
            values[i] = v;
        }
    }

    pub fn far_nodes(&self) -> &[usize] {
        &self.far_nodes
    }

    pub fn free_mask(&self) -> &[bool] {
        &self.asm.free
    }

    /// Lumped quadrature weight per node.
    pub fn node_weights(&self) -> &[f64] {
        &self.asm.lumped
    }

    fn prepared(&self, field: &Field) -> Result<Vec<f64>> {
        if field.values.len() != self.grid.len() {
            return domain("field does not conform to the problem grid");
        }
        if let Some(v) = field.values.iter().find(|v| !v.is_finite()) {
            return domain(format!("non-finite field value {v}"));
        }
        let mut u = field.values.clone();
        self.impose_far_data(&mut u);
        Ok(u)
    }

    /// Total discrete energy.
    pub fn energy(&self, field: &Field) -> Result<f64> {
        let u = self.prepared(field)?;
        Ok(Objective::energy(self, &u))
    }

    /// Exact gradient of [`Self::energy`] with respect to the free node values;
    /// zero at nodal-zero and far-Dirichlet nodes.
    pub fn energy_gradient(&self, field: &Field) -> Result<Field> {
        let u = self.prepared(field)?;
        let mut g = vec![0.0; u.len()];
        Objective::gradient(self, &u, &mut g);
        Field::new(self.grid.clone(), g)
    }

    /// `|grad_h u|` on every cell.
    pub fn cell_gradients(&self, field: &Field) -> Result<Vec<f64>> {
        let u = self.prepared(field)?;
        Ok(self
            .asm
            .cells
            .par_iter()
            .with_min_len(PAR_MIN_LEN)
            .map(|c| c.grad_sq(&u).sqrt())
            .collect())
    }

    /// Cell centres, in the same order as [`Self::cell_gradients`].
    pub fn cell_centres(&self) -> Vec<(f64, f64)> {
        self.asm
            .cells
            .iter()
            .map(|c| {
                let (mut x, mut y) = (0.0, 0.0);
                for &n in &c.nodes {
                    x += self.grid.nodes[n as usize].x;
                    y += self.grid.nodes[n as usize].y;
                }
                (x / 4.0, y / 4.0)
            })
            .collect()
    }
}

impl Objective for Problem {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn n_terms(&self) -> usize {
        self.asm.cells.len()
    }

    fn terms(&self, u: &[f64], out: &mut [f64]) {
        let phi = &self.phi;
        let pot = &self.potential;
        out.par_iter_mut()
            .with_min_len(PAR_MIN_LEN)
            .zip(self.asm.cells.par_iter())
            .for_each(|(o, c)| {
                let vals = c.corner_values(u);
                let mut e = c.weight * phi.big_phi_sq(c.grad_sq(u));
                for (m, v) in c.mass.iter().zip(vals) {
                    e += m * pot.value(v);
                }
                *o = e;
            });
    }

    fn term_diffs(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        let phi = &self.phi;
        let pot = &self.potential;
        out.par_iter_mut()
            .with_min_len(PAR_MIN_LEN)
            .zip(self.asm.cells.par_iter())
            .for_each(|(o, c)| {
                let a = c.corner_values(u);
                let b = c.corner_values(v);
                let dv = [b[0] - a[0], b[1] - a[1], b[2] - a[2], b[3] - a[3]];
                // (edge coefficient, old difference, new difference, change of difference)
                let edge = |k: f64, p: usize, q: usize| {
                    let (d0, d1) = (a[q] - a[p], b[q] - b[p]);
                    (k * d0 * d0, k * d1 * d1, k * (dv[q] - dv[p]) * (d1 + d0))
                };
                let edges = [
                    edge(c.cx[0], 0, 1),
                    edge(c.cx[1], 2, 3),
                    edge(c.cy[0], 0, 2),
                    edge(c.cy[1], 1, 3),
                ];
                let (mut s0, mut s1, mut ds) = (0.0, 0.0, 0.0);
                for (e0, e1, de) in edges {
                    s0 += e0;
                    s1 += e1;
                    ds += de;
                }
                let mut e = c.weight * phi.big_phi_sq_diff(s0, s1, ds);
                for q in 0..4 {
                    e += c.mass[q] * pot.value_diff(a[q], b[q], dv[q]);
                }
                *o = e;
            });
    }

    fn gradient(&self, u: &[f64], g: &mut [f64]) {
        let phi = &self.phi;
        let pot = &self.potential;
        let partials: Vec<[f64; 4]> = self
            .asm
            .cells
            .par_iter()
            .with_min_len(PAR_MIN_LEN)
            .map(|c| {
                let [a, b, cc, d] = c.corner_values(u);
                let f = c.weight * phi.phi_hat(c.grad_sq(u));
                let (db, dt, dl, dr) = (b - a, d - cc, cc - a, d - b);
                [
                    f * (-c.cx[0] * db - c.cy[0] * dl) + c.mass[0] * pot.d1(a),
                    f * (c.cx[0] * db - c.cy[1] * dr) + c.mass[1] * pot.d1(b),
                    f * (-c.cx[1] * dt + c.cy[0] * dl) + c.mass[2] * pot.d1(cc),
                    f * (c.cx[1] * dt + c.cy[1] * dr) + c.mass[3] * pot.d1(d),
                ]
            })
            .collect();
        let asm = &self.asm;
        g.par_iter_mut()
            .with_min_len(PAR_MIN_LEN)
            .enumerate()
            .for_each(|(node, gi)| {
                if !asm.free[node] {
                    *gi = 0.0;
                    return;
                }
                let mut s = 0.0;
                for &r in &asm.refs[asm.offsets[node]..asm.offsets[node + 1]] {
                    s += partials[(r >> 2) as usize][(r & 3) as usize];
                }
                *gi = s;
            });
    }

    fn free(&self) -> &[bool] {
        &self.asm.free
    }

    fn lower(&self) -> f64 {
        0.0
    }

    fn upper(&self) -> f64 {
        self.potential.alpha
    }

    fn scaling(&self) -> &[f64] {
        &self.asm.scale
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let mut t = vec![0.0; self.n_terms()];
        self.terms(x, &mut t);
        pairwise_sum(&t)
    }
}

fn assemble(grid: &Grid, coef: &CoefficientField, pot: &Potential) -> Result<Assembly> {
    let (ni, nk) = grid.dims();
    let mut cells = Vec::new();
    let coef_at = |x: f64, y: f64| -> Result<f64> {
        let a = coef.eval(x, y)?;
        if !(a > 0.0) {
            return domain(format!("coefficient A({x}, {y}) = {a} is not positive"));
        }
        Ok(a)
    };
    match grid.spec {
        GridSpec::QuadrantTriangle { .. } => {
            let h = grid.h();
            let c = 0.5 / (h * h);
            for k in 0..nk - 1 {
                for i in k..ni - 1 {
                    let corners = [(i, k), (i + 1, k), (i, k + 1), (i + 1, k + 1)];
                    let weight = if i == k { 0.5 * h * h } else { h * h };
                    let mut mass = [0.0; 4];
                    let mut nodes = [0u32; 4];
                    for (q, &(ci, ck)) in corners.iter().enumerate() {
                        nodes[q] = grid.owner(ci, ck) as u32;
                        mass[q] = 0.25 * weight * coef_at(ci as f64 * h, ck as f64 * h)?;
                    }
                    cells.push(Cell {
                        nodes,
                        weight,
                        cx: [c, c],
                        cy: [c, c],
                        mass,
                    });
                }
            }
        }
        GridSpec::PolarSector { .. } => {
            let drho = grid.h();
            let dth = grid.dtheta().expect("polar grid");
            let crho = 0.5 / (drho * drho);
            for k in 0..nk - 1 {
                for i in 0..ni - 1 {
                    let (r0, r1) = (i as f64 * drho, (i + 1) as f64 * drho);
                    let weight = 0.5 * (r0 + r1) * drho * dth;
                    // angular differences over the arc length at each edge radius;
                    // the degenerate edge at the centre is dropped
                    let cy = if i == 0 {
                        [0.0, 1.0 / (r1 * r1 * dth * dth)]
                    } else {
                        [0.5 / (r0 * r0 * dth * dth), 0.5 / (r1 * r1 * dth * dth)]
                    };
                    let corners = [(i, k), (i + 1, k), (i, k + 1), (i + 1, k + 1)];
                    let mut mass = [0.0; 4];
                    let mut nodes = [0u32; 4];
                    for (q, &(ci, ck)) in corners.iter().enumerate() {
                        let idx = grid.owner(ci, ck);
                        nodes[q] = idx as u32;
                        let nd = grid.nodes[idx];
                        mass[q] = 0.25 * weight * coef_at(nd.x, nd.y)?;
                    }
                    cells.push(Cell {
                        nodes,
                        weight,
                        cx: [crho, crho],
                        cy,
                        mass,
                    });
                }
            }
        }
    }

    let n = grid.len();
    let mut counts = vec![0usize; n + 1];
    for c in &cells {
        for &v in &c.nodes {
            counts[v as usize + 1] += 1;
        }
    }
    for i in 0..n {
        counts[i + 1] += counts[i];
    }
    let offsets = counts;
    let mut fill = offsets.clone();
    let mut refs = vec![0u32; offsets[n]];
    for (ci, c) in cells.iter().enumerate() {
        for (q, &v) in c.nodes.iter().enumerate() {
            refs[fill[v as usize]] = (ci * 4 + q) as u32;
            fill[v as usize] += 1;
        }
    }

    let curv = pot.well_curvature().abs();
    let mut lumped = vec![0.0; n];
    let mut scale = vec![0.0; n];
    for c in &cells {
        let stiff = [
            c.cx[0] + c.cy[0],
            c.cx[0] + c.cy[1],
            c.cx[1] + c.cy[0],
            c.cx[1] + c.cy[1],
        ];
        for q in 0..4 {
            let v = c.nodes[q] as usize;
            lumped[v] += 0.25 * c.weight;
            scale[v] += c.weight * stiff[q] + c.mass[q] * curv;
        }
    }
    for s in &mut scale {
        if !(*s > 0.0) {
            *s = 1.0;
        }
    }
    let free = grid.nodes.iter().map(|n| !n.role.is_fixed()).collect();
    Ok(Assembly {
        cells,
        offsets,
        refs,
        free,
        lumped,
        scale,
    })
}
