use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;
use std::time::Instant;

use super::grid::{BoundaryRole, Grid, GridSpec};
use super::problem::{Field, Problem};
use crate::error::{domain, Result};
use crate::hetero1d::{solve_heteroclinic, Profile1D};
use crate::model::{check_coefficient_symmetries, CoefficientField, Potential};
use crate::nfunc::NFunctionSpec;
use crate::optim::{self, IterRecord, MinimizeConfig, StopReason};

/// Above this alpha the gradient bound is no longer expected to hold.
pub const ALPHA_WARN: f64 = 0.2;

const SYMMETRY_SAMPLES: usize = 2000;
const SYMMETRY_SEED: u64 = 0xA5A5;

#[derive(Debug)]
pub struct Solution {
    pub problem: Arc<Problem>,
    pub field: Field,
    /// Energy and projected-gradient norm per accepted iterate.
    pub history: Vec<IterRecord>,
    pub wall_seconds: f64,
    pub converged: bool,
    pub iterations: usize,
    pub stop: StopReason,
    /// The 1D profile the far data and initial guess were built from.
    pub profile: Option<Profile1D>,
    pub warnings: Vec<String>,
}

impl Solution {
    pub fn alpha(&self) -> f64 {
        self.problem.alpha()
    }

    pub fn grid(&self) -> &Grid {
        &self.problem.grid
    }
}

/// Product-of-profiles guess `q(d1) q(d2) / alpha`, with `d1, d2` the
/// distances to the two nodal lines bounding the positive region.
pub fn initial_guess(grid: Arc<Grid>, alpha: f64, profile: &Profile1D) -> Result<Field> {
    if profile.alpha != alpha {
        return domain(format!(
            "profile alpha {} does not match alpha {alpha}",
            profile.alpha
        ));
    }
    let nodal = grid
        .j()
        .map(|j| FRAC_PI_2 - std::f64::consts::PI / j as f64);
    let values = grid
        .nodes
        .iter()
        .map(|n| {
            if n.role == BoundaryRole::NodalZero {
                return 0.0;
            }
            let (d1, d2) = match nodal {
                None => (n.x, n.y),
                Some(t0) => {
                    let (rho, theta) = (n.x.hypot(n.y), n.y.atan2(n.x));
                    (rho * theta.cos(), rho * (theta - t0).sin())
                }
            };
            (profile.eval(d1) * profile.eval(d2) / alpha).clamp(0.0, alpha)
        })
        .collect();
    Field::new(grid, values)
}

/// Minimises the discrete energy from `init` with projected BB descent.
///
/// Running out of iterations is not an error: the returned solution then has
/// `converged == false`.
pub fn minimize(problem: Arc<Problem>, init: &Field, cfg: &MinimizeConfig) -> Result<Solution> {
    if !(cfg.tol_grad > 0.0) || cfg.max_iter == 0 {
        return domain("need tolGrad > 0 and maxIter >= 1");
    }
    if init.values.len() != problem.grid.len() {
        return domain("initial field does not conform to the problem grid");
    }
    if init.values.iter().any(|v| !v.is_finite()) {
        return domain("initial field has non-finite values");
    }
    let mut x0 = init.values.clone();
    problem.impose_far_data(&mut x0);
    for (v, n) in x0.iter_mut().zip(&problem.grid.nodes) {
        if n.role == BoundaryRole::NodalZero {
            *v = 0.0;
        }
    }
    let start = Instant::now();
    let res = optim::minimize(problem.as_ref(), &x0, cfg);
    let wall_seconds = start.elapsed().as_secs_f64();
    let field = Field::new(problem.grid.clone(), res.x)?;
    Ok(Solution {
        problem,
        field,
        history: res.history,
        wall_seconds,
        converged: res.converged,
        iterations: res.iterations,
        stop: res.stop,
        profile: None,
        warnings: Vec::new(),
    })
}

fn alpha_warnings(alpha: f64) -> Vec<String> {
    if alpha > ALPHA_WARN {
        vec![format!(
            "alpha = {alpha} exceeds {ALPHA_WARN}; the gradient bound may fail"
        )]
    } else {
        Vec::new()
    }
}

fn profile_config(cfg: &MinimizeConfig) -> MinimizeConfig {
    MinimizeConfig {
        max_iter: cfg.max_iter.max(200_000),
        ..*cfg
    }
}

/// Saddle solution on the triangle `{0 <= y <= x <= R}` with `n` nodes per side.
///
/// Far data `u(R, y) = q(y)` comes from the 1D profile with the line-averaged
/// coefficient.
pub fn solve_saddle(
    alpha: f64,
    level: f64,
    coefficient: &CoefficientField,
    r: f64,
    n: usize,
    cfg: &MinimizeConfig,
) -> Result<Solution> {
    let phi = NFunctionSpec::truncated(level)?;
    let potential = Potential::quartic(alpha)?;
    let sym = check_coefficient_symmetries(coefficient, SYMMETRY_SAMPLES, 1e-12, SYMMETRY_SEED)?;
    if !sym.pass {
        return domain(format!(
            "coefficient fails the symmetry conditions: {}",
            sym.failures.join("; ")
        ));
    }
    let grid = Arc::new(super::grid::build_grid(GridSpec::QuadrantTriangle { r, n })?);

    // profile nodes nest into the 2D lattice
    let m = 200usize.div_ceil(2 * (n - 1)).max(1);
    let intervals = 2 * (n - 1) * m;
    let h1 = 2.0 * r / intervals as f64;
    let a_vals = (0..=intervals)
        .map(|i| coefficient.line_average(i as f64 * h1))
        .collect::<Result<Vec<f64>>>()?;
    let profile = solve_heteroclinic(
        alpha,
        level,
        |t| a_vals[((t / h1).round() as usize).min(intervals)],
        2.0 * r,
        intervals,
        &profile_config(cfg),
    )?;

    let far: Vec<f64> = grid
        .nodes
        .iter()
        .filter(|nd| nd.role == BoundaryRole::FarDirichlet)
        .map(|nd| profile.eval(nd.y).clamp(0.0, alpha))
        .collect();
    let problem = Arc::new(Problem::new(
        grid.clone(),
        phi,
        potential,
        coefficient.clone(),
        far,
    )?);
    let init = initial_guess(grid, alpha, &profile)?;
    let mut sol = minimize(problem, &init, cfg)?;
    sol.profile = Some(profile);
    sol.warnings = alpha_warnings(alpha);
    Ok(sol)
}

/// Pizza solution with `2j` alternating sectors and constant coefficient `b`,
/// on a polar sector with `resolution = (n_rho, n_theta)`.
pub fn solve_pizza(
    alpha: f64,
    level: f64,
    b: f64,
    j: u32,
    r: f64,
    resolution: (usize, usize),
    cfg: &MinimizeConfig,
) -> Result<Solution> {
    if j < 2 {
        return domain("j must be ≥ 2");
    }
    let phi = NFunctionSpec::truncated(level)?;
    let potential = Potential::quartic(alpha)?;
    let coefficient = CoefficientField::constant(b)?;
    let (n_rho, n_theta) = resolution;
    let grid = Arc::new(super::grid::build_grid(GridSpec::PolarSector {
        r,
        n_rho,
        n_theta,
        j,
    })?);
    let intervals = (4 * (n_rho - 1)).max(200);
    let profile = solve_heteroclinic(alpha, level, |_| b, 2.0 * r, intervals, &profile_config(cfg))?;

    let far: Vec<f64> = grid
        .nodes
        .iter()
        .filter(|nd| nd.role == BoundaryRole::FarDirichlet)
        .map(|nd| {
            let theta = nd.y.atan2(nd.x);
            profile.eval(r * (FRAC_PI_2 - theta)).clamp(0.0, alpha)
        })
        .collect();
    let problem = Arc::new(Problem::new(grid.clone(), phi, potential, coefficient, far)?);
    let init = initial_guess(grid, alpha, &profile)?;
    let mut sol = minimize(problem, &init, cfg)?;
    sol.profile = Some(profile);
    sol.warnings = alpha_warnings(alpha);
    Ok(sol)
}
