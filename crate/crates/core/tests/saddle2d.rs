use std::sync::Arc;

use curvwell::hetero1d::solve_heteroclinic;
use curvwell::model::{CoefficientField, Potential};
use curvwell::nfunc::NFunctionSpec;
use curvwell::optim::MinimizeConfig;
use curvwell::saddle2d::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn problem(grid: Grid, alpha: f64, level: f64, coef: CoefficientField, far: f64) -> Problem {
    let grid = Arc::new(grid);
    let n_far = grid.count(BoundaryRole::FarDirichlet);
    Problem::new(
        grid,
        NFunctionSpec::truncated(level).unwrap(),
        Potential::quartic(alpha).unwrap(),
        coef,
        vec![far; n_far],
    )
    .unwrap()
}

fn random_field(p: &Problem, rng: &mut ChaCha8Rng) -> Field {
    let a = p.alpha();
    let values = p.grid.nodes.iter().map(|_| rng.gen_range(0.0..a)).collect();
    Field::new(p.grid.clone(), values).unwrap()
}

/// Largest deviation of the analytic gradient from central differences of the
/// energy, relative to the largest gradient entry.
fn fd_error(p: &Problem, f: &Field) -> f64 {
    let g = p.energy_gradient(f).unwrap();
    let gmax = g.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let e = 1e-6 * p.alpha();
    let mut worst = 0.0_f64;
    let mut pert = f.clone();
    for i in 0..f.values.len() {
        if !p.free_mask()[i] {
            assert_eq!(g.values[i], 0.0);
            continue;
        }
        let v = f.values[i];
        pert.values[i] = v + e;
        let ep = p.energy(&pert).unwrap();
        pert.values[i] = v - e;
        let em = p.energy(&pert).unwrap();
        pert.values[i] = v;
        let fd = (ep - em) / (2.0 * e);
        worst = worst.max((fd - g.values[i]).abs());
    }
    worst / gmax
}

#[test]
fn gradient_matches_finite_differences_on_the_triangle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..20 {
        // small levels push random gradients onto the quadratic and constant branches
        let level = if trial % 2 == 0 { 1.0 } else { 0.02 };
        let p = problem(
            Grid::quadrant_triangle(8.0, 64).unwrap(),
            0.1,
            level,
            CoefficientField::periodic_model(2.0).unwrap(),
            0.05,
        );
        let f = random_field(&p, &mut rng);
        let err = fd_error(&p, &f);
        assert!(err <= 1e-6, "trial {trial}: relative error {err}");
    }
}

#[test]
fn gradient_matches_finite_differences_on_the_sector() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..20 {
        let level = if trial % 2 == 0 { 1.0 } else { 0.02 };
        let j = 2 + trial as u32 % 3;
        let p = problem(
            Grid::polar_sector(8.0, 64, 64, j).unwrap(),
            0.1,
            level,
            CoefficientField::constant(1.5).unwrap(),
            0.05,
        );
        let f = random_field(&p, &mut rng);
        let err = fd_error(&p, &f);
        assert!(err <= 1e-6, "trial {trial}: relative error {err}");
    }
}

#[test]
fn zero_field_energy_is_alpha4_times_area() {
    let p = problem(
        Grid::quadrant_triangle(40.0, 401).unwrap(),
        0.1,
        1.0,
        CoefficientField::constant(1.0).unwrap(),
        0.0,
    );
    let zero = Field::constant(p.grid.clone(), 0.0);
    let e = p.energy(&zero).unwrap();
    assert!((e - 0.08).abs() <= 1e-12 * 0.08, "{e}");
    // V'(0) = 0 and no differences: the gradient vanishes
    let g = p.energy_gradient(&zero).unwrap();
    assert!(g.values.iter().all(|v| *v == 0.0));
}

#[test]
fn well_field_has_zero_energy_and_residual() {
    for grid in [
        Grid::quadrant_triangle(16.0, 65).unwrap(),
        Grid::polar_sector(16.0, 65, 65, 3).unwrap(),
    ] {
        let p = problem(grid, 0.1, 1.0, CoefficientField::constant(1.0).unwrap(), 0.1);
        let f = Field::constant(p.grid.clone(), 0.1);
        assert_eq!(p.energy(&f).unwrap(), 0.0);
        assert!(p.energy_gradient(&f).unwrap().values.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn energy_rejects_bad_fields() {
    let p = problem(
        Grid::quadrant_triangle(16.0, 65).unwrap(),
        0.1,
        1.0,
        CoefficientField::constant(1.0).unwrap(),
        0.0,
    );
    let mut f = Field::constant(p.grid.clone(), 0.0);
    f.values[10] = f64::NAN;
    assert!(p.energy(&f).is_err());
    assert!(p.energy_gradient(&f).is_err());
    let other = Arc::new(Grid::quadrant_triangle(16.0, 66).unwrap());
    assert!(p.energy(&Field::constant(other, 0.0)).is_err());
}

#[test]
fn far_data_outside_the_box_is_rejected() {
    let grid = Arc::new(Grid::quadrant_triangle(16.0, 65).unwrap());
    let n_far = grid.count(BoundaryRole::FarDirichlet);
    let r = Problem::new(
        grid,
        NFunctionSpec::truncated(1.0).unwrap(),
        Potential::quartic(0.1).unwrap(),
        CoefficientField::constant(1.0).unwrap(),
        vec![0.2; n_far],
    );
    assert!(r.is_err());
}

#[test]
fn initial_guess_examples() {
    let cfg = MinimizeConfig::default();
    let q = solve_heteroclinic(0.1, 1.0, |_| 1.0, 80.0, 800, &cfg).unwrap();
    let grid = Arc::new(Grid::quadrant_triangle(40.0, 401).unwrap());
    let f = initial_guess(grid.clone(), 0.1, &q).unwrap();
    for (n, v) in grid.nodes.iter().zip(&f.values) {
        assert!((0.0..=0.1).contains(v));
        if n.k == 0 {
            assert_eq!(*v, 0.0);
        }
    }
    let corner = f.values[grid.index(400, 400).unwrap()];
    assert!((corner - 0.1).abs() <= 1e-4, "{corner}");
    assert!(initial_guess(grid, 0.2, &q).is_err());
}

fn small_cfg() -> MinimizeConfig {
    MinimizeConfig::default()
}

#[test]
fn small_saddle_solve_respects_its_constraints() {
    let sol = solve_saddle(0.2, 1.0, &CoefficientField::constant(1.0).unwrap(), 16.0, 65, &small_cfg()).unwrap();
    assert!(sol.converged);
    assert!(sol.history.windows(2).all(|w| w[1].energy <= w[0].energy));
    assert!(sol.history.last().unwrap().grad_inf <= 1e-10);
    let g = sol.grid();
    for (n, v) in g.nodes.iter().zip(&sol.field.values) {
        match n.role {
            BoundaryRole::NodalZero => assert_eq!(*v, 0.0),
            BoundaryRole::Interior | BoundaryRole::Mirror => assert!(*v > 0.0 && *v < 0.2),
            BoundaryRole::FarDirichlet => {}
        }
    }
    let grads = sol.problem.cell_gradients(&sol.field).unwrap();
    assert!(grads.iter().all(|g| *g <= 1.0));
    // the initial guess has higher energy than the minimiser
    assert!(sol.history[0].energy > sol.history.last().unwrap().energy);
}

#[test]
fn restart_from_a_critical_point_takes_no_steps() {
    let sol = solve_saddle(0.2, 1.0, &CoefficientField::constant(1.0).unwrap(), 16.0, 65, &small_cfg()).unwrap();
    let again = minimize(sol.problem.clone(), &sol.field, &small_cfg()).unwrap();
    assert!(again.converged);
    assert_eq!(again.iterations, 0);
}

#[test]
fn different_feasible_starts_reach_the_same_energy() {
    let sol = solve_saddle(0.2, 1.0, &CoefficientField::constant(1.0).unwrap(), 16.0, 65, &small_cfg()).unwrap();
    let p = sol.problem.clone();
    // a crude start: alpha away from the nodal line
    let values = p
        .grid
        .nodes
        .iter()
        .map(|n| if n.role == BoundaryRole::NodalZero { 0.0 } else { 0.2 * (n.y / 4.0).min(1.0) })
        .collect();
    let other = minimize(p.clone(), &Field::new(p.grid.clone(), values).unwrap(), &small_cfg()).unwrap();
    assert!(other.converged);
    let (a, b) = (p.energy(&sol.field).unwrap(), p.energy(&other.field).unwrap());
    assert!((a - b).abs() <= 1e-8 * a.abs(), "{a} vs {b}");
}

#[test]
fn max_iter_exhaustion_is_not_an_error() {
    let cfg = MinimizeConfig {
        max_iter: 3,
        ..Default::default()
    };
    let sol = solve_saddle(0.2, 1.0, &CoefficientField::constant(1.0).unwrap(), 16.0, 65, &cfg).unwrap();
    assert!(!sol.converged);
    assert_eq!(sol.iterations, 3);
    assert!(extend_full(&sol).is_err());
}

#[test]
fn solves_are_bit_reproducible() {
    let a = solve_pizza(0.2, 1.0, 1.0, 3, 16.0, (65, 65), &small_cfg()).unwrap();
    let b = solve_pizza(0.2, 1.0, 1.0, 3, 16.0, (65, 65), &small_cfg()).unwrap();
    assert_eq!(a.field.values, b.field.values);
    assert_eq!(a.history, b.history);
}

#[test]
fn small_pizza_solve_respects_its_constraints() {
    let sol = solve_pizza(0.2, 1.0, 1.0, 3, 16.0, (65, 65), &small_cfg()).unwrap();
    assert!(sol.converged);
    for (n, v) in sol.grid().nodes.iter().zip(&sol.field.values) {
        if n.role == BoundaryRole::NodalZero {
            assert_eq!(*v, 0.0);
        } else {
            assert!((0.0..=0.2).contains(v));
        }
    }
    let ext = extend_full(&sol).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let rho = rng.gen_range(0.0..16.0);
        let th = rng.gen_range(-4.0..4.0);
        let v = ext.eval_polar(rho, th).unwrap();
        let w = ext.eval_polar(rho, th + std::f64::consts::PI / 3.0).unwrap();
        assert!((v + w).abs() <= 1e-14);
    }
}

#[test]
fn pizza_needs_j_at_least_two() {
    let err = solve_pizza(0.1, 1.0, 1.0, 1, 40.0, (401, 65), &small_cfg()).unwrap_err();
    assert!(err.to_string().contains("j must be ≥ 2"));
}

#[test]
fn saddle_rejects_asymmetric_coefficients() {
    let table = curvwell::model::CoefficientTable::from_rows(&[
        (0.0, 0.0, 1.0),
        (1.0, 0.0, 2.0),
        (0.0, 1.0, 1.0),
        (1.0, 1.0, 1.0),
    ])
    .unwrap();
    let r = solve_saddle(0.1, 1.0, &CoefficientField::Tabulated(table), 40.0, 401, &small_cfg());
    assert!(matches!(r, Err(curvwell::Error::Domain(_))));
}

#[test]
fn cartesian_extension_identities_on_random_points() {
    let sol = solve_saddle(0.2, 1.0, &CoefficientField::constant(1.0).unwrap(), 16.0, 65, &small_cfg()).unwrap();
    let ext = extend_full(&sol).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10_000 {
        let x = rng.gen_range(-16.0..16.0);
        let y = rng.gen_range(-16.0..16.0);
        let v = ext.eval(x, y).unwrap();
        assert!((ext.eval(-x, y).unwrap() + v).abs() <= 1e-14);
        assert!((ext.eval(x, -y).unwrap() + v).abs() <= 1e-14);
        assert_eq!(ext.eval(y, x).unwrap(), v);
        assert!(v * x * y >= 0.0);
    }
    assert!(ext.eval(17.0, 0.0).is_err());
}
