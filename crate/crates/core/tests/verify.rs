use std::sync::Arc;

use curvwell::model::CoefficientField;
use curvwell::optim::{MinimizeConfig, StopReason};
use curvwell::saddle2d::*;
use curvwell::verify::*;

fn small_saddle() -> Solution {
    solve_saddle(0.2, 1.0, &CoefficientField::constant(1.0).unwrap(), 16.0, 65, &MinimizeConfig::default()).unwrap()
}

fn with_values(sol: &Solution, values: Vec<f64>, converged: bool) -> Solution {
    Solution {
        problem: sol.problem.clone(),
        field: Field::new(sol.field.grid.clone(), values).unwrap(),
        history: vec![],
        wall_seconds: 0.0,
        converged,
        iterations: 0,
        stop: StopReason::Converged,
        profile: None,
        warnings: vec![],
    }
}

#[test]
fn small_saddle_passes_every_item() {
    let sol = small_saddle();
    let r = check_theorem1(&sol, 0.2, 1.0, &Tolerances::default()).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.items.len(), 6);
    assert!(r.item("b").unwrap().measured <= 1e-14);
    assert!(r.item("c").unwrap().measured <= 1e-14);
    assert_eq!(r.seed, 0x5ADD1E);
    let t = truncation_consistency(&sol, 1.0).unwrap();
    assert!(t.pass && t.branch_identity);
    assert!(t.margin >= 0.99);
}

#[test]
fn reports_are_reproducible_and_overall_pass_is_the_conjunction() {
    let sol = small_saddle();
    let a = serde_json::to_string(&check_theorem1(&sol, 0.2, 1.0, &Tolerances::default()).unwrap()).unwrap();
    let b = serde_json::to_string(&check_theorem1(&sol, 0.2, 1.0, &Tolerances::default()).unwrap()).unwrap();
    assert_eq!(a, b);
    assert!(a.contains("\"solutionHash\""));
    // an impossible far-field tolerance flips (d), (e) and the overall verdict only
    let tight = Tolerances {
        asym: 1e-12,
        ..Default::default()
    };
    let r = check_theorem1(&sol, 0.2, 1.0, &tight).unwrap();
    assert!(!r.pass);
    assert!(!r.item("d").unwrap().pass && !r.item("e").unwrap().pass);
    assert!(r.item("a").unwrap().pass && r.item("f").unwrap().pass);
    assert!(r.item("d").unwrap().witness.is_some());
}

#[test]
fn wrong_grid_kind_is_an_error() {
    let sol = small_saddle();
    assert!(check_theorem2(&sol, 0.2, 1.0, 2, &Tolerances::default()).is_err());
    let pizza = solve_pizza(0.2, 1.0, 1.0, 2, 16.0, (65, 65), &MinimizeConfig::default()).unwrap();
    assert!(check_theorem1(&pizza, 0.2, 1.0, &Tolerances::default()).is_err());
    assert!(check_theorem2(&pizza, 0.2, 1.0, 3, &Tolerances::default()).is_err());
}

#[test]
fn steep_synthetic_field_fails_truncation_with_witness() {
    let sol = small_saddle();
    let mut values = sol.field.values.clone();
    // one node lifted by 3h: neighbouring cells get a gradient near 1.5
    let g = sol.grid();
    let i = g.index(40, 20).unwrap();
    values[i] += 3.0 * g.h();
    let bad = with_values(&sol, values, true);
    let t = truncation_consistency(&bad, 1.0).unwrap();
    assert!(!t.pass);
    assert!(t.max_grad_sq > 1.0);
    assert!(t.witness.is_some());
    let r = check_theorem1(&bad, 0.2, 1.0, &Tolerances::default()).unwrap();
    assert!(!r.item("f").unwrap().pass);
}

#[test]
fn residual_examples() {
    let sol = small_saddle();
    let (inf, l2) = pde_residual(&sol).unwrap();
    let h = sol.grid().h();
    assert!(inf <= 1e-10 / (h * h), "{inf}");
    assert!(l2 <= inf * 16.0);

    let init = initial_guess(sol.field.grid.clone(), 0.2, sol.profile.as_ref().unwrap()).unwrap();
    let start = with_values(&sol, init.values, true);
    assert!(pde_residual(&start).unwrap().0 > inf);

    let unconverged = with_values(&sol, sol.field.values.clone(), false);
    assert!(pde_residual(&unconverged).is_err());
}

#[test]
fn well_state_has_zero_residual() {
    let grid = Arc::new(Grid::quadrant_triangle(16.0, 65).unwrap());
    let file = SolutionFile {
        grid: grid.spec,
        alpha: 0.1,
        level: 1.0,
        coefficient: CoefficientField::constant(1.0).unwrap(),
        far_data: vec![0.1; grid.count(BoundaryRole::FarDirichlet)],
        values: vec![0.1; grid.len()],
        converged: true,
        iterations: 0,
        history: vec![],
    };
    let sol = file.into_solution().unwrap();
    assert_eq!(pde_residual(&sol).unwrap(), (0.0, 0.0));
}

#[test]
fn pizza_reports_alternating_far_signs() {
    let sol = solve_pizza(0.2, 1.0, 1.0, 3, 16.0, (65, 65), &MinimizeConfig::default()).unwrap();
    let r = check_theorem2(&sol, 0.2, 1.0, 3, &Tolerances::default()).unwrap();
    for k in ["a", "b", "c", "e"] {
        assert!(r.item(k).unwrap().pass, "{k}: {r:?}");
    }
    // at R = 16 the bisector at 0.9R is only ~7 from the nodal rays
    assert!(r.item("d").unwrap().measured < 0.1);
    assert!(r.item("c").unwrap().measured <= 1e-14);
    let ext = extend_full(&sol).unwrap();
    let w = std::f64::consts::PI / 3.0;
    for k in 0..6 {
        let th = std::f64::consts::FRAC_PI_2 + (k as f64 + 0.5) * w;
        let v = ext.eval_polar(14.0, th).unwrap();
        // k = 0 carries -alpha
        assert_eq!(v.signum(), if k % 2 == 0 { -1.0 } else { 1.0 });
    }
}
