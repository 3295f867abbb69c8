//! Symmetry-reduced 2D energies and the saddle / pizza solvers.
//!
//! The saddle solution lives on the triangle `{0 <= y <= x <= R}`; the pizza
//! solutions on the sector `{pi/2 - pi/(2j) <= theta <= pi/2}`. Both are
//! rebuilt on the whole region by [`extend_full`].

mod extend;
mod grid;
mod io;
mod problem;
mod solve;

pub use extend::{extend_full, Extension};
pub use grid::{build_grid, BoundaryRole, Grid, GridSpec, Node, MIN_RESOLUTION};
pub use io::{export_field, ExportFormat, SolutionFile};
pub use problem::{Field, Problem};
pub use solve::{initial_guess, minimize, solve_pizza, solve_saddle, Solution, ALPHA_WARN};
