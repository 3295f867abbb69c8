//! Saddle-type and pizza-type solutions of Allen-Cahn equations driven by the
//! truncated prescribed mean curvature operator
//!
//! ```text
//! -div(phi_L(|grad u|) grad u) + A(x, y) V_alpha'(u) = 0   in R^2
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`nfunc`]: the truncated generator `phi_L`, its N-function `Phi_L`, and
//!   numeric checkers for the structural conditions on `phi`.
//! * [`model`]: the double-well family `V_alpha` and the weight `A(x, y)`.
//! * [`optim`]: projected Barzilai-Borwein descent with Armijo backtracking.
//! * [`hetero1d`]: the one-dimensional heteroclinic profile.
//! * [`saddle2d`]: symmetry-reduced 2D energies and the saddle / pizza solvers.
//! * [`verify`]: pass/fail reports for every checkable item of the theorems.
//! * [`cli`]: the batch front end used by the `curvwell` binary.

pub mod cli;
pub mod error;
pub mod hetero1d;
pub mod model;
pub mod nfunc;
pub mod numeric;
pub mod optim;
pub mod report;
pub mod saddle2d;
pub mod verify;

pub use error::{Error, Result};
