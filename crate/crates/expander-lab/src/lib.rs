//! A solver-plus-verification laboratory for entire, spacelike, strictly
//! convex self-expanders of power-of-`sigma_k` curvature flows in Minkowski
//! space.
//!
//! The prescribed-curvature equation `sigma_k(kappa) = (-<X, nu>)^alpha` for
//! an entire convex graph with asymptotics `u(x) - |x| -> phi(x/|x|)` turns,
//! under the Legendre transform, into a degenerate elliptic Dirichlet problem
//! for the dual potential `u*` on the unit ball:
//!
//! * `k = n` (Gauss case): a Monge-Ampere equation whose right-hand side blows
//!   up at the boundary; it is approached through regularized problems with
//!   weight `(1 - s|xi|^2)` and continuation `s -> 1`.
//! * `k < n` (quotient case): a Hessian-quotient equation solved on balls of
//!   radius `r -> 1`, with boundary data supplied by a subsolution built from
//!   the Gauss case through Maclaurin's inequality.
//!
//! The crate solves both families with a damped Newton method on polar grids,
//! constructs every comparison barrier used by the underlying a priori
//! estimates, audits those estimates numerically on the computed solutions,
//! and reconstructs the primal hypersurfaces with certified geometry
//! (spacelike gradient bound, positive curvatures, residual of the original
//! equation).
//!
//! Start from [`solver::solve_gauss_dual`] / [`solver::solve_quotient_dual`],
//! or run the `expander-lab` binary; each major capability also has a runnable
//! example under `examples/`.

pub mod audit;
pub mod barrier;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod linsolve;
pub mod operator;
pub mod problem;
pub mod radial;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{DualField, PrimalSurface};
pub use grid::{BallGrid, GridSpec};
pub use problem::{BoundaryData, CaseTag, ContinuationSchedule, ProblemSpec};
