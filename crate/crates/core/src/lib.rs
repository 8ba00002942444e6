//! Entropy solutions of scalar conservation laws `u_t + f(u)_x = 0` with
//! convex flux, computed through the value function of the associated
//! Hamilton–Jacobi equation.
//!
//! The pipeline samples a convex flux, takes its Legendre–Fenchel conjugate
//! with a linear-time scan, minimizes the Hopf–Lax formula with a monotone
//! divide-and-conquer search, and differentiates the value function. The
//! [`oracle`] module provides independent references and [`verify`] turns
//! the known inequalities for entropy solutions into executable checks.

pub mod convex_flux;
pub mod error;
pub mod grid;
pub mod hopf_lax;
pub mod legendre;
pub mod oracle;
pub mod profile;
mod scalar;
pub mod solver;
pub mod verify;

pub use convex_flux::{build_flux, classify_growth, extend_superlinear, extend_tails, mollify, presets, ConvexFlux, Growth, MollifierSpec, Tail};
pub use error::{Error, Result};
pub use grid::UniformGrid;
pub use hopf_lax::{characteristics, extract_solution, primitive, search_window, tol_min, two_step_value, value_slice, ValueSlice};
pub use legendre::{biconjugate_residual, dual_mollification_gap, fenchel_dual, DualGridSpec};
pub use oracle::{brute_force_conjugate, brute_force_value, cross_validate, godunov, godunov_at, FvConfig};
pub use profile::{Extension, Profile};
pub use scalar::Scalar;
pub use solver::{
    flux_surgery, lipschitz_bound, solve_l1, solve_linf, solve_semisuperlinear, CauchyIncrement, L1Solution, Solution, Truncation, TruncationLadder,
};

pub type FluxF64 = ConvexFlux<f64>;
pub type FluxF32 = ConvexFlux<f32>;
pub type ProfileF64 = Profile<f64>;
pub type ProfileF32 = Profile<f32>;
pub type SolutionF64 = Solution<f64>;
pub type SolutionF32 = Solution<f32>;
pub type ValueSliceF64 = ValueSlice<f64>;
pub type GridF64 = UniformGrid<f64>;
