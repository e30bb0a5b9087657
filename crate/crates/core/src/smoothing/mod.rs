//! Hyperbolic smoothing of the minimum-sum-of-squares clustering problem.
//!
//! For fixed centroids `G`, each object `x_i` gets a smoothed minimum
//! distance `z_i`, the unique root of
//!
//! ```text
//! h_i(z, G) = sum_k psi(z - theta(x_i, g_k, gamma), tau) - epsilon
//! ```
//!
//! where `psi(y, tau) = (y + sqrt(y^2 + tau^2)) / 2` smooths `max(0, y)` and
//! `theta` smooths the Euclidean distance. The smoothed objective is
//! `f(G) = sum_i z_i^2`; it is minimised over `G` by a quasi-Newton method
//! using the gradient obtained by implicit differentiation of `h_i = 0`.

mod kernel;
mod objective;
pub mod quasi_newton;
mod root;

pub use kernel::{psi, psi_prime, theta, theta_sq, SmoothingParams};
pub use objective::{
    minimize_smoothed, smoothed_gradient, smoothed_objective, MinimizeOutcome, ZSolve,
    INNER_MAX_ITER,
};
pub use root::{h, root_tolerance, solve_z, solve_z_with_distances, ROOT_MAX_ITER};
