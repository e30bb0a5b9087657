//! Per-object root solves of `h_i(z, G) = 0`.
//!
//! `h` is a sum of convex, strictly increasing terms, so it has exactly one
//! root. The solver brackets it by geometric expansion from the initial guess
//! and then runs Newton steps, falling back to bisection whenever a step
//! would leave the bracket.

use super::kernel::{psi, psi_prime, theta_sq, SmoothingParams};
use crate::data::{squared_distance, CentroidMatrix};
use crate::error::{Error, Result};

pub const ROOT_MAX_ITER: usize = 100;

/// Absolute residual accepted by the root solver, `1e-12 * max(1, epsilon)`.
pub fn root_tolerance(epsilon: f64) -> f64 {
    1e-12 * epsilon.max(1.0)
}

/// `h(z) = sum_k psi(z - theta(x_i, g_k, gamma), tau) - epsilon`.
pub fn h(z: f64, x: &[f64], g: &CentroidMatrix, prm: &SmoothingParams) -> f64 {
    let thetas: Vec<f64> = g
        .rows()
        .map(|gk| theta_sq(x, gk, prm.gamma).sqrt())
        .collect();
    eval(z, &thetas, prm).0
}

#[inline]
fn eval(z: f64, thetas: &[f64], prm: &SmoothingParams) -> (f64, f64) {
    let mut value = -prm.epsilon;
    let mut slope = 0.0;
    for &t in thetas {
        value += psi(z - t, prm.tau);
        slope += psi_prime(z - t, prm.tau);
    }
    (value, slope)
}

/// Solves `h_i(z, G) = 0` for one object, starting from `z0`.
///
/// Returns the root and the number of `h` evaluations after the first.
pub fn solve_z(
    x: &[f64],
    g: &CentroidMatrix,
    prm: &SmoothingParams,
    z0: f64,
) -> Result<(f64, usize)> {
    if x.len() != g.p() {
        return Err(Error::DimensionMismatch {
            pair: "object/centroids (p)",
            left: x.len(),
            right: g.p(),
        });
    }
    let thetas: Vec<f64> = g
        .rows()
        .map(|gk| theta_sq(x, gk, prm.gamma).sqrt())
        .collect();
    solve_z_with_distances(&thetas, prm, z0).map(|(z, _, iters)| (z, iters))
}

/// Initial guess used by the objective: the plain distance to the nearest centroid.
pub(crate) fn nearest_distance(x: &[f64], g: &CentroidMatrix) -> f64 {
    g.rows()
        .map(|gk| squared_distance(x, gk))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// One extra Newton step from an accepted root, kept only if it does not
/// increase the residual. Where `h` is flat the residual test alone leaves
/// `z` loose by `tol / h'(z)`.
fn polish(
    z: f64,
    hz: f64,
    dz: f64,
    thetas: &[f64],
    prm: &SmoothingParams,
    iters: usize,
) -> (f64, f64, usize) {
    let next = z - hz / dz;
    if !next.is_finite() || next == z {
        return (z, hz.abs(), iters);
    }
    let hn = eval(next, thetas, prm).0;
    if hn.abs() <= hz.abs() {
        (next, hn.abs(), iters + 1)
    } else {
        (z, hz.abs(), iters + 1)
    }
}

/// Root solve over precomputed smoothed distances `theta_k`.
///
/// Returns `(z, |h(z)|, iterations)`. Once the residual is within tolerance
/// one further Newton step is tried. If the bracket shrinks to adjacent
/// floating-point numbers before the residual reaches tolerance, the root is
/// resolved to machine precision and the better endpoint is returned.
pub fn solve_z_with_distances(
    thetas: &[f64],
    prm: &SmoothingParams,
    z0: f64,
) -> Result<(f64, f64, usize)> {
    let tol = root_tolerance(prm.epsilon);
    let z0 = if z0.is_finite() { z0 } else { 0.0 };
    let (mut hz, mut dz) = eval(z0, thetas, prm);
    let mut z = z0;
    if hz.abs() <= tol {
        return Ok(polish(z, hz, dz, thetas, prm, 0));
    }

    let mut iters = 0;
    let not_converged = |iters, z, hz: f64, lo, hi| Error::RootNotConverged {
        iterations: iters,
        z,
        residual: hz.abs(),
        lo,
        hi,
    };

    // Grow the bracket geometrically away from z0 until h changes sign.
    let mut step = prm.epsilon + prm.tau + prm.gamma;
    let (mut lo, mut hi, mut h_lo, mut h_hi);
    if hz < 0.0 {
        (lo, h_lo) = (z0, hz);
        loop {
            iters += 1;
            let cand = z0 + step;
            let hc = eval(cand, thetas, prm).0;
            if hc >= 0.0 {
                (hi, h_hi) = (cand, hc);
                break;
            }
            (lo, h_lo) = (cand, hc);
            step *= 2.0;
            if iters >= ROOT_MAX_ITER {
                return Err(not_converged(iters, lo, h_lo, lo, f64::INFINITY));
            }
        }
    } else {
        (hi, h_hi) = (z0, hz);
        loop {
            iters += 1;
            let cand = z0 - step;
            let hc = eval(cand, thetas, prm).0;
            if hc <= 0.0 {
                (lo, h_lo) = (cand, hc);
                break;
            }
            (hi, h_hi) = (cand, hc);
            step *= 2.0;
            if iters >= ROOT_MAX_ITER {
                return Err(not_converged(iters, hi, h_hi, f64::NEG_INFINITY, hi));
            }
        }
    }
    if h_lo.abs() <= tol {
        return Ok(polish(
            lo,
            h_lo,
            eval(lo, thetas, prm).1,
            thetas,
            prm,
            iters,
        ));
    }
    if h_hi.abs() <= tol {
        return Ok(polish(
            hi,
            h_hi,
            eval(hi, thetas, prm).1,
            thetas,
            prm,
            iters,
        ));
    }
    // Newton starts from whichever end is the original guess.
    if z != lo && z != hi {
        z = if hz < 0.0 { lo } else { hi };
        (hz, dz) = eval(z, thetas, prm);
    }

    while iters < ROOT_MAX_ITER {
        iters += 1;
        let newton = z - hz / dz;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next <= lo || next >= hi {
            // bracket is down to adjacent floats
            let (best, res) = if h_lo.abs() <= h_hi.abs() {
                (lo, h_lo)
            } else {
                (hi, h_hi)
            };
            return Ok((best, res.abs(), iters));
        }
        z = next;
        (hz, dz) = eval(z, thetas, prm);
        if hz.abs() <= tol {
            return Ok(polish(z, hz, dz, thetas, prm, iters));
        }
        if hz < 0.0 {
            (lo, h_lo) = (z, hz);
        } else {
            (hi, h_hi) = (z, hz);
        }
    }
    Err(not_converged(iters, z, hz, lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prm(gamma: f64, tau: f64, epsilon: f64) -> SmoothingParams {
        SmoothingParams::new(gamma, tau, epsilon).unwrap()
    }

    /// z with psi(z - theta, tau) = c, i.e. the inverse of psi.
    fn psi_inverse(c: f64, tau: f64) -> f64 {
        c - tau * tau / (4.0 * c)
    }

    #[test]
    fn h_limits() {
        let g = CentroidMatrix::new(2, 1, vec![0.0, 3.0]).unwrap();
        let p = prm(1e-3, 1e-3, 0.01);
        assert!((h(-1e12, &[1.0], &g, &p) + 0.01).abs() < 1e-12);
        assert!(h(1e6, &[1.0], &g, &p) > 1e5);

        let g1 = CentroidMatrix::new(1, 1, vec![4.0]).unwrap();
        let t = theta_sq(&[1.0], g1.row(0), p.gamma).sqrt();
        assert!((h(t, &[1.0], &g1, &p) - (p.tau / 2.0 - p.epsilon)).abs() < 1e-15);
    }

    #[test]
    fn h_vanishes_at_closed_form_root() {
        // K = 1, theta = 5 exactly via gamma: x = 0, g = 3, gamma = 4
        let g = CentroidMatrix::new(1, 1, vec![3.0]).unwrap();
        let p = prm(4.0, 0.001, 0.01);
        let z = 5.0 + 0.01 - 0.001f64.powi(2) / (4.0 * 0.01);
        assert!((z - 5.009975).abs() < 1e-12);
        assert!(h(z, &[0.0], &g, &p).abs() < 1e-13);
    }

    #[test]
    fn single_centroid_matches_psi_inverse() {
        let p = prm(1e-3, 0.001, 0.01);
        let (z, _, iters) = solve_z_with_distances(&[5.0], &p, 5.0).unwrap();
        assert!((z - 5.009975).abs() < 1e-10, "z = {z}");
        assert!(iters <= 25);
    }

    #[test]
    fn symmetric_pair_matches_psi_inverse() {
        let p = prm(1e-3, 0.001, 0.01);
        let (z, _, _) = solve_z_with_distances(&[2.5, 2.5], &p, 2.5).unwrap();
        let expected = 2.5 + psi_inverse(0.005, 0.001);
        assert!((expected - (2.5 + 0.005 - 1e-6 / 0.02)).abs() < 1e-15);
        assert!((z - expected).abs() < 1e-10);
    }

    #[test]
    fn large_tau_needs_downward_bracket() {
        // tau >> epsilon puts h(theta_min) above zero
        let p = prm(0.1, 2.0, 0.01);
        let (z, res, _) = solve_z_with_distances(&[1.0, 1.5, 4.0], &p, 1.0).unwrap();
        assert!(res <= root_tolerance(p.epsilon));
        assert!(z < 1.0);
    }

    #[test]
    fn solve_z_uses_centroid_rows() {
        let g = CentroidMatrix::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let p = prm(1e-3, 1e-3, 0.01);
        let (z, _) = solve_z(&[0.0, 0.0], &g, &p, 0.0).unwrap();
        assert!(h(z, &[0.0, 0.0], &g, &p).abs() <= root_tolerance(p.epsilon));
        assert!(solve_z(&[0.0], &g, &p, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn residual_within_tolerance(
            thetas in proptest::collection::vec(1e-3f64..20.0, 1..5),
            tau in 1e-10f64..1.0,
            eps in 1e-9f64..2.0,
            shift in -3f64..3.0,
        ) {
            let p = prm(1e-3, tau, eps);
            let z0 = thetas.iter().cloned().fold(f64::INFINITY, f64::min) + shift;
            let (z, res, iters) = solve_z_with_distances(&thetas, &p, z0).unwrap();
            prop_assert!(res <= root_tolerance(eps));
            prop_assert!(iters <= ROOT_MAX_ITER);
            prop_assert!(eval(z, &thetas, &p).0.abs() == res);
        }

        #[test]
        fn slope_in_open_interval(
            thetas in proptest::collection::vec(0.0f64..10.0, 1..4),
            z in -10f64..10.0,
            tau in 1e-3f64..1.0,
        ) {
            let p = prm(1e-3, tau, 0.01);
            let (_, slope) = eval(z, &thetas, &p);
            prop_assert!(slope > 0.0 && slope < thetas.len() as f64);
        }
    }
}
