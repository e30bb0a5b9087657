use super::kernel::{psi_prime, theta_sq, SmoothingParams};
use super::quasi_newton::{self, Objective, Options, Status};
use super::root::{nearest_distance, solve_z_with_distances};
use crate::data::{check_p, CentroidMatrix, DataMatrix};
use crate::error::Result;

pub const INNER_MAX_ITER: usize = 200;

/// Per-object roots of `h_i(z, G) = 0` at one centroid matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ZSolve {
    pub z: Vec<f64>,
    pub residuals: Vec<f64>,
    pub newton_iters: Vec<usize>,
}

impl ZSolve {
    pub fn max_iters(&self) -> usize {
        self.newton_iters.iter().copied().max().unwrap_or(0)
    }
}

/// `f(G) = sum_i z_i^2`, together with the roots that define it.
pub fn smoothed_objective(
    g: &CentroidMatrix,
    x: &DataMatrix,
    prm: &SmoothingParams,
) -> Result<(f64, ZSolve)> {
    check_p(x, g)?;
    prm.validate()?;
    let n = x.n();
    let mut zs = ZSolve {
        z: Vec::with_capacity(n),
        residuals: Vec::with_capacity(n),
        newton_iters: Vec::with_capacity(n),
    };
    let mut thetas = vec![0.0; g.k()];
    for xi in x.rows() {
        for (t, gk) in thetas.iter_mut().zip(g.rows()) {
            *t = theta_sq(xi, gk, prm.gamma).sqrt();
        }
        let (z, res, iters) = solve_z_with_distances(&thetas, prm, nearest_distance(xi, g))?;
        zs.z.push(z);
        zs.residuals.push(res);
        zs.newton_iters.push(iters);
    }
    let f = zs.z.iter().map(|z| z * z).sum();
    Ok((f, zs))
}

/// Analytic gradient of `f` with respect to the centroids, row-major `K x p`.
///
/// Differentiating `h_i(z_i(G), G) = 0` gives
/// `dz_i/dg_kj = -psi'_ik (x_ij - g_kj) / theta_ik / sum_l psi'_il`.
pub fn smoothed_gradient(
    g: &CentroidMatrix,
    x: &DataMatrix,
    prm: &SmoothingParams,
    zs: &ZSolve,
) -> Vec<f64> {
    let (k, p) = (g.k(), g.p());
    let mut grad = vec![0.0; k * p];
    let mut weights = vec![0.0; k];
    for (xi, &z) in x.rows().zip(&zs.z) {
        let mut total = 0.0;
        for (w, gk) in weights.iter_mut().zip(g.rows()) {
            let t = theta_sq(xi, gk, prm.gamma).sqrt();
            let d = psi_prime(z - t, prm.tau);
            total += d;
            *w = d / t;
        }
        let scale = -2.0 * z / total;
        for (c, (&w, gk)) in weights.iter().zip(g.rows()).enumerate() {
            for ((acc, xv), gv) in grad[c * p..(c + 1) * p].iter_mut().zip(xi).zip(gk) {
                *acc += scale * w * (xv - gv);
            }
        }
    }
    grad
}

/// Result of one inner minimisation of problem (P).
#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub centroids: CentroidMatrix,
    pub f: f64,
    pub zs: ZSolve,
    pub iterations: usize,
    pub grad_norm_inf: f64,
    pub status: Status,
    /// `f` at the start point and after every accepted step.
    pub trace: Vec<f64>,
    pub max_root_iterations: usize,
}

struct Problem<'a> {
    x: &'a DataMatrix,
    prm: SmoothingParams,
    k: usize,
    max_root_iterations: usize,
}

impl Problem<'_> {
    fn centroids(&self, v: &[f64]) -> Result<CentroidMatrix> {
        CentroidMatrix::new(self.k, self.x.p(), v.to_vec())
    }
}

impl Objective for Problem<'_> {
    type Aux = ZSolve;

    fn value(&mut self, v: &[f64]) -> Result<(f64, ZSolve)> {
        let g = self.centroids(v)?;
        let (f, zs) = smoothed_objective(&g, self.x, &self.prm)?;
        self.max_root_iterations = self.max_root_iterations.max(zs.max_iters());
        Ok((f, zs))
    }

    fn gradient(&mut self, v: &[f64], zs: &ZSolve) -> Vec<f64> {
        let g = self.centroids(v).expect("iterates stay finite");
        smoothed_gradient(&g, self.x, &self.prm, zs)
    }
}

/// Minimises `f(G)` at fixed smoothing parameters, starting from `g0`.
///
/// A line-search failure is not an error: the best iterate is returned with
/// `status == LineSearchFailed`.
pub fn minimize_smoothed(
    g0: &CentroidMatrix,
    x: &DataMatrix,
    prm: &SmoothingParams,
) -> Result<MinimizeOutcome> {
    check_p(x, g0)?;
    prm.validate()?;
    let mut problem = Problem {
        x,
        prm: *prm,
        k: g0.k(),
        max_root_iterations: 0,
    };
    let opts = Options {
        max_iter: INNER_MAX_ITER,
        ..Options::default()
    };
    let m = quasi_newton::minimize(&mut problem, g0.values(), &opts)?;
    Ok(MinimizeOutcome {
        centroids: problem.centroids(&m.x)?,
        f: m.f,
        zs: m.aux,
        iterations: m.iterations,
        grad_norm_inf: m.grad_norm_inf,
        status: m.status,
        trace: m.trace,
        max_root_iterations: problem.max_root_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoothing::root::{h, root_tolerance};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn prm(gamma: f64, tau: f64, epsilon: f64) -> SmoothingParams {
        SmoothingParams::new(gamma, tau, epsilon).unwrap()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Vec<f64> {
        (0..rows * cols)
            .map(|_| rng.gen_range(-scale..scale))
            .collect()
    }

    /// Central differences of the objective, independent of the gradient code.
    fn finite_difference(
        g: &CentroidMatrix,
        x: &DataMatrix,
        p: &SmoothingParams,
        step: f64,
    ) -> Vec<f64> {
        (0..g.values().len())
            .map(|j| {
                let mut plus = g.values().to_vec();
                let mut minus = g.values().to_vec();
                plus[j] += step;
                minus[j] -= step;
                let fp =
                    smoothed_objective(&CentroidMatrix::new(g.k(), g.p(), plus).unwrap(), x, p)
                        .unwrap()
                        .0;
                let fm =
                    smoothed_objective(&CentroidMatrix::new(g.k(), g.p(), minus).unwrap(), x, p)
                        .unwrap()
                        .0;
                (fp - fm) / (2.0 * step)
            })
            .collect()
    }

    #[test]
    fn roots_satisfy_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DataMatrix::new(12, 2, random_matrix(&mut rng, 12, 2, 4.0)).unwrap();
        let g = CentroidMatrix::new(3, 2, random_matrix(&mut rng, 3, 2, 4.0)).unwrap();
        let p = prm(1e-3, 1e-3, 0.01);
        let (f, zs) = smoothed_objective(&g, &x, &p).unwrap();
        assert!(f > 0.0);
        for (i, &z) in zs.z.iter().enumerate() {
            assert!(z > 0.0);
            assert!(h(z, x.row(i), &g, &p).abs() <= root_tolerance(p.epsilon));
        }
    }

    #[test]
    fn coincident_point_limit() {
        let x = DataMatrix::new(3, 1, vec![2.0; 3]).unwrap();
        let g = CentroidMatrix::new(1, 1, vec![2.0]).unwrap();
        let p = prm(1e-9, 1e-9, 0.01);
        let (f, _) = smoothed_objective(&g, &x, &p).unwrap();
        assert!((f - 3.0 * 0.01f64.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn gradient_vanishes_by_symmetry() {
        let p = prm(1e-2, 1e-2, 0.05);
        let x = DataMatrix::new(1, 2, vec![1.0, -1.0]).unwrap();
        let g = CentroidMatrix::new(1, 2, vec![1.0, -1.0]).unwrap();
        let (_, zs) = smoothed_objective(&g, &x, &p).unwrap();
        assert!(smoothed_gradient(&g, &x, &p, &zs).iter().all(|&v| v == 0.0));

        let x = DataMatrix::new(2, 1, vec![-1.0, 1.0]).unwrap();
        let g = CentroidMatrix::new(1, 1, vec![0.0]).unwrap();
        let (_, zs) = smoothed_objective(&g, &x, &p).unwrap();
        assert!(smoothed_gradient(&g, &x, &p, &zs)[0].abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = DataMatrix::new(5, 2, random_matrix(&mut rng, 5, 2, 3.0)).unwrap();
        let g = CentroidMatrix::new(2, 2, random_matrix(&mut rng, 2, 2, 3.0)).unwrap();
        let p = prm(0.3, 0.2, 0.5);
        let (_, zs) = smoothed_objective(&g, &x, &p).unwrap();
        let analytic = smoothed_gradient(&g, &x, &p, &zs);
        let fd = finite_difference(&g, &x, &p, 1e-6);
        for (a, b) in analytic.iter().zip(&fd) {
            assert!((a - b).abs() / b.abs().max(1e-8) < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn optimal_start_is_a_fixed_point() {
        let x = DataMatrix::new(2, 1, vec![-1.0, 1.0]).unwrap();
        let g0 = CentroidMatrix::new(1, 1, vec![0.0]).unwrap();
        let p = prm(1e-4, 1e-4, 0.01);
        let f0 = smoothed_objective(&g0, &x, &p).unwrap().0;
        let out = minimize_smoothed(&g0, &x, &p).unwrap();
        assert!((out.centroids.row(0)[0]).abs() < 1e-10);
        assert!((out.f - f0).abs() < 1e-10);
    }

    #[test]
    fn never_increases_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = DataMatrix::new(20, 2, random_matrix(&mut rng, 20, 2, 5.0)).unwrap();
        let g0 = CentroidMatrix::new(3, 2, random_matrix(&mut rng, 3, 2, 5.0)).unwrap();
        let p = prm(1e-3, 1e-3, 0.01);
        let f0 = smoothed_objective(&g0, &x, &p).unwrap().0;
        let out = minimize_smoothed(&g0, &x, &p).unwrap();
        assert!(out.f <= f0 + 1e-12);
        for w in out.trace.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert_eq!(out.trace[0], f0);
    }
}
