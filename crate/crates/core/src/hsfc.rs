//! Hyperbolic Smoothing Fuzzy Clustering: the outer driver.
//!
//! Starting from `K` distinct data rows, problem (P) is minimised repeatedly
//! while `gamma` and `tau` shrink geometrically (and `epsilon` too, if it is
//! not held fixed), each solve warm-started from the previous centroids.
//! Fuzzy memberships are read off the final roots as
//! `mu_ik = psi(z_i - theta_ik, tau) / epsilon`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{check_p, CentroidMatrix, DataMatrix, MembershipMatrix};
use crate::error::{Error, Result};
use crate::evaluation::within_ss;
use crate::result::{ClusteringResult, Diagnostics, Method};
use crate::smoothing::quasi_newton::Status;
use crate::smoothing::{minimize_smoothed, psi, solve_z_with_distances, SmoothingParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsfcConfig {
    pub k: usize,
    pub epsilon: f64,
    pub gamma0: f64,
    pub tau0: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    /// Number of outer smoothing steps.
    pub outer_iters: usize,
    /// Hold `epsilon` constant; otherwise it shrinks by `rho3` each step.
    pub epsilon_fixed: bool,
    pub seed: u64,
}

impl Default for HsfcConfig {
    fn default() -> Self {
        Self {
            k: 2,
            epsilon: 0.01,
            gamma0: 0.001,
            tau0: 0.001,
            rho1: 0.25,
            rho2: 0.25,
            rho3: 0.25,
            outer_iters: 10,
            epsilon_fixed: true,
            seed: 0,
        }
    }
}

impl HsfcConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidConfig(format!(
                "K must be at least 2, got {}",
                self.k
            )));
        }
        for (name, rho) in [
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("rho3", self.rho3),
        ] {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in (0, 1), got {rho}"
                )));
            }
        }
        if self.outer_iters == 0 {
            return Err(Error::InvalidConfig(
                "outer iteration budget must be at least 1".into(),
            ));
        }
        SmoothingParams::new(self.gamma0, self.tau0, self.epsilon).map(|_| ())
    }

    /// Smoothing parameters for outer steps `1..=N`, followed by the values
    /// after the last shrink (used for membership extraction).
    pub fn schedule(&self) -> Vec<SmoothingParams> {
        let mut prm = SmoothingParams {
            gamma: self.gamma0,
            tau: self.tau0,
            epsilon: self.epsilon,
        };
        let mut out = Vec::with_capacity(self.outer_iters + 1);
        out.push(prm);
        for _ in 0..self.outer_iters {
            prm.gamma *= self.rho1;
            prm.tau *= self.rho2;
            if !self.epsilon_fixed {
                prm.epsilon *= self.rho3;
            }
            out.push(prm);
        }
        out
    }
}

/// `K` distinct rows of `x`, chosen uniformly without replacement.
pub fn initial_centroids(x: &DataMatrix, k: usize, rng: &mut ChaCha8Rng) -> Result<CentroidMatrix> {
    if k == 0 || k > x.n() {
        return Err(Error::InvalidConfig(format!(
            "cannot pick {k} distinct rows from {} objects",
            x.n()
        )));
    }
    let picked = rand::seq::index::sample(rng, x.n(), k);
    let values: Vec<f64> = picked
        .iter()
        .flat_map(|i| x.row(i).iter().copied())
        .collect();
    CentroidMatrix::new(k, x.p(), values)
}

/// Fuzzy memberships from the roots of `h_i` at `G`.
///
/// Each row is divided by its realised sum `sum_k psi(z_i - theta_ik, tau)`,
/// which equals `epsilon` up to the root tolerance.
pub fn extract_memberships(
    x: &DataMatrix,
    g: &CentroidMatrix,
    prm: &SmoothingParams,
) -> Result<MembershipMatrix> {
    check_p(x, g)?;
    prm.validate()?;
    let k = g.k();
    let mut mu = Vec::with_capacity(x.n() * k);
    let mut thetas = vec![0.0; k];
    for xi in x.rows() {
        let mut d2min = f64::INFINITY;
        for (t, gk) in thetas.iter_mut().zip(g.rows()) {
            let d2 = crate::data::squared_distance(xi, gk);
            d2min = d2min.min(d2);
            *t = (d2 + prm.gamma * prm.gamma).sqrt();
        }
        let (z, _, _) = solve_z_with_distances(&thetas, prm, d2min.sqrt())?;
        let start = mu.len();
        mu.extend(thetas.iter().map(|&t| psi(z - t, prm.tau)));
        let total: f64 = mu[start..].iter().sum();
        for v in &mut mu[start..] {
            *v = (*v / total).min(1.0);
        }
    }
    MembershipMatrix::new(x.n(), k, mu)
}

/// One seeded HSFC run.
pub fn hsfc_fit(x: &DataMatrix, cfg: &HsfcConfig) -> Result<ClusteringResult> {
    cfg.validate()?;
    if cfg.k > x.n() {
        return Err(Error::InvalidConfig(format!(
            "K = {} exceeds the number of objects {}",
            cfg.k,
            x.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut g = initial_centroids(x, cfg.k, &mut rng)?;
    let schedule = cfg.schedule();
    let mut trace = Vec::with_capacity(cfg.outer_iters);
    let mut diagnostics = Diagnostics::default();
    let mut last_status = Status::Converged;

    for (step, prm) in schedule[..cfg.outer_iters].iter().enumerate() {
        let out = minimize_smoothed(&g, x, prm)?;
        diagnostics.inner_iterations += out.iterations;
        diagnostics.max_root_iterations =
            diagnostics.max_root_iterations.max(out.max_root_iterations);
        match out.status {
            Status::Converged => {}
            Status::MaxIterations => diagnostics.warnings.push(format!(
                "outer step {}: inner iteration cap reached (|grad|_inf = {:e})",
                step + 1,
                out.grad_norm_inf
            )),
            Status::LineSearchFailed => diagnostics.warnings.push(format!(
                "outer step {}: line search failed (|grad|_inf = {:e})",
                step + 1,
                out.grad_norm_inf
            )),
        }
        last_status = out.status;
        trace.push(out.f);
        g = out.centroids;
    }
    diagnostics.converged = last_status == Status::Converged;

    let final_prm = schedule[cfg.outer_iters];
    let memberships = extract_memberships(x, &g, &final_prm)?;
    let objective = within_ss(x, &memberships, &g)?;
    Ok(ClusteringResult {
        centroids: g,
        memberships,
        objective,
        objective_trace: trace,
        iterations: cfg.outer_iters,
        seed: cfg.seed,
        method: Method::Hsfc,
        diagnostics,
    })
}
