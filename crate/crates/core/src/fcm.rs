//! Bezdek's Fuzzy C-Means.
//!
//! Alternates the closed-form centroid update (weighted means with weights
//! `mu^m`) and the closed-form membership update until the fuzzy objective
//! stops improving.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{
    check_p, squared_distance, validate_dims, CentroidMatrix, DataMatrix, MembershipMatrix,
};
use crate::error::{Error, Result};
use crate::result::{ClusteringResult, Diagnostics, Method};

/// Squared distances below this are treated as an exact coincidence.
pub const COINCIDENCE_EPS: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcmConfig {
    pub k: usize,
    /// Fuzziness exponent, `m > 1`.
    pub m: f64,
    /// Absolute objective-improvement threshold.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl FcmConfig {
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
        if !(self.m.is_finite() && self.m > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "m must exceed 1, got {}",
                self.m
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for FcmConfig {
    fn default() -> Self {
        Self {
            k: 2,
            m: 2.0,
            tol: 1e-9,
            max_iter: 300,
            seed: 0,
        }
    }
}

/// `sum_i sum_k mu_ik^m ||x_i - g_k||^2`.
pub fn fcm_objective(
    x: &DataMatrix,
    u: &MembershipMatrix,
    g: &CentroidMatrix,
    m: f64,
) -> Result<f64> {
    validate_dims(x, g, u)?;
    let mut total = 0.0;
    for (xi, ui) in x.rows().zip(u.rows()) {
        for (gk, &mu) in g.rows().zip(ui) {
            if mu > 0.0 {
                total += mu.powf(m) * squared_distance(xi, gk);
            }
        }
    }
    Ok(total)
}

/// `g_k = sum_i mu_ik^m x_i / sum_i mu_ik^m`.
pub fn fcm_update_centroids(
    x: &DataMatrix,
    u: &MembershipMatrix,
    m: f64,
) -> Result<CentroidMatrix> {
    if x.n() != u.n() {
        return Err(Error::DimensionMismatch {
            pair: "data/memberships (n)",
            left: x.n(),
            right: u.n(),
        });
    }
    let (k, p) = (u.k(), x.p());
    let mut sums = vec![0.0; k * p];
    let mut weights = vec![0.0; k];
    for (xi, ui) in x.rows().zip(u.rows()) {
        for (c, &mu) in ui.iter().enumerate() {
            if mu == 0.0 {
                continue;
            }
            let w = mu.powf(m);
            weights[c] += w;
            for (s, v) in sums[c * p..(c + 1) * p].iter_mut().zip(xi) {
                *s += w * v;
            }
        }
    }
    for (c, &w) in weights.iter().enumerate() {
        if w.is_nan() || w <= 0.0 {
            return Err(Error::EmptyCluster { cluster: c });
        }
        for s in &mut sums[c * p..(c + 1) * p] {
            *s /= w;
        }
    }
    CentroidMatrix::new(k, p, sums)
}

/// `mu_ik = [sum_j (d_ik / d_ij)^(1/(m-1))]^-1` with squared distances `d`.
///
/// An object sitting on a centroid (squared distance below
/// [`COINCIDENCE_EPS`]) gets full membership in the nearest such centroid,
/// lowest index first.
pub fn fcm_update_memberships(
    x: &DataMatrix,
    g: &CentroidMatrix,
    m: f64,
) -> Result<MembershipMatrix> {
    check_p(x, g)?;
    let k = g.k();
    let exponent = 1.0 / (m - 1.0);
    let mut mu = vec![0.0; x.n() * k];
    let mut d2 = vec![0.0; k];
    for (xi, row) in x.rows().zip(mu.chunks_exact_mut(k)) {
        for (d, gk) in d2.iter_mut().zip(g.rows()) {
            *d = squared_distance(xi, gk);
        }
        let (nearest, dmin) =
            d2.iter()
                .copied()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |best, (c, d)| if d < best.1 { (c, d) } else { best },
                );
        if dmin < COINCIDENCE_EPS {
            row[nearest] = 1.0;
            continue;
        }
        // Ratios against the nearest centroid keep every weight in (0, 1].
        let mut total = 0.0;
        for (w, &d) in row.iter_mut().zip(&d2) {
            *w = (dmin / d).powf(exponent);
            total += *w;
        }
        for w in row.iter_mut() {
            *w /= total;
        }
    }
    MembershipMatrix::new(x.n(), k, mu)
}

/// Each row uniform on the probability simplex: K uniform draws, normalised.
pub fn random_memberships(n: usize, k: usize, rng: &mut impl Rng) -> Result<MembershipMatrix> {
    let mut mu = Vec::with_capacity(n * k);
    for _ in 0..n {
        let start = mu.len();
        // 1 - [0, 1) keeps every draw strictly positive
        mu.extend((0..k).map(|_| 1.0 - rng.gen::<f64>()));
        let total: f64 = mu[start..].iter().sum();
        for v in &mut mu[start..] {
            *v /= total;
        }
    }
    MembershipMatrix::new(n, k, mu)
}

/// One seeded FCM run from a random initial membership matrix.
pub fn fcm_fit(x: &DataMatrix, cfg: &FcmConfig) -> Result<ClusteringResult> {
    cfg.validate()?;
    if cfg.k > x.n() {
        return Err(Error::InvalidConfig(format!(
            "K = {} exceeds the number of objects {}",
            cfg.k,
            x.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut u = random_memberships(x.n(), cfg.k, &mut rng)?;
    let mut g;
    let mut trace = Vec::new();
    let mut prev = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    loop {
        iterations += 1;
        g = fcm_update_centroids(x, &u, cfg.m)?;
        u = fcm_update_memberships(x, &g, cfg.m)?;
        let objective = fcm_objective(x, &u, &g, cfg.m)?;
        trace.push(objective);
        // The objective is non-negative, so once it drops under tol no
        // further improvement can reach tol either.
        if prev - objective < cfg.tol || objective < cfg.tol {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }
        prev = objective;
    }
    let objective = *trace.last().expect("at least one iteration");
    Ok(ClusteringResult {
        centroids: g,
        memberships: u,
        objective,
        objective_trace: trace,
        iterations,
        seed: cfg.seed,
        method: Method::Fcm,
        diagnostics: Diagnostics {
            converged,
            ..Diagnostics::default()
        },
    })
}
