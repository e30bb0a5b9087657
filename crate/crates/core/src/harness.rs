//! Seeded restarts and the FCM-vs-HSFC comparison protocol.
//!
//! Restart `r` of a run with base seed `s` uses seed `s + r`, so any single
//! restart can be reproduced in isolation. Restarts run in parallel; the
//! winner is the restart with the smallest within-class sum of squares,
//! lowest restart index on ties, so the outcome does not depend on the
//! number of worker threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::evaluation::{adjusted_rand_index, crisp, within_ss, HardPartition};
use crate::fcm::{fcm_fit, FcmConfig};
use crate::hsfc::{hsfc_fit, HsfcConfig};
use crate::result::{ClusteringResult, Method};

#[derive(Debug, Clone, PartialEq)]
pub enum MethodConfig {
    Fcm(FcmConfig),
    Hsfc(HsfcConfig),
}

impl MethodConfig {
    pub fn method(&self) -> Method {
        match self {
            MethodConfig::Fcm(_) => Method::Fcm,
            MethodConfig::Hsfc(_) => Method::Hsfc,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            MethodConfig::Fcm(c) => c.k,
            MethodConfig::Hsfc(c) => c.k,
        }
    }

    fn with_seed(&self, seed: u64) -> Self {
        match self {
            MethodConfig::Fcm(c) => MethodConfig::Fcm(FcmConfig { seed, ..c.clone() }),
            MethodConfig::Hsfc(c) => MethodConfig::Hsfc(HsfcConfig { seed, ..c.clone() }),
        }
    }

    pub fn fit(&self, x: &DataMatrix) -> Result<ClusteringResult> {
        match self {
            MethodConfig::Fcm(c) => fcm_fit(x, c),
            MethodConfig::Hsfc(c) => hsfc_fit(x, c),
        }
    }
}

/// Per-restart record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartOutcome {
    pub seed: u64,
    /// The method's own objective, `None` if the restart failed.
    pub objective: Option<f64>,
    /// Within-class sum of squares, `None` if the restart failed.
    pub wp: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BestOf {
    pub best: ClusteringResult,
    pub best_wp: f64,
    pub best_index: usize,
    pub restarts: Vec<RestartOutcome>,
}

pub fn restart_seeds(base: u64, restarts: usize) -> Vec<u64> {
    (0..restarts as u64).map(|r| base.wrapping_add(r)).collect()
}

/// Runs `restarts` seeded fits and keeps the one with the smallest W(P),
/// lowest restart index on ties.
///
/// Failed restarts are recorded; the run fails only if every restart does.
pub fn run_restarts(
    x: &DataMatrix,
    cfg: &MethodConfig,
    restarts: usize,
    base_seed: u64,
) -> Result<BestOf> {
    if restarts == 0 {
        return Err(Error::InvalidConfig(
            "at least one restart is required".into(),
        ));
    }
    let seeds = restart_seeds(base_seed, restarts);
    let fits: Vec<Result<(ClusteringResult, f64)>> = seeds
        .par_iter()
        .map(|&seed| {
            let r = cfg.with_seed(seed).fit(x)?;
            let wp = within_ss(x, &r.memberships, &r.centroids)?;
            Ok((r, wp))
        })
        .collect();

    let mut outcomes = Vec::with_capacity(restarts);
    let mut best: Option<(usize, ClusteringResult, f64)> = None;
    let mut last_error = String::new();
    for (index, (seed, fit)) in seeds.iter().zip(fits).enumerate() {
        match fit {
            Ok((r, wp)) => {
                outcomes.push(RestartOutcome {
                    seed: *seed,
                    objective: Some(r.objective),
                    wp: Some(wp),
                    error: None,
                });
                if best.as_ref().is_none_or(|(_, _, b)| wp < *b) {
                    best = Some((index, r, wp));
                }
            }
            Err(e) => {
                last_error = e.to_string();
                outcomes.push(RestartOutcome {
                    seed: *seed,
                    objective: None,
                    wp: None,
                    error: Some(last_error.clone()),
                });
            }
        }
    }
    let (best_index, best, best_wp) = best.ok_or(Error::AllRestartsFailed(restarts, last_error))?;
    Ok(BestOf {
        best,
        best_wp,
        best_index,
        restarts: outcomes,
    })
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub table: String,
    pub k: usize,
    pub ss_hsfc: f64,
    pub ss_fcm: f64,
    /// ARI between the two crisped best partitions.
    pub ari: f64,
    pub ari_hsfc_truth: Option<f64>,
    pub ari_fcm_truth: Option<f64>,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str = "table,K,SS_HSFC,SS_FCM,ARI,ARI_HSFC_truth,ARI_FCM_truth";

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| format!("{v:?}")).unwrap_or_default();
        format!(
            "{},{},{:?},{:?},{:?},{},{}",
            self.table,
            self.k,
            self.ss_hsfc,
            self.ss_fcm,
            self.ari,
            opt(self.ari_hsfc_truth),
            opt(self.ari_fcm_truth)
        )
    }
}

/// Best-of-`restarts` for both methods on one dataset and one `K`.
pub fn compare(
    table: &str,
    x: &DataMatrix,
    truth: Option<&HardPartition>,
    fcm: &FcmConfig,
    hsfc: &HsfcConfig,
    restarts: usize,
    seed: u64,
) -> Result<BenchRow> {
    let h = run_restarts(x, &MethodConfig::Hsfc(hsfc.clone()), restarts, seed)?;
    let f = run_restarts(x, &MethodConfig::Fcm(fcm.clone()), restarts, seed)?;
    let (ph, pf) = (crisp(&h.best.memberships), crisp(&f.best.memberships));
    let vs_truth = |p: &HardPartition| truth.map(|t| adjusted_rand_index(p, t)).transpose();
    Ok(BenchRow {
        table: table.to_owned(),
        k: hsfc.k,
        ss_hsfc: h.best_wp,
        ss_fcm: f.best_wp,
        ari: adjusted_rand_index(&ph, &pf)?,
        ari_hsfc_truth: vs_truth(&ph)?,
        ari_fcm_truth: vs_truth(&pf)?,
    })
}
