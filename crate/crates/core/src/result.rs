use serde::{Deserialize, Serialize};

use crate::data::{CentroidMatrix, MembershipMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fcm,
    Hsfc,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Fcm => "fcm",
            Method::Hsfc => "hsfc",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Solver bookkeeping attached to a fit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Whether the stopping test was met before the iteration budget ran out.
    pub converged: bool,
    /// Total inner (quasi-Newton) iterations; zero for FCM.
    pub inner_iterations: usize,
    /// Largest per-object root-solve iteration count seen.
    pub max_root_iterations: usize,
    /// Non-fatal problems, e.g. a line search that could not make progress.
    pub warnings: Vec<String>,
}

/// Output of a single fit.
///
/// `objective` is the method's own criterion at the returned `(G, U)`: the
/// fuzzy objective with exponent `m` for FCM and the within-class sum of
/// squares for HSFC.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub centroids: CentroidMatrix,
    pub memberships: MembershipMatrix,
    pub objective: f64,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
    pub method: Method,
    pub diagnostics: Diagnostics,
}
