//! Fuzzy clustering by Fuzzy C-Means and by hyperbolic smoothing.
//!
//! The crate is organised bottom-up:
//!
//! * [`data`] holds the matrix types shared by every method and CSV ingestion.
//! * [`fcm`] is Bezdek's alternating Fuzzy C-Means.
//! * [`smoothing`] is the hyperbolic smoothing kernel: the smoothing functions,
//!   the per-object root solves, the smoothed objective with its analytic
//!   gradient, and a quasi-Newton minimizer.
//! * [`hsfc`] drives the smoothing schedule and extracts fuzzy memberships.
//! * [`evaluation`] provides the within-class sum of squares, crisping and the
//!   (adjusted) Rand index.
//! * [`datagen`] regenerates the sixteen simulated Gaussian designs.
//! * [`harness`] runs seeded restarts and keeps the best result.
//! * [`cli`] is the command-line front end behind the `hsfc` binary.

pub mod cli;
pub mod data;
pub mod datagen;
pub mod error;
pub mod evaluation;
pub mod fcm;
pub mod harness;
pub mod hsfc;
pub mod result;
pub mod smoothing;

pub use data::{load_csv, validate_dims, CentroidMatrix, DataMatrix, MembershipMatrix};
pub use error::{Error, Result};
pub use evaluation::HardPartition;
pub use fcm::{fcm_fit, FcmConfig};
pub use hsfc::{hsfc_fit, HsfcConfig};
pub use result::{ClusteringResult, Diagnostics, Method};
pub use smoothing::SmoothingParams;
