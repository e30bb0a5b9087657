//! Seeded generator for the sixteen simulated Gaussian designs `T1..T16`.
//!
//! Factors: number of objects (525 or 105), number of clusters (3 or 7),
//! cardinality (all equal, or one cluster holding half the objects) and
//! dispersion (unit SD everywhere, or SD 3 for cluster 0).
//!
//! Centers sit on the vertices of a regular polygon in the first two
//! coordinates, scaled so adjacent vertices are `separation` apart (for
//! `p = 1` they sit on a line with that spacing).
//!
//! Normal deviates come from the Box-Muller transform applied to pairs of
//! uniforms from a `ChaCha8` stream seeded with `seed_from_u64(seed)`; both
//! deviates of a pair are used, in order. Objects are emitted cluster by
//! cluster, coordinate by coordinate, so a given spec and seed produce the
//! same matrix on every platform.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::evaluation::HardPartition;

pub const DEFAULT_P: usize = 2;
pub const DEFAULT_SEPARATION: f64 = 10.0;
/// Standard deviation of the dispersed cluster in unequal-SD designs.
pub const WIDE_SD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub n: usize,
    pub k: usize,
    pub equal_card: bool,
    pub equal_sd: bool,
    pub p: usize,
    pub separation: f64,
    pub seed: u64,
}

impl TableSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidConfig(format!(
                "K must be at least 2, got {}",
                self.k
            )));
        }
        if self.p == 0 {
            return Err(Error::InvalidConfig("p must be at least 1".into()));
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "separation must be positive, got {}",
                self.separation
            )));
        }
        // every cluster needs at least one object
        if self.cardinalities().contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "n = {} is too small for K = {}",
                self.n, self.k
            )));
        }
        Ok(())
    }

    /// Objects per cluster.
    ///
    /// Equal designs split `n` evenly; unequal designs give cluster 0
    /// `round(n / 2)` objects and split the rest evenly. Leftover units go to
    /// the lowest-index clusters among those sharing the split.
    pub fn cardinalities(&self) -> Vec<usize> {
        if self.k == 0 {
            return Vec::new();
        }
        let split = |total: usize, parts: usize| -> Vec<usize> {
            (0..parts)
                .map(|i| total / parts + usize::from(i < total % parts))
                .collect()
        };
        if self.equal_card {
            split(self.n, self.k)
        } else {
            let large = (self.n as f64 / 2.0).round() as usize;
            let mut out = vec![large];
            out.extend(split(self.n.saturating_sub(large), self.k - 1));
            out
        }
    }

    /// Per-cluster standard deviation.
    pub fn sds(&self) -> Vec<f64> {
        (0..self.k)
            .map(|c| {
                if !self.equal_sd && c == 0 {
                    WIDE_SD
                } else {
                    1.0
                }
            })
            .collect()
    }

    /// Cluster centers, row-major `K x p`.
    pub fn centers(&self) -> Vec<Vec<f64>> {
        let k = self.k as f64;
        (0..self.k)
            .map(|c| {
                let mut center = vec![0.0; self.p];
                if self.p == 1 {
                    center[0] = c as f64 * self.separation;
                } else {
                    // adjacent vertices of a regular K-gon of radius R are 2R sin(pi/K) apart
                    let radius = self.separation / (2.0 * (PI / k).sin());
                    let angle = 2.0 * PI * c as f64 / k;
                    center[0] = radius * angle.cos();
                    center[1] = radius * angle.sin();
                }
                center
            })
            .collect()
    }
}

/// The factor combination behind a table code `T1..T16`.
pub fn spec_from_code(code: &str) -> Result<TableSpec> {
    let index: usize = code
        .trim()
        .strip_prefix(['T', 't'])
        .and_then(|s| s.parse().ok())
        .filter(|i| (1..=16).contains(i))
        .ok_or_else(|| Error::UnknownTable(code.to_owned()))?;
    // T1..T8 have equal cardinalities, T9..T16 unequal; within each half the
    // SD factor flips after four tables, then n after two, then K each table.
    let i = index - 1;
    Ok(TableSpec {
        n: if (i / 2).is_multiple_of(2) { 525 } else { 105 },
        k: if i.is_multiple_of(2) { 3 } else { 7 },
        equal_card: i < 8,
        equal_sd: (i / 4).is_multiple_of(2),
        p: DEFAULT_P,
        separation: DEFAULT_SEPARATION,
        seed: 0,
    })
}

struct Gaussian {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Gaussian {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn sample(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        // u1 in (0, 1] keeps the logarithm finite
        let u1 = 1.0 - self.rng.gen::<f64>();
        let u2 = self.rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// Draws the data matrix and its ground-truth labels.
pub fn generate(spec: &TableSpec) -> Result<(DataMatrix, HardPartition)> {
    spec.validate()?;
    let mut normal = Gaussian::new(spec.seed);
    let centers = spec.centers();
    let sds = spec.sds();
    let mut values = Vec::with_capacity(spec.n * spec.p);
    let mut labels = Vec::with_capacity(spec.n);
    for (c, &count) in spec.cardinalities().iter().enumerate() {
        for _ in 0..count {
            for &mu in &centers[c] {
                values.push(mu + sds[c] * normal.sample());
            }
            labels.push(c);
        }
    }
    let x = DataMatrix::new(labels.len(), spec.p, values)?;
    Ok((x, HardPartition::new(labels, spec.k)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_seed(code: &str, seed: u64) -> TableSpec {
        TableSpec {
            seed,
            ..spec_from_code(code).unwrap()
        }
    }

    #[test]
    fn table_codes() {
        let t1 = spec_from_code("T1").unwrap();
        assert_eq!(
            (t1.n, t1.k, t1.equal_card, t1.equal_sd),
            (525, 3, true, true)
        );
        let t16 = spec_from_code("T16").unwrap();
        assert_eq!(
            (t16.n, t16.k, t16.equal_card, t16.equal_sd),
            (105, 7, false, false)
        );
        assert!(matches!(spec_from_code("T0"), Err(Error::UnknownTable(_))));
        assert!(spec_from_code("T17").is_err());
        assert!(spec_from_code("X3").is_err());

        let expected = [
            (525, 3, true, true),
            (525, 7, true, true),
            (105, 3, true, true),
            (105, 7, true, true),
            (525, 3, true, false),
            (525, 7, true, false),
            (105, 3, true, false),
            (105, 7, true, false),
            (525, 3, false, true),
            (525, 7, false, true),
            (105, 3, false, true),
            (105, 7, false, true),
            (525, 3, false, false),
            (525, 7, false, false),
            (105, 3, false, false),
            (105, 7, false, false),
        ];
        for (i, e) in expected.iter().enumerate() {
            let s = spec_from_code(&format!("T{}", i + 1)).unwrap();
            assert_eq!((s.n, s.k, s.equal_card, s.equal_sd), *e, "T{}", i + 1);
        }
    }

    #[test]
    fn cardinality_rules() {
        assert_eq!(
            spec_from_code("T3").unwrap().cardinalities(),
            vec![35, 35, 35]
        );
        assert_eq!(
            spec_from_code("T9").unwrap().cardinalities(),
            vec![263, 131, 131]
        );
        assert_eq!(spec_from_code("T2").unwrap().cardinalities(), vec![75; 7]);
        assert_eq!(spec_from_code("T4").unwrap().cardinalities(), vec![15; 7]);
        assert_eq!(spec_from_code("T1").unwrap().cardinalities(), vec![175; 3]);
        // 105 -> 53 + 52 split over six clusters
        assert_eq!(
            spec_from_code("T12").unwrap().cardinalities(),
            vec![53, 9, 9, 9, 9, 8, 8]
        );
        for code in (1..=16).map(|i| format!("T{i}")) {
            let s = spec_from_code(&code).unwrap();
            assert_eq!(s.cardinalities().iter().sum::<usize>(), s.n);
        }
    }

    #[test]
    fn centers_are_separated() {
        for k in [3, 7] {
            let s = TableSpec {
                k,
                ..spec_from_code("T1").unwrap()
            };
            let c = s.centers();
            for a in 0..k {
                for b in a + 1..k {
                    let d = crate::data::squared_distance(&c[a], &c[b]).sqrt();
                    assert!(d >= s.separation - 1e-9, "{a},{b}: {d}");
                }
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let (a, la) = generate(&with_seed("T4", 1)).unwrap();
        let (b, lb) = generate(&with_seed("T4", 1)).unwrap();
        assert_eq!(la, lb);
        assert!(a
            .values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        let (c, _) = generate(&with_seed("T4", 2)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn truth_has_k_nonempty_clusters() {
        for i in 1..=16 {
            let spec = with_seed(&format!("T{i}"), 5);
            let (x, truth) = generate(&spec).unwrap();
            assert_eq!((x.n(), x.p()), (spec.n, 2));
            assert_eq!(truth.cardinalities(), spec.cardinalities());
            assert!(truth.cardinalities().iter().all(|&c| c > 0));
        }
    }

    #[test]
    fn sample_means_track_centers() {
        let mut hits = 0;
        let mut trials = 0;
        for code in ["T1", "T5", "T9", "T13"] {
            for seed in 0..100 {
                let spec = with_seed(code, seed);
                let (x, truth) = generate(&spec).unwrap();
                let centers = spec.centers();
                let sds = spec.sds();
                let cards = spec.cardinalities();
                for c in 0..spec.k {
                    let mut mean = vec![0.0; spec.p];
                    for (row, _) in x.rows().zip(truth.labels()).filter(|(_, &l)| l == c) {
                        for (m, v) in mean.iter_mut().zip(row) {
                            *m += v / cards[c] as f64;
                        }
                    }
                    let dist = crate::data::squared_distance(&mean, &centers[c]).sqrt();
                    trials += 1;
                    hits += usize::from(dist <= 4.0 * sds[c] / (cards[c] as f64).sqrt());
                }
            }
        }
        assert!(hits as f64 >= 0.99 * trials as f64, "{hits}/{trials}");
    }

    #[test]
    fn gaussian_moments() {
        let mut g = Gaussian::new(42);
        let draws: Vec<f64> = (0..200_000).map(|_| g.sample()).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / draws.len() as f64;
        assert!(
            mean.abs() < 0.01 && (var - 1.0).abs() < 0.01,
            "{mean} {var}"
        );
    }

    #[test]
    fn rejects_bad_specs() {
        let base = spec_from_code("T3").unwrap();
        assert!(generate(&TableSpec {
            k: 1,
            ..base.clone()
        })
        .is_err());
        assert!(generate(&TableSpec {
            p: 0,
            ..base.clone()
        })
        .is_err());
        assert!(generate(&TableSpec {
            separation: 0.0,
            ..base.clone()
        })
        .is_err());
        assert!(generate(&TableSpec { n: 2, ..base }).is_err());
    }
}
