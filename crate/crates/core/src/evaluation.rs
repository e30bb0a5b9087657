//! Comparison criteria: within-class sum of squares, crisping, and the
//! plain and chance-adjusted Rand indices.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::data::{squared_distance, validate_dims, CentroidMatrix, DataMatrix, MembershipMatrix};
use crate::error::{Error, Result};

/// A hard partition: one cluster id in `0..k` per object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardPartition {
    labels: Vec<usize>,
    k: usize,
}

impl HardPartition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Empty("partition has no objects".into()));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(Error::InvalidValue(format!(
                "label {l} at object {i} is not below {k}"
            )));
        }
        Ok(Self { labels, k })
    }

    /// Uses `max(label) + 1` as the cluster count.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(labels, k)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        let mut c = vec![0; self.k];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }
}

/// Reads a single-column label file; an optional non-numeric header line is skipped.
pub fn load_labels(path: impl AsRef<Path>) -> Result<HardPartition> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let cell = line.trim();
        if cell.is_empty() {
            continue;
        }
        match cell.parse::<usize>() {
            Ok(l) => labels.push(l),
            Err(_) if idx == 0 => continue,
            Err(_) => {
                return Err(Error::NonNumeric {
                    row: idx + 1,
                    column: 1,
                    value: cell.to_owned(),
                })
            }
        }
    }
    HardPartition::from_labels(labels)
}

pub fn write_labels(path: impl AsRef<Path>, partition: &HardPartition) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("label\n");
    for l in partition.labels() {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// `W(P) = sum_k sum_i mu_ik ||x_i - g_k||^2`, membership exponent 1.
pub fn within_ss(x: &DataMatrix, u: &MembershipMatrix, g: &CentroidMatrix) -> Result<f64> {
    validate_dims(x, g, u)?;
    let mut total = 0.0;
    for (xi, ui) in x.rows().zip(u.rows()) {
        for (gk, &mu) in g.rows().zip(ui) {
            if mu != 0.0 {
                total += mu * squared_distance(xi, gk);
            }
        }
    }
    Ok(total)
}

/// Sum of squares of a hard partition around its own class means.
pub fn partition_ss(x: &DataMatrix, partition: &HardPartition) -> Result<f64> {
    if x.n() != partition.len() {
        return Err(Error::DimensionMismatch {
            pair: "data/partition (n)",
            left: x.n(),
            right: partition.len(),
        });
    }
    let p = x.p();
    let mut means = vec![0.0; partition.k() * p];
    let counts = partition.cardinalities();
    for (xi, &l) in x.rows().zip(partition.labels()) {
        for (m, v) in means[l * p..(l + 1) * p].iter_mut().zip(xi) {
            *m += v;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            for m in &mut means[c * p..(c + 1) * p] {
                *m /= count as f64;
            }
        }
    }
    Ok(x.rows()
        .zip(partition.labels())
        .map(|(xi, &l)| squared_distance(xi, &means[l * p..(l + 1) * p]))
        .sum())
}

/// Argmax of each membership row, lowest index on ties.
pub fn crisp(u: &MembershipMatrix) -> HardPartition {
    let labels = u
        .rows()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, &v)| {
                    if v > best.1 {
                        (k, v)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect();
    HardPartition { labels, k: u.k() }
}

#[inline]
fn pairs(n: u64) -> u128 {
    let n = u128::from(n);
    n * n.saturating_sub(1) / 2
}

struct PairCounts {
    /// Pairs together in both partitions.
    both: u128,
    /// Pairs together in `a`.
    in_a: u128,
    /// Pairs together in `b`.
    in_b: u128,
    total: u128,
}

fn pair_counts(a: &HardPartition, b: &HardPartition) -> Result<PairCounts> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            pair: "partitions (n)",
            left: a.len(),
            right: b.len(),
        });
    }
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    for (&la, &lb) in a.labels().iter().zip(b.labels()) {
        *table.entry((la, lb)).or_insert(0) += 1;
    }
    let sum_pairs = |counts: Vec<usize>| counts.into_iter().map(|c| pairs(c as u64)).sum::<u128>();
    Ok(PairCounts {
        both: table.values().map(|&c| pairs(c)).sum(),
        in_a: sum_pairs(a.cardinalities()),
        in_b: sum_pairs(b.cardinalities()),
        total: pairs(a.len() as u64),
    })
}

/// Fraction of object pairs on which the two partitions agree.
///
/// A single object has no pairs; the index is then 1.
pub fn rand_index(a: &HardPartition, b: &HardPartition) -> Result<f64> {
    let c = pair_counts(a, b)?;
    if c.total == 0 {
        return Ok(1.0);
    }
    // together in both + apart in both
    let agree = c.total + 2 * c.both - c.in_a - c.in_b;
    Ok(agree as f64 / c.total as f64)
}

/// Hubert-Arabie adjusted Rand index from exact integer pair counts.
///
/// When the expected and maximum index coincide (both partitions all
/// singletons or both a single cluster) the result is 1 if the partitions
/// agree up to relabelling and 0 otherwise.
pub fn adjusted_rand_index(a: &HardPartition, b: &HardPartition) -> Result<f64> {
    let c = pair_counts(a, b)?;
    // Scale index, expectation and maximum by 2 * total to stay in integers.
    let (both, in_a, in_b, total) = (
        c.both as i128,
        c.in_a as i128,
        c.in_b as i128,
        c.total as i128,
    );
    let numerator = 2 * (both * total - in_a * in_b);
    let denominator = (in_a + in_b) * total - 2 * in_a * in_b;
    if denominator == 0 {
        return Ok(if same_up_to_relabeling(a, b) {
            1.0
        } else {
            0.0
        });
    }
    Ok(numerator as f64 / denominator as f64)
}

/// True when a bijection between cluster ids maps `a` onto `b`.
pub fn same_up_to_relabeling(a: &HardPartition, b: &HardPartition) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut forward = HashMap::new();
    let mut backward = HashMap::new();
    a.labels().iter().zip(b.labels()).all(|(&la, &lb)| {
        *forward.entry(la).or_insert(lb) == lb && *backward.entry(lb).or_insert(la) == la
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn part(labels: &[usize]) -> HardPartition {
        HardPartition::from_labels(labels.to_vec()).unwrap()
    }

    /// Pair-by-pair enumeration, independent of the contingency table.
    fn brute_force(a: &[usize], b: &[usize]) -> (f64, f64) {
        let n = a.len();
        let (mut agree, mut total) = (0u64, 0u64);
        let (mut both, mut in_a, mut in_b) = (0f64, 0f64, 0f64);
        for i in 0..n {
            for j in i + 1..n {
                let sa = a[i] == a[j];
                let sb = b[i] == b[j];
                total += 1;
                agree += u64::from(sa == sb);
                both += f64::from(u8::from(sa && sb));
                in_a += f64::from(u8::from(sa));
                in_b += f64::from(u8::from(sb));
            }
        }
        let t = total as f64;
        let expected = in_a * in_b / t;
        let max = 0.5 * (in_a + in_b);
        (agree as f64 / t, (both - expected) / (max - expected))
    }

    #[test]
    fn within_ss_examples() {
        let x = DataMatrix::new(2, 1, vec![0.0, 2.0]).unwrap();
        let g = CentroidMatrix::new(2, 1, vec![0.0, 2.0]).unwrap();
        let u = MembershipMatrix::new(2, 2, vec![0.9, 0.1, 0.1, 0.9]).unwrap();
        assert!((within_ss(&x, &u, &g).unwrap() - 0.8).abs() < 1e-15);

        let x = DataMatrix::new(4, 1, vec![0.0, 1.0, 5.0, 7.0]).unwrap();
        let part = part(&[0, 0, 1, 1]);
        let u = MembershipMatrix::from_labels(part.labels(), 2).unwrap();
        let g = CentroidMatrix::new(2, 1, vec![0.5, 6.0]).unwrap();
        assert_eq!(within_ss(&x, &u, &g).unwrap(), 2.5);
        assert_eq!(partition_ss(&x, &part).unwrap(), 2.5);

        let g3 = CentroidMatrix::new(3, 1, vec![0.0; 3]).unwrap();
        assert!(within_ss(&x, &u, &g3).is_err());
    }

    #[test]
    fn crisp_examples() {
        let u = MembershipMatrix::from_rows(&[vec![0.2, 0.7, 0.1], vec![0.5, 0.25, 0.25]]).unwrap();
        assert_eq!(crisp(&u).labels(), &[1, 0]);
        let u = MembershipMatrix::new(1, 2, vec![0.5, 0.5]).unwrap();
        assert_eq!(crisp(&u).labels(), &[0]);
        let hard = MembershipMatrix::from_labels(&[2, 0, 1, 1], 3).unwrap();
        assert_eq!(crisp(&hard).labels(), &[2, 0, 1, 1]);
    }

    #[test]
    fn rand_examples() {
        let a = part(&[0, 0, 1, 1]);
        let b = part(&[0, 1, 0, 1]);
        assert_eq!(rand_index(&a, &a).unwrap(), 1.0);
        assert!((rand_index(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((brute_force(a.labels(), b.labels()).0 - 1.0 / 3.0).abs() < 1e-15);
        assert!(rand_index(&a, &part(&[0, 1])).is_err());
    }

    #[test]
    fn ari_examples() {
        let a = part(&[0, 0, 1, 1]);
        assert_eq!(adjusted_rand_index(&a, &part(&[1, 1, 0, 0])).unwrap(), 1.0);
        let b = part(&[0, 1, 0, 1]);
        assert!((brute_force(a.labels(), b.labels()).1 + 0.5).abs() < 1e-12);
        assert_eq!(adjusted_rand_index(&a, &b).unwrap(), -0.5);
        assert!(adjusted_rand_index(&a, &part(&[0, 1, 0])).is_err());
    }

    #[test]
    fn ari_degenerate_cases() {
        let ones = part(&[0, 0, 0]);
        let singles = part(&[0, 1, 2]);
        assert_eq!(adjusted_rand_index(&ones, &ones).unwrap(), 1.0);
        assert_eq!(
            adjusted_rand_index(&singles, &part(&[2, 0, 1])).unwrap(),
            1.0
        );
        assert_eq!(adjusted_rand_index(&part(&[0]), &part(&[3])).unwrap(), 1.0);
        // one side degenerate only: ordinary formula applies and gives 0
        assert_eq!(adjusted_rand_index(&ones, &singles).unwrap(), 0.0);
    }

    #[test]
    fn labels_round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.csv");
        let p = part(&[0, 2, 1, 1]);
        write_labels(&path, &p).unwrap();
        assert_eq!(load_labels(&path).unwrap(), p);
    }

    fn relabel(labels: &[usize], perm: &[usize]) -> Vec<usize> {
        labels.iter().map(|&l| perm[l]).collect()
    }

    proptest! {
        #[test]
        fn indices_match_brute_force(
            a in proptest::collection::vec(0usize..4, 2..12),
            seed in proptest::collection::vec(0usize..4, 12),
        ) {
            let b: Vec<usize> = seed[..a.len()].to_vec();
            let (pa, pb) = (part(&a), part(&b));
            let (ri, ari) = brute_force(&a, &b);
            prop_assert!((rand_index(&pa, &pb).unwrap() - ri).abs() < 1e-12);
            let got = adjusted_rand_index(&pa, &pb).unwrap();
            if ari.is_finite() {
                prop_assert!((got - ari).abs() < 1e-12);
            }
            prop_assert!(got <= 1.0);
            prop_assert_eq!(got == 1.0, same_up_to_relabeling(&pa, &pb));
            // symmetry
            prop_assert_eq!(rand_index(&pb, &pa).unwrap(), rand_index(&pa, &pb).unwrap());
            prop_assert_eq!(adjusted_rand_index(&pb, &pa).unwrap(), got);
        }

        #[test]
        fn invariant_under_relabeling(
            a in proptest::collection::vec(0usize..3, 2..12),
            seed in proptest::collection::vec(0usize..3, 12),
            perm in Just(vec![2usize, 0, 1]),
        ) {
            let b: Vec<usize> = seed[..a.len()].to_vec();
            let (pa, pb) = (part(&a), part(&b));
            let pc = part(&relabel(&b, &perm));
            prop_assert_eq!(adjusted_rand_index(&pa, &pb).unwrap(), adjusted_rand_index(&pa, &pc).unwrap());
            prop_assert_eq!(rand_index(&pa, &pb).unwrap(), rand_index(&pa, &pc).unwrap());
        }

        #[test]
        fn crisp_is_scale_stable(
            rows in proptest::collection::vec(proptest::collection::vec(0.01f64..1.0, 3), 1..8),
            scale in 0.1f64..10.0,
        ) {
            let norm = |r: &Vec<f64>| { let s: f64 = r.iter().sum(); r.iter().map(|v| v / s).collect::<Vec<_>>() };
            let u = MembershipMatrix::from_rows(&rows.iter().map(norm).collect::<Vec<_>>()).unwrap();
            let scaled: Vec<Vec<f64>> = u.to_rows().iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
            let v = MembershipMatrix::from_rows(&scaled.iter().map(norm).collect::<Vec<_>>()).unwrap();
            prop_assert_eq!(crisp(&u), crisp(&v));
        }

        #[test]
        fn hard_within_ss_is_distance_to_label_centroid(
            labels in proptest::collection::vec(0usize..3, 1..10),
            coords in proptest::collection::vec(-5f64..5.0, 20),
        ) {
            let n = labels.len();
            let x = DataMatrix::new(n, 2, coords[..2 * n].to_vec()).unwrap();
            let g = CentroidMatrix::new(3, 2, vec![0.0, 1.0, -2.0, 0.5, 3.0, 3.0]).unwrap();
            let u = MembershipMatrix::from_labels(&labels, 3).unwrap();
            let direct: f64 = labels.iter().enumerate().map(|(i, &l)| squared_distance(x.row(i), g.row(l))).sum();
            prop_assert_eq!(within_ss(&x, &u, &g).unwrap(), direct);
        }
    }
}
