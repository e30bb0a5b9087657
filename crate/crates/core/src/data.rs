//! Matrix types shared by all clustering methods, plus CSV ingestion.
//!
//! All matrices are stored row-major in a flat `Vec<f64>`; every hot loop in
//! the crate walks objects in the outer loop and clusters in the inner loop.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Allowed deviation of a membership row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// An `n x p` matrix of finite observations; row `i` is object `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
    feature_names: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::Empty(format!(
                "data matrix must be non-empty, got {n}x{p}"
            )));
        }
        if values.len() != n * p {
            return Err(Error::InvalidValue(format!(
                "expected {} values for a {n}x{p} matrix, got {}",
                n * p,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "non-finite entry {} at row {}, column {}",
                values[pos],
                pos / p,
                pos % p
            )));
        }
        Ok(Self {
            n,
            p,
            values,
            feature_names: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::Ragged {
                row: i,
                expected: p,
                found: r.len(),
            });
        }
        Self::new(rows.len(), p, rows.concat())
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p {
            return Err(Error::DimensionMismatch {
                pair: "feature names/columns",
                left: names.len(),
                right: self.p,
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.p)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }
}

/// `K x p` cluster centers; row `k` is centroid `g_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidMatrix {
    k: usize,
    p: usize,
    values: Vec<f64>,
}

impl CentroidMatrix {
    pub fn new(k: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if k == 0 || p == 0 {
            return Err(Error::Empty(format!(
                "centroid matrix must be non-empty, got {k}x{p}"
            )));
        }
        if values.len() != k * p {
            return Err(Error::InvalidValue(format!(
                "expected {} values for a {k}x{p} centroid matrix, got {}",
                k * p,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("non-finite centroid coordinate".into()));
        }
        Ok(Self { k, p, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::Ragged {
                row: i,
                expected: p,
                found: r.len(),
            });
        }
        Self::new(rows.len(), p, rows.concat())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.p..(k + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.p)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }
}

/// `n x K` fuzzy memberships with entries in `[0, 1]` and unit row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    n: usize,
    k: usize,
    mu: Vec<f64>,
}

impl MembershipMatrix {
    /// Rejects entries outside `[0, 1]` and rows whose sum is off by more
    /// than [`ROW_SUM_TOLERANCE`].
    ///
    /// Column sums are not checked here: a single cluster (column sum `n`)
    /// and coincident centroids (an empty column) are legitimate results.
    /// Use [`MembershipMatrix::columns_nondegenerate`] for that condition.
    pub fn new(n: usize, k: usize, mu: Vec<f64>) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::Empty(format!(
                "membership matrix must be non-empty, got {n}x{k}"
            )));
        }
        if mu.len() != n * k {
            return Err(Error::InvalidValue(format!(
                "expected {} memberships for a {n}x{k} matrix, got {}",
                n * k,
                mu.len()
            )));
        }
        for (i, row) in mu.chunks_exact(k).enumerate() {
            if let Some(&bad) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidValue(format!(
                    "membership {bad} in row {i} lies outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidValue(format!(
                    "membership row {i} sums to {sum}, not 1"
                )));
            }
        }
        Ok(Self { n, k, mu })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != k) {
            return Err(Error::Ragged {
                row: i,
                expected: k,
                found: r.len(),
            });
        }
        Self::new(rows.len(), k, rows.concat())
    }

    /// Hard memberships from cluster labels.
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self> {
        let mut mu = vec![0.0; labels.len() * k];
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::InvalidValue(format!(
                    "label {l} at row {i} is not below {k}"
                )));
            }
            mu[i * k + l] = 1.0;
        }
        Self::new(labels.len(), k, mu)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.mu[i * self.k + k]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.mu[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.mu.chunks_exact(self.k)
    }

    pub fn values(&self) -> &[f64] {
        &self.mu
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.k];
        for row in self.rows() {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// Every column sum lies strictly inside `(0, n)`.
    pub fn columns_nondegenerate(&self) -> bool {
        let n = self.n as f64;
        self.column_sums().iter().all(|&s| s > 0.0 && s < n)
    }
}

/// Checks `X.p = G.p`, `X.n = U.n` and `G.K = U.K`.
pub fn validate_dims(x: &DataMatrix, g: &CentroidMatrix, u: &MembershipMatrix) -> Result<()> {
    if x.p() != g.p() {
        return Err(Error::DimensionMismatch {
            pair: "data/centroids (p)",
            left: x.p(),
            right: g.p(),
        });
    }
    if x.n() != u.n() {
        return Err(Error::DimensionMismatch {
            pair: "data/memberships (n)",
            left: x.n(),
            right: u.n(),
        });
    }
    if g.k() != u.k() {
        return Err(Error::DimensionMismatch {
            pair: "centroids/memberships (K)",
            left: g.k(),
            right: u.k(),
        });
    }
    Ok(())
}

pub(crate) fn check_p(x: &DataMatrix, g: &CentroidMatrix) -> Result<()> {
    if x.p() != g.p() {
        return Err(Error::DimensionMismatch {
            pair: "data/centroids (p)",
            left: x.p(),
            right: g.p(),
        });
    }
    Ok(())
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn delimiter_byte(delimiter: char) -> Result<u8> {
    u8::try_from(delimiter)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| {
            Error::InvalidValue(format!(
                "delimiter {delimiter:?} must be a single ASCII character"
            ))
        })
}

/// Reads a numeric CSV file into a [`DataMatrix`].
///
/// Rows and columns in error messages are 1-based and count the header line.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool, delimiter: char) -> Result<DataMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&bytes, has_header, delimiter)
}

pub fn parse_csv(bytes: &[u8], has_header: bool, delimiter: char) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .delimiter(delimiter_byte(delimiter)?)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let names = if has_header {
        let header = reader.headers().map_err(|e| Error::Csv(e.to_string()))?;
        Some(header.iter().map(str::to_owned).collect::<Vec<_>>())
    } else {
        None
    };
    let header_offset = usize::from(has_header);

    let mut p: Option<usize> = names.as_ref().map(Vec::len).filter(|&len| len > 0);
    let mut values = Vec::new();
    let mut n = 0;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let row = idx + 1 + header_offset;
        if record.len() == 1 && record[0].is_empty() {
            // blank line
            continue;
        }
        let expected = *p.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Ragged {
                row,
                expected,
                found: record.len(),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row,
                column: col + 1,
                value: cell.to_owned(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric {
                    row,
                    column: col + 1,
                    value: cell.to_owned(),
                });
            }
            values.push(v);
        }
        n += 1;
    }
    let p = match p {
        Some(p) if n > 0 => p,
        _ => return Err(Error::Empty("no data rows".into())),
    };
    let m = DataMatrix::new(n, p, values)?;
    match names {
        Some(names) => m.with_feature_names(names),
        None => Ok(m),
    }
}

/// Writes the matrix with shortest round-trip float formatting, so
/// [`load_csv`] recovers every value bit for bit.
pub fn write_csv(path: impl AsRef<Path>, x: &DataMatrix, delimiter: char) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    to_csv_bytes(&mut out, x, delimiter)?;
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn to_csv_bytes(out: &mut Vec<u8>, x: &DataMatrix, delimiter: char) -> Result<()> {
    let sep = delimiter_byte(delimiter)? as char;
    let sep = sep.to_string();
    if let Some(names) = x.feature_names() {
        writeln!(out, "{}", names.join(&sep)).expect("write to Vec");
    }
    for row in x.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", cells.join(&sep)).expect("write to Vec");
    }
    Ok(())
}
