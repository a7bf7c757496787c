//! Row-major JSON and plain-text forms of dense matrices.

use nalgebra::{DMatrix, Dim, Matrix, RawStorage};
use serde::ser::{SerializeSeq, Serializer};

/// Nested row-major arrays.
pub fn to_rows<R: Dim, C: Dim, S: RawStorage<f64, R, C>>(m: &Matrix<f64, R, C, S>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// One row per line, entries separated by single spaces.
pub fn to_plain_text(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.17e}", m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_plain_text(text: &str) -> Option<DMatrix<f64>> {
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|x| x.parse().ok()).collect::<Option<Vec<f64>>>())
        .collect::<Option<Vec<_>>>()?;
    from_rows(&rows)
}

/// `serde(with)` adapter for a single matrix.
pub mod rows {
    use super::*;

    pub fn serialize<R, C, St, S>(m: &Matrix<f64, R, C, St>, s: S) -> Result<S::Ok, S::Error>
    where
        R: Dim,
        C: Dim,
        St: RawStorage<f64, R, C>,
        S: Serializer,
    {
        serde::Serialize::serialize(&to_rows(m), s)
    }
}

/// `serde(with)` adapter for a list of matrices.
pub mod rows_vec {
    use super::*;

    pub fn serialize<R, C, St, S>(ms: &[Matrix<f64, R, C, St>], s: S) -> Result<S::Ok, S::Error>
    where
        R: Dim,
        C: Dim,
        St: RawStorage<f64, R, C>,
        S: Serializer,
    {
        let mut seq = s.serialize_seq(Some(ms.len()))?;
        for m in ms {
            seq.serialize_element(&to_rows(m))?;
        }
        seq.end()
    }
}
