//! Row-compressed real matrices.
//!
//! Constructed networks are extremely sparse (most neurons read two or three
//! predecessors), so rows keep only their nonzero entries in ascending column
//! order. The public surface is dense: indexing, dense import and export, and
//! a dense serialized form.

use crate::error::{invalid, Result};

/// A `rows x cols` real matrix storing the nonzero entries of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(u32, f64)>>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Vec::new(); rows],
        }
    }

    /// Builds a matrix from dense rows. Every row must have `cols` entries.
    pub fn from_dense(cols: usize, dense: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(dense.len());
        for (i, row) in dense.iter().enumerate() {
            if row.len() != cols {
                return invalid(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                ));
            }
            data.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j as u32, *v))
                    .collect(),
            );
        }
        Ok(Matrix {
            rows: dense.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix from `(column, value)` lists. Entries are sorted,
    /// exact zeros dropped, and duplicate columns rejected.
    pub fn from_sparse_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len());
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|e| e.0);
            let mut out: Vec<(u32, f64)> = Vec::with_capacity(row.len());
            for (j, v) in row {
                if j >= cols {
                    return invalid(format!("row {i}: column {j} out of range (cols = {cols})"));
                }
                if let Some(last) = out.last() {
                    if last.0 as usize == j {
                        return invalid(format!("row {i}: duplicate column {j}"));
                    }
                }
                if v != 0.0 {
                    out.push((j as u32, v));
                }
            }
            data.push(out);
        }
        Ok(Matrix {
            rows: data.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Nonzero entries of row `i`, ascending by column.
    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.data[i].binary_search_by_key(&(j as u32), |e| e.0) {
            Ok(k) => self.data[i][k].1,
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.data
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; self.cols];
                for &(j, v) in row {
                    dense[j as usize] = v;
                }
                dense
            })
            .collect()
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    /// Number of rows holding at least one nonzero entry.
    pub fn nonzero_rows(&self) -> usize {
        self.data.iter().filter(|r| !r.is_empty()).count()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    pub(crate) fn all_finite(&self) -> bool {
        self.data.iter().flatten().all(|e| e.1.is_finite())
    }
}

/// Serializes as a dense row-major array of arrays without materializing it.
pub(crate) struct DenseRows<'a>(pub &'a Matrix);

struct DenseRow<'a> {
    row: &'a [(u32, f64)],
    cols: usize,
}

impl serde::Serialize for DenseRows<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.0.rows))?;
        for row in &self.0.data {
            seq.serialize_element(&DenseRow {
                row,
                cols: self.0.cols,
            })?;
        }
        seq.end()
    }
}

impl serde::Serialize for DenseRow<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.cols))?;
        let mut it = self.row.iter().peekable();
        for j in 0..self.cols {
            match it.peek() {
                Some(&&(c, v)) if c as usize == j => {
                    seq.serialize_element(&v)?;
                    it.next();
                }
                _ => seq.serialize_element(&0.0f64)?,
            }
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_drops_zeros() {
        let d = vec![vec![0.0, 1.5, 0.0], vec![-2.0, 0.0, 0.25]];
        let m = Matrix::from_dense(3, &d).unwrap();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(1, 2), 0.25);
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.to_dense(), d);
    }

    #[test]
    fn sparse_rows_sorted_and_checked() {
        let m = Matrix::from_sparse_rows(4, vec![vec![(3, 1.0), (0, 2.0)], vec![]]).unwrap();
        assert_eq!(m.row(0), &[(0, 2.0), (3, 1.0)]);
        assert_eq!(m.nonzero_rows(), 1);
        assert!(Matrix::from_sparse_rows(2, vec![vec![(2, 1.0)]]).is_err());
        assert!(Matrix::from_sparse_rows(2, vec![vec![(1, 1.0), (1, 2.0)]]).is_err());
    }

    #[test]
    fn dense_serialization() {
        let m = Matrix::from_sparse_rows(3, vec![vec![(1, 0.5)]]).unwrap();
        let s = serde_json::to_string(&DenseRows(&m)).unwrap();
        assert_eq!(s, "[[0.0,0.5,0.0]]");
    }
}
