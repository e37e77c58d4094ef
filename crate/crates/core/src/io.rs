//! JSON encoding of matrices as row-major `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// `[[[re, im], ...], ...]`, one inner list per row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if let Some(bad) = self.0.iter().find(|r| r.len() != cols) {
            return Err(Error::InvalidArgument(format!(
                "ragged matrix: row of length {} in a {cols}-column matrix",
                bad.len()
            )));
        }
        Ok(CMatrix::from_fn(rows, cols, |r, c| {
            let [re, im] = self.0[r][c];
            Complex64::new(re, im)
        }))
    }
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        MatrixJson(
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli_y;

    #[test]
    fn parses_row_major_pairs() {
        let m: MatrixJson = serde_json::from_str("[[[0,0],[0,-1]],[[0,1],[0,0]]]").unwrap();
        assert_eq!(m.to_matrix().unwrap(), pauli_y());
        assert_eq!(MatrixJson::from(&pauli_y()), m);
    }

    #[test]
    fn rejects_ragged() {
        let m: MatrixJson = serde_json::from_str("[[[1,0]],[[0,0],[1,0]]]").unwrap();
        assert!(m.to_matrix().is_err());
    }
}
