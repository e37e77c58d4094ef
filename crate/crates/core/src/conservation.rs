//! Extensive charges and conservation audits.
//!
//! A single-subsystem observable `A` lifts to `A^TOT = Σ_j 1⊗…⊗A⊗…⊗1`. Any
//! permutation of identical subsystems commutes with every such total, which
//! is what makes the partial-SWAP steps charge conserving.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::linalg::{self, CMatrix, SPECTRAL_TOL};
use crate::operators::{DensityOperator, Unitary};

/// Default cap on the dimension of lifted operators.
pub const DEFAULT_MAX_DIM: usize = 256;

/// Hermitian charge on one subsystem.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensiveObservable {
    matrix: CMatrix,
    label: String,
}

impl ExtensiveObservable {
    pub fn new(label: impl Into<String>, matrix: CMatrix) -> Result<Self> {
        linalg::square_dim(&matrix)?;
        if !linalg::is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let dev = linalg::hermitian_deviation(&matrix);
        if dev > SPECTRAL_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self {
            matrix: linalg::hermitian_part(&matrix),
            label: label.into(),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn to_json(&self) -> ObservableJson {
        ObservableJson {
            label: self.label.clone(),
            matrix: MatrixJson::from(&self.matrix),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableJson {
    pub label: String,
    pub matrix: MatrixJson,
}

/// `A^TOT` on `n` copies of the subsystem.
pub fn lift_extensive(a: &ExtensiveObservable, n: usize) -> Result<CMatrix> {
    lift_extensive_with_cap(a, n, DEFAULT_MAX_DIM)
}

pub fn lift_extensive_with_cap(a: &ExtensiveObservable, n: usize, max_dim: usize) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("cannot lift onto zero subsystems".into()));
    }
    let d = a.dim();
    let total = (0..n)
        .try_fold(1usize, |acc, _| acc.checked_mul(d))
        .filter(|&t| t <= max_dim)
        .ok_or(Error::Capacity {
            dim: d.saturating_pow(n as u32),
            cap: max_dim,
        })?;
    let id = linalg::identity(d);
    let mut out = CMatrix::zeros(total, total);
    for slot in 0..n {
        let factors: Vec<&CMatrix> = (0..n).map(|j| if j == slot { &a.matrix } else { &id }).collect();
        out += linalg::tensor_all(factors);
    }
    Ok(out)
}

/// `Σ_{j ∈ slots} 1⊗…⊗A⊗…⊗1` on a space factored as `dims`, for charges
/// carried by only some subsystem types.
pub fn lift_on_slots(a: &ExtensiveObservable, dims: &[usize], slots: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    let mut out = CMatrix::zeros(total, total);
    for &slot in slots {
        match dims.get(slot) {
            Some(&d) if d == a.dim() => {}
            Some(&d) => {
                return Err(Error::DimensionMismatch {
                    expected: a.dim(),
                    got: d,
                })
            }
            None => return Err(Error::InvalidArgument(format!("slot {slot} out of range"))),
        }
        let ids: Vec<CMatrix> = dims.iter().map(|&d| linalg::identity(d)).collect();
        let factors: Vec<&CMatrix> = (0..dims.len())
            .map(|j| if j == slot { &a.matrix } else { &ids[j] })
            .collect();
        out += linalg::tensor_all(factors);
    }
    Ok(out)
}

/// `‖V·A − A·V‖`; zero means `V` conserves `A`.
pub fn commutator_norm(v: &Unitary, a_tot: &CMatrix) -> Result<f64> {
    linalg::check_same_dim(v.matrix(), a_tot)?;
    Ok(linalg::operator_norm(&linalg::commutator(v.matrix(), a_tot)))
}

/// Number of copies of a `d`-dimensional subsystem making up `state`.
fn copies(state: &DensityOperator, d: usize) -> Result<usize> {
    let dims = state.subsystem_dims();
    if dims.iter().all(|&k| k == d) {
        return Ok(dims.len());
    }
    let mut n = 0;
    let mut total = 1usize;
    while total < state.dim() {
        total *= d;
        n += 1;
    }
    if total != state.dim() || d < 2 {
        return Err(Error::DimensionMismatch {
            expected: total,
            got: state.dim(),
        });
    }
    Ok(n)
}

/// `tr(A^TOT·after) − tr(A^TOT·before)`.
pub fn audit_evolution(before: &DensityOperator, after: &DensityOperator, a: &ExtensiveObservable) -> Result<f64> {
    linalg::check_same_dim(before.matrix(), after.matrix())?;
    let n = copies(before, a.dim())?;
    let total = lift_extensive_with_cap(a, n, usize::MAX)?;
    Ok(after.expectation(&total)? - before.expectation(&total)?)
}
