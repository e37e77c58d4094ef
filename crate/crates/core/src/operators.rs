//! Validated operator newtypes: density operators and unitaries.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, eigenvalues_unchecked, hermitian_deviation, hermitian_part, is_finite, square_dim, trace, CMatrix,
    SPECTRAL_TOL,
};

/// Positive, unit-trace operator on a (possibly composite) Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    subsystem_dims: Vec<usize>,
}

impl DensityOperator {
    /// Validates a single-factor density operator.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = square_dim(&matrix)?;
        Self::with_dims(matrix, vec![d])
    }

    /// Validates a density operator on a space factored as `subsystem_dims`.
    pub fn with_dims(matrix: CMatrix, subsystem_dims: Vec<usize>) -> Result<Self> {
        let d = square_dim(&matrix)?;
        let total: usize = subsystem_dims.iter().product();
        if subsystem_dims.is_empty() || total != d {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: d,
            });
        }
        if !is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let dev = hermitian_deviation(&matrix);
        if dev > SPECTRAL_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > SPECTRAL_TOL || tr.im.abs() > SPECTRAL_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = eigenvalues_unchecked(&matrix)[0];
        if min < -SPECTRAL_TOL {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min:e} is negative")));
        }
        Ok(Self::from_trusted(matrix, subsystem_dims))
    }

    /// Wraps the output of a trace-preserving channel without re-validating.
    ///
    /// The Hermitian part is rescaled to unit trace. Without this, rounding
    /// in long chains of channels shifts the trace by a few ulp per step, and
    /// every later partial trace carries that factor into charge balances.
    pub(crate) fn from_trusted(matrix: CMatrix, subsystem_dims: Vec<usize>) -> Self {
        debug_assert_eq!(subsystem_dims.iter().product::<usize>(), matrix.nrows());
        let h = hermitian_part(&matrix);
        let tr = trace(&h).re;
        Self {
            matrix: if tr == 1.0 { h } else { h / Complex64::new(tr, 0.0) },
            subsystem_dims,
        }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalised) nonzero vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(amplitudes);
        let norm = v.norm();
        if amplitudes.is_empty() || !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState("state vector must be finite and nonzero".into()));
        }
        let v = v / Complex64::new(norm, 0.0);
        let d = amplitudes.len();
        Ok(Self::from_trusted(&v * v.adjoint(), vec![d]))
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis_state(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of range for d={d}"
            )));
        }
        let mut m = CMatrix::zeros(d, d);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Ok(Self::from_trusted(m, vec![d]))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_trusted(linalg::identity(d) / Complex64::new(d as f64, 0.0), vec![d])
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.subsystem_dims
    }

    /// Same operator, regarded as living on a differently factored space.
    pub fn reshaped(&self, subsystem_dims: Vec<usize>) -> Result<Self> {
        let total: usize = subsystem_dims.iter().product();
        if total != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: total,
            });
        }
        Ok(Self {
            matrix: self.matrix.clone(),
            subsystem_dims,
        })
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        let mut dims = self.subsystem_dims.clone();
        dims.extend_from_slice(&other.subsystem_dims);
        Self::from_trusted(linalg::tensor(&self.matrix, &other.matrix), dims)
    }

    /// Reduced state on the subsystems listed in `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let reduced = linalg::partial_trace(&self.matrix, &self.subsystem_dims, keep)?;
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        let dims = kept.iter().map(|&k| self.subsystem_dims[k]).collect();
        Ok(Self::from_trusted(reduced, dims))
    }

    /// `U·ρ·U†`.
    pub fn evolve(&self, u: &Unitary) -> Result<DensityOperator> {
        linalg::check_same_dim(&self.matrix, u.matrix())?;
        Ok(Self::from_trusted(
            u.matrix() * &self.matrix * u.matrix().adjoint(),
            self.subsystem_dims.clone(),
        ))
    }

    /// `tr(A·ρ)` for Hermitian `A`.
    pub fn expectation(&self, observable: &CMatrix) -> Result<f64> {
        linalg::check_same_dim(&self.matrix, observable)?;
        Ok(linalg::trace_product_re(observable, &self.matrix))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigenvalues_unchecked(&self.matrix)[0]
    }
}

/// Unitary operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary {
    matrix: CMatrix,
}

impl Unitary {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = square_dim(&matrix)?;
        if !is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let dev = linalg::operator_norm(&(&matrix * matrix.adjoint() - linalg::identity(d)));
        if dev > SPECTRAL_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_trusted(linalg::identity(d))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Unitary {
        Self::from_trusted(self.matrix.adjoint())
    }

    pub fn compose(&self, other: &Unitary) -> Result<Unitary> {
        linalg::check_same_dim(&self.matrix, other.matrix())?;
        Ok(Self::from_trusted(&self.matrix * other.matrix()))
    }

    pub fn tensor(&self, other: &Unitary) -> Unitary {
        Self::from_trusted(linalg::tensor(&self.matrix, &other.matrix))
    }

    /// `‖U·U† − 1‖`.
    pub fn unitarity_defect(&self) -> f64 {
        linalg::operator_norm(&(&self.matrix * self.matrix.adjoint() - linalg::identity(self.dim())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, pauli_x};

    #[test]
    fn rejects_invalid_states() {
        assert!(matches!(
            DensityOperator::new(diag(&[0.5, 0.4])),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            DensityOperator::new(diag(&[1.5, -0.5])),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            DensityOperator::new(pauli_x() * Complex64::new(0.0, 1.0)),
            Err(Error::NotHermitian(_))
        ));
        assert!(DensityOperator::with_dims(diag(&[0.5, 0.5]), vec![3]).is_err());
    }

    #[test]
    fn rejects_non_unitary() {
        assert!(matches!(Unitary::new(diag(&[1.0, 0.5])), Err(Error::NotUnitary(_))));
        assert!(Unitary::new(pauli_x()).is_ok());
    }

    #[test]
    fn reduced_product_state() {
        let a = DensityOperator::basis_state(2, 0).unwrap();
        let b = DensityOperator::maximally_mixed(3);
        let ab = a.tensor(&b);
        assert_eq!(ab.subsystem_dims(), &[2, 3]);
        let back = ab.partial_trace(&[1]).unwrap();
        assert!((back.matrix() - b.matrix()).norm() < 1e-14);
    }
}
