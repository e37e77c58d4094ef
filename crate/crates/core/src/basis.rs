//! Operator bases made of density operators plus the identity.
//!
//! A system of dimension `d` needs `D = d² − 1` states `σ_k` which, together
//! with the identity, span the real space of Hermitian operators. Generator
//! coefficients are read off with the dual basis, `α_k = tr(H·σ̃_k)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::linalg::{self, eigenvalues_unchecked, hs_norm, trace_product_re, CMatrix, EXP_LOG_TOL, I, ONE};
use crate::operators::DensityOperator;

/// Largest Gram condition number accepted by [`dual_basis`].
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Minimum eigenvalue floor for the default basis states.
const POSITIVITY_FLOOR: f64 = 1e-9;

/// Generalized Gell-Mann matrices: symmetric, then antisymmetric, then diagonal.
///
/// They are traceless, Hermitian, mutually orthogonal, with `tr(λ_k²) = 2`.
/// For `d = 2` this is `(X, Y, Z)`.
pub fn gell_mann(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = ONE;
            m[(k, j)] = ONE;
            out.push(m);
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = -I;
            m[(k, j)] = I;
            out.push(m);
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = Complex64::new(norm, 0.0);
        }
        m[(l, l)] = Complex64::new(-(l as f64) * norm, 0.0);
        out.push(m);
    }
    out
}

/// Dual of a linearly independent set of Hermitian operators under the
/// Hilbert–Schmidt inner product: `tr(e_k·dual_l) = δ_kl`.
pub fn dual_basis(elements: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let n = elements.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    for e in &elements[1..] {
        linalg::check_same_dim(&elements[0], e)?;
    }
    let gram = DMatrix::<f64>::from_fn(n, n, |k, l| trace_product_re(&elements[k], &elements[l]));
    let spectrum = gram.clone().symmetric_eigenvalues();
    let largest = spectrum.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let smallest = spectrum.iter().fold(f64::INFINITY, |a, l| a.min(l.abs()));
    let condition = if smallest > 0.0 {
        largest / smallest
    } else {
        f64::INFINITY
    };
    if condition.is_nan() || condition > MAX_GRAM_CONDITION {
        return Err(Error::DegenerateBasis(condition));
    }
    let inverse = gram.try_inverse().ok_or(Error::DegenerateBasis(f64::INFINITY))?;
    let d = elements[0].nrows();
    Ok((0..n)
        .map(|l| {
            elements.iter().enumerate().fold(CMatrix::zeros(d, d), |acc, (m, e)| {
                acc + e * Complex64::new(inverse[(l, m)], 0.0)
            })
        })
        .collect())
}

/// `{1} ∪ {σ_k}` together with its dual basis and coefficient bound.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    dim: usize,
    sigma: Vec<DensityOperator>,
    dual: Vec<CMatrix>,
    alpha_max: f64,
}

impl OperatorBasis {
    /// Basis from `d² − 1` states; fails if they do not span with the identity.
    pub fn from_states(sigma: Vec<DensityOperator>) -> Result<Self> {
        let dim = sigma
            .first()
            .map(DensityOperator::dim)
            .ok_or_else(|| Error::InvalidArgument("empty basis".into()))?;
        if sigma.len() != dim * dim - 1 {
            return Err(Error::InvalidArgument(format!(
                "a basis for d={dim} needs {} states, got {}",
                dim * dim - 1,
                sigma.len()
            )));
        }
        let mut elements = vec![linalg::identity(dim)];
        for s in &sigma {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: s.dim(),
                });
            }
            elements.push(s.matrix().clone());
        }
        let dual = dual_basis(&elements)?;
        let d_count = sigma.len();
        let max_dual = dual[1..].iter().map(hs_norm).fold(0.0, f64::max);
        Ok(Self {
            dim,
            sigma,
            dual,
            alpha_max: (d_count as f64).sqrt() * PI * max_dual,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of states, `D = d² − 1`.
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.sigma
    }

    /// Dual operators; index 0 is dual to the identity, index `k` to `σ_k`.
    pub fn dual(&self) -> &[CMatrix] {
        &self.dual
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = BasisDocument {
            schema: 1,
            dimension: self.dim,
            elements: self.sigma.iter().map(|s| MatrixJson::from(s.matrix())).collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BasisDocument = serde_json::from_str(text)?;
        if doc.schema != 1 {
            return Err(Error::InvalidArgument(format!(
                "unsupported basis schema {}",
                doc.schema
            )));
        }
        let states = doc
            .elements
            .iter()
            .map(|m| DensityOperator::new(m.to_matrix()?))
            .collect::<Result<Vec<_>>>()?;
        let basis = Self::from_states(states)?;
        if basis.dim != doc.dimension {
            return Err(Error::DimensionMismatch {
                expected: doc.dimension,
                got: basis.dim,
            });
        }
        Ok(basis)
    }
}

#[derive(Serialize, Deserialize)]
struct BasisDocument {
    schema: u32,
    dimension: usize,
    elements: Vec<MatrixJson>,
}

/// Default basis `σ_k = (1 + r·λ_k)/d` built on the generalized Gell-Mann
/// matrices, with `r` the largest scale keeping every `σ_k` positive.
pub fn build_state_basis(d: usize) -> Result<OperatorBasis> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("basis needs d >= 2, got {d}")));
    }
    let generators = gell_mann(d);
    // 1 + r·λ ≥ 0 iff r ≤ 1/|λ_min|
    let r = generators
        .iter()
        .map(|g| -eigenvalues_unchecked(g)[0])
        .map(|neg_min| 1.0 / neg_min)
        .fold(f64::INFINITY, f64::min);
    let id = linalg::identity(d);
    let scale = Complex64::new(1.0 / d as f64, 0.0);
    let states = generators
        .iter()
        .map(|g| {
            let m = (&id + g * Complex64::new(r, 0.0)) * scale;
            let min = eigenvalues_unchecked(&m)[0];
            if min < -POSITIVITY_FLOOR {
                return Err(Error::Numerical(format!("basis state has eigenvalue {min:e}")));
            }
            Ok(DensityOperator::from_trusted(m, vec![d]))
        })
        .collect::<Result<Vec<_>>>()?;
    OperatorBasis::from_states(states)
}

/// `H = c·1 + Σ α_k σ_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorDecomposition {
    pub alphas: Vec<f64>,
    /// Global-phase part; reported, never applied.
    pub identity_coefficient: f64,
    /// Hilbert–Schmidt norm of `H − c·1 − Σ α_k σ_k`.
    pub residual: f64,
}

impl GeneratorDecomposition {
    pub fn max_abs_alpha(&self) -> f64 {
        self.alphas.iter().fold(0.0, |a, x| a.max(x.abs()))
    }
}

/// Coefficients of a principal generator in the basis.
///
/// `h` must be Hermitian with spectrum in `(−π, π]` (up to `1e-9`), which is
/// what guarantees `|α_k| ≤ α_max`.
pub fn decompose_generator(h: &CMatrix, basis: &OperatorBasis) -> Result<GeneratorDecomposition> {
    let eig = linalg::hermitian_eig(h)?;
    if h.nrows() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: h.nrows(),
        });
    }
    let lo = eig.values[0];
    let hi = eig.values[eig.values.len() - 1];
    if lo < -PI - EXP_LOG_TOL || hi > PI + EXP_LOG_TOL {
        return Err(Error::InvalidArgument(format!(
            "generator spectrum [{lo}, {hi}] leaves (-pi, pi]"
        )));
    }
    let coefficient = |k: usize| trace_product_re(h, &basis.dual()[k]);
    let identity_coefficient = coefficient(0);
    let alphas: Vec<f64> = (1..=basis.len()).map(coefficient).collect();
    let mut rebuilt = linalg::identity(basis.dim()) * Complex64::new(identity_coefficient, 0.0);
    for (a, s) in alphas.iter().zip(basis.states()) {
        rebuilt += s.matrix() * Complex64::new(*a, 0.0);
    }
    Ok(GeneratorDecomposition {
        alphas,
        identity_coefficient,
        residual: hs_norm(&(h - rebuilt)),
    })
}

/// `√D·π·max_k ‖σ̃_k‖₂`.
pub fn alpha_max_bound(basis: &OperatorBasis) -> f64 {
    basis.alpha_max()
}
