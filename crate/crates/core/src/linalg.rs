//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Every matrix function (exponential, principal logarithm, entropy, norms of
//! Hermitian operators) goes through an explicit eigendecomposition. No series
//! are truncated anywhere in this module, so channels built on top of it are
//! exact up to solver precision.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{DensityOperator, Unitary};

/// Dense complex matrix used for every operator in the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Tolerance for exact algebraic identities (permutations, partial traces).
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for spectral round trips and state validation.
pub const SPECTRAL_TOL: f64 = 1e-10;
/// Tolerance for exponential/logarithm round trips.
pub const EXP_LOG_TOL: f64 = 1e-9;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(v, 0.0)),
    ))
}

pub(crate) fn square_dim(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    Ok(m.nrows())
}

pub(crate) fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<usize> {
    let d = square_dim(a)?;
    let e = square_dim(b)?;
    if d != e {
        return Err(Error::DimensionMismatch { expected: d, got: e });
    }
    Ok(d)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entrywise deviation of `m` from its adjoint.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn require_hermitian(m: &CMatrix) -> Result<usize> {
    let d = square_dim(m)?;
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    let dev = hermitian_deviation(m);
    if dev > SPECTRAL_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    Ok(d)
}

/// Kronecker product with the index of `a` running slowest.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, first factor slowest.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Real part of `tr(a·b)`, computed without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Offsets into the full index space for every multi-index over `factors`.
fn offsets(dims: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let mut out = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * dims[f]);
        for &base in &out {
            for digit in 0..dims[f] {
                next.push(base + digit * strides[f]);
            }
        }
        out = next;
    }
    out
}

/// Trace out every subsystem not listed in `keep`.
///
/// Kept subsystems appear in the result in their original order, whatever
/// order `keep` lists them in.
pub fn partial_trace(o: &CMatrix, subsystem_dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let n = square_dim(o)?;
    if subsystem_dims.contains(&0) {
        return Err(Error::InvalidArgument("subsystem dimension 0".into()));
    }
    let total: usize = subsystem_dims.iter().product();
    if total != n {
        return Err(Error::DimensionMismatch {
            expected: total,
            got: n,
        });
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&k| k >= subsystem_dims.len()) {
        return Err(Error::InvalidArgument(format!(
            "subsystem index {bad} out of range for {} subsystems",
            subsystem_dims.len()
        )));
    }
    let traced: Vec<usize> = (0..subsystem_dims.len()).filter(|k| !kept.contains(k)).collect();
    let kept_off = offsets(subsystem_dims, &kept);
    let traced_off = offsets(subsystem_dims, &traced);
    let m = kept_off.len();
    Ok(CMatrix::from_fn(m, m, |r, c| {
        traced_off.iter().map(|&t| o[(kept_off[r] + t, kept_off[c] + t)]).sum()
    }))
}

/// Operator that moves the factor at position `k` to position `perm[k]`.
pub fn permutation_operator(subsystem_dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    let n = subsystem_dims.len();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidArgument(format!(
            "{perm:?} is not a permutation of 0..{n}"
        )));
    }
    let mut out_dims = vec![0; n];
    for (k, &p) in perm.iter().enumerate() {
        out_dims[p] = subsystem_dims[k];
    }
    let total: usize = subsystem_dims.iter().product();
    let mut out_strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        out_strides[k] = out_strides[k + 1] * out_dims[k + 1];
    }
    let mut p = CMatrix::zeros(total, total);
    let mut digits = vec![0usize; n];
    for col in 0..total {
        let mut rem = col;
        for k in (0..n).rev() {
            digits[k] = rem % subsystem_dims[k];
            rem /= subsystem_dims[k];
        }
        let row: usize = (0..n).map(|k| digits[k] * out_strides[perm[k]]).sum();
        p[(row, col)] = ONE;
    }
    Ok(p)
}

/// `SWAP = Σ_ij |ij⟩⟨ji|` on two copies of a `d`-dimensional space.
pub fn swap_operator(d: usize) -> Unitary {
    let m = permutation_operator(&[d, d], &[1, 0]).expect("valid permutation");
    Unitary::from_trusted(m)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `V·diag(f(λ))·V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let fl = f(l);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fl);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|l| Complex64::new(l, 0.0))
    }
}

pub fn hermitian_eig(h: &CMatrix) -> Result<HermitianEigen> {
    require_hermitian(h)?;
    Ok(hermitian_eig_unchecked(&hermitian_part(h)))
}

pub(crate) fn hermitian_eig_unchecked(h: &CMatrix) -> HermitianEigen {
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(h.nrows(), h.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen { values, vectors }
}

pub(crate) fn eigenvalues_unchecked(h: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(h).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `exp(−i·s·H)` for Hermitian `H`.
pub fn exp_neg_i(h: &CMatrix, s: f64) -> Result<Unitary> {
    let d = require_hermitian(h)?;
    if s == 0.0 {
        return Ok(Unitary::identity(d));
    }
    let eig = hermitian_eig_unchecked(&hermitian_part(h));
    Ok(Unitary::from_trusted(
        eig.map_spectrum(|l| Complex64::from_polar(1.0, -s * l)),
    ))
}

/// Hermitian `H` with `U = exp(−iH)` and every eigenvalue in `(−π, π]`.
pub fn principal_generator(u: &Unitary) -> Result<CMatrix> {
    let d = u.dim();
    let (q, t) = nalgebra::linalg::Schur::try_new(u.matrix().clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?
        .unpack();
    let phases: Vec<Complex64> = (0..d)
        .map(|k| {
            let mut h = -t[(k, k)].arg();
            if h <= -PI + ALGEBRAIC_TOL {
                h = PI;
            }
            Complex64::new(h, 0.0)
        })
        .collect();
    let mut scaled = q.clone();
    for (j, &p) in phases.iter().enumerate() {
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= p);
    }
    Ok(hermitian_part(&(scaled * q.adjoint())))
}

fn singular_values(o: &CMatrix) -> Vec<f64> {
    o.clone().singular_values().iter().copied().collect()
}

fn is_numerically_hermitian(o: &CMatrix) -> bool {
    o.nrows() == o.ncols() && hermitian_deviation(o) <= ALGEBRAIC_TOL
}

/// Sum of singular values.
pub fn trace_norm(o: &CMatrix) -> f64 {
    if is_numerically_hermitian(o) {
        eigenvalues_unchecked(o).iter().map(|l| l.abs()).sum()
    } else {
        singular_values(o).iter().sum()
    }
}

/// Largest singular value.
pub fn operator_norm(o: &CMatrix) -> f64 {
    if is_numerically_hermitian(o) {
        eigenvalues_unchecked(o).iter().fold(0.0, |acc, l| acc.max(l.abs()))
    } else {
        singular_values(o).into_iter().fold(0.0, f64::max)
    }
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(o: &CMatrix) -> f64 {
    o.norm()
}

/// `‖ρ − σ‖₁`, the unnormalised trace distance.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_same_dim(rho.matrix(), sigma.matrix())?;
    Ok(trace_norm(&(rho.matrix() - sigma.matrix())))
}

/// Entropy in nats; negative eigenvalues are clamped to zero.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    eigenvalues_unchecked(rho.matrix())
        .into_iter()
        .map(|p| p.max(0.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}
