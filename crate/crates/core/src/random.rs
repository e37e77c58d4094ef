//! Seeded random operators.
//!
//! Unitaries are Haar distributed: QR of a complex Gaussian matrix with the
//! phases of `R`'s diagonal folded into `Q`. Mixed states are normalised
//! Gaussian purifications, `G·G†/tr(G·G†)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMatrix};
use crate::operators::{DensityOperator, Unitary};

/// Deterministic source of random operators.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn complex_gaussian(&mut self) -> Complex64 {
        Complex64::new(self.gaussian(), self.gaussian())
    }

    /// Matrix of i.i.d. complex Gaussian entries.
    pub fn ginibre(&mut self, d: usize) -> CMatrix {
        CMatrix::from_fn(d, d, |_, _| self.complex_gaussian())
    }

    pub fn hermitian(&mut self, d: usize) -> CMatrix {
        let g = self.ginibre(d);
        (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
    }

    pub fn haar_unitary(&mut self, d: usize) -> Unitary {
        let qr = self.ginibre(d).qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..d {
            let rjj = r[(j, j)];
            let phase = if rjj.norm() > 0.0 {
                rjj / rjj.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
        }
        Unitary::from_trusted(q)
    }

    pub fn pure_state(&mut self, d: usize) -> DensityOperator {
        let v: Vec<Complex64> = (0..d).map(|_| self.complex_gaussian()).collect();
        DensityOperator::pure(&v).expect("gaussian vector is nonzero")
    }

    /// Mixed state from a Gaussian purification with a `d`-dimensional ancilla.
    pub fn density(&mut self, d: usize) -> DensityOperator {
        let g = self.ginibre(d);
        let m = &g * g.adjoint();
        let tr = linalg::trace(&m).re;
        DensityOperator::from_trusted(m / Complex64::new(tr, 0.0), vec![d])
    }

    /// Hermitian matrix with Haar eigenvectors and eigenvalues uniform in `(−π, π]`.
    pub fn principal_hermitian(&mut self, d: usize) -> CMatrix {
        let v = self.haar_unitary(d);
        let values: Vec<f64> = (0..d).map(|_| PI - 2.0 * PI * self.rng.random::<f64>()).collect();
        let h = v.matrix() * linalg::diag(&values) * v.matrix().adjoint();
        (&h + h.adjoint()) * Complex64::new(0.5, 0.0)
    }
}
