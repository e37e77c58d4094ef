//! Generalized thermal states with non-commuting charges, work accounting,
//! and the reference frame read as an explicit battery.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conservation::{lift_on_slots, ExtensiveObservable};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig_unchecked, operator_norm, von_neumann_entropy, CMatrix};
use crate::operators::{DensityOperator, Unitary};
use crate::protocol::ProtocolResult;

/// Slack for second-law margins.
pub const SECOND_LAW_SLACK: f64 = 1e-9;

/// Absolute slack on battery deviations, covering ledger round-off.
pub const LEDGER_SLACK: f64 = 1e-10;

/// Charges `A_i` with inverse temperatures `β_i`.
#[derive(Clone, Debug)]
pub struct ThermalSpec {
    charges: Vec<ExtensiveObservable>,
    betas: Vec<f64>,
}

impl ThermalSpec {
    pub fn new(charges: Vec<ExtensiveObservable>, betas: Vec<f64>) -> Result<Self> {
        if charges.is_empty() {
            return Err(Error::InvalidArgument("thermal spec needs at least one charge".into()));
        }
        if charges.len() != betas.len() {
            return Err(Error::InvalidArgument(format!(
                "{} charges but {} inverse temperatures",
                charges.len(),
                betas.len()
            )));
        }
        if betas.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("inverse temperatures must be finite".into()));
        }
        let d = charges[0].dim();
        if let Some(c) = charges.iter().find(|c| c.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: c.dim(),
            });
        }
        Ok(Self { charges, betas })
    }

    pub fn charges(&self) -> &[ExtensiveObservable] {
        &self.charges
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Single-subsystem dimension.
    pub fn dim(&self) -> usize {
        self.charges[0].dim()
    }

    /// `Σ β_i A_i`.
    pub fn exponent(&self) -> CMatrix {
        let d = self.dim();
        self.charges
            .iter()
            .zip(&self.betas)
            .fold(CMatrix::zeros(d, d), |acc, (c, &b)| {
                acc + c.matrix() * Complex64::new(b, 0.0)
            })
    }

    /// `Σ_i β_i A_i^TOT` on a state made of copies of the subsystem.
    fn weighted_total(&self, dims: &[usize]) -> Result<CMatrix> {
        let slots: Vec<usize> = (0..dims.len()).collect();
        let total: usize = dims.iter().product();
        self.charges
            .iter()
            .zip(&self.betas)
            .try_fold(CMatrix::zeros(total, total), |acc, (c, &b)| {
                Ok(acc + lift_on_slots(c, dims, &slots)? * Complex64::new(b, 0.0))
            })
    }
}

#[derive(Clone, Debug)]
pub struct ThermalState {
    pub state: DensityOperator,
    pub log_partition: f64,
}

/// `τ = exp(−Σβ_iA_i)/Z` from one eigendecomposition of the summed exponent.
pub fn thermal_state(spec: &ThermalSpec) -> ThermalState {
    let eig = hermitian_eig_unchecked(&spec.exponent());
    let shift = eig.values[0];
    let weights_sum: f64 = eig.values.iter().map(|l| (-(l - shift)).exp()).sum();
    let unnormalised = eig.map_spectrum(|l| Complex64::new((-(l - shift)).exp(), 0.0));
    ThermalState {
        state: DensityOperator::from_trusted(unnormalised / Complex64::new(weights_sum, 0.0), vec![spec.dim()]),
        log_partition: -shift + weights_sum.ln(),
    }
}

/// `F = Σ β_i ⟨A_i⟩ − S`, with charges lifted over every subsystem of `rho`.
pub fn free_entropy(rho: &DensityOperator, spec: &ThermalSpec) -> Result<f64> {
    let dims = subsystem_copies(rho, spec.dim())?;
    let k = spec.weighted_total(&dims)?;
    Ok(rho.expectation(&k)? - von_neumann_entropy(rho))
}

fn subsystem_copies(rho: &DensityOperator, d: usize) -> Result<Vec<usize>> {
    let dims = rho.subsystem_dims();
    if dims.iter().all(|&k| k == d) {
        Ok(dims.to_vec())
    } else if rho.dim() == d {
        Ok(vec![d])
    } else {
        Err(Error::DimensionMismatch {
            expected: d,
            got: rho.dim(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    Bath,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkRecord {
    pub labels: Vec<String>,
    /// Type-`A_i` work extracted, `−Δ⟨A_i^sys⟩ − Δ⟨A_i^bath⟩`.
    pub work: Vec<f64>,
    /// Change of the system's free entropy; zero without a system.
    pub delta_free_entropy: f64,
    /// `−Σ β_i W_i`; nonnegative for bath-only unitaries.
    pub margin_nosys: f64,
    /// `−ΔF_S − Σ β_i W_i`; nonnegative with a system present.
    pub margin_wsys: f64,
}

/// Work and second-law margins for a joint evolution of system and bath
/// subsystems, `roles[j]` naming the role of subsystem `j`.
pub fn work_accounting(
    before: &DensityOperator,
    after: &DensityOperator,
    roles: &[Role],
    spec: &ThermalSpec,
) -> Result<WorkRecord> {
    let dims = before.subsystem_dims();
    if after.subsystem_dims() != dims {
        return Err(Error::Partition(format!(
            "states factor as {dims:?} and {:?}",
            after.subsystem_dims()
        )));
    }
    if roles.len() != dims.len() {
        return Err(Error::Partition(format!(
            "{} roles for {} subsystems",
            roles.len(),
            dims.len()
        )));
    }
    if let Some(&bad) = dims.iter().find(|&&k| k != spec.dim()) {
        return Err(Error::Partition(format!(
            "subsystem of dimension {bad} does not carry the {}-dimensional charges",
            spec.dim()
        )));
    }
    let slots_of = |role: Role| -> Vec<usize> {
        roles
            .iter()
            .enumerate()
            .filter(|(_, &r)| r == role)
            .map(|(j, _)| j)
            .collect()
    };
    let system = slots_of(Role::System);
    let all: Vec<usize> = (0..dims.len()).collect();

    let mut work = Vec::with_capacity(spec.charges.len());
    for c in &spec.charges {
        let total = lift_on_slots(c, dims, &all)?;
        work.push(-(after.expectation(&total)? - before.expectation(&total)?));
    }

    let delta_free_entropy = if system.is_empty() {
        0.0
    } else {
        free_entropy(&after.partial_trace(&system)?, spec)? - free_entropy(&before.partial_trace(&system)?, spec)?
    };
    let weighted: f64 = spec.betas.iter().zip(&work).map(|(b, w)| b * w).sum();
    Ok(WorkRecord {
        labels: spec.charges.iter().map(|c| c.label().to_string()).collect(),
        work,
        delta_free_entropy,
        margin_nosys: -weighted,
        margin_wsys: -delta_free_entropy - weighted,
    })
}

/// Work of each charge in the implicit-battery picture: `W_i = −Δ⟨A_i⟩`
/// under the ideal unitary.
pub fn implicit_work(initial: &DensityOperator, target: &Unitary, charges: &[ExtensiveObservable]) -> Result<Vec<f64>> {
    let ideal = initial.evolve(target)?;
    charges
        .iter()
        .map(|c| Ok(initial.expectation(c.matrix())? - ideal.expectation(c.matrix())?))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryMargin {
    pub label: String,
    /// Charge deposited in the frame over the whole run.
    pub battery_delta: f64,
    pub implicit_work: f64,
    /// `|battery_delta − implicit_work|`.
    pub deviation: f64,
    /// `ε·‖A_i‖`.
    pub bound: f64,
    pub pass: bool,
}

/// Compares the frame's charge intake with the implicit work: the gap is at
/// most `ε·‖A_i^sys + A_i^bath‖` when the run has trace error `ε`.
///
/// `charges` are the ledger's charges, given on the full protocol system
/// (system plus bath).
pub fn battery_deviation_check(
    result: &ProtocolResult,
    implicit_work: &[f64],
    epsilon: f64,
    charges: &[ExtensiveObservable],
) -> Result<Vec<BatteryMargin>> {
    let ledger = &result.ledger;
    if ledger.labels.is_empty() {
        return Err(Error::MissingLedger);
    }
    for got in [implicit_work.len(), charges.len()] {
        if got != ledger.labels.len() {
            return Err(Error::DimensionMismatch {
                expected: ledger.labels.len(),
                got,
            });
        }
    }
    Ok(charges
        .iter()
        .zip(implicit_work)
        .zip(&ledger.cumulative_frame)
        .map(|((c, &w), &battery)| {
            let deviation = (battery - w).abs();
            let bound = epsilon * operator_norm(c.matrix());
            BatteryMargin {
                label: c.label().to_string(),
                battery_delta: battery,
                implicit_work: w,
                deviation,
                bound,
                pass: deviation <= bound + LEDGER_SLACK,
            }
        })
        .collect())
}
