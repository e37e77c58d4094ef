//! Implementing an arbitrary unitary with charge-conserving partial SWAPs.
//!
//! The system interacts, one at a time, with frame particles that are copies
//! of the system prepared in the basis states `σ_k`. Each interaction is
//! `V_α = exp(−i(α/N)·SWAP)`, which commutes with every extensive charge.
//! One block of `D` interactions acts on the system as `exp(−iH/N)` up to
//! `O(1/N²)`, so `N` blocks implement `U_S = exp(−iH)` up to `O(1/N)`.
//!
//! Each frame particle starts in a product state and is touched exactly once,
//! so the frame `⊗_t ⊗_k σ_k` is never materialised: every step runs on the
//! system plus one fresh particle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{decompose_generator, GeneratorDecomposition, OperatorBasis};
use crate::bounds::BoundReport;
use crate::conservation::ExtensiveObservable;
use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::linalg::{self, hermitian_eig_unchecked, principal_generator, trace_norm, CMatrix};
use crate::operators::{DensityOperator, Unitary};

/// `exp(−i(α/N)·SWAP) = cos(α/N)·1 − i·sin(α/N)·SWAP` on two `d`-level systems.
pub fn partial_swap(alpha: f64, n: usize, d: usize) -> Result<Unitary> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    Ok(involution_gate(linalg::swap_operator(d).matrix(), alpha / n as f64))
}

/// `exp(−iθP)` for an involution `P` (`P² = 1`).
fn involution_gate(p: &CMatrix, theta: f64) -> Unitary {
    if theta == 0.0 {
        return Unitary::identity(p.nrows());
    }
    let (s, c) = theta.sin_cos();
    Unitary::from_trusted(linalg::identity(p.nrows()) * Complex64::new(c, 0.0) + p * Complex64::new(0.0, -s))
}

/// System and frame-particle states after one interaction.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub system: DensityOperator,
    pub frame: DensityOperator,
}

/// Exact channel `tr_R[V_α (ρ ⊗ σ) V_α†]`, together with the frame particle's
/// reduced state.
pub fn step_channel(rho: &DensityOperator, sigma: &DensityOperator, alpha: f64, n: usize) -> Result<StepOutcome> {
    let d = rho.dim();
    if sigma.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: sigma.dim(),
        });
    }
    let v = partial_swap(alpha, n, d)?;
    if alpha == 0.0 {
        return Ok(StepOutcome {
            system: rho.clone(),
            frame: sigma.clone(),
        });
    }
    let joint = rho.reshaped(vec![d])?.tensor(&sigma.reshaped(vec![d])?).evolve(&v)?;
    Ok(StepOutcome {
        system: joint.partial_trace(&[0])?.reshaped(rho.subsystem_dims().to_vec())?,
        frame: joint.partial_trace(&[1])?.reshaped(sigma.subsystem_dims().to_vec())?,
    })
}

/// Charge bookkeeping for one interaction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Round index, starting at 1.
    pub round: usize,
    /// Basis slot, starting at 1.
    pub slot: usize,
    /// `Δ tr(A_i ρ_S)`, one entry per charge.
    pub system_delta: Vec<f64>,
    /// `tr(A_i (σ_out − σ_k))`, one entry per charge.
    pub frame_delta: Vec<f64>,
}

impl StepRecord {
    /// Largest `|system + frame|` change over charges; zero under exact conservation.
    pub fn closure(&self) -> f64 {
        self.system_delta
            .iter()
            .zip(&self.frame_delta)
            .fold(0.0, |a, (s, f)| a.max((s + f).abs()))
    }
}

/// Frame-as-battery record of every interaction.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BatteryLedger {
    pub labels: Vec<String>,
    pub steps: Vec<StepRecord>,
    /// Total charge deposited in the frame, per charge.
    pub cumulative_frame: Vec<f64>,
    /// Total change of the system's charge, per charge.
    pub cumulative_system: Vec<f64>,
}

impl BatteryLedger {
    pub fn new(charges: &[ExtensiveObservable]) -> Self {
        Self {
            labels: charges.iter().map(|c| c.label().to_string()).collect(),
            steps: Vec::new(),
            cumulative_frame: vec![0.0; charges.len()],
            cumulative_system: vec![0.0; charges.len()],
        }
    }

    pub fn push(&mut self, record: StepRecord) {
        for (acc, x) in self.cumulative_frame.iter_mut().zip(&record.frame_delta) {
            *acc += x;
        }
        for (acc, x) in self.cumulative_system.iter_mut().zip(&record.system_delta) {
            *acc += x;
        }
        self.steps.push(record);
    }

    pub fn max_closure_violation(&self) -> f64 {
        self.steps.iter().fold(0.0, |a, s| a.max(s.closure()))
    }
}

fn record_step(
    round: usize,
    slot: usize,
    before: &DensityOperator,
    sigma: &DensityOperator,
    out: &StepOutcome,
    charges: &[ExtensiveObservable],
) -> Result<StepRecord> {
    let mut system_delta = Vec::with_capacity(charges.len());
    let mut frame_delta = Vec::with_capacity(charges.len());
    for c in charges {
        system_delta.push(out.system.expectation(c.matrix())? - before.expectation(c.matrix())?);
        frame_delta.push(out.frame.expectation(c.matrix())? - sigma.expectation(c.matrix())?);
    }
    Ok(StepRecord {
        round,
        slot,
        system_delta,
        frame_delta,
    })
}

/// One block `V_seq = V_{α_D}^{(D)} ⋯ V_{α_1}^{(1)}`, each step with a fresh
/// particle in state `σ_k`, applied in slot order `1..D`.
pub fn apply_v_seq(
    rho: &DensityOperator,
    basis: &OperatorBasis,
    alphas: &[f64],
    n: usize,
    charges: &[ExtensiveObservable],
) -> Result<(DensityOperator, Vec<StepRecord>)> {
    let (state, records, _) = apply_block(rho, basis, alphas, n, charges, 1, false)?;
    Ok((state, records))
}

fn apply_block(
    rho: &DensityOperator,
    basis: &OperatorBasis,
    alphas: &[f64],
    n: usize,
    charges: &[ExtensiveObservable],
    round: usize,
    keep_frames: bool,
) -> Result<(DensityOperator, Vec<StepRecord>, Vec<DensityOperator>)> {
    if alphas.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            got: alphas.len(),
        });
    }
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: rho.dim(),
        });
    }
    if let Some(c) = charges.iter().find(|c| c.dim() != basis.dim()) {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: c.dim(),
        });
    }
    let mut state = rho.clone();
    let mut records = Vec::with_capacity(alphas.len());
    let mut frames = Vec::new();
    for (k, (&alpha, sigma)) in alphas.iter().zip(basis.states()).enumerate() {
        let out = step_channel(&state, sigma, alpha, n)?;
        records.push(record_step(round, k + 1, &state, sigma, &out, charges)?);
        if keep_frames {
            frames.push(out.frame.clone());
        }
        state = out.system;
    }
    Ok((state, records, frames))
}

/// Everything needed to run the protocol for one target unitary.
#[derive(Clone, Debug)]
pub struct ProtocolSpec {
    pub target: Unitary,
    /// Number of blocks `N`; also the `1/N` scale of every interaction.
    pub rounds: usize,
    pub basis: OperatorBasis,
    pub initial: DensityOperator,
    pub charges: Vec<ExtensiveObservable>,
    /// Keep every frame particle's final state in the result.
    pub keep_frame_states: bool,
}

impl ProtocolSpec {
    pub fn new(target: Unitary, rounds: usize, basis: OperatorBasis, initial: DensityOperator) -> Self {
        Self {
            target,
            rounds,
            basis,
            initial,
            charges: Vec::new(),
            keep_frame_states: false,
        }
    }

    pub fn with_charges(mut self, charges: Vec<ExtensiveObservable>) -> Self {
        self.charges = charges;
        self
    }

    pub fn with_rounds(&self, rounds: usize) -> Self {
        Self { rounds, ..self.clone() }
    }

    fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        let d = self.basis.dim();
        for got in [self.target.dim(), self.initial.dim()] {
            if got != d {
                return Err(Error::DimensionMismatch { expected: d, got });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolResult {
    pub final_state: DensityOperator,
    /// `‖ρ_t − U_H^t ρ U_H^{−t}‖₁` after each round `t = 1..N`.
    pub round_errors: Vec<f64>,
    /// `‖ρ_N − U_S ρ U_S†‖₁`.
    pub total_error: f64,
    pub bounds: BoundReport,
    pub decomposition: GeneratorDecomposition,
    pub ledger: BatteryLedger,
    /// `N` is below the threshold above which the bounds are proven.
    pub below_threshold: bool,
    pub frame_states: Option<Vec<DensityOperator>>,
}

impl ProtocolResult {
    pub fn analytic_bound(&self) -> f64 {
        self.bounds.total.value
    }

    /// Measured error exceeds a bound that is proven at this `N`.
    pub fn violates_bound(&self) -> bool {
        self.bounds.total.valid && self.total_error > self.bounds.total.value
    }

    pub fn to_report(&self) -> ProtocolReport {
        ProtocolReport {
            schema: 1,
            rounds: self.round_errors.len(),
            final_state: MatrixJson::from(self.final_state.matrix()),
            round_errors: self.round_errors.clone(),
            total_error: self.total_error,
            analytic_bound: self.bounds.total.value,
            bounds: self.bounds.clone(),
            below_threshold: self.below_threshold,
            decomposition: self.decomposition.clone(),
            ledger: self.ledger.clone(),
        }
    }
}

/// Serializable form of [`ProtocolResult`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub schema: u32,
    pub rounds: usize,
    pub final_state: MatrixJson,
    pub round_errors: Vec<f64>,
    pub total_error: f64,
    pub analytic_bound: f64,
    pub bounds: BoundReport,
    pub below_threshold: bool,
    pub decomposition: GeneratorDecomposition,
    pub ledger: BatteryLedger,
}

/// Runs `N` blocks, each on fresh frame particles, and compares every round
/// with the exact ideal evolution.
pub fn run_protocol(spec: &ProtocolSpec) -> Result<ProtocolResult> {
    spec.validate()?;
    let n = spec.rounds;
    let generator = principal_generator(&spec.target)?;
    let decomposition = decompose_generator(&generator, &spec.basis)?;
    let spectrum = hermitian_eig_unchecked(&generator);
    let rho0 = spec.initial.matrix();

    let mut ledger = BatteryLedger::new(&spec.charges);
    let mut frames = spec.keep_frame_states.then(Vec::new);
    let mut round_errors = Vec::with_capacity(n);
    let mut state = spec.initial.clone();
    for t in 1..=n {
        let (next, records, block_frames) = apply_block(
            &state,
            &spec.basis,
            &decomposition.alphas,
            n,
            &spec.charges,
            t,
            frames.is_some(),
        )?;
        records.into_iter().for_each(|r| ledger.push(r));
        if let Some(f) = frames.as_mut() {
            f.extend(block_frames);
        }
        state = next;
        let s = t as f64 / n as f64;
        let u_t = spectrum.map_spectrum(|l| Complex64::from_polar(1.0, -s * l));
        let ideal = &u_t * rho0 * u_t.adjoint();
        round_errors.push(trace_norm(&(state.matrix() - ideal)));
    }

    let target_state = spec.initial.evolve(&spec.target)?;
    let total_error = trace_norm(&(state.matrix() - target_state.matrix()));
    let bounds = BoundReport::new(
        spec.basis.len(),
        spec.basis.alpha_max(),
        decomposition.max_abs_alpha(),
        n,
    );
    Ok(ProtocolResult {
        final_state: state,
        round_errors,
        total_error,
        below_threshold: !bounds.all_valid(),
        bounds,
        decomposition,
        ledger,
        frame_states: frames,
    })
}

/// `exp(−i(α/N)·SWAP_{S_A,R_A}·SWAP_{S_B,R_B})` on `S_A ⊗ S_B ⊗ R_A ⊗ R_B`.
pub fn two_subsystem_gate(d_a: usize, d_b: usize, alpha: f64, n: usize) -> Result<Unitary> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let dims = [d_a, d_b, d_a, d_b];
    let swap_a = linalg::permutation_operator(&dims, &[2, 1, 0, 3])?;
    let swap_b = linalg::permutation_operator(&dims, &[0, 3, 2, 1])?;
    Ok(involution_gate(&(swap_a * swap_b), alpha / n as f64))
}

/// One composite interaction: `ρ_AB ⊗ σ_A ⊗ σ_B`, the two-subsystem gate,
/// then the frame pair traced out. To first order this rotates `ρ_AB` by
/// the generator `σ_A ⊗ σ_B`.
pub fn two_subsystem_step(
    rho_ab: &DensityOperator,
    sigma_a: &DensityOperator,
    sigma_b: &DensityOperator,
    alpha: f64,
    n: usize,
) -> Result<DensityOperator> {
    let (d_a, d_b) = (sigma_a.dim(), sigma_b.dim());
    if rho_ab.dim() != d_a * d_b {
        return Err(Error::DimensionMismatch {
            expected: d_a * d_b,
            got: rho_ab.dim(),
        });
    }
    let gate = two_subsystem_gate(d_a, d_b, alpha, n)?;
    let joint = rho_ab
        .reshaped(vec![d_a, d_b])?
        .tensor(&sigma_a.reshaped(vec![d_a])?)
        .tensor(&sigma_b.reshaped(vec![d_b])?);
    joint.evolve(&gate)?.partial_trace(&[0, 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_state_basis;
    use crate::bounds::single_step_bound;
    use crate::conservation::{commutator_norm, lift_extensive, lift_on_slots};
    use crate::linalg::{exp_neg_i, pauli_x, pauli_z, swap_operator};
    use crate::random::Sampler;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn plus() -> DensityOperator {
        let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
        DensityOperator::pure(&[a, a]).unwrap()
    }

    fn zero() -> DensityOperator {
        DensityOperator::basis_state(2, 0).unwrap()
    }

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// `c²ρ + s²σ − i·cs·[σ, ρ]`, the channel written out by hand.
    fn closed_form_step(rho: &CMatrix, sigma: &CMatrix, theta: f64) -> CMatrix {
        let (s, c) = theta.sin_cos();
        rho * Complex64::new(c * c, 0.0)
            + sigma * Complex64::new(s * s, 0.0)
            + linalg::commutator(sigma, rho) * Complex64::new(0.0, -c * s)
    }

    #[test]
    fn partial_swap_cases() {
        assert_eq!(partial_swap(0.0, 5, 2).unwrap().matrix(), &linalg::identity(4));
        let v = partial_swap(PI / 2.0, 1, 3).unwrap();
        assert!(max_abs(&(v.matrix() - swap_operator(3).matrix() * Complex64::new(0.0, -1.0))) < 1e-15);
        assert!(partial_swap(0.3, 7, 3).unwrap().unitarity_defect() < 1e-12);
        // matches the eigendecomposition route
        let exact = exp_neg_i(swap_operator(3).matrix(), 0.3 / 7.0).unwrap();
        assert!(max_abs(&(partial_swap(0.3, 7, 3).unwrap().matrix() - exact.matrix())) < 1e-14);
    }

    #[test]
    fn partial_swap_conserves_charges() {
        let mut s = Sampler::new(31);
        for d in [2, 3] {
            for _ in 0..10 {
                let a = ExtensiveObservable::new("A", s.hermitian(d)).unwrap();
                let v = partial_swap(s.uniform(-10.0, 10.0), 3, d).unwrap();
                assert!(commutator_norm(&v, &lift_extensive(&a, 2).unwrap()).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn step_channel_cases() {
        let mut s = Sampler::new(3);
        let rho = s.density(2);
        let sigma = s.density(2);
        let out = step_channel(&rho, &sigma, 0.0, 10).unwrap();
        assert!(max_abs(&(out.system.matrix() - rho.matrix())) < 1e-15);
        assert!(max_abs(&(out.frame.matrix() - sigma.matrix())) < 1e-15);

        let out = step_channel(&zero(), &zero(), 1.3, 2).unwrap();
        assert!(max_abs(&(out.system.matrix() - zero().matrix())) < 1e-15);
    }

    #[test]
    fn step_channel_matches_closed_form() {
        let mut s = Sampler::new(9);
        for d in [2, 3] {
            let rho = s.density(d);
            let sigma = s.density(d);
            let out = step_channel(&rho, &sigma, 0.7, 3).unwrap();
            let expect = closed_form_step(rho.matrix(), sigma.matrix(), 0.7 / 3.0);
            assert!(max_abs(&(out.system.matrix() - expect)) < 1e-14);
            // the frame sees the same channel with roles exchanged
            let expect = closed_form_step(sigma.matrix(), rho.matrix(), 0.7 / 3.0);
            assert!(max_abs(&(out.frame.matrix() - expect)) < 1e-14);
            for st in [&out.system, &out.frame] {
                assert!(DensityOperator::new(st.matrix().clone()).is_ok());
            }
        }
    }

    #[test]
    fn step_channel_worked_example() {
        let (alpha, n) = (1.0, 100);
        let out = step_channel(&plus(), &zero(), alpha, n).unwrap();
        let u = exp_neg_i(zero().matrix(), alpha / n as f64).unwrap();
        let err = trace_norm(&(out.system.matrix() - plus().evolve(&u).unwrap().matrix()));
        // frozen from an independent dense-expm evaluation
        assert_abs_diff_eq!(err, 1.1180023115794338e-4, epsilon = 1e-12);
        assert!(err <= single_step_bound(alpha, n).value);
    }

    #[test]
    fn step_channel_is_extensive() {
        let mut s = Sampler::new(12);
        let rho = s.density(3);
        let sigma = s.density(3);
        let a = s.hermitian(3);
        let out = step_channel(&rho, &sigma, 2.1, 5).unwrap();
        let before = rho.expectation(&a).unwrap() + sigma.expectation(&a).unwrap();
        let after = out.system.expectation(&a).unwrap() + out.frame.expectation(&a).unwrap();
        assert_abs_diff_eq!(before, after, epsilon = 1e-10);
    }

    #[test]
    fn step_channel_rejects_mismatch() {
        let r = step_channel(&zero(), &DensityOperator::maximally_mixed(3), 1.0, 2);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn v_seq_trivial_cases() {
        let b = build_state_basis(2).unwrap();
        let z = ExtensiveObservable::new("Z", pauli_z()).unwrap();
        let (out, records) = apply_v_seq(&plus(), &b, &[0.0; 3], 10, std::slice::from_ref(&z)).unwrap();
        assert_eq!(out.matrix(), plus().matrix());
        assert!(records
            .iter()
            .all(|r| r.system_delta[0] == 0.0 && r.frame_delta[0] == 0.0));

        let (out, _) = apply_v_seq(&plus(), &b, &[0.0, 0.4, 0.0], 10, &[]).unwrap();
        let single = step_channel(&plus(), &b.states()[1], 0.4, 10).unwrap();
        assert_eq!(out.matrix(), single.system.matrix());

        assert!(apply_v_seq(&plus(), &b, &[0.0; 2], 10, &[]).is_err());
    }

    #[test]
    fn v_seq_worked_example() {
        let b = build_state_basis(2).unwrap();
        let n = 200;
        let (out, _) = apply_v_seq(&plus(), &b, &[0.0, 0.0, PI], n, &[]).unwrap();
        let h = pauli_z() * Complex64::new(PI / 2.0, 0.0);
        let ideal = plus().evolve(&exp_neg_i(&h, 1.0 / n as f64).unwrap()).unwrap();
        let err = trace_norm(&(out.matrix() - ideal.matrix()));
        assert_abs_diff_eq!(err, 2.7584454453178443e-4, epsilon = 1e-12);
        assert!(err <= crate::bounds::block_bound(3, b.alpha_max(), n).value);
    }

    #[test]
    fn identity_target_is_exact() {
        let b = build_state_basis(2).unwrap();
        let z = ExtensiveObservable::new("Z", pauli_z()).unwrap();
        let spec = ProtocolSpec::new(Unitary::identity(2), 20, b, plus()).with_charges(vec![z]);
        let r = run_protocol(&spec).unwrap();
        assert_eq!(r.total_error, 0.0);
        assert!(r.ledger.cumulative_frame.iter().all(|&x| x == 0.0));
        assert!(r.decomposition.alphas.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn protocol_conserves_every_step() {
        let b = build_state_basis(2).unwrap();
        let z = ExtensiveObservable::new("Z", pauli_z()).unwrap();
        let target = exp_neg_i(&pauli_z(), PI / 4.0).unwrap();
        let spec = ProtocolSpec::new(target, 50, b, plus()).with_charges(vec![z]);
        let r = run_protocol(&spec).unwrap();
        assert_eq!(r.ledger.steps.len(), 150);
        assert!(r.ledger.max_closure_violation() <= 1e-10);
        assert!(r.below_threshold);
        assert_eq!(r.round_errors.len(), 50);
        assert_abs_diff_eq!(r.total_error, 0.05397571225397006, epsilon = 1e-10);
    }

    #[test]
    fn protocol_rejects_bad_spec() {
        let b = build_state_basis(2).unwrap();
        let spec = ProtocolSpec::new(Unitary::identity(3), 5, b.clone(), plus());
        assert!(run_protocol(&spec).is_err());
        let spec = ProtocolSpec::new(Unitary::identity(2), 0, b, plus());
        assert!(run_protocol(&spec).is_err());
    }

    #[test]
    fn keeps_frame_states_on_request() {
        let b = build_state_basis(2).unwrap();
        let mut spec = ProtocolSpec::new(exp_neg_i(&pauli_x(), 0.5).unwrap(), 4, b, zero());
        spec.keep_frame_states = true;
        let r = run_protocol(&spec).unwrap();
        assert_eq!(r.frame_states.unwrap().len(), 12);
    }

    #[test]
    fn frame_locality() {
        // S ⊗ R1 ⊗ R2 simulated in full versus two sequential steps
        let mut s = Sampler::new(41);
        let rho = s.density(2);
        let sigma = s.density(2);
        let (alpha, n) = (0.9, 2);
        let full = rho.tensor(&sigma).tensor(&sigma);
        let v = partial_swap(alpha, n, 2).unwrap();
        let v1 = v.tensor(&Unitary::identity(2));
        let p = linalg::permutation_operator(&[2, 2, 2], &[0, 2, 1]).unwrap();
        let v2 = Unitary::new(&p * v1.matrix() * &p).unwrap();
        let out = full
            .evolve(&v1)
            .unwrap()
            .evolve(&v2)
            .unwrap()
            .partial_trace(&[0])
            .unwrap();

        let first = step_channel(&rho, &sigma, alpha, n).unwrap().system;
        let second = step_channel(&first, &sigma, alpha, n).unwrap().system;
        assert!(max_abs(&(out.matrix() - second.matrix())) < 1e-12);
    }

    #[test]
    fn two_subsystem_gate_structure() {
        let g = two_subsystem_gate(2, 2, 0.0, 3).unwrap();
        assert_eq!(g.matrix(), &linalg::identity(16));
        // SWAP_{SA,RA}·SWAP_{SB,RB} is the swap of the AB pair with the frame pair
        let theta: f64 = 0.37;
        let g = two_subsystem_gate(2, 3, theta, 1).unwrap();
        let pair = swap_operator(6);
        let expected =
            linalg::identity(36) * Complex64::new(theta.cos(), 0.0) + pair.matrix() * Complex64::new(0.0, -theta.sin());
        assert!(max_abs(&(g.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn two_subsystem_gate_conserves() {
        let mut s = Sampler::new(8);
        let g = two_subsystem_gate(2, 3, 1.7, 4).unwrap();
        let a = ExtensiveObservable::new("a", s.hermitian(2)).unwrap();
        let b = ExtensiveObservable::new("b", s.hermitian(3)).unwrap();
        let dims = [2, 3, 2, 3];
        let total = lift_on_slots(&a, &dims, &[0, 2]).unwrap() + lift_on_slots(&b, &dims, &[1, 3]).unwrap();
        assert!(commutator_norm(&g, &total).unwrap() <= 1e-12);
    }

    #[test]
    fn two_subsystem_step_cases() {
        let mut s = Sampler::new(5);
        let rho = s.density(4).reshaped(vec![2, 2]).unwrap();
        let sig = DensityOperator::new((linalg::identity(2) + pauli_z()) * Complex64::new(0.5, 0.0)).unwrap();
        let out = two_subsystem_step(&rho, &sig, &sig, 0.0, 10).unwrap();
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-15);

        let (alpha, n) = (1.0, 100);
        let out = two_subsystem_step(&rho, &sig, &sig, alpha, n).unwrap();
        assert!(DensityOperator::new(out.matrix().clone()).is_ok());
        let gen = linalg::tensor(sig.matrix(), sig.matrix());
        let ideal = rho.evolve(&exp_neg_i(&gen, alpha / n as f64).unwrap()).unwrap();
        assert!(trace_norm(&(out.matrix() - ideal.matrix())) <= single_step_bound(alpha, n).value);
        assert!(two_subsystem_step(&rho, &sig, &DensityOperator::maximally_mixed(3), 1.0, 2).is_err());
    }
}
