//! Browser bindings for the qubit case. Every export takes plain numbers and
//! returns a JSON string; `www/index.html` draws the results on a canvas.

use num_complex::Complex64;
use qframe::basis::decompose_generator;
use qframe::bounds::convergence_sweep;
use qframe::linalg::{exp_neg_i, pauli_x, pauli_y, pauli_z, principal_generator, trace_norm, CMatrix};
use qframe::protocol::apply_v_seq;
use qframe::thermo::{thermal_state, work_accounting, Role};
use qframe::{
    build_state_basis, BoundReport, DensityOperator, ExtensiveObservable, ProtocolSpec, Sampler, ThermalSpec,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Rounds and sweep lengths are capped to keep the page responsive.
pub const MAX_ROUNDS: usize = 4000;

fn axis(theta: f64, phi: f64) -> CMatrix {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    pauli_x() * Complex64::new(st * cp, 0.0)
        + pauli_y() * Complex64::new(st * sp, 0.0)
        + pauli_z() * Complex64::new(ct, 0.0)
}

fn bloch_state(theta: f64, phi: f64) -> qframe::Result<DensityOperator> {
    let (s, c) = (theta / 2.0).sin_cos();
    DensityOperator::pure(&[Complex64::new(c, 0.0), Complex64::from_polar(s, phi)])
}

fn bloch(rho: &DensityOperator) -> [f64; 3] {
    let e = |m: CMatrix| rho.expectation(&m).unwrap_or(0.0);
    [e(pauli_x()), e(pauli_y()), e(pauli_z())]
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[derive(Serialize)]
struct Trajectory {
    rounds: usize,
    protocol: Vec<[f64; 3]>,
    ideal: Vec<[f64; 3]>,
    alphas: Vec<f64>,
    total_error: f64,
    bounds: BoundReport,
    /// Cumulative change of `⟨X⟩, ⟨Y⟩, ⟨Z⟩` in the frame, per round.
    frame_charge: Vec<[f64; 3]>,
}

/// Bloch-sphere path of the system under the protocol for
/// `U = exp(−i·angle·n̂·σ)`, next to the ideal path `exp(−i·angle·(t/N)·n̂·σ)`.
pub fn trajectory_json(
    axis_theta: f64,
    axis_phi: f64,
    angle: f64,
    rounds: usize,
    init_theta: f64,
    init_phi: f64,
) -> Result<String, String> {
    if rounds == 0 || rounds > MAX_ROUNDS {
        return Err(format!("rounds must be in 1..={MAX_ROUNDS}"));
    }
    let g = axis(axis_theta, axis_phi);
    let target = exp_neg_i(&g, angle).map_err(err)?;
    let h = principal_generator(&target).map_err(err)?;
    let basis = build_state_basis(2).map_err(err)?;
    let dec = decompose_generator(&h, &basis).map_err(err)?;
    let charges: Vec<ExtensiveObservable> = [("X", pauli_x()), ("Y", pauli_y()), ("Z", pauli_z())]
        .into_iter()
        .map(|(l, m)| ExtensiveObservable::new(l, m))
        .collect::<Result<_, _>>()
        .map_err(err)?;

    let rho0 = bloch_state(init_theta, init_phi).map_err(err)?;
    let mut state = rho0.clone();
    let mut protocol = vec![bloch(&state)];
    let mut ideal = vec![bloch(&state)];
    let mut frame = [0.0; 3];
    let mut frame_charge = vec![frame];
    for t in 1..=rounds {
        let (next, records) = apply_v_seq(&state, &basis, &dec.alphas, rounds, &charges).map_err(err)?;
        for r in &records {
            for (acc, x) in frame.iter_mut().zip(&r.frame_delta) {
                *acc += x;
            }
        }
        state = next;
        protocol.push(bloch(&state));
        let u_t = exp_neg_i(&h, t as f64 / rounds as f64).map_err(err)?;
        ideal.push(bloch(&rho0.evolve(&u_t).map_err(err)?));
        frame_charge.push(frame);
    }
    let target_state = rho0.evolve(&target).map_err(err)?;
    let out = Trajectory {
        rounds,
        protocol,
        ideal,
        total_error: trace_norm(&(state.matrix() - target_state.matrix())),
        bounds: BoundReport::new(basis.len(), basis.alpha_max(), dec.max_abs_alpha(), rounds),
        alphas: dec.alphas,
        frame_charge,
    };
    serde_json::to_string(&out).map_err(err)
}

/// Trace error against `N` over `points` log-spaced values in
/// `[n_min, n_max]`, with the analytic bound and fitted slope.
#[allow(clippy::too_many_arguments)]
pub fn convergence_json(
    axis_theta: f64,
    axis_phi: f64,
    angle: f64,
    init_theta: f64,
    init_phi: f64,
    n_min: usize,
    n_max: usize,
    points: usize,
) -> Result<String, String> {
    if n_min == 0 || n_max <= n_min || n_max > MAX_ROUNDS || points < 3 {
        return Err(format!("need 1 <= n_min < n_max <= {MAX_ROUNDS} and at least 3 points"));
    }
    let ratio = (n_max as f64 / n_min as f64).powf(1.0 / (points - 1) as f64);
    let mut n_list: Vec<usize> = (0..points)
        .map(|k| (n_min as f64 * ratio.powi(k as i32)).round() as usize)
        .collect();
    n_list.dedup();
    if n_list.len() < 3 {
        return Err("range too narrow for that many points".into());
    }
    let target = exp_neg_i(&axis(axis_theta, axis_phi), angle).map_err(err)?;
    let spec = ProtocolSpec::new(
        target,
        n_list[0],
        build_state_basis(2).map_err(err)?,
        bloch_state(init_theta, init_phi).map_err(err)?,
    );
    let table = convergence_sweep(&spec, &n_list).map_err(err)?;
    serde_json::to_string(&table).map_err(err)
}

#[derive(Serialize)]
struct Gibbs {
    bloch: [f64; 3],
    log_partition: f64,
    /// `−Σβ_iW_i` for random unitaries on a two-qubit bath.
    margins: Vec<f64>,
}

/// Thermal state for charges `(Z, X)` at inverse temperatures
/// `(beta_z, beta_x)`, and second-law margins over `draws` random bath
/// unitaries.
pub fn gibbs_json(beta_z: f64, beta_x: f64, draws: usize, seed: u64) -> Result<String, String> {
    if draws > 1000 {
        return Err("at most 1000 draws".into());
    }
    let spec = ThermalSpec::new(
        vec![
            ExtensiveObservable::new("Z", pauli_z()).map_err(err)?,
            ExtensiveObservable::new("X", pauli_x()).map_err(err)?,
        ],
        vec![beta_z, beta_x],
    )
    .map_err(err)?;
    let tau = thermal_state(&spec);
    let bath = tau.state.tensor(&tau.state);
    let mut sampler = Sampler::new(seed);
    let margins = (0..draws)
        .map(|_| {
            let after = bath.evolve(&sampler.haar_unitary(4))?;
            Ok(work_accounting(&bath, &after, &[Role::Bath, Role::Bath], &spec)?.margin_nosys)
        })
        .collect::<qframe::Result<Vec<f64>>>()
        .map_err(err)?;
    let out = Gibbs {
        bloch: bloch(&tau.state),
        log_partition: tau.log_partition,
        margins,
    };
    serde_json::to_string(&out).map_err(err)
}

#[wasm_bindgen]
pub fn trajectory(
    axis_theta: f64,
    axis_phi: f64,
    angle: f64,
    rounds: usize,
    init_theta: f64,
    init_phi: f64,
) -> Result<String, JsError> {
    trajectory_json(axis_theta, axis_phi, angle, rounds, init_theta, init_phi).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn convergence(
    axis_theta: f64,
    axis_phi: f64,
    angle: f64,
    init_theta: f64,
    init_phi: f64,
    n_min: usize,
    n_max: usize,
    points: usize,
) -> Result<String, JsError> {
    convergence_json(axis_theta, axis_phi, angle, init_theta, init_phi, n_min, n_max, points)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn gibbs(beta_z: f64, beta_x: f64, draws: usize, seed: u64) -> Result<String, JsError> {
    gibbs_json(beta_z, beta_x, draws, seed).map_err(|e| JsError::new(&e))
}
