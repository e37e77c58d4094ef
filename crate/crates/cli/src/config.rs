//! Experiment configuration: a single JSON document.
//!
//! ```json
//! {
//!   "mode": "converge",
//!   "dimension": 2,
//!   "N_list": [50, 100, 200, 400, 800],
//!   "target": { "rotation": { "axis": "Z", "angle": 0.7853981633974483 } },
//!   "initial": "plus",
//!   "basis": "default",
//!   "seed": 0
//! }
//! ```
//!
//! Matrices are row-major lists of `[re, im]` pairs. Named operators are
//! `"I"`, `"X"`, `"Y"`, `"Z"` and `"H"` (the Hadamard gate).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use qframe::conservation::ExtensiveObservable;
use qframe::io::MatrixJson;
use qframe::linalg::{self, exp_neg_i, CMatrix};
use qframe::{build_state_basis, DensityOperator, OperatorBasis, Sampler, ThermalSpec, Unitary};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Converge,
    Conserve,
    Thermo,
    Battery,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Converge => "converge",
            Mode::Conserve => "conserve",
            Mode::Thermo => "thermo",
            Mode::Battery => "battery",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "converge" => Ok(Mode::Converge),
            "conserve" => Ok(Mode::Conserve),
            "thermo" => Ok(Mode::Thermo),
            "battery" => Ok(Mode::Battery),
            other => Err(format!(
                "unknown mode `{other}` (expected converge, conserve, thermo or battery)"
            )),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Named(String),
    Matrix(MatrixJson),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationSpec {
    pub axis: OperatorSpec,
    pub angle: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Target unitary.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    /// A named gate, or `"random"` for a Haar unitary from the run seed.
    Named(String),
    Tagged(TaggedTarget),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaggedTarget {
    /// `U = exp(−iG)`.
    Generator(MatrixJson),
    /// `U = exp(−i·angle·axis)`.
    Rotation(RotationSpec),
    Unitary(MatrixJson),
    Random(RandomSpec),
}

/// Initial system state.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    /// `"mixed"`, `"plus"`, `"random_pure"` or `"random_mixed"`.
    Named(String),
    Tagged(TaggedState),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaggedState {
    /// Computational basis state `|k⟩`.
    Basis(usize),
    /// State vector, normalized on load.
    Pure(Vec<[f64; 2]>),
    Density(MatrixJson),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ChargeSpec {
    Named(String),
    Labeled { label: String, matrix: MatrixJson },
    Matrix(MatrixJson),
}

/// The document as written; every field optional so that missing ones can
/// be reported by name.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mode: Option<Mode>,
    pub dimension: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "N_list")]
    pub n_list: Option<Vec<usize>>,
    pub target: Option<TargetSpec>,
    pub initial: Option<StateSpec>,
    pub basis: Option<String>,
    #[serde(default)]
    pub charges: Vec<ChargeSpec>,
    pub betas: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Thermo mode: number of bath subsystems.
    pub bath_size: Option<usize>,
    /// Thermo mode: number of random unitaries.
    pub draws: Option<usize>,
    /// Thermo mode: number of random states in the Gibbs minimality check.
    pub gibbs_draws: Option<usize>,
    /// Thermo mode: add a system, prepared in `initial`, next to the bath.
    #[serde(default)]
    pub with_system: bool,
}

/// Command-line values that take precedence over the document.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// A validated configuration with every operator built.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub dimension: usize,
    pub n_list: Vec<usize>,
    pub target: Option<Unitary>,
    pub initial: DensityOperator,
    pub basis: Option<OperatorBasis>,
    pub charges: Vec<ExtensiveObservable>,
    pub thermal: Option<ThermalSpec>,
    pub output: PathBuf,
    pub seed: u64,
    pub bath_size: usize,
    pub draws: usize,
    pub gibbs_draws: usize,
    pub with_system: bool,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn missing(field: &str, mode: Mode) -> CliError {
    config_err(format!("missing field `{field}` (required in {mode} mode)"))
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let raw: RawConfig = serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    build(raw, overrides, base)
}

/// Validates `raw` and builds every operator; relative paths resolve
/// against `base`.
pub fn build(raw: RawConfig, overrides: &Overrides, base: &Path) -> Result<ExperimentConfig, CliError> {
    let mode = overrides
        .mode
        .or(raw.mode)
        .ok_or_else(|| config_err("missing field `mode`"))?;
    let d = raw.dimension.ok_or_else(|| missing("dimension", mode))?;
    if d < 2 {
        return Err(config_err(format!("`dimension` must be at least 2, got {d}")));
    }
    let seed = overrides.seed.or(raw.seed).unwrap_or(0);
    let mut sampler = Sampler::new(seed);

    let n_list = match (raw.n, raw.n_list) {
        (Some(_), Some(_)) => return Err(config_err("give either `N` or `N_list`, not both")),
        (Some(n), None) => vec![n],
        (None, Some(list)) => list,
        (None, None) if mode == Mode::Thermo => Vec::new(),
        (None, None) => {
            let field = if mode == Mode::Converge { "N_list" } else { "N" };
            return Err(missing(field, mode));
        }
    };
    if n_list.contains(&0) {
        return Err(config_err("`N` values must be positive"));
    }
    if mode == Mode::Converge && (n_list.len() < 3 || n_list.windows(2).any(|w| w[0] >= w[1])) {
        return Err(config_err(
            "`N_list` needs at least 3 strictly ascending values in converge mode",
        ));
    }

    let needs_protocol = mode != Mode::Thermo;
    let target = match (&raw.target, needs_protocol) {
        (Some(spec), true) => Some(build_target(spec, d, &mut sampler)?),
        (None, true) => return Err(missing("target", mode)),
        (_, false) => None,
    };
    let initial = match &raw.initial {
        Some(spec) => build_state(spec, d, &mut sampler)?,
        None => DensityOperator::basis_state(d, 0).map_err(core_config)?,
    };
    let basis = if needs_protocol {
        Some(match raw.basis.as_deref() {
            None | Some("default") => build_state_basis(d).map_err(core_config)?,
            Some(file) => {
                let p = base.join(file);
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| config_err(format!("cannot read basis {}: {e}", p.display())))?;
                let b = OperatorBasis::from_json(&text).map_err(core_config)?;
                if b.dim() != d {
                    return Err(config_err(format!(
                        "basis file is for dimension {}, config says {d}",
                        b.dim()
                    )));
                }
                b
            }
        })
    } else {
        None
    };

    let charges = raw
        .charges
        .iter()
        .enumerate()
        .map(|(k, c)| build_charge(c, k, d))
        .collect::<Result<Vec<_>, _>>()?;
    if matches!(mode, Mode::Conserve | Mode::Battery | Mode::Thermo) && charges.is_empty() {
        return Err(missing("charges", mode));
    }

    let thermal = if mode == Mode::Thermo {
        let betas = raw.betas.clone().ok_or_else(|| missing("betas", mode))?;
        if betas.len() != charges.len() {
            return Err(config_err(format!(
                "`betas` has {} entries for {} charges",
                betas.len(),
                charges.len()
            )));
        }
        Some(ThermalSpec::new(charges.clone(), betas).map_err(core_config)?)
    } else {
        None
    };

    let bath_size = raw.bath_size.unwrap_or(2);
    if mode == Mode::Thermo && bath_size == 0 {
        return Err(config_err("`bath_size` must be at least 1"));
    }

    let output = overrides
        .out
        .clone()
        .or_else(|| raw.output.map(|p| base.join(p)))
        .unwrap_or_else(|| PathBuf::from("out"));

    Ok(ExperimentConfig {
        mode,
        dimension: d,
        n_list,
        target,
        initial,
        basis,
        charges,
        thermal,
        output,
        seed,
        bath_size,
        draws: raw.draws.unwrap_or(200),
        gibbs_draws: raw.gibbs_draws.unwrap_or(100),
        with_system: raw.with_system,
    })
}

fn core_config(e: qframe::Error) -> CliError {
    config_err(e.to_string())
}

fn named_operator(name: &str, d: usize) -> Result<CMatrix, CliError> {
    if name == "I" {
        return Ok(linalg::identity(d));
    }
    let m = match name {
        "X" => linalg::pauli_x(),
        "Y" => linalg::pauli_y(),
        "Z" => linalg::pauli_z(),
        "H" => (linalg::pauli_x() + linalg::pauli_z()) * real(FRAC_1_SQRT_2),
        other => return Err(config_err(format!("unknown operator name `{other}`"))),
    };
    if d != 2 {
        return Err(config_err(format!(
            "operator `{name}` is a qubit operator but dimension is {d}"
        )));
    }
    Ok(m)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn sized_matrix(m: &MatrixJson, d: usize, what: &str) -> Result<CMatrix, CliError> {
    let m = m.to_matrix().map_err(|e| config_err(format!("{what}: {e}")))?;
    if m.nrows() != d || m.ncols() != d {
        return Err(config_err(format!(
            "{what} is {}x{}, expected {d}x{d}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

fn operator(spec: &OperatorSpec, d: usize, what: &str) -> Result<CMatrix, CliError> {
    match spec {
        OperatorSpec::Named(name) => named_operator(name, d),
        OperatorSpec::Matrix(m) => sized_matrix(m, d, what),
    }
}

fn build_target(spec: &TargetSpec, d: usize, sampler: &mut Sampler) -> Result<Unitary, CliError> {
    let ctx = |e: qframe::Error| config_err(format!("target: {e}"));
    match spec {
        TargetSpec::Named(name) if name == "random" => Ok(sampler.haar_unitary(d)),
        TargetSpec::Named(name) => Unitary::new(named_operator(name, d)?).map_err(ctx),
        TargetSpec::Tagged(TaggedTarget::Generator(g)) => {
            exp_neg_i(&sized_matrix(g, d, "generator")?, 1.0).map_err(ctx)
        }
        TargetSpec::Tagged(TaggedTarget::Rotation(r)) => {
            exp_neg_i(&operator(&r.axis, d, "rotation axis")?, r.angle).map_err(ctx)
        }
        TargetSpec::Tagged(TaggedTarget::Unitary(m)) => Unitary::new(sized_matrix(m, d, "unitary")?).map_err(ctx),
        TargetSpec::Tagged(TaggedTarget::Random(r)) => Ok(match r.seed {
            Some(s) => Sampler::new(s).haar_unitary(d),
            None => sampler.haar_unitary(d),
        }),
    }
}

fn build_state(spec: &StateSpec, d: usize, sampler: &mut Sampler) -> Result<DensityOperator, CliError> {
    let ctx = |e: qframe::Error| config_err(format!("initial: {e}"));
    match spec {
        StateSpec::Named(name) => match name.as_str() {
            "mixed" => Ok(DensityOperator::maximally_mixed(d)),
            "plus" => {
                let amp = real(1.0 / (d as f64).sqrt());
                DensityOperator::pure(&vec![amp; d]).map_err(ctx)
            }
            "random_pure" => Ok(sampler.pure_state(d)),
            "random_mixed" => Ok(sampler.density(d)),
            other => Err(config_err(format!(
                "initial: unknown state `{other}` (expected mixed, plus, random_pure or random_mixed)"
            ))),
        },
        StateSpec::Tagged(TaggedState::Basis(k)) => DensityOperator::basis_state(d, *k).map_err(ctx),
        StateSpec::Tagged(TaggedState::Pure(v)) => {
            if v.len() != d {
                return Err(config_err(format!(
                    "initial: state vector has {} entries, expected {d}",
                    v.len()
                )));
            }
            let amps: Vec<_> = v.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
            DensityOperator::pure(&amps).map_err(ctx)
        }
        StateSpec::Tagged(TaggedState::Density(m)) => {
            DensityOperator::new(sized_matrix(m, d, "initial density")?).map_err(ctx)
        }
    }
}

fn build_charge(spec: &ChargeSpec, index: usize, d: usize) -> Result<ExtensiveObservable, CliError> {
    let what = format!("charges[{index}]");
    let (label, m) = match spec {
        ChargeSpec::Named(name) => (name.clone(), named_operator(name, d)?),
        ChargeSpec::Labeled { label, matrix } => (label.clone(), sized_matrix(matrix, d, &what)?),
        ChargeSpec::Matrix(m) => (format!("A{index}"), sized_matrix(m, d, &what)?),
    };
    ExtensiveObservable::new(label, m).map_err(|e| config_err(format!("{what}: {e}")))
}
