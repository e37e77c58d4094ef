//! One runner per mode. Each writes its artifacts into the output directory
//! and reports what it found; nothing here decides the exit status.

use std::fs;
use std::path::{Path, PathBuf};

use qframe::bounds::{convergence_sweep, ConvergenceRow, LogLogFit};
use qframe::conservation::{commutator_norm, lift_extensive, DEFAULT_MAX_DIM};
use qframe::io::MatrixJson;
use qframe::linalg::ALGEBRAIC_TOL;
use qframe::protocol::{partial_swap, BatteryLedger};
use qframe::thermo::{
    battery_deviation_check, free_entropy, implicit_work, thermal_state, work_accounting, BatteryMargin, Role,
    LEDGER_SLACK, SECOND_LAW_SLACK,
};
use qframe::{run_protocol, DensityOperator, OperatorBasis, ProtocolSpec, Sampler, Unitary};
use serde::Serialize;

use crate::config::{ExperimentConfig, Mode};
use crate::CliError;

/// What a run produced.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    /// One line per experiment.
    pub summary: Vec<String>,
    /// Per-row detail, shown with `--verbose`.
    pub details: Vec<String>,
    pub files: Vec<PathBuf>,
    /// Invariant violations; non-empty means exit status 1.
    pub violations: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn run(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    fs::create_dir_all(&config.output).map_err(|e| CliError::io(&config.output, e))?;
    let mut out = Outcome::default();
    match config.mode {
        Mode::Converge => converge(config, &mut out)?,
        Mode::Conserve => conserve(config, &mut out)?,
        Mode::Battery => battery(config, &mut out)?,
        Mode::Thermo => thermo(config, &mut out)?,
    }
    Ok(out)
}

fn write(out: &mut Outcome, dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    out.files.push(path);
    Ok(())
}

fn write_json<T: Serialize>(out: &mut Outcome, dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    write(out, dir, name, &text)
}

fn protocol_parts(config: &ExperimentConfig) -> (&Unitary, &OperatorBasis) {
    (
        config.target.as_ref().expect("validated: target present"),
        config.basis.as_ref().expect("validated: basis present"),
    )
}

fn template(config: &ExperimentConfig, n: usize) -> ProtocolSpec {
    let (target, basis) = protocol_parts(config);
    ProtocolSpec::new(target.clone(), n, basis.clone(), config.initial.clone()).with_charges(config.charges.clone())
}

fn span(n_list: &[usize]) -> String {
    match n_list {
        [n] => n.to_string(),
        [first, .., last] => format!("{first}..{last}"),
        [] => "-".into(),
    }
}

#[derive(Serialize)]
struct ConvergeReport<'a> {
    schema: u32,
    mode: &'static str,
    dimension: usize,
    seed: u64,
    rows: &'a [ConvergenceRow],
    fit: Option<LogLogFit>,
    tail_fit: Option<LogLogFit>,
    excluded: &'a [usize],
    bound_violations: usize,
}

fn converge(config: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let mut spec = template(config, config.n_list[0]);
    spec.charges.clear();
    let table = convergence_sweep(&spec, &config.n_list)?;
    let tail = table.tail_fit(3);
    for r in &table.rows {
        out.details.push(format!(
            "N={} error={:.6e} bound={:.6e} valid={}",
            r.n, r.measured_error, r.analytic_bound, r.valid
        ));
    }
    for r in table.violations() {
        out.violations.push(format!(
            "N={}: error {:.6e} exceeds bound {:.6e}",
            r.n, r.measured_error, r.analytic_bound
        ));
    }
    let report = ConvergeReport {
        schema: 1,
        mode: "converge",
        dimension: config.dimension,
        seed: config.seed,
        rows: &table.rows,
        fit: table.fit,
        tail_fit: tail,
        excluded: &table.excluded,
        bound_violations: table.violations().count(),
    };
    write(out, &config.output, "convergence.csv", &table.to_csv()?)?;
    write_json(out, &config.output, "convergence.json", &report)?;
    let fmt_slope = |f: Option<LogLogFit>| f.map_or("n/a".to_string(), |f| format!("{:.4}", f.slope));
    out.summary.push(format!(
        "converge d={} N={} slope={} tail_slope={} below_threshold={} violations={}",
        config.dimension,
        span(&config.n_list),
        fmt_slope(table.fit),
        fmt_slope(tail),
        table.rows.iter().filter(|r| !r.valid).count(),
        report.bound_violations
    ));
    Ok(())
}

#[derive(Serialize)]
struct CommutatorEntry {
    step: usize,
    alpha: f64,
    charge: String,
    norm: f64,
}

#[derive(Serialize)]
struct ConserveRun {
    #[serde(rename = "N")]
    n: usize,
    total_error: f64,
    analytic_bound: f64,
    bound_valid: bool,
    max_commutator_norm: f64,
    max_closure_violation: f64,
    commutators: Vec<CommutatorEntry>,
    ledger: BatteryLedger,
}

#[derive(Serialize)]
struct ConserveReport {
    schema: u32,
    mode: &'static str,
    dimension: usize,
    seed: u64,
    runs: Vec<ConserveRun>,
}

fn conserve(config: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let d = config.dimension;
    let lifted = config
        .charges
        .iter()
        .map(|c| lift_extensive(c, 2))
        .collect::<Result<Vec<_>, _>>()?;
    let mut runs = Vec::new();
    for &n in &config.n_list {
        let result = run_protocol(&template(config, n))?;
        let mut commutators = Vec::new();
        for (step, &alpha) in result.decomposition.alphas.iter().enumerate() {
            let v = partial_swap(alpha, n, d)?;
            for (c, a_tot) in config.charges.iter().zip(&lifted) {
                commutators.push(CommutatorEntry {
                    step,
                    alpha,
                    charge: c.label().to_string(),
                    norm: commutator_norm(&v, a_tot)?,
                });
            }
        }
        let max_comm = commutators.iter().fold(0.0f64, |m, c| m.max(c.norm));
        let closure = result.ledger.max_closure_violation();
        if max_comm > ALGEBRAIC_TOL {
            out.violations.push(format!(
                "N={n}: commutator norm {max_comm:.3e} exceeds {ALGEBRAIC_TOL:e}"
            ));
        }
        if closure > LEDGER_SLACK {
            out.violations
                .push(format!("N={n}: ledger closure {closure:.3e} exceeds {LEDGER_SLACK:e}"));
        }
        if result.violates_bound() {
            out.violations.push(format!(
                "N={n}: error {:.6e} exceeds bound {:.6e}",
                result.total_error,
                result.analytic_bound()
            ));
        }
        out.details.push(format!(
            "N={n} steps={} max_commutator={max_comm:.3e} max_closure={closure:.3e} error={:.6e}",
            result.ledger.steps.len(),
            result.total_error
        ));
        out.summary.push(format!(
            "conserve d={d} N={n} charges={} max_commutator={max_comm:.3e} max_closure={closure:.3e} error={:.6e}",
            config.charges.len(),
            result.total_error
        ));
        runs.push(ConserveRun {
            n,
            total_error: result.total_error,
            analytic_bound: result.analytic_bound(),
            bound_valid: result.bounds.total.valid,
            max_commutator_norm: max_comm,
            max_closure_violation: closure,
            commutators,
            ledger: result.ledger,
        });
    }
    let report = ConserveReport {
        schema: 1,
        mode: "conserve",
        dimension: d,
        seed: config.seed,
        runs,
    };
    write_json(out, &config.output, "conserve.json", &report)
}

#[derive(Serialize)]
struct BatteryRun {
    #[serde(rename = "N")]
    n: usize,
    epsilon: f64,
    bound_valid: bool,
    max_closure_violation: f64,
    margins: Vec<BatteryMargin>,
}

#[derive(Serialize)]
struct BatteryReport {
    schema: u32,
    mode: &'static str,
    dimension: usize,
    seed: u64,
    runs: Vec<BatteryRun>,
}

fn battery(config: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let (target, _) = protocol_parts(config);
    let work = implicit_work(&config.initial, target, &config.charges)?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record([
        "N",
        "charge",
        "battery_delta",
        "implicit_work",
        "deviation",
        "bound",
        "pass",
    ])
    .map_err(core_csv)?;
    let mut runs = Vec::new();
    for &n in &config.n_list {
        let result = run_protocol(&template(config, n))?;
        let eps = result.total_error;
        let margins = battery_deviation_check(&result, &work, eps, &config.charges)?;
        for m in &margins {
            csv.write_record([
                n.to_string(),
                m.label.clone(),
                m.battery_delta.to_string(),
                m.implicit_work.to_string(),
                m.deviation.to_string(),
                m.bound.to_string(),
                m.pass.to_string(),
            ])
            .map_err(core_csv)?;
            out.details.push(format!(
                "N={n} {}: battery={:.6e} work={:.6e} deviation={:.3e} bound={:.3e}",
                m.label, m.battery_delta, m.implicit_work, m.deviation, m.bound
            ));
            if !m.pass {
                out.violations.push(format!(
                    "N={n} {}: deviation {:.3e} exceeds {:.3e}",
                    m.label, m.deviation, m.bound
                ));
            }
        }
        if result.violates_bound() {
            out.violations.push(format!(
                "N={n}: error {:.6e} exceeds bound {:.6e}",
                eps,
                result.analytic_bound()
            ));
        }
        let worst = margins.iter().fold(0.0f64, |m, x| m.max(x.deviation));
        out.summary.push(format!(
            "battery d={} N={n} epsilon={eps:.6e} max_deviation={worst:.3e} pass={}",
            config.dimension,
            margins.iter().all(|m| m.pass)
        ));
        runs.push(BatteryRun {
            n,
            epsilon: eps,
            bound_valid: result.bounds.total.valid,
            max_closure_violation: result.ledger.max_closure_violation(),
            margins,
        });
    }
    let bytes = csv
        .into_inner()
        .map_err(|e| CliError::Core(qframe::Error::Numerical(e.to_string())))?;
    write(
        out,
        &config.output,
        "battery.csv",
        &String::from_utf8(bytes).expect("csv is utf-8"),
    )?;
    let report = BatteryReport {
        schema: 1,
        mode: "battery",
        dimension: config.dimension,
        seed: config.seed,
        runs,
    };
    write_json(out, &config.output, "battery.json", &report)
}

fn core_csv(e: csv::Error) -> CliError {
    CliError::Core(qframe::Error::Csv(e))
}

#[derive(Serialize)]
struct DrawRecord {
    draw: usize,
    work: Vec<f64>,
    delta_free_entropy: f64,
    margin_nosys: f64,
    margin_wsys: f64,
}

#[derive(Serialize)]
struct ThermoReport {
    schema: u32,
    mode: &'static str,
    dimension: usize,
    seed: u64,
    labels: Vec<String>,
    betas: Vec<f64>,
    bath_size: usize,
    with_system: bool,
    log_partition: f64,
    thermal_state: MatrixJson,
    min_margin: f64,
    gibbs_draws: usize,
    min_gibbs_gap: f64,
    draws: Vec<DrawRecord>,
}

fn thermo(config: &ExperimentConfig, out: &mut Outcome) -> Result<(), CliError> {
    let spec = config.thermal.as_ref().expect("validated: thermal spec present");
    let d = config.dimension;
    let tau = thermal_state(spec);

    let parts = config.bath_size + usize::from(config.with_system);
    let joint_dim = (0..parts)
        .try_fold(1usize, |acc, _| acc.checked_mul(d))
        .filter(|&t| t <= DEFAULT_MAX_DIM);
    let Some(joint_dim) = joint_dim else {
        return Err(CliError::Config(format!(
            "{parts} subsystems of dimension {d} exceed the {DEFAULT_MAX_DIM}-dimensional cap"
        )));
    };

    let mut roles = Vec::with_capacity(parts);
    let mut before: Option<DensityOperator> = None;
    if config.with_system {
        roles.push(Role::System);
        before = Some(config.initial.clone());
    }
    for _ in 0..config.bath_size {
        roles.push(Role::Bath);
        before = Some(match before {
            Some(b) => b.tensor(&tau.state),
            None => tau.state.clone(),
        });
    }
    let before = before.expect("bath_size is at least 1");

    let mut sampler = Sampler::new(config.seed);
    let mut draws = Vec::with_capacity(config.draws);
    let mut min_margin = f64::INFINITY;
    for draw in 0..config.draws {
        let u = sampler.haar_unitary(joint_dim);
        let after = before.evolve(&u)?;
        let rec = work_accounting(&before, &after, &roles, spec)?;
        let margin = if config.with_system {
            rec.margin_wsys
        } else {
            rec.margin_nosys
        };
        min_margin = min_margin.min(margin);
        if margin < -SECOND_LAW_SLACK {
            out.violations
                .push(format!("draw {draw}: second-law margin {margin:.3e} below slack"));
        }
        out.details.push(format!(
            "draw {draw}: work={:?} margin_nosys={:.6e} margin_wsys={:.6e}",
            rec.work, rec.margin_nosys, rec.margin_wsys
        ));
        draws.push(DrawRecord {
            draw,
            work: rec.work,
            delta_free_entropy: rec.delta_free_entropy,
            margin_nosys: rec.margin_nosys,
            margin_wsys: rec.margin_wsys,
        });
    }

    let floor = -tau.log_partition;
    let mut min_gap = f64::INFINITY;
    for k in 0..config.gibbs_draws {
        let gap = free_entropy(&sampler.density(d), spec)? - floor;
        min_gap = min_gap.min(gap);
        if gap < -SECOND_LAW_SLACK {
            out.violations.push(format!(
                "gibbs draw {k}: free entropy {gap:.3e} below the thermal value"
            ));
        }
    }

    let report = ThermoReport {
        schema: 1,
        mode: "thermo",
        dimension: d,
        seed: config.seed,
        labels: spec.charges().iter().map(|c| c.label().to_string()).collect(),
        betas: spec.betas().to_vec(),
        bath_size: config.bath_size,
        with_system: config.with_system,
        log_partition: tau.log_partition,
        thermal_state: MatrixJson::from(tau.state.matrix()),
        min_margin: finite_or_zero(min_margin),
        gibbs_draws: config.gibbs_draws,
        min_gibbs_gap: finite_or_zero(min_gap),
        draws,
    };
    write_json(out, &config.output, "thermo.json", &report)?;
    out.summary.push(format!(
        "thermo d={d} bath={} system={} draws={} lnZ={:.6} min_margin={:.3e} min_gibbs_gap={:.3e}",
        config.bath_size, config.with_system, config.draws, tau.log_partition, report.min_margin, report.min_gibbs_gap
    ));
    Ok(())
}

/// Empty draw sets leave the running minima at infinity, which JSON cannot
/// carry.
fn finite_or_zero(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}
