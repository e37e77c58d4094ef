//! Acceptance suite: ten criteria, each at its pinned tolerance. Prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

use std::f64::consts::{E, FRAC_PI_4, PI};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use qframe::basis::decompose_generator;
use qframe::bounds::{block_bound, convergence_sweep, single_step_bound};
use qframe::conservation::{commutator_norm, lift_extensive, lift_on_slots};
use qframe::linalg::{
    exp_neg_i, identity, partial_trace, pauli_x, pauli_y, pauli_z, swap_operator, tensor, trace_norm, CMatrix,
};
use qframe::protocol::{apply_v_seq, partial_swap, step_channel, two_subsystem_gate, two_subsystem_step};
use qframe::thermo::{
    battery_deviation_check, free_entropy, implicit_work, thermal_state, work_accounting, Role, LEDGER_SLACK,
    SECOND_LAW_SLACK,
};
use qframe::{
    build_state_basis, run_protocol, DensityOperator, ExtensiveObservable, ProtocolSpec, Sampler, ThermalSpec,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core(e: qframe::Error) -> String {
    e.to_string()
}

fn swap_identities() -> Check {
    let mut s = Sampler::new(1);
    let mut worst = 0.0f64;
    for d in [2, 3] {
        let sw = swap_operator(d);
        for _ in 0..100 {
            let a = s.ginibre(d);
            let b = s.ginibre(d);
            let ab = tensor(&a, &b);
            let left = partial_trace(&(sw.matrix() * &ab), &[d, d], &[0]).map_err(core)?;
            let right = partial_trace(&(&ab * sw.matrix()), &[d, d], &[0]).map_err(core)?;
            worst = worst.max(max_abs(&(left - &b * &a))).max(max_abs(&(right - &a * &b)));
        }
    }
    ensure(worst <= 1e-12, || format!("max entry error {worst:e} > 1e-12"))?;
    Ok(format!("200 pairs, max entry error {worst:.2e}"))
}

fn conservation() -> Check {
    let mut s = Sampler::new(2);
    let mut worst = 0.0f64;
    for d in [2, 3] {
        let charges: Vec<CMatrix> = (0..20)
            .map(|_| lift_extensive(&ExtensiveObservable::new("A", s.hermitian(d)).unwrap(), 2))
            .collect::<Result<_, _>>()
            .map_err(core)?;
        for _ in 0..50 {
            let alpha = s.uniform(-4.0 * PI, 4.0 * PI);
            let n = 1 + (s.uniform(0.0, 200.0) as usize);
            let v = partial_swap(alpha, n, d).map_err(core)?;
            for a in &charges {
                worst = worst.max(commutator_norm(&v, a).map_err(core)?);
            }
        }
    }
    ensure(worst <= 1e-12, || format!("commutator norm {worst:e} > 1e-12"))?;

    let mut closure = 0.0f64;
    let mut steps = 0;
    for d in [2, 3] {
        let charges: Vec<ExtensiveObservable> = (0..20)
            .map(|k| ExtensiveObservable::new(format!("A{k}"), s.hermitian(d)).unwrap())
            .collect();
        let spec = ProtocolSpec::new(s.haar_unitary(d), 60, build_state_basis(d).map_err(core)?, s.density(d))
            .with_charges(charges);
        let r = run_protocol(&spec).map_err(core)?;
        closure = closure.max(r.ledger.max_closure_violation());
        steps += r.ledger.steps.len();
    }
    ensure(closure <= LEDGER_SLACK, || {
        format!("ledger closure {closure:e} > 1e-10")
    })?;
    Ok(format!(
        "max commutator {worst:.2e}, ledger closure {closure:.2e} over {steps} steps"
    ))
}

fn single_step() -> Check {
    let mut s = Sampler::new(3);
    let basis = build_state_basis(2).map_err(core)?;
    let mut worst_ratio = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        for mult in [10.0, 100.0] {
            let n = (mult * alpha) as usize;
            let bound = single_step_bound(alpha, n);
            ensure(bound.valid, || format!("N={n} below 2α"))?;
            for sigma in basis.states() {
                let u = exp_neg_i(sigma.matrix(), alpha / n as f64).map_err(core)?;
                for _ in 0..50 {
                    let rho = s.density(2);
                    let out = step_channel(&rho, sigma, alpha, n).map_err(core)?;
                    let ideal = rho.evolve(&u).map_err(core)?;
                    let err = trace_norm(&(out.system.matrix() - ideal.matrix()));
                    ensure(err <= bound.value, || {
                        format!("α={alpha} N={n}: error {err:e} > bound {:e}", bound.value)
                    })?;
                    worst_ratio = worst_ratio.max(err / bound.value);
                }
            }
        }
    }
    Ok(format!("900 channels, max error/bound {worst_ratio:.3}"))
}

fn block() -> Check {
    let mut s = Sampler::new(4);
    let basis = build_state_basis(2).map_err(core)?;
    let n0 = (8.0 * basis.len() as f64 * basis.alpha_max()).ceil() as usize;
    let mut worst_ratio = 0.0f64;
    for n in [n0, 10 * n0] {
        let bound = block_bound(basis.len(), basis.alpha_max(), n);
        ensure(bound.valid, || format!("N={n} below threshold"))?;
        for _ in 0..20 {
            let h = s.principal_hermitian(2);
            let dec = decompose_generator(&h, &basis).map_err(core)?;
            let rho = s.density(2);
            let (out, _) = apply_v_seq(&rho, &basis, &dec.alphas, n, &[]).map_err(core)?;
            let ideal = rho
                .evolve(&exp_neg_i(&h, 1.0 / n as f64).map_err(core)?)
                .map_err(core)?;
            let err = trace_norm(&(out.matrix() - ideal.matrix()));
            ensure(err <= bound.value, || {
                format!("N={n}: error {err:e} > bound {:e}", bound.value)
            })?;
            worst_ratio = worst_ratio.max(err / bound.value);
        }
    }
    Ok(format!(
        "N={n0} and {}, 40 generators, max error/bound {worst_ratio:.2e}",
        10 * n0
    ))
}

fn total_bound_and_scaling() -> Check {
    let basis = build_state_basis(2).map_err(core)?;
    let n_list = [50, 100, 200, 400, 800];
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut s = Sampler::new(5);
    let cases = [
        (
            "exp(-i(pi/4)Z)",
            exp_neg_i(&pauli_z(), FRAC_PI_4).map_err(core)?,
            DensityOperator::pure(&[a, a]).map_err(core)?,
        ),
        ("random", s.haar_unitary(2), s.pure_state(2)),
    ];
    let mut report = Vec::new();
    for (name, target, rho) in cases {
        let table =
            convergence_sweep(&ProtocolSpec::new(target, n_list[0], basis.clone(), rho), &n_list).map_err(core)?;
        if let Some(r) = table.violations().next() {
            return Err(format!(
                "{name}: N={} error {:e} > bound {:e}",
                r.n, r.measured_error, r.analytic_bound
            ));
        }
        let slope = table.slope().ok_or_else(|| format!("{name}: no fit"))?;
        let tail = table.tail_fit(3).ok_or_else(|| format!("{name}: no tail fit"))?.slope;
        ensure((-2.2..=-0.8).contains(&slope), || {
            format!("{name}: slope {slope:.4} outside [-2.2, -0.8]")
        })?;
        ensure((tail + 1.0).abs() <= 0.15, || {
            format!("{name}: tail slope {tail:.4}, |slope+1| > 0.15")
        })?;
        let valid = table.rows.iter().filter(|r| r.valid).count();
        report.push(format!("{name}: slope {slope:.3}, tail {tail:.3}, {valid} valid rows"));
    }
    Ok(report.join("; "))
}

fn dual_basis_and_alpha_max() -> Check {
    let basis = build_state_basis(2).map_err(core)?;
    let half = Complex64::new(0.5, 0.0);
    let expected = [
        (identity(2) - pauli_x() - pauli_y() - pauli_z()) * half,
        pauli_x(),
        pauli_y(),
        pauli_z(),
    ];
    let dual_err = basis
        .dual()
        .iter()
        .zip(&expected)
        .fold(0.0f64, |m, (a, b)| m.max(max_abs(&(a - b))));
    ensure(basis.dual().len() == 4 && dual_err <= 1e-10, || {
        format!("dual error {dual_err:e}")
    })?;
    let am = basis.alpha_max();
    ensure((am - PI * 6f64.sqrt()).abs() <= 1e-9, || {
        format!("alpha_max {am} != pi*sqrt(6)")
    })?;
    let mut s = Sampler::new(6);
    let mut largest = 0.0f64;
    for _ in 0..1000 {
        let dec = decompose_generator(&s.principal_hermitian(2), &basis).map_err(core)?;
        largest = largest.max(dec.max_abs_alpha());
    }
    ensure(largest <= am, || format!("|alpha_k| = {largest} > alpha_max"))?;
    Ok(format!(
        "dual error {dual_err:.1e}, alpha_max {am:.12}, max |alpha_k| {largest:.4}"
    ))
}

fn composite_primitive() -> Check {
    let (alpha, n) = (1.0, 100);
    let bound = 8.0 * (E - 2.0) * (alpha / n as f64).powi(2);
    let mut s = Sampler::new(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let rho = DensityOperator::with_dims(s.density(4).into_matrix(), vec![2, 2]).map_err(core)?;
        let sa = s.density(2);
        let sb = s.density(2);
        let out = two_subsystem_step(&rho, &sa, &sb, alpha, n).map_err(core)?;
        let g = tensor(sa.matrix(), sb.matrix());
        let ideal = rho
            .evolve(&exp_neg_i(&g, alpha / n as f64).map_err(core)?)
            .map_err(core)?;
        let err = trace_norm(&(out.matrix() - ideal.matrix()));
        ensure(err <= bound, || format!("error {err:e} > {bound:e}"))?;
        worst = worst.max(err);
    }
    let gate = two_subsystem_gate(2, 2, alpha, n).map_err(core)?;
    let dims = [2, 2, 2, 2];
    let mut comm = 0.0f64;
    for _ in 0..10 {
        let a = ExtensiveObservable::new("A", s.hermitian(2)).map_err(core)?;
        let b = ExtensiveObservable::new("B", s.hermitian(2)).map_err(core)?;
        for lifted in [
            lift_on_slots(&a, &dims, &[0, 2]).map_err(core)?,
            lift_on_slots(&b, &dims, &[1, 3]).map_err(core)?,
            lift_on_slots(&a, &dims, &[0, 1, 2, 3]).map_err(core)?,
        ] {
            comm = comm.max(commutator_norm(&gate, &lifted).map_err(core)?);
        }
    }
    ensure(comm <= 1e-12, || format!("commutator norm {comm:e} > 1e-12"))?;
    Ok(format!(
        "max error {worst:.3e} (bound {bound:.3e}), max commutator {comm:.1e}"
    ))
}

fn second_law() -> Check {
    let spec = ThermalSpec::new(
        vec![
            ExtensiveObservable::new("Z", pauli_z()).map_err(core)?,
            ExtensiveObservable::new("X", pauli_x()).map_err(core)?,
        ],
        vec![1.0, 0.5],
    )
    .map_err(core)?;
    let tau = thermal_state(&spec);
    let bath = tau.state.tensor(&tau.state);
    let roles = [Role::Bath, Role::Bath];
    let mut s = Sampler::new(8);
    let mut min_margin = f64::INFINITY;
    for k in 0..200 {
        let after = bath.evolve(&s.haar_unitary(4)).map_err(core)?;
        let rec = work_accounting(&bath, &after, &roles, &spec).map_err(core)?;
        ensure(rec.margin_nosys >= -SECOND_LAW_SLACK, || {
            format!("draw {k}: margin {:e} below slack", rec.margin_nosys)
        })?;
        min_margin = min_margin.min(rec.margin_nosys);
    }
    let floor = -tau.log_partition;
    let mut min_gap = f64::INFINITY;
    for k in 0..100 {
        let gap = free_entropy(&s.density(2), &spec).map_err(core)? - floor;
        ensure(gap >= -SECOND_LAW_SLACK, || format!("state {k}: F - F(tau) = {gap:e}"))?;
        min_gap = min_gap.min(gap);
    }
    Ok(format!(
        "min -sum(beta W) {min_margin:.3e} over 200 unitaries, min F gap {min_gap:.3e}"
    ))
}

fn battery() -> Check {
    let target = exp_neg_i(&pauli_x(), FRAC_PI_4).map_err(core)?;
    let rho = DensityOperator::pure(&[Complex64::new(0.8, 0.0), Complex64::new(0.36, 0.48)]).map_err(core)?;
    let z = vec![ExtensiveObservable::new("Z", pauli_z()).map_err(core)?];
    let work = implicit_work(&rho, &target, &z).map_err(core)?;
    let basis = build_state_basis(2).map_err(core)?;
    let mut deviations = Vec::new();
    for n in [100, 400, 1600] {
        let r = run_protocol(&ProtocolSpec::new(target.clone(), n, basis.clone(), rho.clone()).with_charges(z.clone()))
            .map_err(core)?;
        let closure = r.ledger.max_closure_violation();
        ensure(closure <= LEDGER_SLACK, || format!("N={n}: ledger closure {closure:e}"))?;
        let m = &battery_deviation_check(&r, &work, r.total_error, &z).map_err(core)?[0];
        ensure(m.pass, || {
            format!("N={n}: deviation {:e} > bound {:e}", m.deviation, m.bound)
        })?;
        deviations.push(m.deviation);
    }
    ensure(deviations.windows(2).all(|w| w[1] < w[0]), || {
        format!("deviation not decreasing: {deviations:?}")
    })?;
    Ok(format!(
        "deviations {:.3e}, {:.3e}, {:.3e} at N = 100, 400, 1600",
        deviations[0], deviations[1], deviations[2]
    ))
}

fn cli_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs = [
        r#"{"mode":"converge","dimension":3,"N_list":[40,80,160],"target":"random","initial":"random_pure","seed":11}"#,
        r#"{"mode":"conserve","dimension":2,"N":40,"target":"random","initial":"random_mixed","charges":["X","Y","Z"],"seed":12}"#,
        r#"{"mode":"battery","dimension":2,"N_list":[50,100],"target":{"random":{}},"initial":"random_pure","charges":["Z","X"],"seed":13}"#,
        r#"{"mode":"thermo","dimension":2,"charges":["Z","X"],"betas":[1,0.5],"draws":50,"gibbs_draws":20,"seed":14}"#,
    ];
    let mut files = 0;
    for (k, body) in configs.iter().enumerate() {
        let cfg = dir.path().join(format!("c{k}.json"));
        fs::write(&cfg, body).map_err(|e| e.to_string())?;
        let outs: Vec<_> = ["a", "b"].iter().map(|r| dir.path().join(format!("{k}{r}"))).collect();
        for out in &outs {
            let status = Command::new(env!("CARGO_BIN_EXE_qframe"))
                .arg("--config")
                .arg(&cfg)
                .arg("--out")
                .arg(out)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.success(), || {
                format!("config {k}: exit {:?}", status.status.code())
            })?;
        }
        let names = listing(&outs[0])?;
        ensure(names == listing(&outs[1])?, || {
            format!("config {k}: different file sets")
        })?;
        for name in names {
            let a = fs::read(outs[0].join(&name)).map_err(|e| e.to_string())?;
            let b = fs::read(outs[1].join(&name)).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("config {k}: {name} differs between runs"))?;
            files += 1;
        }
    }
    Ok(format!("{files} output files byte-identical across two runs"))
}

fn listing(dir: &Path) -> Result<Vec<String>, String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    names.sort();
    Ok(names)
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("partial-trace SWAP identities", swap_identities),
        ("charge conservation and ledger closure", conservation),
        ("single-step bound", single_step),
        ("block bound", block),
        ("total bound and 1/N scaling", total_bound_and_scaling),
        ("dual basis and alpha_max", dual_basis_and_alpha_max),
        ("two-subsystem primitive", composite_primitive),
        ("second law and Gibbs minimality", second_law),
        ("battery deviation", battery),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2}s): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s): {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
