//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::FRAC_1_SQRT_2;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use hidden_momentum::basis::QuantumNumbers;
use hidden_momentum::hidden::{eq9_ratio, estimate};
use hidden_momentum::quadrature::{sandwich_integral, Kernel, KetFactor};
use hidden_momentum::stark::{evolve_211, perturbed_state, stark_n2_eigensystem, FieldConfig, GuardPolicy};
use hidden_momentum::{ElementTable, OperatorKind, UnitSystem};
use hidmom_cli::commands::{self, FIGURE3_STATES};
use hidmom_cli::table::TIMING_KEY;
use hidmom_cli::{FigureTable, RunConfig};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const E: f64 = 1e-8;

type Check = Result<String, String>;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
}

fn criterion(id: u32, name: &'static str, budget_seconds: f64, body: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let seconds = start.elapsed().as_secs_f64();
    let (mut pass, mut detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if seconds > budget_seconds {
        pass = false;
        detail = format!("{detail}; runtime {seconds:.2} s over budget {budget_seconds} s");
    }
    Outcome {
        id,
        name,
        pass,
        detail,
        seconds,
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn qn(n: i32, l: i32, m: i32) -> QuantumNumbers {
    QuantumNumbers::new(n, l, m).unwrap()
}

fn stark_eigensystem() -> Check {
    let table = ElementTable::default();
    let eig = stark_n2_eigensystem(&table, E).map_err(|e| e.to_string())?;
    let h = FRAC_1_SQRT_2;
    let analytic = [
        (-3.0, [-h, -0.5, 0.0, 0.5]),
        (0.0, [0.0, h, 0.0, h]),
        (0.0, [0.0, 0.0, 1.0, 0.0]),
        (3.0, [h, -0.5, 0.0, 0.5]),
    ];
    let mut shift_err: f64 = 0.0;
    let mut overlap_err: f64 = 0.0;
    for (k, (shift, vector)) in analytic.iter().enumerate() {
        shift_err = shift_err.max((eig.pairs[k].shift / E - shift).abs());
        let overlap = eig
            .components(k)
            .iter()
            .zip(vector)
            .map(|(c, v)| c.conj() * v)
            .sum::<Complex64>()
            .norm();
        overlap_err = overlap_err.max((overlap - 1.0).abs());
    }
    let detail =
        format!("max |shift/E - expected| = {shift_err:.1e}, max |1 - overlap| = {overlap_err:.1e} (tol 1e-10)");
    ensure(shift_err <= 1e-10 && overlap_err <= 1e-10, || detail.clone())?;
    Ok(detail)
}

fn position_oscillation() -> Check {
    let table = ElementTable::default();
    let evolving = evolve_211(&table, E, 2).map_err(|e| e.to_string())?;
    let y = evolving
        .expectation_series(&table, OperatorKind::Y, false)
        .map_err(|e| e.to_string())?;
    let omega = 3.0 * E;
    let (cos, sin) = y.oscillation(omega, 1e-6 * E);
    let freqs = y.positive_frequencies(1e-12);
    let detail = format!(
        "<y>(t) = {cos:.3e} cos + {sin:.15} sin, frequencies/E = {:?}",
        freqs.iter().map(|w| w / E).collect::<Vec<_>>()
    );
    ensure(freqs.len() == 1 && (freqs[0] / omega - 1.0).abs() <= 1e-10, || {
        detail.clone()
    })?;
    ensure((sin + 3.0).abs() <= 1e-10 && cos.abs() <= 1e-10, || detail.clone())?;
    Ok(detail)
}

fn appendix_report() -> Result<hidmom_cli::AppendixReport, String> {
    commands::appendix(&RunConfig::default())
        .map(|o| o.output)
        .map_err(|e| e.to_string())
}

fn momentum_coefficient() -> Check {
    let report = appendix_report()?;
    let c = report.py0_coefficient;
    let detail = format!("<p_y>(0)/E = {c:.6} (target -8.25 ± 0.05, n_max = 20)");
    ensure((c + 8.25).abs() <= 0.05, || detail.clone())?;
    Ok(detail)
}

fn velocity_ratio() -> Check {
    let report = appendix_report()?;
    let r = report.velocity_ratio;
    let detail = format!("m_e d<y>/dt / <p_y> at t = 0: {r:.6} (target 1.09 ± 0.02)");
    ensure((r - 1.09).abs() <= 0.02, || detail.clone())?;
    Ok(detail)
}

fn figure3_check(table: &FigureTable) -> Check {
    ensure(table.rows.len() == 11, || format!("{} rows", table.rows.len()))?;
    let mut worst = (0.0, String::new());
    for (i, &(n, l, m)) in FIGURE3_STATES.iter().enumerate() {
        let row = (table.value(i, "n"), table.value(i, "l"), table.value(i, "m"));
        ensure(row == (Some(n.into()), Some(l.into()), Some(m.into())), || {
            format!("row {i} is {row:?}")
        })?;
        let ratio = table.value(i, "ratio").ok_or("missing ratio")?;
        let residual = (ratio + f64::from(m)).abs();
        let scaled = residual / (0.15 * f64::from(m.abs()).max(1.0));
        if scaled > worst.0 {
            worst = (scaled, format!("({n},{l},{m}) ratio {ratio:.4}"));
        }
    }
    let detail = format!("worst residual at {:.0}% of tolerance: {}", 100.0 * worst.0, worst.1);
    ensure(worst.0 <= 1.0, || detail.clone())?;
    Ok(detail)
}

fn figure4_check(table: &FigureTable) -> Check {
    ensure(table.rows.len() == 13, || format!("{} rows", table.rows.len()))?;
    let mut worst: f64 = 0.0;
    for i in 0..table.rows.len() {
        let theta = table.value(i, "theta").ok_or("missing theta")?;
        let ratio = table.value(i, "ratio").ok_or("missing ratio")?;
        worst = worst.max((ratio - theta.cos()).abs());
    }
    let detail = format!("max |ratio - cos θ| = {worst:.4} over 13 tilts (tol 0.15)");
    ensure(worst <= 0.15, || detail.clone())?;
    Ok(detail)
}

fn closure_check(fig3: &FigureTable, fig4: &FigureTable) -> Check {
    let mut worst: f64 = 0.0;
    let mut zero_target_worst: f64 = 0.0;
    let mut record = |p2a: f64, target: f64| {
        if target.abs() > 1e-12 {
            worst = worst.max(((p2a - target) / target).abs());
        } else {
            zero_target_worst = zero_target_worst.max(p2a.abs());
        }
    };
    for (i, &(_, _, m)) in FIGURE3_STATES.iter().enumerate() {
        record(fig3.value(i, "p2a_mu").ok_or("missing p2a")?, f64::from(-m));
    }
    for i in 0..fig4.rows.len() {
        let theta = fig4.value(i, "theta").ok_or("missing theta")?;
        record(fig4.value(i, "p2a_mu").ok_or("missing p2a")?, theta.cos());
    }
    let detail = format!(
        "max relative gap of the external term to -m μ_B E cosθ/c²: {worst:.1e} (tol 1e-3); |value| where the target vanishes: {zero_target_worst:.1e}"
    );
    ensure(worst <= 1e-3 && zero_target_worst <= 1e-12, || detail.clone())?;
    Ok(detail)
}

fn property_suites() -> Check {
    let identity = Kernel::ket(KetFactor::new(0, None, None));
    let states: Vec<QuantumNumbers> = (1..=8).flat_map(QuantumNumbers::shell).collect();
    let mut ortho: f64 = 0.0;
    for a in &states {
        for b in states.iter().filter(|b| b.m() == a.m()) {
            let v = sandwich_integral(a, b, &identity).map_err(|e| e.to_string())?;
            ortho = ortho.max((v - if a == b { 1.0 } else { 0.0 }).norm());
        }
    }
    let table = ElementTable::default();
    let small: Vec<QuantumNumbers> = (1..=4).flat_map(QuantumNumbers::shell).collect();
    let hermitian = [
        OperatorKind::X,
        OperatorKind::Y,
        OperatorKind::Z,
        OperatorKind::INV_R,
        OperatorKind::PY,
        OperatorKind::SYM_INV_R_PY,
        OperatorKind::P2,
    ];
    let mut herm: f64 = 0.0;
    for kind in hermitian {
        for a in &small {
            for b in small.iter().filter(|b| kind.allowed(a, b)) {
                let ab = table.direct_element(a, b, kind).map_err(|e| e.to_string())?;
                let ba = table.direct_element(b, a, kind).map_err(|e| e.to_string())?;
                herm = herm.max((ab - ba.conj()).norm());
            }
        }
    }
    let forbidden = [
        OperatorKind::X,
        OperatorKind::Z,
        OperatorKind::Y_OVER_R3,
        OperatorKind::PY,
        OperatorKind::XPY,
        OperatorKind::SYM_INV_R_PY,
        OperatorKind::PY_P2,
    ];
    let mut selection: f64 = 0.0;
    let tiny: Vec<QuantumNumbers> = (1..=3).flat_map(QuantumNumbers::shell).collect();
    for kind in forbidden {
        for a in &tiny {
            for b in tiny.iter().filter(|b| !kind.allowed(a, b)) {
                selection = selection.max(table.direct_element(a, b, kind).map_err(|e| e.to_string())?.norm());
            }
        }
    }
    let detail = format!(
        "orthonormality n ≤ 8: {ortho:.1e} (tol 1e-10); Hermiticity: {herm:.1e} (tol 1e-12); forbidden elements: {selection:.1e} (tol 1e-12)"
    );
    ensure(ortho <= 1e-10 && herm <= 1e-12 && selection <= 1e-12, || detail.clone())?;
    Ok(detail)
}

fn dual_strategy() -> Check {
    let table = ElementTable::default();
    let mut rng = StdRng::seed_from_u64(20_240_917);
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    while pairs < 50 {
        let n = rng.gen_range(1..=10);
        let l = rng.gen_range(0..n);
        let m = rng.gen_range(-l..=l);
        let a = qn(n, l, m);
        let lb = l + if rng.gen_bool(0.5) { 1 } else { -1 };
        let mb = m + if rng.gen_bool(0.5) { 1 } else { -1 };
        if lb < 0 || mb.abs() > lb || lb >= 10 {
            continue;
        }
        let nb = rng.gen_range(lb + 1..=10);
        if nb == n {
            continue;
        }
        let b = qn(nb, lb, mb);
        let scalar = qn(rng.gen_range(l + 1..=10), l, m);
        for (bra, ket, kind) in [
            (a, b, OperatorKind::PY),
            (a, b, OperatorKind::PY_P2),
            (a, scalar, OperatorKind::P2),
        ] {
            let dual = table
                .verify_against_direct(&bra, &ket, kind)
                .map_err(|e| e.to_string())?;
            worst = worst.max(dual.relative_gap);
        }
        pairs += 1;
    }
    let detail = format!(
        "50 random pairs (n ≤ 10), Py/PyP2/P2 against gradient quadrature: max relative gap {worst:.1e} (tol 1e-8)"
    );
    ensure(worst <= 1e-8, || detail.clone())?;
    Ok(detail)
}

fn linearity_and_c() -> Check {
    let table = ElementTable::default();
    let units = UnitSystem::atomic();
    let mut worst: f64 = 0.0;
    for q in [qn(2, 1, 1), qn(3, 1, -1), qn(7, 6, 5)] {
        let a = eq9_ratio(&table, &q, &FieldConfig::along_x(E).unwrap(), 20, &units).map_err(|e| e.to_string())?;
        let b =
            eq9_ratio(&table, &q, &FieldConfig::along_x(2.0 * E).unwrap(), 20, &units).map_err(|e| e.to_string())?;
        for (x, y) in [(a.p1, b.p1), (a.p2a, b.p2a), (a.p2b, b.p2b)] {
            worst = worst.max((y / (2.0 * x) - 1.0).abs());
        }
    }
    let field = FieldConfig::along_x(E).unwrap();
    let mut bitwise = true;
    for q in [qn(2, 1, 1), qn(13, 12, -5)] {
        let r1 = eq9_ratio(&table, &q, &field, 20, &UnitSystem::atomic()).map_err(|e| e.to_string())?;
        let r2 =
            eq9_ratio(&table, &q, &field, 20, &UnitSystem::with_speed_of_light(100.0)).map_err(|e| e.to_string())?;
        bitwise &= r1.ratio.to_bits() == r2.ratio.to_bits();
    }
    let detail = format!("doubling E: max relative deviation from 2x {worst:.1e} (tol 1e-3); ratio bitwise equal for c = 137.035999 and c = 100: {bitwise}");
    ensure(worst <= 1e-3 && bitwise, || detail.clone())?;
    Ok(detail)
}

fn zero_field() -> Check {
    let table = ElementTable::default();
    let off = FieldConfig::off();
    let mut nonzero = 0;
    let mut total = 0;
    for (n, l, m) in FIGURE3_STATES {
        let q = qn(n, l, m);
        let p = perturbed_state(&table, &q, &off, 20, GuardPolicy::Error).map_err(|e| e.to_string())?;
        let est = estimate(&table, &p.state, &off).map_err(|e| e.to_string())?;
        for v in [est.v_c, est.p1.0, est.method2.p2a.0, est.method2.p2b.0]
            .iter()
            .flatten()
        {
            total += 1;
            if *v != 0.0 {
                nonzero += 1;
            }
        }
    }
    let detail = format!("{nonzero} of {total} outputs nonzero with zeroed coefficients over the 11 reference states");
    ensure(nonzero == 0, || detail.clone())?;
    Ok(detail)
}

fn hidmom(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hidmom"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?} exited with {:?}", out.status.code())
    })?;
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn without_timing(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains(TIMING_KEY))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Check {
    let golden_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut compared = 0;
    for (cmd, golden) in [("figure3", "figure3.csv"), ("figure4", "figure4.csv")] {
        let one = without_timing(&hidmom(&[cmd, "--threads", "1"])?);
        let four = without_timing(&hidmom(&[cmd, "--threads", "4"])?);
        ensure(one == four, || {
            format!("{cmd}: output differs between 1 and 4 worker threads")
        })?;
        let stored = std::fs::read_to_string(golden_dir.join(golden)).map_err(|e| e.to_string())?;
        ensure(one == without_timing(&stored), || {
            format!("{cmd}: output differs from tests/golden/{golden}")
        })?;
        compared += 3;
    }
    let a = without_timing(&hidmom(&["figure4", "--format", "json", "--threads", "2"])?);
    let b = without_timing(&hidmom(&["figure4", "--format", "json", "--threads", "3"])?);
    ensure(a == b, || "figure4 json differs across reruns".into())?;
    compared += 1;
    Ok(format!(
        "{compared} comparisons byte-identical (1 vs 4 threads, reruns, stored golden files), timing line excluded"
    ))
}

fn main() {
    let mut outcomes = vec![
        criterion(1, "Stark n=2 eigensystem", 1.0, stark_eigensystem),
        criterion(2, "<y>(t) amplitude and frequency", 1.0, position_oscillation),
        criterion(3, "<p_y>(0) coefficient", 30.0, momentum_coefficient),
        criterion(4, "velocity ratio", 30.0, velocity_ratio),
    ];

    let start = Instant::now();
    let fig3 = commands::figure3(&RunConfig::default()).map(|o| o.output);
    let fig3_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let fig4 = commands::figure4(&RunConfig::default()).map(|o| o.output);
    let fig4_seconds = start.elapsed().as_secs_f64();

    let mut o5 = criterion(5, "figure3 ratios against -m", 600.0, || match &fig3 {
        Ok(t) => figure3_check(t),
        Err(e) => Err(e.to_string()),
    });
    o5.seconds += fig3_seconds;
    outcomes.push(o5);
    let mut o6 = criterion(6, "figure4 ratios against cos θ", 600.0, || match &fig4 {
        Ok(t) => figure4_check(t),
        Err(e) => Err(e.to_string()),
    });
    o6.seconds += fig4_seconds;
    outcomes.push(o6);
    outcomes.push(criterion(
        7,
        "external term matches the point dipole",
        600.0,
        || match (&fig3, &fig4) {
            (Ok(a), Ok(b)) => closure_check(a, b),
            _ => Err("figure tables unavailable".into()),
        },
    ));
    outcomes.push(criterion(
        8,
        "orthonormality, Hermiticity, selection rules",
        600.0,
        property_suites,
    ));
    outcomes.push(criterion(9, "dual-strategy oracle", 600.0, dual_strategy));
    outcomes.push(criterion(10, "E-linearity and c-cancellation", 600.0, linearity_and_c));
    outcomes.push(criterion(11, "zero-field annihilation", 600.0, zero_field));
    outcomes.push(criterion(12, "determinism and golden files", 600.0, determinism));

    println!();
    println!("acceptance criteria");
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{:>2}] {} ({:.2} s): {}", o.id, o.name, o.seconds, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
