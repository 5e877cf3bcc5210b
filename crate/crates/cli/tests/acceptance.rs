//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! nonzero status if any criterion fails.

use std::time::Instant;

use advest::check::run_check;
use advest::presets::{run_preset, Preset, PresetOutput, TABLE_BETAS};
use advest::runner::{run_custom, CellResult};
use advest::RunConfig;
use advest_core::residual::{check_hat_orthogonality, dual_norm_global, dual_norms_local};
use advest_core::ORTHOGONALITY_TOL;
use advest_core::{exact_error, AdvectionProblem, Method, Mesh1D, SourceTerm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

/// Effectivity indices of the robustness tables, reference per mesh.
const TABLE1_K1: [f64; 4] = [1.234, 1.058, 1.014, 1.004];
const TABLE2_K1: [f64; 4] = [1.126, 1.032, 1.008, 1.002];

fn robustness(output: &PresetOutput, expected: &[f64; 4], seconds: f64) -> Outcome {
    let rows = &output.block(1).expect("k = 1 block").rows;
    let mut max_dev: f64 = 0.0;
    let mut max_spread: f64 = 0.0;
    let mut ok = rows.len() == 4 * TABLE_BETAS.len();
    for (mesh_rows, &reference) in rows.chunks(TABLE_BETAS.len()).zip(expected) {
        let ieff: Vec<f64> = mesh_rows.iter().map(|r| r.i_eff.unwrap_or(f64::NAN)).collect();
        for &i in &ieff {
            max_dev = max_dev.max((i - reference).abs());
            max_spread = max_spread.max(rel(i, ieff[0]));
            ok &= (i - reference).abs() <= 0.002 && rel(i, ieff[0]) <= 1e-6;
        }
    }
    ok &= seconds < 5.0;
    outcome(
        ok,
        format!("max |I_eff - ref| = {max_dev:.1e} (tol 2e-3), beta spread {max_spread:.1e} (tol 1e-6), {seconds:.2} s (limit 5 s)"),
    )
}

fn exactness(outputs: &[&PresetOutput]) -> Outcome {
    let mut worst: Option<&CellResult> = None;
    let mut count = 0;
    let mut coarse: f64 = 0.0;
    let dev = |r: &CellResult| (r.i_eff.unwrap_or(f64::NAN) - 1.0).abs();
    for output in outputs {
        for r in &output.block(2).expect("k = 2 block").rows {
            count += 1;
            if r.cell.elements < 256 {
                coarse = coarse.max(dev(r));
            }
            if worst.is_none_or(|w| dev(r) > dev(w)) {
                worst = Some(r);
            }
        }
    }
    let w = worst.expect("nonempty blocks");
    // both η_NC and the error are differences of O(‖u_h‖) quantities
    let floor = f64::EPSILON * w.uh_norm / w.error.unwrap_or(f64::NAN);
    outcome(
        dev(w) <= 1e-8,
        format!(
            "{count} runs, max |I_eff - 1| = {:.1e} (tol 1e-8) at {}, where the rounding level eps*|u_h|/|u - u_h| is {floor:.1e}; below 256 elements the max is {coarse:.1e}",
            dev(w),
            w.cell
        ),
    )
}

enum Quantity {
    EtaNc,
    EtaOsc,
    Error,
    Ieff,
}

fn value(r: &CellResult, q: &Quantity) -> f64 {
    match q {
        Quantity::EtaNc => r.eta_nc,
        Quantity::EtaOsc => r.eta_osc,
        Quantity::Error => r.error.unwrap_or(f64::NAN),
        Quantity::Ieff => r.i_eff.unwrap_or(f64::NAN),
    }
}

/// `(k, elements, quantity, reference, relative tolerance)`.
type Spot = (usize, usize, Quantity, f64, f64);

fn spot_rows(output: &PresetOutput, spots: &[Spot]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, elements, quantity, reference, tol) in spots {
        let row = output
            .block(*k)
            .and_then(|b| b.rows.iter().find(|r| r.cell.elements == *elements));
        let dev = row.map_or(f64::INFINITY, |r| rel(value(r, quantity), *reference));
        ok &= dev <= *tol;
        parts.push(format!("k={k}/{elements}: {:.2}%", 100.0 * dev));
    }
    outcome(ok, format!("relative deviations {}", parts.join(", ")))
}

fn random_bound(seconds: f64, summary: &advest::CheckSummary) -> Outcome {
    let violations = summary.violations().len();
    outcome(
        violations == 0 && summary.outcomes.len() >= 200 && seconds < 60.0,
        format!(
            "{} cases, {} hat-orthogonal, {violations} violations, {seconds:.2} s (limit 60 s)",
            summary.outcomes.len(),
            summary.orthogonal_cases()
        ),
    )
}

fn dual_configs() -> Vec<(Method, usize, usize)> {
    vec![
        (Method::Pg2, 0, 4),
        (Method::Pg2, 1, 4),
        (Method::Pg2, 2, 2),
        (Method::Dg, 1, 4),
        (Method::Dg, 2, 2),
        (Method::Dg, 3, 2),
    ]
}

fn arctan_problem() -> AdvectionProblem {
    AdvectionProblem::new(1.0, SourceTerm::Arctan).expect("valid problem")
}

fn error_residual_equality() -> Outcome {
    let problem = arctan_problem();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut shrinks = 0;
    for (method, k, n) in dual_configs() {
        let mesh = Mesh1D::uniform(0.0, 1.0, n).unwrap();
        let uh = method.solve(&problem, &mesh, k).unwrap();
        let err = exact_error(&uh, &problem).unwrap();
        let d8 = dual_norm_global(&uh, &problem, 8, 2).unwrap();
        let d16 = dual_norm_global(&uh, &problem, 16, 2).unwrap();
        let gap8 = (err - d8).abs() / err;
        let gap16 = (err - d16).abs() / err;
        worst = worst.max(gap8);
        ok &= gap8 <= 0.02;
        // gaps at rounding level cannot shrink further
        if gap16 <= gap8 || gap16 <= 1e-10 {
            shrinks += 1;
        } else {
            ok = false;
        }
    }
    outcome(
        ok,
        format!("6 configs, max relative gap {worst:.2e} at m=8 (tol 2e-2), gap shrinks at m=16 in {shrinks}/6"),
    )
}

fn localization() -> Outcome {
    let problem = arctan_problem();
    let mut ok = true;
    let (mut upper, mut lower): (f64, f64) = (0.0, 0.0);
    for (method, k, n) in dual_configs() {
        let mesh = Mesh1D::uniform(0.0, 1.0, n).unwrap();
        let uh = method.solve(&problem, &mesh, k).unwrap();
        let report = dual_norms_local(&uh, &problem, 8, 2).unwrap();
        ok &= report.upper_holds && report.lower_holds;
        upper = upper.max(report.upper_ratio);
        lower = lower.max(report.lower_ratio);
    }
    outcome(
        ok,
        format!("6 configs, max upper ratio {upper:.3}, max lower ratio {lower:.3} (both must be <= 1)"),
    )
}

fn orthogonality_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let cases: Vec<(Method, usize)> = [(Method::Pg1, 2..=3), (Method::Pg2, 0..=4), (Method::Dg, 1..=4)]
        .into_iter()
        .flat_map(|(m, ks)| ks.map(move |k| (m, k)))
        .collect();
    let mut runs = 0;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for &(method, k) in &cases {
        for _ in 0..8 {
            let n = rng.gen_range(1..=20);
            let mut vertices = vec![0.0];
            for _ in 0..n {
                let last = *vertices.last().unwrap();
                vertices.push(last + rng.gen_range(0.1..1.0));
            }
            let mesh = Mesh1D::from_vertices(vertices).unwrap();
            let beta = if rng.gen_bool(0.5) { 1.0 } else { -1.0 } * 10f64.powf(rng.gen_range(-4.0..4.0));
            let source = match rng.gen_range(0..3) {
                0 => SourceTerm::Arctan,
                1 => SourceTerm::quadratic_with_sine_jumps(),
                _ => SourceTerm::Polynomial((0..5).map(|_| rng.gen_range(-3.0..3.0)).collect()),
            };
            let problem = AdvectionProblem::new(beta, source).unwrap();
            let uh = method.solve(&problem, &mesh, k).unwrap();
            for c in check_hat_orthogonality(&uh, &problem).unwrap() {
                worst = worst.max(c.relative());
                ok &= c.passes;
            }
            runs += 1;
        }
    }
    outcome(
        ok && worst <= ORTHOGONALITY_TOL,
        format!("{runs} runs over {} (method, k) pairs, max |r_a| / scale = {worst:.1e} (tol 1e-11)", cases.len()),
    )
}

fn structure<'a>(results: impl Iterator<Item = &'a CellResult>) -> Outcome {
    let mut count = 0;
    let mut failures = 0;
    let mut worst_jump: f64 = 0.0;
    let mut worst_defect: f64 = 0.0;
    for r in results {
        count += 1;
        if !r.structure_ok() {
            failures += 1;
        }
        let s = &r.structure;
        worst_jump = worst_jump.max(s.max_jump.max(s.inflow_value.abs()) / s.value_scale.max(f64::MIN_POSITIVE));
        worst_defect = worst_defect.max(s.projection_defect / s.source_scale.max(f64::MIN_POSITIVE));
    }
    outcome(
        failures == 0,
        format!("{count} runs, {failures} failures, max relative jump/inflow {worst_jump:.1e}, max relative projection defect {worst_defect:.1e} (tol 1e-10)"),
    )
}

/// Runs where `f ψ_a ∈ P_{k'}` on every patch, so the global ratio applies.
fn hypothesis_runs() -> Vec<CellResult> {
    [Method::Pg2, Method::Dg]
        .into_iter()
        .flat_map(|method| {
            let config = RunConfig::parse(&format!(
                "method = {method}\nk = 1\nkprime = 2\nelements = 4,16\nbeta = 1e-4,1,1e4\nsource = poly:1,2\n"
            ))
            .expect("valid config");
            run_custom(&config).expect("supplementary runs")
        })
        .collect()
}

fn efficiency(output: &PresetOutput, extra: &[CellResult]) -> Outcome {
    let rows = &output.block(1).expect("k = 1 block").rows;
    let mut ok = true;
    let (mut local, mut global): (f64, f64) = (0.0, 0.0);
    let mut with_hypothesis = 0;
    for r in rows.iter().chain(extra) {
        let Some(e) = &r.efficiency else {
            ok = false;
            continue;
        };
        local = local.max(e.max_local_ratio);
        ok &= e.max_local_ratio <= 1.0;
        if e.global_hypothesis {
            with_hypothesis += 1;
            global = global.max(e.global_ratio);
            ok &= e.global_ratio <= 1.0;
        }
    }
    ok &= extra.iter().all(|r| r.efficiency.as_ref().is_some_and(|e| e.global_hypothesis));
    outcome(
        ok,
        format!(
            "{} runs plus {} with linear data, max local ratio {local:.3}, global ratio on {with_hypothesis} runs where its hypothesis holds (max {global:.3})",
            rows.len(),
            extra.len()
        ),
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed().as_secs_f64())
}

fn main() {
    let (table1, t1) = timed(|| run_preset(Preset::Table1, None).expect("table1"));
    let (table2, t2) = timed(|| run_preset(Preset::Table2, None).expect("table2"));
    let table3 = run_preset(Preset::Table3, None).expect("table3");
    let table4 = run_preset(Preset::Table4, None).expect("table4");
    let (check, t6) = timed(|| run_check(20_240_601, 200).expect("randomized suite"));

    use Quantity::*;
    let criteria: Vec<(&str, Outcome)> = vec![
        ("velocity robustness, PG2 (preset table1)", robustness(&table1, &TABLE1_K1, t1)),
        ("velocity robustness, dG (preset table2)", robustness(&table2, &TABLE2_K1, t2)),
        ("exactness for k = k' = 2, PG2 and dG", exactness(&[&table1, &table2])),
        (
            "convergence spot rows, PG2 (preset table3)",
            spot_rows(
                &table3,
                &[
                    (0, 4, EtaNc, 3.574e-2, 0.01),
                    (0, 4, EtaOsc, 1.446e-2, 0.01),
                    (0, 4, Error, 3.562e-2, 0.01),
                    (0, 4, Ieff, 1.35, 0.01),
                    (1, 16, Error, 1.167e-4, 0.01),
                    (1, 16, Ieff, 1.04, 0.01),
                    (4, 4, Ieff, 1.80, 0.02),
                ],
            ),
        ),
        (
            "convergence spot rows, dG (preset table4)",
            spot_rows(
                &table4,
                &[
                    (1, 4, Ieff, 1.10, 0.01),
                    (2, 16, EtaNc, 6.299e-7, 0.01),
                    (3, 64, Error, 1.821e-11, 0.02),
                ],
            ),
        ),
        ("guaranteed bound on 200 random configurations", random_bound(t6, &check)),
        ("error equals residual dual norm", error_residual_equality()),
        ("localization of the dual norm", localization()),
        ("hat-function orthogonality", orthogonality_suite()),
        (
            "reconstruction structure on the runs above",
            structure(
                table1
                    .results()
                    .chain(table2.results())
                    .chain(table3.results())
                    .chain(table4.results())
                    .chain(check.outcomes.iter().map(|o| &o.result)),
            ),
        ),
        ("local and global efficiency ratios", efficiency(&table1, &hypothesis_runs())),
    ];

    let mut failed = 0;
    for (i, (name, o)) in criteria.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{tag} {:>2} {name}: {}", i + 1, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
