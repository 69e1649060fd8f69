//! Acceptance gate: one test per criterion, each driving the public runners
//! end to end at the pinned tolerances and printing a pass/fail line.

use std::time::{Duration, Instant};

use deficit_lab::cli::{
    run_entropy, run_experiment, run_identities, run_limit_rates, run_projection, run_slicing,
    thresholds, CheckRow, Experiment, ExperimentConfig,
};
use deficit_lab::entropy::{entropy_report, rescaled_density_gap};
use deficit_lab::heat_model::GaussianMixture;
use deficit_lab::lift::{lift_eval, LiftPoint};
use deficit_lab::parabolic::parabolic_eval;
use deficit_lab::sweep::fit_rate_with_floor;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn base_config() -> ExperimentConfig {
    ExperimentConfig {
        output_dir: tempfile::tempdir().unwrap().keep(),
        ..ExperimentConfig::default()
    }
}

fn report(criterion: &str, checks: &[CheckRow], elapsed: Duration, budget: Duration) {
    let failed: Vec<&CheckRow> = checks.iter().filter(|c| !c.passed).collect();
    let ok = failed.is_empty() && elapsed <= budget;
    println!(
        "[{}] {criterion}: {}/{} checks in {:.1}s (budget {:.0}s)",
        if ok { "PASS" } else { "FAIL" },
        checks.len() - failed.len(),
        checks.len(),
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    for c in &failed {
        println!(
            "    failed: {}/{} ({}) value {:.6e} threshold {}",
            c.experiment, c.check, c.detail, c.value, c.threshold
        );
    }
    assert!(
        failed.is_empty(),
        "{criterion}: {} check(s) failed",
        failed.len()
    );
    assert!(
        elapsed <= budget,
        "{criterion}: took {:.1}s, budget {:.0}s",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
}

#[test]
fn criterion_1_exact_identity_suite() {
    let cfg = base_config();
    let start = Instant::now();
    let (_, checks) = run_identities(&cfg).unwrap();
    report(
        "criterion 1 (exact identities)",
        &checks,
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_2_rate_suite() {
    let cfg = base_config();
    let start = Instant::now();
    let (_, checks) = run_limit_rates(&cfg).unwrap();
    report(
        "criterion 2 (asymptotic rates)",
        &checks,
        start.elapsed(),
        Duration::from_secs(180),
    );
}

#[test]
fn criterion_3_kernel_equality_anchors() {
    let start = Instant::now();
    let mix = GaussianMixture::standard_kernel(1);
    let mut checks: Vec<CheckRow> = Vec::new();
    let push = |checks: &mut Vec<CheckRow>, name: &str, value: f64, max: f64| {
        checks.push(CheckRow {
            experiment: "kernel-anchors",
            check: name.into(),
            detail: String::new(),
            value,
            threshold: format!("<= {max:e}"),
            passed: value <= max,
        });
    };

    // D0 = (n/2) log 4π to 1e-12 at random points
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let expect = 0.5 * (4.0 * std::f64::consts::PI).ln();
    let mut d0_max: f64 = 0.0;
    for _ in 0..1000 {
        let x = [rng.gen_range(-4.0..4.0)];
        let t = rng.gen_range(0.1..10.0);
        let pe = parabolic_eval(&mix, &x, t).unwrap();
        d0_max = d0_max.max((pe.d0 - expect).abs());
    }
    push(
        &mut checks,
        "d0_constant",
        d0_max,
        thresholds::KERNEL_D0_CONST,
    );

    // d0 -> 2n log 4π with slope -1
    let target = 2.0 * (4.0 * std::f64::consts::PI).ln();
    let pts: Vec<(f64, f64)> = [1_000u32, 10_000, 100_000, 1_000_000]
        .iter()
        .map(|&n| {
            let p = LiftPoint::from_tau(vec![0.0], 1.0, n).unwrap();
            (n as f64, (lift_eval(&mix, &p).unwrap().d0 - target).abs())
        })
        .collect();
    let fit = fit_rate_with_floor(&pts, 1e-13).unwrap();
    checks.push(CheckRow {
        experiment: "kernel-anchors",
        check: "d0_limit_slope".into(),
        detail: String::new(),
        value: fit.slope,
        threshold: "slope in [-1.1, -0.9]".into(),
        passed: (-1.1..=-0.9).contains(&fit.slope),
    });

    // W = (n/2)(2 + log 4π) to 1e-9 and zero log-Sobolev deficit
    let rep = entropy_report(&mix, 1.0).unwrap();
    let w_target = 0.5 * (2.0 + (4.0 * std::f64::consts::PI).ln());
    push(
        &mut checks,
        "w_anchor",
        (rep.w - w_target).abs(),
        thresholds::KERNEL_W,
    );
    push(
        &mut checks,
        "logsob_deficit_zero",
        rep.logsob_deficit.abs(),
        thresholds::KERNEL_W,
    );

    // the rescaled density is the standard Gaussian identically
    let (l1, _) = rescaled_density_gap(&mix, 1.0).unwrap();
    push(&mut checks, "rescaled_identity", l1, thresholds::KERNEL_L1);

    report(
        "criterion 3 (kernel anchors)",
        &checks,
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_4_slicing_suite() {
    let cfg = base_config();
    let start = Instant::now();
    let (_, checks) = run_slicing(&cfg).unwrap();
    report(
        "criterion 4 (slicing)",
        &checks,
        start.elapsed(),
        Duration::from_secs(240),
    );
}

#[test]
fn criterion_5_entropy_appendix_suite() {
    let cfg = base_config();
    let start = Instant::now();
    let (_, mut checks) = run_entropy(&cfg).unwrap();
    checks.extend(run_projection(&cfg).unwrap().1);
    report(
        "criterion 5 (entropy / appendix)",
        &checks,
        start.elapsed(),
        Duration::from_secs(240),
    );
}

#[test]
fn criterion_6_full_run_reproducible() {
    let start = Instant::now();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig {
        experiment: Experiment::All,
        output_dir: dir_a.path().to_path_buf(),
        ..ExperimentConfig::default()
    };
    let first = run_experiment(&cfg).unwrap();
    cfg.output_dir = dir_b.path().to_path_buf();
    let second = run_experiment(&cfg).unwrap();
    let elapsed = start.elapsed();

    let mut checks = vec![CheckRow {
        experiment: "all",
        check: "exit_status".into(),
        detail: format!("{} checks", first.checks.len()),
        value: first.failed().len() as f64,
        threshold: "all checks pass".into(),
        passed: first.all_passed() && second.all_passed(),
    }];
    for name in [
        "identities.csv",
        "limit-rates.csv",
        "slicing.csv",
        "entropy.csv",
        "projection.csv",
        "summary.csv",
    ] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        checks.push(CheckRow {
            experiment: "all",
            check: format!("byte_identical_{name}"),
            detail: String::new(),
            value: if a == b { 0.0 } else { 1.0 },
            threshold: "identical reruns".into(),
            passed: a == b,
        });
    }
    report(
        "criterion 6 (full run, reproducible)",
        &checks,
        elapsed,
        Duration::from_secs(600),
    );
}
