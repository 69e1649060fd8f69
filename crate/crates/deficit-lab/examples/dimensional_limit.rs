//! The lift to R^n x R^N and the three residuals that vanish at rate N^{-1}:
//! d0 - 4 D0, the drift identity defect key1 = Δ(d0 v)/v - (m/b²)|B|², and
//! key3 = Δ(d0 v)/v - 8τ|F|² tying the elliptic equation to the parabolic.
//!
//! Run with: cargo run --release --example dimensional_limit

use deficit_lab::corpus::standard_corpus;
use deficit_lab::lift::{deficit_gap, dfct_residual, key_residuals, LiftPoint};
use deficit_lab::sweep::fit_rate_with_floor;

fn main() {
    let corpus = standard_corpus();
    let mix = &corpus[2].mixture; // twin_peaks
    let (x, tau) = (0.3, 1.0);

    println!("pointwise elliptic-parabolic gap d0 - 4 D0 (twin_peaks, x = {x}, τ = {tau}):");
    let mut pts = Vec::new();
    for big_n in [1_000u32, 10_000, 100_000, 1_000_000] {
        let gap = deficit_gap(mix, &[x], tau, big_n).unwrap();
        pts.push((big_n as f64, gap.abs()));
        println!(
            "  N = {big_n:>8}: gap = {gap:+.6e}   N·gap = {:+.6}",
            big_n as f64 * gap
        );
    }
    let fit = fit_rate_with_floor(&pts, 1e-13).unwrap();
    println!(
        "  log-log slope {:.4} (r² = {:.6})",
        fit.slope, fit.r_squared
    );

    println!();
    println!("drift-identity residual (exact identity; residual is FD noise):");
    for big_n in [10u32, 40, 120] {
        let p = LiftPoint::from_tau(vec![x], tau, big_n).unwrap();
        let res = dfct_residual(mix, &p, 1e-3).unwrap();
        println!("  N = {big_n:>4}: residual = {res:+.3e}");
    }

    println!();
    println!("key residuals over N (slopes should be ≤ -0.85):");
    let mut k1_pts = Vec::new();
    let mut k3_pts = Vec::new();
    for big_n in [1_000u32, 10_000, 100_000] {
        let p = LiftPoint::from_tau(vec![x], tau, big_n).unwrap();
        let (k1, k3) = key_residuals(mix, &p, 1e-3).unwrap();
        k1_pts.push((big_n as f64, k1.abs()));
        k3_pts.push((big_n as f64, k3.abs()));
        println!("  N = {big_n:>8}: key1 = {k1:+.3e}  key3 = {k3:+.3e}");
    }
    let f1 = fit_rate_with_floor(&k1_pts, 1e-13).unwrap();
    let f3 = fit_rate_with_floor(&k3_pts, 1e-13).unwrap();
    println!("  slopes: key1 {:.3}, key3 {:.3}", f1.slope, f3.slope);

    println!();
    println!(
        "kernel anchor: d0 → 2n log 4π = {:.10}",
        2.0 * (4.0 * std::f64::consts::PI).ln()
    );
    let kernel = &corpus[0].mixture;
    for big_n in [1_000u32, 1_000_000] {
        let p = LiftPoint::from_tau(vec![0.0], 1.0, big_n).unwrap();
        let le = deficit_lab::lift::lift_eval(kernel, &p).unwrap();
        println!("  N = {big_n:>8}: d0 = {:.10}", le.d0);
    }
}
