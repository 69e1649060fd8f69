//! The Poincaré projection: the uniform measure on the sphere of radius
//! √(2N) in R^{n+N} projects to a density converging to the Gaussian
//! (4π)^{-n/2} e^{-|x|²/4} at rate N^{-1}, driven by the Stirling ratio
//! N^{n/2} ω_{m-1}/ω_{N-1} → (2π)^{n/2} and the bound (1-δ/N)^{N/2} ≤ e^{-δ/2}.
//!
//! Run with: cargo run --release --example poincare_projection

use deficit_lab::entropy::poincare_projection_gap;
use deficit_lab::special::{half_power_decay, omega_ratio};
use deficit_lab::sweep::fit_rate_with_floor;

fn main() {
    let grid: Vec<Vec<f64>> = (0..=100)
        .map(|k| vec![-5.0 + 10.0 * k as f64 / 100.0])
        .collect();

    println!("sup-gap of the projected density to the Gaussian (101-point grid):");
    let mut pts = Vec::new();
    for big_n in [100u32, 1_000, 10_000, 100_000] {
        let gap = poincare_projection_gap(1, big_n, &grid).unwrap();
        pts.push((big_n as f64, gap));
        println!(
            "  N = {big_n:>7}: sup gap = {gap:.6e}   N·gap = {:.6}",
            big_n as f64 * gap
        );
    }
    let fit = fit_rate_with_floor(&pts, 1e-15).unwrap();
    println!(
        "  log-log slope {:.4} (r² = {:.6})",
        fit.slope, fit.r_squared
    );

    println!();
    let two_pi = 2.0 * std::f64::consts::PI;
    println!("Stirling ratio N^(n/2) ω_(m-1)/ω_(N-1) against (2π)^(n/2):");
    for n in [1u32, 2, 3] {
        let target = two_pi.powf(n as f64 / 2.0);
        print!("  n = {n}: ");
        for big_n in [100u32, 10_000, 1_000_000] {
            print!("N={big_n}: {:+.3e}  ", omega_ratio(n, big_n) - target);
        }
        println!();
    }
    println!("  (n = 2 telescopes exactly; n = 1, 3 close at rate 1/N)");

    println!();
    println!("Gaussian domination (1 - δ/N)^(N/2) ≤ e^(-δ/2):");
    for (delta, big_n) in [(1.0, 2u32), (50.0, 100), (200.0, 1_000)] {
        let v = half_power_decay(delta, big_n).unwrap();
        println!(
            "  δ = {delta:>5}, N = {big_n:>5}: {v:.6e} ≤ {:.6e}",
            (-delta / 2.0f64).exp()
        );
    }
}
