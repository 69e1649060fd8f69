//! Off-center sphere slicing: the weight h(x,r) = r γ(θ), the total mass μ
//! by three routes, the concentration of the radial profile, and the solid
//! average converging to its exact Gaussian-representation anchor.
//!
//! Run with: cargo run --release --example sphere_slicing

use deficit_lab::corpus::slicing_corpus;
use deficit_lab::slicing::{
    elliptic_limit_target, exact_anchor_gap, log_total_mass, radial_first_moment,
    radial_profile_integral, slice_geometry, slice_weight, sliced_average, MassMode,
};

fn main() {
    let tau = 1.0;
    let corpus = slicing_corpus();
    let mix = &corpus[0].mixture; // offset_kernel

    let geom = slice_geometry(1, 1_000, tau, 0.9, &[0.5]).unwrap();
    println!(
        "geometry at (N, τ, β, x) = (1000, {tau}, 0.9, 0.5): R = {:.4}, s = {:.4}, r̄ = {:.4}",
        geom.big_r, geom.s, geom.r_bar
    );
    let (lo, hi) = geom.interval();
    println!(
        "  h at endpoints: {:.1e}, {:.1e}; at r̄: {:.6e}",
        slice_weight(&geom, lo).unwrap(),
        slice_weight(&geom, hi).unwrap(),
        slice_weight(&geom, geom.r_bar).unwrap()
    );

    println!();
    println!("total mass μ(0): direct quadrature vs the sharp asymptotic (β = 0.9):");
    println!(
        "  {:<8} {:>18} {:>18} {:>12} {:>12}",
        "N", "log μ (quad)", "log μ (asym)", "rel gap", "N·gap"
    );
    for big_n in [100u32, 1_000, 10_000] {
        let g = slice_geometry(1, big_n, tau, 0.9, &[0.0]).unwrap();
        let lq = log_total_mass(&g, MassMode::Quadrature).unwrap();
        let la = log_total_mass(&g, MassMode::Asymptotic).unwrap();
        let gap = (lq - la).exp_m1().abs();
        println!(
            "  {big_n:<8} {lq:>18.8} {la:>18.8} {gap:>12.3e} {:>12.4}",
            big_n as f64 * gap
        );
    }
    println!("  (μ itself underflows f64 near N ~ 10⁴ at this β: β^(N-3) ~ e^(-1053))");

    println!();
    println!("concentration of ∫ u h dr around r = r̄ (offset_kernel, β = 0.99):");
    for big_n in [100u32, 1_000, 10_000] {
        let g = slice_geometry(1, big_n, tau, 0.99, &[0.3]).unwrap();
        let (_, gap) = radial_profile_integral(&g, mix).unwrap();
        println!("  N = {big_n:>6}: normalized gap = {gap:.4e}");
    }
    println!("first-moment majorant J(N=10⁴, β), the (1-β²)-structured functional:");
    for beta in [0.9, 0.95, 0.99] {
        let j = radial_first_moment(1, 10_000, tau, beta).unwrap();
        println!("  β = {beta}: J = {j:.4e}");
    }

    println!();
    let target = elliptic_limit_target(mix, tau).unwrap();
    println!(
        "elliptic target: quadrature {:.10e} vs closed form {:.10e}",
        target.quadrature, target.closed_form
    );
    println!("solid averages vs the exact anchor (offset_kernel, β = 0.99):");
    for big_n in [100u32, 1_000, 10_000] {
        let v = sliced_average(mix, big_n, tau, 0.99).unwrap();
        println!(
            "  N = {big_n:>6}: value = {v:.10e}  rel gap = {:.3e}",
            (v - target.closed_form).abs() / target.closed_form
        );
    }
    println!("exact anchor R^(m-2) v(z̄) = τ^(n/2) u(0,τ), relative gap:");
    for big_n in [10u32, 1_000, 1_000_000] {
        println!(
            "  N = {big_n:>8}: {:.3e}",
            exact_anchor_gap(mix, tau, big_n).unwrap()
        );
    }
}
