//! Entropy functionals along the heat flow: the W functional
//! W = t∫|∇u|²/u - ∫u log u - (n/2) log t, its monotonicity, the
//! log-Sobolev deficit W - (n/2)(2 + log 4π), the rescaled-density limit
//! ũ(x,t) = t^{n/2} u(√t x, t) → (4π)^{-n/2} e^{-|x|²/4}, and the Poincaré
//! sphere-projection density.
//!
//! The identity ∫ D0 u = W - n ties the pointwise parabolic deficit to W;
//! it is asserted by tests, never assumed: D0_avg below is an independent
//! quadrature of the pointwise D0 against u.

use crate::error::{Error, Result};
use crate::heat_model::GaussianMixture;
use crate::parabolic::parabolic_eval;
use crate::quadrature::{integrate_box, QuadratureSpec};
use crate::special::ln_gamma_ratio_half_steps;

/// Entropy functionals of a mixture at one time.
#[derive(Debug, Clone, Copy)]
pub struct EntropyReport {
    pub t: f64,
    /// Modified Shannon entropy S̃ = -(n/2) log t - ∫ u log u.
    pub s_tilde: f64,
    /// W = t·fisher - ∫ u log u - (n/2) log t.
    pub w: f64,
    /// ∫ D0 u, computed independently of W.
    pub d0_avg: f64,
    /// Fisher information ∫ |∇u|²/u.
    pub fisher: f64,
    /// W - (n/2)(2 + log 4π); nonnegative by the log-Sobolev inequality.
    pub logsob_deficit: f64,
}

fn box_for(mix: &GaussianMixture, t: f64, spec: &QuadratureSpec) -> (Vec<f64>, Vec<f64>) {
    let n = mix.dim();
    let half = mix.support_half_width(t, spec.truncation_sigmas);
    (vec![0.0; n], vec![half; n])
}

/// All entropy functionals at time t by adaptive quadrature against the
/// closed-form jets.
pub fn entropy_report(mix: &GaussianMixture, t: f64) -> Result<EntropyReport> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let n = mix.dim() as f64;
    let spec = QuadratureSpec::default();
    let (center, half) = box_for(mix, t, &spec);

    // u log u underflows gracefully: exp(log u) is exactly 0 deep in tails
    let neg_u_log_u = -integrate_box(
        |x| {
            let lu = mix.log_u(x, t).unwrap_or(f64::NEG_INFINITY);
            let u = lu.exp();
            if u == 0.0 {
                0.0
            } else {
                u * lu
            }
        },
        &center,
        &half,
        &spec,
    )?
    .value;

    let fisher = integrate_box(
        |x| match mix.f_jet(x, t) {
            Ok(jet) => {
                let u = (-jet.f - 0.5 * n * t.ln()).exp();
                u * jet.grad_f.norm_squared()
            }
            Err(_) => f64::NAN,
        },
        &center,
        &half,
        &spec,
    )?
    .value;

    let d0_avg = integrate_box(
        |x| match (parabolic_eval(mix, x, t), mix.log_u(x, t)) {
            (Ok(pe), Ok(lu)) => pe.d0 * lu.exp(),
            _ => f64::NAN,
        },
        &center,
        &half,
        &spec,
    )?
    .value;

    let s_tilde = -0.5 * n * t.ln() + neg_u_log_u;
    let w = t * fisher + s_tilde;
    let logsob_deficit = w - 0.5 * n * (2.0 + (4.0 * std::f64::consts::PI).ln());
    Ok(EntropyReport {
        t,
        s_tilde,
        w,
        d0_avg,
        fisher,
        logsob_deficit,
    })
}

/// Central-difference dW/dt against the prediction -2t ∫|F|² u dx obtained
/// by integrating the pointwise evolution identity.
pub fn w_derivative_check(mix: &GaussianMixture, t: f64, step: f64) -> Result<(f64, f64)> {
    if !(step > 0.0) || step > t / 2.0 {
        return Err(Error::StepTooLarge { step, scale: t });
    }
    let plus = entropy_report(mix, t + step)?.w;
    let minus = entropy_report(mix, t - step)?.w;
    let fd_derivative = (plus - minus) / (2.0 * step);

    let spec = QuadratureSpec::default();
    let (center, half) = box_for(mix, t, &spec);
    let weighted_f2 = integrate_box(
        |x| match (parabolic_eval(mix, x, t), mix.log_u(x, t)) {
            (Ok(pe), Ok(lu)) => pe.f_norm2 * lu.exp(),
            _ => f64::NAN,
        },
        &center,
        &half,
        &spec,
    )?
    .value;
    Ok((fd_derivative, -2.0 * t * weighted_f2))
}

/// L¹ distance of the rescaled density ũ(x,t) = t^{n/2} u(√t x, t) to the
/// standard Gaussian, and the entropy gap |S̃(t) - (n/2)(1 + log 4π)|.
pub fn rescaled_density_gap(mix: &GaussianMixture, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let n = mix.dim();
    let nf = n as f64;
    let spec = QuadratureSpec::default();
    let sqrt_t = t.sqrt();
    // ũ lives on the √t-rescaled axis; cover both its support and the target
    let half_y = (mix.support_half_width(t, spec.truncation_sigmas) / sqrt_t)
        .max(spec.truncation_sigmas * std::f64::consts::SQRT_2);
    let log_gauss_norm = -0.5 * nf * (4.0 * std::f64::consts::PI).ln();
    let l1_gap = integrate_box(
        |y| {
            let xs: Vec<f64> = y.iter().map(|v| v * sqrt_t).collect();
            let y2: f64 = y.iter().map(|v| v * v).sum();
            let lu = mix.log_u(&xs, t).unwrap_or(f64::NEG_INFINITY);
            let u_tilde = (0.5 * nf * t.ln() + lu).exp();
            let gauss = (log_gauss_norm - y2 / 4.0).exp();
            (u_tilde - gauss).abs()
        },
        &vec![0.0; n],
        &vec![half_y; n],
        &spec,
    )?
    .value;

    let report = entropy_report(mix, t)?;
    let entropy_gap = (report.s_tilde - 0.5 * nf * (1.0 + (4.0 * std::f64::consts::PI).ln())).abs();
    Ok((l1_gap, entropy_gap))
}

/// Sup over the grid of |prefactor (1-|x|²/2N)^{(N-1)/2} - (4π)^{-n/2}
/// e^{-|x|²/4}|: the Poincaré projection of the uniform measure on
/// √(2N) S^{m-1} against its Gaussian limit. All factors in log domain.
pub fn poincare_projection_gap(n: usize, big_n: u32, grid: &[Vec<f64>]) -> Result<f64> {
    if big_n < 2 {
        return Err(Error::domain("projection needs N >= 2"));
    }
    let nf = n as f64;
    let big_nf = big_n as f64;
    // log[(2N)^{-n/2} ω_{N-1}/ω_{m-1}]
    let log_pref = -0.5 * nf * (2.0 * big_nf).ln() - 0.5 * nf * std::f64::consts::PI.ln()
        + ln_gamma_ratio_half_steps(big_nf / 2.0, n as u32);
    let log_gauss_norm = -0.5 * nf * (4.0 * std::f64::consts::PI).ln();
    let mut sup: f64 = 0.0;
    for x in grid {
        if x.len() != n {
            return Err(Error::domain("grid point has wrong dimension"));
        }
        let x2: f64 = x.iter().map(|v| v * v).sum();
        if x2 >= 2.0 * big_nf {
            return Err(Error::domain(format!(
                "grid point with |x|² = {x2} outside the sphere radius² = {}",
                2.0 * big_nf
            )));
        }
        let profile = (log_pref + 0.5 * (big_nf - 1.0) * (-x2 / (2.0 * big_nf)).ln_1p()).exp();
        let gauss = (log_gauss_norm - x2 / 4.0).exp();
        sup = sup.max((profile - gauss).abs());
    }
    Ok(sup)
}

/// Geometric time grid 0.1·2^k, the scale on which W varies.
pub fn monotonicity_grid(count: usize) -> Vec<f64> {
    (0..count).map(|k| 0.1 * 2f64.powi(k as i32)).collect()
}
