//! Off-center sphere slicing: intersect the ball B_{βR}(z̄) (center at
//! distance R = √(2Nτ) from the origin) with spheres |y| = r, weight each
//! slice by the cap fraction, and recover a Gaussian integral of u as
//! N → ∞, β → 1.
//!
//! For fixed x the y-section of the ball is B_s(ȳ) with s² = (βR)² - |x|²;
//! the slice at radius r is a cap of opening angle θ(x, r) with
//! cos θ = (r² + r̄²)/(2Rr), r̄² = R² - s², giving the weight
//! h(x, r) = r γ(N, θ(x, r)) on the admissible interval (R-s, R+s).
//!
//! Everything beyond small N lives in the log domain: the mass μ(x) scales
//! like β^{N-3}, which underflows f64 near N ~ 10⁴ at β = 0.9 even though
//! every final, β^{-m}-normalized quantity is O(1).

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::heat_model::GaussianMixture;
use crate::lift::{lift_eval, LiftPoint};
use crate::quadrature::{integrate_box, integrate_log_1d, QuadratureSpec};
use crate::special::{ln_gamma_ratio_half_steps, CapFractionTable};

/// Derived geometry of one (x, τ, β, N) slice family.
#[derive(Debug, Clone)]
pub struct SliceGeometry {
    pub n: usize,
    pub big_n: u32,
    pub tau: f64,
    pub beta: f64,
    pub x: DVector<f64>,
    /// m = n + N.
    pub m: f64,
    /// R = √(2Nτ), the distance from the origin to the ball center.
    pub big_r: f64,
    /// Section radius: s² = (βR)² - |x|².
    pub s: f64,
    /// Concentration radius: r̄² = R² - s².
    pub r_bar: f64,
    cap: CapFractionTable,
}

/// Build the slice geometry; `s = 0` (tangent slice) is allowed and flagged
/// by [`SliceGeometry::degenerate`].
pub fn slice_geometry(
    n: usize,
    big_n: u32,
    tau: f64,
    beta: f64,
    x: &[f64],
) -> Result<SliceGeometry> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::domain(format!("beta must lie in (0,1), got {beta}")));
    }
    if big_n < 7 {
        return Err(Error::domain(format!(
            "slicing requires N >= 7, got {big_n}"
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::domain(format!("tau must be positive, got {tau}")));
    }
    if x.len() != n {
        return Err(Error::domain("x has wrong dimension"));
    }
    let big_r = (2.0 * big_n as f64 * tau).sqrt();
    let rho = beta * big_r;
    let x2: f64 = x.iter().map(|v| v * v).sum();
    if x2 > rho * rho * (1.0 + 1e-14) {
        return Err(Error::domain(format!(
            "|x| = {} exceeds βR = {rho}",
            x2.sqrt()
        )));
    }
    let s = (rho * rho - x2).max(0.0).sqrt();
    let r_bar = (big_r * big_r - s * s).max(0.0).sqrt();
    Ok(SliceGeometry {
        n,
        big_n,
        tau,
        beta,
        x: DVector::from_row_slice(x),
        m: n as f64 + big_n as f64,
        big_r,
        s,
        r_bar,
        cap: CapFractionTable::new(big_n)?,
    })
}

impl SliceGeometry {
    pub fn rho(&self) -> f64 {
        self.beta * self.big_r
    }

    /// True when the section shrinks to a point (|x| = βR).
    pub fn degenerate(&self) -> bool {
        self.s == 0.0
    }

    /// Admissible slice radii (R - s, R + s).
    pub fn interval(&self) -> (f64, f64) {
        (self.big_r - self.s, self.big_r + self.s)
    }

    /// Cap opening angle θ(x, r); the cosine is clamped into [-1, 1] against
    /// round-off at the tangency radii. Always lands in [0, π/2].
    pub fn theta(&self, r: f64) -> f64 {
        let cos = (r * r + self.r_bar * self.r_bar) / (2.0 * self.big_r * r);
        cos.clamp(-1.0, 1.0).acos()
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        let (lo, hi) = self.interval();
        let slack = 1e-12 * self.big_r;
        if r < lo - slack || r > hi + slack {
            return Err(Error::domain(format!(
                "slice radius {r} outside [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// The weight h(x, r) = r γ(N, θ(x, r)); exactly zero once the cap mass
/// drops below the smallest positive double.
pub fn slice_weight(geom: &SliceGeometry, r: f64) -> Result<f64> {
    let lh = log_slice_weight(geom, r)?;
    Ok(if lh < -745.0 { 0.0 } else { lh.exp() })
}

/// log h(x, r); -inf at the interval endpoints where the cap closes.
pub fn log_slice_weight(geom: &SliceGeometry, r: f64) -> Result<f64> {
    geom.check_radius(r)?;
    Ok(r.ln() + geom.cap.log_gamma(geom.theta(r))?)
}

/// How the total mass μ(x) = ∫ h dr is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassMode {
    /// Direct quadrature of h over (R-s, R+s).
    Quadrature,
    /// The sharp Gaussian-type asymptotic
    /// μ ≈ (β^{N-3}/√(πτ)) ∫_0^s σ² (1 - (σ²+|x|²)/(2Nβ²τ))^{(N-3)/2} dσ,
    /// accurate to a relative O(N^{-1}).
    Asymptotic,
}

/// Total slice mass μ(x); underflows to 0 gracefully at large N — use
/// [`log_total_mass`] for ratios.
pub fn total_mass(geom: &SliceGeometry, mode: MassMode) -> Result<f64> {
    Ok(log_total_mass(geom, mode)?.exp())
}

/// log μ(x) in the requested mode.
pub fn log_total_mass(geom: &SliceGeometry, mode: MassMode) -> Result<f64> {
    if !(geom.s > 0.0) {
        return Err(Error::domain(
            "total mass needs a non-degenerate slice (s > 0)",
        ));
    }
    let spec = QuadratureSpec::default();
    match mode {
        MassMode::Quadrature => {
            let (lo, hi) = geom.interval();
            integrate_log_1d(|r| log_weight_unchecked(geom, r), lo, hi, &spec)
        }
        MassMode::Asymptotic => {
            let nf = geom.big_n as f64;
            let x2 = geom.x.norm_squared();
            let denom = 2.0 * nf * geom.beta * geom.beta * geom.tau;
            let log_integral = integrate_log_1d(
                |sigma| {
                    let arg = (-(sigma * sigma + x2) / denom).max(-1.0);
                    2.0 * sigma.max(f64::MIN_POSITIVE).ln() + 0.5 * (nf - 3.0) * arg.ln_1p()
                },
                0.0,
                geom.s,
                &spec,
            )?;
            Ok(
                (nf - 3.0) * geom.beta.ln() - 0.5 * (std::f64::consts::PI * geom.tau).ln()
                    + log_integral,
            )
        }
    }
}

/// Third route to μ, exact for every N: integrating by parts against
/// g = r h / 2 and changing variables t = r + r̄²/r, σ = √(t²/4 - r̄²)
/// turns ∫ h dr into (2/(cR)) ∫_0^s σ² (1 - (σ²+r̄²)/(2Nτ))^{(N-3)/2} dσ
/// with c = ω_{N-1}/ω_{N-2}. No asymptotic step is involved, so agreement
/// with the quadrature mode is at quadrature tolerance; the gap to the
/// Asymptotic mode isolates the Stirling factor cR/(2√(πτ)) = 1 + O(N^{-1}).
pub(crate) fn log_total_mass_exact_sigma(geom: &SliceGeometry) -> Result<f64> {
    if !(geom.s > 0.0) {
        return Err(Error::domain(
            "total mass needs a non-degenerate slice (s > 0)",
        ));
    }
    let spec = QuadratureSpec::default();
    let nf = geom.big_n as f64;
    let r_bar2 = geom.r_bar * geom.r_bar;
    let denom = 2.0 * nf * geom.tau;
    let log_integral = integrate_log_1d(
        |sigma| {
            let arg = (-(sigma * sigma + r_bar2) / denom).max(-1.0);
            2.0 * sigma.max(f64::MIN_POSITIVE).ln() + 0.5 * (nf - 3.0) * arg.ln_1p()
        },
        0.0,
        geom.s,
        &spec,
    )?;
    Ok(std::f64::consts::LN_2 - geom.cap.log_norm() - geom.big_r.ln() + log_integral)
}

fn log_weight_unchecked(geom: &SliceGeometry, r: f64) -> f64 {
    match geom.cap.log_gamma(geom.theta(r)) {
        Ok(lg) => r.ln() + lg,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// ∫ u(x, r²/2N) h(x, r) dr over the admissible interval, and the
/// normalized gap to the concentration surrogate μ(x) u(x, r̄²/2N).
pub fn radial_profile_integral(geom: &SliceGeometry, mix: &GaussianMixture) -> Result<(f64, f64)> {
    if mix.dim() != geom.n {
        return Err(Error::domain("mixture dimension mismatch"));
    }
    let spec = QuadratureSpec::default();
    let (lo, hi) = geom.interval();
    let x: Vec<f64> = geom.x.iter().copied().collect();
    let nf = geom.big_n as f64;
    let err = std::cell::Cell::new(false);
    let log_integral = integrate_log_1d(
        |r| {
            let t = r * r / (2.0 * nf);
            match mix.log_u(&x, t) {
                Ok(lu) => lu + log_weight_unchecked(geom, r),
                Err(_) => {
                    err.set(true);
                    f64::NEG_INFINITY
                }
            }
        },
        lo,
        hi,
        &spec,
    )?;
    if err.get() {
        return Err(Error::domain(
            "mixture not admissible on the sliced time range",
        ));
    }
    let log_mu = log_total_mass(geom, MassMode::Quadrature)?;
    let log_u_bar = mix.log_u(&x, geom.r_bar * geom.r_bar / (2.0 * nf))?;
    let gap = (log_integral - log_mu - log_u_bar).exp_m1().abs();
    Ok((log_integral.exp(), gap))
}

/// Default cap on N for the direct nested evaluation; beyond it the exact
/// anchor covers the limit and the quadrature cost stops paying for itself.
pub const SLICED_AVERAGE_MAX_N: u32 = 10_000;

/// The normalized solid average β^{-m}/(2τ ω_{m-1}) ∫_{B_{βR}(z̄)} v,
/// evaluated by exact 1D reduction: (2N)^{-n/2} ω_{N-1}/ω_{m-1} β^{-m}/(2τ)
/// times the (x, r) double integral of u·h. All prefactors combine in the
/// log domain before a single exponentiation per outer node.
pub fn sliced_average(mix: &GaussianMixture, big_n: u32, tau: f64, beta: f64) -> Result<f64> {
    let n = mix.dim();
    if big_n > SLICED_AVERAGE_MAX_N {
        return Err(Error::domain(format!(
            "sliced_average caps N at {SLICED_AVERAGE_MAX_N} (got {big_n}); the exact anchor covers larger N"
        )));
    }
    if big_n < 7 {
        return Err(Error::domain("sliced_average requires N >= 7"));
    }
    if !(0.0 < beta && beta < 1.0) || !(tau > 0.0) {
        return Err(Error::domain(
            "sliced_average needs beta in (0,1) and tau > 0",
        ));
    }
    let nf = n as f64;
    let big_nf = big_n as f64;
    let m = nf + big_nf;
    // log[ (2N)^{-n/2} ω_{N-1}/ω_{m-1} β^{-m} / (2τ) ]
    let log_omega_ratio =
        ln_gamma_ratio_half_steps(big_nf / 2.0, n as u32) - 0.5 * nf * std::f64::consts::PI.ln();
    let log_pref =
        -m * beta.ln() - (2.0 * tau).ln() - 0.5 * nf * (2.0 * big_nf).ln() + log_omega_ratio;

    let big_r = (2.0 * big_nf * tau).sqrt();
    let rho = beta * big_r;
    let cap = CapFractionTable::new(big_n)?;
    // tolerance tuned for O(1e-2..1e-3) gap measurements; the inner integrand
    // costs a beta continued fraction per node
    let spec = QuadratureSpec {
        rel_tol: 1e-8,
        abs_tol: 1e-12,
        ..QuadratureSpec::default()
    };

    // truncate the outer domain where both u and the slice mass have died
    let tau_max = (1.0 + beta) * (1.0 + beta) * tau;
    let half = (mix.support_half_width(tau_max, spec.truncation_sigmas)
        + spec.truncation_sigmas * 2.0 * tau.sqrt())
    .min(rho);

    let guard = std::cell::Cell::new(0.0f64);
    let failed = std::cell::Cell::new(false);
    let integrand = |x: &[f64]| -> f64 {
        let x2: f64 = x.iter().map(|v| v * v).sum();
        let s2 = rho * rho - x2;
        if s2 <= 0.0 {
            return 0.0;
        }
        let s = s2.sqrt();
        let r_bar2 = big_r * big_r - s2;
        let lo = big_r - s;
        let hi = big_r + s;
        let log_inner = integrate_log_1d(
            |r| {
                let t = r * r / (2.0 * big_nf);
                let cos = ((r * r + r_bar2) / (2.0 * big_r * r)).clamp(-1.0, 1.0);
                match (mix.log_u(x, t), cap.log_gamma(cos.acos())) {
                    (Ok(lu), Ok(lg)) => lu + r.ln() + lg,
                    _ => {
                        failed.set(true);
                        f64::NEG_INFINITY
                    }
                }
            },
            lo,
            hi,
            &spec,
        );
        match log_inner {
            Ok(li) => {
                let e = log_pref + li;
                if e > 700.0 {
                    guard.set(e);
                    return f64::NAN;
                }
                e.exp()
            }
            Err(_) => {
                failed.set(true);
                f64::NAN
            }
        }
    };
    let centers = vec![0.0; n];
    let halves = vec![half; n];
    let result = integrate_box(integrand, &centers, &halves, &spec);
    if guard.get() > 700.0 {
        return Err(Error::OverflowGuard(guard.get()));
    }
    if failed.get() {
        return Err(Error::domain(
            "inner slicing integral failed (inadmissible mixture or non-convergence)",
        ));
    }
    Ok(result?.value)
}

/// The β^{-m}-normalized first-moment functional
/// J(N, β) = (β^{-m}/N) ∫_{B_{βR}(0)} ∫ |r² - r̄²| h(x, r) dr dx,
/// the majorant that controls the concentration defect: its large-N limit is
/// bounded by C(1-β²), so at fixed large N it decreases as β → 1. Unlike the
/// signed defect below, the absolute value blocks the Gaussian telescoping
/// that makes signed gaps collapse to a pure O(N^{-1}) term.
pub fn radial_first_moment(n: usize, big_n: u32, tau: f64, beta: f64) -> Result<f64> {
    if !(0.0 < beta && beta < 1.0) || !(tau > 0.0) || big_n < 7 {
        return Err(Error::domain(
            "radial_first_moment needs beta in (0,1), tau > 0, N >= 7",
        ));
    }
    let nf = n as f64;
    let big_nf = big_n as f64;
    let m = nf + big_nf;
    let log_pref = -m * beta.ln() - big_nf.ln();
    let big_r = (2.0 * big_nf * tau).sqrt();
    let rho = beta * big_r;
    let cap = CapFractionTable::new(big_n)?;
    let spec = QuadratureSpec {
        rel_tol: 1e-8,
        abs_tol: 1e-12,
        ..QuadratureSpec::default()
    };
    // the integrand decays like a Gaussian of scale ~2β√(2τ) in x
    let half = (spec.truncation_sigmas * 2.0 * beta * (2.0 * tau).sqrt()).min(rho);
    let integrand = |x: &[f64]| -> f64 {
        let x2: f64 = x.iter().map(|v| v * v).sum();
        let s2 = rho * rho - x2;
        if s2 <= 0.0 {
            return 0.0;
        }
        let s = s2.sqrt();
        let r_bar2 = big_r * big_r - s2;
        let log_inner = integrate_log_1d(
            |r| {
                let diff = (r * r - r_bar2).abs().max(f64::MIN_POSITIVE);
                let cos = ((r * r + r_bar2) / (2.0 * big_r * r)).clamp(-1.0, 1.0);
                match cap.log_gamma(cos.acos()) {
                    Ok(lg) => diff.ln() + r.ln() + lg,
                    Err(_) => f64::NEG_INFINITY,
                }
            },
            big_r - s,
            big_r + s,
            &spec,
        );
        match log_inner {
            Ok(li) => (log_pref + li).min(700.0).exp(),
            Err(_) => f64::NAN,
        }
    };
    let centers = vec![0.0; n];
    let halves = vec![half; n];
    Ok(integrate_box(integrand, &centers, &halves, &spec)?.value)
}

/// The concentration defect of the full average: the normalized difference
/// between ∫∫ u·h and its surrogate ∫ μ(x) u(x, r̄²/2N), i.e. the quantity
/// whose double limit vanishes by concentration. Shares the
/// β^{-m}-normalized prefactor with [`sliced_average`].
pub fn concentration_average_gap(
    mix: &GaussianMixture,
    big_n: u32,
    tau: f64,
    beta: f64,
) -> Result<f64> {
    let exact = sliced_average(mix, big_n, tau, beta)?;
    let surrogate = surrogate_average(mix, big_n, tau, beta)?;
    Ok((exact - surrogate).abs() / surrogate.abs())
}

/// β^{-m}/(2τ ω_{m-1})-normalized average with the radial profile frozen at
/// r = r̄: the concentration surrogate ∫ μ(x) u(x, r̄²/2N) dx.
fn surrogate_average(mix: &GaussianMixture, big_n: u32, tau: f64, beta: f64) -> Result<f64> {
    let n = mix.dim();
    let nf = n as f64;
    let big_nf = big_n as f64;
    let m = nf + big_nf;
    let log_omega_ratio =
        ln_gamma_ratio_half_steps(big_nf / 2.0, n as u32) - 0.5 * nf * std::f64::consts::PI.ln();
    let log_pref =
        -m * beta.ln() - (2.0 * tau).ln() - 0.5 * nf * (2.0 * big_nf).ln() + log_omega_ratio;
    let big_r = (2.0 * big_nf * tau).sqrt();
    let rho = beta * big_r;
    let spec = QuadratureSpec {
        rel_tol: 1e-8,
        abs_tol: 1e-12,
        ..QuadratureSpec::default()
    };
    let tau_max = (1.0 + beta) * (1.0 + beta) * tau;
    let half = (mix.support_half_width(tau_max, spec.truncation_sigmas)
        + spec.truncation_sigmas * 2.0 * tau.sqrt())
    .min(rho);
    let failed = std::cell::Cell::new(false);
    let integrand = |x: &[f64]| -> f64 {
        let x2: f64 = x.iter().map(|v| v * v).sum();
        let s2 = rho * rho - x2;
        if s2 <= 0.0 {
            return 0.0;
        }
        let geom = match slice_geometry(n, big_n, tau, beta, x) {
            Ok(g) => g,
            Err(_) => return 0.0,
        };
        if geom.degenerate() {
            return 0.0;
        }
        let r_bar2 = geom.r_bar * geom.r_bar;
        match (
            log_total_mass(&geom, MassMode::Quadrature),
            mix.log_u(x, r_bar2 / (2.0 * big_nf)),
        ) {
            (Ok(lm), Ok(lu)) => {
                let e = log_pref + lm + lu;
                if e > 700.0 {
                    failed.set(true);
                    return f64::NAN;
                }
                e.exp()
            }
            _ => {
                failed.set(true);
                f64::NAN
            }
        }
    };
    let centers = vec![0.0; n];
    let halves = vec![half; n];
    let result = integrate_box(integrand, &centers, &halves, &spec)?;
    if failed.get() {
        return Err(Error::domain("surrogate average failed"));
    }
    Ok(result.value)
}

/// The N → ∞ limit value of the sliced average, two ways.
#[derive(Debug, Clone, Copy)]
pub struct EllipticTarget {
    /// (4π)^{-n/2} ∫ u(x,0) e^{-|x|²/(4τ)} dx by quadrature.
    pub quadrature: f64,
    /// The heat-semigroup closed form τ^{n/2} u(0, τ).
    pub closed_form: f64,
}

/// Evaluate the Gaussian representation target; requires every component to
/// carry a positive time offset so u(., 0) is a smooth density. The two
/// routes are asserted to agree to 1e-8 relative.
pub fn elliptic_limit_target(mix: &GaussianMixture, tau: f64) -> Result<EllipticTarget> {
    if !mix.smooth_at_zero() {
        return Err(Error::ZeroTimeComponent);
    }
    if !(tau > 0.0) {
        return Err(Error::domain("tau must be positive"));
    }
    let n = mix.dim();
    let spec = QuadratureSpec::default();
    let half = mix.support_half_width(0.0, spec.truncation_sigmas);
    let integrand = |x: &[f64]| {
        let x2: f64 = x.iter().map(|v| v * v).sum();
        (mix.log_u(x, 0.0).unwrap_or(f64::NEG_INFINITY) - x2 / (4.0 * tau)).exp()
    };
    let centers = vec![0.0; n];
    let halves = vec![half; n];
    let raw = integrate_box(integrand, &centers, &halves, &spec)?.value;
    let quadrature = (4.0 * std::f64::consts::PI).powf(-(n as f64) / 2.0) * raw;
    let zero = vec![0.0; n];
    let closed_form = (0.5 * n as f64 * tau.ln() + mix.log_u(&zero, tau)?).exp();
    if (quadrature - closed_form).abs() > 1e-8 * closed_form.abs() {
        return Err(Error::domain(format!(
            "semigroup identity violated: quadrature {quadrature} vs closed form {closed_form}"
        )));
    }
    Ok(EllipticTarget {
        quadrature,
        closed_form,
    })
}

/// Relative gap of the exact algebraic anchor R^{m-2} v(z̄) = τ^{n/2} u(0,τ),
/// which holds identically in N and pins the entire slicing pipeline to a
/// non-asymptotic target.
///
/// The product is formed as (r/R)^{2-m} e^{-f}: folding (m-2) ln R into the
/// stored log v would absorb f's low bits (ε (m-2) ln R ~ 1e-9 at N = 10⁶)
/// and report fp absorption instead of pipeline error.
pub fn exact_anchor_gap(mix: &GaussianMixture, tau: f64, big_n: u32) -> Result<f64> {
    let n = mix.dim();
    let zero = vec![0.0; n];
    let p = LiftPoint::from_tau(zero.clone(), tau, big_n)?;
    let le = lift_eval(mix, &p)?;
    let m = p.m(n);
    let big_r = (2.0 * big_n as f64 * tau).sqrt();
    // log v + (m-2) ln r, with the large logs cancelled algebraically
    let f = mix.f_jet(&zero, p.tau())?.f;
    let log_lhs = (2.0 - m) * (p.r / big_r).ln() - f;
    // consistency of the lift's own log v with the recombined form
    let absorbed = (m - 2.0) * p.r.ln() + le.log_v;
    if (absorbed - log_lhs).abs() > 1e-8 * (m - 2.0) * p.r.ln() {
        return Err(Error::domain("lift log_v inconsistent with anchor form"));
    }
    let log_rhs = 0.5 * n as f64 * tau.ln() + mix.log_u(&zero, tau)?;
    Ok((log_lhs - log_rhs).exp_m1().abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat_model::Component;
    use crate::sweep::fit_rate_with_floor;

    fn offset_kernel() -> GaussianMixture {
        GaussianMixture::new(
            1,
            vec![Component {
                weight: 1.0,
                center: DVector::zeros(1),
                time_offset: 1.0,
            }],
        )
        .unwrap()
    }

    fn twin_offset() -> GaussianMixture {
        GaussianMixture::new(
            1,
            vec![
                Component {
                    weight: 0.5,
                    center: DVector::from_row_slice(&[-2.0]),
                    time_offset: 0.1,
                },
                Component {
                    weight: 0.5,
                    center: DVector::from_row_slice(&[2.0]),
                    time_offset: 0.1,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn geometry_special_cases() {
        // centered: s = βR, r̄ = R√(1-β²)
        let g = slice_geometry(1, 100, 1.0, 0.9, &[0.0]).unwrap();
        let big_r = (200.0f64).sqrt();
        assert!((g.s - 0.9 * big_r).abs() < 1e-12);
        assert!((g.r_bar - big_r * (1.0f64 - 0.81).sqrt()).abs() < 1e-12);
        assert!(!g.degenerate());

        // tangent: s = 0, r̄ = R
        let g = slice_geometry(1, 100, 1.0, 0.9, &[0.9 * big_r]).unwrap();
        assert!(g.s.abs() < 1e-9);
        assert!((g.r_bar - big_r).abs() < 1e-9);
        assert!(g.degenerate());

        // spreadsheet-level recomputation at n=1, N=100, τ=1, β=0.9, x=0.5
        let g = slice_geometry(1, 100, 1.0, 0.9, &[0.5]).unwrap();
        let rho = 0.9 * big_r;
        let s = (rho * rho - 0.25f64).sqrt();
        assert!((g.s - s).abs() < 1e-12);
        assert!((g.r_bar - (big_r * big_r - s * s).sqrt()).abs() < 1e-12);
        assert!((g.m - 101.0).abs() == 0.0);

        assert!(slice_geometry(1, 100, 1.0, 1.1, &[0.0]).is_err());
        assert!(slice_geometry(1, 100, 1.0, 0.9, &[20.0]).is_err());
    }

    #[test]
    fn weight_endpoints_vanish_and_interior_positive() {
        for &(big_n, beta, x) in &[(100u32, 0.9, 0.0), (1_000, 0.95, 1.0), (10_000, 0.99, 0.5)] {
            let g = slice_geometry(1, big_n, 1.0, beta, &[x]).unwrap();
            let (lo, hi) = g.interval();
            assert!(slice_weight(&g, lo).unwrap() <= 1e-12, "N={big_n}");
            assert!(slice_weight(&g, hi).unwrap() <= 1e-12, "N={big_n}");
            let mid = g.r_bar.max(lo + 0.3 * (hi - lo));
            assert!(log_slice_weight(&g, mid).unwrap() > f64::NEG_INFINITY);
            // cos θ(r̄) = r̄/R
            let cos_at_rbar = g.theta(g.r_bar).cos();
            assert!((cos_at_rbar - g.r_bar / g.big_r).abs() < 1e-12);
            assert!(slice_weight(&g, lo - 1.0).is_err());
        }
    }

    #[test]
    fn mass_modes_agree_and_gap_shrinks_at_rate_one() {
        // quadrature and exact-σ routes agree at quadrature tolerance;
        // the asymptotic route differs by the Stirling factor, O(N^{-1})
        let mut pts = Vec::new();
        for &big_n in &[100u32, 1_000, 10_000] {
            let g = slice_geometry(1, big_n, 1.0, 0.9, &[0.0]).unwrap();
            let lq = log_total_mass(&g, MassMode::Quadrature).unwrap();
            let le = log_total_mass_exact_sigma(&g).unwrap();
            let la = log_total_mass(&g, MassMode::Asymptotic).unwrap();
            assert!(
                (lq - le).exp_m1().abs() < 1e-7,
                "N={big_n}: quadrature vs exact-σ {}",
                (lq - le).exp_m1()
            );
            let gap = (lq - la).exp_m1().abs();
            pts.push((big_n as f64, gap));
        }
        let fit = fit_rate_with_floor(&pts, 1e-15).unwrap();
        assert!(
            (fit.slope + 1.0).abs() < 0.15,
            "slope {} pts {pts:?}",
            fit.slope
        );
    }

    #[test]
    fn mass_positive_and_continuous_at_degeneracy() {
        let g = slice_geometry(1, 100, 1.0, 0.9, &[0.0]).unwrap();
        assert!(total_mass(&g, MassMode::Quadrature).unwrap() > 0.0);
        // |x| → βR: s → 0 and μ → 0 continuously
        let rho = 0.9 * (200.0f64).sqrt();
        let mut prev = f64::INFINITY;
        for &frac in &[0.9, 0.99, 0.999] {
            let g = slice_geometry(1, 100, 1.0, 0.9, &[frac * rho]).unwrap();
            let mu = total_mass(&g, MassMode::Quadrature).unwrap();
            assert!(mu > 0.0 && mu < prev, "frac={frac} mu={mu}");
            prev = mu;
        }
        assert!(prev < 1e-2);
        let g = slice_geometry(1, 100, 1.0, 0.9, &[rho]).unwrap();
        assert!(total_mass(&g, MassMode::Quadrature).is_err());
    }

    #[test]
    fn concentration_gap_shrinks_with_n() {
        let mix = offset_kernel();
        // increasing N at fixed β = 0.99; the (x-pointwise) normalized gap is
        // a pure O(N^{-1}) term for heat-evolved mixtures
        let mut prev = f64::INFINITY;
        for &big_n in &[100u32, 1_000, 10_000] {
            let g = slice_geometry(1, big_n, 1.0, 0.99, &[0.3]).unwrap();
            let (_, gap) = radial_profile_integral(&g, &mix).unwrap();
            assert!(gap < prev, "N={big_n}: gap {gap} vs prev {prev}");
            prev = gap;
        }
        assert!(prev < 0.05, "gap at N=1e4 should be a few percent: {prev}");
    }

    #[test]
    fn first_moment_functional_shrinks_as_beta_to_one() {
        // the |r²-r̄²| majorant carries the genuine (1-β²) structure of the
        // concentration defect; at fixed N it decreases sharply as β → 1
        let mut prev = f64::INFINITY;
        for &beta in &[0.9, 0.95, 0.99] {
            let j = radial_first_moment(1, 10_000, 1.0, beta).unwrap();
            assert!(j < prev, "beta={beta}: J {j} vs prev {prev}");
            prev = j;
        }
        // non-increasing in N at fixed β as well
        let j3 = radial_first_moment(1, 1_000, 1.0, 0.9).unwrap();
        let j4 = radial_first_moment(1, 10_000, 1.0, 0.9).unwrap();
        assert!(j4 < j3, "J(1e3)={j3} J(1e4)={j4}");
    }

    #[test]
    fn constant_profile_factorizes() {
        // a huge time offset makes u effectively r-independent on the slice
        let mix = GaussianMixture::new(
            1,
            vec![Component {
                weight: 1.0,
                center: DVector::zeros(1),
                time_offset: 1e6,
            }],
        )
        .unwrap();
        let g = slice_geometry(1, 1_000, 1.0, 0.95, &[0.2]).unwrap();
        let (_, gap) = radial_profile_integral(&g, &mix).unwrap();
        assert!(gap < 1e-6, "gap {gap}");
    }

    #[test]
    fn semigroup_identity_and_example_value() {
        let mix = offset_kernel();
        let t = elliptic_limit_target(&mix, 1.0).unwrap();
        assert!((t.quadrature - t.closed_form).abs() < 1e-9 * t.closed_form);
        // τ^{1/2} (4π(τ+t0))^{-1/2} at τ = 1, t0 = 1
        let expect = 1.0 / (8.0 * std::f64::consts::PI).sqrt();
        assert!((t.closed_form - expect).abs() < 1e-12, "{}", t.closed_form);
        assert!((t.closed_form - 0.1995).abs() < 5e-4);

        // τ → 0+ gives a vanishing, monotone target for the centered kernel
        let mut prev = 0.0;
        for &tau in &[1e-3, 1e-2, 0.1, 1.0] {
            let v = elliptic_limit_target(&mix, tau).unwrap().closed_form;
            assert!(v > prev);
            prev = v;
        }

        let bad = GaussianMixture::standard_kernel(1);
        assert!(matches!(
            elliptic_limit_target(&bad, 1.0),
            Err(Error::ZeroTimeComponent)
        ));
    }

    #[test]
    fn anchor_is_exact_in_every_dimension() {
        let mix = twin_offset();
        for &big_n in &[10u32, 1_000, 1_000_000] {
            let gap = exact_anchor_gap(&mix, 1.0, big_n).unwrap();
            assert!(gap <= 1e-12, "N={big_n}: {gap}");
        }
    }

    #[test]
    fn sliced_average_converges_to_anchor() {
        let mix = offset_kernel();
        let tau = 1.0;
        let target = elliptic_limit_target(&mix, tau).unwrap().closed_form;
        // gap decreases in N at fixed β
        let beta = 0.98;
        let mut gaps = Vec::new();
        for &big_n in &[100u32, 1_000, 10_000] {
            let v = sliced_average(&mix, big_n, tau, beta).unwrap();
            gaps.push((v - target).abs() / target);
        }
        assert!(
            gaps[0] > gaps[1] && gaps[1] > gaps[2],
            "gaps not decreasing in N: {gaps:?}"
        );
        // β-sweep at N = 1e4: for heat-evolved mixtures the β-truncation
        // error telescopes away exactly (the inner N-limit is already the
        // anchor for every β), leaving a pure O(N^{-1}) term whose direction
        // in β is recorded, not asserted. Frozen regression: the offset
        // kernel sits within a measured band at every β.
        for &beta in &[0.9, 0.95, 0.99] {
            let v = sliced_average(&mix, 10_000, tau, beta).unwrap();
            let gap = (v - target).abs() / target;
            assert!(
                (1.4e-4..2.1e-4).contains(&gap),
                "beta={beta}: gap {gap} outside the frozen band"
            );
        }
        assert!(sliced_average(&mix, 100_000, tau, 0.9).is_err());

        // two-component mixture: same qualitative convergence; the final gap
        // at (β = 0.99, N = 1e4) is a frozen first-build regression value
        let twin = twin_offset();
        let twin_target = elliptic_limit_target(&twin, tau).unwrap().closed_form;
        let v = sliced_average(&twin, 10_000, tau, 0.99).unwrap();
        let gap = (v - twin_target).abs() / twin_target;
        let frozen = 4.932147174478433e-5;
        assert!((gap - frozen).abs() < 1e-8, "gap {gap} vs frozen {frozen}");
    }

    #[test]
    fn dominating_function_bound_holds() {
        // H(x,N) = ∫_0^s σ²(1-(σ²+|x|²)/(2Nβ²τ))^{(N-3)/2} dσ is dominated by
        // e^{-|x|²/(8β²τ)} 2^{7/2} √π β³ τ^{3/2}
        let tau = 1.0;
        let beta = 0.9;
        for &big_n in &[100u32, 1_000] {
            for &x in &[0.0, 1.0, 3.0] {
                let g = slice_geometry(1, big_n, tau, beta, &[x]).unwrap();
                let log_h = log_total_mass(&g, MassMode::Asymptotic).unwrap()
                    - (big_n as f64 - 3.0) * beta.ln()
                    + 0.5 * (std::f64::consts::PI * tau).ln();
                let bound = (-x * x / (8.0 * beta * beta * tau)).exp()
                    * 2.0f64.powf(3.5)
                    * std::f64::consts::PI.sqrt()
                    * beta.powi(3)
                    * tau.powf(1.5);
                assert!(log_h.exp() <= bound * (1.0 + 1e-9), "N={big_n} x={x}");
            }
        }
    }
}
