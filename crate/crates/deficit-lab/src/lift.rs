//! The dimensional lift: for a heat solution u on R^n, the function
//! v(x, y) = r^{2-m} exp(-f(x, τ)) on R^n x R^N with r = |y|, τ = r²/(2N),
//! m = n + N is harmonic up to O(N^{-1}). This module evaluates the lifted
//! quantities b = v^{1/(2-m)}, the elliptic deficit d0 = 2m(|∇b|² - 1),
//! ψ = b^m Δv, the exact block Hessian of b², and the residuals tying the
//! elliptic identity to the parabolic one.
//!
//! Numerical ground rules, all forced by N up to 10^6:
//! - v itself is never formed (it scales like r^{2-m}); only log v and the
//!   product-rule expansion Δ(d0 v)/v = Δd0 + 2⟨∇d0, ∇log v⟩ + d0 Δv/v
//!   appear, where every factor stays O(1).
//! - d0 is assembled from expm1 so it is never the difference of two O(1)
//!   numbers; the naive 2m(|∇b|²-1) loses ~6 digits at N = 10^6.
//! - Δd0 comes from central differences in reduced (x, r) coordinates with
//!   the exact radial drift term; everything else is analytic.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::heat_model::GaussianMixture;
use crate::parabolic;

/// A point (x, y) on R^n x R^N, reduced to (x, r = |y|).
#[derive(Debug, Clone)]
pub struct LiftPoint {
    pub x: Vec<f64>,
    pub r: f64,
    pub big_n: u32,
}

impl LiftPoint {
    pub fn new(x: Vec<f64>, r: f64, big_n: u32) -> Result<Self> {
        if big_n < 7 {
            return Err(Error::domain(format!(
                "the lift requires N >= 7, got {big_n}"
            )));
        }
        if !(r > 0.0) {
            return Err(Error::domain(format!(
                "radial coordinate must be positive, got {r}"
            )));
        }
        Ok(LiftPoint { x, r, big_n })
    }

    /// Build the point with prescribed τ, i.e. r = √(2Nτ).
    pub fn from_tau(x: Vec<f64>, tau: f64, big_n: u32) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::domain(format!("tau must be positive, got {tau}")));
        }
        let r = (2.0 * big_n as f64 * tau).sqrt();
        LiftPoint::new(x, r, big_n)
    }

    pub fn tau(&self) -> f64 {
        self.r * self.r / (2.0 * self.big_n as f64)
    }

    pub fn m(&self, n: usize) -> f64 {
        n as f64 + self.big_n as f64
    }
}

/// Gradient of a rotationally symmetric function on R^n x R^N, split into
/// its x-part and the radial y-part.
#[derive(Debug, Clone)]
pub struct RadialGradient {
    pub x: DVector<f64>,
    pub radial: f64,
}

impl RadialGradient {
    /// Ambient inner product: x-parts plus radial·radial.
    pub fn dot(&self, other: &RadialGradient) -> f64 {
        self.x.dot(&other.x) + self.radial * other.radial
    }
}

/// Everything the lift knows at one point.
#[derive(Debug, Clone)]
pub struct LiftEval {
    pub log_v: f64,
    pub log_b: f64,
    pub d0: f64,
    pub psi: f64,
    pub lap_v_over_v: f64,
    pub grad_log_b: RadialGradient,
    pub grad_psi: RadialGradient,
    pub b_norm2_exact: f64,
    pub lap_b2: f64,
}

impl LiftEval {
    pub fn b_squared(&self) -> f64 {
        (2.0 * self.log_b).exp()
    }
}

struct Workspace {
    n: usize,
    nf: f64,
    big_n: f64,
    m: f64,
    em2: f64,
    r: f64,
    tau: f64,
}

impl Workspace {
    fn new(mix: &GaussianMixture, p: &LiftPoint) -> Result<Self> {
        if p.x.len() != mix.dim() {
            return Err(Error::domain(format!(
                "point has dimension {}, mixture has {}",
                p.x.len(),
                mix.dim()
            )));
        }
        let n = mix.dim();
        let big_n = p.big_n as f64;
        Ok(Workspace {
            n,
            nf: n as f64,
            big_n,
            m: n as f64 + big_n,
            em2: n as f64 + big_n - 2.0,
            r: p.r,
            tau: p.tau(),
        })
    }
}

/// Evaluate all lifted quantities at (x, r, N).
pub fn lift_eval(mix: &GaussianMixture, p: &LiftPoint) -> Result<LiftEval> {
    let w = Workspace::new(mix, p)?;
    let ext = mix.f_jet_ext(&p.x, w.tau)?;
    let jet = &ext.jet;
    let (r, tau, m, em2, nf, big_n) = (w.r, w.tau, w.m, w.em2, w.nf, w.big_n);

    let log_b = r.ln() + jet.f / em2;
    let log_v = (2.0 - m) * r.ln() - jet.f;
    let zeta = jet.f_t * jet.f_t - jet.f_tt;
    let lap_v_over_v = nf * (nf - 2.0) / (2.0 * big_n * tau)
        + 2.0 * (nf - 2.0) * jet.f_t / big_n
        + 2.0 * tau * zeta / big_n;

    // e^{2f/(m-2)} = b²/r²; q = r² f_t / (N (m-2))
    let e2f = (2.0 * jet.f / em2).exp();
    let b2 = r * r * e2f;
    let q = r * r * jet.f_t / (big_n * em2);
    let grad_f_scaled2 = r * r * jet.grad_f.norm_squared() / (em2 * em2);

    // d0 = 2m[ expm1(2f/(m-2)) + e^{2f/(m-2)} (q² + 2q + r²|∇f|²/(m-2)²) ]
    let d0 = 2.0 * m * ((2.0 * jet.f / em2).exp_m1() + e2f * (q * q + 2.0 * q + grad_f_scaled2));

    // ψ = n(n-2) ψ¹ + 2(n-2) ψ² + ψ³ with ψ¹ = b²/r², ψ² = b² f_t/N,
    // ψ³ = b² r² (f_t² - f_tt)/N²
    let psi1 = e2f;
    let psi2 = b2 * jet.f_t / big_n;
    let psi3 = b2 * r * r * zeta / (big_n * big_n);
    let psi = nf * (nf - 2.0) * psi1 + 2.0 * (nf - 2.0) * psi2 + psi3;

    let grad_log_b = RadialGradient {
        x: &jet.grad_f / em2,
        radial: 1.0 / r + jet.f_t * r / (big_n * em2),
    };

    // analytic ψ-gradient; the radial parts carry the chain rule ∂τ/∂r = r/N
    let db2_x = 2.0 * b2 / em2 * &jet.grad_f;
    let db2_r = 2.0 * r * e2f * (1.0 + q);
    let dpsi1_x = 2.0 * e2f / em2 * &jet.grad_f;
    let dpsi1_r = 2.0 * e2f * jet.f_t * r / (big_n * em2);
    let dpsi2_x = (b2 / big_n) * &jet.grad_f_t + (jet.f_t / big_n) * &db2_x;
    let dpsi2_r = (jet.f_t * db2_r + b2 * jet.f_tt * r / big_n) / big_n;
    let zeta_x = 2.0 * jet.f_t * &jet.grad_f_t - &ext.grad_f_tt;
    let zeta_t = 2.0 * jet.f_t * jet.f_tt - ext.f_ttt;
    let dpsi3_x = (r * r / (big_n * big_n)) * (zeta * &db2_x + b2 * &zeta_x);
    let d_b2r2_r = r.powi(3) * e2f * (4.0 + 2.0 * q);
    let dpsi3_r = zeta * d_b2r2_r / (big_n * big_n) + b2 * r * r * zeta_t * r / big_n.powi(3);
    let grad_psi = RadialGradient {
        x: nf * (nf - 2.0) * dpsi1_x + 2.0 * (nf - 2.0) * dpsi2_x + dpsi3_x,
        radial: nf * (nf - 2.0) * dpsi1_r + 2.0 * (nf - 2.0) * dpsi2_r + dpsi3_r,
    };

    // Exact block Hessian of b². Blocks: S_ij (x-block), G_i y_α (cross),
    // A δ_{αβ} + C y_α y_β (y-block). Note the y-block carries the full
    // 8 f_t e^{2f/(m-2)}/(N(m-2)) coefficient from differentiating both
    // factors of (b²)_α.
    let mut s_block = DMatrix::zeros(w.n, w.n);
    for i in 0..w.n {
        for j in 0..w.n {
            s_block[(i, j)] = b2
                * (2.0 * jet.hess_f[(i, j)] / em2
                    + 4.0 * jet.grad_f[i] * jet.grad_f[j] / (em2 * em2));
        }
    }
    let g_cross = 4.0 * e2f / em2 * &jet.grad_f
        + 4.0 * b2 * jet.f_t / (big_n * em2 * em2) * &jet.grad_f
        + 2.0 * b2 / (big_n * em2) * &jet.grad_f_t;
    let a_diag = 2.0 * e2f + 2.0 * b2 * jet.f_t / (big_n * em2);
    let c_outer = 8.0 * jet.f_t * e2f / (big_n * em2)
        + 4.0 * b2 * jet.f_t * jet.f_t / (big_n * big_n * em2 * em2)
        + 2.0 * b2 * jet.f_tt / (big_n * big_n * em2);

    let tr_s = s_block.trace();
    let lap_b2 = tr_s + big_n * a_diag + c_outer * r * r;
    // A - Δb²/m without cancellation: (nA - trS - C r²)/m
    let delta_y = (nf * a_diag - tr_s - c_outer * r * r) / m;
    let mut x_block_norm2 = 0.0;
    let lap_over_m = lap_b2 / m;
    for i in 0..w.n {
        for j in 0..w.n {
            let entry = s_block[(i, j)] - if i == j { lap_over_m } else { 0.0 };
            x_block_norm2 += entry * entry;
        }
    }
    let b_norm2_exact = x_block_norm2
        + 2.0 * r * r * g_cross.norm_squared()
        + big_n * delta_y * delta_y
        + 2.0 * delta_y * c_outer * r * r
        + c_outer * c_outer * r.powi(4);

    Ok(LiftEval {
        log_v,
        log_b,
        d0,
        psi,
        lap_v_over_v,
        grad_log_b,
        grad_psi,
        b_norm2_exact,
        lap_b2,
    })
}

/// d0 alone via the cancellation-safe form; cheap path for FD stencils.
fn d0_value(mix: &GaussianMixture, x: &[f64], r: f64, big_n: u32) -> Result<f64> {
    let n = mix.dim() as f64;
    let big_nf = big_n as f64;
    let m = n + big_nf;
    let em2 = m - 2.0;
    let tau = r * r / (2.0 * big_nf);
    let jet = mix.f_jet(x, tau)?;
    let e2f = (2.0 * jet.f / em2).exp();
    let q = r * r * jet.f_t / (big_nf * em2);
    let grad_f_scaled2 = r * r * jet.grad_f.norm_squared() / (em2 * em2);
    Ok(2.0 * m * ((2.0 * jet.f / em2).exp_m1() + e2f * (q * q + 2.0 * q + grad_f_scaled2)))
}

/// The naive difference form 2m(|∇b|² - 1); kept only so tests can confirm
/// the safe path is genuinely different at large N.
#[cfg(test)]
fn d0_naive(mix: &GaussianMixture, x: &[f64], r: f64, big_n: u32) -> Result<f64> {
    let n = mix.dim() as f64;
    let big_nf = big_n as f64;
    let m = n + big_nf;
    let em2 = m - 2.0;
    let tau = r * r / (2.0 * big_nf);
    let jet = mix.f_jet(x, tau)?;
    let e2f = (2.0 * jet.f / em2).exp();
    let q = r * r * jet.f_t / (big_nf * em2);
    let grad_b2 = e2f * ((1.0 + q) * (1.0 + q) + r * r * jet.grad_f.norm_squared() / (em2 * em2));
    Ok(2.0 * m * (grad_b2 - 1.0))
}

/// Analytic ∇d0 in reduced coordinates; needs only the second-order jet.
fn grad_d0(mix: &GaussianMixture, p: &LiftPoint) -> Result<RadialGradient> {
    let w = Workspace::new(mix, p)?;
    let jet = mix.f_jet(&p.x, w.tau)?;
    let (r, m, em2, big_n) = (w.r, w.m, w.em2, w.big_n);
    let e2f = (2.0 * jet.f / em2).exp();
    let q = r * r * jet.f_t / (big_n * em2);
    let p0 = q * q + 2.0 * q + r * r * jet.grad_f.norm_squared() / (em2 * em2);
    let dq_x = (r * r / (big_n * em2)) * &jet.grad_f_t;
    let dq_r = (2.0 * r * jet.f_t + r.powi(3) * jet.f_tt / big_n) / (big_n * em2);
    let dp0_x = 2.0 * (q + 1.0) * &dq_x + (2.0 * r * r / (em2 * em2)) * (&jet.hess_f * &jet.grad_f);
    let dp0_r = 2.0 * (q + 1.0) * dq_r
        + (2.0 * r * jet.grad_f.norm_squared()
            + 2.0 * r * r * jet.grad_f.dot(&jet.grad_f_t) * r / big_n)
            / (em2 * em2);
    let x = 2.0 * m * (e2f * (1.0 + p0) * 2.0 / em2 * &jet.grad_f + e2f * dp0_x);
    let radial = 2.0 * m * (e2f * (1.0 + p0) * 2.0 * jet.f_t * r / (big_n * em2) + e2f * dp0_r);
    Ok(RadialGradient {
        x: DVector::from(x),
        radial,
    })
}

/// d0(x, √(2Nτ), N) - 4 D0(x, τ): the pointwise elliptic-parabolic gap.
pub fn deficit_gap(mix: &GaussianMixture, x: &[f64], tau: f64, big_n: u32) -> Result<f64> {
    let p = LiftPoint::from_tau(x.to_vec(), tau, big_n)?;
    let le = lift_eval(mix, &p)?;
    let pe = parabolic::parabolic_eval(mix, x, p.tau())?;
    Ok(le.d0 - 4.0 * pe.d0)
}

/// Laplacian on R^n x R^N of a y-radial function g(x, r), by central second
/// differences plus the exact ((N-1)/r) g_r drift term.
pub fn radial_laplacian_fd<G>(g: G, x: &[f64], r: f64, big_n: u32, step: f64) -> Result<f64>
where
    G: Fn(&[f64], f64) -> Result<f64>,
{
    radial_laplacian_fd_steps(g, x, r, big_n, step, step)
}

fn radial_laplacian_fd_steps<G>(
    g: G,
    x: &[f64],
    r: f64,
    big_n: u32,
    step_x: f64,
    step_r: f64,
) -> Result<f64>
where
    G: Fn(&[f64], f64) -> Result<f64>,
{
    if !(step_r > 0.0) || step_r >= r || !(step_x > 0.0) {
        return Err(Error::StepTooLarge {
            step: step_r,
            scale: r,
        });
    }
    let center = g(x, r)?;
    let mut lap = 0.0;
    let mut xs = x.to_vec();
    for i in 0..x.len() {
        xs[i] = x[i] + step_x;
        let plus = g(&xs, r)?;
        xs[i] = x[i] - step_x;
        let minus = g(&xs, r)?;
        xs[i] = x[i];
        lap += (plus - 2.0 * center + minus) / (step_x * step_x);
    }
    let r_plus = g(x, r + step_r)?;
    let r_minus = g(x, r - step_r)?;
    lap += (r_plus - 2.0 * center + r_minus) / (step_r * step_r);
    lap += (big_n as f64 - 1.0) / r * (r_plus - r_minus) / (2.0 * step_r);
    Ok(lap)
}

/// Δ(d0 v)/v by the product rule: FD Laplacian of d0 plus analytic
/// 2⟨∇d0, ∇log v⟩ + d0 Δv/v. Every term stays O(1) for N up to 10^6.
fn lap_d0v_over_v(mix: &GaussianMixture, p: &LiftPoint, step: f64, le: &LiftEval) -> Result<f64> {
    let w = Workspace::new(mix, p)?;
    // d0 varies on the τ scale; ∂r = (r/N) ∂τ keeps curvature in r mild
    let step_r = step * (p.r / w.big_n.sqrt()).min(1.0);
    let lap_d0 = radial_laplacian_fd_steps(
        |x, r| d0_value(mix, x, r, p.big_n),
        &p.x,
        p.r,
        p.big_n,
        step,
        step_r,
    )?;
    let gd0 = grad_d0(mix, p)?;
    let jet = mix.f_jet(&p.x, w.tau)?;
    let grad_log_v = RadialGradient {
        x: -&jet.grad_f,
        radial: (2.0 - w.m) / p.r - jet.f_t * p.r / w.big_n,
    };
    Ok(lap_d0 + 2.0 * gd0.dot(&grad_log_v) + le.d0 * le.lap_v_over_v)
}

/// Residual of the exact drift identity for Δ(d0 v)/v.
///
/// The identity has no error terms, so the residual is pure FD truncation
/// from the Δd0 stencil: O(step²) with a mixture-dependent constant.
pub fn dfct_residual(mix: &GaussianMixture, p: &LiftPoint, step: f64) -> Result<f64> {
    let le = lift_eval(mix, p)?;
    let lhs = lap_d0v_over_v(mix, p, step, &le)?;
    Ok(lhs - dfct_rhs(mix, p, &le))
}

fn dfct_rhs(mix: &GaussianMixture, p: &LiftPoint, le: &LiftEval) -> f64 {
    let m = p.m(mix.dim());
    let b2 = le.b_squared();
    let two_minus_m = 2.0 - m;
    (m / b2) * le.b_norm2_exact
        + (4.0 * m / two_minus_m) * le.grad_log_b.dot(&le.grad_psi)
        + (4.0 - m) * le.d0 * le.psi / (two_minus_m * b2)
        + 4.0 * m * le.psi / (two_minus_m * b2)
        + 4.0 * le.psi * le.psi / (two_minus_m * two_minus_m * b2)
}

/// The two top-level asymptotic residuals sharing one left side:
/// key1 = Δ(d0 v)/v - (m/b²)|B|², key3 = Δ(d0 v)/v - 8τ|F|².
pub fn key_residuals(mix: &GaussianMixture, p: &LiftPoint, step: f64) -> Result<(f64, f64)> {
    let le = lift_eval(mix, p)?;
    let lhs = lap_d0v_over_v(mix, p, step, &le)?;
    let m = p.m(mix.dim());
    let key1 = lhs - (m / le.b_squared()) * le.b_norm2_exact;
    let pe = parabolic::parabolic_eval(mix, &p.x, p.tau())?;
    let key3 = lhs - 8.0 * p.tau() * pe.f_norm2;
    Ok((key1, key3))
}
