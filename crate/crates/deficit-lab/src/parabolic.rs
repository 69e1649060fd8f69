//! The parabolic deficit D0 = t(|∇f|² + f_t) + (tf)_t, its trace-free
//! Hessian F = Hess_f - δ/(2t), and the evolution identity
//! Box D0 = -2⟨∇D0, ∇f⟩ - 2t|F|² checked by finite differences.
//!
//! On the standard kernel D0 is constant (n/2) log 4π and F vanishes.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::heat_model::GaussianMixture;

/// Pointwise parabolic quantities.
#[derive(Debug, Clone)]
pub struct ParabolicEval {
    pub d0: f64,
    pub grad_d0: DVector<f64>,
    /// |Hess_f - δ/(2t)|² (Frobenius).
    pub f_norm2: f64,
    /// -2⟨∇D0, ∇f⟩ - 2t|F|², the right side of the evolution identity.
    pub box_d0_rhs: f64,
}

/// Evaluate D0, ∇D0, |F|² and the Box-identity right side at (x, t).
pub fn parabolic_eval(mix: &GaussianMixture, x: &[f64], t: f64) -> Result<ParabolicEval> {
    let jet = mix.f_jet(x, t)?;
    let n = mix.dim();
    let grad_norm2 = jet.grad_f.norm_squared();
    let d0 = t * grad_norm2 + 2.0 * t * jet.f_t + jet.f;
    let grad_d0 = 2.0 * t * (&jet.hess_f * &jet.grad_f) + 2.0 * t * &jet.grad_f_t + &jet.grad_f;
    let mut f_norm2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let entry = jet.hess_f[(i, j)] - if i == j { 1.0 / (2.0 * t) } else { 0.0 };
            f_norm2 += entry * entry;
        }
    }
    let box_d0_rhs = -2.0 * grad_d0.dot(&jet.grad_f) - 2.0 * t * f_norm2;
    Ok(ParabolicEval {
        d0,
        grad_d0,
        f_norm2,
        box_d0_rhs,
    })
}

/// D0 alone; the cheap path used in finite-difference stencils.
pub(crate) fn d0_value(mix: &GaussianMixture, x: &[f64], t: f64) -> Result<f64> {
    let jet = mix.f_jet(x, t)?;
    Ok(t * jet.grad_f.norm_squared() + 2.0 * t * jet.f_t + jet.f)
}

/// Residuals of the evolution identity, by central differences on the
/// analytically computed D0 field.
///
/// Returns `(residual_scalar, residual_weighted)`:
/// the scalar form checks `Box D0 = -2⟨∇D0,∇f⟩ - 2t|F|²`, the weighted form
/// checks `Box(D0 u) = -2t|F|² u`. Both are pure FD truncation error, O(step²).
pub fn box_d0_residual(mix: &GaussianMixture, x: &[f64], t: f64, step: f64) -> Result<(f64, f64)> {
    if !(step > 0.0) || step > t / 2.0 {
        return Err(Error::StepTooLarge { step, scale: t });
    }
    let eval = parabolic_eval(mix, x, t)?;
    let n = mix.dim();
    let h = step;

    let d0_at = |x: &[f64], t: f64| d0_value(mix, x, t);
    let fd_dt = (d0_at(x, t + h)? - d0_at(x, t - h)?) / (2.0 * h);
    let center = d0_at(x, t)?;
    let mut fd_lap = 0.0;
    let mut xs = x.to_vec();
    for i in 0..n {
        xs[i] = x[i] + h;
        let plus = d0_at(&xs, t)?;
        xs[i] = x[i] - h;
        let minus = d0_at(&xs, t)?;
        xs[i] = x[i];
        fd_lap += (plus - 2.0 * center + minus) / (h * h);
    }
    let residual_scalar = (fd_dt - fd_lap) - eval.box_d0_rhs;

    // weighted form on the product D0·u
    let g_at =
        |x: &[f64], t: f64| -> Result<f64> { Ok(d0_value(mix, x, t)? * mix.log_u(x, t)?.exp()) };
    let g_center = g_at(x, t)?;
    let fd_g_dt = (g_at(x, t + h)? - g_at(x, t - h)?) / (2.0 * h);
    let mut fd_g_lap = 0.0;
    for i in 0..n {
        xs[i] = x[i] + h;
        let plus = g_at(&xs, t)?;
        xs[i] = x[i] - h;
        let minus = g_at(&xs, t)?;
        xs[i] = x[i];
        fd_g_lap += (plus - 2.0 * g_center + minus) / (h * h);
    }
    let u = mix.log_u(x, t)?.exp();
    let residual_weighted = (fd_g_dt - fd_g_lap) + 2.0 * t * eval.f_norm2 * u;
    Ok((residual_scalar, residual_weighted))
}
