//! Sphere-volume and cap-fraction special functions, kept in the log domain.
//!
//! The unit sphere volume is `ω_k = 2 π^{(k+1)/2} / Γ((k+1)/2)` and the cap
//! fraction `γ(N, θ)` is the share of `S^{N-1}` inside a geodesic ball of
//! radius `θ`. For large `N` the raw integrand `sin^{N-2}` underflows, so both
//! are evaluated through `log Γ` and the regularized incomplete beta function.

use crate::error::{Error, Result};

/// ln Γ(x) for x > 0.
///
/// Stirling's asymptotic series above `STIRLING_CUT`, upward recursion below;
/// relative accuracy is ~1e-14 over the range used here (up to 1e8).
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    let mut z = x;
    let mut shift = 0.0;
    while z < STIRLING_CUT {
        shift += z.ln();
        z += 1.0;
    }
    stirling_ln_gamma(z) - shift
}

const STIRLING_CUT: f64 = 15.0;

/// Bernoulli coefficients B_{2k} / (2k (2k-1)) of the Stirling series.
const STIRLING_COEFFS: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

fn stirling_series(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut sum = 0.0;
    let mut p = inv;
    for c in STIRLING_COEFFS {
        sum += c * p;
        p *= inv2;
    }
    sum
}

fn stirling_ln_gamma(z: f64) -> f64 {
    const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + stirling_series(z)
}

/// ln Γ(z + 1/2) - ln Γ(z), computed without forming either log-gamma.
///
/// Differencing two O(z log z) values would lose ~1e-9 absolutely at z ~ 1e6;
/// the cancelled form below keeps the absolute error near machine epsilon,
/// which the Stirling-ratio rate checks rely on.
pub fn ln_gamma_half_step(z: f64) -> f64 {
    assert!(z > 0.0);
    if z < STIRLING_CUT {
        // D(z) = D(z+1) + ln z - ln(z + 1/2)
        return ln_gamma_half_step(z + 1.0) + z.ln() - (z + 0.5).ln();
    }
    0.5 * z.ln() + z * (0.5 / z).ln_1p() - 0.5 + stirling_series(z + 0.5) - stirling_series(z)
}

/// ln Γ(z + k/2) - ln Γ(z) for a non-negative count of half-steps `k`.
pub fn ln_gamma_ratio_half_steps(z: f64, k: u32) -> f64 {
    assert!(z > 0.0);
    let whole = k / 2;
    let mut acc = if k % 2 == 1 {
        ln_gamma_half_step(z)
    } else {
        0.0
    };
    let base = if k % 2 == 1 { z + 0.5 } else { z };
    for i in 0..whole {
        acc += (base + i as f64).ln();
    }
    acc
}

/// log of the volume ω_k of the unit k-sphere in R^{k+1}.
pub fn log_sphere_volume(k: u32) -> f64 {
    let half = (k as f64 + 1.0) / 2.0;
    std::f64::consts::LN_2 + half * std::f64::consts::PI.ln() - ln_gamma(half)
}

/// N^{n/2} ω_{m-1} / ω_{N-1} with m = n + N, entirely in the log domain.
///
/// Tends to (2π)^{n/2} at rate N^{-1}; exactly (2π)^{n/2} for n = 2 because
/// the gamma ratio telescopes.
pub fn omega_ratio(n: u32, big_n: u32) -> f64 {
    assert!(n >= 1 && big_n >= 2);
    let nf = n as f64;
    let z = big_n as f64 / 2.0;
    // ln ω_{m-1} - ln ω_{N-1} = (n/2) ln π - [ln Γ(m/2) - ln Γ(N/2)]
    let log_ratio = 0.5 * nf * ((big_n as f64).ln() + std::f64::consts::PI.ln())
        - ln_gamma_ratio_half_steps(z, n);
    log_ratio.exp()
}

/// (1 - δ/N)^{N/2} via log1p; bounded above by e^{-δ/2} (equality at δ = 0).
pub fn half_power_decay(delta: f64, big_n: u32) -> Result<f64> {
    let nf = big_n as f64;
    if !(0.0..nf).contains(&delta) {
        return Err(Error::domain(format!(
            "half_power_decay needs 0 <= delta < N, got delta={delta}, N={big_n}"
        )));
    }
    Ok((0.5 * nf * (-delta / nf).ln_1p()).exp())
}

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction with a
/// log-domain prefactor.
pub fn regularized_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0 && (0.0..=1.0).contains(&x));
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    if x < (a + 1.0) / (a + b + 2.0) {
        let ln_pref = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
        (ln_pref.exp() / a) * beta_cf(a, b, x)
    } else {
        let y = 1.0 - x;
        let ln_pref = b * y.ln() + a * (-y).ln_1p() - ln_beta(a, b);
        1.0 - (ln_pref.exp() / b) * beta_cf(b, a, y)
    }
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Lentz continued fraction for the incomplete beta (Numerical Recipes form).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    const EPS: f64 = 3e-16;
    // Convergence rate is geometric with ratio ~x; far-tail caps at huge N can
    // legitimately need tens of thousands of terms.
    const MAX_ITER: usize = 2_000_000;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= EPS {
            break;
        }
    }
    h
}

/// Cap fractions on S^{N-1} for one fixed dimension, with the normalizer
/// c = ω_{N-1}/ω_{N-2} cached in log form.
#[derive(Debug, Clone)]
pub struct CapFractionTable {
    big_n: u32,
    log_norm: f64,
}

impl CapFractionTable {
    pub fn new(big_n: u32) -> Result<Self> {
        if big_n < 2 {
            return Err(Error::domain(format!(
                "cap fractions need N >= 2, got {big_n}"
            )));
        }
        // c = ω_{N-1}/ω_{N-2} = √π Γ((N-1)/2) / Γ(N/2) = B((N-1)/2, 1/2)
        let a = (big_n as f64 - 1.0) / 2.0;
        let log_norm = 0.5 * std::f64::consts::PI.ln() - ln_gamma_half_step(a);
        Ok(CapFractionTable { big_n, log_norm })
    }

    pub fn dimension(&self) -> u32 {
        self.big_n
    }

    /// log c with c = ω_{N-1}/ω_{N-2} = ∫_0^π sin^{N-2}.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Fraction of S^{N-1} within geodesic distance θ of a point.
    pub fn gamma(&self, theta: f64) -> Result<f64> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::domain(format!(
                "cap angle must lie in [0, π], got {theta}"
            )));
        }
        if theta > std::f64::consts::FRAC_PI_2 {
            // reflection: γ(π - θ) = 1 - γ(θ)
            return Ok(1.0 - self.gamma(std::f64::consts::PI - theta)?);
        }
        Ok(self.lower_half(theta).linear())
    }

    /// log γ(N, θ) for θ ≤ π/2; -inf when the cap mass underflows entirely.
    pub fn log_gamma(&self, theta: f64) -> Result<f64> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::domain(format!(
                "log_gamma expects θ in [0, π/2], got {theta}"
            )));
        }
        Ok(self.lower_half(theta).log())
    }

    fn lower_half(&self, theta: f64) -> CapValue {
        if theta == 0.0 {
            return CapValue::Log(f64::NEG_INFINITY);
        }
        let a = (self.big_n as f64 - 1.0) / 2.0;
        let b = 0.5;
        let s = theta.sin();
        let co = theta.cos();
        let x = (s * s).min(1.0);
        // log c doubles as ln B(a, 1/2), the prefactor normalizer.
        if x < (a + 1.0) / (a + b + 2.0) {
            // γ = I_x(a, 1/2) / 2 with ln(1-x) taken from cos θ directly.
            let ln_one_minus_x = 2.0 * co.abs().max(f64::MIN_POSITIVE).ln();
            let ln_pref = a * x.ln() + b * ln_one_minus_x - self.log_norm;
            let log_gamma = ln_pref - a.ln() + beta_cf(a, b, x).ln() - std::f64::consts::LN_2;
            CapValue::Log(log_gamma)
        } else {
            let y = (co * co).max(0.0);
            let ln_pref = b * y.max(f64::MIN_POSITIVE).ln() + a * (-y).ln_1p() - self.log_norm;
            let gamma = 0.5 * (1.0 - (ln_pref.exp() / b) * beta_cf(b, a, y));
            CapValue::Linear(gamma)
        }
    }
}

enum CapValue {
    Linear(f64),
    Log(f64),
}

impl CapValue {
    fn linear(&self) -> f64 {
        match self {
            CapValue::Linear(v) => *v,
            CapValue::Log(l) => l.exp(),
        }
    }
    fn log(&self) -> f64 {
        match self {
            CapValue::Linear(v) => v.ln(),
            CapValue::Log(l) => *l,
        }
    }
}

/// One-shot cap fraction; build a [`CapFractionTable`] for repeated use.
pub fn cap_fraction(big_n: u32, theta: f64) -> Result<f64> {
    CapFractionTable::new(big_n)?.gamma(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_log_1d, QuadratureSpec};
    use proptest::prelude::*;

    #[test]
    fn sphere_volumes_match_closed_forms() {
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((log_sphere_volume(1) - two_pi.ln()).abs() < 1e-14);
        assert!((log_sphere_volume(2) - (2.0 * two_pi).ln()).abs() < 1e-14);
        assert!((log_sphere_volume(3) - (2.0 * std::f64::consts::PI.powi(2)).ln()).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for k in 2..=20u32 {
            fact *= (k - 1) as f64;
            assert!(
                (ln_gamma(k as f64) - fact.ln()).abs() < 1e-12 * fact.ln().abs().max(1.0),
                "k={k}"
            );
        }
        // Γ(1/2) = √π
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-13);
    }

    #[test]
    fn half_step_ratio_is_consistent_with_ln_gamma() {
        for &z in &[0.5, 1.0, 3.25, 14.9, 20.0, 1e3, 1e6] {
            let direct = ln_gamma(z + 0.5) - ln_gamma(z);
            let stable = ln_gamma_half_step(z);
            let tol = 1e-9 * direct.abs().max(1.0);
            assert!((direct - stable).abs() < tol, "z={z}");
        }
    }

    #[test]
    fn cap_fraction_half_and_endpoints() {
        for &n in &[2u32, 3, 10, 1_000, 1_000_000] {
            let t = CapFractionTable::new(n).unwrap();
            assert!((t.gamma(std::f64::consts::FRAC_PI_2).unwrap() - 0.5).abs() < 1e-12);
            assert_eq!(t.gamma(0.0).unwrap(), 0.0);
            assert!((t.gamma(std::f64::consts::PI).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_fraction_s2_closed_form() {
        // on S^2 the cap fraction is (1 - cos θ)/2
        let t = CapFractionTable::new(3).unwrap();
        for &theta in &[0.2, std::f64::consts::FRAC_PI_3, 1.0, 2.5] {
            let expect = 0.5 * (1.0 - theta.cos());
            assert!(
                (t.gamma(theta).unwrap() - expect).abs() < 1e-12,
                "theta={theta}"
            );
        }
        assert!((t.gamma(std::f64::consts::FRAC_PI_3).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn cap_fraction_matches_sine_integral() {
        // independent route: γ(θ) = exp(log ∫_0^θ sin^{N-2} - log c)
        let spec = QuadratureSpec::default();
        for &n in &[5u32, 40, 300] {
            let t = CapFractionTable::new(n).unwrap();
            for &theta in &[0.3, 0.9, 1.4] {
                let log_int = integrate_log_1d(
                    |x: f64| (n as f64 - 2.0) * x.sin().max(f64::MIN_POSITIVE).ln(),
                    0.0,
                    theta,
                    &spec,
                )
                .unwrap();
                let oracle = (log_int - t.log_norm()).exp();
                let got = t.gamma(theta).unwrap();
                assert!(
                    (got - oracle).abs() < 1e-10 * oracle.max(1e-30),
                    "N={n} theta={theta}: {got} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn cap_fraction_monotone_in_theta() {
        for &n in &[2u32, 3, 10, 1_000, 1_000_000] {
            let t = CapFractionTable::new(n).unwrap();
            let mut prev = -1.0;
            for k in 0..=200 {
                let theta = std::f64::consts::PI * k as f64 / 200.0;
                let g = t.gamma(theta).unwrap();
                assert!(g >= prev - 1e-13, "N={n} theta={theta}");
                prev = g;
            }
        }
    }

    #[test]
    fn cap_fraction_reflection_identity() {
        for &n in &[2u32, 7, 100, 10_000] {
            let t = CapFractionTable::new(n).unwrap();
            for k in 1..40 {
                let theta = std::f64::consts::PI * k as f64 / 40.0;
                let lhs = t.gamma(theta).unwrap() + t.gamma(std::f64::consts::PI - theta).unwrap();
                assert!((lhs - 1.0).abs() <= 1e-12, "N={n} theta={theta}");
            }
        }
    }

    #[test]
    fn omega_ratio_exact_for_n_two() {
        let two_pi = 2.0 * std::f64::consts::PI;
        for &n in &[10u32, 100, 10_000, 1_000_000] {
            assert!((omega_ratio(2, n) - two_pi).abs() < 1e-12 * two_pi, "N={n}");
        }
    }

    #[test]
    fn omega_ratio_large_n_asymptote() {
        let target = (2.0 * std::f64::consts::PI).sqrt();
        assert!((omega_ratio(1, 1_000_000) - target).abs() < 1e-5);
    }

    #[test]
    fn omega_ratio_scaled_gap_bounded() {
        // N * |ratio - (2π)^{n/2}| stays bounded for n = 1, 3
        for &n in &[1u32, 3] {
            let target = (2.0 * std::f64::consts::PI).powf(n as f64 / 2.0);
            let mut scaled = Vec::new();
            let mut big_n = 100u32;
            while big_n <= 1_000_000 {
                scaled.push(big_n as f64 * (omega_ratio(n, big_n) - target).abs());
                big_n *= 10;
            }
            let max = scaled.iter().cloned().fold(0.0, f64::max);
            // measured constants: ~0.63 for n=1, ~11.8 for n=3
            assert!(max < 20.0, "n={n}: scaled gaps {scaled:?}");
        }
    }

    #[test]
    fn half_power_examples() {
        assert_eq!(half_power_decay(0.0, 50).unwrap(), 1.0);
        let v = half_power_decay(1.0, 2).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!(v <= (-0.5f64).exp());
        let w = half_power_decay(50.0, 100).unwrap();
        assert!((w - 0.5f64.powi(50)).abs() < 1e-28);
        assert!(half_power_decay(2.0, 2).is_err());
    }

    proptest! {
        #[test]
        fn taylor_bound_holds(delta in 0.0..500.0f64, big_n in 2u32..1_000_000) {
            prop_assume!(delta < big_n as f64);
            let v = half_power_decay(delta, big_n).unwrap();
            prop_assert!(v <= (-delta / 2.0).exp() * (1.0 + 1e-14));
        }

        #[test]
        fn beta_is_a_cdf(a in 0.5..200.0f64, b in 0.5..200.0f64, x in 0.0..1.0f64) {
            let v = regularized_beta(a, b, x);
            prop_assert!((0.0..=1.0).contains(&v));
            let dx = 1e-3;
            if x + dx < 1.0 {
                prop_assert!(regularized_beta(a, b, x + dx) >= v - 1e-12);
            }
        }
    }
}
