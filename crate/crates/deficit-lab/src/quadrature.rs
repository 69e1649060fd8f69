//! Adaptive Gauss-Kronrod quadrature with error control, plus a log-domain
//! mode for integrands whose values underflow long before their logs do.
//!
//! Everything here is deterministic for fixed inputs: intervals are kept in a
//! heap ordered by (error estimate, left endpoint) with total ordering on
//! floats, so subdivision order never depends on hash state or timing.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and budgets for the adaptive engine.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Where unbounded Gaussian-weighted domains are truncated, in standard
    /// deviations of the widest component; the tail beyond 12σ is < 1e-31.
    pub truncation_sigmas: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_subdivisions: 2000,
            truncation_sigmas: 12.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rel_tol <= 0.0 || self.abs_tol <= 0.0 {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::domain("max_subdivisions must be at least 1"));
        }
        if self.truncation_sigmas < 6.0 {
            return Err(Error::domain("truncation_sigmas must be at least 6"));
        }
        Ok(())
    }

    fn tighter(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: self.rel_tol * 0.1,
            abs_tol: self.abs_tol * 0.1,
            ..self.clone()
        }
    }
}

/// Value, error estimate and work count of one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
}

// 7-point Gauss / 15-point Kronrod pair on [-1, 1], QUADPACK digits.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// QUADPACK-style error rescaling.
fn rescale_error(raw: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = raw.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn kronrod_nodes(a: f64, b: f64) -> [f64; 15] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes = [0.0; 15];
    for (j, &x) in XGK.iter().enumerate().take(7) {
        nodes[2 * j] = center - half * x;
        nodes[2 * j + 1] = center + half * x;
    }
    nodes[14] = center;
    nodes
}

fn kronrod_sum(samples: &[f64; 15], a: f64, b: f64) -> (f64, f64, f64, f64) {
    let half = 0.5 * (b - a);
    let f_center = samples[14];
    let mut res_kronrod = f_center * WGK[7];
    let mut res_gauss = f_center * WG[3];
    let mut res_abs = res_kronrod.abs();
    for j in 0..7 {
        let fsum = samples[2 * j] + samples[2 * j + 1];
        res_kronrod += WGK[j] * fsum;
        res_abs += WGK[j] * (samples[2 * j].abs() + samples[2 * j + 1].abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * fsum;
        }
    }
    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((samples[2 * j] - mean).abs() + (samples[2 * j + 1] - mean).abs());
    }
    let err = rescale_error(
        (res_kronrod - res_gauss) * half,
        res_abs * half,
        res_asc * half,
    );
    (res_kronrod * half, err, res_abs * half, res_asc * half)
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.a == other.a
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn eval_interval<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Interval> {
    let nodes = kronrod_nodes(a, b);
    let mut samples = [0.0; 15];
    for (s, &x) in samples.iter_mut().zip(nodes.iter()) {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { at: x });
        }
        *s = v;
    }
    let (value, error, _, _) = kronrod_sum(&samples, a, b);
    Ok(Interval { a, b, value, error })
}

/// Adaptive integral of `f` over the finite interval `[a, b]`.
pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!(
            "integration interval must satisfy a < b with finite endpoints, got [{a}, {b}]"
        )));
    }
    let mut heap = BinaryHeap::new();
    heap.push(eval_interval(&f, a, b)?);
    let mut subdivisions = 0usize;
    loop {
        let value: f64 = heap.iter().map(|i| i.value).sum();
        let error: f64 = heap.iter().map(|i| i.error).sum();
        if error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
            return Ok(QuadResult {
                value,
                error_estimate: error,
                subdivisions_used: subdivisions,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                error_estimate: error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating-point resolution; accept its estimate
            heap.push(Interval {
                error: 0.0,
                ..worst
            });
            subdivisions += 1;
            continue;
        }
        heap.push(eval_interval(&f, worst.a, mid)?);
        heap.push(eval_interval(&f, mid, worst.b)?);
        subdivisions += 1;
    }
}

/// log Σ exp over a small collection, guarded against empty/-inf input.
pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, Copy)]
struct LogInterval {
    a: f64,
    b: f64,
    log_value: f64,
    log_error: f64,
}

impl PartialEq for LogInterval {
    fn eq(&self, other: &Self) -> bool {
        self.log_error == other.log_error && self.a == other.a
    }
}
impl Eq for LogInterval {}
impl PartialOrd for LogInterval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for LogInterval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.log_error
            .total_cmp(&other.log_error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn eval_log_interval<F: Fn(f64) -> f64>(logf: &F, a: f64, b: f64) -> Result<LogInterval> {
    let nodes = kronrod_nodes(a, b);
    let mut logs = [0.0; 15];
    let mut peak = f64::NEG_INFINITY;
    for (s, &x) in logs.iter_mut().zip(nodes.iter()) {
        let v = logf(x);
        if v.is_nan() || v == f64::INFINITY {
            return Err(Error::NonFiniteIntegrand { at: x });
        }
        *s = v;
        peak = peak.max(v);
    }
    if peak == f64::NEG_INFINITY {
        return Ok(LogInterval {
            a,
            b,
            log_value: f64::NEG_INFINITY,
            log_error: f64::NEG_INFINITY,
        });
    }
    // accumulate against the interval's running maximum so nothing overflows
    let mut samples = [0.0; 15];
    for (m, &l) in samples.iter_mut().zip(logs.iter()) {
        *m = (l - peak).exp();
    }
    let (value, error, _, _) = kronrod_sum(&samples, a, b);
    let log_value = if value > 0.0 {
        peak + value.ln()
    } else {
        f64::NEG_INFINITY
    };
    let log_error = if error > 0.0 {
        peak + error.ln()
    } else {
        f64::NEG_INFINITY
    };
    Ok(LogInterval {
        a,
        b,
        log_value,
        log_error,
    })
}

/// log of ∫ exp(logf) over `[a, b]`; `logf` may return -inf where the
/// integrand vanishes. Error control is relative in the linear domain.
pub fn integrate_log_1d<F: Fn(f64) -> f64>(
    logf: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!(
            "integration interval must satisfy a < b with finite endpoints, got [{a}, {b}]"
        )));
    }
    let mut heap = BinaryHeap::new();
    heap.push(eval_log_interval(&logf, a, b)?);
    let mut subdivisions = 0usize;
    loop {
        let log_value = log_sum_exp(heap.iter().map(|i| i.log_value));
        let log_error = log_sum_exp(heap.iter().map(|i| i.log_error));
        if log_value == f64::NEG_INFINITY || log_error <= log_value + spec.rel_tol.ln() {
            return Ok(log_value);
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                error_estimate: (log_error - log_value).exp(),
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(LogInterval {
                log_error: f64::NEG_INFINITY,
                ..worst
            });
            subdivisions += 1;
            continue;
        }
        heap.push(eval_log_interval(&logf, worst.a, mid)?);
        heap.push(eval_log_interval(&logf, mid, worst.b)?);
        subdivisions += 1;
    }
}

/// Tensor-product adaptive integral over an axis-aligned box in dimension
/// n <= 3. Spherical domains are handled by zero-extending the integrand.
pub fn integrate_box<F: Fn(&[f64]) -> f64>(
    f: F,
    center: &[f64],
    half_widths: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    integrate_box_dyn(&f, center, half_widths, spec)
}

// dyn boundary so the n = 3 recursion does not instantiate endlessly
fn integrate_box_dyn(
    f: &dyn Fn(&[f64]) -> f64,
    center: &[f64],
    half_widths: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    let n = center.len();
    if n == 0 || n > 3 {
        return Err(Error::DimensionTooLarge(n));
    }
    if half_widths.len() != n {
        return Err(Error::domain("center/half_widths length mismatch"));
    }
    match n {
        1 => integrate_1d(
            |x| f(&[x]),
            center[0] - half_widths[0],
            center[0] + half_widths[0],
            spec,
        ),
        2 => {
            let inner_spec = spec.tighter();
            let inner_err = std::cell::Cell::new(false);
            let inner_work = std::cell::Cell::new(0usize);
            let outer = integrate_1d(
                |x0| {
                    let inner = integrate_1d(
                        |x1| f(&[x0, x1]),
                        center[1] - half_widths[1],
                        center[1] + half_widths[1],
                        &inner_spec,
                    );
                    match inner {
                        Ok(r) => {
                            inner_work.set(inner_work.get().saturating_add(r.subdivisions_used));
                            r.value
                        }
                        Err(_) => {
                            inner_err.set(true);
                            f64::NAN
                        }
                    }
                },
                center[0] - half_widths[0],
                center[0] + half_widths[0],
                spec,
            );
            match outer {
                Ok(mut r) => {
                    r.subdivisions_used = r.subdivisions_used.saturating_add(inner_work.get());
                    Ok(r)
                }
                Err(e) if inner_err.get() => Err(Error::NonConvergence {
                    error_estimate: f64::NAN,
                    subdivisions: match e {
                        Error::NonConvergence { subdivisions, .. } => subdivisions,
                        _ => 0,
                    },
                }),
                Err(e) => Err(e),
            }
        }
        3 => {
            let inner_spec = spec.tighter();
            let inner_err = std::cell::Cell::new(false);
            let inner_work = std::cell::Cell::new(0usize);
            let outer = integrate_1d(
                |x0| {
                    let inner = integrate_box_dyn(
                        &|xs: &[f64]| f(&[x0, xs[0], xs[1]]),
                        &center[1..],
                        &half_widths[1..],
                        &inner_spec,
                    );
                    match inner {
                        Ok(r) => {
                            inner_work.set(inner_work.get().saturating_add(r.subdivisions_used));
                            r.value
                        }
                        Err(_) => {
                            inner_err.set(true);
                            f64::NAN
                        }
                    }
                },
                center[0] - half_widths[0],
                center[0] + half_widths[0],
                spec,
            );
            match outer {
                Ok(mut r) => {
                    r.subdivisions_used = r.subdivisions_used.saturating_add(inner_work.get());
                    Ok(r)
                }
                Err(_) if inner_err.get() => Err(Error::NonConvergence {
                    error_estimate: f64::NAN,
                    subdivisions: 0,
                }),
                Err(e) => Err(e),
            }
        }
        _ => unreachable!(),
    }
}
