//! Closed-form positive heat solutions on R^n (n <= 3) and their exact
//! derivative jets.
//!
//! A mixture `u(x,t) = Σ w_i (4π(t+t_i))^{-n/2} exp(-|x-c_i|²/(4(t+t_i)))`
//! solves the heat equation componentwise, so `u_t = Δu` holds to round-off
//! and every jet below is an exact closed form. Components are combined in
//! the log domain against a running maximum: entropy integrands need `log u`
//! directly, and far-apart components would otherwise underflow.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One Gaussian component: weight, center, and time offset.
#[derive(Debug, Clone)]
pub struct Component {
    pub weight: f64,
    pub center: DVector<f64>,
    pub time_offset: f64,
}

/// Convex combination of translated/time-offset heat kernels.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    n: usize,
    components: Vec<Component>,
}

/// Value and derivatives of u at a point.
#[derive(Debug, Clone)]
pub struct HeatJet {
    pub u: f64,
    pub grad_u: DVector<f64>,
    pub hess_u: DMatrix<f64>,
    pub u_t: f64,
    pub grad_u_t: DVector<f64>,
    pub u_tt: f64,
}

/// Value and derivatives of f = -log(t^{n/2} u).
#[derive(Debug, Clone)]
pub struct FJet {
    pub f: f64,
    pub grad_f: DVector<f64>,
    pub hess_f: DMatrix<f64>,
    pub f_t: f64,
    pub f_tt: f64,
    pub grad_f_t: DVector<f64>,
}

/// [`FJet`] plus the third-order time derivatives needed by the lift's
/// analytic ψ-gradient (the ζ_t and ∇ζ terms).
#[derive(Debug, Clone)]
pub struct FJetExt {
    pub jet: FJet,
    pub f_ttt: f64,
    pub grad_f_tt: DVector<f64>,
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

impl GaussianMixture {
    pub fn new(n: usize, components: Vec<Component>) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::domain(format!(
                "spatial dimension must be 1..=3, got {n}"
            )));
        }
        if components.is_empty() {
            return Err(Error::domain("mixture needs at least one component"));
        }
        let mut total = 0.0;
        for (i, c) in components.iter().enumerate() {
            if !(c.weight > 0.0) {
                return Err(Error::domain(format!(
                    "component {i}: weight must be positive, got {}",
                    c.weight
                )));
            }
            if c.center.len() != n {
                return Err(Error::domain(format!(
                    "component {i}: center has dimension {}, expected {n}",
                    c.center.len()
                )));
            }
            if !(c.time_offset >= 0.0) {
                return Err(Error::domain(format!(
                    "component {i}: time offset must be >= 0, got {}",
                    c.time_offset
                )));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::domain(format!(
                "weights must sum to 1 within {WEIGHT_SUM_TOL:e}, got {total}"
            )));
        }
        Ok(GaussianMixture { n, components })
    }

    /// Single heat kernel started at the origin: u = (4πt)^{-n/2} e^{-|x|²/4t}.
    pub fn standard_kernel(n: usize) -> Self {
        GaussianMixture::new(
            n,
            vec![Component {
                weight: 1.0,
                center: DVector::zeros(n),
                time_offset: 0.0,
            }],
        )
        .expect("standard kernel is valid")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// True when every component has a strictly positive time offset, i.e.
    /// u(., 0) is a smooth density rather than a point mass.
    pub fn smooth_at_zero(&self) -> bool {
        self.components.iter().all(|c| c.time_offset > 0.0)
    }

    pub fn min_time_offset(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.time_offset)
            .fold(f64::INFINITY, f64::min)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        for c in &self.components {
            if !(t + c.time_offset > 0.0) {
                return Err(Error::NonPositiveTime(t + c.time_offset));
            }
        }
        Ok(())
    }

    /// Same mixture translated by `shift`.
    pub fn translated(&self, shift: &DVector<f64>) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| Component {
                weight: c.weight,
                center: &c.center + shift,
                time_offset: c.time_offset,
            })
            .collect();
        GaussianMixture {
            n: self.n,
            components,
        }
    }

    /// Half-width enclosing all component mass up to `sigmas` standard
    /// deviations at time `t`; used to truncate unbounded integrals.
    pub fn support_half_width(&self, t: f64, sigmas: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.center.amax() + sigmas * (2.0 * (t + c.time_offset)).sqrt())
            .fold(0.0, f64::max)
    }

    /// log u(x, t); valid for t >= 0 as long as every t + t_i > 0.
    pub fn log_u(&self, x: &[f64], t: f64) -> Result<f64> {
        self.check_time(t)?;
        let mut peak = f64::NEG_INFINITY;
        let mut logs = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let s = t + c.time_offset;
            let mut q2 = 0.0;
            for (xi, ci) in x.iter().zip(c.center.iter()) {
                let d = xi - ci;
                q2 += d * d;
            }
            let l = c.weight.ln()
                - 0.5 * self.n as f64 * (4.0 * std::f64::consts::PI * s).ln()
                - q2 / (4.0 * s);
            peak = peak.max(l);
            logs.push(l);
        }
        Ok(peak + logs.iter().map(|l| (l - peak).exp()).sum::<f64>().ln())
    }

    fn ratio_jet(&self, x: &[f64], t: f64) -> Result<RatioJet> {
        self.check_time(t)?;
        let n = self.n;
        let k = self.components.len();
        // per-component log weights, softmax-normalized against the peak
        let mut logs = Vec::with_capacity(k);
        let mut peak = f64::NEG_INFINITY;
        for c in &self.components {
            let s = t + c.time_offset;
            let mut q2 = 0.0;
            for (xi, ci) in x.iter().zip(c.center.iter()) {
                let d = xi - ci;
                q2 += d * d;
            }
            let l = c.weight.ln()
                - 0.5 * n as f64 * (4.0 * std::f64::consts::PI * s).ln()
                - q2 / (4.0 * s);
            peak = peak.max(l);
            logs.push(l);
        }
        let mut mass = 0.0;
        let mut probs = Vec::with_capacity(k);
        for &l in &logs {
            let p = (l - peak).exp();
            mass += p;
            probs.push(p);
        }
        for p in &mut probs {
            *p /= mass;
        }
        let log_u = peak + mass.ln();

        let mut jet = RatioJet {
            log_u,
            grad: DVector::zeros(n),
            hess: DMatrix::zeros(n, n),
            dt: 0.0,
            dtt: 0.0,
            dttt: 0.0,
            grad_dt: DVector::zeros(n),
            grad_dtt: DVector::zeros(n),
        };
        for (c, &p) in self.components.iter().zip(probs.iter()) {
            let s = t + c.time_offset;
            let mut d = DVector::zeros(n);
            for i in 0..n {
                d[i] = x[i] - c.center[i];
            }
            let q2 = d.norm_squared();
            let g = -&d / (2.0 * s);
            let a = q2 / (4.0 * s * s) - n as f64 / (2.0 * s);
            let a1 = -q2 / (2.0 * s * s * s) + n as f64 / (2.0 * s * s);
            let a2 = 1.5 * q2 / s.powi(4) - n as f64 / s.powi(3);
            jet.grad += p * &g;
            for i in 0..n {
                for j in 0..n {
                    jet.hess[(i, j)] += p
                        * (d[i] * d[j] / (4.0 * s * s)
                            - if i == j { 1.0 / (2.0 * s) } else { 0.0 });
                }
            }
            jet.dt += p * a;
            jet.dtt += p * (a * a + a1);
            jet.dttt += p * (a * a * a + 3.0 * a * a1 + a2);
            jet.grad_dt += p * (a - 1.0 / s) * &g;
            jet.grad_dtt += p * (a * a + a1 - 2.0 * a / s + 2.0 / (s * s)) * &g;
        }
        Ok(jet)
    }

    /// Exact derivative jet of u at (x, t).
    pub fn heat_jet(&self, x: &[f64], t: f64) -> Result<HeatJet> {
        let r = self.ratio_jet(x, t)?;
        let u = r.log_u.exp();
        Ok(HeatJet {
            u,
            grad_u: u * &r.grad,
            hess_u: u * &r.hess,
            u_t: u * r.dt,
            grad_u_t: u * &r.grad_dt,
            u_tt: u * r.dtt,
        })
    }

    /// Jet of f = -log u - (n/2) log t; requires t > 0.
    pub fn f_jet(&self, x: &[f64], t: f64) -> Result<FJet> {
        Ok(self.f_jet_ext(x, t)?.jet)
    }

    /// f-jet extended with f_ttt and ∇f_tt.
    pub fn f_jet_ext(&self, x: &[f64], t: f64) -> Result<FJetExt> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        let r = self.ratio_jet(x, t)?;
        let n = self.n as f64;
        let f = -r.log_u - 0.5 * n * t.ln();
        let grad_f = -&r.grad;
        let hess_f = -&r.hess + &r.grad * r.grad.transpose();
        let f_t = -r.dt - 0.5 * n / t;
        let f_tt = -r.dtt + r.dt * r.dt + 0.5 * n / (t * t);
        let grad_f_t = -&r.grad_dt + r.dt * &r.grad;
        let f_ttt = -r.dttt + 3.0 * r.dt * r.dtt - 2.0 * r.dt.powi(3) - n / t.powi(3);
        let grad_f_tt = -&r.grad_dtt + r.dtt * &r.grad + 2.0 * r.dt * (&r.grad_dt - r.dt * &r.grad);
        Ok(FJetExt {
            jet: FJet {
                f,
                grad_f,
                hess_f,
                f_t,
                f_tt,
                grad_f_t,
            },
            f_ttt,
            grad_f_tt,
        })
    }

    /// Parse the line-based mixture description format:
    /// a `n=<dim>` line followed by one `w c1 [c2 c3] t_offset` line per
    /// component. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::MixtureParse("empty mixture description".into()))?;
        let n: usize = header
            .strip_prefix("n=")
            .ok_or_else(|| Error::MixtureParse(format!("expected 'n=<dim>', got '{header}'")))?
            .trim()
            .parse()
            .map_err(|e| Error::MixtureParse(format!("bad dimension: {e}")))?;
        if !(1..=3).contains(&n) {
            return Err(Error::MixtureParse(format!(
                "dimension must be 1..=3, got {n}"
            )));
        }
        let mut components = Vec::new();
        for (idx, line) in lines.enumerate() {
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|e| Error::MixtureParse(format!("component {idx}: {e}")))
                })
                .collect::<Result<_>>()?;
            if fields.len() != n + 2 {
                return Err(Error::MixtureParse(format!(
                    "component {idx}: expected {} fields (w c1..c{n} t_offset), got {}",
                    n + 2,
                    fields.len()
                )));
            }
            components.push(Component {
                weight: fields[0],
                center: DVector::from_row_slice(&fields[1..=n]),
                time_offset: fields[n + 1],
            });
        }
        GaussianMixture::new(n, components).map_err(|e| match e {
            Error::Domain(msg) => Error::MixtureParse(msg),
            other => other,
        })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        GaussianMixture::parse(&text)
    }
}

struct RatioJet {
    log_u: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
    dt: f64,
    dtt: f64,
    dttt: f64,
    grad_dt: DVector<f64>,
    grad_dtt: DVector<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_box, QuadratureSpec};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn twin(n_dim: usize, sep: f64, offset: f64) -> GaussianMixture {
        let mut c1 = DVector::zeros(n_dim);
        let mut c2 = DVector::zeros(n_dim);
        c1[0] = -sep;
        c2[0] = sep;
        GaussianMixture::new(
            n_dim,
            vec![
                Component {
                    weight: 0.5,
                    center: c1,
                    time_offset: offset,
                },
                Component {
                    weight: 0.5,
                    center: c2,
                    time_offset: offset,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn standard_kernel_normalization_point() {
        let mix = GaussianMixture::standard_kernel(1);
        let t = 1.0 / (4.0 * std::f64::consts::PI);
        let jet = mix.heat_jet(&[0.0], t).unwrap();
        assert!((jet.u - 1.0).abs() < 1e-14);
        assert_eq!(jet.grad_u[0], 0.0);
    }

    #[test]
    fn heat_equation_holds_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n_dim in 1..=3usize {
            let mix = twin(n_dim, 1.0, 0.0);
            for _ in 0..350 {
                let x: Vec<f64> = (0..n_dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let t = rng.gen_range(0.2..5.0);
                let jet = mix.heat_jet(&x, t).unwrap();
                let lap = jet.hess_u.trace();
                let scale = jet.u_t.abs().max(lap.abs()).max(1e-300);
                assert!(
                    (jet.u_t - lap).abs() <= 1e-12 * scale,
                    "n={n_dim} x={x:?} t={t}"
                );
            }
        }
    }

    #[test]
    fn kernel_f_is_explicit() {
        let mix = GaussianMixture::standard_kernel(1);
        for &(x, t) in &[(0.0, 1.0), (1.3, 0.4), (-2.0, 2.5)] {
            let jet = mix.f_jet(&[x], t).unwrap();
            let expect = x * x / (4.0 * t) + 0.5 * (4.0 * std::f64::consts::PI).ln();
            assert!((jet.f - expect).abs() < 1e-12);
            assert!((jet.hess_f[(0, 0)] - 1.0 / (2.0 * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn f_jet_matches_finite_differences() {
        let mix = twin(1, 1.0, 0.1);
        let x = [0.37];
        let t = 0.9;
        let h = 1e-4;
        let f = |x: f64, t: f64| -mix.log_u(&[x], t).unwrap() - 0.5 * t.ln();
        let jet = mix.f_jet(&x, t).unwrap();

        let fd_grad = (f(x[0] + h, t) - f(x[0] - h, t)) / (2.0 * h);
        let fd_hess = (f(x[0] + h, t) - 2.0 * f(x[0], t) + f(x[0] - h, t)) / (h * h);
        let fd_ft = (f(x[0], t + h) - f(x[0], t - h)) / (2.0 * h);
        let fd_ftt = (f(x[0], t + h) - 2.0 * f(x[0], t) + f(x[0], t - h)) / (h * h);
        let fd_grad_t = (f(x[0] + h, t + h) - f(x[0] - h, t + h) - f(x[0] + h, t - h)
            + f(x[0] - h, t - h))
            / (4.0 * h * h);

        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        assert!(rel(fd_grad, jet.grad_f[0]) < 1e-6);
        assert!(rel(fd_hess, jet.hess_f[(0, 0)]) < 1e-6);
        assert!(rel(fd_ft, jet.f_t) < 1e-6);
        assert!(rel(fd_ftt, jet.f_tt) < 1e-5);
        assert!(rel(fd_grad_t, jet.grad_f_t[0]) < 1e-5);
    }

    #[test]
    fn extended_jet_matches_finite_differences_of_lower_jet() {
        let mix = twin(1, 1.0, 0.1);
        let x = [0.61];
        let t = 1.1;
        let h = 1e-4;
        let ext = mix.f_jet_ext(&x, t).unwrap();
        let fd_fttt =
            (mix.f_jet(&x, t + h).unwrap().f_tt - mix.f_jet(&x, t - h).unwrap().f_tt) / (2.0 * h);
        assert!((fd_fttt - ext.f_ttt).abs() < 1e-5 * ext.f_ttt.abs().max(1.0));
        let fd_gtt = (mix.f_jet(&x, t + h).unwrap().grad_f_t[0]
            - mix.f_jet(&x, t - h).unwrap().grad_f_t[0])
            / (2.0 * h);
        assert!((fd_gtt - ext.grad_f_tt[0]).abs() < 1e-5 * ext.grad_f_tt[0].abs().max(1.0));
    }

    #[test]
    fn mass_is_conserved() {
        let spec = QuadratureSpec::default();
        let mix = twin(1, 2.0, 0.1);
        for &t in &[0.1, 1.0, 10.0] {
            let hw = mix.support_half_width(t, spec.truncation_sigmas);
            let total = integrate_box(|x| mix.log_u(x, t).unwrap().exp(), &[0.0], &[hw], &spec)
                .unwrap()
                .value;
            assert!((total - 1.0).abs() < 1e-9, "t={t}: {total}");
        }
    }

    #[test]
    fn translation_equivariance() {
        let mix = twin(2, 1.5, 0.2);
        let shift = DVector::from_row_slice(&[0.7, -0.3]);
        let moved = mix.translated(&shift);
        let x = [0.4, 1.1];
        let xs = [0.4 + 0.7, 1.1 - 0.3];
        let t = 0.8;
        let a = mix.f_jet(&x, t).unwrap();
        let b = moved.f_jet(&xs, t).unwrap();
        assert!((a.f - b.f).abs() < 1e-13 * a.f.abs().max(1.0));
        assert!((a.grad_f - b.grad_f).norm() < 1e-12);
        assert!((a.f_tt - b.f_tt).abs() < 1e-12 * a.f_tt.abs().max(1.0));
    }

    #[test]
    fn log_domain_survives_far_components() {
        let mix = twin(1, 40.0, 0.0);
        let lu = mix.log_u(&[40.0], 0.1).unwrap();
        // dominated by the nearby component at half weight
        let expect = 0.5f64.ln() - 0.5 * (4.0 * std::f64::consts::PI * 0.1).ln();
        assert!((lu - expect).abs() < 1e-9, "{lu} vs {expect}");
        let jet = mix.f_jet(&[40.0], 0.1).unwrap();
        assert!(jet.f.is_finite() && jet.hess_f[(0, 0)].is_finite());
    }

    #[test]
    fn zero_time_rules() {
        let with_zero = twin(1, 1.0, 0.0);
        assert!(!with_zero.smooth_at_zero());
        assert!(with_zero.log_u(&[0.0], 0.0).is_err());
        let smooth = twin(1, 1.0, 0.5);
        assert!(smooth.smooth_at_zero());
        assert!(smooth.log_u(&[0.0], 0.0).is_ok());
        assert!(smooth.f_jet(&[0.0], 0.0).is_err());
    }

    #[test]
    fn parser_roundtrip_and_rejections() {
        let text = "# two off-center kernels\nn=1\n0.5 -1.0 0.25\n0.5 1.0 0.25\n";
        let mix = GaussianMixture::parse(text).unwrap();
        assert_eq!(mix.dim(), 1);
        assert_eq!(mix.components().len(), 2);
        assert_eq!(mix.components()[0].center[0], -1.0);

        let bad_sum = "n=1\n0.5 -1.0 0.25\n0.4 1.0 0.25\n";
        assert!(matches!(
            GaussianMixture::parse(bad_sum),
            Err(Error::MixtureParse(_))
        ));
        let bad_fields = "n=2\n1.0 0.0 0.25\n";
        assert!(matches!(
            GaussianMixture::parse(bad_fields),
            Err(Error::MixtureParse(_))
        ));
    }
}
