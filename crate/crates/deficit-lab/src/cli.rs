//! Batch experiment runner: binds every module into reproducible CSV
//! artifacts plus a pass/fail summary, behind the `deficit-lab` binary.
//!
//! Config files are line-based `key=value` with comma-separated lists.
//! Output is RFC-4180-style CSV with '.' decimals, 17 significant digits,
//! and a leading '#' comment row documenting the columns. Rows are sorted
//! deterministically before writing, so identical config + seed reruns are
//! byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{sample_points, standard_corpus, CorpusEntry};
use crate::entropy::{
    entropy_report, monotonicity_grid, poincare_projection_gap, rescaled_density_gap,
    w_derivative_check,
};
use crate::error::{Error, Result};
use crate::heat_model::GaussianMixture;
use crate::lift::{deficit_gap, dfct_residual, key_residuals, lift_eval, LiftPoint};
use crate::parabolic::{box_d0_residual, parabolic_eval};
use crate::slicing::{
    elliptic_limit_target, exact_anchor_gap, log_total_mass, log_total_mass_exact_sigma,
    radial_first_moment, radial_profile_integral, slice_geometry, slice_weight, sliced_average,
    MassMode,
};
use crate::special::{half_power_decay, omega_ratio};
use crate::sweep::{fit_rate_with_floor, RateFit};

/// Acceptance thresholds, shared between the runner and the acceptance
/// test suite so there is a single source of truth.
pub mod thresholds {
    /// 1a: relative heat residual |u_t - Δu|.
    pub const HEAT_RESID: f64 = 1e-12;
    /// 1b: Box D0 identity residual at step 1e-3.
    pub const BOX_RESID: f64 = 1e-4;
    pub const BOX_STEP: f64 = 1e-3;
    /// 1c: drift-identity residual at N in {10, 40, 120}.
    pub const DFCT_RESID: f64 = 1e-4;
    pub const DFCT_STEP: f64 = 1e-3;
    /// 1d: |∫D0 u - (W - n)|.
    pub const LOGSOB_IDENTITY: f64 = 1e-8;
    /// 2: |d0 - 4 D0| log-log slope band.
    pub const D0_GAP_SLOPE_BAND: (f64, f64) = (-1.1, -0.9);
    /// 2: key residual slope ceiling.
    pub const KEY_SLOPE_MAX: f64 = -0.85;
    /// 2: bound on N·|B²/(16τ²) - |F|²| (values logged).
    pub const B_VS_F_SCALED_MAX: f64 = 1e3;
    /// 3: kernel equality anchors.
    pub const KERNEL_D0_CONST: f64 = 1e-12;
    pub const KERNEL_W: f64 = 1e-9;
    pub const KERNEL_L1: f64 = 1e-12;
    /// 4: slice weight endpoint vanishing.
    pub const H_ENDPOINT: f64 = 1e-12;
    /// 4: μ quadrature-vs-asymptotic slope band.
    pub const MU_SLOPE_BAND: (f64, f64) = (-1.15, -0.85);
    /// 4: μ quadrature vs the exact σ-route (pure quadrature error).
    pub const MU_EXACT_AGREEMENT: f64 = 1e-7;
    /// 4: exact anchor R^{m-2} v(z̄) = τ^{n/2} u(0,τ).
    pub const ANCHOR_GAP: f64 = 1e-12;
    /// 5: W monotonicity slack and log-Sobolev positivity slack.
    pub const W_MONOTONE_SLACK: f64 = 1e-8;
    pub const LOGSOB_POSITIVITY: f64 = -1e-8;
    /// 5: Poincaré projection sup-gap slope band.
    pub const PROJECTION_SLOPE_BAND: (f64, f64) = (-1.1, -0.9);
    /// 5: Stirling ratio checks.
    pub const OMEGA_N2_REL: f64 = 1e-12;
    pub const OMEGA_SLOPE_BAND: (f64, f64) = (-1.05, -0.95);
}

const IDENTITY_SAMPLES: usize = 20;
const RATE_SAMPLES: usize = 5;
const DFCT_SAMPLES: usize = 5;
const DFCT_N_LIST: [u32; 3] = [10, 40, 120];
const KEY_N_LIST: [u32; 3] = [1_000, 10_000, 100_000];
const SLICING_N_LIST: [u32; 3] = [100, 1_000, 10_000];
const ANCHOR_N_LIST: [u32; 3] = [10, 1_000, 1_000_000];
const PROJECTION_N_LIST: [u32; 4] = [100, 1_000, 10_000, 100_000];
const OMEGA_N_LIST: [u32; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];
const TAYLOR_SAMPLES: usize = 10_000;

/// Which verification suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Identities,
    LimitRates,
    Slicing,
    Entropy,
    Projection,
    All,
}

impl Experiment {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "identities" => Ok(Experiment::Identities),
            "limit-rates" => Ok(Experiment::LimitRates),
            "slicing" => Ok(Experiment::Slicing),
            "entropy" => Ok(Experiment::Entropy),
            "projection" => Ok(Experiment::Projection),
            "all" => Ok(Experiment::All),
            other => Err(Error::ConfigParse(format!(
                "unknown experiment '{other}' (expected identities|limit-rates|slicing|entropy|projection|all)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Identities => "identities",
            Experiment::LimitRates => "limit-rates",
            Experiment::Slicing => "slicing",
            Experiment::Entropy => "entropy",
            Experiment::Projection => "projection",
            Experiment::All => "all",
        }
    }
}

/// Runner configuration; see [`ExperimentConfig::parse`].
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Mixture description files; empty means the built-in corpus.
    pub mixture_files: Vec<PathBuf>,
    pub n: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    /// N sweep for the limit-rate suite.
    pub n_list: Vec<u32>,
    /// β sweep for the slicing suite.
    pub beta_list: Vec<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::All,
            mixture_files: Vec::new(),
            n: 1,
            tau_min: 0.5,
            tau_max: 2.0,
            n_list: vec![1_000, 10_000, 100_000, 1_000_000],
            beta_list: vec![0.9, 0.95, 0.99],
            seed: 42,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Parse the line-based `key=value` format; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::ConfigParse(format!(
                    "line {}: expected key=value, got '{line}'",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |e: String| Error::ConfigParse(format!("line {}: {e}", lineno + 1));
            match key {
                "experiment" => cfg.experiment = Experiment::parse(value)?,
                "mixture_file" => {
                    cfg.mixture_files = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(PathBuf::from)
                        .collect();
                }
                "n" => cfg.n = value.parse().map_err(|e| bad(format!("n: {e}")))?,
                "tau_min" => {
                    cfg.tau_min = value.parse().map_err(|e| bad(format!("tau_min: {e}")))?
                }
                "tau_max" => {
                    cfg.tau_max = value.parse().map_err(|e| bad(format!("tau_max: {e}")))?
                }
                "N_list" => {
                    cfg.n_list = value
                        .split(',')
                        .map(|s| s.trim().parse().map_err(|e| bad(format!("N_list: {e}"))))
                        .collect::<Result<_>>()?;
                }
                "beta_list" => {
                    cfg.beta_list = value
                        .split(',')
                        .map(|s| s.trim().parse().map_err(|e| bad(format!("beta_list: {e}"))))
                        .collect::<Result<_>>()?;
                }
                "seed" => cfg.seed = value.parse().map_err(|e| bad(format!("seed: {e}")))?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                other => return Err(bad(format!("unknown key '{other}'"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_min > 0.0) || !(self.tau_max > self.tau_min) {
            return Err(Error::ConfigParse(format!(
                "need 0 < tau_min < tau_max, got [{}, {}]",
                self.tau_min, self.tau_max
            )));
        }
        if !(1..=3).contains(&self.n) {
            return Err(Error::ConfigParse(format!(
                "n must be 1..=3, got {}",
                self.n
            )));
        }
        if self.n_list.iter().any(|&n| n < 7) {
            return Err(Error::ConfigParse("N_list entries must be >= 7".into()));
        }
        if self.n_list.len() < 3 {
            return Err(Error::ConfigParse("N_list needs at least 3 entries".into()));
        }
        if self.beta_list.iter().any(|&b| !(0.0 < b && b < 1.0)) {
            return Err(Error::ConfigParse(
                "beta_list entries must lie in (0,1)".into(),
            ));
        }
        Ok(())
    }

    fn load_corpus(&self) -> Result<Vec<CorpusEntry>> {
        if self.mixture_files.is_empty() {
            return Ok(standard_corpus());
        }
        self.mixture_files
            .iter()
            .map(|path| {
                let mixture = GaussianMixture::from_file(path)?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                Ok(CorpusEntry { name, mixture })
            })
            .collect()
    }
}

/// One measured value in a data CSV.
#[derive(Debug, Clone)]
pub struct DataRow {
    pub mixture: String,
    pub point: Option<usize>,
    pub x: Vec<f64>,
    pub t: Option<f64>,
    pub big_n: Option<u32>,
    pub beta: Option<f64>,
    pub quantity: String,
    pub value: f64,
}

impl DataRow {
    fn sort_key(&self) -> (String, String, u64, u64, u64, u64) {
        (
            self.quantity.clone(),
            self.mixture.clone(),
            self.point.map_or(0, |p| p as u64 + 1),
            self.big_n.map_or(0, |n| n as u64 + 1),
            self.beta.map_or(0, |b| b.to_bits()),
            self.t.map_or(0, |t| t.to_bits()),
        )
    }
}

/// One pass/fail line in the summary CSV.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub experiment: &'static str,
    pub check: String,
    pub detail: String,
    pub value: f64,
    pub threshold: String,
    pub passed: bool,
}

/// Everything a run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub checks: Vec<CheckRow>,
    pub data_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
}

impl RunSummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&CheckRow> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn fmt_float(v: f64) -> String {
    // 17 significant digits, enough to round-trip any f64
    format!("{v:.16e}")
}

/// RFC-4180 quoting for string fields containing separators or quotes.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_data_csv(path: &Path, rows: &mut [DataRow]) -> Result<()> {
    rows.sort_by_key(|r| r.sort_key());
    let mut out = String::new();
    out.push_str("# columns: mixture,point,x1,x2,x3,t,N,beta,quantity,value\n");
    out.push_str("mixture,point,x1,x2,x3,t,N,beta,quantity,value\n");
    for r in rows.iter() {
        let xs: Vec<String> = (0..3)
            .map(|i| r.x.get(i).map(|v| fmt_float(*v)).unwrap_or_default())
            .collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.mixture),
            r.point.map(|p| p.to_string()).unwrap_or_default(),
            xs[0],
            xs[1],
            xs[2],
            r.t.map(fmt_float).unwrap_or_default(),
            r.big_n.map(|n| n.to_string()).unwrap_or_default(),
            r.beta.map(fmt_float).unwrap_or_default(),
            csv_field(&r.quantity),
            fmt_float(r.value)
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_summary_csv(path: &Path, checks: &[CheckRow]) -> Result<()> {
    let mut out = String::new();
    out.push_str("# columns: experiment,check,detail,value,threshold,status\n");
    out.push_str("experiment,check,detail,value,threshold,status\n");
    for c in checks {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            c.experiment,
            csv_field(&c.check),
            csv_field(&c.detail),
            fmt_float(c.value),
            csv_field(&c.threshold),
            if c.passed { "PASS" } else { "FAIL" }
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn slope_check(
    experiment: &'static str,
    check: &str,
    detail: &str,
    fit: &RateFit,
    band: (f64, f64),
) -> CheckRow {
    CheckRow {
        experiment,
        check: check.into(),
        detail: detail.into(),
        value: fit.slope,
        threshold: format!("slope in [{}, {}]", band.0, band.1),
        passed: (band.0..=band.1).contains(&fit.slope),
    }
}

fn max_check(
    experiment: &'static str,
    check: &str,
    detail: &str,
    value: f64,
    max: f64,
) -> CheckRow {
    CheckRow {
        experiment,
        check: check.into(),
        detail: detail.into(),
        value,
        threshold: format!("<= {max:e}"),
        passed: value <= max,
    }
}

// ---------------------------------------------------------------------------
// identities
// ---------------------------------------------------------------------------

pub fn run_identities(cfg: &ExperimentConfig) -> Result<(Vec<DataRow>, Vec<CheckRow>)> {
    let corpus = cfg.load_corpus()?;
    let mut rows = Vec::new();
    let mut heat_max: f64 = 0.0;
    let mut box_max: f64 = 0.0;
    let mut box_c_max: f64 = 0.0;
    let mut dfct_max: f64 = 0.0;
    let mut logsob_max: f64 = 0.0;
    let mut kernel_d0_max: f64 = 0.0;

    for entry in &corpus {
        let mix = &entry.mixture;
        let pts = sample_points(mix, IDENTITY_SAMPLES, cfg.tau_min, cfg.tau_max, cfg.seed);
        let kernel_expect = 0.5 * mix.dim() as f64 * (4.0 * std::f64::consts::PI).ln();
        for (k, (x, t)) in pts.iter().enumerate() {
            let jet = mix.heat_jet(x, *t)?;
            let lap = jet.hess_u.trace();
            let heat = (jet.u_t - lap).abs() / jet.u_t.abs().max(lap.abs()).max(1e-300);
            heat_max = heat_max.max(heat);
            rows.push(DataRow {
                mixture: entry.name.clone(),
                point: Some(k),
                x: x.clone(),
                t: Some(*t),
                big_n: None,
                beta: None,
                quantity: "heat_resid_rel".into(),
                value: heat,
            });

            let (scalar, weighted) = box_d0_residual(mix, x, *t, thresholds::BOX_STEP)?;
            box_max = box_max.max(scalar.abs());
            box_c_max = box_c_max.max(scalar.abs() / (thresholds::BOX_STEP * thresholds::BOX_STEP));
            for (q, v) in [
                ("box_scalar_resid", scalar),
                ("box_weighted_resid", weighted),
            ] {
                rows.push(DataRow {
                    mixture: entry.name.clone(),
                    point: Some(k),
                    x: x.clone(),
                    t: Some(*t),
                    big_n: None,
                    beta: None,
                    quantity: q.into(),
                    value: v,
                });
            }

            if entry.name == "kernel" {
                let pe = parabolic_eval(mix, x, *t)?;
                let gap = (pe.d0 - kernel_expect).abs();
                kernel_d0_max = kernel_d0_max.max(gap);
                rows.push(DataRow {
                    mixture: entry.name.clone(),
                    point: Some(k),
                    x: x.clone(),
                    t: Some(*t),
                    big_n: None,
                    beta: None,
                    quantity: "kernel_d0_const_gap".into(),
                    value: gap,
                });
            }

            if k < DFCT_SAMPLES {
                for &big_n in &DFCT_N_LIST {
                    let p = LiftPoint::from_tau(x.clone(), *t, big_n)?;
                    let res = dfct_residual(mix, &p, thresholds::DFCT_STEP)?;
                    dfct_max = dfct_max.max(res.abs());
                    rows.push(DataRow {
                        mixture: entry.name.clone(),
                        point: Some(k),
                        x: x.clone(),
                        t: Some(*t),
                        big_n: Some(big_n),
                        beta: None,
                        quantity: "dfct_resid".into(),
                        value: res,
                    });
                }
            }
        }

        for &t in &[0.5, 1.0, 2.0] {
            let rep = entropy_report(mix, t)?;
            let gap = (rep.d0_avg - (rep.w - mix.dim() as f64)).abs();
            logsob_max = logsob_max.max(gap);
            rows.push(DataRow {
                mixture: entry.name.clone(),
                point: None,
                x: Vec::new(),
                t: Some(t),
                big_n: None,
                beta: None,
                quantity: "logsob_identity_gap".into(),
                value: gap,
            });
        }
    }

    let checks = vec![
        max_check(
            "identities",
            "heat_resid_rel_max",
            "corpus x 20 points",
            heat_max,
            thresholds::HEAT_RESID,
        ),
        max_check(
            "identities",
            "box_scalar_resid_max",
            &format!("step {}", thresholds::BOX_STEP),
            box_max,
            thresholds::BOX_RESID,
        ),
        CheckRow {
            experiment: "identities",
            check: "box_resid_constant".into(),
            detail: "max |residual|/step^2 (logged)".into(),
            value: box_c_max,
            threshold: "logged".into(),
            passed: box_c_max.is_finite(),
        },
        max_check(
            "identities",
            "dfct_resid_max",
            "N in {10,40,120}",
            dfct_max,
            thresholds::DFCT_RESID,
        ),
        max_check(
            "identities",
            "logsob_identity_max",
            "|int D0 u - (W - n)|",
            logsob_max,
            thresholds::LOGSOB_IDENTITY,
        ),
        max_check(
            "identities",
            "kernel_d0_const_max",
            "|D0 - (n/2) log 4pi| on the kernel",
            kernel_d0_max,
            thresholds::KERNEL_D0_CONST,
        ),
    ];
    Ok((rows, checks))
}

// ---------------------------------------------------------------------------
// limit-rates
// ---------------------------------------------------------------------------

pub fn run_limit_rates(cfg: &ExperimentConfig) -> Result<(Vec<DataRow>, Vec<CheckRow>)> {
    let corpus = cfg.load_corpus()?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();

    for entry in &corpus {
        let mix = &entry.mixture;
        let pts = sample_points(
            mix,
            RATE_SAMPLES,
            cfg.tau_min,
            cfg.tau_max,
            cfg.seed ^ 0x5eed,
        );
        for (k, (x, tau)) in pts.iter().enumerate() {
            // d0 - 4 D0 over the configured N list
            let mut gap_pts = Vec::new();
            for &big_n in &cfg.n_list {
                let gap = deficit_gap(mix, x, *tau, big_n)?;
                gap_pts.push((big_n as f64, gap.abs()));
                rows.push(DataRow {
                    mixture: entry.name.clone(),
                    point: Some(k),
                    x: x.clone(),
                    t: Some(*tau),
                    big_n: Some(big_n),
                    beta: None,
                    quantity: "d0_gap".into(),
                    value: gap,
                });
            }
            let fit = fit_rate_with_floor(&gap_pts, 1e-13)?;
            checks.push(slope_check(
                "limit-rates",
                "d0_gap_slope",
                &format!("{} point {k}", entry.name),
                &fit,
                thresholds::D0_GAP_SLOPE_BAND,
            ));

            // key residuals over the FD-safe list
            let mut k1_pts = Vec::new();
            let mut k3_pts = Vec::new();
            for &big_n in &KEY_N_LIST {
                let p = LiftPoint::from_tau(x.clone(), *tau, big_n)?;
                let (k1, k3) = key_residuals(mix, &p, thresholds::DFCT_STEP)?;
                k1_pts.push((big_n as f64, k1.abs()));
                k3_pts.push((big_n as f64, k3.abs()));
                for (q, v) in [("key1_resid", k1), ("key3_resid", k3)] {
                    rows.push(DataRow {
                        mixture: entry.name.clone(),
                        point: Some(k),
                        x: x.clone(),
                        t: Some(*tau),
                        big_n: Some(big_n),
                        beta: None,
                        quantity: q.into(),
                        value: v,
                    });
                }
            }
            for (name, pts) in [("key1_slope", &k1_pts), ("key3_slope", &k3_pts)] {
                let fit = fit_rate_with_floor(pts, 1e-13)?;
                checks.push(CheckRow {
                    experiment: "limit-rates",
                    check: name.into(),
                    detail: format!("{} point {k}", entry.name),
                    value: fit.slope,
                    threshold: format!("<= {}", thresholds::KEY_SLOPE_MAX),
                    passed: fit.slope <= thresholds::KEY_SLOPE_MAX,
                });
            }

            // N-scaled |B|²-vs-|F|² gap, bounded per the Hessian asymptotics
            let pe = parabolic_eval(mix, x, *tau)?;
            let mut scaled_max: f64 = 0.0;
            for &big_n in &cfg.n_list {
                let p = LiftPoint::from_tau(x.clone(), *tau, big_n)?;
                let le = lift_eval(mix, &p)?;
                let scaled =
                    big_n as f64 * (le.b_norm2_exact / (16.0 * tau * tau) - pe.f_norm2).abs();
                scaled_max = scaled_max.max(scaled);
                rows.push(DataRow {
                    mixture: entry.name.clone(),
                    point: Some(k),
                    x: x.clone(),
                    t: Some(*tau),
                    big_n: Some(big_n),
                    beta: None,
                    quantity: "b_vs_f_scaled_gap".into(),
                    value: scaled,
                });
            }
            checks.push(max_check(
                "limit-rates",
                "b_vs_f_scaled_bounded",
                &format!("{} point {k}: N*|B^2/(16 tau^2)-F^2|", entry.name),
                scaled_max,
                thresholds::B_VS_F_SCALED_MAX,
            ));
        }
    }

    // kernel anchor: d0 -> 2n log 4π at the origin with slope -1
    let kernel = GaussianMixture::standard_kernel(cfg.n);
    let target = 2.0 * cfg.n as f64 * (4.0 * std::f64::consts::PI).ln();
    let zero = vec![0.0; cfg.n];
    let mut gap_pts = Vec::new();
    for &big_n in &cfg.n_list {
        let p = LiftPoint::from_tau(zero.clone(), 1.0, big_n)?;
        let le = lift_eval(&kernel, &p)?;
        let gap = (le.d0 - target).abs();
        gap_pts.push((big_n as f64, gap));
        rows.push(DataRow {
            mixture: "kernel".into(),
            point: None,
            x: zero.clone(),
            t: Some(1.0),
            big_n: Some(big_n),
            beta: None,
            quantity: "kernel_d0_limit_gap".into(),
            value: gap,
        });
    }
    let fit = fit_rate_with_floor(&gap_pts, 1e-13)?;
    checks.push(slope_check(
        "limit-rates",
        "kernel_d0_limit_slope",
        "d0 -> 2n log 4pi at the origin",
        &fit,
        thresholds::D0_GAP_SLOPE_BAND,
    ));

    Ok((rows, checks))
}

// ---------------------------------------------------------------------------
// slicing
// ---------------------------------------------------------------------------

pub fn run_slicing(cfg: &ExperimentConfig) -> Result<(Vec<DataRow>, Vec<CheckRow>)> {
    let corpus: Vec<CorpusEntry> = cfg
        .load_corpus()?
        .into_iter()
        .filter(|e| e.mixture.smooth_at_zero())
        .collect();
    if corpus.is_empty() {
        return Err(Error::domain(
            "slicing needs at least one mixture with all time offsets positive",
        ));
    }
    let tau = 1.0f64.clamp(cfg.tau_min, cfg.tau_max);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut h_max: f64 = 0.0;
    let mut anchor_max: f64 = 0.0;
    let mut mu_exact_max: f64 = 0.0;

    // mixture-independent: h endpoints, μ modes, the first-moment functional
    for &big_n in &SLICING_N_LIST {
        for &beta in &cfg.beta_list {
            let geom = slice_geometry(cfg.n, big_n, tau, beta, &vec![0.3; cfg.n])?;
            let (lo, hi) = geom.interval();
            for (q, r) in [("h_at_left_end", lo), ("h_at_right_end", hi)] {
                let h = slice_weight(&geom, r)?;
                h_max = h_max.max(h);
                rows.push(DataRow {
                    mixture: String::new(),
                    point: None,
                    x: vec![0.3],
                    t: Some(tau),
                    big_n: Some(big_n),
                    beta: Some(beta),
                    quantity: q.into(),
                    value: h,
                });
            }
        }
    }

    let mu_beta = 0.9;
    let mut mu_pts = Vec::new();
    for &big_n in &SLICING_N_LIST {
        let geom = slice_geometry(cfg.n, big_n, tau, mu_beta, &vec![0.0; cfg.n])?;
        let lq = log_total_mass(&geom, MassMode::Quadrature)?;
        let la = log_total_mass(&geom, MassMode::Asymptotic)?;
        let lx = log_total_mass_exact_sigma(&geom)?;
        let gap = (lq - la).exp_m1().abs();
        let exact_gap = (lq - lx).exp_m1().abs();
        mu_exact_max = mu_exact_max.max(exact_gap);
        mu_pts.push((big_n as f64, gap));
        for (q, v) in [
            ("mu_rel_gap_quad_vs_asym", gap),
            ("mu_rel_gap_quad_vs_exact", exact_gap),
        ] {
            rows.push(DataRow {
                mixture: String::new(),
                point: None,
                x: vec![0.0],
                t: Some(tau),
                big_n: Some(big_n),
                beta: Some(mu_beta),
                quantity: q.into(),
                value: v,
            });
        }
    }
    let fit = fit_rate_with_floor(&mu_pts, 1e-15)?;
    checks.push(slope_check(
        "slicing",
        "mu_gap_slope",
        &format!("beta {mu_beta}, x 0"),
        &fit,
        thresholds::MU_SLOPE_BAND,
    ));
    checks.push(max_check(
        "slicing",
        "mu_quad_vs_exact_route",
        "triple agreement at quadrature tolerance",
        mu_exact_max,
        thresholds::MU_EXACT_AGREEMENT,
    ));

    // the concentration majorant J(N, β) decreases as β -> 1 at fixed N
    let j_n = *SLICING_N_LIST.last().unwrap();
    let mut j_prev = f64::INFINITY;
    let mut j_monotone = true;
    for &beta in &cfg.beta_list {
        let j = radial_first_moment(cfg.n, j_n, tau, beta)?;
        j_monotone &= j < j_prev;
        j_prev = j;
        rows.push(DataRow {
            mixture: String::new(),
            point: None,
            x: Vec::new(),
            t: Some(tau),
            big_n: Some(j_n),
            beta: Some(beta),
            quantity: "first_moment_functional".into(),
            value: j,
        });
    }
    checks.push(CheckRow {
        experiment: "slicing",
        check: "first_moment_beta_monotone".into(),
        detail: format!("J(N={j_n}, beta) decreasing over beta sweep"),
        value: j_prev,
        threshold: "strictly decreasing in beta".into(),
        passed: j_monotone,
    });

    for entry in &corpus {
        let mix = &entry.mixture;
        let target = elliptic_limit_target(mix, tau)?;
        rows.push(DataRow {
            mixture: entry.name.clone(),
            point: None,
            x: Vec::new(),
            t: Some(tau),
            big_n: None,
            beta: None,
            quantity: "elliptic_target".into(),
            value: target.closed_form,
        });

        for &big_n in &ANCHOR_N_LIST {
            let gap = exact_anchor_gap(mix, tau, big_n)?;
            anchor_max = anchor_max.max(gap);
            rows.push(DataRow {
                mixture: entry.name.clone(),
                point: None,
                x: Vec::new(),
                t: Some(tau),
                big_n: Some(big_n),
                beta: None,
                quantity: "exact_anchor_gap".into(),
                value: gap,
            });
        }

        // concentration profile gap at the largest β
        let beta_hi = cfg
            .beta_list
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        for &big_n in &SLICING_N_LIST {
            let geom = slice_geometry(cfg.n, big_n, tau, beta_hi, &vec![0.3; cfg.n])?;
            let (_, gap) = radial_profile_integral(&geom, mix)?;
            rows.push(DataRow {
                mixture: entry.name.clone(),
                point: None,
                x: vec![0.3],
                t: Some(tau),
                big_n: Some(big_n),
                beta: Some(beta_hi),
                quantity: "concentration_gap".into(),
                value: gap,
            });
        }

        // sliced average: N sweep at the largest β must close on the anchor
        let mut prev = f64::INFINITY;
        let mut monotone = true;
        let mut gap_pts = Vec::new();
        for &big_n in &SLICING_N_LIST {
            let v = sliced_average(mix, big_n, tau, beta_hi)?;
            let gap = (v - target.closed_form).abs() / target.closed_form;
            monotone &= gap < prev;
            prev = gap;
            gap_pts.push((big_n as f64, gap));
            rows.push(DataRow {
                mixture: entry.name.clone(),
                point: None,
                x: Vec::new(),
                t: Some(tau),
                big_n: Some(big_n),
                beta: Some(beta_hi),
                quantity: "sliced_average_gap".into(),
                value: gap,
            });
        }
        checks.push(CheckRow {
            experiment: "slicing",
            check: "sliced_average_n_monotone".into(),
            detail: format!("{} at beta {beta_hi}", entry.name),
            value: prev,
            threshold: "gap strictly decreasing in N".into(),
            passed: monotone,
        });
        // the mean-value correction is O(N^{-1}) relative to the anchor
        let fit = fit_rate_with_floor(&gap_pts, 1e-15)?;
        checks.push(slope_check(
            "slicing",
            "sliced_average_gap_slope",
            &format!("{} at beta {beta_hi}", entry.name),
            &fit,
            (-1.2, -0.8),
        ));

        // β sweep at the largest N: direction recorded, magnitude O(1/N)
        let n_hi = *SLICING_N_LIST.last().unwrap();
        for &beta in &cfg.beta_list {
            if beta == beta_hi {
                continue; // already measured in the N sweep
            }
            let v = sliced_average(mix, n_hi, tau, beta)?;
            let gap = (v - target.closed_form).abs() / target.closed_form;
            rows.push(DataRow {
                mixture: entry.name.clone(),
                point: None,
                x: Vec::new(),
                t: Some(tau),
                big_n: Some(n_hi),
                beta: Some(beta),
                quantity: "sliced_average_gap".into(),
                value: gap,
            });
        }
    }

    checks.push(max_check(
        "slicing",
        "h_endpoint_max",
        "slice weight at both interval ends",
        h_max,
        thresholds::H_ENDPOINT,
    ));
    checks.push(max_check(
        "slicing",
        "exact_anchor_max",
        "R^{m-2} v(z) vs tau^{n/2} u(0,tau), N in {10,1e3,1e6}",
        anchor_max,
        thresholds::ANCHOR_GAP,
    ));
    Ok((rows, checks))
}

// ---------------------------------------------------------------------------
// entropy
// ---------------------------------------------------------------------------

pub fn run_entropy(cfg: &ExperimentConfig) -> Result<(Vec<DataRow>, Vec<CheckRow>)> {
    let corpus = cfg.load_corpus()?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let grid = monotonicity_grid(8);
    let mut deficit_min = f64::INFINITY;
    let mut identity_max: f64 = 0.0;

    for entry in &corpus {
        let mix = &entry.mixture;
        let mut prev = f64::INFINITY;
        let mut monotone = true;
        for &t in &grid {
            let rep = entropy_report(mix, t)?;
            monotone &= rep.w <= prev + thresholds::W_MONOTONE_SLACK;
            prev = rep.w;
            deficit_min = deficit_min.min(rep.logsob_deficit);
            identity_max = identity_max.max((rep.d0_avg - (rep.w - mix.dim() as f64)).abs());
            for (q, v) in [
                ("w_functional", rep.w),
                ("s_tilde", rep.s_tilde),
                ("fisher", rep.fisher),
                ("logsob_deficit", rep.logsob_deficit),
            ] {
                rows.push(DataRow {
                    mixture: entry.name.clone(),
                    point: None,
                    x: Vec::new(),
                    t: Some(t),
                    big_n: None,
                    beta: None,
                    quantity: q.into(),
                    value: v,
                });
            }
        }
        checks.push(CheckRow {
            experiment: "entropy",
            check: "w_monotone".into(),
            detail: format!("{} on the geometric grid", entry.name),
            value: prev,
            threshold: format!("non-increasing (slack {:e})", thresholds::W_MONOTONE_SLACK),
            passed: monotone,
        });

        let (fd, pred) = w_derivative_check(mix, 1.0, 1e-4)?;
        let agree = (fd - pred).abs() / (1.0 + pred.abs());
        rows.push(DataRow {
            mixture: entry.name.clone(),
            point: None,
            x: Vec::new(),
            t: Some(1.0),
            big_n: None,
            beta: None,
            quantity: "w_derivative_vs_dissipation".into(),
            value: agree,
        });
        checks.push(max_check(
            "entropy",
            "w_derivative_agreement",
            &format!("{} at t = 1", entry.name),
            agree,
            1e-5,
        ));
    }

    // kernel equality anchors
    let kernel = GaussianMixture::standard_kernel(cfg.n);
    let nf = cfg.n as f64;
    let rep = entropy_report(&kernel, 1.0)?;
    let w_target = 0.5 * nf * (2.0 + (4.0 * std::f64::consts::PI).ln());
    checks.push(max_check(
        "entropy",
        "kernel_w_anchor",
        "|W - (n/2)(2 + log 4pi)| on the kernel",
        (rep.w - w_target).abs(),
        thresholds::KERNEL_W,
    ));
    checks.push(max_check(
        "entropy",
        "kernel_logsob_deficit",
        "|deficit| on the kernel",
        rep.logsob_deficit.abs(),
        thresholds::KERNEL_W,
    ));
    let (l1, egap) = rescaled_density_gap(&kernel, 1.0)?;
    checks.push(max_check(
        "entropy",
        "kernel_rescaled_l1",
        "L1 gap of the rescaled kernel to the Gaussian",
        l1,
        thresholds::KERNEL_L1,
    ));
    rows.push(DataRow {
        mixture: "kernel".into(),
        point: None,
        x: Vec::new(),
        t: Some(1.0),
        big_n: None,
        beta: None,
        quantity: "rescaled_entropy_gap".into(),
        value: egap,
    });

    // CLT step at large t for a genuinely multimodal mixture
    for entry in &corpus {
        if entry.name == "kernel" {
            continue;
        }
        let (l1_big, egap_big) = rescaled_density_gap(&entry.mixture, 1e3)?;
        for (q, v) in [
            ("rescaled_l1_gap", l1_big),
            ("rescaled_entropy_gap", egap_big),
        ] {
            rows.push(DataRow {
                mixture: entry.name.clone(),
                point: None,
                x: Vec::new(),
                t: Some(1e3),
                big_n: None,
                beta: None,
                quantity: q.into(),
                value: v,
            });
        }
        checks.push(max_check(
            "entropy",
            "entropy_gap_closes",
            &format!("{} at t = 1e3", entry.name),
            egap_big,
            0.01,
        ));
    }

    checks.push(CheckRow {
        experiment: "entropy",
        check: "logsob_deficit_min".into(),
        detail: "log-Sobolev positivity across corpus and grid".into(),
        value: deficit_min,
        threshold: format!(">= {:e}", thresholds::LOGSOB_POSITIVITY),
        passed: deficit_min >= thresholds::LOGSOB_POSITIVITY,
    });
    checks.push(max_check(
        "entropy",
        "logsob_identity_max",
        "|int D0 u - (W - n)| across corpus and grid",
        identity_max,
        thresholds::LOGSOB_IDENTITY,
    ));
    Ok((rows, checks))
}

// ---------------------------------------------------------------------------
// projection
// ---------------------------------------------------------------------------

pub fn run_projection(cfg: &ExperimentConfig) -> Result<(Vec<DataRow>, Vec<CheckRow>)> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let grid: Vec<Vec<f64>> = (0..=100)
        .map(|k| vec![-5.0 + 10.0 * k as f64 / 100.0; cfg.n])
        .collect();

    let mut pts = Vec::new();
    for &big_n in &PROJECTION_N_LIST {
        let gap = poincare_projection_gap(cfg.n, big_n, &grid)?;
        pts.push((big_n as f64, gap));
        rows.push(DataRow {
            mixture: String::new(),
            point: None,
            x: Vec::new(),
            t: None,
            big_n: Some(big_n),
            beta: None,
            quantity: "projection_sup_gap".into(),
            value: gap,
        });
    }
    let fit = fit_rate_with_floor(&pts, 1e-15)?;
    checks.push(slope_check(
        "projection",
        "projection_sup_gap_slope",
        "grid of 101 points in [-5,5]",
        &fit,
        thresholds::PROJECTION_SLOPE_BAND,
    ));

    // Taylor bound on seeded random samples
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7a17);
    let mut worst_margin = f64::INFINITY;
    for _ in 0..TAYLOR_SAMPLES {
        let big_n = rng.gen_range(2u32..1_000_000);
        let delta = rng.gen_range(0.0..(big_n as f64).min(500.0));
        let v = half_power_decay(delta, big_n)?;
        worst_margin = worst_margin.min((-delta / 2.0).exp() - v);
    }
    rows.push(DataRow {
        mixture: String::new(),
        point: None,
        x: Vec::new(),
        t: None,
        big_n: None,
        beta: None,
        quantity: "taylor_bound_worst_margin".into(),
        value: worst_margin,
    });
    checks.push(CheckRow {
        experiment: "projection",
        check: "taylor_bound".into(),
        detail: format!("{TAYLOR_SAMPLES} seeded (delta, N) samples"),
        value: worst_margin,
        threshold: ">= -1e-14".into(),
        passed: worst_margin >= -1e-14,
    });

    // Stirling ratio: exact at n = 2, O(N^{-1}) for n = 1, 3
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut n2_max: f64 = 0.0;
    for &big_n in &OMEGA_N_LIST {
        let rel = (omega_ratio(2, big_n) - two_pi).abs() / two_pi;
        n2_max = n2_max.max(rel);
        rows.push(DataRow {
            mixture: String::new(),
            point: None,
            x: Vec::new(),
            t: None,
            big_n: Some(big_n),
            beta: None,
            quantity: "omega_ratio_n2_rel_gap".into(),
            value: rel,
        });
    }
    checks.push(max_check(
        "projection",
        "omega_ratio_n2_exact",
        "gamma recursion telescopes exactly",
        n2_max,
        thresholds::OMEGA_N2_REL,
    ));
    for &n in &[1u32, 3] {
        let target = two_pi.powf(n as f64 / 2.0);
        let mut pts = Vec::new();
        for &big_n in &OMEGA_N_LIST {
            let gap = (omega_ratio(n, big_n) - target).abs();
            pts.push((big_n as f64, gap));
            rows.push(DataRow {
                mixture: String::new(),
                point: None,
                x: Vec::new(),
                t: None,
                big_n: Some(big_n),
                beta: None,
                quantity: format!("omega_ratio_n{n}_gap"),
                value: gap,
            });
        }
        let fit = fit_rate_with_floor(&pts, 1e-15)?;
        checks.push(slope_check(
            "projection",
            &format!("omega_ratio_n{n}_slope"),
            "Stirling ratio rate",
            &fit,
            thresholds::OMEGA_SLOPE_BAND,
        ));
    }
    Ok((rows, checks))
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

/// Run the configured experiment(s), write per-experiment CSVs and the
/// pass/fail summary, and return everything that was checked.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let experiments: Vec<Experiment> = match cfg.experiment {
        Experiment::All => vec![
            Experiment::Identities,
            Experiment::LimitRates,
            Experiment::Slicing,
            Experiment::Entropy,
            Experiment::Projection,
        ],
        single => vec![single],
    };
    let mut all_checks = Vec::new();
    let mut data_files = Vec::new();
    for exp in experiments {
        let (mut rows, checks) = match exp {
            Experiment::Identities => run_identities(cfg)?,
            Experiment::LimitRates => run_limit_rates(cfg)?,
            Experiment::Slicing => run_slicing(cfg)?,
            Experiment::Entropy => run_entropy(cfg)?,
            Experiment::Projection => run_projection(cfg)?,
            Experiment::All => unreachable!(),
        };
        let path = cfg.output_dir.join(format!("{}.csv", exp.name()));
        write_data_csv(&path, &mut rows)?;
        data_files.push(path);
        all_checks.extend(checks);
    }
    let summary_file = cfg.output_dir.join("summary.csv");
    write_summary_csv(&summary_file, &all_checks)?;
    Ok(RunSummary {
        checks: all_checks,
        data_files,
        summary_file,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_and_validates() {
        let text = "\
# sample config
experiment=projection
n=1
tau_min=0.5
tau_max=2.0
N_list=1000,10000,100000
beta_list=0.9,0.95,0.99
seed=7
output_dir=out
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.experiment, Experiment::Projection);
        assert_eq!(cfg.n_list, vec![1_000, 10_000, 100_000]);
        assert_eq!(cfg.seed, 7);

        assert!(ExperimentConfig::parse("bogus_key=1").is_err());
        assert!(ExperimentConfig::parse("tau_min=-1").is_err());
        assert!(ExperimentConfig::parse("N_list=3,10,100").is_err());
        assert!(ExperimentConfig::parse("experiment=nope").is_err());
    }

    #[test]
    fn projection_run_passes_and_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            experiment: Experiment::Projection,
            output_dir: dir.path().to_path_buf(),
            ..ExperimentConfig::default()
        };
        let summary = run_experiment(&cfg).unwrap();
        assert!(summary.all_passed(), "failed: {:?}", summary.failed());
        let first = std::fs::read(dir.path().join("projection.csv")).unwrap();
        let summary2 = run_experiment(&cfg).unwrap();
        assert!(summary2.all_passed());
        let second = std::fs::read(dir.path().join("projection.csv")).unwrap();
        assert_eq!(first, second, "reruns must be byte-identical");
    }
}
