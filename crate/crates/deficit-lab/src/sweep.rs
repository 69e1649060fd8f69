//! Convergence-rate estimation: least squares in log-log coordinates,
//! shared by every O(N^{-1}) verification suite.

use crate::error::{Error, Result};

/// Default floor below which residuals are treated as numerical zero.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Fitted log-log slope with the points that entered the fit.
#[derive(Debug, Clone)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// (parameter, |residual|) pairs that survived the noise floor.
    pub points: Vec<(f64, f64)>,
    /// How many input points fell below the noise floor.
    pub excluded: usize,
}

/// Ordinary least squares on (log parameter, log |residual|).
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    fit_rate_with_floor(points, NOISE_FLOOR)
}

pub fn fit_rate_with_floor(points: &[(f64, f64)], noise_floor: f64) -> Result<RateFit> {
    for &(p, r) in points {
        if !(p > 0.0) || !(r >= 0.0) || !p.is_finite() || !r.is_finite() {
            return Err(Error::domain(format!(
                "rate fit needs parameter > 0 and residual >= 0, got ({p}, {r})"
            )));
        }
    }
    let kept: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(_, r)| r > noise_floor)
        .collect();
    let excluded = points.len() - kept.len();
    if kept.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: kept.len(),
        });
    }
    let logs: Vec<(f64, f64)> = kept.iter().map(|&(p, r)| (p.ln(), r.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = logs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::domain(
            "rate fit needs at least two distinct parameters",
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = logs.iter().map(|(_, y)| (y - mean_y).powi(2)).sum();
    let ss_res: f64 = logs
        .iter()
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: kept,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&x| (x, 7.0 / x))
            .collect();
        let fit = fit_rate(&pts).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 7.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn perturbed_power_law_stays_near_minus_one() {
        let pts: Vec<(f64, f64)> = [1e2, 1e3, 1e4, 1e5]
            .iter()
            .map(|&x| (x, 3.0 / x + 100.0 / (x * x)))
            .collect();
        let fit = fit_rate(&pts).unwrap();
        assert!(
            fit.slope > -1.05 && fit.slope < -0.95,
            "slope {}",
            fit.slope
        );
    }

    #[test]
    fn all_zero_residuals_are_insufficient() {
        let pts = vec![(10.0, 0.0), (100.0, 0.0), (1000.0, 0.0)];
        assert!(matches!(
            fit_rate(&pts),
            Err(Error::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn scale_equivariance() {
        let pts: Vec<(f64, f64)> = [10.0f64, 40.0, 160.0, 640.0]
            .iter()
            .map(|&x| (x, 0.3 / (x * x.sqrt())))
            .collect();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(x, r)| (x, 17.5 * r)).collect();
        let a = fit_rate(&pts).unwrap();
        let b = fit_rate(&scaled).unwrap();
        assert!((a.slope - b.slope).abs() < 1e-12);
        assert!((b.intercept - a.intercept - 17.5f64.ln()).abs() < 1e-12);
    }
}
