use serde::Serialize;

use super::SimResult;
use crate::error::{Error, Result};

/// Two-sided 95% standard normal quantile.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `errors` out of `trials`.
pub fn wilson(errors: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// Least-squares line `-log p̂ ≈ intercept + slope·n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub n_used: Vec<usize>,
}

/// Fit the slope of `-log p̂` against `n` from `(n, p̂)` pairs; needs three
/// points with `p̂ > 0`.
pub fn fit_slope(points: &[(usize, f64)]) -> Result<Fit> {
    let used: Vec<(usize, f64)> = points.iter().copied().filter(|&(_, p)| p > 0.0).collect();
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} block lengths with errors, need 3",
            used.len()
        )));
    }
    let m = used.len() as f64;
    let xs: Vec<f64> = used.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = used.iter().map(|&(_, p)| -p.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all block lengths are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(Fit {
        slope,
        slope_se: (ssr / (m - 2.0) / sxx).sqrt(),
        intercept,
        n_used: used.iter().map(|&(n, _)| n).collect(),
    })
}

/// Slope fit over the block lengths not marked as excluded.
pub fn fit_exponent(result: &SimResult) -> Result<Fit> {
    let points: Vec<(usize, f64)> = result
        .per_n
        .iter()
        .filter(|p| !p.excluded)
        .map(|p| (p.n, p.p_hat))
        .collect();
    fit_slope(&points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential_gives_exact_slope() {
        let pts: Vec<(usize, f64)> = [10, 20, 30, 40].iter().map(|&n| (n, (-0.2 * n as f64).exp())).collect();
        let f = fit_slope(&pts).unwrap();
        assert!((f.slope - 0.2).abs() < 1e-12);
        assert!(f.slope_se < 1e-12);
        let flat: Vec<(usize, f64)> = [10, 20, 30].iter().map(|&n| (n, 0.01)).collect();
        assert!(fit_slope(&flat).unwrap().slope.abs() < 1e-15);
    }

    #[test]
    fn needs_three_points_with_errors() {
        assert!(matches!(
            fit_slope(&[(10, 0.1), (20, 0.01), (30, 0.0)]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_995).abs() < 1e-5);
        let (lo, hi) = wilson(50, 100);
        assert!((lo - 0.403_832).abs() < 1e-5 && (hi - 0.596_168).abs() < 1e-5);
        let (lo, hi) = wilson(100, 100);
        assert_eq!(hi, 1.0);
        assert!(lo < 1.0);
    }
}
