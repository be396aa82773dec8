//! Rate fitting and report aggregation: log-log slope regression, plateau
//! detection, median/quantile helpers.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Least-squares fit of log(gap) against log(N).
#[derive(Debug, Clone)]
pub struct RateFit<S: Scalar> {
    pub slope: S,
    pub intercept: S,
    pub r_squared: S,
    pub points: Vec<(S, S)>,
}

/// OLS on (log N, log gap). Deterministic; requires ≥ 3 points and
/// strictly positive gaps.
pub fn fit_rate<S: Scalar>(series: &[(S, S)]) -> Result<RateFit<S>> {
    if series.len() < 3 {
        return Err(Error::DegenerateSeries(format!(
            "need at least 3 points, got {}",
            series.len()
        )));
    }
    if series.iter().any(|&(n, g)| n <= S::zero() || g <= S::zero()) {
        return Err(Error::DegenerateSeries(
            "all N and gaps must be positive for a log-log fit".into(),
        ));
    }
    let logs: Vec<(S, S)> = series.iter().map(|&(n, g)| (n.ln(), g.ln())).collect();
    let k = S::from_usize_c(logs.len());
    let mx: S = logs.iter().map(|&(x, _)| x).sum::<S>() / k;
    let my: S = logs.iter().map(|&(_, y)| y).sum::<S>() / k;
    let sxx: S = logs.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: S = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    if sxx == S::zero() {
        return Err(Error::DegenerateSeries("all N values identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let syy: S = logs.iter().map(|&(_, y)| (y - my) * (y - my)).sum();
    let r_squared = if syy == S::zero() {
        S::one()
    } else {
        (sxy * sxy / (sxx * syy)).min(S::one())
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: series.to_vec(),
    })
}

/// Median of the last `window` values: the detected noise-floor plateau.
pub fn detect_plateau<S: Scalar>(series: &[S], window: usize) -> Result<S> {
    if window == 0 || series.len() < window {
        return Err(Error::SeriesTooShort);
    }
    Ok(median(&series[series.len() - window..]))
}

pub fn median<S: Scalar>(values: &[S]) -> S {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / S::from_f64_c(2.0)
    }
}

/// Empirical quantile with linear interpolation, q in [0, 1].
pub fn quantile<S: Scalar>(values: &[S], q: f64) -> S {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = S::from_f64_c(pos - lo as f64);
    v[lo] + (v[hi] - v[lo]) * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let series: Vec<(f64, f64)> = [100.0, 1000.0, 10000.0, 100000.0]
            .iter()
            .map(|&n: &f64| (n, n.powf(-0.5)))
            .collect();
        let fit = fit_rate(&series).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        let series: Vec<(f64, f64)> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&n: &f64| (n, 2.0 / n))
            .collect();
        let fit = fit_rate(&series).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.intercept - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn constant_series_has_zero_slope() {
        let series = vec![(10.0, 0.3), (100.0, 0.3), (1000.0, 0.3)];
        let fit = fit_rate(&series).unwrap();
        assert!(f64::abs(fit.slope) < 1e-12);
    }

    #[test]
    fn degenerate_series_rejected() {
        assert!(fit_rate(&[(10.0, 1.0), (20.0, 0.5)]).is_err());
        assert!(fit_rate(&[(10.0, 1.0), (20.0, 0.5), (30.0, 0.0)]).is_err());
    }

    #[test]
    fn plateau_detection() {
        let mut series: Vec<f64> = (1..=50).map(|k| 1.0 / k as f64).collect();
        series.extend(std::iter::repeat(0.1).take(20));
        let p = detect_plateau(&series, 10).unwrap();
        assert_eq!(p, 0.1);
        // window = 1 → last value
        assert_eq!(detect_plateau(&series, 1).unwrap(), 0.1);
        // permutation invariance within the window
        let a = detect_plateau(&[1.0, 3.0, 2.0, 5.0], 3).unwrap();
        let b = detect_plateau(&[1.0, 5.0, 2.0, 3.0], 3).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            detect_plateau(&[1.0], 2),
            Err(Error::SeriesTooShort)
        ));
    }

    #[test]
    fn quantiles_and_median() {
        let v = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(median(&v), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
    }
}
