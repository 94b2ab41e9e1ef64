use crate::error::{Error, Result};

/// Minimum number of samples a fit accepts.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Least-squares line `y = slope x + intercept` through transformed samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

fn window_filter(series: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| window.is_none_or(|(a, b)| t >= a && t <= b))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            found: pts.len(),
        });
    }
    if let Some(&(t, value)) = pts.iter().find(|&&(_, v)| !(v > 0.0)) {
        return Err(Error::NonPositiveSample { t, value });
    }
    Ok(pts)
}

fn least_squares(xy: &[(f64, f64)]) -> DecayFit {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xy
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    DecayFit {
        slope,
        intercept,
        r_squared,
        samples: xy.len(),
    }
}

/// Slope of `ln(value)` against `t` over the samples with `t` in `window`.
pub fn fit_decay_rate(series: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<DecayFit> {
    let pts = window_filter(series, window)?;
    let xy: Vec<(f64, f64)> = pts.iter().map(|&(t, v)| (t, v.ln())).collect();
    Ok(least_squares(&xy))
}

/// Slope of `ln(value)` against `ln(1 + t)`.
pub fn fit_power_law(series: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<DecayFit> {
    let pts = window_filter(series, window)?;
    let xy: Vec<(f64, f64)> = pts.iter().map(|&(t, v)| ((1.0 + t).ln(), v.ln())).collect();
    Ok(least_squares(&xy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(f: impl Fn(f64) -> f64, n: usize, dt: f64) -> Vec<(f64, f64)> {
        (0..n).map(|i| (i as f64 * dt, f(i as f64 * dt))).collect()
    }

    #[test]
    fn exponential() {
        let fit = fit_decay_rate(&series(|t| 3.0 * (-2.0 * t).exp(), 50, 0.1), None).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-8);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-8);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_law() {
        let fit = fit_power_law(&series(|t| (1.0 + t).powf(-0.75), 100, 0.5), None).unwrap();
        assert!((fit.slope + 0.75).abs() < 1e-6);
    }

    #[test]
    fn window_selects_late_times() {
        let s = series(|t| (-t).exp() + (-5.0 * t).exp(), 200, 0.05);
        let early = fit_decay_rate(&s, Some((0.0, 0.5))).unwrap();
        let late = fit_decay_rate(&s, Some((6.0, 10.0))).unwrap();
        assert!(early.slope < -1.5);
        assert!((late.slope + 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        let s = series(|t| 1.0 - t, 20, 0.1);
        assert!(matches!(
            fit_decay_rate(&s, None),
            Err(Error::NonPositiveSample { .. })
        ));
        let few = series(|t| (-t).exp(), 9, 0.1);
        assert!(matches!(
            fit_decay_rate(&few, None),
            Err(Error::InsufficientSamples {
                needed: 10,
                found: 9
            })
        ));
        let s = series(|t| (-t).exp(), 20, 0.1);
        assert!(matches!(
            fit_decay_rate(&s, Some((5.0, 6.0))),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    proptest! {
        #[test]
        fn recovers_any_rate(rate in -5.0f64..5.0, amp in 1e-3f64..1e3) {
            let fit = fit_decay_rate(&series(|t| amp * (rate * t).exp(), 30, 0.07), None).unwrap();
            prop_assert!((fit.slope - rate).abs() < 1e-9);
        }
    }
}
