//! Power-law exponent fitting for norm time series, and numeric checks of the
//! convolution integral inequalities that drive the nonlinear decay estimates.

use crate::error::{Error, Result};
use crate::quad;

/// Result of a least-squares line fit in log-log coordinates.
#[derive(Clone, Debug)]
pub struct RateFit {
    /// Fitted slope of `log y` against `log t`.
    pub exponent: f64,
    /// `exp(intercept)`: the fitted prefactor `C` in `y ~ C t^exponent`.
    pub prefactor: f64,
    /// Root-mean-square deviation of the fit in log space.
    pub fit_residual: f64,
    /// `[t_min, t_max]` actually used.
    pub window: (f64, f64),
    pub n_samples: usize,
}

/// Least-squares fit of `log y = exponent * log t + intercept` over the
/// samples falling inside `window`. Requires at least 8 samples spanning a
/// factor of 4 in `t`, and strictly positive values.
pub fn fit_power_law(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(Error::InvalidParameter(
            "times and values have different lengths".into(),
        ));
    }
    let pairs: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= window.0 && t <= window.1)
        .map(|(&t, &v)| (t, v))
        .collect();
    if pairs.len() < 8 {
        return Err(Error::FitWindow(format!(
            "need at least 8 samples in [{}, {}], got {}",
            window.0,
            window.1,
            pairs.len()
        )));
    }
    let t_min = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let t_max = pairs.iter().map(|p| p.0).fold(0.0f64, f64::max);
    if !(t_min > 0.0) || t_max / t_min < 4.0 {
        return Err(Error::FitWindow(format!(
            "window [{t_min}, {t_max}] spans less than a factor of 4"
        )));
    }
    if pairs.iter().any(|&(_, v)| !(v > 0.0)) {
        return Err(Error::InvalidParameter(
            "power-law fit requires strictly positive values".into(),
        ));
    }

    let n = pairs.len() as f64;
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(t, v)| (t.ln(), v.ln())).collect();
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let mean_x = sx / n;
    let mean_y = sy / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let rss: f64 = logs
        .iter()
        .map(|p| (p.1 - exponent * p.0 - intercept).powi(2))
        .sum();
    Ok(RateFit {
        exponent,
        prefactor: intercept.exp(),
        fit_residual: (rss / n).sqrt(),
        window: (t_min, t_max),
        n_samples: pairs.len(),
    })
}

/// Logarithmically spaced sample times, endpoints included.
pub fn log_spaced(t_min: f64, t_max: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && t_min > 0.0 && t_max > t_min);
    let ratio = (t_max / t_min).ln();
    (0..count)
        .map(|i| t_min * (ratio * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Which convolution inequality a parameter pair falls under. Parameters are
/// decay rates: the integrand is `(1 + t - tau)^{-a} (1 + tau)^{-b}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LemmaCase {
    /// `a, b > 0`, `max(a, b) > 1`: bound `(1+t)^{-min(a,b)}`.
    BothDecay,
    /// `0 <= a < 1`, `0 <= b < 1`: bound `(1+t)^{1-a-b}`.
    MildGrowth,
    /// `0 <= a < 1`, `b > 1`: bound `(1+t)^{-a}`.
    MildTimesIntegrable,
    /// `0 <= a < 1`, `b = 1`: bound `(1+t)^{-a} (1 + log(1+t))`.
    Logarithmic,
}

/// One evaluation of the inequality check.
#[derive(Clone, Debug)]
pub struct RatioSample {
    pub t: f64,
    pub lhs: f64,
    pub bound_shape: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct ConvolutionReport {
    pub a: f64,
    pub b: f64,
    pub case: LemmaCase,
    pub samples: Vec<RatioSample>,
}

impl ConvolutionReport {
    pub fn all_finite(&self) -> bool {
        self.samples.iter().all(|s| s.ratio.is_finite())
    }

    pub fn max_ratio(&self) -> f64 {
        self.samples.iter().map(|s| s.ratio).fold(0.0, f64::max)
    }

    /// True when the ratios never increase (beyond `slack` relative) from
    /// `t_from` on.
    pub fn non_increasing_from(&self, t_from: f64, slack: f64) -> bool {
        let tail: Vec<&RatioSample> = self.samples.iter().filter(|s| s.t >= t_from).collect();
        tail.windows(2).all(|w| w[1].ratio <= w[0].ratio * (1.0 + slack))
    }

    /// Relative change of the ratio between the last two samples; small values
    /// mean the ratio has settled to its limit, i.e. the bound shape is sharp.
    pub fn final_drift(&self) -> f64 {
        let k = self.samples.len();
        if k < 2 {
            return f64::NAN;
        }
        (self.samples[k - 1].ratio / self.samples[k - 2].ratio - 1.0).abs()
    }
}

fn classify(a: f64, b: f64) -> Result<LemmaCase> {
    if (0.0..1.0).contains(&a) {
        if (0.0..1.0).contains(&b) {
            return Ok(LemmaCase::MildGrowth);
        }
        if b == 1.0 {
            return Ok(LemmaCase::Logarithmic);
        }
        if b > 1.0 {
            return Ok(LemmaCase::MildTimesIntegrable);
        }
    }
    if a > 0.0 && b > 0.0 && a.max(b) > 1.0 {
        return Ok(LemmaCase::BothDecay);
    }
    Err(Error::InvalidParameter(format!(
        "decay pair (a, b) = ({a}, {b}) is outside every inequality hypothesis"
    )))
}

fn bound_shape(case: LemmaCase, a: f64, b: f64, t: f64) -> f64 {
    let one_t = 1.0 + t;
    match case {
        LemmaCase::BothDecay => one_t.powf(-a.min(b)),
        LemmaCase::MildGrowth => one_t.powf(1.0 - a - b),
        LemmaCase::MildTimesIntegrable => one_t.powf(-a),
        LemmaCase::Logarithmic => one_t.powf(-a) * (1.0 + one_t.ln()),
    }
}

/// Quadrature check of `integral_0^t (1+t-tau)^{-a} (1+tau)^{-b} dtau` against
/// the claimed bound shape for the `(a, b)` regime. Returns the ratio of the
/// left side to the bound shape at each requested time; the inequalities
/// assert these ratios are bounded by a constant.
pub fn check_convolution_inequality(a: f64, b: f64, t_list: &[f64]) -> Result<ConvolutionReport> {
    let case = classify(a, b)?;
    let mut samples = Vec::with_capacity(t_list.len());
    for &t in t_list {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inequality check requires t >= 0, got {t}"
            )));
        }
        let lhs = if t == 0.0 {
            0.0
        } else {
            quad::integrate(
                |tau| (1.0 + t - tau).powf(-a) * (1.0 + tau).powf(-b),
                0.0,
                t,
                1e-10,
                0.0,
            )?
        };
        let shape = bound_shape(case, a, b, t);
        samples.push(RatioSample {
            t,
            lhs,
            bound_shape: shape,
            ratio: lhs / shape,
        });
    }
    Ok(ConvolutionReport { a, b, case, samples })
}
