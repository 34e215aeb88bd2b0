//! Univariate loss distributions: the marginal laws F_i and F_s.
//!
//! Every variant has a strictly increasing cdf on its support, so quantile
//! and cdf are genuine inverses of each other.

use crate::error::{CovarError, Result};
use crate::numerics;

/// A univariate loss distribution (positive-loss convention: larger values
/// are worse).
#[derive(Debug, Clone)]
pub enum Margin {
    Normal { mu: f64, sigma: f64 },
    StudentT { nu: f64, loc: f64, scale: f64 },
    /// Sorted sample; cdf/quantile interpolate linearly between order
    /// statistics.
    Empirical { samples: Vec<f64> },
}

impl Margin {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !mu.is_finite() || !sigma.is_finite() {
            return Err(CovarError::Domain(format!(
                "normal margin requires finite mu and sigma > 0, got mu={mu}, sigma={sigma}"
            )));
        }
        Ok(Margin::Normal { mu, sigma })
    }

    pub fn student_t(nu: f64, loc: f64, scale: f64) -> Result<Self> {
        if !(nu > 0.0) || !(scale > 0.0) || !loc.is_finite() {
            return Err(CovarError::Domain(format!(
                "t margin requires nu > 0, scale > 0, finite loc; got nu={nu}, loc={loc}, scale={scale}"
            )));
        }
        Ok(Margin::StudentT { nu, loc, scale })
    }

    /// Builds an empirical margin from raw observations (sorted internally).
    pub fn empirical(mut samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 30 {
            return Err(CovarError::Domain(format!(
                "empirical margin needs at least 30 samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(CovarError::Domain(
                "empirical margin samples must all be finite".into(),
            ));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Margin::Empirical { samples })
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(CovarError::Domain(format!("non-finite input {x}")));
        }
        match self {
            Margin::Normal { mu, sigma } => numerics::std_normal_cdf((x - mu) / sigma),
            Margin::StudentT { nu, loc, scale } => {
                numerics::student_t_cdf((x - loc) / scale, *nu)
            }
            Margin::Empirical { samples } => {
                let n = samples.len();
                let first = samples[0];
                let last = samples[n - 1];
                if x < first || x > last {
                    return Err(CovarError::Domain(format!(
                        "empirical cdf query {x} outside sample range [{first}, {last}]"
                    )));
                }
                // Inverse of the quantile interpolation: position h in
                // [0, n-1] such that the interpolated order statistic is x.
                let idx = samples.partition_point(|&s| s <= x);
                if idx == n {
                    return Ok(1.0);
                }
                let j = idx - 1; // samples[j] <= x < samples[j+1]
                let (a, b) = (samples[j], samples[idx]);
                let frac = if b > a { (x - a) / (b - a) } else { 0.0 };
                Ok((j as f64 + frac) / (n as f64 - 1.0))
            }
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(CovarError::Domain(format!(
                "quantile level must lie in (0,1), got {p}"
            )));
        }
        match self {
            Margin::Normal { mu, sigma } => {
                Ok(sigma * numerics::std_normal_quantile(p)? + mu)
            }
            Margin::StudentT { nu, loc, scale } => {
                Ok(scale * numerics::student_t_quantile(p, *nu)? + loc)
            }
            Margin::Empirical { samples } => {
                let n = samples.len();
                let h = p * (n as f64 - 1.0);
                let j = h.floor() as usize;
                if j + 1 >= n {
                    return Ok(samples[n - 1]);
                }
                Ok(samples[j] + (h - j as f64) * (samples[j + 1] - samples[j]))
            }
        }
    }

    /// Density; for the empirical variant this is the slope of the linear
    /// interpolation through the order statistics.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        match self {
            Margin::Normal { mu, sigma } => {
                Ok(numerics::std_normal_pdf((x - mu) / sigma) / sigma)
            }
            Margin::StudentT { nu, loc, scale } => {
                Ok(numerics::student_t_pdf((x - loc) / scale, *nu)? / scale)
            }
            Margin::Empirical { .. } => {
                let h = 1e-6;
                let lo = self.cdf(x - h)?;
                let hi = self.cdf(x + h)?;
                Ok((hi - lo) / (2.0 * h))
            }
        }
    }

    pub fn mean(&self) -> Result<f64> {
        match self {
            Margin::Normal { mu, .. } => Ok(*mu),
            Margin::StudentT { nu, loc, .. } => {
                if *nu <= 1.0 {
                    Err(CovarError::UndefinedMoment(format!(
                        "t distribution with nu = {nu} <= 1 has no mean"
                    )))
                } else {
                    Ok(*loc)
                }
            }
            Margin::Empirical { samples } => {
                Ok(samples.iter().sum::<f64>() / samples.len() as f64)
            }
        }
    }
}
