//! Monte-Carlo brute-force estimators used to cross-validate every analytic
//! quantity: band-conditional quantiles, finite-level tail dependence, and
//! conditional correlation on a u-interval.
//!
//! Conditioning on L^i = l is realized as a symmetric band |u - u*| <= delta
//! in probability space; two-sided bands cancel the first-order conditioning
//! bias of the one-sided construction.

use crate::copulas::{CopulaModel, Side};
use crate::covar::SystemModel;
use crate::error::{CovarError, Result};
use crate::numerics::std_normal_quantile;

const MIN_IN_BAND: usize = 100;

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub n_samples: usize,
    pub band_halfwidth: f64,
    pub seed: u64,
    pub confidence: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            n_samples: 10_000_000,
            band_halfwidth: 0.005,
            seed: 0,
            confidence: 0.99,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 10_000 {
            return Err(CovarError::Domain(format!(
                "n_samples must be >= 10^4, got {}",
                self.n_samples
            )));
        }
        if !(self.band_halfwidth > 0.0 && self.band_halfwidth < 0.1) {
            return Err(CovarError::Domain(format!(
                "band_halfwidth must lie in (0, 0.1), got {}",
                self.band_halfwidth
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(CovarError::Domain(format!(
                "confidence must lie in (0,1), got {}",
                self.confidence
            )));
        }
        Ok(())
    }

    fn z_value(&self) -> Result<f64> {
        std_normal_quantile(1.0 - 0.5 * (1.0 - self.confidence))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleEstimate {
    pub value: f64,
    pub half_width: f64,
    pub n_in_band: usize,
}

/// Band-conditional Monte-Carlo CoVaR: the empirical alpha-quantile of the
/// system loss among samples with |u - u_star| <= band, with an
/// order-statistic (binomial) confidence half-width.
pub fn mc_covar(
    model: &SystemModel,
    alpha: f64,
    u_star: f64,
    cfg: &OracleConfig,
) -> Result<OracleEstimate> {
    cfg.validate()?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CovarError::Domain(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let band = cfg.band_halfwidth;
    if !(u_star > band && u_star < 1.0 - band) {
        return Err(CovarError::Domain(format!(
            "u_star = {u_star} must keep the band inside (0,1)"
        )));
    }
    let kept = model.copula.sample_where(cfg.n_samples, cfg.seed, |u| {
        (u - u_star).abs() <= band
    })?;
    let m = kept.len();
    if m < MIN_IN_BAND {
        return Err(CovarError::InsufficientData {
            got: m,
            need: MIN_IN_BAND,
        });
    }
    let mut losses: Vec<f64> = kept
        .iter()
        .map(|&(_, v)| model.margin_s.quantile(v))
        .collect::<Result<_>>()?;
    losses.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let z = cfg.z_value()?;
    let mf = m as f64;
    let spread = z * (mf * alpha * (1.0 - alpha)).sqrt();
    let rank = ((alpha * mf).ceil() as usize).clamp(1, m);
    let rank_lo = ((alpha * mf - spread).floor() as isize).clamp(1, m as isize) as usize;
    let rank_hi = ((alpha * mf + spread).ceil() as usize).clamp(1, m);
    let value = losses[rank - 1];
    let half_width = (losses[rank_hi - 1] - value).max(value - losses[rank_lo - 1]);
    Ok(OracleEstimate {
        value,
        half_width,
        n_in_band: m,
    })
}

/// Empirical finite-level quantile-quantile dependence: the conditional
/// exceedance (or shortfall) frequency at the given level.
pub fn mc_tail_dep(
    copula: &CopulaModel,
    level: f64,
    side: Side,
    cfg: &OracleConfig,
) -> Result<OracleEstimate> {
    cfg.validate()?;
    if !(level > 0.0 && level < 1.0) {
        return Err(CovarError::Domain(format!(
            "level must lie in (0,1), got {level}"
        )));
    }
    let kept = match side {
        Side::Upper => copula.sample_where(cfg.n_samples, cfg.seed, |u| u > level)?,
        Side::Lower => copula.sample_where(cfg.n_samples, cfg.seed, |u| u < level)?,
    };
    let m = kept.len();
    if m < MIN_IN_BAND {
        return Err(CovarError::InsufficientData {
            got: m,
            need: MIN_IN_BAND,
        });
    }
    let hits = match side {
        Side::Upper => kept.iter().filter(|p| p.1 > level).count(),
        Side::Lower => kept.iter().filter(|p| p.1 < level).count(),
    };
    let p_hat = hits as f64 / m as f64;
    let z = cfg.z_value()?;
    Ok(OracleEstimate {
        value: p_hat,
        half_width: z * (p_hat * (1.0 - p_hat) / m as f64).sqrt(),
        n_in_band: m,
    })
}

/// Pearson correlation of the loss pair restricted to F_i(L^i) in
/// [u_lo, u_hi], with a Fisher-transform confidence half-width.
pub fn mc_conditional_correlation(
    model: &SystemModel,
    u_lo: f64,
    u_hi: f64,
    cfg: &OracleConfig,
) -> Result<OracleEstimate> {
    cfg.validate()?;
    if !(0.0 <= u_lo && u_lo < u_hi && u_hi <= 1.0) {
        return Err(CovarError::Domain(format!(
            "band must satisfy 0 <= u_lo < u_hi <= 1, got [{u_lo}, {u_hi}]"
        )));
    }
    let kept = model
        .copula
        .sample_where(cfg.n_samples, cfg.seed, |u| u >= u_lo && u <= u_hi)?;
    let m = kept.len();
    if m < MIN_IN_BAND {
        return Err(CovarError::InsufficientData {
            got: m,
            need: MIN_IN_BAND,
        });
    }
    let mut xs = Vec::with_capacity(m);
    let mut ys = Vec::with_capacity(m);
    for &(u, v) in &kept {
        xs.push(model.margin_i.quantile(u)?);
        ys.push(model.margin_s.quantile(v)?);
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (mx, my) = (mean(&xs), mean(&ys));
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for k in 0..m {
        let dx = xs[k] - mx;
        let dy = ys[k] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CovarError::DegenerateData(
            "zero variance in conditional sample".into(),
        ));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let z = cfg.z_value()?;
    let half_width = if m > 3 {
        let fz = r.atanh();
        let d = z / ((m - 3) as f64).sqrt();
        ((fz + d).tanh() - r).max(r - (fz - d).tanh())
    } else {
        1.0
    };
    Ok(OracleEstimate {
        value: r,
        half_width,
        n_in_band: m,
    })
}
