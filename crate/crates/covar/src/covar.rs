//! The CoVaR engine.
//!
//! CoVaR of the system conditional on the institution is computed as
//! F_s^{-1}(g^{-1}(alpha, u)), where u encodes the conditioning event on the
//! institution's loss and g is the copula conditional distribution. Every
//! report carries the transformed level so the quantile identity
//! CoVaR = VaR_{alpha~}^s stays externally checkable.

use crate::copulas::CopulaModel;
use crate::error::{CovarError, Result};
use crate::margins::Margin;
use crate::numerics::{self, find_root, Bracket, NumericTolerance};

const EPS: f64 = 1e-12;

/// Full bivariate (institution, system) loss specification via Sklar's
/// theorem: H(x, y) = C(F_i(x), F_s(y)).
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub margin_i: Margin,
    pub margin_s: Margin,
    pub copula: CopulaModel,
}

/// Conditioning event on the institution's loss.
#[derive(Debug, Clone, Copy)]
pub enum Condition {
    /// L^i equals the given loss value.
    AtValue(f64),
    /// L^i equals its own VaR at level beta; the institution margin drops
    /// out entirely.
    AtQuantile(f64),
    /// L^i at most its VaR at level beta (the "<=" variant).
    AtMostQuantile(f64),
    /// L^i equals its mean loss.
    AtMean,
}

#[derive(Debug, Clone, Copy)]
pub struct RiskQuery {
    pub alpha: f64,
    pub condition: Condition,
}

impl RiskQuery {
    pub fn new(alpha: f64, condition: Condition) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CovarError::Domain(format!(
                "alpha must lie in (0,1), got {alpha}"
            )));
        }
        if let Condition::AtQuantile(beta) | Condition::AtMostQuantile(beta) = condition {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(CovarError::Domain(format!(
                    "beta must lie in (0,1), got {beta}"
                )));
            }
        }
        Ok(RiskQuery { alpha, condition })
    }
}

/// Computed CoVaR together with the transformed level and the unconditional
/// system VaR at alpha.
#[derive(Debug, Clone, Copy)]
pub struct CoVaRReport {
    pub covar: f64,
    pub tilde_alpha: f64,
    pub var_s: f64,
    pub delta_covar: Option<f64>,
}

/// Unconditional value at risk: the alpha-quantile of the loss law.
pub fn value_at_risk(m: &Margin, alpha: f64) -> Result<f64> {
    m.quantile(alpha)
}

/// CoVaR via the conditional-quantile pipeline.
pub fn covar(model: &SystemModel, query: &RiskQuery) -> Result<CoVaRReport> {
    let alpha = query.alpha;
    if let Condition::AtMostQuantile(beta) = query.condition {
        let value = covar_leq(model, alpha, beta)?;
        let tilde_alpha = model.margin_s.cdf(value)?;
        return Ok(CoVaRReport {
            covar: value,
            tilde_alpha,
            var_s: value_at_risk(&model.margin_s, alpha)?,
            delta_covar: None,
        });
    }
    let u = match query.condition {
        Condition::AtValue(l) => model.margin_i.cdf(l)?,
        // The institution margin is bypassed on purpose: conditioning at a
        // quantile depends only on the copula.
        Condition::AtQuantile(beta) => beta,
        Condition::AtMean => model.margin_i.cdf(model.margin_i.mean()?)?,
        Condition::AtMostQuantile(_) => unreachable!(),
    };
    if !(u > 0.0 && u < 1.0) {
        return Err(CovarError::Domain(format!(
            "conditioning event maps to u = {u}, outside (0,1)"
        )));
    }
    let tilde_alpha = model.copula.cond_quantile(alpha, u)?;
    Ok(CoVaRReport {
        covar: model.margin_s.quantile(tilde_alpha)?,
        tilde_alpha,
        var_s: value_at_risk(&model.margin_s, alpha)?,
        delta_covar: None,
    })
}

/// Closed-form CoVaR for Gaussian copula with Gaussian margins:
/// rho (sigma_s / sigma_i)(l - mu_i) + sqrt(1 - rho^2) sigma_s Phi^{-1}(alpha) + mu_s.
#[allow(clippy::too_many_arguments)]
pub fn covar_gaussian_closed(
    mu_i: f64,
    sigma_i: f64,
    mu_s: f64,
    sigma_s: f64,
    rho: f64,
    l: f64,
    alpha: f64,
) -> Result<f64> {
    if !(sigma_i > 0.0 && sigma_s > 0.0) {
        return Err(CovarError::Domain(
            "standard deviations must be positive".into(),
        ));
    }
    if rho.abs() > 0.999 {
        return Err(CovarError::Domain(format!("|rho| must be <= 0.999, got {rho}")));
    }
    let q = numerics::std_normal_quantile(alpha)?;
    Ok(rho * (sigma_s / sigma_i) * (l - mu_i) + (1.0 - rho * rho).sqrt() * sigma_s * q + mu_s)
}

/// Marginal systemic contribution: CoVaR with the institution in distress
/// (at its beta-VaR) minus CoVaR with the institution at its mean loss.
pub fn delta_covar(model: &SystemModel, alpha: f64, beta: f64) -> Result<f64> {
    let distress = covar(model, &RiskQuery::new(alpha, Condition::AtQuantile(beta))?)?;
    let median = covar(model, &RiskQuery::new(alpha, Condition::AtMean)?)?;
    Ok(distress.covar - median.covar)
}

/// CoVaR under the "<=" condition: solves C(beta, v) = alpha * beta for v,
/// then evaluates the system quantile there.
pub fn covar_leq(model: &SystemModel, alpha: f64, beta: f64) -> Result<f64> {
    for (name, x) in [("alpha", alpha), ("beta", beta)] {
        if !(x > 0.0 && x < 1.0) {
            return Err(CovarError::Domain(format!(
                "{name} must lie in (0,1), got {x}"
            )));
        }
    }
    let target = alpha * beta;
    let copula = &model.copula;
    let mut f = |v: f64| copula.copula_cdf(beta, v).unwrap() - target;
    let (lo, hi) = (EPS, 1.0 - EPS);
    let f_lo = f(lo);
    let f_hi = f(hi);
    let v = if f_lo >= 0.0 {
        lo
    } else if f_hi <= 0.0 {
        hi
    } else {
        let bracket = Bracket::new(lo, hi, f_lo, f_hi)?;
        find_root(&mut f, bracket, NumericTolerance::default())?
    };
    model.margin_s.quantile(v)
}

/// Gaussian-margin delta-CoVaR through the two transformed levels of the
/// distress and mean conditions; algebraically sigma_s * rho * Phi^{-1}(beta).
pub fn delta_covar_gaussian_transformed(
    sigma_s: f64,
    rho: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    if !(sigma_s > 0.0) {
        return Err(CovarError::Domain(format!(
            "sigma_s must be positive, got {sigma_s}"
        )));
    }
    let s = (1.0 - rho * rho).sqrt();
    let qa = numerics::std_normal_quantile(alpha)?;
    let qb = numerics::std_normal_quantile(beta)?;
    let tilde_d = numerics::std_normal_cdf(rho * qb + s * qa)?;
    let tilde_m = numerics::std_normal_cdf(s * qa)?;
    Ok(sigma_s
        * (numerics::std_normal_quantile(tilde_d)? - numerics::std_normal_quantile(tilde_m)?))
}
