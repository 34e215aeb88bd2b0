//! Closed-form CoVaR and delta-CoVaR for bivariate copula models.
//!
//! The core identity: if the institution's loss sits at a point with
//! marginal probability `u`, the conditional distribution of the system
//! loss is `v -> dC(u, v)/du`. Inverting that at level `alpha` and pushing
//! the result through the system's marginal quantile yields CoVaR exactly,
//! with no simulation. A seeded Monte-Carlo oracle ([`oracle`]) exists
//! purely to cross-check the analytic path.
//!
//! Supported copulas: Gaussian, Student-t, Gumbel, Clayton, and generic
//! Archimedean generators. Margins: normal, Student-t, empirical.

pub mod cli;
pub mod copulas;
pub mod covar;
pub mod error;
pub mod ingestion;
pub mod margins;
pub mod numerics;
pub mod oracle;

pub use crate::copulas::{CopulaModel, GeneratorSpec, Side};
pub use crate::covar::{
    covar, covar_gaussian_closed, covar_leq, delta_covar, value_at_risk, CoVaRReport, Condition,
    RiskQuery, SystemModel,
};
pub use crate::error::{CovarError, Result};
pub use crate::ingestion::{
    estimate_model, kendall_tau, read_loss_csv, write_loss_csv, CopulaFamily, FitReport,
    LossSeries, MarginKind,
};
pub use crate::margins::Margin;
pub use crate::oracle::{mc_conditional_correlation, mc_covar, mc_tail_dep, OracleConfig, OracleEstimate};
