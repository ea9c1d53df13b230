//! Parameter estimation.

mod bootstrap;
mod closed_form;
mod ga;
mod grid;
mod likelihood;
mod qc;

pub use bootstrap::{bootstrap_se, MAX_FAILURE_FRACTION};
pub use closed_form::{estimate_c, mle_nhpp1};
pub use ga::{ga_fit, ga_fit_traced, genetic_maximize, GaConfig, GaOutcome};
pub use grid::{grid_search, GridAxis};
pub use likelihood::{
    loglik, loglik_gradient, loglik_hessian, normalization_gradient, Likelihood, ShapeIntegral,
    StageStats,
};
pub use qc::{
    qc_alpha, qc_alpha3_survival, qc_alphas, qc_changepoints, qc_fit, QcConfig, SafePoints,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::{FamilyKind, ModelFamily};
use crate::sample::BidSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    QuickCrude,
    Grid,
    #[serde(rename = "ga")]
    Ga,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// The fitted member of its family, with `c` set to `c_hat`.
    pub family: ModelFamily,
    /// `family` embedded in the full parameter space.
    pub params: crate::BaristaParams,
    /// Conditional log-likelihood at the estimate.
    pub loglik: f64,
    pub method: FitMethod,
    /// Bootstrap standard errors of the shape parameters, in
    /// [`FamilyKind::param_names`] order.
    pub stderrs: Option<Vec<f64>>,
    pub c_hat: f64,
}

impl FitResult {
    pub fn kind(&self) -> FamilyKind {
        self.family.kind()
    }
}

/// Closed-form one-stage fit wrapped as a [`FitResult`].
pub fn fit_nhpp1(sample: &BidSample) -> Result<FitResult> {
    let (alpha, c_hat) = mle_nhpp1(sample)?;
    let family = ModelFamily::OneStage {
        alpha,
        c: c_hat,
        horizon: sample.horizon(),
    };
    let params = family.as_barista()?;
    Ok(FitResult {
        family,
        params,
        loglik: loglik(sample, &params)?,
        method: FitMethod::ClosedForm,
        stderrs: None,
        c_hat,
    })
}
