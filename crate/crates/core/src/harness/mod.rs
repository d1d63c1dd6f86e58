//! Sweeps over the parameterization level, result tables, and their CSV/SVG forms.

pub mod compare;
pub mod config;
pub mod csv;
pub mod svg;
pub mod sweep;

use crate::estimators::EstimatorId;

pub use compare::{compare, join_analytic, CompareReport, Verdict, VerdictKind};
pub use config::{AlphaMode, AnalyticMode, ExperimentConfig, MisspecPath, SigmaXSpec};
pub use sweep::{analytic_table, run_sweep, trial_rng, SweepResult};

/// One plotted quantity: an estimator at one `(d, σ_η²)`.
///
/// `None` fields serialize as empty CSV fields. The LMMSE estimator has no
/// empirical value on the source band, where its analytic value is `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiskPoint {
    pub d: usize,
    pub gamma_tgt: f64,
    pub gamma_src: f64,
    pub estimator: EstimatorId,
    pub sigma_eta2: f64,
    pub alpha_used: Option<f64>,
    pub empirical_mean: Option<f64>,
    pub empirical_stderr: Option<f64>,
    pub analytic: Option<f64>,
}

impl RiskPoint {
    pub fn new(d: usize, n: usize, n_tilde: usize, estimator: EstimatorId, sigma_eta2: f64) -> Self {
        RiskPoint {
            d,
            gamma_tgt: d as f64 / n as f64,
            gamma_src: d as f64 / n_tilde as f64,
            estimator,
            sigma_eta2,
            alpha_used: None,
            empirical_mean: None,
            empirical_stderr: None,
            analytic: None,
        }
    }
}

/// CSV row order: estimator, then `σ_η²`, then `d`.
pub fn sort_points(points: &mut [RiskPoint]) {
    points.sort_by(|a, b| {
        a.estimator
            .as_str()
            .cmp(b.estimator.as_str())
            .then(a.sigma_eta2.total_cmp(&b.sigma_eta2))
            .then(a.d.cmp(&b.d))
    });
}
