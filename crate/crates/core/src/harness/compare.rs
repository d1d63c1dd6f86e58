//! Monte Carlo against formula, point by point.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::estimators::EstimatorId;
use crate::harness::RiskPoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    Pass,
    Fail,
    /// Analytic `+∞` with no finite empirical value.
    BandPass,
    /// Analytic `+∞` next to a finite empirical mean. The sample mean of a
    /// variable with infinite expectation is finite, so nothing is checked.
    BandSkip,
    /// No analytic value to compare against.
    Skipped,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub d: usize,
    pub estimator: EstimatorId,
    pub sigma_eta2: f64,
    pub kind: VerdictKind,
    /// `|empirical - analytic| / stderr` for finite pairs.
    pub z: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct CompareReport {
    pub tolerance_sigmas: f64,
    pub verdicts: Vec<Verdict>,
}

impl CompareReport {
    pub fn count(&self, kind: VerdictKind) -> usize {
        self.verdicts.iter().filter(|v| v.kind == kind).count()
    }

    pub fn passed(&self) -> usize {
        self.count(VerdictKind::Pass) + self.count(VerdictKind::BandPass)
    }

    pub fn failed(&self) -> usize {
        self.count(VerdictKind::Fail)
    }

    pub fn ok(&self) -> bool {
        self.failed() == 0
    }

    /// Counts plus the `worst` largest z-scores.
    pub fn summary(&self, worst: usize) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "tolerance {} sigma: {} pass, {} fail, {} band-skip, {} skipped ({} points)",
            self.tolerance_sigmas,
            self.passed(),
            self.failed(),
            self.count(VerdictKind::BandSkip),
            self.count(VerdictKind::Skipped),
            self.verdicts.len()
        );
        let mut scored: Vec<&Verdict> = self.verdicts.iter().filter(|v| v.z.is_some()).collect();
        scored.sort_by(|a, b| b.z.unwrap().total_cmp(&a.z.unwrap()));
        if !scored.is_empty() && worst > 0 {
            let _ = writeln!(s, "worst offenders:");
            for v in scored.into_iter().take(worst) {
                let _ = writeln!(
                    s,
                    "  {:<5} d={:<5} sigma_eta2={:<6} z={:.3} {}",
                    v.estimator.as_str(),
                    v.d,
                    v.sigma_eta2,
                    v.z.unwrap(),
                    if v.kind == VerdictKind::Fail { "FAIL" } else { "ok" }
                );
            }
        }
        s
    }
}

fn verdict(p: &RiskPoint, k: f64) -> (VerdictKind, Option<f64>) {
    let emp = p.empirical_mean.filter(|e| !e.is_nan());
    match (p.analytic, emp) {
        (None, _) => (VerdictKind::Skipped, None),
        (Some(a), e) if a.is_infinite() => match e {
            Some(e) if e.is_finite() => (VerdictKind::BandSkip, None),
            _ => (VerdictKind::BandPass, None),
        },
        (Some(_), None) => (VerdictKind::Skipped, None),
        (Some(a), Some(e)) => {
            let diff = (e - a).abs();
            let se = p.empirical_stderr.unwrap_or(0.0);
            let z = if diff == 0.0 { 0.0 } else { diff / se };
            let pass = diff <= k * se;
            (if pass { VerdictKind::Pass } else { VerdictKind::Fail }, Some(z))
        }
    }
}

pub fn compare(points: &[RiskPoint], tolerance_sigmas: f64) -> CompareReport {
    CompareReport {
        tolerance_sigmas,
        verdicts: points
            .iter()
            .map(|p| {
                let (kind, z) = verdict(p, tolerance_sigmas);
                Verdict {
                    d: p.d,
                    estimator: p.estimator,
                    sigma_eta2: p.sigma_eta2,
                    kind,
                    z,
                }
            })
            .collect(),
    }
}

type Key = (EstimatorId, u64, usize);

fn key(p: &RiskPoint) -> Key {
    (p.estimator, p.sigma_eta2.to_bits(), p.d)
}

/// Copies the analytic column of `analytic` onto the matching points of
/// `empirical`. Both tables must cover exactly the same grid.
pub fn join_analytic(empirical: &[RiskPoint], analytic: &[RiskPoint]) -> Result<Vec<RiskPoint>> {
    let mut by_key: BTreeMap<Key, &RiskPoint> = BTreeMap::new();
    for p in analytic {
        if by_key.insert(key(p), p).is_some() {
            return Err(Error::Join(format!("duplicate analytic row {} d={}", p.estimator, p.d)));
        }
    }
    if empirical.len() != by_key.len() {
        return Err(Error::Join(format!(
            "{} empirical rows but {} analytic rows",
            empirical.len(),
            by_key.len()
        )));
    }
    empirical
        .iter()
        .map(|p| {
            let a = by_key.get(&key(p)).ok_or_else(|| {
                Error::Join(format!(
                    "no analytic row for {} d={} sigma_eta2={}",
                    p.estimator, p.d, p.sigma_eta2
                ))
            })?;
            Ok(RiskPoint {
                analytic: a.analytic,
                ..p.clone()
            })
        })
        .collect()
}
