//! Monte Carlo sweeps with the matching analytic values attached.
//!
//! Trial `t` at `(d, σ_η² index)` draws from its own stream, and every
//! estimator in the cell is fitted on that same draw. Differences between
//! estimators are therefore paired, and the result does not depend on how
//! trials are scheduled across threads.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::analytic::{
    c_tl, isotropic_risk_asymptotic, mltn_risk, ridge_opt_risk_asymptotic, ridge_risk_semi_curve,
    tl_opt_risk_orthonormal_asymptotic, tl_risk_semi_curve, transfer_discrepancy_energy, Regime, SemiPath,
    SourceBranch, SpectralModel, SpectralRisk,
};
use crate::error::{Error, Result};
use crate::estimators::{
    alpha_from_c_tl, mltn_fit, optimal_alpha_ridge, optimal_alpha_tl, EstimatorId, LmmseModel, TlAlpha, TransferSystem,
};
use crate::harness::config::{AlphaMode, AnalyticMode, ExperimentConfig, MisspecPath};
use crate::harness::{sort_points, RiskPoint};
use crate::linalg::{stream_key, Matrix, Rng, Vector};
use crate::model::{
    empirical_risk, misspec_effective, sample_beta, sample_misspecified_trial, sample_source_dataset,
    sample_target_dataset, Dataset, EtaScaling, MisspecSpec, SourceSpec, TargetSpec, TaskRelation,
};
use crate::operators::{build_operator, OperatorMatrix, OperatorSpec};
use crate::stats::mean_se;

/// Stand-in for an optimal `α` of exactly zero, which the penalized solvers reject.
const ALPHA_FLOOR: f64 = 1e-12;

/// Stream of trial `t` at grid point `d` and noise level `eta_idx`.
pub fn trial_rng(cfg: &ExperimentConfig, d: usize, eta_idx: usize, t: usize) -> Rng {
    Rng::new(cfg.base_seed, stream_key(&[d as u64, eta_idx as u64, t as u64]))
}

fn semi_rng(cfg: &ExperimentConfig, d: usize, eta_idx: usize) -> Rng {
    Rng::new(cfg.base_seed, stream_key(&[d as u64, eta_idx as u64, u64::MAX]))
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    /// Sorted in CSV order.
    pub points: Vec<RiskPoint>,
    /// Per-trial risks keyed by `(d, σ_η² index, estimator)`, in trial order.
    pub trial_risks: BTreeMap<(usize, usize, EstimatorId), Vec<f64>>,
}

impl SweepResult {
    pub fn risks(&self, d: usize, eta_idx: usize, est: EstimatorId) -> Option<&[f64]> {
        self.trial_risks.get(&(d, eta_idx, est)).map(Vec::as_slice)
    }

    pub fn point(&self, d: usize, sigma_eta2: f64, est: EstimatorId) -> Option<&RiskPoint> {
        self.points
            .iter()
            .find(|p| p.d == d && p.sigma_eta2 == sigma_eta2 && p.estimator == est)
    }
}

/// The explicit misspecified world, sampled instead of its surrogate.
struct FullWorld {
    target: TargetSpec,
    relation: TaskRelation,
    spec: MisspecSpec,
    h_ms: Matrix,
}

/// Everything fixed at one `(d, σ_η²)`. `target` and `relation` are what the
/// learner believes, so with misspecification they are the effective ones.
struct Cell {
    d: usize,
    eta_idx: usize,
    sigma_eta2: f64,
    target: TargetSpec,
    relation: TaskRelation,
    source: SourceSpec,
    full: Option<FullWorld>,
}

struct Trial {
    beta: Vector,
    beta_ms: Option<Vector>,
    theta_hat: Vector,
    target: Dataset,
}

impl Cell {
    fn build(cfg: &ExperimentConfig, op: &Arc<OperatorMatrix>, d: usize, eta_idx: usize) -> Result<Cell> {
        let sigma_eta2 = cfg.sigma_eta2_list[eta_idx];
        let target = TargetSpec::new(d, cfg.n, cfg.sigma_eps2, cfg.b, cfg.sigma_x.covariance(d)?)?;
        let relation = TaskRelation::new(op.clone(), sigma_eta2)?;
        let source = SourceSpec::new(cfg.n_tilde, cfg.sigma_xi2)?;
        let Some(m) = &cfg.misspec else {
            return Ok(Cell {
                d,
                eta_idx,
                sigma_eta2,
                target,
                relation,
                source,
                full: None,
            });
        };
        let eff = misspec_effective(&target, &relation, &m.spec, m.eta_scaling)?;
        let full = match m.path {
            MisspecPath::Effective => None,
            MisspecPath::Full => {
                let per_vector = match m.eta_scaling {
                    EtaScaling::PerVector => sigma_eta2,
                    EtaScaling::PerCoordinate => sigma_eta2 * d as f64,
                };
                Some(FullWorld {
                    target,
                    relation: TaskRelation::new(op.clone(), per_vector)?,
                    spec: m.spec,
                    h_ms: m.spec.operator(d)?,
                })
            }
        };
        Ok(Cell {
            d,
            eta_idx,
            sigma_eta2,
            target: eff.target,
            relation: eff.relation,
            source,
            full,
        })
    }

    fn sample(&self, rng: &mut Rng) -> Result<Trial> {
        if let Some(w) = &self.full {
            let tr = sample_misspecified_trial(&w.target, &w.relation, &self.source, &w.spec, &w.h_ms, rng)?;
            let theta_hat = mltn_fit(&tr.source)?.beta_hat;
            return Ok(Trial {
                beta: tr.beta,
                beta_ms: Some(tr.beta_ms),
                theta_hat,
                target: tr.target,
            });
        }
        let beta = sample_beta(&self.target, rng);
        let source = sample_source_dataset(&beta, &self.relation, &self.source, rng)?;
        let target = sample_target_dataset(&beta, &self.target, rng)?;
        let theta_hat = mltn_fit(&source)?.beta_hat;
        Ok(Trial {
            beta,
            beta_ms: None,
            theta_hat,
            target,
        })
    }

    fn risk(&self, beta_hat: &Vector, trial: &Trial) -> Result<f64> {
        match (&self.full, &trial.beta_ms) {
            (Some(w), Some(bms)) => {
                let scale = w.target.sigma_x.isotropic_scale().ok_or(Error::ReductionNotValid)?;
                Ok(empirical_risk(beta_hat, &trial.beta, &w.target)? + scale * bms.norm_squared())
            }
            _ => empirical_risk(beta_hat, &trial.beta, &self.target),
        }
    }

    fn in_band(&self) -> bool {
        self.source.in_band(self.d)
    }

    fn regime(&self) -> Regime {
        Regime::from_dims(self.d, self.target.n, self.source.n_tilde)
    }

    fn dense_spectral(&self) -> Result<Option<SpectralRisk>> {
        SpectralRisk::new(
            SpectralModel::Dense {
                op: &self.relation.op,
                sigma_x: &self.target.sigma_x,
            },
            &self.regime(),
            self.target.b,
            self.relation.sigma_eta2,
            self.source.sigma_xi2,
        )
    }
}

#[derive(Clone, Debug)]
enum AlphaChoice {
    Fixed(f64),
    /// `α → 0` for ridge (the minimum-norm fit), `α → ∞` for transfer.
    Limit,
    Grid(Vec<f64>),
}

impl AlphaChoice {
    fn from_tl(a: TlAlpha) -> AlphaChoice {
        match a {
            TlAlpha::Finite(a) => AlphaChoice::Fixed(a.max(ALPHA_FLOOR)),
            TlAlpha::PureTransfer => AlphaChoice::Limit,
            TlAlpha::InfiniteBand => unreachable!("band handled by caller"),
        }
    }
}

fn ridge_choice(cfg: &ExperimentConfig, cell: &Cell) -> AlphaChoice {
    if let Some(g) = cfg.alpha_mode.grid_values() {
        return AlphaChoice::Grid(g);
    }
    let a = optimal_alpha_ridge(&cell.target);
    if a == 0.0 {
        AlphaChoice::Limit
    } else {
        AlphaChoice::Fixed(a)
    }
}

fn tl_choice(cfg: &ExperimentConfig, cell: &Cell) -> Result<AlphaChoice> {
    if let Some(g) = cfg.alpha_mode.grid_values() {
        return Ok(AlphaChoice::Grid(g));
    }
    let (t, s, rel) = (&cell.target, &cell.source, &cell.relation);
    if cell.in_band() {
        // every α has infinite risk here; borrow the tuning of the nearest regular d
        let nt = s.n_tilde;
        let near = if cell.d + 1 == nt && nt > 2 { nt - 2 } else { nt + 2 };
        let c = c_tl(near, nt, rel.sigma_eta2, s.sigma_xi2, t.b);
        return Ok(AlphaChoice::from_tl(alpha_from_c_tl(t.sigma_eps2, t.n, c)));
    }
    match optimal_alpha_tl(t, s, rel) {
        Ok(a) => Ok(AlphaChoice::from_tl(a)),
        Err(Error::OutOfScope(_)) => {
            let sr = cell
                .dense_spectral()?
                .ok_or_else(|| Error::OutOfScope(format!("no finite risk at d = {}", cell.d)))?;
            Ok(AlphaChoice::Fixed(sr.argmin_alpha(t.sigma_eps2)?.0.max(ALPHA_FLOOR)))
        }
        Err(e) => Err(e),
    }
}

enum Plan {
    Mltn,
    Ridge(AlphaChoice),
    Tl(AlphaChoice),
    /// `None` on the source band.
    Lmmse(Option<LmmseModel>),
}

fn build_plans(cfg: &ExperimentConfig, cell: &Cell) -> Result<Vec<(EstimatorId, Plan)>> {
    cfg.estimators
        .iter()
        .map(|&id| {
            let plan = match id {
                EstimatorId::Mltn => Plan::Mltn,
                EstimatorId::Ridge => Plan::Ridge(ridge_choice(cfg, cell)),
                EstimatorId::Tl => Plan::Tl(tl_choice(cfg, cell)?),
                EstimatorId::Lmmse => Plan::Lmmse(if cell.in_band() {
                    None
                } else {
                    Some(LmmseModel::with_form(
                        &cell.target,
                        &cell.source,
                        &cell.relation,
                        cfg.lmmse_moments,
                    )?)
                }),
            };
            Ok((id, plan))
        })
        .collect()
}

/// Risks of every planned estimator on one draw; one entry per `α` for grids.
fn eval_trial(cell: &Cell, plans: &[(EstimatorId, Plan)], rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
    let trial = cell.sample(rng)?;
    let ds = &trial.target;
    let op = &cell.relation.op;
    let mut mltn: Option<Vector> = None;
    let mut min_norm = |ds: &Dataset| -> Result<Vector> {
        if mltn.is_none() {
            mltn = Some(mltn_fit(ds)?.beta_hat);
        }
        Ok(mltn.clone().unwrap())
    };
    let mut out = Vec::with_capacity(plans.len());
    for (_, plan) in plans {
        let risks = match plan {
            Plan::Mltn => vec![cell.risk(&min_norm(ds)?, &trial)?],
            Plan::Ridge(AlphaChoice::Limit) => vec![cell.risk(&min_norm(ds)?, &trial)?],
            Plan::Ridge(AlphaChoice::Fixed(a)) => {
                vec![cell.risk(&TransferSystem::new(ds, None, None)?.solve(*a)?, &trial)?]
            }
            Plan::Tl(AlphaChoice::Limit) => vec![cell.risk(&(op.inverse() * &trial.theta_hat), &trial)?],
            Plan::Tl(AlphaChoice::Fixed(a)) => {
                let sys = TransferSystem::new(ds, Some(&trial.theta_hat), Some(op))?;
                vec![cell.risk(&sys.solve(*a)?, &trial)?]
            }
            Plan::Ridge(AlphaChoice::Grid(g)) | Plan::Tl(AlphaChoice::Grid(g)) => {
                let sys = match plan {
                    Plan::Tl(_) => TransferSystem::new(ds, Some(&trial.theta_hat), Some(op))?,
                    _ => TransferSystem::new(ds, None, None)?,
                };
                g.iter()
                    .map(|&a| cell.risk(&sys.solve(a)?, &trial))
                    .collect::<Result<_>>()?
            }
            Plan::Lmmse(Some(model)) => vec![cell.risk(&model.fit(ds, &trial.theta_hat)?.beta_hat, &trial)?],
            Plan::Lmmse(None) => Vec::new(),
        };
        out.push(risks);
    }
    Ok(out)
}

fn map_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(f).collect()
    }
}

/// Analytic value for an estimator fitted at `alpha` (`None`: the `α` limit of
/// [`AlphaChoice::Limit`]).
fn analytic_value(cfg: &ExperimentConfig, cell: &Cell, id: EstimatorId, alpha: Option<f64>) -> Result<Option<f64>> {
    let (t, s, rel) = (&cell.target, &cell.source, &cell.relation);
    let regime = cell.regime();
    let iso = t.sigma_x.is_identity();
    let optimal = cfg.alpha_mode == AlphaMode::Optimal;
    let semi = cfg.analytic_mode == AnalyticMode::Semi;
    let rng = semi_rng(cfg, cell.d, cell.eta_idx);
    Ok(match id {
        EstimatorId::Mltn => iso.then(|| mltn_risk(t.d, t.n, t.sigma_eps2, t.b)),
        EstimatorId::Lmmse => (regime.branch == SourceBranch::Band).then_some(f64::INFINITY),
        EstimatorId::Ridge if !iso => None,
        EstimatorId::Ridge => Some(match alpha {
            None => {
                if semi {
                    mltn_risk(t.d, t.n, t.sigma_eps2, t.b)
                } else {
                    ridge_opt_risk_asymptotic(regime.gamma_tgt, t.sigma_eps2, t.b)
                }
            }
            Some(a) if semi => ridge_risk_semi_curve(t, &[a], cfg.ensemble_draws, &rng)?[0].mean,
            Some(_) if optimal => ridge_opt_risk_asymptotic(regime.gamma_tgt, t.sigma_eps2, t.b),
            Some(a) => isotropic_risk_asymptotic(regime.gamma_tgt, t.sigma_eps2, t.b, a)?,
        }),
        EstimatorId::Tl => {
            if regime.branch == SourceBranch::Band {
                return Ok(Some(f64::INFINITY));
            }
            let a = match alpha {
                Some(a) if a.is_finite() => a,
                _ => return Ok(Some(t.sigma_eps2)),
            };
            if semi {
                match tl_risk_semi_curve(t, s, rel, &[a], cfg.ensemble_draws, &rng, SemiPath::Auto) {
                    Ok(v) => Some(v[0].mean),
                    Err(Error::OutOfScope(_)) => None,
                    Err(e) => return Err(e),
                }
            } else if rel.op.is_orthonormal() && iso {
                let (se, sh, sx) = (t.sigma_eps2, rel.sigma_eta2, s.sigma_xi2);
                if optimal {
                    Some(tl_opt_risk_orthonormal_asymptotic(&regime, se, sh, sx, t.b))
                } else {
                    let g0 = transfer_discrepancy_energy(&regime, sh, sx, t.b);
                    Some(isotropic_risk_asymptotic(regime.gamma_tgt, se, g0, a)?)
                }
            } else {
                match cell.dense_spectral()? {
                    Some(sr) => Some(sr.risk(t.sigma_eps2, a)?),
                    None => Some(f64::INFINITY),
                }
            }
        }
    })
}

fn alpha_of(choice: &AlphaChoice, id: EstimatorId) -> Option<f64> {
    match choice {
        AlphaChoice::Fixed(a) => Some(*a),
        AlphaChoice::Limit if id == EstimatorId::Tl => Some(f64::INFINITY),
        AlphaChoice::Limit => Some(0.0),
        AlphaChoice::Grid(_) => None,
    }
}

fn cells(cfg: &ExperimentConfig) -> Result<Vec<Cell>> {
    let mut out = Vec::new();
    for &d in &cfg.d_grid {
        let op = Arc::new(build_operator(OperatorSpec { kind: cfg.operator, d })?);
        for eta_idx in 0..cfg.sigma_eta2_list.len() {
            out.push(Cell::build(cfg, &op, d, eta_idx)?);
        }
    }
    Ok(out)
}

/// Runs every `(d, σ_η², estimator)` cell with `workers` threads. The output
/// does not depend on `workers`.
pub fn run_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<SweepResult> {
    cfg.validate()?;
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| sweep_inner(cfg))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        sweep_inner(cfg)
    }
}

fn sweep_inner(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let mut points = Vec::new();
    let mut trial_risks = BTreeMap::new();
    for cell in cells(cfg)? {
        let plans = build_plans(cfg, &cell)?;
        let per_trial = map_trials(cfg.trials, |t| {
            let mut rng = trial_rng(cfg, cell.d, cell.eta_idx, t);
            eval_trial(&cell, &plans, &mut rng)
        })?;
        for (k, (id, plan)) in plans.iter().enumerate() {
            let mut p = RiskPoint::new(cell.d, cfg.n, cfg.n_tilde, *id, cell.sigma_eta2);
            let width = per_trial.first().map_or(0, |r| r[k].len());
            if width == 0 {
                // LMMSE on the source band
                p.analytic = analytic_value(cfg, &cell, *id, None)?;
                points.push(p);
                continue;
            }
            let columns: Vec<Vec<f64>> = (0..width)
                .map(|j| per_trial.iter().map(|r| r[k][j]).collect())
                .collect();
            let best = if width == 1 {
                0
            } else {
                let means: Vec<f64> = columns.iter().map(|c| mean_se(c).mean).collect();
                (0..width).fold(0, |b, j| if means[j] < means[b] { j } else { b })
            };
            let stats = mean_se(&columns[best]);
            p.alpha_used = match plan {
                Plan::Ridge(AlphaChoice::Grid(g)) | Plan::Tl(AlphaChoice::Grid(g)) => Some(g[best]),
                Plan::Ridge(c) | Plan::Tl(c) => alpha_of(c, *id),
                _ => None,
            };
            p.empirical_mean = Some(stats.mean);
            p.empirical_stderr = Some(stats.stderr);
            let analytic_alpha = match p.alpha_used {
                Some(a) if a == 0.0 || a.is_infinite() => None,
                other => other,
            };
            p.analytic = analytic_value(cfg, &cell, *id, analytic_alpha)?;
            trial_risks.insert((cell.d, cell.eta_idx, *id), columns.into_iter().nth(best).unwrap());
            points.push(p);
        }
    }
    sort_points(&mut points);
    Ok(SweepResult { points, trial_risks })
}

/// Formula-only table: the same grid and `α` rules as [`run_sweep`] with no
/// sampling. In grid mode the `α` minimizing the analytic value is reported.
pub fn analytic_table(cfg: &ExperimentConfig) -> Result<Vec<RiskPoint>> {
    cfg.validate()?;
    let mut points = Vec::new();
    for cell in cells(cfg)? {
        for &id in &cfg.estimators {
            let mut p = RiskPoint::new(cell.d, cfg.n, cfg.n_tilde, id, cell.sigma_eta2);
            let choice = match id {
                EstimatorId::Ridge => Some(ridge_choice(cfg, &cell)),
                EstimatorId::Tl => Some(tl_choice(cfg, &cell)?),
                _ => None,
            };
            match choice {
                Some(AlphaChoice::Grid(g)) => {
                    let mut best: Option<(f64, f64)> = None;
                    for &a in &g {
                        if let Some(v) = analytic_value(cfg, &cell, id, Some(a))? {
                            if best.is_none_or(|(_, bv)| v < bv) {
                                best = Some((a, v));
                            }
                        }
                    }
                    if let Some((a, v)) = best {
                        p.alpha_used = Some(a);
                        p.analytic = Some(v);
                    }
                }
                Some(c) => {
                    p.alpha_used = alpha_of(&c, id);
                    let a = match p.alpha_used {
                        Some(a) if a == 0.0 || a.is_infinite() => None,
                        other => other,
                    };
                    p.analytic = analytic_value(cfg, &cell, id, a)?;
                }
                None => p.analytic = analytic_value(cfg, &cell, id, None)?,
            }
            points.push(p);
        }
    }
    sort_points(&mut points);
    Ok(points)
}
