//! Minimum-norm, transfer, ridge and linear-MMSE estimators of `β`.

use std::fmt;
use std::str::FromStr;

use crate::analytic::c_tl;
use crate::error::{Error, Result};
use crate::linalg::{
    gram_cols, gram_rows, min_norm_solve, solve_spd, solve_spd_matrix, sym_eigenvalues, Matrix, Vector,
};
use crate::model::{Dataset, SourceSpec, TargetSpec, TaskRelation};
use crate::operators::OperatorMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorId {
    Lmmse,
    Mltn,
    Ridge,
    Tl,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 4] = [
        EstimatorId::Lmmse,
        EstimatorId::Mltn,
        EstimatorId::Ridge,
        EstimatorId::Tl,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorId::Mltn => "mltn",
            EstimatorId::Tl => "tl",
            EstimatorId::Ridge => "ridge",
            EstimatorId::Lmmse => "lmmse",
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mltn" => Ok(EstimatorId::Mltn),
            "tl" => Ok(EstimatorId::Tl),
            "ridge" => Ok(EstimatorId::Ridge),
            "lmmse" => Ok(EstimatorId::Lmmse),
            other => Err(Error::InvalidParameter(format!("unknown estimator `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Estimate {
    pub beta_hat: Vector,
    pub id: EstimatorId,
    pub alpha: Option<f64>,
}

/// `X⁺y`. Also produces the source solution `θ̂ = Z⁺v`.
pub fn mltn_fit(ds: &Dataset) -> Result<Estimate> {
    Ok(Estimate {
        beta_hat: min_norm_solve(&ds.design, &ds.responses)?,
        id: EstimatorId::Mltn,
        alpha: None,
    })
}

/// Factors of `min ‖y - Xβ‖²/n + α ‖Hβ - θ̂‖²` that do not depend on `α`, so
/// that an `α` scan costs one small factorization per value.
///
/// `H = None` with `θ̂ = 0` is ridge.
pub struct TransferSystem<'a> {
    n: f64,
    op: Option<&'a OperatorMatrix>,
    form: Form,
}

enum Form {
    /// `(G + nα HᵀH) β = Xᵀy + nα Hᵀθ̂`.
    Primal {
        g: Matrix,
        xty: Vector,
        hth: Option<Matrix>,
        htt: Vector,
    },
    /// `u = c + Aᵀ(AAᵀ + nαI)⁻¹(y - Ac)`; for general `H`, `A = XH⁻¹`, `c = θ̂`, `β = H⁻¹u`.
    Dual {
        a: Matrix,
        k: Matrix,
        resid: Vector,
        center: Vector,
        back: bool,
    },
}

impl<'a> TransferSystem<'a> {
    pub fn new(ds: &Dataset, theta_hat: Option<&Vector>, op: Option<&'a OperatorMatrix>) -> Result<Self> {
        let (n, d) = (ds.samples(), ds.dim());
        if let Some(t) = theta_hat {
            if t.len() != d {
                return Err(Error::Shape(format!("theta_hat has length {} but d = {d}", t.len())));
            }
        }
        if let Some(h) = op {
            if h.d() != d {
                return Err(Error::Shape(format!("H is {0}x{0} but d = {d}", h.d())));
            }
        }
        let theta = theta_hat.cloned().unwrap_or_else(|| Vector::zeros(d));
        let form = if d > n {
            // orthonormal H turns the penalty into ‖β - Hᵀθ̂‖², so stay in β coordinates
            let (a, center, back) = match op {
                Some(h) if !h.is_orthonormal() => (&ds.design * h.inverse(), theta, true),
                Some(h) => (ds.design.clone(), h.h.tr_mul(&theta), false),
                None => (ds.design.clone(), theta, false),
            };
            let k = gram_rows(&a);
            let resid = &ds.responses - &a * &center;
            Form::Dual {
                a,
                k,
                resid,
                center,
                back,
            }
        } else {
            let g = gram_cols(&ds.design);
            let xty = ds.design.tr_mul(&ds.responses);
            let (hth, htt) = match op {
                Some(h) if h.is_orthonormal() => (None, h.h.tr_mul(&theta)),
                Some(h) => (Some(gram_cols(&h.h)), h.h.tr_mul(&theta)),
                None => (None, theta),
            };
            Form::Primal { g, xty, hth, htt }
        };
        Ok(TransferSystem { n: n as f64, op, form })
    }

    pub fn solve(&self, alpha: f64) -> Result<Vector> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        let na = self.n * alpha;
        match &self.form {
            Form::Primal { g, xty, hth, htt } => {
                let mut sys = g.clone();
                match hth {
                    Some(m) => sys += m * na,
                    None => {
                        for i in 0..sys.nrows() {
                            sys[(i, i)] += na;
                        }
                    }
                }
                Ok(solve_spd(&sys, &(xty + htt * na))?.x)
            }
            Form::Dual {
                a,
                k,
                resid,
                center,
                back,
            } => {
                let mut sys = k.clone();
                for i in 0..sys.nrows() {
                    sys[(i, i)] += na;
                }
                let u = center + a.tr_mul(&solve_spd(&sys, resid)?.x);
                Ok(match (self.op, back) {
                    (Some(h), true) => h.inverse() * u,
                    _ => u,
                })
            }
        }
    }
}

/// `(XᵀX + nα HᵀH)⁻¹ (Xᵀy + nα Hᵀθ̂)`.
pub fn tl_fit(ds: &Dataset, theta_hat: &Vector, op: &OperatorMatrix, alpha: f64) -> Result<Estimate> {
    let beta_hat = TransferSystem::new(ds, Some(theta_hat), Some(op))?.solve(alpha)?;
    Ok(Estimate {
        beta_hat,
        id: EstimatorId::Tl,
        alpha: Some(alpha),
    })
}

/// `α → ∞` limit of the transfer fit: `H⁻¹θ̂`.
pub fn tl_transfer_limit(theta_hat: &Vector, op: &OperatorMatrix) -> Result<Estimate> {
    if theta_hat.len() != op.d() {
        return Err(Error::Shape(format!(
            "theta_hat has length {} but H is {1}x{1}",
            theta_hat.len(),
            op.d()
        )));
    }
    Ok(Estimate {
        beta_hat: op.inverse() * theta_hat,
        id: EstimatorId::Tl,
        alpha: Some(f64::INFINITY),
    })
}

/// `(XᵀX + nα I)⁻¹ Xᵀy`.
pub fn ridge_fit(ds: &Dataset, alpha: f64) -> Result<Estimate> {
    let beta_hat = TransferSystem::new(ds, None, None)?.solve(alpha)?;
    Ok(Estimate {
        beta_hat,
        id: EstimatorId::Ridge,
        alpha: Some(alpha),
    })
}

/// Optimal transfer strength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TlAlpha {
    Finite(f64),
    /// The source is exact; use [`tl_transfer_limit`].
    PureTransfer,
    /// `d` sits in the source interpolation band where every `α` gives infinite risk.
    InfiniteBand,
}

/// `σ_ε² / (n C)`.
pub fn alpha_from_c_tl(sigma_eps2: f64, n: usize, c: f64) -> TlAlpha {
    if c.is_infinite() {
        TlAlpha::InfiniteBand
    } else if c == 0.0 {
        TlAlpha::PureTransfer
    } else {
        TlAlpha::Finite(sigma_eps2 / (n as f64 * c))
    }
}

/// Optimal `α` for orthonormal `H` with isotropic features, or for any `H` and
/// `Σ_x` while the source is underparameterized.
pub fn optimal_alpha_tl(t: &TargetSpec, s: &SourceSpec, rel: &TaskRelation) -> Result<TlAlpha> {
    let d = t.d;
    if rel.d() != d {
        return Err(Error::Shape(format!("H is {0}x{0} but d = {d}", rel.d())));
    }
    let isotropic = rel.op.is_orthonormal() && t.sigma_x.is_identity();
    if !isotropic && d + 2 > s.n_tilde {
        return Err(Error::OutOfScope(format!(
            "no closed-form optimum for general H with d = {d} >= n_tilde - 1 = {}",
            s.n_tilde as i64 - 1
        )));
    }
    Ok(alpha_from_c_tl(
        t.sigma_eps2,
        t.n,
        c_tl(d, s.n_tilde, rel.sigma_eta2, s.sigma_xi2, t.b),
    ))
}

/// `d σ_ε² / (n b)`.
pub fn optimal_alpha_ridge(t: &TargetSpec) -> f64 {
    t.d as f64 * t.sigma_eps2 / (t.n as f64 * t.b)
}

/// Which moment formula supplies `E[θ̂θ̂ᵀ]` for an overparameterized source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SourceMomentForm {
    /// Exact second moments of a uniformly random rank-`ñ` projection.
    #[default]
    Exact,
    /// Coefficients `(ñ+1)/(d+1)` and `(d-ñ)/(d²-1)` on `K` and `diag(tr K - k_jj)`.
    Printed,
}

/// Second moments of `(β, θ̂)` at one resolution, reduced to the pieces the
/// estimator needs: `E[β | θ̂] = G θ̂` and the residual covariance `S`.
#[derive(Clone, Debug)]
pub struct LmmseModel {
    /// `E[βθ̂ᵀ]`.
    pub cross: Matrix,
    /// `E[θ̂θ̂ᵀ]`.
    pub theta_cov: Matrix,
    gain: Matrix,
    residual_cov: Matrix,
    sigma_eps2: f64,
}

impl LmmseModel {
    pub fn new(t: &TargetSpec, s: &SourceSpec, rel: &TaskRelation) -> Result<Self> {
        LmmseModel::with_form(t, s, rel, SourceMomentForm::Exact)
    }

    pub fn with_form(t: &TargetSpec, s: &SourceSpec, rel: &TaskRelation, form: SourceMomentForm) -> Result<Self> {
        let d = t.d;
        if rel.d() != d {
            return Err(Error::Shape(format!("H is {0}x{0} but d = {d}", rel.d())));
        }
        if s.in_band(d) {
            return Err(Error::InfiniteCovariance { d, n_tilde: s.n_tilde });
        }
        let (df, nt) = (d as f64, s.n_tilde as f64);
        let prior = t.b / df;
        let h = &rel.op.h;
        let k = gram_rows(h) * prior;
        let eta = rel.sigma_eta2 / df;
        let (scale, theta_cov) = if d + 2 <= s.n_tilde {
            let mut c = k;
            let add = eta + s.sigma_xi2 / (nt - df - 1.0);
            for i in 0..d {
                c[(i, i)] += add;
            }
            (1.0, c)
        } else {
            let r = nt;
            let mut c = match form {
                SourceMomentForm::Exact => {
                    // E[P a aᵀ P] = (p + q) aaᵀ + q ‖a‖² I for a uniform rank-r projection P
                    let q = r * (df - r) / (df * (df - 1.0) * (df + 2.0));
                    let p_plus_q = r / df - df * q;
                    let mut c = &k * p_plus_q;
                    let tr = k.trace() + df * eta;
                    for i in 0..d {
                        c[(i, i)] += p_plus_q * eta + q * tr;
                    }
                    c
                }
                SourceMomentForm::Printed => {
                    let tr = k.trace();
                    let mut c = &k * ((r + 1.0) / (df + 1.0));
                    for i in 0..d {
                        c[(i, i)] += (df - r) / (df * df - 1.0) * (tr - k[(i, i)]) + eta;
                    }
                    c * (r / df)
                }
            };
            let noise = (r / df) * s.sigma_xi2 / (df - r - 1.0);
            for i in 0..d {
                c[(i, i)] += noise;
            }
            (r / df, c)
        };
        let theta_cov = (&theta_cov + theta_cov.transpose()) * 0.5;
        let cross = h.transpose() * (prior * scale);
        let chol = nalgebra::Cholesky::new(theta_cov.clone()).ok_or_else(|| Error::JointCovarianceSingular {
            min_eigenvalue: sym_eigenvalues(&theta_cov).min(),
        })?;
        // G = Cβθ Cθθ⁻¹, S = B - G Cθβ
        let gain = chol.solve(&cross.transpose()).transpose();
        let mut residual_cov = &gain * cross.transpose() * -1.0;
        for i in 0..d {
            residual_cov[(i, i)] += prior;
        }
        let residual_cov = (&residual_cov + residual_cov.transpose()) * 0.5;
        Ok(LmmseModel {
            cross,
            theta_cov,
            gain,
            residual_cov,
            sigma_eps2: t.sigma_eps2,
        })
    }

    /// `[B Xᵀ, E[βθ̂ᵀ]] M⁻¹ (y; θ̂)`, evaluated through the Schur complement of `E[θ̂θ̂ᵀ]` in `M`.
    pub fn fit(&self, ds: &Dataset, theta_hat: &Vector) -> Result<Estimate> {
        let d = self.gain.nrows();
        if ds.dim() != d || theta_hat.len() != d {
            return Err(Error::Shape(format!(
                "model has d = {d}, data has {} columns, theta_hat has length {}",
                ds.dim(),
                theta_hat.len()
            )));
        }
        let x = &ds.design;
        let m0 = &self.gain * theta_hat;
        let sx = &self.residual_cov * x.transpose();
        let mut schur = x * &sx;
        for i in 0..schur.nrows() {
            schur[(i, i)] += self.sigma_eps2;
        }
        let schur = (&schur + schur.transpose()) * 0.5;
        let innov = &ds.responses - x * &m0;
        let z = match nalgebra::Cholesky::new(schur.clone()) {
            Some(ch) => ch.solve(&innov),
            None => {
                // fall back to the jittered solve; a genuinely singular M is reported
                let sol = solve_spd_matrix(&schur, &Matrix::from_column_slice(innov.len(), 1, innov.as_slice()))
                    .map_err(|_| Error::JointCovarianceSingular {
                        min_eigenvalue: sym_eigenvalues(&schur).min(),
                    })?;
                sol.x.column(0).into_owned()
            }
        };
        Ok(Estimate {
            beta_hat: m0 + sx * z,
            id: EstimatorId::Lmmse,
            alpha: None,
        })
    }
}

/// One-shot LMMSE; sweeps should build an [`LmmseModel`] once per resolution instead.
pub fn lmmse_fit(
    ds: &Dataset,
    theta_hat: &Vector,
    rel: &TaskRelation,
    t: &TargetSpec,
    s: &SourceSpec,
) -> Result<Estimate> {
    LmmseModel::new(t, s, rel)?.fit(ds, theta_hat)
}
