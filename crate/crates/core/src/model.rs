//! Generative model for the source and target tasks, and the map from a
//! misspecified setting to its effective well-specified surrogate.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{sample_gaussian_matrix, Covariance, Matrix, Rng, Vector};
use crate::operators::{dct2_matrix, OperatorMatrix};

/// Target-task law: `y = xᵀβ + ε`, `x ~ N(0, Σ_x)`, `β ~ N(0, (b/d) I)`.
#[derive(Clone, Debug)]
pub struct TargetSpec {
    pub d: usize,
    pub n: usize,
    pub sigma_eps2: f64,
    pub b: f64,
    pub sigma_x: Covariance,
}

impl TargetSpec {
    pub fn new(d: usize, n: usize, sigma_eps2: f64, b: f64, sigma_x: Covariance) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::EmptyDimension);
        }
        if !(sigma_eps2.is_finite() && sigma_eps2 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_eps2 must be >= 0, got {sigma_eps2}"
            )));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!("b must be > 0, got {b}")));
        }
        if sigma_x.dim() != d {
            return Err(Error::Shape(format!(
                "Sigma_x has dimension {} but d = {d}",
                sigma_x.dim()
            )));
        }
        Ok(TargetSpec {
            d,
            n,
            sigma_eps2,
            b,
            sigma_x,
        })
    }

    /// Isotropic features, the common case.
    pub fn isotropic(d: usize, n: usize, sigma_eps2: f64, b: f64) -> Result<Self> {
        TargetSpec::new(d, n, sigma_eps2, b, Covariance::identity(d))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceSpec {
    pub n_tilde: usize,
    pub sigma_xi2: f64,
}

impl SourceSpec {
    pub fn new(n_tilde: usize, sigma_xi2: f64) -> Result<Self> {
        if n_tilde == 0 {
            return Err(Error::EmptyDimension);
        }
        if !(sigma_xi2.is_finite() && sigma_xi2 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_xi2 must be >= 0, got {sigma_xi2}"
            )));
        }
        Ok(SourceSpec { n_tilde, sigma_xi2 })
    }

    /// True for `d ∈ {ñ-1, ñ, ñ+1}`, where the source solution has infinite second moment.
    pub fn in_band(&self, d: usize) -> bool {
        d + 1 >= self.n_tilde && d <= self.n_tilde + 1
    }
}

/// `θ = Hβ + η` with `η ~ N(0, (σ_η²/d) I)`; `sigma_eta2` is the per-vector energy.
#[derive(Clone, Debug)]
pub struct TaskRelation {
    pub op: Arc<OperatorMatrix>,
    pub sigma_eta2: f64,
}

impl TaskRelation {
    pub fn new(op: Arc<OperatorMatrix>, sigma_eta2: f64) -> Result<Self> {
        if !(sigma_eta2.is_finite() && sigma_eta2 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_eta2 must be >= 0, got {sigma_eta2}"
            )));
        }
        Ok(TaskRelation { op, sigma_eta2 })
    }

    pub fn d(&self) -> usize {
        self.op.d()
    }
}

/// Ignored features: `q` of them, carrying energy `ω (1 + d/n)^(-a)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MisspecSpec {
    pub q: usize,
    pub a: f64,
    pub rho: f64,
    pub omega_beta_all: f64,
}

impl MisspecSpec {
    pub fn new(q: usize, a: f64, rho: f64, omega_beta_all: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("q must be >= 1".into()));
        }
        if !(a > 0.0 && rho >= 0.0 && omega_beta_all > 0.0)
            || !(a.is_finite() && rho.is_finite() && omega_beta_all.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "need a > 0, rho >= 0, omega > 0; got a = {a}, rho = {rho}, omega = {omega_beta_all}"
            )));
        }
        Ok(MisspecSpec {
            q,
            a,
            rho,
            omega_beta_all,
        })
    }

    /// `E‖β_ms‖²` at resolution `d` with `n` target samples.
    pub fn ms_energy(&self, d: usize, n: usize) -> f64 {
        self.omega_beta_all * (1.0 + d as f64 / n as f64).powf(-self.a)
    }

    /// Per-coordinate variance of `β_ms`.
    pub fn b_ms(&self, d: usize, n: usize) -> f64 {
        self.ms_energy(d, n) / self.q as f64
    }

    /// `H_ms`: the first `d` rows of a `q x q` orthonormal basis, scaled so `H_ms H_msᵀ = ρ I`.
    pub fn operator(&self, d: usize) -> Result<Matrix> {
        if self.q < d {
            return Err(Error::InvalidParameter(format!(
                "full misspecified path needs q >= d, got q = {}, d = {d}",
                self.q
            )));
        }
        let basis = dct2_matrix(self.q);
        Ok(basis.rows(0, d).into_owned() * self.rho.sqrt())
    }
}

/// How the misspecification term enters the relation noise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EtaScaling {
    /// Per-coordinate variance `σ_η²/d + b_ms ρ`.
    #[default]
    PerVector,
    /// Per-coordinate variance `σ_η² + b_ms ρ`.
    PerCoordinate,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub design: Matrix,
    pub responses: Vector,
    /// The parameter that generated the responses (β for the target, θ for the source).
    pub truth: Vector,
}

impl Dataset {
    pub fn new(design: Matrix, responses: Vector, truth: Vector) -> Result<Self> {
        if design.nrows() != responses.len() || design.ncols() != truth.len() {
            return Err(Error::Shape(format!(
                "design {}x{}, responses {}, truth {}",
                design.nrows(),
                design.ncols(),
                responses.len(),
                truth.len()
            )));
        }
        Ok(Dataset {
            design,
            responses,
            truth,
        })
    }

    pub fn samples(&self) -> usize {
        self.design.nrows()
    }

    pub fn dim(&self) -> usize {
        self.design.ncols()
    }
}

pub fn sample_beta(t: &TargetSpec, rng: &mut Rng) -> Vector {
    rng.normal_vector(t.d) * (t.b / t.d as f64).sqrt()
}

pub fn sample_theta(beta: &Vector, rel: &TaskRelation, rng: &mut Rng) -> Result<Vector> {
    let d = rel.d();
    if beta.len() != d {
        return Err(Error::Shape(format!("beta has length {} but H is {d}x{d}", beta.len())));
    }
    let eta = rng.normal_vector(d) * (rel.sigma_eta2 / d as f64).sqrt();
    Ok(&rel.op.h * beta + eta)
}

/// Draws `θ` from `β`, then `Z` and `v = Zθ + ξ`. The dataset's truth is `θ`.
pub fn sample_source_dataset(beta: &Vector, rel: &TaskRelation, s: &SourceSpec, rng: &mut Rng) -> Result<Dataset> {
    let theta = sample_theta(beta, rel, rng)?;
    source_from_theta(theta, s, rng)
}

pub(crate) fn source_from_theta(theta: Vector, s: &SourceSpec, rng: &mut Rng) -> Result<Dataset> {
    let d = theta.len();
    let z = rng.normal_matrix(s.n_tilde, d);
    let xi = rng.normal_vector(s.n_tilde) * s.sigma_xi2.sqrt();
    let v = &z * &theta + xi;
    Dataset::new(z, v, theta)
}

pub fn sample_target_dataset(beta: &Vector, t: &TargetSpec, rng: &mut Rng) -> Result<Dataset> {
    if beta.len() != t.d {
        return Err(Error::Shape(format!("beta has length {} but d = {}", beta.len(), t.d)));
    }
    let x = sample_gaussian_matrix(t.n, t.d, &t.sigma_x, rng)?;
    let eps = rng.normal_vector(t.n) * t.sigma_eps2.sqrt();
    let y = &x * beta + eps;
    Dataset::new(x, y, beta.clone())
}

/// `σ_ε² + (β̂ - β)ᵀ Σ_x (β̂ - β)`.
pub fn empirical_risk(beta_hat: &Vector, beta: &Vector, t: &TargetSpec) -> Result<f64> {
    if beta_hat.len() != beta.len() || beta.len() != t.d {
        return Err(Error::Shape(format!(
            "beta_hat {}, beta {}, d {}",
            beta_hat.len(),
            beta.len(),
            t.d
        )));
    }
    Ok(t.sigma_eps2 + t.sigma_x.quad_form(&(beta_hat - beta)))
}

/// Well-specified surrogate of a misspecified setting.
#[derive(Clone, Debug)]
pub struct EffectiveModel {
    pub target: TargetSpec,
    pub relation: TaskRelation,
    /// `E‖β_ms‖²`.
    pub ms_energy: f64,
    pub b_ms: f64,
}

/// Folds the ignored features into the target noise and the relation noise.
/// The prior energy of `β` becomes `ω - E‖β_ms‖²`, whatever `t.b` says.
pub fn misspec_effective(
    t: &TargetSpec,
    rel: &TaskRelation,
    m: &MisspecSpec,
    scaling: EtaScaling,
) -> Result<EffectiveModel> {
    let scale = t.sigma_x.isotropic_scale().ok_or(Error::ReductionNotValid)?;
    let d = t.d;
    let ms_energy = m.ms_energy(d, t.n);
    let b_ms = m.b_ms(d, t.n);
    let eta_per_coord = match scaling {
        EtaScaling::PerVector => rel.sigma_eta2 / d as f64,
        EtaScaling::PerCoordinate => rel.sigma_eta2,
    } + b_ms * m.rho;
    let target = TargetSpec::new(
        d,
        t.n,
        t.sigma_eps2 + scale * ms_energy,
        m.omega_beta_all - ms_energy,
        t.sigma_x.clone(),
    )?;
    let relation = TaskRelation::new(rel.op.clone(), eta_per_coord * d as f64)?;
    Ok(EffectiveModel {
        target,
        relation,
        ms_energy,
        b_ms,
    })
}

/// One draw of the full misspecified world, restricted to what the learner sees.
#[derive(Clone, Debug)]
pub struct MisspecTrial {
    pub beta: Vector,
    pub beta_ms: Vector,
    pub source: Dataset,
    pub target: Dataset,
}

/// Samples `β`, `β_ms`, `θ = Hβ + H_ms β_ms + η`, the source data, and target data
/// `y = Xβ + X_ms β_ms + ε`. `t.b` is replaced by the effective split of `ω`.
pub fn sample_misspecified_trial(
    t: &TargetSpec,
    rel: &TaskRelation,
    s: &SourceSpec,
    m: &MisspecSpec,
    h_ms: &Matrix,
    rng: &mut Rng,
) -> Result<MisspecTrial> {
    let scale = t.sigma_x.isotropic_scale().ok_or(Error::ReductionNotValid)?;
    let d = t.d;
    if h_ms.nrows() != d || h_ms.ncols() != m.q {
        return Err(Error::Shape(format!(
            "H_ms is {}x{}, need {d}x{}",
            h_ms.nrows(),
            h_ms.ncols(),
            m.q
        )));
    }
    let ms_energy = m.ms_energy(d, t.n);
    let b = m.omega_beta_all - ms_energy;
    let beta = rng.normal_vector(d) * (b / d as f64).sqrt();
    let beta_ms = rng.normal_vector(m.q) * m.b_ms(d, t.n).sqrt();
    let eta = rng.normal_vector(d) * (rel.sigma_eta2 / d as f64).sqrt();
    let theta = &rel.op.h * &beta + h_ms * &beta_ms + eta;
    let source = source_from_theta(theta, s, rng)?;
    let x = sample_gaussian_matrix(t.n, d, &t.sigma_x, rng)?;
    let x_ms = rng.normal_matrix(t.n, m.q) * scale.sqrt();
    let eps = rng.normal_vector(t.n) * t.sigma_eps2.sqrt();
    let y = &x * &beta + &x_ms * &beta_ms + eps;
    let target = Dataset::new(x, y, beta.clone())?;
    Ok(MisspecTrial {
        beta,
        beta_ms,
        source,
        target,
    })
}

/// Test risk of a `d`-feature predictor in the misspecified world.
pub fn misspecified_risk(beta_hat: &Vector, trial: &MisspecTrial, t: &TargetSpec) -> Result<f64> {
    let scale = t.sigma_x.isotropic_scale().ok_or(Error::ReductionNotValid)?;
    Ok(empirical_risk(beta_hat, &trial.beta, t)? + scale * trial.beta_ms.norm_squared())
}
