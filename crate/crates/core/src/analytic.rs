//! Closed-form, fixed-point and ensemble-averaged risk formulas.

use crate::error::{Error, Result};
use crate::linalg::{
    gram_cols, gram_rows, sample_gaussian_matrix, sym_eigendecomposition, sym_eigenvalues, Covariance, Matrix, Rng,
};
use crate::model::{SourceSpec, TargetSpec, TaskRelation};
use crate::operators::OperatorMatrix;
use crate::stats::{mean_se, MeanSe};

const INF: f64 = f64::INFINITY;

/// Relation-plus-source error level per coordinate. `+∞` for `d ∈ {ñ-1, ñ, ñ+1}`.
pub fn c_tl(d: usize, n_tilde: usize, sigma_eta2: f64, sigma_xi2: f64, b: f64) -> f64 {
    let (df, nt) = (d as f64, n_tilde as f64);
    if d + 2 <= n_tilde {
        sigma_eta2 / df + sigma_xi2 / (nt - df - 1.0)
    } else if d <= n_tilde + 1 {
        INF
    } else {
        (1.0 - nt / df) * (b / df) + (nt / df) * (sigma_eta2 / df + sigma_xi2 / (df - nt - 1.0))
    }
}

/// Out-of-sample error of the minimum-norm fit with `samples` rows, noise
/// `noise2` and parameter energy `energy`. Infinite on the interpolation band.
fn min_norm_risk(d: usize, samples: usize, noise2: f64, energy: f64) -> f64 {
    let (df, nf) = (d as f64, samples as f64);
    if d + 2 <= samples {
        (1.0 + df / (nf - df - 1.0)) * noise2
    } else if d <= samples + 1 {
        INF
    } else {
        (1.0 + nf / (df - nf - 1.0)) * noise2 + (1.0 - nf / df) * energy
    }
}

/// Source-task error of `θ̂ = Z⁺v` for a fixed `θ` of squared norm `theta_energy`.
pub fn source_risk(d: usize, n_tilde: usize, sigma_xi2: f64, theta_energy: f64) -> f64 {
    min_norm_risk(d, n_tilde, sigma_xi2, theta_energy)
}

/// Target error of the minimum-norm estimator averaged over `β ~ N(0, (b/d) I)`.
pub fn mltn_risk(d: usize, n: usize, sigma_eps2: f64, b: f64) -> f64 {
    min_norm_risk(d, n, sigma_eps2, b)
}

/// Stieltjes transform of the Marchenko-Pastur law with ratio `gamma`, at `z = -alpha`.
pub fn mp_stieltjes(alpha: f64, gamma: f64) -> f64 {
    let a = 1.0 - gamma + alpha;
    let root = (a * a + 4.0 * gamma * alpha).sqrt();
    if a > 0.0 {
        2.0 / (a + root)
    } else {
        (root - a) / (2.0 * gamma * alpha)
    }
}

/// Which side of the source interpolation threshold a setting sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceBranch {
    Under,
    Band,
    Over,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regime {
    pub gamma_tgt: f64,
    pub gamma_src: f64,
    pub branch: SourceBranch,
}

impl Regime {
    /// Limit regime; the source band is the single point `γ_src = 1`.
    pub fn asymptotic(gamma_tgt: f64, gamma_src: f64) -> Result<Self> {
        if !(gamma_tgt > 0.0 && gamma_src > 0.0 && gamma_tgt.is_finite() && gamma_src.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "parameterization levels must be positive, got {gamma_tgt}, {gamma_src}"
            )));
        }
        let branch = if gamma_src < 1.0 {
            SourceBranch::Under
        } else if gamma_src == 1.0 {
            SourceBranch::Band
        } else {
            SourceBranch::Over
        };
        Ok(Regime {
            gamma_tgt,
            gamma_src,
            branch,
        })
    }

    /// Finite-size regime; the band is `d ∈ {ñ-1, ñ, ñ+1}`.
    pub fn from_dims(d: usize, n: usize, n_tilde: usize) -> Self {
        let branch = if d + 2 <= n_tilde {
            SourceBranch::Under
        } else if d <= n_tilde + 1 {
            SourceBranch::Band
        } else {
            SourceBranch::Over
        };
        Regime {
            gamma_tgt: d as f64 / n as f64,
            gamma_src: d as f64 / n_tilde as f64,
            branch,
        }
    }
}

/// Limiting `d · Γ` for isotropic transfer: the energy of `θ̂ - Hβ` per unit dimension.
pub fn transfer_discrepancy_energy(regime: &Regime, sigma_eta2: f64, sigma_xi2: f64, b: f64) -> f64 {
    let g = regime.gamma_src;
    match regime.branch {
        SourceBranch::Under => sigma_eta2 + g * sigma_xi2 / (1.0 - g),
        SourceBranch::Band => INF,
        SourceBranch::Over => (g - 1.0) / g * b + (sigma_eta2 + g * sigma_xi2 / (g - 1.0)) / g,
    }
}

/// Asymptotically optimal transfer strength. `+∞` when the source is perfect.
pub fn tl_opt_alpha_asymptotic(
    regime: &Regime,
    sigma_eps2: f64,
    sigma_eta2: f64,
    sigma_xi2: f64,
    b: f64,
) -> Option<f64> {
    let g0 = transfer_discrepancy_energy(regime, sigma_eta2, sigma_xi2, b);
    if g0.is_infinite() {
        return None;
    }
    Some(if g0 == 0.0 {
        INF
    } else {
        sigma_eps2 * regime.gamma_tgt / g0
    })
}

/// `σ²(1 + γ m(-α; γ))` at `α = σ²γ/g0`, with the degenerate limits handled.
fn optimal_isotropic_risk(sigma_eps2: f64, gamma: f64, g0: f64) -> f64 {
    if g0.is_infinite() {
        return INF;
    }
    if sigma_eps2 == 0.0 {
        return g0 * (1.0 - 1.0 / gamma).max(0.0);
    }
    if g0 == 0.0 {
        return sigma_eps2;
    }
    let alpha = sigma_eps2 * gamma / g0;
    sigma_eps2 * (1.0 + gamma * mp_stieltjes(alpha, gamma))
}

/// Limiting risk of optimally tuned transfer with orthonormal `H` and isotropic features.
pub fn tl_opt_risk_orthonormal_asymptotic(
    regime: &Regime,
    sigma_eps2: f64,
    sigma_eta2: f64,
    sigma_xi2: f64,
    b: f64,
) -> f64 {
    optimal_isotropic_risk(
        sigma_eps2,
        regime.gamma_tgt,
        transfer_discrepancy_energy(regime, sigma_eta2, sigma_xi2, b),
    )
}

pub fn ridge_opt_alpha_asymptotic(gamma_tgt: f64, sigma_eps2: f64, b: f64) -> f64 {
    gamma_tgt * sigma_eps2 / b
}

/// Limiting risk of optimally tuned ridge with isotropic features.
pub fn ridge_opt_risk_asymptotic(gamma_tgt: f64, sigma_eps2: f64, b: f64) -> f64 {
    optimal_isotropic_risk(sigma_eps2, gamma_tgt, b)
}

/// Limiting risk at an arbitrary `α` for isotropic features when `θ̂ - Hβ` has
/// energy `g0` (ridge is `g0 = b`).
pub fn isotropic_risk_asymptotic(gamma: f64, sigma_eps2: f64, g0: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if g0.is_infinite() {
        return Ok(INF);
    }
    spectral_risk(&[1.0], &[g0], gamma, sigma_eps2, alpha)
}

/// Left side of the transfer-beats-ridge inequality; `+∞` on the source band.
pub fn tl_ridge_margin_lhs(d: usize, n_tilde: usize, sigma_eta2: f64, sigma_xi2: f64) -> f64 {
    let gap = (d as f64 - n_tilde as f64).abs() - 1.0;
    if gap <= 0.0 {
        return INF;
    }
    sigma_eta2 + d as f64 * sigma_xi2 / gap
}

/// Whether optimally tuned transfer beats optimally tuned ridge.
pub fn tl_beats_ridge(d: usize, n_tilde: usize, sigma_eta2: f64, sigma_xi2: f64, b: f64) -> bool {
    let within_band = d + 1 >= n_tilde && d <= n_tilde + 1;
    !within_band && tl_ridge_margin_lhs(d, n_tilde, sigma_eta2, sigma_xi2) < b
}

/// Solution of the deterministic-equivalent fixed point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralSolution {
    pub c: f64,
    pub c_prime: f64,
    /// `|1 - c (1 + trace term)|`.
    pub residual: f64,
    pub iterations: usize,
}

const FIXED_POINT_MAX_ITER: usize = 10_000;

/// Solves `1/c - 1 = (γ/k) Σ λ/(cλ + α)` over the spectrum `lambdas` of `W`.
pub fn solve_fixed_point_spectrum(lambdas: &[f64], gamma: f64, alpha: f64) -> Result<SpectralSolution> {
    if lambdas.is_empty() {
        return Err(Error::EmptyDimension);
    }
    if !(alpha > 0.0 && gamma > 0.0) || !alpha.is_finite() || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need alpha, gamma > 0; got {alpha}, {gamma}"
        )));
    }
    if lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidParameter("W must be positive definite".into()));
    }
    let k = lambdas.len() as f64;
    let trace = |c: f64| gamma / k * lambdas.iter().map(|&l| l / (c * l + alpha)).sum::<f64>();
    let frob = |c: f64| gamma / k * lambdas.iter().map(|&l| (l / (c * l + alpha)).powi(2)).sum::<f64>();
    // c (1 + trace(c)) is strictly increasing, 0 at c = 0 and >= 1 at c = 1
    let h = |c: f64| c * (1.0 + trace(c)) - 1.0;
    let (mut lo, mut hi) = (1e-12f64, 1.0f64);
    let mut iterations = 0;
    if h(lo) > 0.0 {
        hi = lo;
        lo = 0.0;
    }
    while hi - lo > 4.0 * f64::EPSILON * hi && iterations < FIXED_POINT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let mut c = 0.5 * (lo + hi);
    for _ in 0..4 {
        // Newton on h; h'(c) = 1 + trace(c) + c·d/dc trace(c)
        let dtrace = -gamma / k * lambdas.iter().map(|&l| l * l / (c * l + alpha).powi(2)).sum::<f64>();
        let step = h(c) / (1.0 + trace(c) + c * dtrace);
        let next = c - step;
        iterations += 1;
        if !(next > 0.0 && next <= 1.0) || !next.is_finite() {
            break;
        }
        c = next;
    }
    // scaled by c so the tolerance means the same thing for tiny c
    let residual = h(c).abs();
    if residual > 1e-10 || iterations >= FIXED_POINT_MAX_ITER || !(c > 0.0 && c <= 1.0) {
        return Err(Error::FixedPoint {
            c,
            residual,
            iterations,
        });
    }
    let f = frob(c);
    let c_prime = f / (c.powi(-2) - f);
    Ok(SpectralSolution {
        c,
        c_prime,
        residual,
        iterations,
    })
}

/// Fixed point for a dense SPD `W`.
pub fn solve_fixed_point(w: &Matrix, gamma: f64, alpha: f64) -> Result<SpectralSolution> {
    let eig = sym_eigendecomposition(w)?;
    solve_fixed_point_spectrum(eig.values.as_slice(), gamma, alpha)
}

/// Limiting covariance of `θ̂ - Hβ`.
#[derive(Clone, Debug)]
pub enum GammaTlInf {
    Finite(Matrix),
    Infinite,
}

pub fn gamma_tl_inf(op: &OperatorMatrix, regime: &Regime, b: f64, sigma_eta2: f64, sigma_xi2: f64) -> GammaTlInf {
    let d = op.d();
    let df = d as f64;
    let g = regime.gamma_src;
    match regime.branch {
        SourceBranch::Band => GammaTlInf::Infinite,
        SourceBranch::Under => {
            GammaTlInf::Finite(Matrix::identity(d, d) * ((sigma_eta2 + g * sigma_xi2 / (1.0 - g)) / df))
        }
        SourceBranch::Over => {
            let hht = &op.h * op.h.transpose();
            let mut inner = &hht * ((g - 1.0).powi(2) / g);
            let w = (g - 1.0) / g;
            for j in 0..d {
                inner[(j, j)] += w * (op.kappa_h - hht[(j, j)] / df);
            }
            let mut out = inner * (b / (df * g));
            let iso = (sigma_eta2 + g * sigma_xi2 / (g - 1.0)) / (df * g);
            for j in 0..d {
                out[(j, j)] += iso;
            }
            GammaTlInf::Finite(out)
        }
    }
}

/// Risk from the spectrum `λ` of `W` and the matching diagonal `g` of `d·UᵀΓU`.
fn spectral_risk(lambdas: &[f64], g: &[f64], gamma: f64, sigma_eps2: f64, alpha: f64) -> Result<f64> {
    let sol = solve_fixed_point_spectrum(lambdas, gamma, alpha)?;
    let k = lambdas.len() as f64;
    let s = sol.c_prime + 1.0;
    let (mut t1, mut tg, mut ti) = (0.0, 0.0, 0.0);
    for (&l, &gi) in lambdas.iter().zip(g) {
        let r = 1.0 / (sol.c * l + alpha);
        t1 += l * r;
        tg += gi * l * r * r;
        ti += l * r * r;
    }
    let (t1, tg, ti) = (t1 / k, tg / k, ti / k);
    Ok(sigma_eps2 + sigma_eps2 * gamma * t1 + s * (alpha * alpha * tg - sigma_eps2 * gamma * alpha * ti))
}

/// Which `W` the general asymptotic formula is evaluated with.
#[derive(Clone, Copy, Debug)]
pub enum SpectralModel<'a> {
    /// `W = H⁻ᵀ Σ_x H⁻¹` and the finite-`d` limiting `Γ`.
    Dense {
        op: &'a OperatorMatrix,
        sigma_x: &'a Covariance,
    },
    /// `W = I` with every `O(1/d)` term of `Γ` dropped.
    IsotropicLimit,
}

/// The `α`-independent part of the general asymptotic risk: the spectrum of `W`
/// and the matching diagonal of `d·UᵀΓU`.
#[derive(Clone, Debug)]
pub struct SpectralRisk {
    lambdas: Vec<f64>,
    g: Vec<f64>,
    gamma_tgt: f64,
}

impl SpectralRisk {
    /// `None` when the limiting `Γ` is infinite.
    pub fn new(
        model: SpectralModel<'_>,
        regime: &Regime,
        b: f64,
        sigma_eta2: f64,
        sigma_xi2: f64,
    ) -> Result<Option<Self>> {
        match model {
            SpectralModel::IsotropicLimit => {
                let g0 = transfer_discrepancy_energy(regime, sigma_eta2, sigma_xi2, b);
                Ok(g0.is_finite().then(|| SpectralRisk {
                    lambdas: vec![1.0],
                    g: vec![g0],
                    gamma_tgt: regime.gamma_tgt,
                }))
            }
            SpectralModel::Dense { op, sigma_x } => {
                let d = op.d();
                if sigma_x.dim() != d {
                    return Err(Error::Shape(format!("Sigma_x is {0}x{0}, H is {d}x{d}", sigma_x.dim())));
                }
                let gamma = match gamma_tl_inf(op, regime, b, sigma_eta2, sigma_xi2) {
                    GammaTlInf::Infinite => return Ok(None),
                    GammaTlInf::Finite(m) => m,
                };
                let hinv = op.inverse();
                let w = hinv.transpose() * sigma_x.to_matrix() * hinv;
                let w = (&w + w.transpose()) * 0.5;
                let eig = sym_eigendecomposition(&w)?;
                let u = &eig.vectors;
                let rotated = u.transpose() * gamma * u;
                Ok(Some(SpectralRisk {
                    lambdas: eig.values.iter().copied().collect(),
                    g: (0..d).map(|i| d as f64 * rotated[(i, i)]).collect(),
                    gamma_tgt: regime.gamma_tgt,
                }))
            }
        }
    }

    pub fn risk(&self, sigma_eps2: f64, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        spectral_risk(&self.lambdas, &self.g, self.gamma_tgt, sigma_eps2, alpha)
    }

    /// Minimizer over `α ∈ [1e-6, 1e4]`: a log-grid scan refined by golden-section search.
    pub fn argmin_alpha(&self, sigma_eps2: f64) -> Result<(f64, f64)> {
        let (lo, hi, points) = (-6.0f64, 4.0f64, 101);
        let grid: Vec<f64> = (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect();
        let mut best = (0, f64::INFINITY);
        for (i, &e) in grid.iter().enumerate() {
            let r = self.risk(sigma_eps2, 10f64.powf(e))?;
            if r < best.1 {
                best = (i, r);
            }
        }
        let (mut a, mut c) = (grid[best.0.saturating_sub(1)], grid[(best.0 + 1).min(points - 1)]);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let f = |e: f64| self.risk(sigma_eps2, 10f64.powf(e));
        let (mut x1, mut x2) = (c - phi * (c - a), a + phi * (c - a));
        let (mut f1, mut f2) = (f(x1)?, f(x2)?);
        for _ in 0..60 {
            if f1 < f2 {
                c = x2;
                x2 = x1;
                f2 = f1;
                x1 = c - phi * (c - a);
                f1 = f(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (c - a);
                f2 = f(x2)?;
            }
        }
        let e = 0.5 * (a + c);
        let r = f(e)?;
        Ok(if r <= best.1 {
            (10f64.powf(e), r)
        } else {
            (10f64.powf(grid[best.0]), best.1)
        })
    }
}

/// Limiting risk of transfer at a given `α` for general `H` and `Σ_x`.
pub fn tl_risk_general_asymptotic(
    model: SpectralModel<'_>,
    regime: &Regime,
    sigma_eps2: f64,
    alpha: f64,
    b: f64,
    sigma_eta2: f64,
    sigma_xi2: f64,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    match SpectralRisk::new(model, regime, b, sigma_eta2, sigma_xi2)? {
        None => Ok(INF),
        Some(sr) => sr.risk(sigma_eps2, alpha),
    }
}

/// Which eigen-sum the ensemble evaluation uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SemiPath {
    /// Orthonormal `H` with identity `Σ_x` uses the plain eigenvalue sum, anything else the weighted one.
    #[default]
    Auto,
    /// Always the weighted sum over the eigenbasis of `X_{H⁻¹}ᵀ X_{H⁻¹}`.
    General,
}

/// `σ² + Σ_k g_k (n²α²C + σ²λ_k) / (λ_k + nα)²` for each `α`.
fn eigen_sum(lambdas: &[f64], weights: Option<&[f64]>, n: f64, alphas: &[f64], c: f64, sigma_eps2: f64) -> Vec<f64> {
    alphas
        .iter()
        .map(|&a| {
            let na = n * a;
            let mut acc = 0.0;
            for (k, &l) in lambdas.iter().enumerate() {
                let w = weights.map_or(1.0, |g| g[k]);
                acc += w * (na * na * c + sigma_eps2 * l) / (l + na).powi(2);
            }
            sigma_eps2 + acc
        })
        .collect()
}

/// Eigenvalues of `XᵀX` (padded with zeros when `d > n`).
fn design_spectrum(x: &Matrix) -> Vec<f64> {
    let (n, d) = (x.nrows(), x.ncols());
    let mut ev: Vec<f64> = if d > n {
        sym_eigenvalues(&gram_rows(x)).iter().map(|v| v.max(0.0)).collect()
    } else {
        sym_eigenvalues(&gram_cols(x)).iter().map(|v| v.max(0.0)).collect()
    };
    ev.resize(d, 0.0);
    ev
}

fn ensemble<F>(draws: usize, alphas: usize, rng: &Rng, per_draw: F) -> Result<Vec<MeanSe>>
where
    F: Fn(&mut Rng) -> Result<Vec<f64>> + Sync,
{
    if draws == 0 {
        return Err(Error::InvalidParameter("ensemble needs at least one draw".into()));
    }
    let run = |i: usize| {
        let mut r = rng.substream(&[i as u64]);
        per_draw(&mut r)
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..draws).into_par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = (0..draws).map(run).collect::<Result<_>>()?;
    Ok((0..alphas)
        .map(|j| {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            mean_se(&col)
        })
        .collect())
}

/// Ensemble average of the finite-`n` transfer risk at each `α`, sharing design draws.
pub fn tl_risk_semi_curve(
    t: &TargetSpec,
    s: &SourceSpec,
    rel: &TaskRelation,
    alphas: &[f64],
    draws: usize,
    rng: &Rng,
    path: SemiPath,
) -> Result<Vec<MeanSe>> {
    if alphas.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::InvalidParameter("alpha must be positive".into()));
    }
    let d = t.d;
    if rel.d() != d {
        return Err(Error::Shape(format!("H is {0}x{0} but d = {d}", rel.d())));
    }
    let plain = path == SemiPath::Auto && rel.op.is_orthonormal() && t.sigma_x.is_identity();
    if !plain && d + 2 > s.n_tilde {
        return Err(Error::OutOfScope(format!(
            "weighted eigen-sum needs d <= n_tilde - 2, got d = {d}, n_tilde = {}",
            s.n_tilde
        )));
    }
    let c = c_tl(d, s.n_tilde, rel.sigma_eta2, s.sigma_xi2, t.b);
    if c.is_infinite() {
        return Ok(vec![MeanSe::infinite(); alphas.len()]);
    }
    let n = t.n as f64;
    if plain {
        return ensemble(draws, alphas.len(), rng, |r| {
            let x = sample_gaussian_matrix(t.n, d, &t.sigma_x, r)?;
            Ok(eigen_sum(&design_spectrum(&x), None, n, alphas, c, t.sigma_eps2))
        });
    }
    let hinv = rel.op.inverse();
    let w = hinv.transpose() * t.sigma_x.to_matrix() * hinv;
    ensemble(draws, alphas.len(), rng, |r| {
        let x = sample_gaussian_matrix(t.n, d, &t.sigma_x, r)?;
        let a = x * hinv;
        let g = gram_cols(&a);
        let eig = sym_eigendecomposition(&((&g + g.transpose()) * 0.5))?;
        let phi = &eig.vectors;
        let weights: Vec<f64> = (0..d).map(|k| phi.column(k).dot(&(&w * phi.column(k)))).collect();
        let lambdas: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
        Ok(eigen_sum(&lambdas, Some(&weights), n, alphas, c, t.sigma_eps2))
    })
}

/// Ensemble average of the finite-`n` transfer risk at one `α`.
pub fn tl_risk_seminonasymptotic(
    t: &TargetSpec,
    s: &SourceSpec,
    rel: &TaskRelation,
    alpha: f64,
    draws: usize,
    rng: &Rng,
    path: SemiPath,
) -> Result<MeanSe> {
    Ok(tl_risk_semi_curve(t, s, rel, &[alpha], draws, rng, path)?[0])
}

/// Ensemble average of the finite-`n` ridge risk at each `α` (isotropic features).
pub fn ridge_risk_semi_curve(t: &TargetSpec, alphas: &[f64], draws: usize, rng: &Rng) -> Result<Vec<MeanSe>> {
    if !t.sigma_x.is_identity() {
        return Err(Error::OutOfScope(
            "ridge eigen-sum assumes identity feature covariance".into(),
        ));
    }
    if alphas.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::InvalidParameter("alpha must be positive".into()));
    }
    let c = t.b / t.d as f64;
    let n = t.n as f64;
    ensemble(draws, alphas.len(), rng, |r| {
        let x = r.normal_matrix(t.n, t.d);
        Ok(eigen_sum(&design_spectrum(&x), None, n, alphas, c, t.sigma_eps2))
    })
}

/// Finite-`n` risk of ridge at its optimal `α = dσ²/(nb)`. Noiseless targets
/// fall back to the minimum-norm risk, the `α → 0` limit.
pub fn ridge_opt_risk_nonasymptotic(t: &TargetSpec, draws: usize, rng: &Rng) -> Result<MeanSe> {
    let alpha = t.d as f64 * t.sigma_eps2 / (t.n as f64 * t.b);
    if alpha == 0.0 {
        return Ok(MeanSe {
            mean: mltn_risk(t.d, t.n, 0.0, t.b),
            stderr: 0.0,
        });
    }
    Ok(ridge_risk_semi_curve(t, &[alpha], draws, rng)?[0])
}
