//! WebAssembly bindings for the browser page in `www/`.
//!
//! Every export returns a flat `Float64Array`; layouts are given per function.
//! Errors come back as JS exceptions carrying the library message.

use wasm_bindgen::prelude::*;

use tlrisk::analytic::{
    mltn_risk, ridge_opt_risk_asymptotic, solve_fixed_point_spectrum, tl_opt_risk_orthonormal_asymptotic, Regime,
};
use tlrisk::estimators::EstimatorId;
use tlrisk::harness::{run_sweep, ExperimentConfig};

fn js(e: tlrisk::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Limiting risks at `points` log-spaced values of `d/n` in `[1/8, 8]`,
/// orthonormal relation, isotropic features.
///
/// Layout: `[x; points] ++ [mltn; points] ++ [ridge; points] ++ [tl; points]`,
/// with `+∞` on the interpolation bands.
#[wasm_bindgen]
pub fn risk_curves(
    n: usize,
    n_tilde: usize,
    sigma_eps2: f64,
    sigma_eta2: f64,
    sigma_xi2: f64,
    b: f64,
    points: usize,
) -> Result<Vec<f64>, JsValue> {
    if n == 0 || n_tilde == 0 || points < 2 {
        return Err(JsValue::from_str("need n, n_tilde >= 1 and at least 2 points"));
    }
    let ratio = n_tilde as f64 / n as f64;
    let xs: Vec<f64> = (0..points)
        .map(|i| (-(8f64.ln()) + 2.0 * 8f64.ln() * i as f64 / (points - 1) as f64).exp())
        .collect();
    let mut out = xs.clone();
    for &x in &xs {
        // finite-size MLTN risk at the nearest integer d
        let d = ((x * n as f64).round() as usize).max(1);
        out.push(mltn_risk(d, n, sigma_eps2, b));
    }
    for &x in &xs {
        out.push(ridge_opt_risk_asymptotic(x, sigma_eps2, b));
    }
    for &x in &xs {
        let regime = Regime::asymptotic(x, x / ratio).map_err(js)?;
        out.push(tl_opt_risk_orthonormal_asymptotic(
            &regime, sigma_eps2, sigma_eta2, sigma_xi2, b,
        ));
    }
    Ok(out)
}

/// Fixed point `c(α)` for `W` with spectrum `lambdas`, at each of `alphas`.
///
/// Layout: `[c; k] ++ [c'; k] ++ [residual; k]` for `k = alphas.len()`.
#[wasm_bindgen]
pub fn fixed_point_curve(lambdas: Vec<f64>, gamma: f64, alphas: Vec<f64>) -> Result<Vec<f64>, JsValue> {
    let sols = alphas
        .iter()
        .map(|&a| solve_fixed_point_spectrum(&lambdas, gamma, a))
        .collect::<Result<Vec<_>, _>>()
        .map_err(js)?;
    let mut out: Vec<f64> = sols.iter().map(|s| s.c).collect();
    out.extend(sols.iter().map(|s| s.c_prime));
    out.extend(sols.iter().map(|s| s.residual));
    Ok(out)
}

/// A small Monte Carlo run at one `d` with the DCT relation.
///
/// Layout: `[mean, stderr, analytic]` for mltn, ridge and tl in that order;
/// missing values are NaN.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_point(
    n: usize,
    n_tilde: usize,
    d: usize,
    sigma_eps2: f64,
    sigma_eta2: f64,
    sigma_xi2: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, JsValue> {
    let mut cfg = ExperimentConfig::new(n, n_tilde);
    cfg.d_grid = vec![d];
    cfg.sigma_eps2 = sigma_eps2;
    cfg.sigma_eta2_list = vec![sigma_eta2];
    cfg.sigma_xi2 = sigma_xi2;
    cfg.trials = trials;
    cfg.base_seed = seed;
    cfg.estimators = vec![EstimatorId::Mltn, EstimatorId::Ridge, EstimatorId::Tl];
    let res = run_sweep(&cfg, 1).map_err(js)?;
    let mut out = Vec::with_capacity(9);
    for id in [EstimatorId::Mltn, EstimatorId::Ridge, EstimatorId::Tl] {
        let p = res
            .point(d, sigma_eta2, id)
            .ok_or_else(|| JsValue::from_str("missing point"))?;
        out.push(p.empirical_mean.unwrap_or(f64::NAN));
        out.push(p.empirical_stderr.unwrap_or(f64::NAN));
        out.push(p.analytic.unwrap_or(f64::NAN));
    }
    Ok(out)
}
