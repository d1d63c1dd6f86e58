//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

mod common;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use tlrisk::analytic::{
    c_tl, gamma_tl_inf, mltn_risk, mp_stieltjes, solve_fixed_point, source_risk, tl_opt_risk_orthonormal_asymptotic,
    tl_ridge_margin_lhs, tl_risk_general_asymptotic, GammaTlInf, Regime, SpectralModel,
};
use tlrisk::estimators::{mltn_fit, optimal_alpha_ridge, optimal_alpha_tl, EstimatorId, TlAlpha, TransferSystem};
use tlrisk::harness::config::MisspecConfig;
use tlrisk::harness::csv::to_csv_string;
use tlrisk::harness::{run_sweep, ExperimentConfig, MisspecPath, SweepResult};
use tlrisk::linalg::{pseudoinverse, Covariance, Matrix, Rng, Vector};
use tlrisk::model::{
    empirical_risk, sample_beta, sample_source_dataset, sample_target_dataset, EtaScaling, MisspecSpec, SourceSpec,
    TargetSpec, TaskRelation,
};
use tlrisk::operators::{build_operator, OperatorKind, OperatorSpec};
use tlrisk::stats;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

// ---------------------------------------------------------------------------

fn dims_near_band(rng: &mut Rng) -> (usize, usize) {
    let nt = random_count(rng, 3, 150);
    let d = if rng.uniform() < 0.4 {
        (nt as i64 + random_count(rng, 0, 6) as i64 - 3).max(1) as usize
    } else {
        random_count(rng, 1, 300)
    };
    (d, nt)
}

fn criterion_1() -> Outcome {
    let mut rng = Rng::new(101, 0);
    let mut bad = Vec::new();
    let mut bands = 0;
    for _ in 0..200 {
        let (d, nt) = dims_near_band(&mut rng);
        let (sh, sx, b) = (
            random_in(&mut rng, 0.0, 2.0),
            random_in(&mut rng, 0.0, 2.0),
            random_in(&mut rng, 0.05, 3.0),
        );
        let (got, want) = (c_tl(d, nt, sh, sx, b), common::c_tl(d, nt, sh, sx, b));
        bands += want.is_infinite() as usize;
        if !close(got, want, 1e-12) {
            bad.push(format!("c_tl({d},{nt})"));
        }
    }
    for _ in 0..200 {
        let (d, nt) = dims_near_band(&mut rng);
        let (sx, th) = (random_in(&mut rng, 0.0, 2.0), random_in(&mut rng, 0.0, 3.0));
        if !close(source_risk(d, nt, sx, th), common::source_risk(d, nt, sx, th), 1e-12) {
            bad.push(format!("source_risk({d},{nt})"));
        }
    }
    for _ in 0..200 {
        let (d, n) = dims_near_band(&mut rng);
        let (se, b) = (random_in(&mut rng, 0.0, 2.0), random_in(&mut rng, 0.05, 3.0));
        if !close(mltn_risk(d, n, se, b), common::mltn_risk(d, n, se, b), 1e-12) {
            bad.push(format!("mltn_risk({d},{n})"));
        }
    }
    for _ in 0..200 {
        let alpha = 10f64.powf(random_in(&mut rng, -3.0, 3.0));
        let gamma = 10f64.powf(random_in(&mut rng, -1.5, 1.5));
        if !close(mp_stieltjes(alpha, gamma), stieltjes(alpha, gamma), 1e-12) {
            bad.push(format!("mp_stieltjes({alpha},{gamma})"));
        }
    }
    for _ in 0..200 {
        let (d, n) = (random_count(&mut rng, 1, 400), random_count(&mut rng, 1, 400));
        let (se, b) = (random_in(&mut rng, 0.0, 2.0), random_in(&mut rng, 0.05, 3.0));
        let t = TargetSpec::isotropic(d, n, se, b).unwrap();
        if !close(optimal_alpha_ridge(&t), ridge_alpha(d, n, se, b), 1e-12) {
            bad.push(format!("optimal_alpha_ridge({d},{n})"));
        }
    }
    for _ in 0..200 {
        let d = random_count(&mut rng, 2, 24);
        let nt = (d as i64 + random_count(&mut rng, 0, 8) as i64 - 4).max(1) as usize;
        let kind = match random_count(&mut rng, 0, 2) {
            0 => OperatorKind::Identity,
            1 => OperatorKind::DctTranspose,
            _ => OperatorKind::CirculantKernel {
                width: random_in(&mut rng, 0.01, 0.3),
            },
        };
        let op = build_operator(OperatorSpec { kind, d }).unwrap();
        let (sh, sx, b) = (
            random_in(&mut rng, 0.0, 2.0),
            random_in(&mut rng, 0.0, 2.0),
            random_in(&mut rng, 0.05, 3.0),
        );
        let regime = Regime::from_dims(d, 10, nt);
        let ok = match (gamma_tl_inf(&op, &regime, b, sh, sx), gamma_tl(&op.h, nt, b, sh, sx)) {
            (GammaTlInf::Infinite, None) => {
                bands += 1;
                true
            }
            (GammaTlInf::Finite(got), Some(want)) => got.iter().zip(want.iter()).all(|(g, w)| close(*g, *w, 1e-12)),
            _ => false,
        };
        if !ok {
            bad.push(format!("gamma_tl_inf({kind}, d={d}, nt={nt})"));
        }
    }
    outcome(
        bad.is_empty() && bands > 0,
        format!(
            "1200 inputs, {bands} on infinite bands, mismatches {:?}",
            &bad[..bad.len().min(3)]
        ),
    )
}

// ---------------------------------------------------------------------------

fn haar_exact(a: &Vector, d: usize, r: usize) -> Matrix {
    let (df, rf) = (d as f64, r as f64);
    let q = if d > 1 {
        rf * (df - rf) / (df * (df - 1.0) * (df + 2.0))
    } else {
        0.0
    };
    a * a.transpose() * (rf / df - df * q) + Matrix::identity(d, d) * (q * a.norm_squared())
}

fn haar_printed(a: &Vector, d: usize, nt: usize) -> Matrix {
    let (df, nf) = (d as f64, nt as f64);
    let norm = a.norm_squared();
    let mut m = a * a.transpose() * ((nf + 1.0) / (df + 1.0));
    for j in 0..d {
        m[(j, j)] += (df - nf) / (df * df - 1.0) * (norm - a[j] * a[j]);
    }
    m * (nf / df)
}

fn criterion_2() -> Outcome {
    const DRAWS: usize = 2000;
    let mut lines = Vec::new();
    let mut pass = true;
    for &d in &[8usize, 24] {
        for &nt in &[12usize, 16, 48] {
            let mut rng = Rng::new(202, (d * 1000 + nt) as u64);
            let a = Vector::from_fn(d, |j, _| 1.0 + (j as f64 * 0.7).sin());
            let (mut mp, mut mq, mut mh) = (
                MatrixMoments::new(d, d),
                MatrixMoments::new(d, d),
                MatrixMoments::new(d, d),
            );
            let (mut ps, mut qs) = (Vec::new(), Vec::new());
            let mut quartic = Vec::new();
            for _ in 0..DRAWS {
                let z = rng.normal_matrix(nt, d);
                let zp = pseudoinverse(&z);
                let p = &zp * &z;
                let q = &zp * zp.transpose();
                let pa = &p * &a;
                let h = &pa * pa.transpose();
                quartic.push(pa.norm_squared().powi(2));
                mp.push(&p);
                mq.push(&q);
                mh.push(&h);
                ps.push(p);
                qs.push(q);
            }
            let (df, nf) = (d as f64, nt as f64);
            let r = d.min(nt);
            let e_p = Matrix::identity(d, d) * (r as f64 / df);
            let e_q = if d + 2 <= nt {
                Some(Matrix::identity(d, d) / (nf - df - 1.0))
            } else if d >= nt + 2 {
                Some(Matrix::identity(d, d) * (nf / (df * (df - nf - 1.0))))
            } else {
                None
            };
            let e_h = haar_exact(&a, d, r);

            let mut ok = true;
            let cp = entrywise(&mp.mean(), &mp.stderr(), &e_p, 3.0);
            ok &= cp.passed();
            let pooled_ok = |draws: &[Matrix], e: &Matrix| {
                let (dg, off) = pooled(draws);
                let (m1, s1) = mean_se(&dg);
                let (m2, s2) = mean_se(&off);
                let (w1, w2) = (e.trace() / df, 0.0);
                ((m1 - w1).abs() <= 3.0 * s1 || (m1 - w1).abs() <= 1e-9)
                    && ((m2 - w2).abs() <= 3.0 * s2 || (m2 - w2).abs() <= 1e-9)
            };
            ok &= pooled_ok(&ps, &e_p);
            let mut qdesc = "band".to_string();
            if let Some(e_q) = &e_q {
                let cq = entrywise(&mq.mean(), &mq.stderr(), e_q, 3.0);
                ok &= cq.passed() && pooled_ok(&qs, e_q);
                qdesc = format!("{}/{}", cq.exceed, cq.allowed);
            }
            let ch = entrywise(&mh.mean(), &mh.stderr(), &e_h, 3.0);
            ok &= ch.passed();
            let (m4, s4) = mean_se(&quartic);
            let (rf, a4) = (r as f64, a.norm_squared().powi(2));
            let w4 = rf * (rf + 2.0) / (df * (df + 2.0)) * a4;
            ok &= (m4 - w4).abs() <= 3.0 * s4 || (m4 - w4).abs() <= 1e-9 * a4;
            let printed = if d > nt {
                let cpr = entrywise(&mh.mean(), &mh.stderr(), &haar_printed(&a, d, nt), 3.0);
                format!(" printed-haar max z {:.1}", cpr.max_z)
            } else {
                String::new()
            };
            pass &= ok;
            lines.push(format!(
                "d={d} nt={nt}: P {}/{} Q {qdesc} H {}/{}{printed}",
                cp.exceed, cp.allowed, ch.exceed, ch.allowed
            ));
        }
    }
    outcome(pass, lines.join("; "))
}

// ---------------------------------------------------------------------------

fn criterion_3() -> Outcome {
    let mut cfg = ExperimentConfig::new(400, 800);
    cfg.d_grid = vec![100, 200, 300, 600, 1200];
    cfg.sigma_eta2_list = vec![0.1];
    cfg.sigma_xi2 = 0.05;
    cfg.sigma_eps2 = 0.05;
    cfg.b = 1.0;
    cfg.operator = OperatorKind::DctTranspose;
    cfg.estimators = vec![EstimatorId::Tl];
    cfg.trials = 200;
    cfg.base_seed = 303;
    let res = match run_sweep(&cfg, 1) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for &d in &cfg.d_grid {
        let p = res.point(d, 0.1, EstimatorId::Tl).unwrap();
        let regime = Regime::asymptotic(d as f64 / 400.0, d as f64 / 800.0).unwrap();
        let formula = tl_opt_risk_orthonormal_asymptotic(&regime, 0.05, 0.1, 0.05, 1.0);
        let oracle = tl_opt_asymptotic(d as f64 / 400.0, d as f64 / 800.0, 0.05, 0.1, 0.05, 1.0);
        let (m, se) = (p.empirical_mean.unwrap(), p.empirical_stderr.unwrap());
        let tol = (3.0 * se).max(0.05 * formula);
        let ok = (m - formula).abs() <= tol && close(formula, oracle, 1e-12);
        pass &= ok;
        parts.push(format!("d={d} mc {m:.5}±{se:.5} formula {formula:.5}"));
    }
    outcome(pass, parts.join("; "))
}

// ---------------------------------------------------------------------------

fn criterion_4() -> Outcome {
    let (se, sh, sx, b) = (0.05, 0.1, 0.05, 1.0);
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for &gt in &[0.5, 1.0, 2.0] {
        for &gs in &[0.5, 2.0] {
            let regime = Regime::asymptotic(gt, gs).unwrap();
            let g0 = if gs < 1.0 {
                sh + gs * sx / (1.0 - gs)
            } else {
                (gs - 1.0) / gs * b + (sh + gs * sx / (gs - 1.0)) / gs
            };
            for &alpha in &[0.01, 0.1, 1.0, 10.0] {
                let got =
                    tl_risk_general_asymptotic(SpectralModel::IsotropicLimit, &regime, se, alpha, b, sh, sx).unwrap();
                let want = isotropic_risk(gt, se, g0, alpha);
                let rel = (got - want).abs() / want;
                worst = worst.max(rel);
                pass &= rel <= 1e-8;
            }
            let a_opt = se * gt / g0;
            let got = tl_risk_general_asymptotic(SpectralModel::IsotropicLimit, &regime, se, a_opt, b, sh, sx).unwrap();
            let want = tl_opt_asymptotic(gt, gs, se, sh, sx, b);
            let rel = (got - want).abs() / want;
            worst = worst.max(rel);
            pass &= rel <= 1e-8;
            if gs < 1.0 {
                // W = I exactly, and the under-parameterized Γ has no finite-d corrections
                let op = build_operator(OperatorSpec {
                    kind: OperatorKind::DctTranspose,
                    d: 40,
                })
                .unwrap();
                let cov = Covariance::identity(40);
                let model = SpectralModel::Dense { op: &op, sigma_x: &cov };
                for &alpha in &[0.01, 0.1, 1.0, 10.0] {
                    let got = tl_risk_general_asymptotic(model, &regime, se, alpha, b, sh, sx).unwrap();
                    let want = isotropic_risk(gt, se, g0, alpha);
                    let rel = (got - want).abs() / want;
                    worst = worst.max(rel);
                    pass &= rel <= 1e-8;
                }
            }
        }
    }
    outcome(pass, format!("max relative gap {worst:.2e}"))
}

// ---------------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let mut rng = Rng::new(505, 0);
    let mut worst_res: f64 = 0.0;
    let mut pass = true;
    for _ in 0..50 {
        let d = random_count(&mut rng, 1, 64);
        let k = random_count(&mut rng, 1, 2 * d);
        let a = rng.normal_matrix(d, k);
        let w = &a * a.transpose() / k as f64 + Matrix::identity(d, d) * random_in(&mut rng, 0.01, 1.0);
        let gamma = 10f64.powf(random_in(&mut rng, -1.0, 1.0));
        let alpha = 10f64.powf(random_in(&mut rng, -3.0, 3.0));
        match solve_fixed_point(&w, gamma, alpha) {
            Ok(sol) => {
                // residual recomputed with a dense solve
                let m = &w * sol.c + Matrix::identity(d, d) * alpha;
                let tr = (m.try_inverse().unwrap() * &w).trace() * gamma / d as f64;
                let res = (1.0 - sol.c * (1.0 + tr)).abs();
                worst_res = worst_res.max(res.max(sol.residual));
                pass &= sol.residual <= 1e-10 && res <= 1e-9;
            }
            Err(_) => pass = false,
        }
    }
    let mut worst_c: f64 = 0.0;
    let mut worst_m: f64 = 0.0;
    for &gamma in &[0.25, 0.5, 1.0, 2.0, 4.0] {
        for i in 0..13 {
            let alpha = 10f64.powf(-3.0 + 0.5 * i as f64);
            let sol = solve_fixed_point(&Matrix::identity(16, 16), gamma, alpha).unwrap();
            // c² + (γ + α - 1) c - α = 0
            let p = gamma + alpha - 1.0;
            let root = (p * p + 4.0 * alpha).sqrt();
            let c = if p > 0.0 {
                2.0 * alpha / (p + root)
            } else {
                (-p + root) / 2.0
            };
            let ec = (sol.c - c).abs() / c;
            let em = (1.0 / (sol.c + alpha) - stieltjes(alpha, gamma)).abs() / stieltjes(alpha, gamma);
            worst_c = worst_c.max(ec);
            worst_m = worst_m.max(em);
        }
    }
    pass &= worst_c <= 1e-10 && worst_m <= 1e-10;
    outcome(
        pass,
        format!("max residual {worst_res:.1e}, identity c gap {worst_c:.1e}, stieltjes gap {worst_m:.1e}"),
    )
}

// ---------------------------------------------------------------------------

fn criterion_6() -> Outcome {
    let (n, nt, se, sh, sx, b) = (64usize, 128usize, 0.05, 0.1, 0.05, 1.0);
    let trials = 400;
    let grid: Vec<f64> = (0..50).map(|i| 10f64.powf(-3.0 + 4.0 * i as f64 / 49.0)).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for &d in &[16usize, 64, 160] {
        let op = Arc::new(
            build_operator(OperatorSpec {
                kind: OperatorKind::DctTranspose,
                d,
            })
            .unwrap(),
        );
        let t = TargetSpec::isotropic(d, n, se, b).unwrap();
        let s = SourceSpec::new(nt, sx).unwrap();
        let rel = TaskRelation::new(op.clone(), sh).unwrap();
        let TlAlpha::Finite(a_tl) = optimal_alpha_tl(&t, &s, &rel).unwrap() else {
            return outcome(false, format!("no finite optimum at d={d}"));
        };
        let a_ridge = optimal_alpha_ridge(&t);
        // columns: grid..., optimum
        let mut tl = vec![Vec::with_capacity(trials); grid.len() + 1];
        let mut ridge = vec![Vec::with_capacity(trials); grid.len() + 1];
        for k in 0..trials {
            let mut rng = Rng::new(606, (d * 100_000 + k) as u64);
            let beta = sample_beta(&t, &mut rng);
            let src = sample_source_dataset(&beta, &rel, &s, &mut rng).unwrap();
            let tgt = sample_target_dataset(&beta, &t, &mut rng).unwrap();
            let theta_hat = mltn_fit(&src).unwrap().beta_hat;
            let tsys = TransferSystem::new(&tgt, Some(&theta_hat), Some(&op)).unwrap();
            let rsys = TransferSystem::new(&tgt, None, None).unwrap();
            for (j, &a) in grid.iter().chain([a_tl].iter()).enumerate() {
                tl[j].push(empirical_risk(&tsys.solve(a).unwrap(), &beta, &t).unwrap());
            }
            for (j, &a) in grid.iter().chain([a_ridge].iter()).enumerate() {
                ridge[j].push(empirical_risk(&rsys.solve(a).unwrap(), &beta, &t).unwrap());
            }
        }
        for (name, cols) in [("tl", &tl), ("ridge", &ridge)] {
            let means: Vec<f64> = cols.iter().map(|c| stats::mean_se(c).mean).collect();
            let best = (0..grid.len()).min_by(|&i, &j| means[i].total_cmp(&means[j])).unwrap();
            let gap = means[grid.len()] - means[best];
            let se = stats::paired_diff_se(&cols[grid.len()], &cols[best]);
            let ok = gap <= 2.0 * se;
            pass &= ok;
            parts.push(format!("d={d} {name} gap {gap:.2e} (2se {:.2e})", 2.0 * se));
        }
    }
    outcome(pass, parts.join("; "))
}

// ---------------------------------------------------------------------------

/// Means of `a` and `b` and the standard error of their difference. Every
/// estimator in a cell sees the same draws, so the error is the paired one.
fn combined_se(
    res: &SweepResult,
    d: usize,
    eta_idx: usize,
    eta: f64,
    a: EstimatorId,
    b: EstimatorId,
) -> Option<(f64, f64, f64)> {
    let (ma, mb) = (
        res.point(d, eta, a)?.empirical_mean?,
        res.point(d, eta, b)?.empirical_mean?,
    );
    if !(ma.is_finite() && mb.is_finite()) {
        return None;
    }
    let se = stats::paired_diff_se(res.risks(d, eta_idx, a)?, res.risks(d, eta_idx, b)?);
    Some((ma, mb, se))
}

fn mean_of(res: &SweepResult, d: usize, eta: f64, id: EstimatorId) -> f64 {
    res.point(d, eta, id).and_then(|p| p.empirical_mean).unwrap_or(f64::NAN)
}

fn criterion_7(cfg: &ExperimentConfig, res: &SweepResult) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let below = *cfg.d_grid.iter().filter(|&&d| d + 1 < cfg.n_tilde).max().unwrap();
    let above = *cfg.d_grid.iter().filter(|&&d| d > cfg.n_tilde + 1).min().unwrap();
    let (mut worst_i, mut worst_ii) = (f64::INFINITY, f64::INFINITY);
    let mut checked_iii = 0;
    for (ei, &eta) in cfg.sigma_eta2_list.iter().enumerate() {
        let m = |d| mean_of(res, d, eta, EstimatorId::Mltn);
        let ratio = m(64) / m(16).max(m(256));
        worst_i = worst_i.min(ratio);
        pass &= ratio >= 5.0;
        let t = |d| mean_of(res, d, eta, EstimatorId::Tl);
        let neighbor = t(below).max(t(above));
        for d in [127, 128, 129] {
            let r = t(d) / neighbor;
            worst_ii = worst_ii.min(r);
            pass &= r >= 3.0;
        }
        for &d in &cfg.d_grid {
            if cfg.n_tilde <= d + 1 && d <= cfg.n_tilde + 1 {
                continue;
            }
            if tl_ridge_margin_lhs(d, cfg.n_tilde, eta, cfg.sigma_xi2) < cfg.b / 2.0 {
                let Some((tl, ridge, se)) = combined_se(res, d, ei, eta, EstimatorId::Tl, EstimatorId::Ridge) else {
                    pass = false;
                    continue;
                };
                checked_iii += 1;
                if tl >= ridge - 2.0 * se {
                    pass = false;
                    parts.push(format!(
                        "(iii) fails at d={d} eta={eta}: tl {tl:.4} ridge {ridge:.4} se {se:.4}"
                    ));
                }
            }
        }
    }
    parts.insert(
        0,
        format!(
            "(i) min ratio {worst_i:.1}; (ii) min ratio vs d={below}/{above} {worst_ii:.1}; (iii) {checked_iii} points"
        ),
    );
    outcome(pass && checked_iii > 0, parts.join("; "))
}

fn circulant_run() -> tlrisk::Result<(ExperimentConfig, SweepResult)> {
    let mut cfg = ExperimentConfig::from_file(&configs_dir().join("fig2_circulant.conf"))?;
    cfg.d_grid.retain(|&d| d >= 4 * cfg.n);
    cfg.estimators = vec![EstimatorId::Tl, EstimatorId::Lmmse];
    let res = run_sweep(&cfg, 1)?;
    Ok((cfg, res))
}

fn criterion_8(cfg: &ExperimentConfig, res: &SweepResult) -> Outcome {
    let mut pass = true;
    let mut valid = 0;
    let mut worst_z = f64::NEG_INFINITY;
    for (ei, &eta) in cfg.sigma_eta2_list.iter().enumerate() {
        for &d in &cfg.d_grid {
            let Some((lm, tl, se)) = combined_se(res, d, ei, eta, EstimatorId::Lmmse, EstimatorId::Tl) else {
                continue;
            };
            valid += 1;
            if se > 0.0 {
                worst_z = worst_z.max((lm - tl) / se);
            }
            pass &= lm <= tl + 2.0 * se;
        }
    }
    let (ccfg, cres) = match circulant_run() {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut wins = Vec::new();
    for (ei, &eta) in ccfg.sigma_eta2_list.iter().enumerate() {
        for &d in &ccfg.d_grid {
            if let Some((lm, tl, se)) = combined_se(&cres, d, ei, eta, EstimatorId::Lmmse, EstimatorId::Tl) {
                if lm < tl - 2.0 * se {
                    wins.push(format!("d={d} lmmse {lm:.4} tl {tl:.4} se {se:.4}"));
                }
            }
        }
    }
    pass &= !wins.is_empty() && valid > 0;
    outcome(
        pass,
        format!(
            "dct: {valid} points, max (lmmse-tl)/se {worst_z:.2}; circulant d/n>=4 wins: [{}]",
            wins.join(", ")
        ),
    )
}

// ---------------------------------------------------------------------------

fn criterion_9() -> Outcome {
    let run = |path, seed| {
        let mut cfg = ExperimentConfig::new(32, 64);
        cfg.d_grid = vec![8, 16, 24, 48, 96, 128];
        cfg.sigma_eta2_list = vec![0.1];
        cfg.trials = 400;
        cfg.base_seed = seed;
        cfg.misspec = Some(MisspecConfig {
            spec: MisspecSpec::new(128, 2.5, 2.0, 1.0).unwrap(),
            path,
            eta_scaling: EtaScaling::PerVector,
        });
        run_sweep(&cfg, 1).map(|r| (cfg, r))
    };
    let (cfg, full) = match run(MisspecPath::Full, 901) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let (_, eff) = match run(MisspecPath::Effective, 902) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut pass = true;
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for &d in &cfg.d_grid {
        for id in EstimatorId::ALL {
            let (a, b) = (full.point(d, 0.1, id).unwrap(), eff.point(d, 0.1, id).unwrap());
            let (Some(ma), Some(mb)) = (a.empirical_mean, b.empirical_mean) else {
                pass = false;
                continue;
            };
            let se = a.empirical_stderr.unwrap().hypot(b.empirical_stderr.unwrap());
            let z = (ma - mb).abs() / se;
            worst = worst.max(z);
            pass &= z <= 3.0;
            count += 1;
        }
    }
    outcome(pass, format!("{count} comparisons, max |z| {worst:.2}"))
}

// ---------------------------------------------------------------------------

fn criterion_10(cfg: &ExperimentConfig, one: &SweepResult) -> Outcome {
    match run_sweep(cfg, 8) {
        Ok(eight) => {
            let (a, b) = (to_csv_string(&one.points), to_csv_string(&eight.points));
            outcome(a == b, format!("{} bytes, identical: {}", a.len(), a == b))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

// ---------------------------------------------------------------------------

fn report(k: usize, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    report_after(k, Duration::ZERO, limit, f)
}

/// `spent` is time already used by shared setup that counts toward `limit`.
fn report_after(k: usize, spent: Duration, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let took = spent + start.elapsed();
    let in_time = limit.is_none_or(|l| took < l);
    let pass = o.pass && in_time;
    let limit_note = limit.map_or(String::new(), |l| format!(" < {}s", l.as_secs()));
    println!(
        "criterion {k:>2}: {} [{:.1}s{limit_note}] {}",
        if pass { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        o.detail
    );
    pass
}

fn main() {
    let secs = Duration::from_secs;
    let mut all = true;
    all &= report(1, Some(secs(1)), criterion_1);
    all &= report(2, Some(secs(30)), criterion_2);
    all &= report(3, Some(secs(300)), criterion_3);
    all &= report(4, Some(secs(1)), criterion_4);
    all &= report(5, Some(secs(10)), criterion_5);
    all &= report(6, Some(secs(180)), criterion_6);

    let start = Instant::now();
    let fig = ExperimentConfig::from_file(&configs_dir().join("fig1a.conf"))
        .and_then(|cfg| run_sweep(&cfg, 1).map(|r| (cfg, r)));
    let sweep_time = start.elapsed();
    match fig {
        Ok((cfg, res)) => {
            all &= report_after(7, sweep_time, Some(secs(600)), || criterion_7(&cfg, &res));
            all &= report(8, None, || criterion_8(&cfg, &res));
            all &= report(9, Some(secs(180)), criterion_9);
            all &= report(10, None, || criterion_10(&cfg, &res));
        }
        Err(e) => {
            for k in [7, 8, 10] {
                println!("criterion {k:>2}: FAIL sweep error: {e}");
            }
            report(9, Some(secs(180)), criterion_9);
            all = false;
        }
    }
    println!("fig1a sweep took {:.1}s", sweep_time.as_secs_f64());
    if !all {
        std::process::exit(1);
    }
}
