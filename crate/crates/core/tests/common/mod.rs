//! Straight-line reference formulas and Monte Carlo helpers shared by the
//! integration tests. Nothing here calls the library's formula code.
#![allow(dead_code)]

use tlrisk::linalg::{Matrix, Rng};

pub const INF: f64 = f64::INFINITY;

pub fn c_tl(d: usize, nt: usize, sh: f64, sx: f64, b: f64) -> f64 {
    let (d, nt) = (d as f64, nt as f64);
    if d <= nt - 2.0 {
        sh / d + sx / (nt - d - 1.0)
    } else if d <= nt + 1.0 {
        INF
    } else {
        (1.0 - nt / d) * b / d + nt / d * (sh / d + sx / (d - nt - 1.0))
    }
}

pub fn source_risk(d: usize, nt: usize, sx: f64, theta2: f64) -> f64 {
    let (d, nt) = (d as f64, nt as f64);
    if d <= nt - 2.0 {
        (1.0 + d / (nt - d - 1.0)) * sx
    } else if d <= nt + 1.0 {
        INF
    } else {
        (1.0 + nt / (d - nt - 1.0)) * sx + (1.0 - nt / d) * theta2
    }
}

pub fn mltn_risk(d: usize, n: usize, se: f64, b: f64) -> f64 {
    source_risk(d, n, se, b)
}

/// Printed closed form of the Marchenko-Pastur Stieltjes transform at `-alpha`.
pub fn stieltjes(alpha: f64, gamma: f64) -> f64 {
    let a = 1.0 - gamma + alpha;
    let root = (a * a + 4.0 * gamma * alpha).sqrt();
    if a > 0.0 {
        // same root, without the cancellation
        2.0 / (a + root)
    } else {
        (-a + root) / (2.0 * gamma * alpha)
    }
}

/// `∫ (x + α)⁻² dμ(x)`, from differentiating `γα m² + (1-γ+α) m - 1 = 0`.
pub fn stieltjes_sq(alpha: f64, gamma: f64) -> f64 {
    let m = stieltjes(alpha, gamma);
    (gamma * m * m + m) / (2.0 * gamma * alpha * m + 1.0 - gamma + alpha)
}

/// Limiting ridge-type risk with isotropic features when the regularization
/// center misses the truth by energy `g0`.
pub fn isotropic_risk(gamma: f64, se: f64, g0: f64, alpha: f64) -> f64 {
    let m = stieltjes(alpha, gamma);
    let m2 = stieltjes_sq(alpha, gamma);
    se + gamma * se * (m - alpha * m2) + g0 * alpha * alpha * m2
}

pub fn tl_opt_asymptotic(gt: f64, gs: f64, se: f64, sh: f64, sx: f64, b: f64) -> f64 {
    let g0 = if gs < 1.0 {
        sh + gs * sx / (1.0 - gs)
    } else if gs == 1.0 {
        return INF;
    } else {
        (gs - 1.0) / gs * b + (sh + gs * sx / (gs - 1.0)) / gs
    };
    let alpha = se * gt / g0;
    se * (1.0 + gt * stieltjes(alpha, gt))
}

pub fn ridge_alpha(d: usize, n: usize, se: f64, b: f64) -> f64 {
    d as f64 * se / (n as f64 * b)
}

/// Limiting `θ̂ - Hβ` covariance, entry by entry.
pub fn gamma_tl(h: &Matrix, nt: usize, b: f64, sh: f64, sx: f64) -> Option<Matrix> {
    let d = h.nrows();
    let df = d as f64;
    let g = df / nt as f64;
    if d + 1 >= nt && d <= nt + 1 {
        return None;
    }
    let mut hht = Matrix::zeros(d, d);
    let mut kappa = 0.0;
    for i in 0..d {
        for j in 0..d {
            kappa += h[(i, j)] * h[(i, j)];
            let mut s = 0.0;
            for k in 0..d {
                s += h[(i, k)] * h[(j, k)];
            }
            hht[(i, j)] = s;
        }
    }
    kappa /= df;
    let mut out = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let delta = if i == j { 1.0 } else { 0.0 };
            out[(i, j)] = if d + 2 <= nt {
                delta * (sh + g * sx / (1.0 - g)) / df
            } else {
                b / (df * g)
                    * ((g - 1.0).powi(2) / g * hht[(i, j)] + delta * (g - 1.0) / g * (kappa - hht[(j, j)] / df))
                    + delta * (sh + g * sx / (g - 1.0)) / (df * g)
            };
        }
    }
    Some(out)
}

/// Entrywise running mean and standard error of matrix draws.
pub struct MatrixMoments {
    n: usize,
    sum: Matrix,
    sum_sq: Matrix,
}

impl MatrixMoments {
    pub fn new(rows: usize, cols: usize) -> Self {
        MatrixMoments {
            n: 0,
            sum: Matrix::zeros(rows, cols),
            sum_sq: Matrix::zeros(rows, cols),
        }
    }

    pub fn push(&mut self, m: &Matrix) {
        self.n += 1;
        self.sum += m;
        self.sum_sq += m.component_mul(m);
    }

    pub fn mean(&self) -> Matrix {
        &self.sum / self.n as f64
    }

    pub fn stderr(&self) -> Matrix {
        let n = self.n as f64;
        let mean = self.mean();
        Matrix::from_fn(mean.nrows(), mean.ncols(), |i, j| {
            let var = (self.sum_sq[(i, j)] / n - mean[(i, j)].powi(2)).max(0.0) * n / (n - 1.0);
            (var / n).sqrt()
        })
    }
}

/// Outcome of comparing a Monte Carlo mean matrix to its expected value.
#[derive(Debug)]
pub struct EntrywiseCheck {
    pub entries: usize,
    pub exceed: usize,
    pub allowed: usize,
    pub max_z: f64,
}

impl EntrywiseCheck {
    pub fn passed(&self) -> bool {
        self.exceed <= self.allowed
    }
}

/// Counts entries further than `k` standard errors from `expected`. With many
/// entries a few exceedances are expected by chance, so the count may reach
/// its nominal mean plus three binomial standard deviations. Entries with zero
/// spread must match to 1e-9.
pub fn entrywise(mean: &Matrix, se: &Matrix, expected: &Matrix, k: f64) -> EntrywiseCheck {
    let p = 0.0027;
    let m = mean.len();
    let mut exceed = 0;
    let mut max_z: f64 = 0.0;
    for i in 0..m {
        let diff = (mean[i] - expected[i]).abs();
        if diff <= 1e-9 {
            continue;
        }
        let z = diff / se[i];
        max_z = max_z.max(z);
        if z > k {
            exceed += 1;
        }
    }
    let mf = m as f64;
    let allowed = (mf * p + 3.0 * (mf * p * (1.0 - p)).sqrt()).floor() as usize;
    EntrywiseCheck {
        entries: m,
        exceed,
        allowed,
        max_z,
    }
}

/// Mean of the diagonal and of the off-diagonal entries of each draw, as
/// scalar sample sets.
pub fn pooled(draws: &[Matrix]) -> (Vec<f64>, Vec<f64>) {
    let d = draws[0].nrows();
    let diag = draws.iter().map(|m| m.trace() / d as f64).collect();
    let off = draws
        .iter()
        .map(|m| (m.sum() - m.trace()) / (d * d - d).max(1) as f64)
        .collect();
    (diag, off)
}

pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn random_in(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

pub fn random_count(rng: &mut Rng, lo: usize, hi: usize) -> usize {
    lo + ((hi - lo + 1) as f64 * rng.uniform()).floor() as usize
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
