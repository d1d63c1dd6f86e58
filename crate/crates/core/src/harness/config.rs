//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! n = 64
//! n_tilde = 128
//! d_grid = default            # or 8, 16, 32
//! sigma_eta2 = 0, 0.1, 0.5
//! operator = dct              # identity | dct | circ:w=2/75
//! alpha_mode = optimal        # or grid:0.001,100,50
//!
//! [misspec]
//! q = 128
//! a = 2.5
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorId, SourceMomentForm};
use crate::linalg::{Covariance, Matrix, Vector};
use crate::model::{EtaScaling, MisspecSpec};
use crate::operators::{parse_real, OperatorKind};

#[derive(Clone, Debug, PartialEq)]
pub enum SigmaXSpec {
    Identity,
    /// Diagonal covariance; the listed values repeat cyclically up to `d`.
    Diagonal(Vec<f64>),
    File {
        path: PathBuf,
        matrix: Matrix,
    },
}

impl SigmaXSpec {
    pub fn covariance(&self, d: usize) -> Result<Covariance> {
        match self {
            SigmaXSpec::Identity => Ok(Covariance::identity(d)),
            SigmaXSpec::Diagonal(v) => {
                let vals: Vec<f64> = (0..d).map(|i| v[i % v.len()]).collect();
                Covariance::diagonal(&vals)
            }
            SigmaXSpec::File { path, matrix } => {
                if matrix.nrows() != d {
                    return Err(Error::Shape(format!(
                        "{} is {}x{} but d = {d}",
                        path.display(),
                        matrix.nrows(),
                        matrix.ncols()
                    )));
                }
                Covariance::full(matrix.clone())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaMode {
    Optimal,
    /// Log-spaced grid of `points` values on `[lo, hi]`.
    Grid {
        lo: f64,
        hi: f64,
        points: usize,
    },
}

impl AlphaMode {
    pub fn grid_values(&self) -> Option<Vec<f64>> {
        match *self {
            AlphaMode::Optimal => None,
            AlphaMode::Grid { lo, hi, points } => Some(log_grid(lo, hi, points)),
        }
    }
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AnalyticMode {
    #[default]
    Asymptotic,
    /// Ensemble average of the finite-`n` eigenvalue formulas.
    Semi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MisspecPath {
    /// Sample the effective well-specified model.
    #[default]
    Effective,
    /// Sample the ignored features explicitly.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MisspecConfig {
    pub spec: MisspecSpec,
    pub path: MisspecPath,
    pub eta_scaling: EtaScaling,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub n_tilde: usize,
    pub d_grid: Vec<usize>,
    pub sigma_eps2: f64,
    pub sigma_eta2_list: Vec<f64>,
    pub sigma_xi2: f64,
    pub b: f64,
    pub operator: OperatorKind,
    pub sigma_x: SigmaXSpec,
    pub estimators: Vec<EstimatorId>,
    pub trials: usize,
    pub ensemble_draws: usize,
    pub base_seed: u64,
    pub misspec: Option<MisspecConfig>,
    pub alpha_mode: AlphaMode,
    pub analytic_mode: AnalyticMode,
    pub lmmse_moments: SourceMomentForm,
    pub log_x: bool,
}

/// Geometric spacing over `[n/8, 8n]`, four points per octave, plus both interpolation bands.
pub fn default_d_grid(n: usize, n_tilde: usize) -> Vec<usize> {
    let mut set = BTreeSet::new();
    let start = n as f64 / 8.0;
    for k in 0..=24 {
        let d = (start * 2f64.powf(k as f64 / 4.0)).round() as usize;
        set.insert(d.max(1));
    }
    for c in [n, n_tilde] {
        for d in [c.saturating_sub(1), c, c + 1] {
            if d >= 1 {
                set.insert(d);
            }
        }
    }
    set.into_iter().collect()
}

impl ExperimentConfig {
    /// Defaults for everything except the dimensions.
    pub fn new(n: usize, n_tilde: usize) -> Self {
        ExperimentConfig {
            n,
            n_tilde,
            d_grid: default_d_grid(n, n_tilde),
            sigma_eps2: 0.05,
            sigma_eta2_list: vec![0.0, 0.1, 0.5],
            sigma_xi2: 0.05,
            b: 1.0,
            operator: OperatorKind::DctTranspose,
            sigma_x: SigmaXSpec::Identity,
            estimators: vec![
                EstimatorId::Mltn,
                EstimatorId::Ridge,
                EstimatorId::Tl,
                EstimatorId::Lmmse,
            ],
            trials: 150,
            ensemble_draws: 500,
            base_seed: 0,
            misspec: None,
            alpha_mode: AlphaMode::Optimal,
            analytic_mode: AnalyticMode::Asymptotic,
            lmmse_moments: SourceMomentForm::Exact,
            log_x: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config { line: 0, msg });
        if self.n == 0 || self.n_tilde == 0 {
            return bad("n and n_tilde must be positive".into());
        }
        if self.d_grid.is_empty() || self.d_grid.contains(&0) {
            return bad("d_grid must be nonempty with positive entries".into());
        }
        if self.d_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("d_grid must be strictly ascending".into());
        }
        if self.trials == 0 || self.ensemble_draws == 0 {
            return bad("trials and ensemble_draws must be at least 1".into());
        }
        let sig = [self.sigma_eps2, self.sigma_xi2];
        if sig
            .iter()
            .chain(&self.sigma_eta2_list)
            .any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return bad("every noise level must be finite and >= 0".into());
        }
        if self.sigma_eta2_list.is_empty() {
            return bad("sigma_eta2 needs at least one value".into());
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return bad(format!("b must be > 0, got {}", self.b));
        }
        if self.estimators.is_empty() {
            return bad("no estimators selected".into());
        }
        if let AlphaMode::Grid { lo, hi, points } = self.alpha_mode {
            if !(lo > 0.0 && hi >= lo && points >= 1) {
                return bad("alpha grid needs 0 < lo <= hi and points >= 1".into());
            }
        }
        if let SigmaXSpec::Diagonal(v) = &self.sigma_x {
            if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return bad("diagonal Sigma_x entries must be positive".into());
            }
        }
        if let SigmaXSpec::File { matrix, .. } = &self.sigma_x {
            if self.d_grid.iter().any(|&d| d != matrix.nrows()) {
                return bad("a Sigma_x file fixes d; use a single-entry d_grid".into());
            }
        }
        if let Some(m) = &self.misspec {
            if m.path == MisspecPath::Full {
                if let Some(&d) = self.d_grid.iter().find(|&&d| d > m.spec.q) {
                    return bad(format!(
                        "full misspecified path needs q >= d, but d = {d} > q = {}",
                        m.spec.q
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        parse_config(&text, base)
    }
}

fn parse_list<T, F: Fn(&str) -> Option<T>>(v: &str, f: F) -> Option<Vec<T>> {
    v.split(',').map(|p| f(p.trim())).collect()
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

/// Parses a config document. Relative `file:` paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    let mut n = None;
    let mut n_tilde = None;
    let mut d_grid: Option<Vec<usize>> = None;
    let mut cfg = ExperimentConfig::new(1, 1);
    let mut misspec_keys: Vec<(usize, String, String)> = Vec::new();
    let mut in_misspec = false;
    let mut seen = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Config { line: line_no, msg };
        if line.starts_with('[') {
            if line == "[misspec]" && !in_misspec {
                in_misspec = true;
                continue;
            }
            return Err(err(format!("unknown or repeated section `{line}`")));
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let scoped = if in_misspec {
            format!("misspec.{key}")
        } else {
            key.to_string()
        };
        if !seen.insert(scoped) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        if in_misspec {
            misspec_keys.push((line_no, key.to_string(), value.to_string()));
            continue;
        }
        let invalid = || err(format!("invalid value `{value}` for `{key}`"));
        match key {
            "n" => n = Some(value.parse().map_err(|_| invalid())?),
            "n_tilde" => n_tilde = Some(value.parse().map_err(|_| invalid())?),
            "d_grid" => {
                if value != "default" {
                    d_grid = Some(parse_list(value, |p| p.parse().ok()).ok_or_else(invalid)?);
                }
            }
            "sigma_eps2" => cfg.sigma_eps2 = parse_real(value).ok_or_else(invalid)?,
            "sigma_eta2" => cfg.sigma_eta2_list = parse_list(value, parse_real).ok_or_else(invalid)?,
            "sigma_xi2" => cfg.sigma_xi2 = parse_real(value).ok_or_else(invalid)?,
            "b" => cfg.b = parse_real(value).ok_or_else(invalid)?,
            "operator" => cfg.operator = value.parse().map_err(|e: Error| err(e.to_string()))?,
            "sigma_x" => {
                cfg.sigma_x = if value == "identity" {
                    SigmaXSpec::Identity
                } else if let Some(rest) = value.strip_prefix("diag:") {
                    SigmaXSpec::Diagonal(parse_list(rest, parse_real).ok_or_else(invalid)?)
                } else if let Some(rest) = value.strip_prefix("file:") {
                    let path = base_dir.join(rest.trim());
                    let matrix = read_matrix_file(&path).map_err(|e| err(e.to_string()))?;
                    SigmaXSpec::File { path, matrix }
                } else {
                    return Err(invalid());
                }
            }
            "estimators" => {
                cfg.estimators = parse_list(value, |p| p.parse().ok()).ok_or_else(invalid)?;
            }
            "trials" => cfg.trials = value.parse().map_err(|_| invalid())?,
            "ensemble_draws" => cfg.ensemble_draws = value.parse().map_err(|_| invalid())?,
            "seed" => cfg.base_seed = value.parse().map_err(|_| invalid())?,
            "alpha_mode" => {
                cfg.alpha_mode = if value == "optimal" {
                    AlphaMode::Optimal
                } else if let Some(rest) = value.strip_prefix("grid:") {
                    let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
                    if parts.len() != 3 {
                        return Err(invalid());
                    }
                    AlphaMode::Grid {
                        lo: parse_real(parts[0]).ok_or_else(invalid)?,
                        hi: parse_real(parts[1]).ok_or_else(invalid)?,
                        points: parts[2].parse().map_err(|_| invalid())?,
                    }
                } else {
                    return Err(invalid());
                }
            }
            "analytic" => {
                cfg.analytic_mode = match value {
                    "asymptotic" => AnalyticMode::Asymptotic,
                    "semi" => AnalyticMode::Semi,
                    _ => return Err(invalid()),
                }
            }
            "lmmse_moments" => {
                cfg.lmmse_moments = match value {
                    "exact" => SourceMomentForm::Exact,
                    "printed" => SourceMomentForm::Printed,
                    _ => return Err(invalid()),
                }
            }
            "log_x" => cfg.log_x = parse_bool(value).ok_or_else(invalid)?,
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
    }

    let n = n.ok_or(Error::Config {
        line: 0,
        msg: "missing `n`".into(),
    })?;
    let n_tilde = n_tilde.ok_or(Error::Config {
        line: 0,
        msg: "missing `n_tilde`".into(),
    })?;
    cfg.n = n;
    cfg.n_tilde = n_tilde;
    cfg.d_grid = d_grid.unwrap_or_else(|| default_d_grid(n, n_tilde));

    if in_misspec {
        let (mut q, mut a, mut rho, mut omega) = (None, None, None, None);
        let mut path = MisspecPath::Effective;
        let mut eta_scaling = EtaScaling::PerVector;
        for (line, key, value) in misspec_keys {
            let invalid = || Error::Config {
                line,
                msg: format!("invalid value `{value}` for `{key}`"),
            };
            match key.as_str() {
                "q" => q = Some(value.parse::<usize>().map_err(|_| invalid())?),
                "a" => a = Some(parse_real(&value).ok_or_else(invalid)?),
                "rho" => rho = Some(parse_real(&value).ok_or_else(invalid)?),
                "omega" => omega = Some(parse_real(&value).ok_or_else(invalid)?),
                "path" => {
                    path = match value.as_str() {
                        "effective" => MisspecPath::Effective,
                        "full" => MisspecPath::Full,
                        _ => return Err(invalid()),
                    }
                }
                "eta_scaling" => {
                    eta_scaling = match value.as_str() {
                        "per_vector" => EtaScaling::PerVector,
                        "per_coordinate" => EtaScaling::PerCoordinate,
                        _ => return Err(invalid()),
                    }
                }
                _ => {
                    return Err(Error::Config {
                        line,
                        msg: format!("unknown key `{key}` in [misspec]"),
                    })
                }
            }
        }
        let missing = |k: &str| Error::Config {
            line: 0,
            msg: format!("[misspec] is missing `{k}`"),
        };
        let spec = MisspecSpec::new(
            q.ok_or_else(|| missing("q"))?,
            a.ok_or_else(|| missing("a"))?,
            rho.ok_or_else(|| missing("rho"))?,
            omega.ok_or_else(|| missing("omega"))?,
        )
        .map_err(|e| Error::Config {
            line: 0,
            msg: e.to_string(),
        })?;
        cfg.misspec = Some(MisspecConfig {
            spec,
            path,
            eta_scaling,
        });
    }
    cfg.validate()?;
    Ok(cfg)
}

/// First line `rows cols`, then whitespace-separated values in row-major order.
pub fn read_matrix_file(path: &Path) -> Result<Matrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (first_no, first) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty matrix file".into(),
    })?;
    let dims: Vec<usize> = first
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse {
            line: first_no + 1,
            msg: "expected `rows cols`".into(),
        })?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse {
            line: first_no + 1,
            msg: "expected `rows cols`".into(),
        });
    };
    let mut values = Vec::with_capacity(rows * cols);
    for (no, l) in lines {
        for tok in l.split_whitespace() {
            values.push(tok.parse::<f64>().map_err(|_| Error::Parse {
                line: no + 1,
                msg: format!("not a number: `{tok}`"),
            })?);
        }
    }
    if values.len() != rows * cols {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {} values, found {}", rows * cols, values.len()),
        });
    }
    Ok(Matrix::from_row_slice(rows, cols, &values))
}

/// Spectrum helper for diagonal covariance specs, used by the CLI.
pub fn diagonal_values(spec: &SigmaXSpec, d: usize) -> Option<Vector> {
    match spec {
        SigmaXSpec::Diagonal(v) => Some(Vector::from_iterator(d, (0..d).map(|i| v[i % v.len()]))),
        SigmaXSpec::Identity => Some(Vector::from_element(d, 1.0)),
        SigmaXSpec::File { .. } => None,
    }
}
