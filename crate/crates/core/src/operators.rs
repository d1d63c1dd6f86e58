//! Task-relation operators `H` at a chosen resolution `d`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorKind {
    Identity,
    /// Transpose of the orthonormal type-II DCT matrix.
    DctTranspose,
    /// Circular convolution with `δ(τ) + exp(-|τ - 0.5| / width)`.
    CirculantKernel {
        width: f64,
    },
}

impl OperatorKind {
    /// `HᵀH = I` for this kind at every resolution.
    pub fn is_orthonormal(&self) -> bool {
        matches!(self, OperatorKind::Identity | OperatorKind::DctTranspose)
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::Identity => write!(f, "identity"),
            OperatorKind::DctTranspose => write!(f, "dct"),
            OperatorKind::CirculantKernel { width } => write!(f, "circ:w={width}"),
        }
    }
}

/// Accepts a decimal or a ratio such as `2/75`.
pub(crate) fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().ok()?;
        let b: f64 = b.trim().parse().ok()?;
        return Some(a / b);
    }
    s.parse().ok()
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "identity" => return Ok(OperatorKind::Identity),
            "dct" => return Ok(OperatorKind::DctTranspose),
            _ => {}
        }
        let width = s
            .strip_prefix("circ:w=")
            .and_then(parse_real)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown operator spec `{s}`")))?;
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kernel width must be positive, got {width}"
            )));
        }
        Ok(OperatorKind::CirculantKernel { width })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub d: usize,
}

/// A built operator together with the quantities derived from it once.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub h: Matrix,
    /// `(1/d) ‖H‖_F²`.
    pub kappa_h: f64,
    pub min_singular_value: f64,
    inverse: Matrix,
}

impl OperatorMatrix {
    pub fn d(&self) -> usize {
        self.h.nrows()
    }

    pub fn is_orthonormal(&self) -> bool {
        self.kind.is_orthonormal()
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inverse
    }

    fn from_h(kind: OperatorKind, h: Matrix, min_singular_value: f64) -> Result<Self> {
        let d = h.nrows();
        let kappa_h = h.norm_squared() / d as f64;
        let inverse = if kind.is_orthonormal() {
            h.transpose()
        } else {
            h.clone()
                .try_inverse()
                .ok_or_else(|| Error::InvalidParameter(format!("operator {kind} is singular at d = {d}")))?
        };
        Ok(OperatorMatrix {
            kind,
            h,
            kappa_h,
            min_singular_value,
            inverse,
        })
    }
}

/// Orthonormal DCT-II matrix: row `k` is the `k`-th cosine basis vector.
pub fn dct2_matrix(d: usize) -> Matrix {
    Matrix::from_fn(d, d, |k, j| {
        let s = if k == 0 {
            (1.0 / d as f64).sqrt()
        } else {
            (2.0 / d as f64).sqrt()
        };
        s * (PI * (2 * j + 1) as f64 * k as f64 / (2 * d) as f64).cos()
    })
}

/// Discrete kernel with the peak at index 0, before normalization.
pub(crate) fn circulant_kernel(d: usize, width: f64, with_exp: bool) -> Vec<f64> {
    let exp_term = |j: usize| {
        if with_exp {
            let tau = j as f64 / d as f64;
            (-(tau - 0.5).abs() / width).exp()
        } else {
            0.0
        }
    };
    // first index whose sample is nearest to tau = 0.5
    let peak = (0..d)
        .min_by(|&a, &b| {
            let da = (a as f64 / d as f64 - 0.5).abs();
            let db = (b as f64 / d as f64 - 0.5).abs();
            da.total_cmp(&db)
        })
        .unwrap_or(0);
    let mut k: Vec<f64> = (0..d).map(|j| exp_term((j + peak) % d)).collect();
    k[0] += 1.0;
    k
}

fn circulant_from_kernel(kind: OperatorKind, kernel: &[f64]) -> Result<OperatorMatrix> {
    let d = kernel.len();
    let energy: f64 = kernel.iter().map(|v| v * v).sum();
    let scale = 1.0 / energy.sqrt();
    let h = Matrix::from_fn(d, d, |i, l| scale * kernel[(i + d - l) % d]);
    // singular values of a circulant are the moduli of the kernel's DFT
    let mut min_sv = f64::INFINITY;
    for f in 0..d {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, &kj) in kernel.iter().enumerate() {
            let ang = -2.0 * PI * ((f * j) % d) as f64 / d as f64;
            re += kj * ang.cos();
            im += kj * ang.sin();
        }
        min_sv = min_sv.min(scale * re.hypot(im));
    }
    OperatorMatrix::from_h(kind, h, min_sv)
}

pub fn build_operator(spec: OperatorSpec) -> Result<OperatorMatrix> {
    let d = spec.d;
    if d == 0 {
        return Err(Error::EmptyDimension);
    }
    match spec.kind {
        OperatorKind::Identity => OperatorMatrix::from_h(spec.kind, Matrix::identity(d, d), 1.0),
        OperatorKind::DctTranspose => OperatorMatrix::from_h(spec.kind, dct2_matrix(d).transpose(), 1.0),
        OperatorKind::CirculantKernel { width } => {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "kernel width must be positive, got {width}"
                )));
            }
            circulant_from_kernel(spec.kind, &circulant_kernel(d, width, true))
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResolutionReport {
    pub kappas: Vec<(usize, f64)>,
    pub passed: bool,
}

/// `κ_H` at each resolution; passes when all are `1 ± 1e-12`.
pub fn resolution_consistency_check(kind: OperatorKind, d_list: &[usize]) -> Result<ResolutionReport> {
    if d_list.is_empty() {
        return Err(Error::InvalidParameter("empty resolution list".into()));
    }
    let mut kappas = Vec::with_capacity(d_list.len());
    for &d in d_list {
        let op = build_operator(OperatorSpec { kind, d })?;
        kappas.push((d, op.kappa_h));
    }
    let passed = kappas.iter().all(|(_, k)| (k - 1.0).abs() <= 1e-12);
    Ok(ResolutionReport { kappas, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(kind: OperatorKind, d: usize) -> OperatorMatrix {
        build_operator(OperatorSpec { kind, d }).unwrap()
    }

    #[test]
    fn parse_specs() {
        assert_eq!("identity".parse::<OperatorKind>().unwrap(), OperatorKind::Identity);
        assert_eq!("dct".parse::<OperatorKind>().unwrap(), OperatorKind::DctTranspose);
        assert_eq!(
            "circ:w=2/75".parse::<OperatorKind>().unwrap(),
            OperatorKind::CirculantKernel { width: 2.0 / 75.0 }
        );
        assert!("circ:w=-1".parse::<OperatorKind>().is_err());
        assert!("fft".parse::<OperatorKind>().is_err());
        let k: OperatorKind = "circ:w=0.25".parse().unwrap();
        assert_eq!(k.to_string().parse::<OperatorKind>().unwrap(), k);
    }

    #[test]
    fn identity_and_dct() {
        let i = op(OperatorKind::Identity, 4);
        assert_eq!(i.h, Matrix::identity(4, 4));
        assert_eq!(i.kappa_h, 1.0);
        let c = op(OperatorKind::DctTranspose, 8);
        assert!((c.h.transpose() * &c.h - Matrix::identity(8, 8)).amax() <= 1e-12);
        assert!((c.kappa_h - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dct_first_column_is_constant() {
        let c = op(OperatorKind::DctTranspose, 5);
        for i in 0..5 {
            assert!((c.h[(i, 0)] - (0.2f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(
            build_operator(OperatorSpec {
                kind: OperatorKind::Identity,
                d: 0
            }),
            Err(Error::EmptyDimension)
        ));
    }

    #[test]
    fn circulant_structure() {
        let c = op(OperatorKind::CirculantKernel { width: 2.0 / 75.0 }, 64);
        assert!((c.kappa_h - 1.0).abs() <= 1e-12);
        for i in 1..64 {
            for l in 0..64 {
                assert_eq!(c.h[(i, l)], c.h[(0, (l + 64 - i) % 64)]);
            }
        }
        // the peak sits on the diagonal
        assert!((1..64).all(|l| c.h[(0, 0)] > c.h[(0, l)]));
        assert!(c.min_singular_value > 0.0);
        let sv = c.h.clone().singular_values();
        assert!((sv.min() - c.min_singular_value).abs() < 1e-10);
        assert!((c.inverse() * &c.h - Matrix::identity(64, 64)).amax() < 1e-10);
    }

    #[test]
    fn circulant_commutes_with_shift() {
        for d in [7, 32] {
            let c = op(OperatorKind::CirculantKernel { width: 0.1 }, d);
            let shift = Matrix::from_fn(d, d, |i, j| if j == (i + 1) % d { 1.0 } else { 0.0 });
            assert!((&shift * &c.h - &c.h * &shift).amax() < 1e-10);
        }
    }

    #[test]
    fn delta_only_kernel_is_identity() {
        let kind = OperatorKind::CirculantKernel { width: 0.1 };
        let c = circulant_from_kernel(kind, &circulant_kernel(16, 0.1, false)).unwrap();
        assert_eq!(c.h, Matrix::identity(16, 16));
    }

    #[test]
    fn resolution_reports() {
        let r = resolution_consistency_check(OperatorKind::Identity, &[4, 16, 64]).unwrap();
        assert!(r.passed && r.kappas.iter().all(|(_, k)| *k == 1.0));
        assert!(
            resolution_consistency_check(OperatorKind::DctTranspose, &[8, 32])
                .unwrap()
                .passed
        );
        let r = resolution_consistency_check(OperatorKind::CirculantKernel { width: 2.0 / 25.0 }, &[32, 128]).unwrap();
        assert!(r.passed);
        assert!(resolution_consistency_check(OperatorKind::Identity, &[]).is_err());
    }
}
