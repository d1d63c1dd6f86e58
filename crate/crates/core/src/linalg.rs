//! Seeded Gaussian ensembles and the dense kernels the rest of the crate leans on.

use nalgebra::{Cholesky, SymmetricEigen, SVD};
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;

/// Singular values below `PINV_REL_TOL * max(rows, cols) * sigma_max` count as zero.
pub const PINV_REL_TOL: f64 = 1e-12;

/// Counter-based generator addressed by `(seed, stream_id)`.
///
/// Two values built from the same pair produce the same sequence regardless of
/// which thread consumes them.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Rng { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh generator on a stream derived from this one and `key`.
    pub fn substream(&self, key: &[u64]) -> Rng {
        let mut parts = Vec::with_capacity(key.len() + 1);
        parts.push(self.stream_id);
        parts.extend_from_slice(key);
        Rng::new(self.seed, stream_key(&parts))
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn normal_vector(&mut self, len: usize) -> Vector {
        let data: Vec<f64> = (0..len).map(|_| self.normal()).collect();
        Vector::from_vec(data)
    }

    /// `rows x cols` standard normals, drawn in row-major order.
    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        let data: Vec<f64> = (0..rows * cols).map(|_| self.normal()).collect();
        Matrix::from_row_slice(rows, cols, &data)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive 64-bit mix of a key tuple, stable across platforms and releases.
pub fn stream_key(parts: &[u64]) -> u64 {
    let mut h = 0x6A09_E667_F3BC_C908u64 ^ parts.len() as u64;
    for &p in parts {
        h = splitmix64(h ^ splitmix64(p));
    }
    h
}

/// Row covariance of a Gaussian design. The identity case never factors anything.
#[derive(Clone, Debug)]
pub enum Covariance {
    Identity(usize),
    Full { matrix: Matrix, lower: Matrix },
}

impl Covariance {
    pub fn identity(d: usize) -> Self {
        Covariance::Identity(d)
    }

    /// Validates symmetry and positive definiteness through a Cholesky factorization.
    pub fn full(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape(format!(
                "covariance must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::EmptyDimension);
        }
        check_symmetric(&matrix)?;
        let lower = Cholesky::new(matrix.clone()).ok_or(Error::CovarianceNotSpd)?.unpack();
        Ok(Covariance::Full { matrix, lower })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::CovarianceNotSpd);
        }
        Covariance::full(Matrix::from_diagonal(&Vector::from_column_slice(values)))
    }

    pub fn dim(&self) -> usize {
        match self {
            Covariance::Identity(d) => *d,
            Covariance::Full { matrix, .. } => matrix.nrows(),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Covariance::Identity(_) => true,
            Covariance::Full { matrix, .. } => *matrix == Matrix::identity(matrix.nrows(), matrix.nrows()),
        }
    }

    /// Scale `s` when the covariance equals `s * I`.
    pub fn isotropic_scale(&self) -> Option<f64> {
        match self {
            Covariance::Identity(_) => Some(1.0),
            Covariance::Full { matrix, .. } => {
                let s = matrix[(0, 0)];
                let d = matrix.nrows();
                let scalar = (0..d).all(|i| (0..d).all(|j| matrix[(i, j)] == if i == j { s } else { 0.0 }));
                scalar.then_some(s)
            }
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        match self {
            Covariance::Identity(d) => Matrix::identity(*d, *d),
            Covariance::Full { matrix, .. } => matrix.clone(),
        }
    }

    /// `vᵀ Σ v`.
    pub fn quad_form(&self, v: &Vector) -> f64 {
        match self {
            Covariance::Identity(_) => v.norm_squared(),
            Covariance::Full { matrix, .. } => v.dot(&(matrix * v)),
        }
    }
}

/// Rows drawn independently from `N(0, cov)`.
pub fn sample_gaussian_matrix(rows: usize, cols: usize, cov: &Covariance, rng: &mut Rng) -> Result<Matrix> {
    if cov.dim() != cols {
        return Err(Error::Shape(format!(
            "covariance is {0}x{0} but {cols} columns were requested",
            cov.dim()
        )));
    }
    let g = rng.normal_matrix(rows, cols);
    Ok(match cov {
        Covariance::Identity(_) => g,
        Covariance::Full { lower, .. } => g * lower.transpose(),
    })
}

fn check_symmetric(s: &Matrix) -> Result<()> {
    let scale = s.amax();
    let asym = (s - s.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

fn svd_cutoff(a: &Matrix, sv: &Vector) -> f64 {
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    PINV_REL_TOL * a.nrows().max(a.ncols()) as f64 * smax
}

/// Moore-Penrose pseudoinverse through an SVD.
pub fn pseudoinverse(a: &Matrix) -> Matrix {
    if a.is_empty() {
        return Matrix::zeros(a.ncols(), a.nrows());
    }
    let svd = SVD::new(a.clone(), true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let cut = svd_cutoff(a, &svd.singular_values);
    let mut out = Matrix::zeros(a.ncols(), a.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cut && s > 0.0 {
            out += (vt.row(k).transpose() / s) * u.column(k).transpose();
        }
    }
    out
}

/// `A⁺ b`, the minimum-norm least-squares solution.
pub fn pseudoinverse_apply(a: &Matrix, b: &Vector) -> Result<Vector> {
    if a.nrows() != b.len() {
        return Err(Error::Shape(format!(
            "A has {} rows but b has length {}",
            a.nrows(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Ok(Vector::zeros(a.ncols()));
    }
    let svd = SVD::new(a.clone(), true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let cut = svd_cutoff(a, &svd.singular_values);
    let mut coeff = u.tr_mul(b);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        coeff[k] = if s > cut && s > 0.0 { coeff[k] / s } else { 0.0 };
    }
    Ok(vt.tr_mul(&coeff))
}

/// Same contract as [`pseudoinverse_apply`], but tries a Cholesky factorization of
/// the smaller Gram matrix first and falls back to the SVD when it is badly conditioned.
pub fn min_norm_solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    if a.nrows() != b.len() {
        return Err(Error::Shape(format!(
            "A has {} rows but b has length {}",
            a.nrows(),
            b.len()
        )));
    }
    let tall = a.nrows() >= a.ncols();
    let gram = if tall { gram_cols(a) } else { gram_rows(a) };
    if let Some(ch) = Cholesky::new(gram) {
        let diag = ch.l_dirty().diagonal();
        let (lo, hi) = diag
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        // (lo/hi)^2 tracks the reciprocal condition number of the Gram matrix
        if hi > 0.0 && (lo / hi).powi(2) > 1e-9 {
            return Ok(if tall {
                ch.solve(&a.tr_mul(b))
            } else {
                a.tr_mul(&ch.solve(b))
            });
        }
    }
    pseudoinverse_apply(a, b)
}

/// `AᵀA`.
pub fn gram_cols(a: &Matrix) -> Matrix {
    a.transpose() * a
}

/// `AAᵀ`.
pub fn gram_rows(a: &Matrix) -> Matrix {
    a * a.transpose()
}

/// Eigenpairs of a symmetric matrix, largest eigenvalue first.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vector,
    pub vectors: Matrix,
    /// Eigenvalues below `-1e-10 * max|S|`.
    pub negative: usize,
}

pub fn sym_eigendecomposition(s: &Matrix) -> Result<SymEigen> {
    if !s.is_square() {
        return Err(Error::Shape(format!("{}x{} is not square", s.nrows(), s.ncols())));
    }
    check_symmetric(s)?;
    let eig = SymmetricEigen::new(s.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = Vector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = Matrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    let floor = -1e-10 * s.amax();
    let negative = values.iter().filter(|&&v| v < floor).count();
    Ok(SymEigen {
        values,
        vectors,
        negative,
    })
}

/// Eigenvalues only, unsorted. No symmetry check; callers pass Gram matrices.
pub fn sym_eigenvalues(s: &Matrix) -> Vector {
    s.clone().symmetric_eigenvalues()
}

/// Solution of an SPD system and whether the jitter fallback was needed.
#[derive(Clone, Debug)]
pub struct SpdSolution<T> {
    pub x: T,
    pub jittered: bool,
}

fn spd_factor(a: &Matrix) -> Result<(Cholesky<f64, nalgebra::Dyn>, bool)> {
    if let Some(ch) = Cholesky::new(a.clone()) {
        return Ok((ch, false));
    }
    let d = a.nrows().max(1) as f64;
    let jitter = 1e-12 * a.trace().abs() / d;
    let mut shifted = a.clone();
    for i in 0..a.nrows() {
        shifted[(i, i)] += jitter;
    }
    Cholesky::new(shifted).map(|ch| (ch, true)).ok_or(Error::SingularSystem)
}

/// Cholesky solve with a `1e-12 * trace / d` diagonal jitter retry.
pub fn solve_spd(a: &Matrix, b: &Vector) -> Result<SpdSolution<Vector>> {
    if !a.is_square() || a.nrows() != b.len() {
        return Err(Error::Shape(format!(
            "system {}x{} with right-hand side {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let (ch, jittered) = spd_factor(a)?;
    Ok(SpdSolution {
        x: ch.solve(b),
        jittered,
    })
}

pub fn solve_spd_matrix(a: &Matrix, b: &Matrix) -> Result<SpdSolution<Matrix>> {
    if !a.is_square() || a.nrows() != b.nrows() {
        return Err(Error::Shape(format!(
            "system {}x{} with right-hand side {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let (ch, jittered) = spd_factor(a)?;
    Ok(SpdSolution {
        x: ch.solve(b),
        jittered,
    })
}
