//! Sample means and standard errors in a fixed summation order.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanSe {
    pub fn infinite() -> Self {
        MeanSe {
            mean: f64::INFINITY,
            stderr: 0.0,
        }
    }
}

/// Mean and standard error of the mean, summed in slice order.
pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    if n == 0 {
        return MeanSe {
            mean: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 || !mean.is_finite() {
        return MeanSe {
            mean,
            stderr: if mean.is_finite() { 0.0 } else { f64::NAN },
        };
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    MeanSe {
        mean,
        stderr: (var / n as f64).sqrt(),
    }
}

/// Standard error of `mean(a) - mean(b)` for paired samples drawn on common data.
pub fn paired_diff_se(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    mean_se(&diff).stderr
}

/// Standard error of a difference of two independent means.
pub fn independent_diff_se(a: MeanSe, b: MeanSe) -> f64 {
    a.stderr.hypot(b.stderr)
}
