//! Closed-form copula entropy under a Gaussian-copula assumption.

use nalgebra::DMatrix;

use crate::copula::CopulaSample;
use crate::error::{Error, Result};

/// Smallest eigenvalue allowed when repairing the correlation matrix.
pub const EIGEN_FLOOR: f64 = 1e-4;

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Spearman-implied Gaussian correlation matrix, repaired to be positive definite.
pub fn implied_correlation(sample: &CopulaSample) -> Result<DMatrix<f64>> {
    let d = sample.dimension();
    let mut r = DMatrix::<f64>::identity(d, d);
    for i in 0..d {
        for j in i + 1..d {
            // ranks are already uniform, so Pearson on them is Spearman
            let rho_s = pearson(sample.column(i), sample.column(j));
            let v = 2.0 * (std::f64::consts::PI * rho_s / 6.0).sin();
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::ProjectionFailure);
    }
    let eig = r.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|&l| l >= EIGEN_FLOOR) {
        return Ok(r);
    }
    let floored = eig.eigenvalues.map(|l| l.max(EIGEN_FLOOR));
    let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&floored) * eig.eigenvectors.transpose();
    let scale: Vec<f64> = (0..d).map(|i| rebuilt[(i, i)].sqrt()).collect();
    if scale.iter().any(|s| !s.is_finite() || *s <= 0.0) {
        return Err(Error::ProjectionFailure);
    }
    Ok(DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else {
            rebuilt[(i, j)] / (scale[i] * scale[j])
        }
    }))
}

/// `½ log det R` for the Spearman-implied correlation matrix `R`.
pub fn gaussian_copula_entropy(sample: &CopulaSample) -> Result<f64> {
    if sample.dimension() < 2 {
        return Err(Error::InvalidArgument(
            "a Gaussian copula needs at least two coordinates".into(),
        ));
    }
    let r = implied_correlation(sample)?;
    let chol = r.cholesky().ok_or(Error::ProjectionFailure)?;
    let log_det: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
    Ok((0.5 * log_det).min(0.0))
}
