use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Uniform draw from the unit sphere in `dim` dimensions.
pub fn sample_unit_sphere<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vec<f64>> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return Ok(v.into_iter().map(|x| x / norm).collect());
        }
    }
}

/// Symmetric positive semidefinite covariance with a cached lower factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    dim: usize,
    /// Row-major; `None` means the identity.
    matrix: Option<Vec<f64>>,
    factor: Option<Vec<f64>>,
}

impl Covariance {
    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        Ok(Self {
            dim,
            matrix: None,
            factor: None,
        })
    }

    /// Unit variances with every pair correlated at `rho`.
    pub fn equicorrelated(dim: usize, rho: f64) -> Result<Self> {
        if rho == 0.0 {
            return Self::identity(dim);
        }
        let mut m = vec![rho; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = 1.0;
        }
        Self::from_matrix(dim, m)
    }

    pub fn from_matrix(dim: usize, matrix: Vec<f64>) -> Result<Self> {
        if dim == 0 || matrix.len() != dim * dim {
            return Err(Error::invalid("covariance must be a non-empty square matrix"));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("covariance has non-finite entries"));
        }
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (matrix[i * dim + j], matrix[j * dim + i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::invalid("covariance is not symmetric"));
                }
            }
        }
        let factor = psd_cholesky(dim, &matrix)?;
        Ok(Self {
            dim,
            matrix: Some(matrix),
            factor: Some(factor),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_none()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match &self.matrix {
            Some(m) => m[i * self.dim + j],
            None => f64::from(u8::from(i == j)),
        }
    }

    /// `v' S v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim);
        match &self.matrix {
            None => v.iter().map(|x| x * x).sum(),
            Some(m) => {
                let d = self.dim;
                (0..d)
                    .map(|i| {
                        let row = &m[i * d..(i + 1) * d];
                        v[i] * row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
                    })
                    .sum()
            }
        }
    }

    /// Draw from `N(0, S)` as `L z` with `z` standard normal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
        match &self.factor {
            None => z,
            Some(l) => {
                let d = self.dim;
                (0..d)
                    .map(|i| (0..=i).map(|k| l[i * d + k] * z[k]).sum())
                    .collect()
            }
        }
    }
}

pub fn sample_gaussian<R: Rng + ?Sized>(cov: &Covariance, rng: &mut R) -> Vec<f64> {
    cov.sample(rng)
}

/// Lower Cholesky factor that tolerates zero pivots, so singular but
/// positive semidefinite matrices are accepted.
fn psd_cholesky(dim: usize, m: &[f64]) -> Result<Vec<f64>> {
    let scale = (0..dim).map(|i| m[i * dim + i].abs()).fold(0.0, f64::max);
    let tol = 1e-10 * scale.max(1.0);
    let mut l = vec![0.0f64; dim * dim];
    for j in 0..dim {
        let diag = m[j * dim + j] - (0..j).map(|k| l[j * dim + k].powi(2)).sum::<f64>();
        if diag < -tol {
            return Err(Error::invalid("covariance is not positive semidefinite"));
        }
        if diag <= tol {
            // zero pivot: the remainder of the column must vanish too
            for i in j + 1..dim {
                let off = m[i * dim + j] - (0..j).map(|k| l[i * dim + k] * l[j * dim + k]).sum::<f64>();
                if off.abs() > tol.sqrt() {
                    return Err(Error::invalid("covariance is not positive semidefinite"));
                }
            }
            continue;
        }
        let root = diag.sqrt();
        l[j * dim + j] = root;
        for i in j + 1..dim {
            let off = m[i * dim + j] - (0..j).map(|k| l[i * dim + k] * l[j * dim + k]).sum::<f64>();
            l[i * dim + j] = off / root;
        }
    }
    Ok(l)
}
