use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::numerics::{self, ComplexMatrix};

/// Tolerance for the Hermiticity, trace and positivity checks.
pub const VALIDATION_TOL: f64 = 1e-8;

/// A bipartite density matrix on `C^M ⊗ C^N`.
///
/// Construction checks Hermiticity and unit trace; a negative eigenvalue
/// below `-VALIDATION_TOL` is logged, not rejected, since mixtures taken at
/// their boundary parameters pick up rounding noise.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    m: usize,
    n: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix, m: usize, n: usize) -> Result<Self> {
        let rho = Self::new_unchecked_psd(mat, m, n)?;
        let min_ev = rho.min_eigenvalue()?;
        if min_ev < -VALIDATION_TOL {
            log::warn!("density matrix has negative eigenvalue {min_ev:.3e}");
        }
        Ok(rho)
    }

    /// Like [`DensityMatrix::new`] but fails on a negative eigenvalue.
    pub fn new_strict(mat: ComplexMatrix, m: usize, n: usize) -> Result<Self> {
        let rho = Self::new_unchecked_psd(mat, m, n)?;
        let min_ev = rho.min_eigenvalue()?;
        if min_ev < -VALIDATION_TOL {
            return Err(Error::NotPositive(min_ev));
        }
        Ok(rho)
    }

    fn new_unchecked_psd(mat: ComplexMatrix, m: usize, n: usize) -> Result<Self> {
        if m < 2 || n < 2 {
            return Err(invalid(format!("subsystem dimensions must be >= 2, got {m}x{n}")));
        }
        if mat.nrows() != m * n || mat.ncols() != m * n {
            return Err(invalid(format!(
                "matrix is {}x{} but bipartition {m}x{n} needs {}x{}",
                mat.nrows(),
                mat.ncols(),
                m * n,
                m * n
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        let dev = numerics::hermiticity_deviation(&mat);
        if dev > VALIDATION_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = mat.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > VALIDATION_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        Ok(Self { m, n, mat })
    }

    /// Build `sum_i w_i rho_i`. Weights are not required to be normalised,
    /// the result is validated as usual.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| invalid("empty mixture"))?;
        let (m, n) = first.dims();
        let mut acc = ComplexMatrix::zeros(m * n, m * n);
        for (w, rho) in parts {
            if rho.dims() != (m, n) {
                return Err(invalid("mixture of states with different bipartitions"));
            }
            acc += rho.matrix() * Complex64::new(*w, 0.0);
        }
        Self::new(acc, m, n)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn dim(&self) -> usize {
        self.m * self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        numerics::min_hermitian_eigenvalue(&self.mat)
    }

    pub fn partial_transpose(&self) -> ComplexMatrix {
        numerics::partial_transpose(&self.mat, self.m, self.n).expect("dims validated")
    }

    pub fn realign(&self) -> ComplexMatrix {
        numerics::realign(&self.mat, self.m, self.n).expect("dims validated")
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix({}x{}) {}", self.m, self.n, self.mat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_inputs() {
        let id = ComplexMatrix::identity(4, 4);
        assert!(matches!(DensityMatrix::new(id.clone(), 2, 2), Err(Error::BadTrace(_))));
        assert!(DensityMatrix::new(id.clone() / Complex64::new(4.0, 0.0), 2, 3).is_err());
        assert!(DensityMatrix::new(id.clone() / Complex64::new(4.0, 0.0), 1, 4).is_err());

        let mut nh = id / Complex64::new(4.0, 0.0);
        nh[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(nh, 2, 2), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn strict_rejects_negative_spectrum() {
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 0)] = Complex64::new(1.5, 0.0);
        m[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(m.clone(), 2, 2).is_ok());
        assert!(matches!(DensityMatrix::new_strict(m, 2, 2), Err(Error::NotPositive(_))));
    }
}
