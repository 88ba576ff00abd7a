//! Dense matrix kernel: singular values, Hermitian spectra, Kronecker
//! products and the two bipartite index shuffles (partial transpose and
//! realignment).
//!
//! Everything here is a pure function of its inputs. Bipartite matrices use
//! the composite index `i_M * N + i_N` (first factor slowest).

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type RealMatrix = DMatrix<f64>;

/// Absolute tolerance for comparisons against zero.
pub const ZERO_TOL: f64 = 1e-9;

fn ensure_finite<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> Result<()> {
    if a.iter().all(|z| z.clone().modulus().is_finite()) {
        Ok(())
    } else {
        Err(invalid("matrix has non-finite entries"))
    }
}

/// Singular values of `a`, unordered.
pub fn singular_values<T>(a: &DMatrix<T>) -> Result<DVector<f64>>
where
    T: ComplexField<RealField = f64>,
{
    ensure_finite(a)?;
    if a.is_empty() {
        return Err(invalid("empty matrix"));
    }
    Ok(a.clone().singular_values())
}

/// Ky Fan norm in the sense used throughout the crate: the sum of all
/// singular values, i.e. the trace norm `Tr sqrt(A^dagger A)`.
pub fn ky_fan_norm<T>(a: &DMatrix<T>) -> Result<f64>
where
    T: ComplexField<RealField = f64>,
{
    Ok(singular_values(a)?.iter().map(|s| s.max(0.0)).sum())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Only the lower triangle is trusted; callers validate Hermiticity.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    ensure_finite(h)?;
    if !h.is_square() {
        return Err(invalid(format!(
            "eigenvalues need a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let mut ev: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn min_hermitian_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(h)?[0])
}

/// Kronecker product `A ⊗ B`.
pub fn kron<T>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T>
where
    T: ComplexField,
{
    a.kronecker(b)
}

/// Largest entrywise modulus of `A - A^dagger`.
pub fn hermiticity_deviation(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise modulus of `A - B`. Shapes must agree.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn check_bipartite(rho: &ComplexMatrix, m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(invalid("subsystem dimensions must be positive"));
    }
    if rho.nrows() != m * n || rho.ncols() != m * n {
        return Err(invalid(format!(
            "matrix is {}x{} but bipartition {m}x{n} needs {}x{}",
            rho.nrows(),
            rho.ncols(),
            m * n,
            m * n
        )));
    }
    Ok(())
}

/// Transpose on the second tensor factor.
pub fn partial_transpose(rho: &ComplexMatrix, m: usize, n: usize) -> Result<ComplexMatrix> {
    check_bipartite(rho, m, n)?;
    Ok(ComplexMatrix::from_fn(m * n, m * n, |row, col| {
        let (i, k) = (row / n, row % n);
        let (j, l) = (col / n, col % n);
        rho[(i * n + l, j * n + k)]
    }))
}

/// Realignment reshuffle, `R[(i,j),(k,l)] = rho[(i,k),(j,l)]`, of shape
/// `M^2 x N^2`. For a product `A ⊗ B` this is `vec(A) vec(B)^T` with
/// row-major vectorisation.
pub fn realign(rho: &ComplexMatrix, m: usize, n: usize) -> Result<ComplexMatrix> {
    check_bipartite(rho, m, n)?;
    Ok(ComplexMatrix::from_fn(m * m, n * n, |row, col| {
        let (i, j) = (row / m, row % m);
        let (k, l) = (col / n, col % n);
        rho[(i * n + k, j * n + l)]
    }))
}

/// Promote a real matrix to a complex one.
pub fn complexify(a: &RealMatrix) -> ComplexMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}
