//! State factories: the reference families plus seeded random
//! states for property tests.
//!
//! Composite basis index `|i j>` maps to `i * N + j`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::density::DensityMatrix;
use crate::error::{invalid, Result};
use crate::numerics::ComplexMatrix;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in [0, 1], got {v}")))
    }
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn projector(psi: &DVector<Complex64>) -> ComplexMatrix {
    psi * psi.adjoint()
}

pub fn pure_state(psi: &DVector<Complex64>, m: usize, n: usize) -> Result<DensityMatrix> {
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(invalid("zero state vector"));
    }
    DensityMatrix::new(projector(&(psi / c(norm))), m, n)
}

pub fn maximally_mixed(m: usize, n: usize) -> Result<DensityMatrix> {
    let d = m * n;
    DensityMatrix::new(ComplexMatrix::identity(d, d) / c(d as f64), m, n)
}

pub fn product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(a.kronecker(b), a.nrows(), b.nrows())
}

/// Generalised isotropic state
/// `(1-p)/(d1 d2) I + p |ψ+><ψ+|`, `|ψ+> = d1^{-1/2} sum_i |i>|i>`,
/// using the first `d1` basis vectors of the second factor.
pub fn isotropic(d1: usize, d2: usize, p: f64) -> Result<DensityMatrix> {
    if d1 < 2 || d1 > d2 {
        return Err(invalid(format!("isotropic state needs 2 <= d1 <= d2, got d1={d1}, d2={d2}")));
    }
    check_unit("p", p)?;
    let d = d1 * d2;
    let mut psi = DVector::zeros(d);
    let amp = c(1.0 / (d1 as f64).sqrt());
    for i in 0..d1 {
        psi[i * d2 + i] = amp;
    }
    let mat = ComplexMatrix::identity(d, d) * c((1.0 - p) / d as f64) + projector(&psi) * c(p);
    DensityMatrix::new(mat, d1, d2)
}

/// P. Horodecki's 3⊗3 bound entangled state with parameter `x ∈ (0, 1)`.
pub fn horodecki_3x3(x: f64) -> Result<DensityMatrix> {
    check_open_unit("x", x)?;
    let mut m = ComplexMatrix::zeros(9, 9);
    for k in 0..9 {
        m[(k, k)] = c(x);
    }
    for (i, j) in [(0, 4), (0, 8), (4, 8)] {
        m[(i, j)] = c(x);
        m[(j, i)] = c(x);
    }
    let diag = (1.0 + x) / 2.0;
    let off = (1.0 - x * x).sqrt() / 2.0;
    m[(6, 6)] = c(diag);
    m[(8, 8)] = c(diag);
    m[(6, 8)] = c(off);
    m[(8, 6)] = c(off);
    DensityMatrix::new(m / c(8.0 * x + 1.0), 3, 3)
}

/// `q ρ_PH(x) + (1 - q) I/9`.
pub fn horodecki_mixture(x: f64, q: f64) -> Result<DensityMatrix> {
    check_unit("q", q)?;
    DensityMatrix::mixture(&[(q, &horodecki_3x3(x)?), (1.0 - q, &maximally_mixed(3, 3)?)])
}

/// The 2⊗4 bound entangled state with parameter `d ∈ (0, 1)`.
pub fn bound_2x4(d: f64) -> Result<DensityMatrix> {
    check_open_unit("d", d)?;
    let mut m = ComplexMatrix::zeros(8, 8);
    for k in 0..8 {
        m[(k, k)] = c(d);
    }
    for (i, j) in [(0, 5), (1, 6), (2, 7)] {
        m[(i, j)] = c(d);
        m[(j, i)] = c(d);
    }
    let diag = (1.0 + d) / 2.0;
    let off = (1.0 - d * d).sqrt() / 2.0;
    m[(4, 4)] = c(diag);
    m[(7, 7)] = c(diag);
    m[(4, 7)] = c(off);
    m[(7, 4)] = c(off);
    DensityMatrix::new(m / c(7.0 * d + 1.0), 2, 4)
}

/// `x |ξ><ξ| + (1 - x) ρ_bound(d)` with `|ξ> = (|00> + |11>)/√2` on 2⊗4.
pub fn bound_2x4_mixture(d: f64, x: f64) -> Result<DensityMatrix> {
    check_unit("x", x)?;
    let mut xi = DVector::zeros(8);
    xi[0] = c(1.0);
    xi[5] = c(1.0);
    DensityMatrix::mixture(&[(x, &pure_state(&xi, 2, 4)?), (1.0 - x, &bound_2x4(d)?)])
}

/// `p |ψ><ψ| + (1-p) |00><00|`, `|ψ> = (|01> + |10>)/√2`.
pub fn two_qubit_ex2(p: f64) -> Result<DensityMatrix> {
    check_unit("p", p)?;
    let h = c(1.0 / 2f64.sqrt());
    let mut psi = DVector::zeros(4);
    psi[1] = h;
    psi[2] = h;
    let mut zz = DVector::zeros(4);
    zz[0] = c(1.0);
    DensityMatrix::mixture(&[(p, &pure_state(&psi, 2, 2)?), (1.0 - p, &pure_state(&zz, 2, 2)?)])
}

/// Two-qubit X-shaped state
/// `½ [[1+a1,0,0,a3],[0,0,0,0],[0,0,a2-a1,0],[a3,0,0,1-a2]]`.
///
/// Positivity is checked: `a2 >= a1`, `a1 >= -1`, `a2 <= 1`,
/// `a3^2 <= (1+a1)(1-a2)`.
pub fn two_qubit_ex4(a1: f64, a2: f64, a3: f64) -> Result<DensityMatrix> {
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = c(1.0 + a1);
    m[(0, 3)] = c(a3);
    m[(3, 0)] = c(a3);
    m[(2, 2)] = c(a2 - a1);
    m[(3, 3)] = c(1.0 - a2);
    DensityMatrix::new_strict(m / c(2.0), 2, 2)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

fn gaussian_vector(rng: &mut ChaCha8Rng, len: usize) -> DVector<Complex64> {
    DVector::from_fn(len, |_, _| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
}

/// Random state `G G^† / Tr(G G^†)` with `G` an `MN x rank` complex Gaussian.
pub fn random_density(m: usize, n: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if rank == 0 {
        return Err(invalid("rank must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(&mut rng, m * n, rank);
    let mut w = &g * g.adjoint();
    let tr = w.trace().re;
    w /= c(tr);
    // exact Hermiticity after rounding
    let w = (&w + w.adjoint()) / c(2.0);
    DensityMatrix::new(w, m, n)
}

/// Random separable state: convex mixture of `terms` random product pure
/// states with random weights.
pub fn random_separable(m: usize, n: usize, terms: usize, seed: u64) -> Result<DensityMatrix> {
    if terms == 0 {
        return Err(invalid("terms must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..terms)
        .map(|_| {
            let u: f64 = rand::Rng::random(&mut rng);
            u + 1e-3
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let d = m * n;
    let mut acc = ComplexMatrix::zeros(d, d);
    for w in weights {
        let a = gaussian_vector(&mut rng, m).normalize();
        let b = gaussian_vector(&mut rng, n).normalize();
        acc += projector(&a.kronecker(&b)) * c(w / total);
    }
    let acc = (&acc + acc.adjoint()) / c(2.0);
    DensityMatrix::new(acc, m, n)
}

/// A one-parameter curve of states, `value -> ρ(value)`.
#[derive(Clone)]
pub struct StateFamily {
    name: String,
    param: String,
    domain: (f64, f64),
    eval: Arc<dyn Fn(f64) -> Result<DensityMatrix> + Send + Sync>,
}

impl StateFamily {
    pub fn new<F>(name: impl Into<String>, param: impl Into<String>, domain: (f64, f64), eval: F) -> Self
    where
        F: Fn(f64) -> Result<DensityMatrix> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            param: param.into(),
            domain,
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn param(&self) -> &str {
        &self.param
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn eval(&self, value: f64) -> Result<DensityMatrix> {
        (self.eval)(value)
    }

    /// `x ↦ ρ_x` at fixed `d`.
    pub fn bound_2x4(d: f64) -> Self {
        Self::new(format!("bound2x4:d={d}"), "x", (0.0, 1.0), move |x| bound_2x4_mixture(d, x))
    }

    /// `q ↦ ρ(x, q)` at fixed `x`.
    pub fn horodecki(x: f64) -> Self {
        Self::new(format!("horodecki:x={x}"), "q", (0.0, 1.0), move |q| horodecki_mixture(x, q))
    }

    pub fn isotropic(d1: usize, d2: usize) -> Self {
        Self::new(format!("isotropic:d1={d1},d2={d2}"), "p", (0.0, 1.0), move |p| {
            isotropic(d1, d2, p)
        })
    }

    pub fn ex2() -> Self {
        Self::new("ex2", "p", (0.0, 1.0), two_qubit_ex2)
    }
}

impl fmt::Debug for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateFamily")
            .field("name", &self.name)
            .field("param", &self.param)
            .field("domain", &self.domain)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn isotropic_endpoints() {
        let p0 = isotropic(2, 3, 0.0).unwrap();
        let mm = maximally_mixed(2, 3).unwrap();
        assert!(crate::numerics::max_abs_diff(p0.matrix(), mm.matrix()) < 1e-15);

        let bell = isotropic(2, 2, 1.0).unwrap();
        let m = bell.matrix();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert_abs_diff_eq!(m[(i, j)].re, 0.5, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(m[(1, 1)].re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn isotropic_rejects_bad_params() {
        assert!(isotropic(3, 2, 0.5).is_err());
        assert!(isotropic(2, 3, 1.5).is_err());
        assert!(isotropic(2, 3, -0.1).is_err());
        assert!(isotropic(1, 3, 0.5).is_err());
    }

    #[test]
    fn horodecki_entries() {
        let rho = horodecki_3x3(0.9).unwrap();
        assert_abs_diff_eq!(rho.matrix().trace().re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.matrix()[(6, 6)].re, (1.9 / 2.0) / 8.2, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.matrix()[(0, 4)].re, 0.9 / 8.2, epsilon = 1e-15);
        assert!(horodecki_3x3(1.0).is_err());
        assert!(horodecki_3x3(0.0).is_err());
    }

    #[test]
    fn horodecki_at_q_zero_is_maximally_mixed() {
        let rho = horodecki_mixture(0.9, 0.0).unwrap();
        let mm = maximally_mixed(3, 3).unwrap();
        assert!(crate::numerics::max_abs_diff(rho.matrix(), mm.matrix()) < 1e-15);
    }

    #[test]
    fn bound_2x4_entries() {
        let rho = bound_2x4(0.9).unwrap();
        assert_abs_diff_eq!(rho.matrix().trace().re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.matrix()[(0, 5)].re, 0.9 / 7.3, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.matrix()[(4, 7)].re, (1.0 - 0.81f64).sqrt() / 2.0 / 7.3, epsilon = 1e-15);
        assert!(bound_2x4(1.0).is_err());
    }

    #[test]
    fn bound_2x4_mixture_at_one_is_xi() {
        let rho = bound_2x4_mixture(0.9, 1.0).unwrap();
        for (i, j) in [(0, 0), (0, 5), (5, 0), (5, 5)] {
            assert_abs_diff_eq!(rho.matrix()[(i, j)].re, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn ex2_endpoints() {
        let rho = two_qubit_ex2(0.0).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);
        let rho = two_qubit_ex2(1.0).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(1, 2)].re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn ex4_positivity_is_enforced() {
        let rho = two_qubit_ex4(0.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.matrix()[(3, 3)].re, 0.5, epsilon = 1e-15);
        // a2 < a1
        assert!(two_qubit_ex4(0.3, 0.1, 0.0).is_err());
        // a3^2 > (1+a1)(1-a2)
        assert!(two_qubit_ex4(0.0, 0.5, 0.8).is_err());
        assert!(two_qubit_ex4(0.0, 0.5, 0.7).is_ok());
    }

    #[test]
    fn random_states_are_reproducible() {
        let a = random_density(2, 3, 4, 7).unwrap();
        let b = random_density(2, 3, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_density(2, 3, 4, 8).unwrap());
        assert_abs_diff_eq!(a.matrix().trace().re, 1.0, epsilon = 1e-15);

        let s1 = random_separable(3, 2, 5, 11).unwrap();
        assert_eq!(s1, random_separable(3, 2, 5, 11).unwrap());
    }

    #[test]
    fn random_rank_is_respected() {
        let rho = random_density(3, 3, 2, 5).unwrap();
        let ev = rho.min_eigenvalue().unwrap();
        assert!(ev.abs() < 1e-12);
        let nonzero = crate::numerics::hermitian_eigenvalues(rho.matrix())
            .unwrap()
            .into_iter()
            .filter(|e| *e > 1e-10)
            .count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn zero_rank_or_terms_rejected() {
        assert!(random_density(2, 2, 0, 1).is_err());
        assert!(random_separable(2, 2, 0, 1).is_err());
    }
}
