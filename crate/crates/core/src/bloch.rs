//! SU(d) generators and the Bloch decomposition
//!
//! ```text
//! rho = 1/(MN) ( I⊗I + sum_k r_k λ_k⊗I + sum_l s_l I⊗λ_l + sum_kl t_kl λ_k⊗λ_l )
//! ```
//!
//! with `r_k = (M/2) Tr(rho λ_k⊗I)`, `s_l = (N/2) Tr(rho I⊗λ_l)` and
//! `t_kl = (MN/4) Tr(rho λ_k⊗λ_l)`.
//!
//! Generators are ordered: diagonal `ω_0..ω_{d-2}`, then symmetric `u_jk`
//! for `j < k` in lexicographic order, then antisymmetric `v_jk` in the same
//! order. For `d = 2` this gives `(σz, σx, σy)`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{invalid, Error, Result};
use crate::numerics::{ComplexMatrix, RealMatrix};

/// Largest tolerated imaginary part on r, s or T.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct GeneratorSet {
    dim: usize,
    mats: Vec<ComplexMatrix>,
    // (row, col, value) for each generator; at most two entries off the diagonal
    sparse: Vec<Vec<(usize, usize, Complex64)>>,
}

impl GeneratorSet {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(invalid(format!("generators need d >= 2, got {d}")));
        }
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let mut mats = Vec::with_capacity(d * d - 1);

        for l in 0..d - 1 {
            let scale = (2.0 / ((l + 1) * (l + 2)) as f64).sqrt();
            let mut w = ComplexMatrix::zeros(d, d);
            for k in 0..=l {
                w[(k, k)] = Complex64::new(scale, 0.0);
            }
            w[(l + 1, l + 1)] = Complex64::new(-scale * (l + 1) as f64, 0.0);
            mats.push(w);
        }
        for j in 0..d {
            for k in j + 1..d {
                let mut u = ComplexMatrix::zeros(d, d);
                u[(j, k)] = one;
                u[(k, j)] = one;
                mats.push(u);
            }
        }
        for j in 0..d {
            for k in j + 1..d {
                let mut v = ComplexMatrix::zeros(d, d);
                v[(j, k)] = -i;
                v[(k, j)] = i;
                mats.push(v);
            }
        }

        let sparse = mats
            .iter()
            .map(|g| {
                let mut nz = Vec::new();
                for r in 0..d {
                    for c in 0..d {
                        if g[(r, c)] != Complex64::new(0.0, 0.0) {
                            nz.push((r, c, g[(r, c)]));
                        }
                    }
                }
                nz
            })
            .collect();

        Ok(Self { dim: d, mats, sparse })
    }

    /// Shared, lazily built generator set for dimension `d`.
    pub fn cached(d: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GeneratorSet>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(g) = cache.read().expect("generator cache poisoned").get(&d) {
            return Ok(Arc::clone(g));
        }
        let g = Arc::new(Self::new(d)?);
        cache
            .write()
            .expect("generator cache poisoned")
            .entry(d)
            .or_insert_with(|| Arc::clone(&g));
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn get(&self, idx: usize) -> &ComplexMatrix {
        &self.mats[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.mats.iter()
    }

    /// Human-readable label of generator `idx` (`w0`, `u01`, `v12`, ...).
    pub fn label(&self, idx: usize) -> String {
        let d = self.dim;
        if idx < d - 1 {
            return format!("w{idx}");
        }
        let pairs: Vec<(usize, usize)> = (0..d)
            .flat_map(|j| (j + 1..d).map(move |k| (j, k)))
            .collect();
        let rest = idx - (d - 1);
        if rest < pairs.len() {
            let (j, k) = pairs[rest];
            format!("u{j}{k}")
        } else {
            let (j, k) = pairs[rest - pairs.len()];
            format!("v{j}{k}")
        }
    }
}

/// Local Bloch vectors and correlation matrix of a bipartite state.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochDecomposition {
    m: usize,
    n: usize,
    r: DVector<f64>,
    s: DVector<f64>,
    t: RealMatrix,
}

impl BlochDecomposition {
    pub fn new(m: usize, n: usize, r: DVector<f64>, s: DVector<f64>, t: RealMatrix) -> Result<Self> {
        if m < 2 || n < 2 {
            return Err(invalid(format!("dimensions must be >= 2, got {m}x{n}")));
        }
        let (lm, ln) = (m * m - 1, n * n - 1);
        if r.len() != lm || s.len() != ln || t.shape() != (lm, ln) {
            return Err(invalid(format!(
                "Bloch data for {m}x{n} needs r:{lm}, s:{ln}, T:{lm}x{ln}; got r:{}, s:{}, T:{}x{}",
                r.len(),
                s.len(),
                t.nrows(),
                t.ncols()
            )));
        }
        Ok(Self { m, n, r, s, t })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn r(&self) -> &DVector<f64> {
        &self.r
    }

    pub fn s(&self) -> &DVector<f64> {
        &self.s
    }

    pub fn t(&self) -> &RealMatrix {
        &self.t
    }

    /// Componentwise `w * self + (1 - w) * other`.
    pub fn affine(&self, w: f64, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(invalid("cannot combine Bloch data of different dimensions"));
        }
        Self::new(
            self.m,
            self.n,
            &self.r * w + &other.r * (1.0 - w),
            &self.s * w + &other.s * (1.0 - w),
            &self.t * w + &other.t * (1.0 - w),
        )
    }
}

fn real_part(z: Complex64) -> Result<f64> {
    if z.im.abs() > IMAG_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue(z.im.abs()));
    }
    Ok(z.re)
}

/// Compute `r`, `s`, `T` of a validated state by direct traces.
pub fn decompose(rho: &DensityMatrix) -> Result<BlochDecomposition> {
    let (m, n) = rho.dims();
    let gm = GeneratorSet::cached(m)?;
    let gn = GeneratorSet::cached(n)?;
    let mat = rho.matrix();

    // reduced states: rho_A[i,j] = sum_a rho[(i,a),(j,a)], likewise rho_B
    let rho_a = ComplexMatrix::from_fn(m, m, |i, j| (0..n).map(|a| mat[(i * n + a, j * n + a)]).sum());
    let rho_b = ComplexMatrix::from_fn(n, n, |a, b| (0..m).map(|i| mat[(i * n + a, i * n + b)]).sum());

    // Tr(X λ) = sum over nonzero λ[c,r] of X[r,c] λ[c,r]
    let local = |x: &ComplexMatrix, nz: &[(usize, usize, Complex64)]| -> Complex64 {
        nz.iter().map(|&(c, r, v)| x[(r, c)] * v).sum()
    };

    let mut r = DVector::zeros(gm.len());
    for (k, nz) in gm.sparse.iter().enumerate() {
        r[k] = real_part(local(&rho_a, nz) * (m as f64 / 2.0))?;
    }
    let mut s = DVector::zeros(gn.len());
    for (l, nz) in gn.sparse.iter().enumerate() {
        s[l] = real_part(local(&rho_b, nz) * (n as f64 / 2.0))?;
    }

    let scale = (m * n) as f64 / 4.0;
    let mut t = RealMatrix::zeros(gm.len(), gn.len());
    for (k, nzk) in gm.sparse.iter().enumerate() {
        for (l, nzl) in gn.sparse.iter().enumerate() {
            // Tr(rho (A⊗B)) = sum rho[(i,a),(j,b)] A[j,i] B[b,a]
            let mut acc = Complex64::new(0.0, 0.0);
            for &(j, i, av) in nzk {
                for &(b, a, bv) in nzl {
                    acc += mat[(i * n + a, j * n + b)] * av * bv;
                }
            }
            t[(k, l)] = real_part(acc * scale)?;
        }
    }

    BlochDecomposition::new(m, n, r, s, t)
}

/// Rebuild the density matrix from Bloch data. No positivity check is made;
/// arbitrary `r`, `s`, `T` need not describe a physical state.
pub fn reconstruct(b: &BlochDecomposition) -> Result<DensityMatrix> {
    let (m, n) = b.dims();
    let gm = GeneratorSet::cached(m)?;
    let gn = GeneratorSet::cached(n)?;
    let c = |x: f64| Complex64::new(x, 0.0);

    let id_m = ComplexMatrix::identity(m, m);
    let id_n = ComplexMatrix::identity(n, n);

    let mut local_a = id_m.clone();
    for (k, g) in gm.iter().enumerate() {
        local_a += g * c(b.r[k]);
    }
    let mut local_b = ComplexMatrix::zeros(n, n);
    for (l, g) in gn.iter().enumerate() {
        local_b += g * c(b.s[l]);
    }

    // (I + Σ r λ) ⊗ I + I ⊗ Σ s λ + Σ_k λ_k ⊗ (Σ_l t_kl λ_l)
    let mut acc = local_a.kronecker(&id_n) + id_m.kronecker(&local_b);
    for (k, gk) in gm.iter().enumerate() {
        let mut row = ComplexMatrix::zeros(n, n);
        for (l, gl) in gn.iter().enumerate() {
            let tkl = b.t[(k, l)];
            if tkl != 0.0 {
                row += gl * c(tkl);
            }
        }
        acc += gk.kronecker(&row);
    }
    acc /= c((m * n) as f64);
    DensityMatrix::new(acc, m, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn qubit_generators_are_paulis() {
        let g = GeneratorSet::new(2).unwrap();
        assert_eq!(g.len(), 3);
        let i = Complex64::new(0.0, 1.0);
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(*g.get(0), ComplexMatrix::from_row_slice(2, 2, &[one, z, z, -one]));
        assert_eq!(*g.get(1), ComplexMatrix::from_row_slice(2, 2, &[z, one, one, z]));
        assert_eq!(*g.get(2), ComplexMatrix::from_row_slice(2, 2, &[z, -i, i, z]));
        assert_eq!(
            (0..3).map(|k| g.label(k)).collect::<Vec<_>>(),
            ["w0", "u01", "v01"]
        );
    }

    #[test]
    fn qutrit_second_diagonal_generator() {
        let g = GeneratorSet::new(3).unwrap();
        assert_eq!(g.len(), 8);
        let w1 = g.get(1);
        let s = (1.0f64 / 3.0).sqrt();
        for (k, want) in [s, s, -2.0 * s].into_iter().enumerate() {
            assert_abs_diff_eq!(w1[(k, k)].re, want, epsilon = 1e-15);
        }
        assert_eq!(g.label(7), "v12");
    }

    #[test]
    fn rejects_trivial_dimension() {
        assert!(GeneratorSet::new(1).is_err());
        assert!(GeneratorSet::new(0).is_err());
    }

    #[test]
    fn traceless_and_orthogonal() {
        for d in 2..=6 {
            let g = GeneratorSet::new(d).unwrap();
            for (i, a) in g.iter().enumerate() {
                assert!(a.trace().norm() < 1e-12);
                for (j, b) in g.iter().enumerate() {
                    let tr = (a * b).trace();
                    let want = if i == j { 2.0 } else { 0.0 };
                    assert!((tr - Complex64::new(want, 0.0)).norm() < 1e-12, "d={d} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn maximally_mixed_has_zero_bloch_data() {
        let mm = ComplexMatrix::identity(6, 6) / Complex64::new(6.0, 0.0);
        let b = decompose(&DensityMatrix::new(mm, 2, 3).unwrap()).unwrap();
        assert!(b.r().iter().all(|x| x.abs() < 1e-15));
        assert!(b.s().iter().all(|x| x.abs() < 1e-15));
        assert!(b.t().iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn zero_bloch_data_reconstructs_maximally_mixed() {
        let b = BlochDecomposition::new(
            3,
            2,
            DVector::zeros(8),
            DVector::zeros(3),
            RealMatrix::zeros(8, 3),
        )
        .unwrap();
        let rho = reconstruct(&b).unwrap();
        let want = ComplexMatrix::identity(6, 6) / Complex64::new(6.0, 0.0);
        assert!(crate::numerics::max_abs_diff(rho.matrix(), &want) < 1e-15);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        assert!(BlochDecomposition::new(2, 2, DVector::zeros(3), DVector::zeros(8), RealMatrix::zeros(3, 3)).is_err());
        assert!(BlochDecomposition::new(2, 2, DVector::zeros(3), DVector::zeros(3), RealMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn psi_plus_correlations() {
        // independent route: t_ij = Tr(rho σ_i⊗σ_j) with explicit Pauli matrices
        let h = 1.0 / 2f64.sqrt();
        let mut psi = DVector::<Complex64>::zeros(4);
        psi[1] = Complex64::new(h, 0.0);
        psi[2] = Complex64::new(h, 0.0);
        let mat = &psi * psi.adjoint();
        let rho = DensityMatrix::new(mat.clone(), 2, 2).unwrap();
        let b = decompose(&rho).unwrap();

        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let paulis = [
            ComplexMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
            ComplexMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            ComplexMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        ];
        for (k, pk) in paulis.iter().enumerate() {
            for (l, pl) in paulis.iter().enumerate() {
                let direct = (&mat * pk.kronecker(pl)).trace().re;
                assert_abs_diff_eq!(b.t()[(k, l)], direct, epsilon = 1e-14);
            }
        }
        assert_abs_diff_eq!(b.t()[(0, 0)], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.t()[(1, 1)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.t()[(2, 2)], 1.0, epsilon = 1e-14);
        assert!(b.r().norm() < 1e-15 && b.s().norm() < 1e-15);
    }

    #[test]
    fn complex_off_diagonal_input_with_imaginary_parts() {
        // |+i> ⊗ |0>: r along σy
        let h = 1.0 / 2f64.sqrt();
        let mut psi = DVector::<Complex64>::zeros(4);
        psi[0] = Complex64::new(h, 0.0);
        psi[2] = Complex64::new(0.0, h);
        let rho = DensityMatrix::new(&psi * psi.adjoint(), 2, 2).unwrap();
        let b = decompose(&rho).unwrap();
        assert_abs_diff_eq!(b.r()[2], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.s()[0], 1.0, epsilon = 1e-14);
        let back = reconstruct(&b).unwrap();
        assert!(crate::numerics::max_abs_diff(back.matrix(), rho.matrix()) < 1e-14);
    }

    #[test]
    fn cached_sets_are_shared() {
        let a = GeneratorSet::cached(4).unwrap();
        let b = GeneratorSet::cached(4).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
