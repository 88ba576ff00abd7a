//! Separability criteria.
//!
//! Every criterion reduces to an inequality `lhs <= bound` that all separable
//! states satisfy. A violation larger than [`DETECTION_EPS`] certifies
//! entanglement; anything else is [`Decision::Inconclusive`], never a proof
//! of separability.
//!
//! With `r`, `s`, `T` from [`crate::bloch::decompose`]:
//!
//! | criterion     | matrix                                    | bound |
//! |---------------|-------------------------------------------|-------|
//! | de Vicente    | `T`                                       | `sqrt(MN(M-1)(N-1)/4)` |
//! | enhanced `T'` | `[[1, sᵗ], [r, T]]`                       | `sqrt((M²-M+2)(N²-N+2))/2` |
//! | Shen          | `[[ab E_m, a w_m(s)ᵗ], [b w_m(r), T]]`    | `½ sqrt((2ma²+M²-M)(2mb²+N²-N))` |
//! | `T_αβ`        | `[[αβᵗ, αsᵗ], [rβᵗ, T]]`                  | `sqrt(‖α‖²+M(M-1)/2) sqrt(‖β‖²+N(N-1)/2)` |
//! | `T_ab`        | `[[ab, a sᵗ], [b r, T]]`                  | `sqrt(a²+M(M-1)/2) sqrt(b²+N(N-1)/2)` |
//! | `W_ab,αβ`     | `[[ab, a αᵗ⊗sᵗ], [b β⊗r, βαᵗ⊗T]]`         | `sqrt(a²+‖β‖²M(M-1)/2) sqrt(b²+‖α‖²N(N-1)/2)` |

use std::fmt;

use nalgebra::DVector;

use crate::bloch::{decompose, BlochDecomposition};
use crate::density::DensityMatrix;
use crate::error::{invalid, Result};
use crate::numerics::{ky_fan_norm, min_hermitian_eigenvalue, RealMatrix};

/// Margin a violation must exceed before entanglement is reported.
pub const DETECTION_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Entangled,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub lhs: f64,
    pub bound: f64,
    pub violation: f64,
    pub decision: Decision,
}

impl Verdict {
    pub fn new(lhs: f64, bound: f64) -> Self {
        let violation = lhs - bound;
        let decision = if violation > DETECTION_EPS {
            Decision::Entangled
        } else {
            Decision::Inconclusive
        };
        Self {
            lhs,
            bound,
            violation,
            decision,
        }
    }

    pub fn is_entangled(&self) -> bool {
        self.decision == Decision::Entangled
    }
}

/// A criterion together with its free parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Criterion {
    DeVicente,
    EnhancedTPrime,
    Shen { m: usize, a: f64, b: f64 },
    Theorem1 { alpha: Vec<f64>, beta: Vec<f64> },
    Corollary2 { a: f64, b: f64 },
    Theorem2 { a: f64 },
    Theorem3 { a: f64, b: f64, alpha: Vec<f64>, beta: Vec<f64> },
    Ppt,
    Realignment,
}

impl Criterion {
    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<Verdict> {
        match self {
            Criterion::DeVicente => de_vicente(rho),
            Criterion::EnhancedTPrime => enhanced_tprime(rho),
            Criterion::Shen { m, a, b } => shen(rho, *m, *a, *b),
            Criterion::Theorem1 { alpha, beta } => theorem1(rho, alpha, beta),
            Criterion::Corollary2 { a, b } => corollary2(rho, *a, *b),
            Criterion::Theorem2 { a } => theorem2(rho, *a),
            Criterion::Theorem3 { a, b, alpha, beta } => theorem3(rho, *a, *b, alpha, beta),
            Criterion::Ppt => ppt(rho),
            Criterion::Realignment => realignment(rho),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Criterion::DeVicente => "devicente",
            Criterion::EnhancedTPrime => "enhanced",
            Criterion::Shen { .. } => "shen",
            Criterion::Theorem1 { .. } => "theorem1",
            Criterion::Corollary2 { .. } => "corollary2",
            Criterion::Theorem2 { .. } => "theorem2",
            Criterion::Theorem3 { .. } => "theorem3",
            Criterion::Ppt => "ppt",
            Criterion::Realignment => "realignment",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vec = |v: &[f64]| {
            let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("[{}]", parts.join(","))
        };
        match self {
            Criterion::Shen { m, a, b } => write!(f, "shen:m={m},a={a},b={b}"),
            Criterion::Theorem1 { alpha, beta } => {
                write!(f, "theorem1:alpha={},beta={}", vec(alpha), vec(beta))
            }
            Criterion::Corollary2 { a, b } => write!(f, "corollary2:a={a},b={b}"),
            Criterion::Theorem2 { a } => write!(f, "theorem2:a={a}"),
            Criterion::Theorem3 { a, b, alpha, beta } => write!(
                f,
                "theorem3:a={a},b={b},alpha={},beta={}",
                vec(alpha),
                vec(beta)
            ),
            other => f.write_str(other.name()),
        }
    }
}

fn local_term(d: usize) -> f64 {
    (d * (d - 1)) as f64 / 2.0
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {x}")))
    }
}

fn check_nonnegative(name: &str, x: f64) -> Result<()> {
    check_finite(name, x)?;
    if x < 0.0 {
        return Err(invalid(format!("{name} must be non-negative, got {x}")));
    }
    Ok(())
}

fn check_vector(name: &str, v: &[f64]) -> Result<DVector<f64>> {
    if v.is_empty() {
        return Err(invalid(format!("{name} must have at least one entry")));
    }
    for x in v {
        check_finite(name, *x)?;
    }
    let v = DVector::from_column_slice(v);
    if v.norm() == 0.0 {
        return Err(invalid(format!("{name} must be a nonzero vector")));
    }
    Ok(v)
}

/// `[[αβᵗ, αsᵗ], [rβᵗ, T]]`. Scalars `a`, `b` are the length-1 case.
pub fn t_alpha_beta(bloch: &BlochDecomposition, alpha: &DVector<f64>, beta: &DVector<f64>) -> RealMatrix {
    let (r, s, t) = (bloch.r(), bloch.s(), bloch.t());
    let (na, nb) = (alpha.len(), beta.len());
    let mut out = RealMatrix::zeros(na + r.len(), nb + s.len());
    out.view_mut((0, 0), (na, nb)).copy_from(&(alpha * beta.transpose()));
    out.view_mut((0, nb), (na, s.len())).copy_from(&(alpha * s.transpose()));
    out.view_mut((na, 0), (r.len(), nb)).copy_from(&(r * beta.transpose()));
    out.view_mut((na, nb), t.shape()).copy_from(t);
    out
}

/// `[[ab, a αᵗ⊗sᵗ], [b β⊗r, βαᵗ⊗T]]`. `β` multiplies the first-factor
/// (`r`) side and `α` the second-factor (`s`) side.
pub fn w_matrix(
    bloch: &BlochDecomposition,
    a: f64,
    b: f64,
    alpha: &DVector<f64>,
    beta: &DVector<f64>,
) -> RealMatrix {
    let (r, s, t) = (bloch.r(), bloch.s(), bloch.t());
    let top = alpha.kronecker(s).transpose() * a;
    let left = beta.kronecker(r) * b;
    let body = (beta * alpha.transpose()).kronecker(t);
    let mut out = RealMatrix::zeros(1 + left.len(), 1 + top.len());
    out[(0, 0)] = a * b;
    out.view_mut((0, 1), (1, top.len())).copy_from(&top);
    out.view_mut((1, 0), (left.len(), 1)).copy_from(&left);
    out.view_mut((1, 1), body.shape()).copy_from(&body);
    out
}

/// Shen's `S^m_ab`, with the all-ones block and replicated columns built
/// literally.
pub fn shen_matrix(bloch: &BlochDecomposition, m_rows: usize, a: f64, b: f64) -> RealMatrix {
    let (r, s, t) = (bloch.r(), bloch.s(), bloch.t());
    let mut out = RealMatrix::zeros(m_rows + r.len(), m_rows + s.len());
    out.view_mut((0, 0), (m_rows, m_rows)).fill(a * b);
    for i in 0..m_rows {
        for (j, sj) in s.iter().enumerate() {
            out[(i, m_rows + j)] = a * sj;
        }
    }
    for (i, ri) in r.iter().enumerate() {
        for j in 0..m_rows {
            out[(m_rows + i, j)] = b * ri;
        }
    }
    out.view_mut((m_rows, m_rows), t.shape()).copy_from(t);
    out
}

pub fn de_vicente(rho: &DensityMatrix) -> Result<Verdict> {
    let (m, n) = rho.dims();
    let bloch = decompose(rho)?;
    let lhs = ky_fan_norm(bloch.t())?;
    let bound = (local_term(m) * local_term(n)).sqrt();
    Ok(Verdict::new(lhs, bound))
}

/// `‖[[1, sᵗ],[r, T]]‖_KF <= sqrt((M²-M+2)(N²-N+2))/2`, the `α = β = (1)`
/// instance of [`theorem1`].
pub fn enhanced_tprime(rho: &DensityMatrix) -> Result<Verdict> {
    let (m, n) = rho.dims();
    let bloch = decompose(rho)?;
    let one = DVector::from_element(1, 1.0);
    let lhs = ky_fan_norm(&t_alpha_beta(&bloch, &one, &one))?;
    let (m, n) = (m as f64, n as f64);
    let bound = ((m * m - m + 2.0) * (n * n - n + 2.0)).sqrt() / 2.0;
    Ok(Verdict::new(lhs, bound))
}

pub fn shen(rho: &DensityMatrix, m_rows: usize, a: f64, b: f64) -> Result<Verdict> {
    if m_rows == 0 {
        return Err(invalid("shen needs m >= 1"));
    }
    check_nonnegative("a", a)?;
    check_nonnegative("b", b)?;
    let (m, n) = rho.dims();
    let bloch = decompose(rho)?;
    let lhs = ky_fan_norm(&shen_matrix(&bloch, m_rows, a, b))?;
    let k = m_rows as f64;
    let (mf, nf) = (m as f64, n as f64);
    let bound = 0.5 * ((2.0 * k * a * a + mf * mf - mf) * (2.0 * k * b * b + nf * nf - nf)).sqrt();
    Ok(Verdict::new(lhs, bound))
}

pub fn theorem1(rho: &DensityMatrix, alpha: &[f64], beta: &[f64]) -> Result<Verdict> {
    let alpha = check_vector("alpha", alpha)?;
    let beta = check_vector("beta", beta)?;
    let (m, n) = rho.dims();
    let bloch = decompose(rho)?;
    let lhs = ky_fan_norm(&t_alpha_beta(&bloch, &alpha, &beta))?;
    let bound = (alpha.norm_squared() + local_term(m)).sqrt() * (beta.norm_squared() + local_term(n)).sqrt();
    Ok(Verdict::new(lhs, bound))
}

/// `T_ab` criterion for scalar `a, b >= 0`. At `a = b = 0` it coincides with
/// [`de_vicente`].
pub fn corollary2(rho: &DensityMatrix, a: f64, b: f64) -> Result<Verdict> {
    check_nonnegative("a", a)?;
    check_nonnegative("b", b)?;
    let (m, n) = rho.dims();
    let bloch = decompose(rho)?;
    let lhs = t_ab_norm(&bloch, a, b)?;
    let bound = (a * a + local_term(m)).sqrt() * (b * b + local_term(n)).sqrt();
    Ok(Verdict::new(lhs, bound))
}

/// `‖T_ab‖_KF` for arbitrary real `a`, `b`.
pub fn t_ab_norm(bloch: &BlochDecomposition, a: f64, b: f64) -> Result<f64> {
    let av = DVector::from_element(1, a);
    let bv = DVector::from_element(1, b);
    ky_fan_norm(&t_alpha_beta(bloch, &av, &bv))
}

/// `b` on the constraint surface `|b| = |a| sqrt(N(N-1)/(M(M-1)))`, same sign as `a`.
pub fn theorem2_b(a: f64, m: usize, n: usize) -> f64 {
    a * (local_term(n) / local_term(m)).sqrt()
}

pub fn theorem2(rho: &DensityMatrix, a: f64) -> Result<Verdict> {
    check_finite("a", a)?;
    let (m, n) = rho.dims();
    let b = theorem2_b(a, m, n);
    let bloch = decompose(rho)?;
    let lhs = t_ab_norm(&bloch, a, b)?;
    let bound = (local_term(m) * local_term(n)).sqrt() + (a * b).abs();
    Ok(Verdict::new(lhs, bound))
}

pub fn theorem3(rho: &DensityMatrix, a: f64, b: f64, alpha: &[f64], beta: &[f64]) -> Result<Verdict> {
    check_finite("a", a)?;
    check_finite("b", b)?;
    let alpha = check_vector("alpha", alpha)?;
    let beta = check_vector("beta", beta)?;
    let (m, n) = rho.dims();
    let bloch = decompose(rho)?;
    let lhs = ky_fan_norm(&w_matrix(&bloch, a, b, &alpha, &beta))?;
    let bound = (a * a + beta.norm_squared() * local_term(m)).sqrt()
        * (b * b + alpha.norm_squared() * local_term(n)).sqrt();
    Ok(Verdict::new(lhs, bound))
}

/// `lhs = -λ_min(ρ^{T_B})`, bound 0.
pub fn ppt(rho: &DensityMatrix) -> Result<Verdict> {
    let lhs = -min_hermitian_eigenvalue(&rho.partial_transpose())?;
    Ok(Verdict::new(lhs, 0.0))
}

/// `lhs = ‖R(ρ)‖_KF`, bound 1.
pub fn realignment(rho: &DensityMatrix) -> Result<Verdict> {
    let lhs = ky_fan_norm(&rho.realign())?;
    Ok(Verdict::new(lhs, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;
    use approx::assert_abs_diff_eq;

    fn bell_psi_plus() -> DensityMatrix {
        states::two_qubit_ex2(1.0).unwrap()
    }

    #[test]
    fn verdict_threshold() {
        assert_eq!(Verdict::new(1.0 + 2e-9, 1.0).decision, Decision::Entangled);
        assert_eq!(Verdict::new(1.0 + 5e-10, 1.0).decision, Decision::Inconclusive);
        assert_eq!(Verdict::new(0.5, 1.0).violation, -0.5);
    }

    #[test]
    fn de_vicente_cases() {
        let mm = states::maximally_mixed(2, 3).unwrap();
        let v = de_vicente(&mm).unwrap();
        assert_abs_diff_eq!(v.lhs, 0.0, epsilon = 1e-15);
        assert_eq!(v.decision, Decision::Inconclusive);

        let v = de_vicente(&bell_psi_plus()).unwrap();
        assert_abs_diff_eq!(v.lhs, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.bound, 1.0, epsilon = 1e-15);
        assert!(v.is_entangled());
    }

    #[test]
    fn enhanced_cases() {
        let v = enhanced_tprime(&states::maximally_mixed(2, 2).unwrap()).unwrap();
        assert_abs_diff_eq!(v.lhs, 1.0, epsilon = 1e-14);
        assert!(v.bound >= 1.0);
        assert!(!v.is_entangled());

        let v = enhanced_tprime(&bell_psi_plus()).unwrap();
        assert_abs_diff_eq!(v.lhs, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.bound, 2.0, epsilon = 1e-15);
        assert!(v.is_entangled());
    }

    #[test]
    fn shen_maximally_mixed_and_errors() {
        let rho = states::maximally_mixed(2, 3).unwrap();
        let v = shen(&rho, 1, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(v.lhs, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.bound, 0.5 * ((2.0 + 2.0) * (2.0 + 6.0f64)).sqrt(), epsilon = 1e-14);
        assert!(!v.is_entangled());

        assert!(shen(&rho, 1, -1.0, 1.0).is_err());
        assert!(shen(&rho, 1, 1.0, -1.0).is_err());
        assert!(shen(&rho, 0, 1.0, 1.0).is_err());
    }

    #[test]
    fn shen_zero_params_matches_de_vicente() {
        let rho = states::random_density(2, 3, 3, 9).unwrap();
        let dv = de_vicente(&rho).unwrap();
        let sh = shen(&rho, 2, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(sh.lhs, dv.lhs, epsilon = 1e-12);
        assert_eq!(sh.decision, dv.decision);
    }

    #[test]
    fn theorem1_maximally_mixed() {
        let rho = states::maximally_mixed(2, 4).unwrap();
        let v = theorem1(&rho, &[0.3, 0.4], &[1.0, 2.0, 2.0]).unwrap();
        assert_abs_diff_eq!(v.lhs, 0.5 * 3.0, epsilon = 1e-12);
        assert!(!v.is_entangled());
    }

    #[test]
    fn theorem1_and_theorem3_reject_zero_vectors() {
        let rho = states::maximally_mixed(2, 2).unwrap();
        assert!(theorem1(&rho, &[0.0, 0.0], &[1.0]).is_err());
        assert!(theorem1(&rho, &[1.0], &[]).is_err());
        assert!(theorem3(&rho, 1.0, 1.0, &[1.0], &[0.0]).is_err());
        assert!(theorem3(&rho, f64::NAN, 1.0, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn corollary2_zero_is_de_vicente() {
        let rho = states::random_density(3, 3, 4, 21).unwrap();
        let dv = de_vicente(&rho).unwrap();
        let c2 = corollary2(&rho, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(c2.lhs, dv.lhs, epsilon = 1e-12);
        assert_abs_diff_eq!(c2.bound, dv.bound, epsilon = 1e-12);
        assert!(corollary2(&rho, -0.5, 0.0).is_err());
    }

    #[test]
    fn theorem2_on_maximally_mixed() {
        let rho = states::maximally_mixed(2, 3).unwrap();
        let a = 0.7;
        let b = theorem2_b(a, 2, 3);
        assert_abs_diff_eq!(b, 0.7 * 3f64.sqrt(), epsilon = 1e-15);
        let v = theorem2(&rho, a).unwrap();
        assert_abs_diff_eq!(v.lhs, (a * b).abs(), epsilon = 1e-12);
        assert_abs_diff_eq!(v.bound - v.lhs, 3f64.sqrt(), epsilon = 1e-12);
        assert!(!v.is_entangled());
        assert_eq!(theorem2_b(-1.0, 2, 2), -1.0);
    }

    #[test]
    fn ppt_and_realignment_basics() {
        let half = |x: f64| num_complex::Complex64::new(x, 0.0);
        let a = nalgebra::DMatrix::from_row_slice(2, 2, &[half(0.7), half(0.2), half(0.2), half(0.3)]);
        let b = nalgebra::DMatrix::from_row_slice(3, 3, &[
            half(0.5), half(0.1), half(0.0),
            half(0.1), half(0.25), half(0.05),
            half(0.0), half(0.05), half(0.25),
        ]);
        let prod = states::product(&a, &b).unwrap();
        assert!(!ppt(&prod).unwrap().is_entangled());
        assert!(!realignment(&prod).unwrap().is_entangled());

        let mm = states::isotropic(2, 2, 0.0).unwrap();
        assert!(!ppt(&mm).unwrap().is_entangled());
        let v = realignment(&mm).unwrap();
        assert_abs_diff_eq!(v.lhs, 0.5, epsilon = 1e-12);
        assert!(!v.is_entangled());

        let v = realignment(&bell_psi_plus()).unwrap();
        assert_abs_diff_eq!(v.lhs, 2.0, epsilon = 1e-12);
        assert!(v.is_entangled());
        let v = ppt(&bell_psi_plus()).unwrap();
        assert_abs_diff_eq!(v.lhs, 0.5, epsilon = 1e-12);
        assert!(v.is_entangled());
    }

    #[test]
    fn display_round_trips_names() {
        let c = Criterion::Theorem3 {
            a: 0.5,
            b: 1.0,
            alpha: vec![1.0, 3.0],
            beta: vec![1.0, -2.0],
        };
        assert_eq!(c.to_string(), "theorem3:a=0.5,b=1,alpha=[1,3],beta=[1,-2]");
        assert_eq!(Criterion::Ppt.to_string(), "ppt");
    }
}
