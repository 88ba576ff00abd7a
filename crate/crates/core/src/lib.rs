//! Entanglement detection for bipartite density matrices via Bloch
//! representation criteria.
//!
//! A state on `C^M ⊗ C^N` is expanded over SU(M) and SU(N) generators into
//! local Bloch vectors `r`, `s` and a correlation matrix `T`
//! ([`bloch::decompose`]). The criteria in [`criteria`] build block matrices
//! from these and compare their Ky Fan (trace) norm against a bound that
//! every separable state obeys. [`scan`] sweeps one-parameter families of
//! states and bisects for detection thresholds.
//!
//! ```
//! use sepdetect::{criteria, states};
//!
//! let rho = states::isotropic(2, 3, 0.5).unwrap();
//! let v = criteria::corollary2(&rho, 2f64.sqrt(), 6f64.sqrt()).unwrap();
//! assert!(v.is_entangled());
//! ```

pub mod bloch;
pub mod criteria;
pub mod density;
pub mod error;
pub mod numerics;
pub mod parse;
pub mod scan;
pub mod selftest;
pub mod states;

pub use criteria::{Criterion, Decision, Verdict};
pub use density::DensityMatrix;
pub use error::{Error, Result};
