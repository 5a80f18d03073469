//! Radial Keller–Osserman analysis for k-Hessian and Π_k-Hessian type equations.
//!
//! The PDE is reduced to the Cauchy problem
//! `v' = C r^{−q} (∫₀ʳ s^{τ−1} g(v) ds)^{1/θ}`, `v(0) = a`, which is integrated numerically,
//! classified, and tested against the Keller–Osserman integral.

pub mod error;
pub mod ko;
pub mod mapper;
pub mod nonlinearity;
pub mod operators;
pub mod params;
pub mod profile;
pub mod quadrature;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use ko::{ko_kappa, ko_standard, Decision, Evidence, Verdict};
pub use mapper::{existence_verdict, map_to_cauchy, Family, PdeSpec};
pub use nonlinearity::Nonlinearity;
pub use params::{classify_regularity, CaseTag, CauchyParams, RegularityClass};
pub use profile::{SolutionProfile, Status};
pub use solver::{solve, SolveControl};
pub use verify::{builtin_examples, verify_profile, RadialProfile, VerifyReport};
