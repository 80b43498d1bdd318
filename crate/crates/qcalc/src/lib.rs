//! Exact computer algebra for Z_N-graded exterior calculus, where the exterior
//! differential satisfies d^N = 0 instead of the usual d^2 = 0.
//!
//! The deformation parameter is a primitive N-th root of unity q, and all
//! computation is exact: scalars live in cyclotomic fields over
//! arbitrary-precision rationals, so every verified identity is a proof-grade
//! equality, not a floating-point coincidence.
//!
//! Module map:
//!
//! * [`scalar`] — cyclotomic field arithmetic, q-number towers and the
//!   alpha-coefficients that govern iterated q-differentials.
//! * [`symfun`] — multivariate polynomials over those scalars (the "smooth
//!   functions" of the formal calculus) and polynomial coordinate maps.
//! * [`forms`] — the graded module of differential monomials in dx^i, ...,
//!   d^{N-1}x^i with its cyclic rewriting rules, products and the exterior
//!   differential.
//! * [`nilpotency`] — the L-polynomials whose vanishing is equivalent to
//!   d^N = 0 on functions, and the verification drivers.
//! * [`dim1`] — the one-dimensional N = 3 calculus: the split form algebra,
//!   primitives, pullbacks, square roots of quadratic forms and curve length.
//! * [`clifford`] — generalized Clifford algebras with q-commuting generators,
//!   their matrix representations, q-differentials, covariant curvature and
//!   the Bianchi identities.
//! * [`covariant`] — covariant second and third differentials of coordinates,
//!   the induced connection-like coefficients, chart transformations, torsion
//!   and the curvature-tensor identification.
//! * [`geodesic`] — numeric integration of the third-order geodesic equation.
//! * [`report`] — structured pass/fail run reports.
//! * [`config`] — TOML/JSON configuration loading for the CLI and FFI.

pub mod clifford;
pub mod config;
pub mod covariant;
pub mod dim1;
pub mod forms;
pub mod geodesic;
pub mod nilpotency;
pub mod report;
pub mod scalar;
pub mod symfun;
