//! Exact-arithmetic toolkit for lattice polytopes and toric Cox rings.
//!
//! The crate decides sumset equalities `(M ∩ P) + (M ∩ P') = M ∩ (P + P')`,
//! scans for the integer decomposition property, builds normal fans and
//! nef/ample certificates, computes linear Gale transforms and chamber
//! decompositions with Hilbert bases, checks surjectivity of graded
//! multiplication maps of Cox rings, and verifies Koszul / Eagon–Northcott
//! Hilbert-function identities for projective space.
//!
//! Everything is exact: arbitrary-precision integers for linear algebra,
//! `i64` lattice data with checked conversions, and exact rational
//! feasibility (Fourier–Motzkin) for all cone certificates. No floating
//! point anywhere.

pub mod cone;
pub mod fan;
pub mod coxring;
pub mod gale;
pub mod exactlin;
pub mod polytope;

pub use exactlin::{IntegerMatrix, Rational};
