//! Exact computational toolkit for permutations of the form
//! `F(x) = L1(x^-1) + L2(x)` over GF(2^n), where `L1` and `L2` are linearized
//! polynomials and `0^-1 = 0`.
//!
//! The crate covers the arithmetic underneath (field, linear maps, adjoints),
//! vectorial Boolean function invariants, Kloosterman sums together with the
//! quadratic form `Q`, every permutation criterion for this family, and
//! exhaustive or pruned searches that show such permutations exist for `n = 3, 4`
//! and not for `n >= 5`.

pub mod error;
pub mod gf2;
pub mod gf2n;
pub mod inverse_perm;
pub mod kloosterman;
pub mod linmap;
pub mod search;
pub mod suites;
pub mod vbf;

pub use error::{Error, Result};
pub use gf2::BitMatrix;
pub use gf2n::{FieldContext, FieldElement, FieldSpec};
pub use inverse_perm::PairOracle;
pub use linmap::{LinearizedPoly, Subspace};
