//! Shearing of Loewner chains on the unit ball of `C²`.
//!
//! The crate represents holomorphic maps and vector fields as truncated
//! bivariate power series ([`series`]), implements the shearing operator
//! `h ↦ (λz₁ + Az₂², μz₂)` ([`shear`]), tests membership in the class `M₋`
//! of normalized fields with `Re⟨H(z), z⟩ ≤ 0` ([`mminus`]), integrates
//! Loewner ODEs and recovers chain maps ([`loewner`]), and assembles the
//! end-to-end checks of the sharp bound `|a¹₀,₂| ≤ 3√3/2` ([`analysis`]).

// `!(x < y)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod loewner;
pub mod mminus;
pub mod numerics;
pub mod series;
pub mod shear;

pub use error::{Error, Result};
pub use series::{Component, MultiIndex, Point2, PowerSeriesMap2};
pub use shear::ShearMap;
