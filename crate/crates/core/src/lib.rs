//! Exact computations for the end behavior of `G = F_m × Z^d` acting on
//! products `Y × E^d` of a horizontal space with Euclidean space.
//!
//! Horizontal spaces are metric trees and the diamond complex. Displacements
//! live in `Q(√2)` and are computed exactly, even for group elements whose
//! reduced words have astronomically many letters.

pub mod actions;
pub mod error;
pub mod exactnum;
pub mod fixtures;
pub mod freegroup;
pub mod limsetmap;
pub mod schmear;
pub mod sequences;
pub mod spaces;
pub mod syntax;

pub use actions::{ActionSpec, Displacement, PairFunctionals, QieReport, QieScope};
pub use error::{Error, Result};
pub use exactnum::{QuadExt, Rational};
pub use freegroup::{Ambient, GroupElement, Letter, Word};
pub use sequences::{
    ElementSequence, ExponentPoly, LimitConfig, LimitReport, LimitStatus, SameLimitReport,
    SequenceFamily, SharedSequence, Target,
};
pub use spaces::{DiamondSpace, Horizontal, TreeSpace};
