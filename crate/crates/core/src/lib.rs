//! Optimal unambiguous sequential measurements for symmetric ternary pure
//! states.
//!
//! Two parties, Alice and Bob, share one of three product states
//! `|a_r⟩ ⊗ |b_r⟩` generated cyclically by local unitaries. Each party's
//! triple is fully described by one complex overlap. This crate decides when
//! a one-way (Alice to Bob) local measurement reaches the performance of the
//! best joint unambiguous measurement, constructs that measurement
//! explicitly, and verifies it with a dual certificate.

pub mod error;
pub mod multipartite;
pub mod numerics;
pub mod optimality;
pub mod povm;
pub mod splane;
pub mod states;

pub use error::{Error, Result};
pub use numerics::{CMat, Operator3, Operator9, C64};
pub use optimality::{check_global_optimality, Branch, OptimalityReport};
pub use states::{canonicalize, CanonicalPair, Overlap};
