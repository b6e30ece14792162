//! Symplectic Gelfand–Tsetlin patterns, their q-Whittaker functions, Berele insertion,
//! intertwined Markov dynamics and the continuous limits.
//!
//! The [`guide`] modules carry the book chapters; their examples run as doctests.

pub mod algebra;
pub mod berele;
pub mod branching;
pub mod characters;
pub mod combinatorics;
pub mod continuous;
pub mod dynamics;
pub mod error;
pub mod limits;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};

/// Chapters of the guide in `book/`.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/exact_arithmetic.md")]
    pub mod exact_arithmetic {}
    #[doc = include_str!("../../../book/src/characters.md")]
    pub mod characters {}
    #[doc = include_str!("../../../book/src/berele.md")]
    pub mod berele {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    pub mod dynamics {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    pub mod spectral {}
    #[doc = include_str!("../../../book/src/limits.md")]
    pub mod limits {}
    #[doc = include_str!("../../../book/src/continuous.md")]
    pub mod continuous {}
    #[doc = include_str!("../../../book/src/verification.md")]
    pub mod verification {}
}
