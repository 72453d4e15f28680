//! Noisy Magic Square pseudo-telepathy and local recovery channels.
//!
//! The quantum strategy for the Magic Square game wins every round on a
//! noiseless state. This crate computes how local qubit noise lowers that
//! win probability, then searches for a product recovery channel (one
//! channel per player) by alternating certified semidefinite programs.
//!
//! ```
//! use pseudotelepathy::channels::{NoiseFamily, NoiseKind};
//! use pseudotelepathy::game::standard_game;
//!
//! let g = standard_game();
//! let p = g.noisy_probability(NoiseFamily::new(NoiseKind::Depolarizing, 1.0)?)?;
//! assert!((p - 0.5).abs() < 1e-12);
//! # Ok::<(), pseudotelepathy::Error>(())
//! ```
//!
//! The guide in `book/` walks through each module with runnable examples.

pub mod channels;
pub mod error;
pub mod game;
pub mod linalg;
pub mod recovery;
pub mod sdp;
pub mod sweep;

pub use error::{Error, Result};

// keeps the guide's snippets compiling and passing
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/linear-algebra.md")]
    mod linear_algebra {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/game.md")]
    mod game {}
    #[doc = include_str!("../../../book/src/sdp.md")]
    mod sdp {}
    #[doc = include_str!("../../../book/src/recovery.md")]
    mod recovery {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
}
