//! Pointer statistics for a qubit observable read out through a continuous probe.
//!
//! A two-outcome observable `A` is coupled to a one-dimensional pointer via the
//! impulsive interaction `exp(-i g A p)`, and the pointer is conditioned on a
//! post-selection of the system. This crate computes the conditioned pointer
//! expectation values exactly, for any pre/post-selection overlap, including
//! the fully orthogonal case where the usual weak-value expansion has no
//! leading term. It also classifies the asymptotic regimes that emerge when
//! the selection pair approaches orthogonality along a power-law path.
//!
//! The crate is `no_std` (alloc only); all IO lives in companion crates.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod asymptotics;
pub mod exact;
pub mod model;
pub mod probe;
pub mod series;

mod error;
mod fft;
mod fmath;

pub use error::Error;

/// Double-precision complex scalar used throughout.
pub type Complex = num_complex::Complex64;

pub type Result<T> = core::result::Result<T, Error>;
