//! Core algorithms for studying function-space diversity of small classifiers.
//!
//! Everything in this crate is pure computation over owned buffers: training
//! small MLPs with exact gradients, sampling weight configurations from
//! trajectory-derived subspaces, and measuring how different the resulting
//! *functions* are (as opposed to how different their weights are). File IO,
//! the CLI, and experiment orchestration live in the companion `polymode`
//! crate.
//!
//! The crate is `no_std`-compatible (with `alloc`); the `std` feature (on by
//! default) only forwards to dependencies.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod checkpoint;
pub mod data;
pub mod digest;
pub mod embed;
pub mod error;
pub mod landscape;
pub mod linalg;
pub mod metrics;
pub mod net;
pub mod rng;
pub mod subspace;
pub mod theory;
pub mod train;

pub use error::{CoreError, Result};
