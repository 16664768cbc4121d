//! Exact stationary tail asymptotics for two queueing systems with an
//! unreliable server:
//!
//! * **Model 1**: an M/M/1 queue whose server alternates between `Up` and
//!   `Down` (breakdown rate `alpha`, repair rate `beta`); arrivals keep
//!   joining while the server is down.
//! * **Model 2**: a reliable server feeding the unreliable one, with
//!   feedback of completions from the unreliable server with probability
//!   `1 - p`.
//!
//! Everything is computed on the uniformized embedded chain. The crate
//! provides the transition kernels ([`kernels`]), the Feynman-Kac spectral
//! quantities ([`spectral`]), harmonic functions and twisted kernels
//! ([`twist`]), the matrix-geometric solution of Model 1 and a truncated
//! stationary oracle for every model ([`qbd`]), the assembled tail
//! constants ([`asymptotics`]) and a seeded simulator with large-deviation
//! excursion analysis ([`simulate`]).
//!
//! The crate is `no_std` (with `alloc`); the `std` feature only forwards to
//! dependencies.
//!
//! ```
//! use unreliable_core::{Model, ModelParams, spectral};
//!
//! let params = ModelParams::with_default_uniformization(10.0, 11.0, 0.1, 10.0, 1.0, Model::Model1)
//!     .unwrap();
//! let roots = spectral::characteristic_roots(&params);
//! assert!((roots.gamma_p - 0.919_060).abs() < 1e-6);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod asymptotics;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod linalg;
mod math;
pub mod params;
pub mod qbd;
pub mod simulate;
pub mod spectral;
pub mod twist;

pub use error::{Error, Result};
pub use params::{default_uniformization, Model, ModelParams, ServerStatus, State};
