//! Numerical core for multiparameter quantum estimation bounds.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. Everything here is a pure function of its inputs.

#![cfg_attr(not(feature = "std"), no_std)]
// `num_traits::Float` supplies float methods in no_std builds; with std the
// inherent methods win and the import looks unused.
#![cfg_attr(feature = "std", allow(unused_imports))]

extern crate alloc;

pub mod bounds;
pub mod catalog;
pub mod error;
pub mod gap;
pub mod linalg;
pub mod model;
pub mod sdp;

pub use error::{Error, Result};
