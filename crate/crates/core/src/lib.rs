//! Rep-tile clustered planar phased arrays.
//!
//! The crate covers the whole pipeline: rep-tile geometry and the L-tromino covering
//! theorem ([`geometry`]), exact-cover enumeration of tilings ([`exact_cover`]), the
//! closed-form tiling count ([`cardinality`]), far-field evaluation and mask matching
//! ([`pattern`]), the split-based clustering optimizer ([`rtam`]) and the file formats and
//! run configuration used by the command-line tool ([`io`], [`config`]).

pub mod cardinality;
pub mod config;
pub mod error;
pub mod exact_cover;
pub mod geometry;
pub mod io;
pub mod pattern;
pub mod rtam;

pub use error::{Error, Result};
