//! Core of the `lineperc` toolkit: Bernoulli line percolation on ℤᵈ.
//!
//! Every axis-parallel line of ℤᵈ is kept or removed independently. The
//! line through a point of the hyperplane orthogonal to axis `i` is kept
//! with probability `p[i]`. A site is open when none of the `d` lines
//! through it was removed. The crate samples these models reproducibly
//! and provides the combinatorial machinery used to study them:
//!
//! - [`lattice`]: parameters, hyperplane fields, vacancy, closed forms
//! - [`path`]: 3D lattice paths, projections and the path product
//! - [`planar`]: open and closed crossings of rectangles, 2-directed paths
//! - [`cluster`]: connected components of boxed configurations
//! - [`renorm`]: good blocks, block crossings and the paths they carry
//! - [`stats`]: mergeable estimate records and decay-law fits
//! - [`observe`]: per-replica evaluation of the experiment observables
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cluster;
mod error;
pub mod lattice;
pub mod observe;
pub mod path;
pub mod planar;
pub mod renorm;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use lattice::{BoxRegion, Configuration, ParamVector, PlaneField, SeedSpec, Window};
pub use path::LatticePath;

