//! Topology of level sets of quasiperiodic functions with three quasiperiods.
//!
//! A 3-periodic Fourier model `F` on the unit torus is meshed at a level `c`,
//! the surface homology is computed exactly over ℤ, and for rational field
//! directions `B` the plane foliation of the surface is decomposed into closed
//! and open pieces. The coprime triple `ℓ` labelling the open pieces, the
//! energy interval carrying them, stability maps over direction space and an
//! independent planar orbit tracer are built on top.

pub mod cli;
pub mod error;
pub mod fields;
pub mod foliation;
pub mod homology;
pub mod mesh;
pub mod planar;
pub mod scan;
pub mod topology;

pub use error::{Error, Result};
