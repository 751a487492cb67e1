//! Signed tilings of `R^(r+k)` built from the fragment matrices of an
//! invertible rational matrix `M`.
//!
//! Every translate of a fragment parallelepiped by the column lattice of `M`
//! is a tile, signed by the determinant of its fragment. Counting positive
//! minus negative tiles at any point gives `(-1)^k sgn(det M)`. This crate
//! builds the tiling in exact arithmetic, answers coverage queries and checks
//! the identities behind the constancy mechanically.
//!
//! Module map:
//!
//! - [`linalg`]: exact rational matrices.
//! - [`fragments`]: fragment matrices and determinant identities.
//! - [`tiling`]: generic directions, half-open membership, coverage.
//! - [`facets`]: facet collections, up/down partition, crossing checks.
//! - [`slices`]: the periodic tiling on the plane where the last `k`
//!   coordinates vanish.
//! - [`render`]: SVG output for two-dimensional pictures.
//! - [`cli`]: the `signtile` command-line front end.

pub mod cli;
pub mod error;
pub mod facets;
pub mod fixtures;
pub mod fragments;
pub mod linalg;
pub mod render;
pub mod slices;
pub mod tiling;

pub use error::{Error, Result};
pub use fragments::{Decomposition, Dimensions, FragmentSet, SignClass, SubsetIndex};
pub use linalg::{Matrix, Rational, Vector};
pub use tiling::GenericDirection;
