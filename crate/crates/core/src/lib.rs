//! Orbit distances and bi-Lipschitz invariant features for tuples of vectors.
//!
//! A configuration of `l` points in `n` dimensions is an `n x l` matrix whose
//! columns are the points. The crate provides
//!
//! * [`metrics`]: exact orbit distances for the orthogonal group `O(n)`, the
//!   unitary group `U(n)`, the euclidean group `E(n)` and the complex euclidean
//!   group `F(n)`, together with the group element attaining the minimum;
//! * [`embed`]: the square-root-of-Gram feature maps whose euclidean distances
//!   sandwich the orbit distance between `d` and `sqrt(2) d`;
//! * [`reduce`]: projections of those features onto `O(n l)` coordinates;
//! * [`triangle`]: the planar triangle specialisation (side lengths and the
//!   three-coordinate cone map);
//! * [`search`]: nearest-orbit queries over a shape database;
//! * [`bench`]: seeded experiment harnesses;
//! * [`cli`]: the command-line front end and its file formats.

pub mod bench;
pub mod cli;
pub mod embed;
mod error;
pub mod io;
pub mod kdtree;
pub mod matcore;
pub mod metrics;
pub mod reduce;
pub mod sampling;
pub mod search;
pub mod triangle;

pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, RealMatrix};
pub use metrics::{Alignment, Configuration, GroupAction, GroupKind};
