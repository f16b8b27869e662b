//! Topological arbiters on finite cell complexes.
//!
//! The crate evaluates homological arbiters and multiarbiters over Z/2,
//! checks their axioms exhaustively or by sampling, models the dyadic
//! partial arbiters with an inclusion oracle, computes Magnus expansions and
//! Milnor invariants of link presentations, and runs Voronoi percolation
//! experiments on the cube.

pub mod arbiters;
pub mod complexes;
pub mod dyadic;
pub mod gf2;
pub mod milnor;
pub mod percolation;
pub mod report;
pub mod seeding;

pub use complexes::{CellComplex, Subcomplex};
pub use gf2::{BitMatrix, BitVector};
