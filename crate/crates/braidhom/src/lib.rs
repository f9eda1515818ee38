//! Exact computation of braid-group (co)homology with local coefficients
//! given by the determinant of the Burau representation, together with the
//! mod-p homology of the double loop space of the 3-connected cover of S^3
//! and verification suites comparing the two.
//!
//! Everything is computed over F[t^±1] for F = Q or F_p in exact arithmetic:
//! no floating point anywhere.

pub mod braid;
pub mod cli;
pub mod complexes;
pub mod homology;
pub mod linalg;
pub mod loopspace;
pub mod ring;
pub mod verify;
