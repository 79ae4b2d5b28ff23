//! Khovanov bicomplex for the colored Jones polynomial, built from cables of a
//! link diagram and the signed complex of neighbour pairings.
//!
//! Every structural identity is checked with exact integer arithmetic, and the
//! bigraded Euler characteristic is compared against an independent Kauffman
//! bracket computation of the colored Jones polynomial.

pub mod bicomplex;
pub mod cli;
pub mod diagram;
pub mod intlinalg;
pub mod khovanov;
pub mod pairing;
pub mod polyoracle;

pub use polyoracle::DEFAULT_CAP;
