//! Controlled coarse homology certificates for finitely generated groups.
//!
//! The crate builds finite truncations (balls) of Cayley graphs and the
//! lumberjack comb, and on them
//!
//! * constructs explicit controlled 1-chains bounding the fundamental class
//!   (line chains, coset chains, spread tails),
//! * decides by max-flow/min-cut whether a 1-chain with prescribed boundary
//!   and growth-controlled coefficients exists, returning either the chain or
//!   a finite set violating the isoperimetric inequality,
//! * measures isodiametric profiles, co-area identities and Dirichlet
//!   spectral gaps of weighted graph Laplacians.
//!
//! All chain-level arithmetic is exact (arbitrary precision rationals).

pub mod certify;
pub mod chains;
pub mod cli;
pub mod constructions;
pub mod profiles;
pub mod spaces;
pub mod spectral;

pub use chains::{Chain, GrowthFunction, Rational};
pub use spaces::{BallIndex, PointCode, Space};
