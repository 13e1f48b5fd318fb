//! Exact and high-precision machinery for the Rubin-Stark class number formula
//! over real abelian fields: group rings, Sinnott indices, Rubin lattices,
//! regulators and L-derivatives.

pub mod abelian;
pub mod arithmetic;
pub mod cyclotomic;
pub mod error;
pub mod field;
pub mod group_ring;
pub mod lattice;
pub mod linalg;
pub mod lvalues;
pub mod numeric;
pub mod numfield;
pub mod regulator;
pub mod selftest;
pub mod stark;
pub mod synthetic;
pub mod verify;

pub use error::{Error, Result};

#[cfg(test)]
extern crate self as stark_index;
#[cfg(test)]
mod tests;
