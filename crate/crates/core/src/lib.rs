//! Twin-prime analytics: segmented sieves, the modified totient and Möbius
//! functions, Legendre-style exact counting formulas, constant and series
//! evaluations, and residue-class bias statistics over primes and twin primes.
//!
//! A twin prime pair is written (p, p+2) and is always indexed by its first
//! member p. All counting functions (`pi2`, the per-class tallies, gap and
//! transition statistics) follow that convention.

pub mod analytic;
pub mod arith;
pub mod bias;
pub mod legendre;
pub mod progressions;
pub mod sieve;

mod error;
mod kahan;

pub use error::Error;
pub use kahan::KahanSum;

pub type Result<T> = std::result::Result<T, Error>;
