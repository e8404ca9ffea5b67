//! Exact construction and verification of Kauffman-bracket intertwiners.
//!
//! The crate builds irreducible representations of the quantum torus and of
//! the Chekhov–Fock algebra of the once-punctured torus at odd roots of unity,
//! the intertwiners attached to mapping classes, and their traces as exact
//! cyclotomic integers.

pub mod cyclotomic;
pub mod error;
pub mod harness;
pub mod intertwiner;
pub mod matrix;
pub mod punctured_torus;
pub mod quantum_torus;
pub mod torus_rep;

pub use error::{Error, Result};

/// Largest ring order accepted by exact computations.
pub const EXACT_ORDER_CAP: u64 = 20_000;

/// Rejects even dimensions.
pub fn ensure_odd(n: i64) -> Result<()> {
    if n < 1 {
        Err(Error::TooSmall(n))
    } else if n % 2 == 0 {
        Err(Error::EvenLevel(n))
    } else {
        Ok(())
    }
}
