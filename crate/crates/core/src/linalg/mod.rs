//! Exact linear algebra over `Z/p^N` and `F_p`.

mod gf2;
mod matrix;
mod pow2;
mod ring;
mod snf;

pub use gf2::{dot, rank_mod_p, BitMatrix};
pub use matrix::{product_chain, MatrixMod};
pub use ring::{RingSpec, Zmod, MODULUS_LIMIT};
pub use snf::{cokernel_type, cokernel_with_images, snf, snf_valuations, CokernelImages, CokernelType, SnfResult};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("precision exponent must be at least 1")]
    ZeroPrecision,
    #[error("modulus {p}^{precision} does not fit in 63 bits")]
    ModulusOverflow { p: u64, precision: u32 },
    #[error("cannot raise precision from {from} to {to} by reduction")]
    PrecisionIncrease { from: u32, to: u32 },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("ring mismatch: {0:?} vs {1:?}")]
    RingMismatch(RingSpec, RingSpec),
    #[error("empty matrix chain")]
    EmptyChain,
}
