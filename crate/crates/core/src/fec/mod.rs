//! Byte-oriented forward error correction: GF(2^8) and RS(255,239).

mod gf;
mod rs;

pub use gf::{gf_mul, Gf256, FIELD_POLY};
pub use rs::{
    rs_decode, rs_encode, syndromes, Decoded, RsError, GENERATOR, MESSAGE_LEN, N, PARITY_LEN, T,
};
