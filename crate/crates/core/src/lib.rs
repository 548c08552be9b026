//! Baseband simulator for a 60 GHz single-carrier wireless gigabit link.
//!
//! The transmit path is RS(255,239) coding, framing with a PN preamble,
//! additive PN scrambling, differential encoding and DBPSK modulation. The
//! receive path mirrors it with a delay-line differential demodulator, a
//! correlator-bank frame synchronizer, descrambling and RS decoding.
//! Channel models (AWGN, tapped delay line, phase noise, Friis link budget)
//! and a seeded Monte-Carlo harness sit on top.
//!
//! Bits are packed MSB-first everywhere, and a transmitted bit `0` maps to
//! the symbol `+1`.

pub mod bits;
pub mod channel;
pub mod error;
pub mod fec;
pub mod framing;
pub mod harness;
pub mod modem;
pub mod pnseq;
pub mod sync;

pub use error::{Error, Result};
