//! Wire layout (260 bytes):
//!
//! ```text
//! | preamble 4 | payload 239 | header 1 | parity 16 |
//!              |<------- scrambled, offset 0 ------->|
//! ```
//!
//! The RS codeword is payload followed by parity; the header byte sits
//! between them on the wire but is not covered by the code.

use thiserror::Error;

use crate::fec::{self, RsError, MESSAGE_LEN, PARITY_LEN};
use crate::pnseq::{self, PreambleWord};

pub const PREAMBLE_LEN: usize = 4;
pub const BODY_LEN: usize = MESSAGE_LEN + 1 + PARITY_LEN;
pub const FRAME_LEN: usize = PREAMBLE_LEN + BODY_LEN;
pub const FRAME_BITS: usize = FRAME_LEN * 8;
/// Offset of the header byte inside the 256-byte body.
pub const HEADER_OFFSET: usize = MESSAGE_LEN;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("expected {expected} bytes, got {got}")]
    Length { expected: usize, got: usize },
    #[error("FEC failure ({nonzero_syndromes} nonzero syndromes)")]
    Fec { nonzero_syndromes: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteFrame {
    pub preamble: PreambleWord,
    pub payload: Vec<u8>,
    pub header: u8,
    pub parity: [u8; PARITY_LEN],
}

impl ByteFrame {
    /// Unscrambled body: payload, header, parity.
    pub fn body(&self) -> Vec<u8> {
        let mut body = Vec::with_capacity(BODY_LEN);
        body.extend_from_slice(&self.payload);
        body.push(self.header);
        body.extend_from_slice(&self.parity);
        body
    }

    /// The 260 bytes as sent: clear preamble, then the scrambled body.
    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FRAME_LEN);
        out.extend_from_slice(&self.preamble.0);
        let mut body = self.body();
        pnseq::scramble_in_place(&mut body, &pnseq::scrambler(), 0);
        out.extend_from_slice(&body);
        out
    }
}

pub fn build_frame(payload: &[u8], seq: u64) -> Result<ByteFrame, FrameError> {
    let parity = fec::rs_encode(payload).map_err(|_| FrameError::Length {
        expected: MESSAGE_LEN,
        got: payload.len(),
    })?;
    Ok(ByteFrame {
        preamble: pnseq::preamble(),
        payload: payload.to_vec(),
        header: (seq % 256) as u8,
        parity,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedFrame {
    pub payload: Vec<u8>,
    pub header: u8,
    pub fec_corrected: usize,
}

/// Parses a byte-aligned 260-byte frame.
pub fn parse_frame(raw: &[u8]) -> Result<ParsedFrame, FrameError> {
    if raw.len() != FRAME_LEN {
        return Err(FrameError::Length {
            expected: FRAME_LEN,
            got: raw.len(),
        });
    }
    let body = pnseq::scramble(&raw[PREAMBLE_LEN..], &pnseq::scrambler(), 0);
    decode_body(&body)
}

/// RS-decodes an already descrambled 256-byte body.
pub fn decode_body(body: &[u8]) -> Result<ParsedFrame, FrameError> {
    if body.len() != BODY_LEN {
        return Err(FrameError::Length {
            expected: BODY_LEN,
            got: body.len(),
        });
    }
    let mut cw = Vec::with_capacity(fec::N);
    cw.extend_from_slice(&body[..MESSAGE_LEN]);
    cw.extend_from_slice(&body[HEADER_OFFSET + 1..]);
    match fec::rs_decode(&cw) {
        Ok(d) => Ok(ParsedFrame {
            payload: d.message,
            header: body[HEADER_OFFSET],
            fec_corrected: d.corrected,
        }),
        Err(RsError::Uncorrectable { nonzero_syndromes }) => {
            Err(FrameError::Fec { nonzero_syndromes })
        }
        Err(RsError::Length { .. }) => unreachable!("codeword length is fixed"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn length_is_260() {
        assert_eq!(FRAME_LEN, 4 + 239 + 1 + 16);
        let f = build_frame(&[7u8; 239], 3).unwrap();
        assert_eq!(f.serialize().len(), 260);
    }

    #[test]
    fn zero_frame_before_scrambling() {
        let f = build_frame(&[0u8; 239], 0).unwrap();
        assert_eq!(f.header, 0);
        assert_eq!(f.parity, [0u8; 16]);
        // the body on the wire is then the scrambler word 32 times
        let wire = f.serialize();
        assert_eq!(&wire[..4], &pnseq::preamble().0);
        for chunk in wire[4..].chunks(8) {
            assert_eq!(chunk, pnseq::scrambler().0);
        }
    }

    #[test]
    fn header_is_seq_mod_256() {
        assert_eq!(build_frame(&[0u8; 239], 513).unwrap().header, 1);
    }

    #[test]
    fn wrong_payload_length() {
        assert_eq!(
            build_frame(&[0u8; 238], 0),
            Err(FrameError::Length { expected: 239, got: 238 })
        );
        assert!(matches!(parse_frame(&[0u8; 259]), Err(FrameError::Length { .. })));
    }

    #[test]
    fn corrupted_bytes_are_corrected() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let payload: Vec<u8> = (0..239).map(|_| rng.random()).collect();
            let mut wire = build_frame(&payload, 42).unwrap().serialize();
            // pick 8 positions among payload/parity, never the header
            let candidates: Vec<usize> =
                (4..260).filter(|&i| i != 4 + HEADER_OFFSET).collect();
            for k in sample(&mut rng, candidates.len(), 8) {
                wire[candidates[k]] ^= rng.random_range(1..=255u8);
            }
            let p = parse_frame(&wire).unwrap();
            assert_eq!(p.payload, payload);
            assert_eq!(p.header, 42);
            assert_eq!(p.fec_corrected, 8);
        }
    }

    #[test]
    fn twenty_corrupted_bytes_fail_or_miscorrect() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut failures = 0;
        for _ in 0..100 {
            let payload: Vec<u8> = (0..239).map(|_| rng.random()).collect();
            let mut wire = build_frame(&payload, 0).unwrap().serialize();
            let candidates: Vec<usize> =
                (4..260).filter(|&i| i != 4 + HEADER_OFFSET).collect();
            for k in sample(&mut rng, candidates.len(), 20) {
                wire[candidates[k]] ^= rng.random_range(1..=255u8);
            }
            match parse_frame(&wire) {
                Err(FrameError::Fec { nonzero_syndromes }) => {
                    assert!(nonzero_syndromes > 0);
                    failures += 1;
                }
                Ok(p) => assert_ne!(p.payload, payload),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(failures > 90);
    }
}
