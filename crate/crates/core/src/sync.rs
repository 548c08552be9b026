//! Frame synchronization on the received byte stream.
//!
//! The receiver's serial-to-parallel converter produces bytes with an
//! unknown bit alignment. At every byte position a bank of eight 32-bit
//! correlators looks at a 39-bit window, correlator `k` starting `k` bits
//! into it, so one bank covers every alignment. A correlator firing at or
//! above the threshold is a candidate; it is validated when the same
//! correlator fires again exactly one frame (260 bytes) later. The
//! validated correlator index fixes the byte alignment.

use std::io::Write;

use crate::framing::{BODY_LEN, FRAME_BITS, FRAME_LEN, PREAMBLE_LEN};
use crate::pnseq::{self, PreambleWord, ScramblerWord};

/// Fires on at most 3 disagreeing bits out of 32.
pub const DEFAULT_THRESHOLD: u32 = 29;
pub const CORRELATORS: usize = 8;
pub const BANK_WINDOW_BITS: usize = 32 + CORRELATORS - 1;
/// Consecutive failed preamble checks that drop the lock.
pub const MAX_MISSES: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrelatorScore {
    pub byte_position: usize,
    pub shift: u8,
    pub score: u32,
}

impl CorrelatorScore {
    pub fn bit_position(&self) -> usize {
        self.byte_position * 8 + self.shift as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyncDecision {
    pub frame_start_bit: usize,
    pub shift: u8,
    pub correlator_id: u8,
    pub validated: bool,
}

/// Number of agreeing bit positions.
#[inline]
pub fn correlate32(window: u32, reference: &PreambleWord) -> u32 {
    32 - (window ^ reference.as_u32()).count_ones()
}

/// Scores of the eight correlators over a 39-bit window held in the low
/// bits of `window`.
pub fn bank_scan(window: u64, reference: &PreambleWord) -> [u32; CORRELATORS] {
    let mut scores = [0u32; CORRELATORS];
    for (s, score) in scores.iter_mut().enumerate() {
        let w = (window >> (CORRELATORS - 1 - s)) as u32;
        *score = correlate32(w, reference);
    }
    scores
}

/// `n` bits (n <= 56) starting at absolute bit `bit` of an MSB-first byte
/// stream, right-aligned. Bits past the end read as zero.
#[inline]
pub fn bits_at(bytes: &[u8], bit: usize, n: usize) -> u64 {
    debug_assert!(n <= 56);
    let first = bit / 8;
    let mut v = 0u64;
    for i in 0..8 {
        v = (v << 8) | *bytes.get(first + i).unwrap_or(&0) as u64;
    }
    (v << (bit % 8)) >> (64 - n)
}

/// The 39-bit bank window at `byte_position`, if the stream holds it.
#[inline]
pub fn bank_window(bytes: &[u8], byte_position: usize) -> Option<u64> {
    (byte_position * 8 + BANK_WINDOW_BITS <= bytes.len() * 8)
        .then(|| bits_at(bytes, byte_position * 8, BANK_WINDOW_BITS))
}

/// Scores the preamble at an exact bit position.
pub fn score_at(bytes: &[u8], bit: usize, reference: &PreambleWord) -> Option<u32> {
    (bit + 32 <= bytes.len() * 8).then(|| correlate32(bits_at(bytes, bit, 32) as u32, reference))
}

/// Every `(byte_position, shift)` whose score reaches `threshold`.
pub fn detect(bytes: &[u8], threshold: u32) -> Vec<CorrelatorScore> {
    assert!(threshold > 0 && threshold <= 32, "threshold must be in 1..=32");
    let pre = pnseq::preamble();
    let mut out = Vec::new();
    let mut p = 0;
    while let Some(w) = bank_window(bytes, p) {
        for (s, &score) in bank_scan(w, &pre).iter().enumerate() {
            if score >= threshold {
                out.push(CorrelatorScore {
                    byte_position: p,
                    shift: s as u8,
                    score,
                });
            }
        }
        p += 1;
    }
    out
}

/// Highest score in one bank; ties go to the smallest shift.
pub fn best_of(scores: &[u32; CORRELATORS], threshold: u32) -> Option<(u8, u32)> {
    let mut best: Option<(u8, u32)> = None;
    for (s, &score) in scores.iter().enumerate() {
        if score >= threshold && best.is_none_or(|(_, b)| score > b) {
            best = Some((s as u8, score));
        }
    }
    best
}

/// Finds the first candidate confirmed by another candidate from the same
/// correlator exactly one frame later. Within a byte position only the
/// best candidate is considered.
pub fn validate_periodicity(candidates: &[CorrelatorScore], bytes: &[u8]) -> Option<SyncDecision> {
    use std::collections::{BTreeMap, HashSet};
    let mut best: BTreeMap<usize, CorrelatorScore> = BTreeMap::new();
    for c in candidates {
        best.entry(c.byte_position)
            .and_modify(|b| {
                if c.score > b.score || (c.score == b.score && c.shift < b.shift) {
                    *b = *c;
                }
            })
            .or_insert(*c);
    }
    let present: HashSet<(usize, u8)> = best.values().map(|c| (c.byte_position, c.shift)).collect();
    best.values()
        .find(|c| {
            let end_bit = c.bit_position() + FRAME_BITS + 32;
            end_bit <= bytes.len() * 8 && present.contains(&(c.byte_position + FRAME_LEN, c.shift))
        })
        .map(|c| SyncDecision {
            frame_start_bit: c.bit_position(),
            shift: c.shift,
            correlator_id: c.shift,
            validated: true,
        })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descrambled {
    pub bytes: Vec<u8>,
    /// Agreeing bits between the first 64 received bits and the scrambler
    /// sequence applied to the reference plaintext.
    pub correlation: u32,
}

/// Descrambles a frame body from its first byte. The diagnostic correlation
/// compares against `reference` (zeros when absent, i.e. the bare
/// scrambler sequence).
pub fn descramble_align(body: &[u8], word: &ScramblerWord, reference: Option<&[u8]>) -> Descrambled {
    let bytes = pnseq::scramble(body, word, 0);
    let plain = reference.map(|r| r.to_vec()).unwrap_or_else(|| vec![0u8; 8]);
    let expected = pnseq::scramble(&plain[..8.min(plain.len())], word, 0);
    let n = 8.min(body.len()).min(expected.len());
    let errors = crate::bits::hamming(&body[..n], &expected[..n]) as u32;
    Descrambled {
        bytes,
        correlation: (n as u32 * 8).saturating_sub(errors),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionRecord {
    pub bit_position: usize,
    pub shift: u8,
    pub score: u32,
    pub validated: bool,
}

/// CSV with columns `bit_position,byte_position,shift,score,validated`.
pub fn write_detection_csv<W: Write>(records: &[DetectionRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "bit_position,byte_position,shift,score,validated")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.bit_position,
            r.bit_position / 8,
            r.shift,
            r.score,
            r.validated as u8
        )?;
    }
    Ok(())
}

/// A frame delivered while locked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LockedFrame {
    pub start_bit: usize,
    pub preamble_score: u32,
    /// The 256 still-scrambled bytes following the preamble.
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SyncRun {
    pub frames: Vec<LockedFrame>,
    pub acquisitions: usize,
    pub lock_losses: usize,
    pub log: Vec<DetectionRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Hunting { byte: usize },
    Locked { start_bit: usize, misses: u32 },
}

/// Hunt / lock state machine over a whole received byte stream.
///
/// Hunting scans bank windows byte by byte and locks on the first
/// periodicity-validated candidate. While locked, the preamble is checked
/// at each expected frame start; the frame is delivered either way, and the
/// lock drops after [`MAX_MISSES`] consecutive sub-threshold checks.
#[derive(Debug, Clone)]
pub struct Synchronizer {
    pub threshold: u32,
    pub keep_log: bool,
    reference: PreambleWord,
}

impl Default for Synchronizer {
    fn default() -> Self {
        Self::new(DEFAULT_THRESHOLD)
    }
}

impl Synchronizer {
    pub fn new(threshold: u32) -> Self {
        assert!(threshold > 0 && threshold <= 32, "threshold must be in 1..=32");
        Synchronizer {
            threshold,
            keep_log: false,
            reference: pnseq::preamble(),
        }
    }

    pub fn run(&self, bytes: &[u8]) -> SyncRun {
        let total_bits = bytes.len() * 8;
        let mut run = SyncRun::default();
        let mut state = State::Hunting { byte: 0 };
        loop {
            match state {
                State::Hunting { byte } => {
                    let Some(w) = bank_window(bytes, byte) else { break };
                    let scores = bank_scan(w, &self.reference);
                    let Some((shift, score)) = best_of(&scores, self.threshold) else {
                        state = State::Hunting { byte: byte + 1 };
                        continue;
                    };
                    let bit = byte * 8 + shift as usize;
                    let Some(next) = score_at(bytes, bit + FRAME_BITS, &self.reference) else {
                        break;
                    };
                    let validated = next >= self.threshold;
                    if self.keep_log {
                        run.log.push(DetectionRecord {
                            bit_position: bit,
                            shift,
                            score,
                            validated,
                        });
                    }
                    state = if validated {
                        run.acquisitions += 1;
                        State::Locked {
                            start_bit: bit,
                            misses: 0,
                        }
                    } else {
                        State::Hunting { byte: byte + 1 }
                    };
                }
                State::Locked { start_bit, misses } => {
                    if start_bit + FRAME_BITS > total_bits {
                        break;
                    }
                    let score = score_at(bytes, start_bit, &self.reference).unwrap();
                    let ok = score >= self.threshold;
                    let misses = if ok { 0 } else { misses + 1 };
                    if self.keep_log {
                        run.log.push(DetectionRecord {
                            bit_position: start_bit,
                            shift: (start_bit % 8) as u8,
                            score,
                            validated: ok,
                        });
                    }
                    if misses >= MAX_MISSES {
                        run.lock_losses += 1;
                        state = State::Hunting { byte: start_bit / 8 };
                        continue;
                    }
                    let body_bit = start_bit + PREAMBLE_LEN * 8;
                    let body = (0..BODY_LEN)
                        .map(|i| bits_at(bytes, body_bit + 8 * i, 8) as u8)
                        .collect();
                    run.frames.push(LockedFrame {
                        start_bit,
                        preamble_score: score,
                        body,
                    });
                    state = State::Locked {
                        start_bit: start_bit + FRAME_BITS,
                        misses,
                    };
                }
            }
        }
        run
    }
}
