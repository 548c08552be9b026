//! Maximal-length LFSR sequences: the 32-bit preamble, the 64-bit
//! scrambling word, and additive scrambling.

use std::sync::LazyLock;

use crate::bits;
use crate::error::{Error, Result};

/// Fibonacci LFSR described by its characteristic polynomial.
///
/// The sequence obeys `a[k + order] = XOR_{t in taps} a[k + t]`, where
/// `taps` lists the nonzero lower-order exponents of the polynomial
/// (`x^5 + x^2 + 1` is `order = 5, taps = [2, 0]`). The seed supplies
/// `a[0..order]`, MSB of `seed` first, and output starts with `a[0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfsrSpec {
    pub order: u32,
    pub taps: Vec<u32>,
    pub seed: u32,
}

impl LfsrSpec {
    /// x^5 + x^2 + 1, all-ones seed.
    pub fn pn31() -> Self {
        LfsrSpec {
            order: 5,
            taps: vec![2, 0],
            seed: 0b11111,
        }
    }

    /// x^6 + x^5 + 1, all-ones seed.
    pub fn pn63() -> Self {
        LfsrSpec {
            order: 6,
            taps: vec![5, 0],
            seed: 0b111111,
        }
    }

    pub fn period(&self) -> usize {
        (1usize << self.order) - 1
    }
}

pub fn lfsr_run(spec: &LfsrSpec, n: usize) -> Result<Vec<u8>> {
    let order = spec.order as usize;
    if order == 0 || order > 31 {
        return Err(Error::invalid(format!("unsupported LFSR order {order}")));
    }
    let mask = (1u32 << order) - 1;
    if spec.seed & mask == 0 {
        return Err(Error::invalid("LFSR seed must be nonzero"));
    }
    if let Some(t) = spec.taps.iter().find(|&&t| t as usize >= order) {
        return Err(Error::invalid(format!("tap {t} out of range for order {order}")));
    }
    let mut a: Vec<u8> = (0..order)
        .map(|i| ((spec.seed >> (order - 1 - i)) & 1) as u8)
        .collect();
    while a.len() < n + order {
        let k = a.len() - order;
        let next = spec.taps.iter().fold(0u8, |acc, &t| acc ^ a[k + t as usize]);
        a.push(next);
    }
    a.truncate(n);
    Ok(a)
}

/// Builds a word from one full PN period followed by a single `0` pad bit.
fn padded_word(spec: &LfsrSpec) -> Vec<u8> {
    let mut b = lfsr_run(spec, spec.period()).expect("built-in LFSR specs are valid");
    b.push(0);
    bits::pack(&b).to_vec()
}

/// The 4-byte frame preamble: PN31 plus one pad bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreambleWord(pub [u8; 4]);

impl PreambleWord {
    pub fn as_u32(&self) -> u32 {
        u32::from_be_bytes(self.0)
    }

    pub fn bits(&self) -> Vec<u8> {
        bits::unpack(&self.0)
    }
}

/// The 8-byte additive scrambling word: PN63 plus one pad bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScramblerWord(pub [u8; 8]);

impl ScramblerWord {
    pub fn as_u64(&self) -> u64 {
        u64::from_be_bytes(self.0)
    }

    pub fn bits(&self) -> Vec<u8> {
        bits::unpack(&self.0)
    }
}

static PREAMBLE: LazyLock<PreambleWord> = LazyLock::new(|| {
    let v = padded_word(&LfsrSpec::pn31());
    PreambleWord(v.try_into().unwrap())
});

static SCRAMBLER: LazyLock<ScramblerWord> = LazyLock::new(|| {
    let v = padded_word(&LfsrSpec::pn63());
    ScramblerWord(v.try_into().unwrap())
});

/// The frozen preamble (`f8 dd 42 58`).
pub fn preamble() -> PreambleWord {
    *PREAMBLE
}

/// The frozen scrambling word (`fd 59 bb 49 c5 e5 18 40`).
pub fn scrambler() -> ScramblerWord {
    *SCRAMBLER
}

/// `out[i] = data[i] ^ word[(start_offset + i) % 8]`.
pub fn scramble(data: &[u8], word: &ScramblerWord, start_offset: usize) -> Vec<u8> {
    data.iter()
        .enumerate()
        .map(|(i, &d)| d ^ word.0[(start_offset + i) % 8])
        .collect()
}

pub fn scramble_in_place(data: &mut [u8], word: &ScramblerWord, start_offset: usize) {
    for (i, d) in data.iter_mut().enumerate() {
        *d ^= word.0[(start_offset + i) % 8];
    }
}

/// Highest number of agreeing bits between the preamble and any 32-bit
/// window of the endlessly repeated scrambling word (64 cyclic offsets).
pub fn preamble_scrambler_crosscorr() -> u32 {
    crosscorr(&preamble(), &scrambler())
}

pub fn crosscorr(pre: &PreambleWord, word: &ScramblerWord) -> u32 {
    let w = word.as_u64();
    let p = pre.as_u32();
    (0..64)
        .map(|off| {
            let window = (w.rotate_left(off) >> 32) as u32;
            32 - (window ^ p).count_ones()
        })
        .max()
        .unwrap()
}

/// Longest run of identical bits in a bit-per-byte sequence.
pub fn longest_run(bits: &[u8]) -> usize {
    let mut best = 0;
    let mut cur = 0;
    let mut last = None;
    for &b in bits {
        if Some(b) == last {
            cur += 1;
        } else {
            cur = 1;
            last = Some(b);
        }
        best = best.max(cur);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn period_of(bits: &[u8]) -> usize {
        (1..bits.len())
            .find(|&p| (0..bits.len() - p).all(|i| bits[i] == bits[i + p]))
            .unwrap_or(bits.len())
    }

    #[test]
    fn periods_are_maximal() {
        let s31 = lfsr_run(&LfsrSpec::pn31(), 200).unwrap();
        let s63 = lfsr_run(&LfsrSpec::pn63(), 400).unwrap();
        assert_eq!(period_of(&s31), 31);
        assert_eq!(period_of(&s63), 63);
    }

    #[test]
    fn pn31_repeats_and_is_balanced() {
        let s = lfsr_run(&LfsrSpec::pn31(), 62).unwrap();
        assert_eq!(s[..31], s[31..]);
        assert_eq!(s[..31].iter().filter(|&&b| b == 1).count(), 16);
        let s63 = lfsr_run(&LfsrSpec::pn63(), 63).unwrap();
        assert_eq!(s63.iter().filter(|&&b| b == 1).count(), 32);
    }

    #[test]
    fn run_edge_cases() {
        assert!(lfsr_run(&LfsrSpec::pn31(), 0).unwrap().is_empty());
        let bad = LfsrSpec {
            seed: 0,
            ..LfsrSpec::pn31()
        };
        assert!(matches!(lfsr_run(&bad, 5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn frozen_words() {
        assert_eq!(preamble().0, [0xf8, 0xdd, 0x42, 0x58]);
        assert_eq!(scrambler().0, [0xfd, 0x59, 0xbb, 0x49, 0xc5, 0xe5, 0x18, 0x40]);
        // pad bit is the last bit
        assert_eq!(preamble().0[3] & 1, 0);
        assert_eq!(scrambler().0[7] & 1, 0);
    }

    #[test]
    fn words_contain_one_full_period() {
        let pre = preamble().bits();
        assert_eq!(pre[..31], lfsr_run(&LfsrSpec::pn31(), 31).unwrap()[..]);
        let scr = scrambler().bits();
        assert_eq!(scr[..63], lfsr_run(&LfsrSpec::pn63(), 63).unwrap()[..]);
    }

    #[test]
    fn scramble_involution_and_identity_on_zeros() {
        let w = scrambler();
        let d: Vec<u8> = (0..100u8).collect();
        assert_eq!(scramble(&scramble(&d, &w, 3), &w, 3), d);
        assert_eq!(scramble(&[0u8; 8], &w, 0), w.0.to_vec());
    }

    #[test]
    fn block_of_256_bytes_uses_word_32_times() {
        let w = scrambler();
        let out = scramble(&[0u8; 256], &w, 0);
        assert_eq!(256 % 8, 0);
        for chunk in out.chunks(8) {
            assert_eq!(chunk, w.0);
        }
        assert_eq!(out.chunks(8).count(), 32);
    }

    #[test]
    fn crosscorr_by_bit_scan() {
        // independent route: explicit bit vectors instead of rotations
        let pre = preamble().bits();
        let scr = scrambler().bits();
        let rep: Vec<u8> = scr.iter().chain(&scr).copied().collect();
        let brute = (0..64)
            .map(|o| (0..32).filter(|&i| rep[o + i] == pre[i]).count() as u32)
            .max()
            .unwrap();
        assert_eq!(preamble_scrambler_crosscorr(), brute);
        assert_eq!(brute, 23);
        assert!(brute < crate::sync::DEFAULT_THRESHOLD);
    }

    #[test]
    fn complement_has_zero_matches() {
        let p = preamble();
        let comp = !p.as_u32();
        assert_eq!(32 - (comp ^ p.as_u32()).count_ones(), 0);
    }

    #[test]
    fn scrambled_zero_block_has_bounded_runs() {
        let w = scrambler();
        let out = bits::unpack(&scramble(&[0u8; 256], &w, 0));
        assert!(longest_run(&out) <= longest_run(&w.bits()) + 1);
    }
}
