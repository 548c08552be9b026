//! MSB-first bit packing shared by every stage.

/// Unpacks bytes into one `u8` (0 or 1) per bit, most significant bit first.
pub fn unpack(bytes: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(bytes.len() * 8);
    for &b in bytes {
        for i in (0..8).rev() {
            out.push((b >> i) & 1);
        }
    }
    out
}

/// Packs bits (any nonzero value counts as 1) into bytes, MSB first.
/// A trailing partial byte is zero-padded on the right.
pub fn pack(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (((b != 0) as u8) << (7 - i)))
        })
        .collect()
}

/// Reads `len` bits (at most 64) starting at absolute bit `start` of a
/// bit-per-byte slice, returning them right-aligned in a `u64`.
pub fn window(bits: &[u8], start: usize, len: usize) -> u64 {
    debug_assert!(len <= 64);
    bits[start..start + len]
        .iter()
        .fold(0u64, |acc, &b| (acc << 1) | (b & 1) as u64)
}

pub fn hamming(a: &[u8], b: &[u8]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as u64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first() {
        assert_eq!(unpack(&[0x80, 0x01]), vec![1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(pack(&[1, 0, 1]), vec![0xA0]);
        assert_eq!(pack(&unpack(&[0xDE, 0xAD])), vec![0xDE, 0xAD]);
    }

    #[test]
    fn window_reads_right_aligned() {
        let bits = unpack(&[0b1011_0000]);
        assert_eq!(window(&bits, 0, 4), 0b1011);
        assert_eq!(window(&bits, 2, 3), 0b110);
    }
}
