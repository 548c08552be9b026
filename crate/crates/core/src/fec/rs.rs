//! Systematic RS(255,239) over GF(2^8).
//!
//! Byte `i` of a codeword is the coefficient of `x^(254 - i)`, so the
//! message occupies the high-order coefficients and the 16 parity bytes
//! the low-order ones. The generator has roots alpha^0 ..= alpha^15.
//! Decoding runs syndromes, Berlekamp-Massey, Chien search and Forney.

use thiserror::Error;

use super::gf::Gf256;

pub const N: usize = 255;
pub const MESSAGE_LEN: usize = 239;
pub const PARITY_LEN: usize = N - MESSAGE_LEN;
/// Correctable byte errors per codeword.
pub const T: usize = PARITY_LEN / 2;

/// Generator polynomial, highest degree first (monic).
pub const GENERATOR: [u8; PARITY_LEN + 1] = [
    0x01, 0x3b, 0x0d, 0x68, 0xbd, 0x44, 0xd1, 0x1e, 0x08, 0xa3, 0x41, 0x29, 0xe5, 0x62, 0x32,
    0x24, 0x3b,
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RsError {
    #[error("expected {expected} bytes, got {got}")]
    Length { expected: usize, got: usize },
    /// No codeword within distance 8 was found.
    #[error("uncorrectable codeword ({nonzero_syndromes} nonzero syndromes)")]
    Uncorrectable { nonzero_syndromes: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub message: Vec<u8>,
    /// Number of byte positions that were changed.
    pub corrected: usize,
}

/// Computes the 16 parity bytes for a 239-byte message.
pub fn rs_encode(message: &[u8]) -> Result<[u8; PARITY_LEN], RsError> {
    if message.len() != MESSAGE_LEN {
        return Err(RsError::Length {
            expected: MESSAGE_LEN,
            got: message.len(),
        });
    }
    // LFSR division by the generator: the register holds the running remainder.
    let mut reg = [0u8; PARITY_LEN];
    for &m in message {
        let feedback = Gf256(m ^ reg[0]);
        reg.copy_within(1.., 0);
        reg[PARITY_LEN - 1] = 0;
        if feedback != Gf256::ZERO {
            for (r, &g) in reg.iter_mut().zip(&GENERATOR[1..]) {
                *r ^= (feedback * Gf256(g)).0;
            }
        }
    }
    Ok(reg)
}

/// Syndromes `S_j = C(alpha^j)` for `j = 0..16`.
pub fn syndromes(codeword: &[u8]) -> [Gf256; PARITY_LEN] {
    let mut s = [Gf256::ZERO; PARITY_LEN];
    for (j, sj) in s.iter_mut().enumerate() {
        let root = Gf256::alpha_pow(j as i64);
        *sj = codeword
            .iter()
            .fold(Gf256::ZERO, |acc, &c| acc * root + Gf256(c));
    }
    s
}

/// Decodes a 255-byte received word, returning the message and the number
/// of corrected bytes. A word farther than 8 from every codeword yields
/// [`RsError::Uncorrectable`]; it may instead land on a different codeword,
/// which callers detect by comparing against what was sent.
pub fn rs_decode(received: &[u8]) -> Result<Decoded, RsError> {
    let mut word = received.to_vec();
    let corrected = rs_correct_in_place(&mut word)?;
    word.truncate(MESSAGE_LEN);
    Ok(Decoded {
        message: word,
        corrected,
    })
}

/// Corrects `codeword` in place. Returns the number of corrected bytes.
pub fn rs_correct_in_place(codeword: &mut [u8]) -> Result<usize, RsError> {
    if codeword.len() != N {
        return Err(RsError::Length {
            expected: N,
            got: codeword.len(),
        });
    }
    let synd = syndromes(codeword);
    let nonzero = synd.iter().filter(|s| **s != Gf256::ZERO).count();
    if nonzero == 0 {
        return Ok(0);
    }
    let fail = RsError::Uncorrectable {
        nonzero_syndromes: nonzero,
    };

    let locator = berlekamp_massey(&synd);
    let degree = locator.len() - 1;
    if degree > T {
        return Err(fail);
    }

    let positions = chien_search(&locator);
    if positions.len() != degree {
        return Err(fail);
    }

    // Error evaluator: S(x) * Lambda(x) mod x^16.
    let mut omega = [Gf256::ZERO; PARITY_LEN];
    for (i, &l) in locator.iter().enumerate() {
        for (j, &s) in synd.iter().enumerate() {
            if i + j < PARITY_LEN {
                omega[i + j] += l * s;
            }
        }
    }

    for &pos in &positions {
        let x = Gf256::alpha_pow((N - 1 - pos) as i64);
        let x_inv = x.inv().expect("location numbers are nonzero");
        let num = eval(&omega, x_inv);
        let den = eval_formal_derivative(&locator, x_inv);
        if den == Gf256::ZERO {
            return Err(fail);
        }
        // Forney with first consecutive root alpha^0: e = X * Omega(X^-1) / Lambda'(X^-1)
        let magnitude = x * num / den;
        codeword[pos] ^= magnitude.0;
    }

    if syndromes(codeword).iter().any(|s| *s != Gf256::ZERO) {
        return Err(fail);
    }
    Ok(positions.len())
}

/// Returns the error-locator polynomial, lowest degree first, trimmed so its
/// length is (degree + 1).
fn berlekamp_massey(synd: &[Gf256; PARITY_LEN]) -> Vec<Gf256> {
    let mut lambda = vec![Gf256::ZERO; PARITY_LEN + 1];
    let mut prev = vec![Gf256::ZERO; PARITY_LEN + 1];
    lambda[0] = Gf256::ONE;
    prev[0] = Gf256::ONE;
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut prev_disc = Gf256::ONE;

    for n in 0..PARITY_LEN {
        let mut disc = synd[n];
        for i in 1..=l {
            disc += lambda[i] * synd[n - i];
        }
        if disc == Gf256::ZERO {
            shift += 1;
            continue;
        }
        let scale = disc / prev_disc;
        let snapshot = lambda.clone();
        for i in 0..=PARITY_LEN - shift {
            lambda[i + shift] += scale * prev[i];
        }
        if 2 * l <= n {
            l = n + 1 - l;
            prev = snapshot;
            prev_disc = disc;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    let mut deg = PARITY_LEN;
    while deg > 0 && lambda[deg] == Gf256::ZERO {
        deg -= 1;
    }
    // A locator whose BM length disagrees with its degree cannot describe
    // a valid error pattern; padding to `l` makes the root count check fail.
    lambda.truncate(deg.max(l) + 1);
    lambda
}

/// Byte indices whose location numbers are roots of `Lambda(X^-1)`.
fn chien_search(locator: &[Gf256]) -> Vec<usize> {
    (0..N)
        .filter(|&pos| {
            let x_inv = Gf256::alpha_pow(-((N - 1 - pos) as i64));
            eval(locator, x_inv) == Gf256::ZERO
        })
        .collect()
}

fn eval(poly: &[Gf256], x: Gf256) -> Gf256 {
    poly.iter().rev().fold(Gf256::ZERO, |acc, &c| acc * x + c)
}

// In characteristic 2 only odd-degree terms survive differentiation.
fn eval_formal_derivative(poly: &[Gf256], x: Gf256) -> Gf256 {
    let x2 = x * x;
    let mut acc = Gf256::ZERO;
    let mut xp = Gf256::ONE;
    for c in poly.iter().skip(1).step_by(2) {
        acc += *c * xp;
        xp *= x2;
    }
    acc
}
