//! Toeplitz-hashing randomness extraction over GF(2).
//!
//! The generation-round output string is compressed to nearly uniform bits
//! by multiplying it with a random m×n Toeplitz matrix. The matrix is
//! described by a seed of n+m−1 bits (first column read upward followed by
//! the rest of the first row): entry (i,j) is seed bit i−j+n−1. The seed
//! must be supplied by the caller — from a seed file or an explicit OS
//! entropy request — so that what was hashed with what stays auditable;
//! nothing in this module self-seeds.
//!
//! [`extract`] applies the matrix with word-wide AND/popcount over a
//! reversed copy of the seed (row i of the matrix is an n-bit window of the
//! reversed seed starting at offset m−1−i), and [`extract_naive`] is the
//! definition-level double loop it is verified against. [`output_length`]
//! sizes the output from a certified min-entropy value with a leftover-hash
//! penalty of 2·log₂(1/δ_ext) bits.

use crate::{Error, Result};

use std::fmt;
use std::io::{Read as _, Write as _};
use std::path::Path;

// ---------------------------------------------------------------------------
// Bit strings
// ---------------------------------------------------------------------------

/// A packed string of bits.
///
/// Bit i lives in word i/64 at position i%64, so the byte serialization is
/// LSB-first within each byte: the first bit of the string is the least
/// significant bit of the first byte. Trailing bits of the last word are
/// kept zero, making equality plain word equality.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self { len: 0, words: Vec::with_capacity(bits.div_ceil(64)) }
    }

    /// All-zero string of the given length.
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = Self::with_capacity(bits.len());
        for &b in bits {
            s.push(b);
        }
        s
    }

    /// Parse a string of `0`/`1` characters (other characters are rejected).
    pub fn from_01(text: &str) -> Result<Self> {
        let mut s = Self::with_capacity(text.len());
        for ch in text.chars() {
            match ch {
                '0' => s.push(false),
                '1' => s.push(true),
                other => {
                    return Err(Error::Schema(format!("`{other}` is not a bit character")));
                }
            }
        }
        Ok(s)
    }

    /// Reconstruct from LSB-first bytes, keeping the first `len` bits.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if len > bytes.len() * 8 {
            return Err(Error::Schema(format!(
                "{len} bits requested from {} bytes",
                bytes.len()
            )));
        }
        let mut words = vec![0u64; len.div_ceil(64)];
        for (i, &byte) in bytes.iter().enumerate() {
            if i * 8 >= len {
                break;
            }
            words[i / 8] |= (byte as u64) << (8 * (i % 8));
        }
        let mut s = Self { len, words };
        s.mask_tail();
        Ok(s)
    }

    /// LSB-first bytes; a length not divisible by 8 is zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = vec![0u8; self.len.div_ceil(8)];
        for (i, byte) in bytes.iter_mut().enumerate() {
            *byte = (self.words[i / 8] >> (8 * (i % 8))) as u8;
        }
        bytes
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / 64] |= 1u64 << (self.len % 64);
        }
        self.len += 1;
    }

    /// Number of one bits.
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Bitwise XOR of equal-length strings.
    pub fn xor(&self, other: &Self) -> Result<Self> {
        if self.len != other.len {
            return Err(Error::Domain(format!(
                "cannot XOR bit strings of lengths {} and {}",
                self.len, other.len
            )));
        }
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(Self { len: self.len, words })
    }

    fn mask_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Toeplitz seeds
// ---------------------------------------------------------------------------

/// The n+m−1 seed bits defining an m×n Toeplitz matrix: T(i,j) = bit i−j+n−1
/// (bits 0..n−1 fill the first row right-to-left, the rest run down the
/// first column).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzSeed {
    bits: BitString,
}

impl ToeplitzSeed {
    pub fn new(bits: BitString) -> Self {
        Self { bits }
    }

    /// Seed length required for an m×n matrix.
    pub fn required_len(n_in: usize, m: usize) -> usize {
        n_in + m - 1
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// The matrix entry at (row, col) for an n-column matrix.
    pub fn entry(&self, row: usize, col: usize, n_in: usize) -> bool {
        self.bits.get(row + n_in - 1 - col)
    }
}

// ---------------------------------------------------------------------------
// Output sizing
// ---------------------------------------------------------------------------

/// How many nearly uniform bits a min-entropy budget buys: the leftover
/// hash lemma permits m = h_min − 2·log₂(1/δ_ext) bits at extractor error
/// δ_ext, floored and clamped at zero.
pub fn output_length(h_min: f64, delta_ext: f64) -> Result<u64> {
    if !(h_min >= 0.0 && h_min.is_finite()) {
        return Err(Error::Domain(format!("min-entropy {h_min} must be finite and ≥ 0")));
    }
    if !(delta_ext > 0.0 && delta_ext < 1.0) {
        return Err(Error::Domain(format!(
            "extractor error δ_ext = {delta_ext} outside (0,1)"
        )));
    }
    let m = h_min - 2.0 * (1.0 / delta_ext).log2();
    Ok(if m <= 0.0 { 0 } else { m.floor() as u64 })
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

/// Fetch 64 bits of `words` starting at `bit_offset`, reading zeros past
/// the end.
fn window(words: &[u64], bit_offset: usize) -> u64 {
    let q = bit_offset / 64;
    let r = bit_offset % 64;
    let lo = words.get(q).copied().unwrap_or(0);
    if r == 0 {
        lo
    } else {
        let hi = words.get(q + 1).copied().unwrap_or(0);
        (lo >> r) | (hi << (64 - r))
    }
}

fn check_seed(input: &BitString, seed: &ToeplitzSeed, m: usize) -> Result<()> {
    let required = ToeplitzSeed::required_len(input.len(), m);
    if seed.len() != required {
        return Err(Error::Domain(format!(
            "seed has {} bits; an {m}×{} Toeplitz matrix needs {required}",
            seed.len(),
            input.len()
        )));
    }
    Ok(())
}

/// Multiply the m×n Toeplitz matrix into the input over GF(2).
///
/// Word-level path: output bit i is the parity of the AND between the input
/// and the n-bit window of the *reversed* seed starting at offset m−1−i, so
/// each row costs ⌈n/64⌉ AND+popcount steps. `m = 0` returns an empty
/// string without looking at the seed. Output rows are independent, so
/// callers may split `0..m` across threads and concatenate.
pub fn extract(input: &BitString, seed: &ToeplitzSeed, m: usize) -> Result<BitString> {
    if m == 0 {
        return Ok(BitString::new());
    }
    check_seed(input, seed, m)?;
    let n = input.len();
    let mut rev = BitString::with_capacity(seed.len());
    for i in (0..seed.len()).rev() {
        rev.push(seed.bits().get(i));
    }
    let x = input.words();
    let r = rev.words();
    let mut out = BitString::with_capacity(m);
    for i in 0..m {
        let offset = m - 1 - i;
        let mut parity = 0u32;
        for (w, &xw) in x.iter().enumerate() {
            if n <= w * 64 {
                break;
            }
            parity ^= (xw & window(r, offset + 64 * w)).count_ones();
        }
        out.push(parity & 1 == 1);
    }
    Ok(out)
}

/// The definition: out[i] = ⊕_j T(i,j)·x[j]. Quadratic; exists to pin the
/// word-level path down bit for bit.
pub fn extract_naive(input: &BitString, seed: &ToeplitzSeed, m: usize) -> Result<BitString> {
    if m == 0 {
        return Ok(BitString::new());
    }
    check_seed(input, seed, m)?;
    let n = input.len();
    let mut out = BitString::with_capacity(m);
    for i in 0..m {
        let mut bit = false;
        for j in 0..n {
            bit ^= seed.entry(i, j, n) && input.get(j);
        }
        out.push(bit);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Sanity checking
// ---------------------------------------------------------------------------

/// Monobit z-score: (2·ones − len)/√len, approximately standard normal for
/// uniform bits. |z| ≳ 3 flags gross bias; this is a sanity check, not a
/// test-suite substitute.
pub fn monobit_z(bits: &BitString) -> Result<f64> {
    if bits.is_empty() {
        return Err(Error::Domain("monobit statistic of an empty string".into()));
    }
    let n = bits.len() as f64;
    Ok((2.0 * bits.count_ones() as f64 - n) / n.sqrt())
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

/// Write raw bits (LSB-first bytes, zero-padded to a byte boundary).
pub fn write_bits(path: &Path, bits: &BitString) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bits.to_bytes())?;
    Ok(())
}

/// Read raw bits; the length is the file size in bits (always a multiple
/// of 8 — raw bit files carry no length header).
pub fn read_bits(path: &Path) -> Result<BitString> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    BitString::from_bytes(&bytes, bytes.len() * 8)
}

/// Write a seed file: 8-byte little-endian bit length, then the payload
/// bytes (LSB-first, zero-padded).
pub fn write_seed(path: &Path, seed: &ToeplitzSeed) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&(seed.len() as u64).to_le_bytes())?;
    f.write_all(&seed.bits().to_bytes())?;
    Ok(())
}

/// Read a seed file written by [`write_seed`], validating that the payload
/// matches the header's bit length.
pub fn read_seed(path: &Path) -> Result<ToeplitzSeed> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 8 {
        return Err(Error::Schema(format!(
            "seed file is {} bytes; the 8-byte length header is missing",
            bytes.len()
        )));
    }
    let len = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
    let payload = &bytes[8..];
    if payload.len() != len.div_ceil(8) {
        return Err(Error::Schema(format!(
            "seed header says {len} bits ({} bytes) but {} payload bytes follow",
            len.div_ceil(8),
            payload.len()
        )));
    }
    Ok(ToeplitzSeed::new(BitString::from_bytes(payload, len)?))
}
