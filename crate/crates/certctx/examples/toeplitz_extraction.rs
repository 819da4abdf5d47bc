//! The Toeplitz extractor in the small, where every bit can be watched:
//! the matrix, the sizing rule, linearity, and the monobit check.
//!
//! An m×n Toeplitz matrix is described by n+m−1 seed bits, one per
//! antidiagonal; hashing is matrix–vector multiplication over GF(2). The
//! leftover-hash sizing rule m = ⌊h_min − 2·log₂(1/δ_ext)⌋ converts a
//! certified min-entropy budget into an output length.
//!
//! Run with: cargo run --example toeplitz_extraction

use certctx::extractor::{
    extract, extract_naive, monobit_z, output_length, read_seed, write_seed, BitString,
    ToeplitzSeed,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn random_bits<R: Rng>(len: usize, rng: &mut R) -> BitString {
    let mut s = BitString::with_capacity(len);
    for _ in 0..len {
        s.push(rng.gen_bool(0.5));
    }
    s
}

fn main() -> certctx::Result<()> {
    // ------------------------------------------------------------------
    // A 3×5 matrix, written out. Entry (i,j) is seed bit i−j+n−1.
    // ------------------------------------------------------------------
    let seed = ToeplitzSeed::new(BitString::from_01("1010110")?);
    let input = BitString::from_01("11010")?;
    println!("seed 1010110 → 3×5 Toeplitz matrix:");
    for i in 0..3 {
        print!("  [");
        for j in 0..5 {
            print!(" {}", seed.entry(i, j, 5) as u8);
        }
        println!(" ]");
    }
    let out = extract(&input, &seed, 3)?;
    println!("input  {input}");
    println!("output {out}   (naive path agrees: {})", extract_naive(&input, &seed, 3)? == out);

    // ------------------------------------------------------------------
    // Sizing: the security penalty is 2·log₂(1/δ_ext) bits off the top.
    // ------------------------------------------------------------------
    println!("\noutput_length(h_min, δ_ext):");
    for (h, d) in [(7.21e6, 1e-10), (1000.0, 1e-10), (100.0, 0.25), (10.0, 1e-10)] {
        println!("  h_min = {h:>9}, δ_ext = {d:<6} →  m = {}", output_length(h, d)?);
    }

    // ------------------------------------------------------------------
    // Linearity over GF(2): hash(a⊕b) = hash(a)⊕hash(b) for a fixed seed.
    // ------------------------------------------------------------------
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let (n, m) = (64, 16);
    let big_seed = ToeplitzSeed::new(random_bits(n + m - 1, &mut rng));
    let a = random_bits(n, &mut rng);
    let b = random_bits(n, &mut rng);
    let lhs = extract(&a.xor(&b)?, &big_seed, m)?;
    let rhs = extract(&a, &big_seed, m)?.xor(&extract(&b, &big_seed, m)?)?;
    println!("\nhash(a⊕b) = {lhs}");
    println!("hash(a)⊕hash(b) = {rhs}   equal: {}", lhs == rhs);

    // ------------------------------------------------------------------
    // A grossly biased source hashes down to balanced output.
    // ------------------------------------------------------------------
    let mut biased = BitString::with_capacity(4096);
    for _ in 0..4096 {
        biased.push(rng.gen_bool(0.8));
    }
    let m_out = 256;
    let hash_seed = ToeplitzSeed::new(random_bits(biased.len() + m_out - 1, &mut rng));
    let hashed = extract(&biased, &hash_seed, m_out)?;
    println!(
        "\nmonobit z-scores: biased input {:+.1}, hashed output {:+.2}",
        monobit_z(&biased)?,
        monobit_z(&hashed)?
    );

    // ------------------------------------------------------------------
    // Seeds travel in files with an explicit bit-length header; the
    // extractor never invents one silently.
    // ------------------------------------------------------------------
    let dir = tempfile::tempdir().map_err(certctx::Error::Io)?;
    let path = dir.path().join("toeplitz.seed");
    write_seed(&path, &big_seed)?;
    let loaded = read_seed(&path)?;
    println!(
        "\nseed file: {} bytes for {} bits; round-trips identically: {}",
        std::fs::metadata(&path).map(|md| md.len()).unwrap_or(0),
        big_seed.len(),
        loaded == big_seed
    );
    Ok(())
}
