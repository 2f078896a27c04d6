//! Seeded generators for reproducible test matrices.
//!
//! Every scenario draws from named streams derived from a single 64-bit seed,
//! so adding a new consumer never shifts the draws of an existing one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use num_complex::Complex64;

use super::dense::{hermitian_part, CMat, CVec};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream keyed by `(seed, name)`.
pub fn named_stream(seed: u64, name: &str) -> SeededRng {
    // FNV-1a keeps the stream id stable across platforms and releases.
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(hash);
    rng
}

/// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let mut m = CMat::zeros(rows, cols);
    // Row-major fill so draws do not depend on storage order.
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

pub fn complex_gaussian_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    CVec::from_iterator(n, (0..n).map(|_| complex_normal(rng)))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    hermitian_part(&complex_gaussian(n, n, rng)).expect("square")
}

/// `A = iH₀ − GG*` with `H₀` Hermitian and `G` of the given rank.
pub fn random_dissipative_with_rank<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> CMat {
    let h0 = random_hermitian(n, rng);
    let g = complex_gaussian(n, rank, rng);
    h0 * Complex64::new(0.0, 1.0) - &g * g.adjoint()
}

/// `A = iH₀ − GG*` with square `G`.
pub fn random_dissipative<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    random_dissipative_with_rank(n, n, rng)
}

/// Uniformly distributed unitary (QR of a complex Gaussian with phase fix).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = complex_gaussian(n, n, rng);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}
