//! Coranks over `F_p` of two random matrices and of their product.
//!
//! Coranks depend only on entries modulo `p`, so at `p = 2` entries are drawn
//! directly as packed parity bits with the exact odd-residue mass of the
//! distribution.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{alpha_of, stream_rng, Alpha, EntryDistribution, EntrySampler, SamplerError};
use crate::linalg::{dot, rank_mod_p, BitMatrix, MatrixMod, RingSpec};

/// `(corank M_1, corank M_2, corank M_1 M_2)` over `F_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CorankSample {
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

#[derive(Clone, Debug)]
enum Mode {
    /// Parity bits set with probability `threshold / 2^64`; `None` means 1/2.
    Bits(Option<u64>),
    Generic(EntrySampler),
}

#[derive(Clone, Debug)]
pub struct CorankSampler {
    pub p: u64,
    pub n: usize,
    mode: Mode,
}

/// 64 independent bits, each set with probability `threshold / 2^64`.
///
/// Each lane compares a uniform binary fraction with the threshold one bit at
/// a time from the top and stops as soon as the lane is decided.
fn biased_word(rng: &mut ChaCha8Rng, threshold: u64) -> u64 {
    let mut result = 0u64;
    let mut open = !0u64;
    for bit in (0..64).rev() {
        let r = rng.next_u64();
        if (threshold >> bit) & 1 == 1 {
            result |= open & !r;
            open &= r;
        } else {
            open &= !r;
        }
        if open == 0 {
            break;
        }
    }
    result
}

/// Coranks of `M_1`, `M_2` and `M_1 M_2` given `M_1` and the transpose of `M_2`.
///
/// With `K` a kernel basis of `M_1` and `Y` a basis of the left kernel of
/// `M_2`, `rank(M_1 M_2) = rank M_2 - dim(ker M_1 ∩ im M_2)` and
/// `ker M_1 ∩ im M_2 = {x ∈ span K : Y x = 0}`, so only the small matrix
/// `Y K` needs a third rank computation.
fn coranks_from_factors(m1: &BitMatrix, m2t: &BitMatrix) -> CorankSample {
    let k = m1.kernel_basis();
    let y = m2t.kernel_basis();
    let gram = BitMatrix::from_fn(y.len(), k.len(), |i, j| dot(&y[i], &k[j]));
    let (a, b) = (k.len() as u32, y.len() as u32);
    CorankSample {
        a,
        b,
        c: a + b - gram.rank() as u32,
    }
}

impl CorankSampler {
    pub fn new(dist: &EntryDistribution, p: u64, n: usize) -> Result<Self, SamplerError> {
        if let Alpha::Degenerate = alpha_of(dist, p)? {
            return Err(SamplerError::Degenerate {
                dist: dist.to_string(),
                p,
            });
        }
        let mode = if p == 2 {
            let odd = dist.residue_masses(2)[1].clone();
            let scaled = (odd * num_bigint::BigInt::from(1u128 << 64)).floor().to_integer();
            let threshold = scaled.to_u64().unwrap_or(u64::MAX);
            if BigInt::from(threshold) * 2 == BigInt::from(1u128 << 64) {
                Mode::Bits(None)
            } else {
                Mode::Bits(Some(threshold))
            }
        } else {
            Mode::Generic(EntrySampler::new(dist)?)
        };
        Ok(CorankSampler { p, n, mode })
    }

    fn bit_matrix(&self, rng: &mut ChaCha8Rng, threshold: Option<u64>) -> BitMatrix {
        let words = self.n.div_ceil(64) * self.n;
        let data: Vec<u64> = (0..words)
            .map(|_| match threshold {
                None => rng.next_u64(),
                Some(t) => biased_word(rng, t),
            })
            .collect();
        BitMatrix::from_words(self.n, self.n, data)
    }

    pub fn sample(&self, seed: u64, stream: u64) -> CorankSample {
        let mut rng = stream_rng(seed, stream);
        let n = self.n as u32;
        match &self.mode {
            Mode::Bits(t) => {
                // Entries are iid, so the second factor is drawn transposed.
                let m1 = self.bit_matrix(&mut rng, *t);
                let m2t = self.bit_matrix(&mut rng, *t);
                coranks_from_factors(&m1, &m2t)
            }
            Mode::Generic(s) => {
                let ring = RingSpec::new(self.p, 1).expect("prime checked by alpha_of");
                let mut draw = || {
                    let v: Vec<i64> = (0..self.n * self.n).map(|_| s.sample(&mut rng)).collect();
                    MatrixMod::from_i64(ring, self.n, self.n, &v)
                };
                let m1 = draw();
                let m2 = draw();
                let prod = m1.mul(&m2).expect("same ring and shape");
                CorankSample {
                    a: n - rank_mod_p(&m1) as u32,
                    b: n - rank_mod_p(&m2) as u32,
                    c: n - rank_mod_p(&prod) as u32,
                }
            }
        }
    }

    pub fn sample_many(&self, seed: u64, count: u64) -> Vec<CorankSample> {
        (0..count).into_par_iter().map(|s| self.sample(seed, s)).collect()
    }
}

/// One corank triple for sample `stream` of a run seeded with `seed`.
pub fn sample_corank(
    dist: &EntryDistribution,
    p: u64,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<CorankSample, SamplerError> {
    Ok(CorankSampler::new(dist, p, n)?.sample(seed, stream))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn biased_words_have_the_right_density() {
        let mut rng = stream_rng(3, 0);
        let t = (0.3f64 * 2f64.powi(64)) as u64;
        let ones: u32 = (0..4000).map(|_| biased_word(&mut rng, t).count_ones()).sum();
        let freq = ones as f64 / (4000.0 * 64.0);
        assert!((freq - 0.3).abs() < 0.005, "{freq}");
    }

    #[test]
    fn coranks_are_consistent() {
        for (d, p) in [("uniform:0..3", 2u64), ("bernoulli:0.3", 2), ("uniform:0..8", 3)] {
            let dist: EntryDistribution = d.parse().unwrap();
            let s = CorankSampler::new(&dist, p, 10).unwrap();
            for rec in s.sample_many(1, 300) {
                assert!(rec.c >= rec.a.max(rec.b) && rec.c <= rec.a + rec.b, "{rec:?}");
            }
            assert_eq!(s.sample(1, 17), sample_corank(&dist, p, 10, 1, 17).unwrap());
        }
    }

    #[test]
    fn bit_path_matches_residue_matrices() {
        // At density 1/2 the packed path draws raw words, so the same bits
        // can be rebuilt as matrices over Z/2 and ranked independently.
        let dist: EntryDistribution = "uniform:0..3".parse().unwrap();
        for n in [5usize, 70] {
            let s = CorankSampler::new(&dist, 2, n).unwrap();
            let ring = RingSpec::new(2, 1).unwrap();
            for stream in 0..40 {
                let mut rng = stream_rng(8, stream);
                let m1 = s.bit_matrix(&mut rng, None);
                let m2t = s.bit_matrix(&mut rng, None);
                let to_mod = |m: &BitMatrix, transpose: bool| {
                    let v: Vec<i64> = (0..n * n)
                        .map(|i| {
                            let (r, c) = if transpose { (i % n, i / n) } else { (i / n, i % n) };
                            i64::from(m.get(r, c))
                        })
                        .collect();
                    MatrixMod::from_i64(ring, n, n, &v)
                };
                let (a1, a2) = (to_mod(&m1, false), to_mod(&m2t, true));
                let prod = a1.mul(&a2).unwrap();
                let rec = s.sample(8, stream);
                let n32 = n as u32;
                assert_eq!(rec.a, n32 - rank_mod_p(&a1) as u32);
                assert_eq!(rec.b, n32 - rank_mod_p(&a2) as u32);
                assert_eq!(rec.c, n32 - rank_mod_p(&prod) as u32);
            }
        }
    }
}
