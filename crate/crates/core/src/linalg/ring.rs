use serde::{Deserialize, Serialize};

use super::LinalgError;
use crate::partition::is_prime;

/// The residue ring `Z/p^N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RingSpec {
    pub p: u64,
    #[serde(rename = "N")]
    pub precision: u32,
}

/// Largest modulus accepted: residues are stored in 64-bit words and products
/// are formed in 128 bits, so `p^N` must stay below `2^63`.
pub const MODULUS_LIMIT: u64 = 1 << 63;

impl RingSpec {
    pub fn new(p: u64, precision: u32) -> Result<Self, LinalgError> {
        if !is_prime(p) {
            return Err(LinalgError::NotPrime(p));
        }
        if precision == 0 {
            return Err(LinalgError::ZeroPrecision);
        }
        match p.checked_pow(precision) {
            Some(m) if m < MODULUS_LIMIT => Ok(RingSpec { p, precision }),
            _ => Err(LinalgError::ModulusOverflow { p, precision }),
        }
    }

    /// Largest `N` with `p^N < 2^63`.
    pub fn max_precision(p: u64) -> u32 {
        let mut n = 0;
        let mut m: u64 = 1;
        while let Some(next) = m.checked_mul(p) {
            if next >= MODULUS_LIMIT {
                break;
            }
            m = next;
            n += 1;
        }
        n
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.precision)
    }

    pub fn arith(&self) -> Zmod {
        Zmod::new(self.p, self.precision)
    }
}

/// Arithmetic in `Z/p^N` on canonical residues `[0, p^N)`.
///
/// When `p = 2` every operation is a wrapping word operation followed by a
/// mask, which keeps the elimination loops branch-free.
#[derive(Clone, Copy, Debug)]
pub struct Zmod {
    pub p: u64,
    pub precision: u32,
    pub modulus: u64,
    mask: Option<u64>,
}

impl Zmod {
    pub fn new(p: u64, precision: u32) -> Self {
        let modulus = p.pow(precision);
        let mask = (p == 2).then(|| modulus - 1);
        Zmod {
            p,
            precision,
            modulus,
            mask,
        }
    }

    #[inline]
    pub fn reduce_i64(&self, x: i64) -> u64 {
        match self.mask {
            // Two's complement wraps modulo 2^64, a multiple of the modulus.
            Some(m) => x as u64 & m,
            None => x.rem_euclid(self.modulus as i64) as u64,
        }
    }

    #[inline]
    pub fn reduce_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.modulus as i128) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        match self.mask {
            Some(m) => a.wrapping_add(b) & m,
            None => ((a as u128 + b as u128) % self.modulus as u128) as u64,
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        match self.mask {
            Some(m) => a.wrapping_sub(b) & m,
            None => {
                if a >= b {
                    a - b
                } else {
                    a + (self.modulus - b)
                }
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        self.sub(0, a)
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        match self.mask {
            Some(m) => a.wrapping_mul(b) & m,
            None => ((a as u128 * b as u128) % self.modulus as u128) as u64,
        }
    }

    /// p-adic valuation of a residue; zero has valuation `N`.
    #[inline]
    pub fn valuation(&self, x: u64) -> u32 {
        if x == 0 {
            return self.precision;
        }
        if self.mask.is_some() {
            return x.trailing_zeros();
        }
        let mut v = 0;
        let mut y = x;
        while y.is_multiple_of(self.p) {
            y /= self.p;
            v += 1;
        }
        v
    }

    /// `x / p^v` as an integer; callers guarantee `v ≤ valuation(x)`.
    #[inline]
    pub fn shift_down(&self, x: u64, v: u32) -> u64 {
        if self.mask.is_some() {
            x >> v
        } else {
            x / self.p.pow(v)
        }
    }

    pub fn pow_p(&self, v: u32) -> u64 {
        if v >= self.precision {
            0
        } else {
            self.p.pow(v)
        }
    }

    /// Inverse of a unit. Panics on non-units.
    pub fn inv(&self, x: u64) -> u64 {
        assert!(!x.is_multiple_of(self.p), "{x} is not a unit mod {}", self.modulus);
        if let Some(m) = self.mask {
            // Newton iteration doubles the number of correct low bits.
            let mut y = x;
            for _ in 0..6 {
                y = y.wrapping_mul(2u64.wrapping_sub(x.wrapping_mul(y)));
            }
            return y & m;
        }
        let (mut r0, mut r1) = (self.modulus as i128, x as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        self.reduce_i128(s0)
    }

    /// `dst -= f * src`, elementwise.
    #[inline]
    pub fn axpy_neg(&self, dst: &mut [u64], src: &[u64], f: u64) {
        debug_assert_eq!(dst.len(), src.len());
        match self.mask {
            Some(m) => {
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = d.wrapping_sub(f.wrapping_mul(s)) & m;
                }
            }
            None => {
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = self.sub(*d, self.mul(f, s));
                }
            }
        }
    }

    /// `dst *= f`, elementwise.
    #[inline]
    pub fn scale(&self, dst: &mut [u64], f: u64) {
        for d in dst.iter_mut() {
            *d = self.mul(*d, f);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_validation() {
        assert!(RingSpec::new(4, 3).is_err());
        assert!(RingSpec::new(2, 0).is_err());
        assert!(RingSpec::new(2, 63).is_err());
        assert!(RingSpec::new(2, 62).is_ok());
        assert_eq!(RingSpec::max_precision(2), 62);
        assert_eq!(RingSpec::max_precision(3), 39);
        assert!(RingSpec::new(3, RingSpec::max_precision(3)).is_ok());
        assert!(RingSpec::new(3, RingSpec::max_precision(3) + 1).is_err());
    }

    #[test]
    fn inverses() {
        for (p, n) in [(2u64, 1u32), (2, 5), (2, 62), (3, 4), (5, 3), (3, 39)] {
            let z = Zmod::new(p, n);
            for x in [1u64, 3, 7, 11, 13, z.modulus - 1] {
                if x % p == 0 {
                    continue;
                }
                let x = x % z.modulus;
                assert_eq!(z.mul(x, z.inv(x)), 1 % z.modulus, "p={p} n={n} x={x}");
            }
        }
    }

    #[test]
    fn valuations() {
        let z = Zmod::new(3, 4);
        assert_eq!(z.valuation(0), 4);
        assert_eq!(z.valuation(9), 2);
        assert_eq!(z.valuation(10), 0);
        let z = Zmod::new(2, 5);
        assert_eq!(z.valuation(8), 3);
        assert_eq!(z.shift_down(24, 3), 3);
    }
}
