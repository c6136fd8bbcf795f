//! Kernels for `Z/2^N` working in native machine words.
//!
//! Reduction mod `2^W` followed by reduction mod `2^N` (for `N ≤ W`) is a ring
//! homomorphism, so all arithmetic can wrap in the smallest word that holds
//! `N` bits and be masked once at the end. Narrow words let the compiler pack
//! more lanes per vector instruction.

use super::{MatrixMod, RingSpec};

pub(crate) trait Word: Copy + Default + Eq {
    fn from_u64(x: u64) -> Self;
    fn to_u64(self) -> u64;
    fn wmul(self, o: Self) -> Self;
    fn wadd(self, o: Self) -> Self;
    fn wsub(self, o: Self) -> Self;
    fn is_odd(self) -> bool;
}

macro_rules! word {
    ($t:ty) => {
        impl Word for $t {
            #[inline(always)]
            fn from_u64(x: u64) -> Self {
                x as $t
            }
            #[inline(always)]
            fn to_u64(self) -> u64 {
                self as u64
            }
            #[inline(always)]
            fn wmul(self, o: Self) -> Self {
                self.wrapping_mul(o)
            }
            #[inline(always)]
            fn wadd(self, o: Self) -> Self {
                self.wrapping_add(o)
            }
            #[inline(always)]
            fn wsub(self, o: Self) -> Self {
                self.wrapping_sub(o)
            }
            #[inline(always)]
            fn is_odd(self) -> bool {
                self & 1 == 1
            }
        }
    };
}

word!(u16);
word!(u32);
word!(u64);

/// Inverse of an odd word by Newton iteration.
fn inverse<W: Word>(x: W) -> W {
    let two = W::from_u64(2);
    let mut y = x;
    for _ in 0..6 {
        y = y.wmul(two.wsub(x.wmul(y)));
    }
    y
}

fn matmul_words<W: Word>(a: &[u64], b: &[u64], n: usize, k: usize, m: usize, mask: u64) -> Vec<u64> {
    let a: Vec<W> = a.iter().map(|&x| W::from_u64(x)).collect();
    let b: Vec<W> = b.iter().map(|&x| W::from_u64(x)).collect();
    let mut out = vec![W::default(); n * m];
    for i in 0..n {
        let acc = &mut out[i * m..(i + 1) * m];
        for l in 0..k {
            let x = a[i * k + l];
            if x == W::default() {
                continue;
            }
            for (c, &y) in acc.iter_mut().zip(&b[l * m..(l + 1) * m]) {
                *c = c.wadd(x.wmul(y));
            }
        }
    }
    out.into_iter().map(|x| x.to_u64() & mask).collect()
}

/// Product of row-major residue arrays over `Z/2^N`.
pub(crate) fn matmul(ring: RingSpec, a: &[u64], b: &[u64], n: usize, k: usize, m: usize) -> Vec<u64> {
    let mask = ring.modulus() - 1;
    match ring.precision {
        0..=16 => matmul_words::<u16>(a, b, n, k, m, mask),
        17..=32 => matmul_words::<u32>(a, b, n, k, m, mask),
        _ => matmul_words::<u64>(a, b, n, k, m, mask),
    }
}

/// What is left after pivoting on every unit that can be found.
pub(crate) struct Residual {
    /// Number of unit pivots removed.
    pub units: usize,
    /// The remaining rows restricted to the columns without a unit pivot,
    /// followed by the trailing columns.
    pub matrix: MatrixMod,
    /// Number of leading columns of `matrix` that come from the pivot block.
    pub pivot_cols: usize,
}

fn strip_units_words<W: Word>(m: &MatrixMod, pcols: usize) -> Residual {
    let ring = m.ring();
    let (rows, width) = (m.rows(), m.cols());
    let mut a: Vec<W> = m.entries().iter().map(|&x| W::from_u64(x)).collect();
    let mut top = 0;
    let mut deferred: Vec<usize> = Vec::new();
    for c in 0..pcols {
        let Some(r) = (top..rows).find(|&r| a[r * width + c].is_odd()) else {
            deferred.push(c);
            continue;
        };
        if r != top {
            let (head, tail) = a.split_at_mut(r * width);
            head[top * width..(top + 1) * width].swap_with_slice(&mut tail[..width]);
        }
        let inv = inverse(a[top * width + c]);
        // Earlier pivot columns are already zero in every remaining row.
        let lo = deferred.first().map_or(c, |&d| d.min(c));
        let (head, tail) = a.split_at_mut((top + 1) * width);
        let pivot = &head[top * width + lo..];
        for row in tail.chunks_exact_mut(width) {
            let x = row[c];
            if x != W::default() {
                let f = x.wmul(inv);
                for (d, &s) in row[lo..].iter_mut().zip(pivot) {
                    *d = d.wsub(f.wmul(s));
                }
            }
        }
        top += 1;
    }
    let mask = ring.modulus() - 1;
    let keep: Vec<usize> = deferred.iter().copied().chain(pcols..width).collect();
    let mut entries = Vec::with_capacity((rows - top) * keep.len());
    for r in top..rows {
        entries.extend(keep.iter().map(|&c| a[r * width + c].to_u64() & mask));
    }
    Residual {
        units: top,
        matrix: MatrixMod::from_residues(ring, rows - top, keep.len(), entries),
        pivot_cols: deferred.len(),
    }
}

/// Pivots on units in the first `pcols` columns of `m` over `Z/2^N`, dropping
/// each pivot row and column. The cokernel of the pivot block, and the image
/// of the trailing columns in it, are unchanged.
pub(crate) fn strip_units(m: &MatrixMod, pcols: usize) -> Residual {
    match m.ring().precision {
        0..=16 => strip_units_words::<u16>(m, pcols),
        17..=32 => strip_units_words::<u32>(m, pcols),
        _ => strip_units_words::<u64>(m, pcols),
    }
}
