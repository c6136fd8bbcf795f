use super::MatrixMod;

/// Dense matrix over `F_2` with rows packed into 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from raw row words; bits past `cols` are cleared.
    pub fn from_words(rows: usize, cols: usize, mut data: Vec<u64>) -> Self {
        let words = cols.div_ceil(64);
        assert_eq!(data.len(), rows * words, "word count");
        let tail = cols % 64;
        if tail != 0 {
            let mask = (1u64 << tail) - 1;
            for r in 0..rows {
                data[r * words + words - 1] &= mask;
            }
        }
        BitMatrix {
            rows,
            cols,
            words,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of 64-bit words per row.
    pub fn row_words(&self) -> usize {
        self.words
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        let w = &mut self.data[i * self.words + j / 64];
        if bit {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        let ow = other.words;
        for i in 0..self.rows {
            let dst = &mut out.data[i * ow..(i + 1) * ow];
            for (wi, &word) in self.row(i).iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let l = wi * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    for (d, &s) in dst.iter_mut().zip(other.row(l)) {
                        *d ^= s;
                    }
                }
            }
        }
        out
    }

    /// Rank by Gaussian elimination; the matrix is left in echelon form.
    pub fn rank_in_place(&mut self) -> usize {
        self.echelon_in_place().len()
    }

    /// Row echelon form in place. Returns the pivot column of each nonzero
    /// row, in order.
    pub fn echelon_in_place(&mut self) -> Vec<usize> {
        let (rows, cols) = (self.rows, self.cols);
        match self.words {
            0 => Vec::new(),
            1 => echelon_fixed::<1>(&mut self.data, rows, cols),
            2 => echelon_fixed::<2>(&mut self.data, rows, cols),
            3 => echelon_fixed::<3>(&mut self.data, rows, cols),
            4 => echelon_fixed::<4>(&mut self.data, rows, cols),
            w => echelon_dyn(&mut self.data, w, rows, cols),
        }
    }

    /// A basis of `{x : M x = 0}`, each vector packed like a row.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let mut e = self.clone();
        let pivots = e.echelon_in_place();
        let w = self.words;
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut x = vec![0u64; w];
                x[f / 64] |= 1 << (f % 64);
                for (i, &c) in pivots.iter().enumerate().rev() {
                    if dot(e.row(i), &x) {
                        x[c / 64] |= 1 << (c % 64);
                    }
                }
                x
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.clone().rank_in_place()
    }
}

/// Parity of the inner product of two packed vectors.
pub fn dot(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).fold(0, |acc, (x, y)| acc ^ (x & y)).count_ones() & 1 == 1
}

fn echelon_fixed<const W: usize>(data: &mut [u64], rows: usize, cols: usize) -> Vec<usize> {
    let mut m: Vec<[u64; W]> = data.chunks_exact(W).map(|c| c.try_into().expect("row width")).collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (wi, sh) = (col / 64, col % 64);
        let Some(piv) = (rank..rows).find(|&r| (m[r][wi] >> sh) & 1 == 1) else {
            continue;
        };
        m.swap(piv, rank);
        let pivot = m[rank];
        for row in m[rank + 1..].iter_mut() {
            let mask = 0u64.wrapping_sub((row[wi] >> sh) & 1);
            for k in 0..W {
                row[k] ^= pivot[k] & mask;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    for (dst, row) in data.chunks_exact_mut(W).zip(&m) {
        dst.copy_from_slice(row);
    }
    pivots
}

fn echelon_dyn(data: &mut [u64], w: usize, rows: usize, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (wi, bit) = (col / 64, 1u64 << (col % 64));
        let Some(piv) = (rank..rows).find(|&r| data[r * w + wi] & bit != 0) else {
            continue;
        };
        if piv != rank {
            let (head, tail) = data.split_at_mut(piv * w);
            head[rank * w..(rank + 1) * w].swap_with_slice(&mut tail[..w]);
        }
        let (head, tail) = data.split_at_mut((rank + 1) * w);
        let pivot = &head[rank * w + wi..];
        for row in tail.chunks_exact_mut(w) {
            if row[wi] & bit != 0 {
                for (d, &s) in row[wi..].iter_mut().zip(pivot) {
                    *d ^= s;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    pivots
}

/// Rank of the reduction of `m` modulo `p`.
pub fn rank_mod_p(m: &MatrixMod) -> usize {
    let p = m.ring().p;
    if p == 2 {
        let mut b = BitMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j) & 1 == 1);
        return b.rank_in_place();
    }
    let cols = m.cols();
    let mut a: Vec<u64> = m.entries().iter().map(|&x| x % p).collect();
    let inv = |x: u64| -> u64 {
        // Fermat: x^{p-2}
        let (mut base, mut e, mut acc) = (x as u128, p - 2, 1u128);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p as u128;
            }
            base = base * base % p as u128;
            e >>= 1;
        }
        acc as u64
    };
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..m.rows()).find(|&r| a[r * cols + col] != 0) else {
            continue;
        };
        for k in 0..cols {
            a.swap(piv * cols + k, rank * cols + k);
        }
        let f = inv(a[rank * cols + col]);
        for k in col..cols {
            a[rank * cols + k] = (a[rank * cols + k] as u128 * f as u128 % p as u128) as u64;
        }
        for r in rank + 1..m.rows() {
            let x = a[r * cols + col];
            if x != 0 {
                for k in col..cols {
                    let s = (x as u128 * a[rank * cols + k] as u128 % p as u128) as u64;
                    a[r * cols + k] = (a[r * cols + k] + p - s) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}
