use serde::{Deserialize, Serialize};

use super::{LinalgError, RingSpec};

/// Dense row-major matrix over `Z/p^N` with canonical residues.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct MatrixMod {
    ring: RingSpec,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

/// JSON layout `{p, N, rows, cols, entries}` used for debugging dumps.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    p: u64,
    #[serde(rename = "N")]
    precision: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl TryFrom<MatrixRepr> for MatrixMod {
    type Error = LinalgError;

    fn try_from(r: MatrixRepr) -> Result<Self, Self::Error> {
        let ring = RingSpec::new(r.p, r.precision)?;
        if r.entries.len() != r.rows * r.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: (r.rows, r.cols),
                found: (r.entries.len(), 1),
            });
        }
        let m = ring.modulus();
        Ok(MatrixMod {
            ring,
            rows: r.rows,
            cols: r.cols,
            entries: r.entries.into_iter().map(|x| x % m).collect(),
        })
    }
}

impl From<MatrixMod> for MatrixRepr {
    fn from(m: MatrixMod) -> Self {
        MatrixRepr {
            p: m.ring.p,
            precision: m.ring.precision,
            rows: m.rows,
            cols: m.cols,
            entries: m.entries,
        }
    }
}

impl MatrixMod {
    pub fn zeros(ring: RingSpec, rows: usize, cols: usize) -> Self {
        MatrixMod {
            ring,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(ring: RingSpec, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1 % ring.modulus();
        }
        m
    }

    /// Reduces integer entries modulo `p^N`.
    pub fn from_i64(ring: RingSpec, rows: usize, cols: usize, values: &[i64]) -> Self {
        assert_eq!(values.len(), rows * cols, "entry count");
        let z = ring.arith();
        MatrixMod {
            ring,
            rows,
            cols,
            entries: values.iter().map(|&x| z.reduce_i64(x)).collect(),
        }
    }

    pub fn from_rows(ring: RingSpec, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let flat: Vec<i64> = rows.iter().flatten().copied().collect();
        Self::from_i64(ring, rows.len(), cols, &flat)
    }

    pub fn diagonal(ring: RingSpec, diag: &[i64]) -> Self {
        let n = diag.len();
        let mut values = vec![0i64; n * n];
        for (i, &d) in diag.iter().enumerate() {
            values[i * n + i] = d;
        }
        Self::from_i64(ring, n, n, &values)
    }

    /// Wraps already reduced residues.
    pub(crate) fn from_residues(ring: RingSpec, rows: usize, cols: usize, entries: Vec<u64>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        debug_assert!(entries.iter().all(|&x| x < ring.modulus()));
        MatrixMod {
            ring,
            rows,
            cols,
            entries,
        }
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [u64] {
        &mut self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: i64) {
        self.entries[i * self.cols + j] = self.ring.arith().reduce_i64(value);
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> MatrixMod {
        let mut out = Self::zeros(self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    /// Reduces to a lower precision `Z/p^M`, `M ≤ N`.
    pub fn reduce_precision(&self, precision: u32) -> Result<MatrixMod, LinalgError> {
        if precision > self.ring.precision {
            return Err(LinalgError::PrecisionIncrease {
                from: self.ring.precision,
                to: precision,
            });
        }
        let ring = RingSpec::new(self.ring.p, precision)?;
        let m = ring.modulus();
        Ok(MatrixMod {
            ring,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&x| x % m).collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &MatrixMod) -> Result<MatrixMod, LinalgError> {
        if self.ring != other.ring {
            return Err(LinalgError::RingMismatch(self.ring, other.ring));
        }
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.cols, other.cols),
                found: (other.rows, other.cols),
            });
        }
        let z = self.ring.arith();
        let (n, m, k) = (self.rows, other.cols, self.cols);
        if z.p == 2 {
            return Ok(MatrixMod::from_residues(
                self.ring,
                n,
                m,
                super::pow2::matmul(self.ring, &self.entries, &other.entries, n, k, m),
            ));
        }
        let mut out = vec![0u64; n * m];
        let modulus = z.modulus as u128;
        let mut acc = vec![0u128; m];
        for i in 0..n {
            acc.iter_mut().for_each(|x| *x = 0);
            for l in 0..k {
                let a = self.entries[i * k + l] as u128;
                if a == 0 {
                    continue;
                }
                for (c, &b) in acc.iter_mut().zip(other.row(l)) {
                    *c += a * b as u128 % modulus;
                }
            }
            for (o, &c) in out[i * m..(i + 1) * m].iter_mut().zip(&acc) {
                *o = (c % modulus) as u64;
            }
        }
        Ok(MatrixMod::from_residues(self.ring, n, m, out))
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &MatrixMod) -> Result<MatrixMod, LinalgError> {
        if self.ring != other.ring {
            return Err(LinalgError::RingMismatch(self.ring, other.ring));
        }
        if self.rows != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.rows, other.cols),
                found: (other.rows, other.cols),
            });
        }
        let cols = self.cols + other.cols;
        let mut entries = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            entries.extend_from_slice(self.row(i));
            entries.extend_from_slice(other.row(i));
        }
        Ok(MatrixMod::from_residues(self.ring, self.rows, cols, entries))
    }
}

/// Partial products `[M_1, M_1 M_2, …, M_1 ⋯ M_k]`.
pub fn product_chain(factors: &[MatrixMod]) -> Result<Vec<MatrixMod>, LinalgError> {
    let first = factors.first().ok_or(LinalgError::EmptyChain)?;
    let mut out = Vec::with_capacity(factors.len());
    out.push(first.clone());
    for m in &factors[1..] {
        if m.ring() != first.ring() {
            return Err(LinalgError::RingMismatch(first.ring(), m.ring()));
        }
        if !m.is_square() || m.rows() != first.rows() {
            return Err(LinalgError::DimensionMismatch {
                expected: (first.rows(), first.cols()),
                found: (m.rows(), m.cols()),
            });
        }
        let next = out.last().expect("nonempty").mul(m)?;
        out.push(next);
    }
    Ok(out)
}
