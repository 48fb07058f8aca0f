//! Dense GF(2) matrices with bit-packed rows.

use std::fmt;

const WORD: usize = 64;

fn words_for(cols: usize) -> usize {
    cols.div_ceil(WORD)
}

/// A dense binary matrix. Each row is packed into `u64` words, least
/// significant bit first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    /// All-zero matrix.
    ///
    /// # Panics
    ///
    /// Panics if either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be non-zero");
        let stride = words_for(cols);
        Self { rows, cols, stride, bits: vec![0; rows * stride] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 bytes. Returns `None` for ragged or
    /// empty input, or for entries other than 0 and 1.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Option<Self> {
        let cols = rows.first()?.as_ref().len();
        if cols == 0 {
            return None;
        }
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return None;
            }
            for (c, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => m.set(r, c, true),
                    _ => return None,
                }
            }
        }
        Some(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        (self.bits[row * self.stride + col / WORD] >> (col % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        let w = &mut self.bits[row * self.stride + col / WORD];
        let mask = 1u64 << (col % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// Packed words of one row.
    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.bits[row * self.stride..(row + 1) * self.stride]
    }

    /// One row as 0/1 bytes.
    pub fn row(&self, row: usize) -> Vec<u8> {
        (0..self.cols).map(|c| self.get(row, c) as u8).collect()
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let (s, d) = (src * self.stride, dst * self.stride);
        for i in 0..self.stride {
            let v = self.bits[s + i];
            self.bits[d + i] ^= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.stride {
            self.bits.swap(a * self.stride + i, b * self.stride + i);
        }
    }

    /// Reduced row echelon form in place. Columns are visited in the given
    /// order when choosing pivots. Returns the pivot column of each leading
    /// row, so the rank is the length of the result.
    pub fn reduce_with_order(&mut self, column_order: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next_row = 0;
        for col in column_order {
            if next_row == self.rows {
                break;
            }
            let Some(p) = (next_row..self.rows).find(|&r| self.get(r, col)) else {
                continue;
            };
            self.swap_rows(p, next_row);
            for r in 0..self.rows {
                if r != next_row && self.get(r, col) {
                    self.xor_row_into(next_row, r);
                }
            }
            pivots.push(col);
            next_row += 1;
        }
        pivots
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        self.clone().reduce_with_order(0..self.cols).len()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// `self · otherᵀ`; both operands must have the same column count.
    pub fn mul_transpose(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "column count mismatch");
        let mut out = BitMatrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row_words(i);
            for j in 0..other.rows {
                let parity = a.iter().zip(other.row_words(j)).fold(0u32, |acc, (x, y)| acc ^ (x & y).count_ones()) & 1;
                if parity == 1 {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Matrix-vector product `self · v` for a 0/1 vector of length `cols`.
    pub fn mul_vec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        let packed = pack(v);
        (0..self.rows)
            .map(|r| {
                (self.row_words(r).iter().zip(&packed).fold(0u32, |acc, (x, y)| acc ^ (x & y).count_ones()) & 1) as u8
            })
            .collect()
    }

    /// Row vector times matrix: `v · self` for a 0/1 vector of length `rows`.
    pub fn vec_mul(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.rows, "vector length mismatch");
        let mut acc = vec![0u64; self.stride];
        for (r, &b) in v.iter().enumerate() {
            if b & 1 == 1 {
                for (a, w) in acc.iter_mut().zip(self.row_words(r)) {
                    *a ^= w;
                }
            }
        }
        unpack(&acc, self.cols)
    }

    /// Columns packed as syndromes: column `c` occupies words
    /// `[c * stride, (c + 1) * stride)` of the result, where `stride` is the
    /// number of words needed for `rows` bits.
    pub fn packed_columns(&self) -> (usize, Vec<u64>) {
        let stride = words_for(self.rows);
        let mut out = vec![0u64; stride * self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    out[c * stride + r / WORD] |= 1 << (r % WORD);
                }
            }
        }
        (stride, out)
    }

    /// Basis of the right null space `{x : self · x = 0}`, one basis vector
    /// per row. Returns `None` when the null space is trivial.
    pub fn null_space(&self) -> Option<BitMatrix> {
        let mut reduced = self.clone();
        let pivots = reduced.reduce_with_order(0..self.cols);
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        if free.is_empty() {
            return None;
        }
        let mut basis = BitMatrix::zeros(free.len(), self.cols);
        for (i, &f) in free.iter().enumerate() {
            basis.set(i, f, true);
            for (row, &p) in pivots.iter().enumerate() {
                if reduced.get(row, f) {
                    basis.set(i, p, true);
                }
            }
        }
        Some(basis)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Packs a 0/1 byte vector into words, least significant bit first.
pub fn pack(v: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; words_for(v.len()).max(1)];
    for (i, &b) in v.iter().enumerate() {
        if b & 1 == 1 {
            out[i / WORD] |= 1 << (i % WORD);
        }
    }
    out
}

pub fn unpack(words: &[u64], len: usize) -> Vec<u8> {
    (0..len).map(|i| ((words[i / WORD] >> (i % WORD)) & 1) as u8).collect()
}
