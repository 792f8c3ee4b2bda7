//! Row-major bit-packed rectangular 0-1 storage.

use std::fmt;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// A rectangular 0-1 matrix, one packed `u64` slice per row.
///
/// Bits past `cols` in the last word of each row are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
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

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols);
        (self.data[i * self.stride + j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        debug_assert!(i < self.rows && j < self.cols);
        let w = &mut self.data[i * self.stride + j / 64];
        if value {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    /// Replaces row `i` with the given packed words.
    pub fn set_row(&mut self, i: usize, words: &[u64]) {
        let stride = self.stride;
        self.row_mut(i).copy_from_slice(&words[..stride]);
        self.mask_tail(i);
    }

    fn mask_tail(&mut self, i: usize) {
        let rem = self.cols % 64;
        if rem != 0 {
            let stride = self.stride;
            self.row_mut(i)[stride - 1] &= (1u64 << rem) - 1;
        }
    }

    pub fn clear_col(&mut self, j: usize) {
        for i in 0..self.rows {
            self.set(i, j, false);
        }
    }

    pub fn row_weight(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.cols];
        for i in 0..self.rows {
            for (wi, &word) in self.row(i).iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    out[wi * 64 + w.trailing_zeros() as usize] += 1;
                    w &= w - 1;
                }
            }
        }
        out
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Column indices of the set bits of row `i`, ascending.
    pub fn row_support(&self, i: usize) -> Vec<usize> {
        ones_of(self.row(i))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in ones_of(self.row(i)) {
                t.set(j, i, true);
            }
        }
        t
    }

    /// The submatrix on the given rows and columns, in the order given.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                if self.get(i, j) {
                    out.set(a, b, true);
                }
            }
        }
        out
    }

    /// Appends `extra` as new rows below `self`.
    pub fn stack_rows(&self, extra: &BitMatrix) -> Self {
        assert_eq!(self.cols, extra.cols, "column count mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&extra.data);
        Self {
            rows: self.rows + extra.rows,
            cols: self.cols,
            stride: self.stride,
            data,
        }
    }
}

/// Indices of set bits in a packed word slice.
pub(crate) fn ones_of(words: &[u64]) -> Vec<usize> {
    let mut out = Vec::new();
    for (wi, &word) in words.iter().enumerate() {
        let mut w = word;
        while w != 0 {
            out.push(wi * 64 + w.trailing_zeros() as usize);
            w &= w - 1;
        }
    }
    out
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
