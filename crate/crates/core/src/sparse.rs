//! Row-compressed sparse matrices assembled from dense element blocks.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < nrows && c < ncols, "entry ({r}, {c}) out of range");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// All stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.mul_vec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Accumulates dense blocks on a block grid and emits CSR. Blocks are kept in
/// a sorted map, so the output does not depend on insertion order beyond the
/// floating-point summation order of repeated blocks.
#[derive(Clone, Debug)]
pub struct BlockAssembler {
    row_offsets: Vec<usize>,
    col_offsets: Vec<usize>,
    blocks: BTreeMap<(usize, usize), DMatrix<f64>>,
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(sizes.len() + 1);
    out.push(0);
    for s in sizes {
        out.push(out.last().unwrap() + s);
    }
    out
}

impl BlockAssembler {
    pub fn new(row_sizes: &[usize], col_sizes: &[usize]) -> Self {
        BlockAssembler {
            row_offsets: offsets(row_sizes),
            col_offsets: offsets(col_sizes),
            blocks: BTreeMap::new(),
        }
    }

    pub fn square(sizes: &[usize]) -> Self {
        Self::new(sizes, sizes)
    }

    pub fn add(&mut self, row_block: usize, col_block: usize, block: &DMatrix<f64>) {
        let nr = self.row_offsets[row_block + 1] - self.row_offsets[row_block];
        let nc = self.col_offsets[col_block + 1] - self.col_offsets[col_block];
        assert_eq!(block.shape(), (nr, nc), "block ({row_block}, {col_block})");
        self.blocks
            .entry((row_block, col_block))
            .and_modify(|b| *b += block)
            .or_insert_with(|| block.clone());
    }

    pub fn block(&self, row_block: usize, col_block: usize) -> Option<&DMatrix<f64>> {
        self.blocks.get(&(row_block, col_block))
    }

    pub fn into_csr(self) -> CsrMatrix {
        let nrows = *self.row_offsets.last().unwrap();
        let ncols = *self.col_offsets.last().unwrap();
        let nrb = self.row_offsets.len() - 1;
        let mut by_row: Vec<Vec<(usize, &DMatrix<f64>)>> = vec![Vec::new(); nrb];
        for ((rb, cb), m) in &self.blocks {
            by_row[*rb].push((*cb, m));
        }
        let nnz: usize = self.blocks.values().map(|b| b.len()).sum();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for (rb, blocks) in by_row.iter().enumerate() {
            let nr = self.row_offsets[rb + 1] - self.row_offsets[rb];
            for i in 0..nr {
                for (cb, m) in blocks {
                    let c0 = self.col_offsets[*cb];
                    for j in 0..m.ncols() {
                        col_idx.push(c0 + j);
                        values.push(m[(i, j)]);
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_to_csr() {
        let mut a = BlockAssembler::square(&[2, 1]);
        a.add(0, 0, &DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        a.add(1, 0, &DMatrix::from_row_slice(1, 2, &[5.0, 6.0]));
        a.add(1, 1, &DMatrix::from_row_slice(1, 1, &[7.0]));
        a.add(1, 1, &DMatrix::from_row_slice(1, 1, &[1.0]));
        let m = a.into_csr();
        let d = m.to_dense();
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 3.0, 4.0, 0.0, 5.0, 6.0, 8.0]);
        assert_eq!(d, expected);
        assert_eq!(m.get(2, 2), 8.0);
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]), vec![3.0, 7.0, 19.0]);
        assert_eq!(m.bilinear(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]), 5.0);
    }

    #[test]
    fn rectangular_blocks() {
        let mut a = BlockAssembler::new(&[1, 2], &[3]);
        a.add(1, 0, &DMatrix::from_element(2, 3, 1.0));
        let m = a.into_csr();
        assert_eq!((m.nrows, m.ncols), (3, 3));
        assert_eq!(m.mul_vec(&[1.0, 2.0, 3.0]), vec![0.0, 6.0, 6.0]);
    }
}
