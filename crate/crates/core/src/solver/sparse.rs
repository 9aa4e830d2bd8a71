//! Compressed sparse row storage for complex matrices.

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<Complex64>,
}

impl CsrMatrix {
    /// Build from unordered triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, Complex64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for t in triplets {
            counts[t.0 + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut entries = vec![(0usize, Complex64::new(0.0, 0.0)); triplets.len()];
        for &(r, c, v) in triplets {
            entries[fill[r]] = (c, v);
            fill[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::with_capacity(triplets.len());
        let mut val = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for r in 0..n {
            let row = &mut entries[counts[r]..counts[r + 1]];
            row.sort_unstable_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let (c, mut v) = row[k];
                k += 1;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                col.push(c);
                val.push(v);
            }
            row_ptr.push(col.len());
        }
        Self { n, row_ptr, col, val }
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col[k], self.val[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let cols = &self.col[self.row_ptr[r]..self.row_ptr[r + 1]];
        match cols.binary_search(&c) {
            Ok(k) => self.val[self.row_ptr[r] + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n).into_par_iter().map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.val.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max absolute row sum, an upper bound on the spectral norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// `||A - A^+||_F / ||A||_F`.
    pub fn hermiticity_residual(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let diff: f64 = (0..self.n)
            .into_par_iter()
            .map(|r| self.row(r).map(|(c, v)| (v - self.get(c, r).conj()).norm_sqr()).sum::<f64>())
            .sum();
        diff.sqrt() / norm
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        let mut m = Mat::<Complex64>::zeros(self.n, self.n);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// `A - sigma I` in faer's column-compressed form.
    pub fn shifted(&self, sigma: f64) -> Option<SparseColMat<usize, Complex64>> {
        let mut t: Vec<Triplet<usize, usize, Complex64>> = Vec::with_capacity(self.nnz() + self.n);
        for r in 0..self.n {
            let mut has_diag = false;
            for (c, v) in self.row(r) {
                if c == r {
                    has_diag = true;
                    t.push(Triplet::new(r, c, v - sigma));
                } else {
                    t.push(Triplet::new(r, c, v));
                }
            }
            if !has_diag {
                t.push(Triplet::new(r, r, Complex64::new(-sigma, 0.0)));
            }
        }
        SparseColMat::try_new_from_triplets(self.n, self.n, &t).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn duplicates_are_summed_and_rows_sorted() {
        let m = CsrMatrix::from_triplets(3, &[(1, 2, z(1.0, 0.0)), (1, 0, z(2.0, 0.0)), (1, 2, z(0.5, 1.0))]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 2), z(1.5, 1.0));
        assert_eq!(m.col, vec![0, 2]);
        let y = m.matvec(&[z(1.0, 0.0), z(0.0, 0.0), z(0.0, 1.0)]);
        assert_eq!(y[1], z(2.0, 0.0) + z(1.5, 1.0) * z(0.0, 1.0));
    }

    #[test]
    fn hermiticity_residual_detects_asymmetry() {
        let h = CsrMatrix::from_triplets(2, &[(0, 1, z(1.0, 2.0)), (1, 0, z(1.0, -2.0)), (0, 0, z(3.0, 0.0))]);
        assert_eq!(h.hermiticity_residual(), 0.0);
        let a = CsrMatrix::from_triplets(2, &[(0, 1, z(1.0, 2.0)), (1, 0, z(1.0, 2.0))]);
        assert!(a.hermiticity_residual() > 0.5);
    }
}
