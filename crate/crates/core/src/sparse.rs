//! Symmetric sparse matrices in CSR form.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Symmetric sparse operator over vertex pairs, stored as full (two-sided)
/// CSR so application is a plain row sweep. Symmetry holds by construction:
/// triplets are mirrored before assembly.
#[derive(Debug, Clone)]
pub struct SparseSymmetricOperator<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseSymmetricOperator<T> {
    /// Assembles from (i, j, v) triplets; (i, j) with i != j is mirrored to
    /// (j, i) automatically, duplicates are summed in input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut entries: Vec<(usize, usize, T)> = Vec::with_capacity(triplets.len() * 2);
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::invalid_input(format!(
                    "triplet index ({i}, {j}) out of range for dimension {n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::invalid_input("non-finite matrix entry"));
            }
            entries.push((i, j, v));
            if i != j {
                entries.push((j, i, v));
            }
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for (i, j, v) in entries {
            if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j && row_ptr[i + 1] > 0 {
                let last = values.len() - 1;
                values[last] += v;
            } else {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr[i + 1] = col_idx.len();
        }
        // Rows without entries inherit the previous pointer.
        for i in 1..=n {
            if row_ptr[i] < row_ptr[i - 1] {
                row_ptr[i] = row_ptr[i - 1];
            }
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .zip(self.values[lo..hi].iter())
            .map(|(&j, &v)| (j, v))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => T::zero(),
        }
    }

    pub fn apply(&self, x: &[T], out: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(out.len(), self.n);
        for i in 0..self.n {
            let mut acc = T::zero();
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            out[i] = acc;
        }
    }

    pub fn apply_vec(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        self.apply(x, &mut out);
        out
    }

    /// x^T A x.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                acc += x[i] * v * x[j];
            }
        }
        acc
    }

    /// Largest absolute row sum; zero for a graph Laplacian up to roundoff.
    pub fn max_row_sum(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            let s = self.row(i).map(|(_, v)| v).sum::<T>();
            worst = worst.max(s.abs());
        }
        worst
    }

    pub fn max_abs_entry(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Restriction to `keep` (sorted, deduplicated inside); returns the
    /// submatrix and the map from sub-index to original index.
    pub fn restriction(&self, keep: &[usize]) -> Result<(Self, Vec<usize>)> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut back = vec![usize::MAX; self.n];
        for (sub, &orig) in keep.iter().enumerate() {
            if orig >= self.n {
                return Err(Error::invalid_input("restriction index out of range"));
            }
            back[orig] = sub;
        }
        let mut triplets = Vec::new();
        for (sub_i, &orig_i) in keep.iter().enumerate() {
            for (j, v) in self.row(orig_i) {
                let sub_j = back[j];
                if sub_j != usize::MAX && sub_j >= sub_i {
                    triplets.push((sub_i, sub_j, v));
                }
            }
        }
        let sub = Self::from_triplets(keep.len(), &triplets)?;
        Ok((sub, keep))
    }
}
