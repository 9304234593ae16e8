use serde::{Deserialize, Serialize};

use super::VectorizeError;

/// A sparse real vector: strictly increasing indices below `dim`, no stored
/// zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a vector from `(index, value)` pairs. Pairs must be sorted by
    /// strictly increasing index; zero values are dropped.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self, VectorizeError> {
        let mut v = Self::zeros(dim);
        for (i, x) in pairs {
            if i as usize >= dim || v.indices.last().is_some_and(|&last| last >= i) {
                return Err(VectorizeError::BadSparseIndex { index: i as usize, dim });
            }
            if x != 0.0 {
                v.indices.push(i);
                v.values.push(x);
            }
        }
        Ok(v)
    }

    /// Sorted pairs produced internally; skips validation.
    pub(crate) fn from_sorted_unchecked(dim: usize, indices: Vec<u32>, values: Vec<f64>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(indices.last().is_none_or(|&i| (i as usize) < dim));
        Self { dim, indices, values }
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(|(i, &x)| (i as u32, x))
            .unzip();
        Self {
            dim: dense.len(),
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Value at `index` (zero when not stored).
    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&(index as u32)) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, x)| x * dense[i as usize]).sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for (i, x) in self.iter() {
            d[i as usize] = x;
        }
        d
    }

    /// Scales to unit L2 norm; zero vectors are left unchanged.
    pub fn normalize_l2(&mut self) {
        let n = self.squared_norm().sqrt();
        if n > 0.0 {
            self.values.iter_mut().for_each(|x| *x /= n);
        }
    }

    /// Replaces negative values by zero (and drops them).
    pub fn clip_nonnegative(&self) -> Self {
        let (indices, values) = self.iter().filter(|&(_, x)| x > 0.0).unzip();
        Self {
            dim: self.dim,
            indices,
            values,
        }
    }
}
