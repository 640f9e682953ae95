//! Helpers for stacked agent vectors.
//!
//! A stacked vector holds one `dim`-dimensional block per agent, so agent
//! `i`'s coordinates occupy entries `i * dim .. (i + 1) * dim`.

use nalgebra::{DVector, DVectorView};

/// View of agent `i`'s block of a stacked vector.
pub fn block(x: &DVector<f64>, i: usize, dim: usize) -> DVectorView<'_, f64> {
    x.rows(i * dim, dim)
}

/// Number of agent blocks in a stacked vector.
pub fn n_blocks(x: &DVector<f64>, dim: usize) -> usize {
    debug_assert_eq!(x.len() % dim, 0);
    x.len() / dim
}

/// Sum of all agent blocks, i.e. `(1ᵀ ⊗ I) x`.
pub fn block_sum(x: &DVector<f64>, dim: usize) -> DVector<f64> {
    let mut out = DVector::zeros(dim);
    for i in 0..n_blocks(x, dim) {
        out += block(x, i, dim);
    }
    out
}

/// Blockwise mean of a stacked vector.
pub fn block_mean(x: &DVector<f64>, dim: usize) -> DVector<f64> {
    block_sum(x, dim) / n_blocks(x, dim) as f64
}

/// Stacks `n_agents` copies of `z`, i.e. `1 ⊗ z`.
pub fn consensus_stack(z: &DVector<f64>, n_agents: usize) -> DVector<f64> {
    let dim = z.len();
    let mut out = DVector::zeros(n_agents * dim);
    for i in 0..n_agents {
        out.rows_mut(i * dim, dim).copy_from(z);
    }
    out
}
