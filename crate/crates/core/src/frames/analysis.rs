//! Frame bounds, canonical tightening, coherence and Gram-matrix norms.

use nalgebra::{DMatrix, SymmetricEigen};

use super::Dictionary;
use crate::error::{Error, Result};
use crate::linop::{self, LinearOperator, C64};

/// Relative magnitude below which frame-operator entries are treated as
/// structural zeros when splitting it into independent blocks.
const BLOCK_DROP_TOL: f64 = 1e-14;

/// A Hermitian matrix stored as independent diagonal blocks over disjoint
/// index sets (a permuted block-diagonal matrix).
#[derive(Clone, Debug)]
pub struct BlockHermitian {
    n: usize,
    blocks: Vec<(Vec<usize>, DMatrix<C64>)>,
}

impl BlockHermitian {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = linop::vec::zeros(self.n);
        for (idx, mat) in &self.blocks {
            for (r, &i) in idx.iter().enumerate() {
                out[i] = idx.iter().enumerate().map(|(c, &j)| mat[(r, c)] * x[j]).sum();
            }
        }
        out
    }
}

/// The frame operator `S = D D^*` as a dense `n x n` matrix.
pub fn frame_operator(dict: &Dictionary) -> DMatrix<C64> {
    let n = dict.n();
    let mut s = DMatrix::zeros(n, n);
    let mut e = linop::vec::zeros(n);
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        let col = dict.apply(&dict.adjoint(&e));
        e[j] = C64::new(0.0, 0.0);
        s.column_mut(j).copy_from_slice(&col);
    }
    (&s + s.adjoint()) * C64::new(0.5, 0.0)
}

struct SpectralBlock {
    idx: Vec<usize>,
    eigen: SymmetricEigen<C64, nalgebra::Dyn>,
}

/// Splits a Hermitian matrix into the connected components of its sparsity
/// pattern and eigendecomposes each one.
fn spectral_blocks(s: &DMatrix<C64>) -> Vec<SpectralBlock> {
    let n = s.nrows();
    let scale = s.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let drop = BLOCK_DROP_TOL * scale;

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for j in 0..n {
        for i in (j + 1)..n {
            if s[(i, j)].norm() > drop {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|idx| {
            let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| s[(idx[r], idx[c])]);
            SpectralBlock { eigen: SymmetricEigen::new(sub), idx }
        })
        .collect()
}

fn extreme_eigenvalues(blocks: &[SpectralBlock]) -> (f64, f64) {
    blocks.iter().flat_map(|b| b.eigen.eigenvalues.iter().copied()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// Optimal frame bounds `(A, B) = (lambda_min(DD^*), lambda_max(DD^*))`.
///
/// Exact for tight dictionaries. Otherwise the frame operator is assembled
/// and eigendecomposed block by block; Gabor systems split into one block
/// per residue class modulo the number of modulations.
pub fn frame_bounds(dict: &Dictionary) -> Result<(f64, f64)> {
    if let Some(b) = dict.cached_bounds().get() {
        return Ok(*b);
    }
    let (lo, hi) = extreme_eigenvalues(&spectral_blocks(&frame_operator(dict)));
    let bounds = (lo.max(0.0), hi);
    let _ = dict.cached_bounds().set(bounds);
    Ok(bounds)
}

/// The canonical tight frame `(DD^*)^{-1/2} D`.
pub fn tighten(dict: &Dictionary) -> Result<Dictionary> {
    let blocks = spectral_blocks(&frame_operator(dict));
    let (lo, hi) = extreme_eigenvalues(&blocks);
    if !(lo > 1e-10 * hi) {
        return Err(Error::NotAFrame(format!(
            "frame operator is rank deficient (lambda_min = {lo:e}, lambda_max = {hi:e})"
        )));
    }
    let whitener = blocks
        .into_iter()
        .map(|b| {
            let v = &b.eigen.eigenvectors;
            let inv_sqrt = DMatrix::from_diagonal(&b.eigen.eigenvalues.map(|l| C64::new(1.0 / l.sqrt(), 0.0)));
            (b.idx, v * inv_sqrt * v.adjoint())
        })
        .collect();
    Ok(Dictionary::whitened(dict, BlockHermitian { n: dict.n(), blocks: whitener }))
}

/// Mutual coherence `max_{j<k} |<M_j, M_k>| / (|M_j| |M_k|)` over columns.
pub fn coherence(m: &dyn LinearOperator) -> Result<f64> {
    let dense = m.to_dense()?;
    let norms: Vec<f64> = dense.column_iter().map(|c| c.norm()).collect();
    if let Some(j) = norms.iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroColumn(j));
    }
    let normalized = DMatrix::from_fn(dense.nrows(), dense.ncols(), |i, j| dense[(i, j)] / norms[j]);
    let gram = normalized.adjoint() * &normalized;
    let mut mu: f64 = 0.0;
    for k in 0..gram.ncols() {
        for j in 0..k {
            mu = mu.max(gram[(j, k)].norm());
        }
    }
    Ok(mu.min(1.0))
}

/// `[max_j sum_i |(D^*D)_{ij}|^p]^{1/p}`, which bounds `|D^*D x|_p / |x|_p`.
pub fn gram_pnorm_factor(dict: &dyn LinearOperator, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0, 1], got {p}")));
    }
    let dense = dict.to_dense()?;
    let gram = dense.adjoint() * &dense;
    let worst = gram
        .column_iter()
        .map(|col| col.iter().map(|g| g.norm().powf(p)).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(worst.powf(1.0 / p))
}
