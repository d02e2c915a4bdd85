//! The index families that define the general canonical form.
//!
//! All multi-indices in this module are 1-based, matching the way the
//! canonical-form conditions are written; use
//! [`ModeShape::offset_one_based`](crate::tensor::ModeShape::offset_one_based)
//! to look them up in a tensor.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::ModeShape;

/// A 1-based multi-index.
pub type MultiIndex = Vec<usize>;

/// The ordered `(n-1)`-tuples `I_1 … I_N` and the `n`-tuple sets `A`, `B_1 … B_4`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexSets {
    pub dims: Vec<usize>,
    /// `I_1, …, I_N` in lexicographic order.
    pub tuples: Vec<MultiIndex>,
    pub a: Vec<MultiIndex>,
    pub b1: Vec<MultiIndex>,
    pub b2: Vec<MultiIndex>,
    pub b3: Vec<MultiIndex>,
    pub b4: Vec<MultiIndex>,
    /// `N`, the number of tuples.
    pub n_tuples: usize,
    /// `D = d_1 ⋯ d_{n-1}`.
    pub head_product: usize,
    /// `δ = d_n − d_{n-1}`.
    pub delta: usize,
    /// `Δ = d_n − D` when positive, else 0.
    pub excess: usize,
}

impl IndexSets {
    pub fn real_sets(&self) -> impl Iterator<Item = &MultiIndex> {
        self.b1.iter().chain(&self.b2).chain(&self.b3).chain(&self.b4)
    }

    pub fn real_count(&self) -> usize {
        self.b1.len() + self.b2.len() + self.b3.len() + self.b4.len()
    }
}

pub(crate) fn require_canonical_ready(shape: &ModeShape) -> Result<()> {
    if !shape.is_canonical_ready() {
        return Err(Error::NotCanonicalReady(shape.dims().to_vec()));
    }
    Ok(())
}

/// All tuples over `1..=d_r` in lexicographic order.
pub(crate) fn lex_tuples(dims: &[usize]) -> Vec<MultiIndex> {
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut current = vec![1; dims.len()];
    for _ in 0..total {
        out.push(current.clone());
        for r in (0..dims.len()).rev() {
            if current[r] < dims[r] {
                current[r] += 1;
                break;
            }
            current[r] = 1;
        }
    }
    out
}

/// `(d_1, …, d_r, i, …, i)` of total length `len`.
pub(crate) fn staircase(dims: &[usize], r: usize, i: usize, len: usize) -> MultiIndex {
    let mut t: MultiIndex = dims[..r].to_vec();
    t.resize(len, i);
    t
}

/// True for `(n-1)`-tuples whose coefficients are already forced to zero by the
/// deflation ladder: `(i, …, i)` with `i < d_1`, and `(d_1, …, d_r, i, …, i)`
/// with `d_r <= i < d_{r+1}`, `1 <= r <= n-2`.
pub(crate) fn is_ladder_tuple(dims: &[usize], t: &[usize]) -> bool {
    let len = dims.len() - 1;
    if t.iter().all(|&x| x == t[0]) && t[0] < dims[0] {
        return true;
    }
    (1..len).any(|r| (dims[r - 1]..dims[r]).any(|i| t == staircase(dims, r, i, len).as_slice()))
}

/// Enumerates `I_k`, `A` and `B_1 … B_4` for a canonical-ready shape.
pub fn enumerate_index_sets(shape: &ModeShape) -> Result<IndexSets> {
    require_canonical_ready(shape)?;
    let dims = shape.dims();
    let n = dims.len();
    let d_last = dims[n - 1];
    let d_prev = dims[n - 2];
    let head = &dims[..n - 1];
    let head_product: usize = head.iter().product();

    let tuples: Vec<MultiIndex> = lex_tuples(head).into_iter().filter(|t| !is_ladder_tuple(dims, t)).collect();
    let n_tuples = tuples.len();
    debug_assert_eq!(n_tuples, head_product - d_prev + 1);
    let delta = d_last - d_prev;
    let excess = d_last.saturating_sub(head_product);

    let mut a = Vec::new();
    for k in 1..=n_tuples.min(delta) {
        for l in k..=delta {
            let mut idx = tuples[k - 1].clone();
            idx.push(d_prev + l);
            a.push(idx);
        }
    }

    let mut b1 = Vec::new();
    for r in 1..=n - 2 {
        for j in 1..dims[r - 1] {
            let mut idx: MultiIndex = head.to_vec();
            idx[r - 1] = j;
            idx.push(d_prev);
            b1.push(idx);
        }
    }

    let mut b2 = Vec::new();
    for j in 1..dims[n - 3] {
        let mut idx: MultiIndex = dims[..n - 2].to_vec();
        idx.push(j);
        idx.push(d_prev);
        b2.push(idx);
    }

    let mut b3 = Vec::new();
    for j in dims[n - 3]..=d_prev {
        let mut idx: MultiIndex = dims[..n - 2].to_vec();
        idx.push(j);
        idx.push(1);
        b3.push(idx);
    }

    let mut b4 = Vec::new();
    for i in 2..=dims[0] {
        b4.push(vec![i; n]);
    }
    for r in 1..n - 1 {
        for i in dims[r - 1] + 1..=dims[r] {
            b4.push(staircase(dims, r, i, n));
        }
    }
    for i in d_prev + 1..=head_product.min(d_last) {
        let mut idx: MultiIndex = head.to_vec();
        idx.push(i);
        b4.push(idx);
    }

    Ok(IndexSets { dims: dims.to_vec(), tuples, a, b1, b2, b3, b4, n_tuples, head_product, delta, excess })
}

/// Indices forced to vanish by the deflation ladder, split into the family
/// `c_{i…i j i…i}` (`i < d_1`, `j > i`) and the staircase family
/// `c_{d_1…d_r i…i j i…i}` (`d_r <= i < d_{r+1}`, `j > i` in a position after `r`).
pub fn ladder_zero_families(shape: &ModeShape) -> Result<(Vec<MultiIndex>, Vec<MultiIndex>)> {
    require_canonical_ready(shape)?;
    let dims = shape.dims();
    let n = dims.len();
    let mut first = Vec::new();
    for i in 1..dims[0] {
        for s in 0..n {
            for j in i + 1..=dims[s] {
                let mut idx = vec![i; n];
                idx[s] = j;
                first.push(idx);
            }
        }
    }
    let mut stair = Vec::new();
    for r in 1..=n - 2 {
        for i in dims[r - 1]..dims[r] {
            for s in r..n {
                for j in i + 1..=dims[s] {
                    let mut idx = staircase(dims, r, i, n);
                    idx[s] = j;
                    stair.push(idx);
                }
            }
        }
    }
    Ok((first, stair))
}

/// Both ladder families concatenated.
pub fn ladder_zero_indices(shape: &ModeShape) -> Result<Vec<MultiIndex>> {
    let (mut first, stair) = ladder_zero_families(shape)?;
    first.extend(stair);
    Ok(first)
}
