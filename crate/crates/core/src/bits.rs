//! Bit-indexing helpers for the binary occupation basis.
//!
//! Convention: an ordered site context `[s_0 < s_1 < ... < s_{n-1}]` maps
//! site position `j` to bit `n-1-j`, so the first site sits on the most
//! significant bit and Kronecker products compose left factor first.

use crate::linalg::CMat;

/// Scatter a sub-register value onto the full register. `positions` are
/// site positions (0 = first site) within a context of `total` sites.
pub(crate) fn scatter_sub(value: usize, positions: &[usize], total: usize) -> usize {
    let k = positions.len();
    let mut out = 0usize;
    for (t, &p) in positions.iter().enumerate() {
        if (value >> (k - 1 - t)) & 1 == 1 {
            out |= 1 << (total - 1 - p);
        }
    }
    out
}

/// Gather the sub-register value held at `positions` out of a full-register
/// basis index.
pub(crate) fn gather_sub(index: usize, positions: &[usize], total: usize) -> usize {
    let k = positions.len();
    let mut out = 0usize;
    for (t, &p) in positions.iter().enumerate() {
        if (index >> (total - 1 - p)) & 1 == 1 {
            out |= 1 << (k - 1 - t);
        }
    }
    out
}

/// Partial trace of a density matrix over the sites NOT in `keep`.
/// `keep` holds site positions (ascending) within a context of `total` sites.
pub(crate) fn partial_trace(d: &CMat, total: usize, keep: &[usize]) -> CMat {
    let rest: Vec<usize> = (0..total).filter(|p| !keep.contains(p)).collect();
    let dim_a = 1usize << keep.len();
    let dim_r = 1usize << rest.len();
    let sa: Vec<usize> = (0..dim_a).map(|a| scatter_sub(a, keep, total)).collect();
    let sr: Vec<usize> = (0..dim_r).map(|r| scatter_sub(r, &rest, total)).collect();
    let mut out = CMat::zeros((dim_a, dim_a));
    for a in 0..dim_a {
        for ap in 0..dim_a {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for r in 0..dim_r {
                acc += d[(sa[a] | sr[r], sa[ap] | sr[r])];
            }
            out[(a, ap)] = acc;
        }
    }
    out
}

/// Embed a sub-register operator as `op ⊗ 1` on the full register.
pub(crate) fn embed(small: &CMat, total: usize, positions: &[usize]) -> CMat {
    let dim = 1usize << total;
    let dim_a = 1usize << positions.len();
    debug_assert_eq!(small.nrows(), dim_a);
    let mask: usize = positions.iter().map(|&p| 1usize << (total - 1 - p)).sum();
    let mut out = CMat::zeros((dim, dim));
    for i in 0..dim {
        let ai = gather_sub(i, positions, total);
        let rest = i & !mask;
        for aj in 0..dim_a {
            let j = scatter_sub(aj, positions, total) | rest;
            out[(i, j)] = small[(ai, aj)];
        }
    }
    out
}
