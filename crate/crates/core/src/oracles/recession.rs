//! Whether `{x ≠ 0 : Ax = 0, x_i ≥ 0 (i ∈ iplus)}` is nonempty, by trying
//! every set of sign constraints that could be tight.
//!
//! If the cone contains a line the answer is yes. Otherwise it is pointed,
//! and a nonzero cone has an extreme ray: a one-dimensional null space of
//! `A` together with `x_i = 0` for some set of sign-constrained `i`, pointing
//! into the sign constraints.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest `n` accepted by [`recession_oracle_exhaustive`].
pub const RECESSION_ORACLE_MAX_N: usize = 10;

/// Orthonormal basis of the null space of the rows, with relative threshold.
fn null_basis(rows: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return (0..n).map(|j| (0..n).map(|i| (i == j) as u8 as f64).collect()).collect();
    }
    // pad to a square matrix so the right singular vectors span all of Rⁿ
    let m = rows.len().max(n);
    let a = DMatrix::from_fn(m, n, |i, j| if i < rows.len() { rows[i][j] } else { 0.0 });
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let top = svd.singular_values.iter().fold(0.0f64, |x, &y| x.max(y));
    let mut out = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= 1e-10 * top.max(f64::MIN_POSITIVE) {
            out.push(vt.row(k).iter().copied().collect());
        }
    }
    out
}

pub fn recession_oracle_exhaustive(a: &[Vec<f64>], n: usize, iplus: &[usize]) -> Result<bool> {
    if n > RECESSION_ORACLE_MAX_N {
        return Err(Error::Dimension(format!("exhaustive test supports n ≤ {RECESSION_ORACLE_MAX_N}")));
    }
    let unit = |i: usize| -> Vec<f64> { (0..n).map(|j| (i == j) as u8 as f64).collect() };
    // lines: null directions with every sign-constrained coordinate zero
    let mut rows = a.to_vec();
    rows.extend(iplus.iter().map(|&i| unit(i)));
    if !null_basis(&rows, n).is_empty() {
        return Ok(true);
    }
    let m = iplus.len();
    for mask in 0u32..(1 << m) {
        let mut rows = a.to_vec();
        for (k, &i) in iplus.iter().enumerate() {
            if mask & (1 << k) != 0 {
                rows.push(unit(i));
            }
        }
        let basis = null_basis(&rows, n);
        if basis.len() != 1 {
            continue;
        }
        let d = &basis[0];
        let scale = d.iter().fold(0.0f64, |x, y| x.max(y.abs()));
        for sign in [1.0, -1.0] {
            if iplus.iter().all(|&i| sign * d[i] >= -1e-9 * scale) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}
