//! KL projection onto the truncated simplex
//! `{ x : sum x = 1, x(i) >= epsilon / N }`.
//!
//! The minimizer clips a prefix of the coordinates (in ascending order of
//! `y`) to the floor `epsilon / N` and rescales the rest by one common
//! constant. We sort once and scan prefixes with precomputed suffix sums.

use crate::error::{check_len, Error, Result};

/// A point of the truncated simplex together with the clipping it took to get there.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSimplexPoint {
    pub x: Vec<f64>,
    pub epsilon: f64,
    /// Indices pinned to the floor, sorted by index.
    pub clipped: Vec<usize>,
    /// Common multiplier applied to the unclipped coordinates of `y / max(y)`.
    pub scale: f64,
}

impl TruncatedSimplexPoint {
    pub fn into_vec(self) -> Vec<f64> {
        self.x
    }
}

/// Projects a strictly positive vector onto the truncated simplex under KL divergence.
pub fn project_truncated_simplex(y: &[f64], epsilon: f64) -> Result<TruncatedSimplexPoint> {
    let n = y.len();
    if n == 0 {
        return Err(Error::Dimension {
            what: "projection input",
            expected: 1,
            got: 0,
        });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!(
            "projection needs 0 < epsilon < 1, got {epsilon}"
        )));
    }
    if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Domain(format!(
            "projection input must be finite and strictly positive, y[{i}] = {v}"
        )));
    }

    let max = y.iter().copied().fold(f64::MIN, f64::max);
    let z: Vec<f64> = y.iter().map(|v| v / max).collect();

    let mut order: Vec<usize> = (0..n).collect();
    // Stable, so equal entries keep their original order.
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]));

    // suffix[k] = sum of the k-th and later entries in sorted order
    let mut suffix = vec![0.0; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] + z[order[k]];
    }

    let floor = epsilon / n as f64;
    let mut k = 0;
    let mut scale = (1.0 - k as f64 * floor) / suffix[k];
    while z[order[k]] * scale < floor {
        k += 1;
        // k = n - 1 always passes: the largest entry gets 1 - (n-1) * floor > floor.
        scale = (1.0 - k as f64 * floor) / suffix[k];
    }

    let mut x = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        x[i] = if rank < k { floor } else { z[i] * scale };
    }
    let mut clipped = order[..k].to_vec();
    clipped.sort_unstable();
    Ok(TruncatedSimplexPoint {
        x,
        epsilon,
        clipped,
        scale,
    })
}

/// `sum_i x(i) log(x(i) / y(i))` with the convention `0 log 0 = 0`.
pub fn kl_divergence(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len("KL divergence arguments", x.len(), y.len())?;
    let mut total = 0.0;
    for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
        if !(yi > 0.0) {
            return Err(Error::Domain(format!("KL divergence needs y > 0, y[{i}] = {yi}")));
        }
        if xi < 0.0 || !xi.is_finite() {
            return Err(Error::Domain(format!("KL divergence needs x >= 0, x[{i}] = {xi}")));
        }
        if xi > 0.0 {
            total += xi * (xi / yi).ln();
        }
    }
    Ok(total)
}
