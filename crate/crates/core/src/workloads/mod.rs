//! Load sources.
//!
//! A source emits one non-negative demand vector per step. Precomputed
//! sources replay a [`LoadMatrix`]; adaptive ones (the adversary) look at
//! the allocation the policy just committed to before choosing the load.

mod adversary;
mod csv;
mod example1;
mod fuzz;
mod gamma;
mod synthetic;

pub use self::adversary::{Adversary, PhaseBoundary, PHASE_GROWTH};
pub use self::csv::{parse_trace_csv, read_trace_csv, write_trace_csv, write_trace_csv_to};
pub use self::example1::{example1_instance, EXAMPLE1_SLA};
pub use self::fuzz::{fuzz_loads, FuzzParams};
pub use self::gamma::{sample_gamma, GammaParams};
pub use self::synthetic::{synthetic_gamma, PeriodSpec, SyntheticSchedule, SYNTHETIC_SHAPE};

use crate::error::{Error, Result};
use crate::model::{ActiveSet, Allocation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceMode {
    Precomputed,
    Adaptive,
}

/// What a source may look at when choosing the load of step `t`.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub t: usize,
    pub allocation: &'a Allocation,
    pub active: &'a ActiveSet,
}

pub trait LoadSource {
    fn n(&self) -> usize;

    fn mode(&self) -> SourceMode;

    /// Load of step `ctx.t`, or `None` once the source is exhausted.
    fn next_load(&mut self, ctx: &StepContext<'_>) -> Result<Option<Vec<f64>>>;
}

/// A `T x N` matrix of demands, stored row-major. As a source it replays
/// its rows in order.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadMatrix {
    n: usize,
    data: Vec<f64>,
    cursor: usize,
}

impl LoadMatrix {
    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension {
                what: "load matrix width",
                expected: 1,
                got: 0,
            });
        }
        if data.len() % n != 0 {
            return Err(Error::Dimension {
                what: "load matrix data",
                expected: (data.len() / n + 1) * n,
                got: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(format!(
                "load of user {} at step {} must be finite and non-negative, got {}",
                k % n + 1,
                k / n + 1,
                data[k]
            )));
        }
        Ok(Self { n, data, cursor: 0 })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if let Some((t, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Parse {
                line: t as u64 + 1,
                message: format!("row has {} entries, expected {n}", r.len()),
            });
        }
        Self::from_flat(n, rows.concat())
    }

    pub fn zeros(steps: usize, n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; steps * n],
            cursor: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> usize {
        self.data.len() / self.n
    }

    /// Row `t` (0-based).
    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.n..(t + 1) * self.n]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    /// A fresh replay of the rows that borrows the matrix.
    pub fn replay(&self) -> MatrixReplay<'_> {
        MatrixReplay { matrix: self, next: 0 }
    }

    /// Restarts replay from the first row.
    pub fn rewind(&mut self) {
        self.cursor = 0;
    }

    /// First `steps` rows.
    pub fn truncated(&self, steps: usize) -> Self {
        let steps = steps.min(self.steps());
        Self {
            n: self.n,
            data: self.data[..steps * self.n].to_vec(),
            cursor: 0,
        }
    }
}

impl LoadSource for LoadMatrix {
    fn n(&self) -> usize {
        self.n
    }

    fn mode(&self) -> SourceMode {
        SourceMode::Precomputed
    }

    fn next_load(&mut self, _ctx: &StepContext<'_>) -> Result<Option<Vec<f64>>> {
        if self.cursor >= self.steps() {
            return Ok(None);
        }
        let row = self.row(self.cursor).to_vec();
        self.cursor += 1;
        Ok(Some(row))
    }
}

/// Borrowing replay of a [`LoadMatrix`], so several runs can share one matrix.
#[derive(Debug, Clone)]
pub struct MatrixReplay<'a> {
    matrix: &'a LoadMatrix,
    next: usize,
}

impl LoadSource for MatrixReplay<'_> {
    fn n(&self) -> usize {
        self.matrix.n
    }

    fn mode(&self) -> SourceMode {
        SourceMode::Precomputed
    }

    fn next_load(&mut self, _ctx: &StepContext<'_>) -> Result<Option<Vec<f64>>> {
        if self.next >= self.matrix.steps() {
            return Ok(None);
        }
        self.next += 1;
        Ok(Some(self.matrix.row(self.next - 1).to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip() {
        let m = LoadMatrix::from_rows(vec![vec![0.5, 0.0], vec![0.0, 1.2]]).unwrap();
        assert_eq!(m.steps(), 2);
        assert_eq!(m.row(1), &[0.0, 1.2]);
        assert_eq!(m.truncated(1).steps(), 1);
    }

    #[test]
    fn rejects_ragged_and_negative() {
        assert!(LoadMatrix::from_rows(vec![vec![0.5, 0.0], vec![0.0]]).is_err());
        assert!(LoadMatrix::from_rows(vec![vec![-0.5]]).is_err());
        assert!(LoadMatrix::from_flat(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn replay_yields_rows_then_none() {
        let m = LoadMatrix::from_rows(vec![vec![1.0], vec![2.0]]).unwrap();
        let h = Allocation::zeros(1);
        let a = ActiveSet::none(1);
        let ctx = StepContext {
            t: 1,
            allocation: &h,
            active: &a,
        };
        let mut r = m.replay();
        assert_eq!(r.next_load(&ctx).unwrap(), Some(vec![1.0]));
        assert_eq!(r.next_load(&ctx).unwrap(), Some(vec![2.0]));
        assert_eq!(r.next_load(&ctx).unwrap(), None);
        let mut owned = m.clone();
        owned.next_load(&ctx).unwrap();
        owned.rewind();
        assert_eq!(owned.next_load(&ctx).unwrap(), Some(vec![1.0]));
    }
}
