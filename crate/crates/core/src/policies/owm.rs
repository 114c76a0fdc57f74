//! Online work-maximizing greedy.
//!
//! Users sit in one of three buckets: allocated (A), waiting (B) or
//! inactive (I). The resource is split evenly over A. Allocated users that
//! go idle drop to I, idle users that come back wait in B, and B is promoted
//! wholesale once A is empty. Unlike the multiplicative-weight policies this
//! one reacts to the current step's feedback.

use super::Policy;
use crate::error::{check_len, Result};
use crate::model::{ActiveSet, Allocation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bucket {
    Allocated,
    Waiting,
    Inactive,
}

#[derive(Debug, Clone)]
pub struct OwmPolicy {
    buckets: Vec<Bucket>,
}

impl OwmPolicy {
    /// Everyone starts allocated.
    pub fn new(n: usize) -> Self {
        Self {
            buckets: vec![Bucket::Allocated; n],
        }
    }

    pub fn from_buckets(buckets: Vec<Bucket>) -> Self {
        Self { buckets }
    }

    pub fn buckets(&self) -> &[Bucket] {
        &self.buckets
    }

    fn transition(&mut self, active: &ActiveSet) {
        for (i, b) in self.buckets.iter_mut().enumerate() {
            *b = match (*b, active.contains(i)) {
                (Bucket::Allocated, false) | (Bucket::Waiting, false) => Bucket::Inactive,
                (Bucket::Inactive, true) => Bucket::Waiting,
                (b, _) => b,
            };
        }
        if !self.buckets.contains(&Bucket::Allocated) {
            for b in &mut self.buckets {
                if *b == Bucket::Waiting {
                    *b = Bucket::Allocated;
                }
            }
        }
    }
}

impl Policy for OwmPolicy {
    fn name(&self) -> &str {
        "owm"
    }

    fn n(&self) -> usize {
        self.buckets.len()
    }

    fn decide(&mut self, active: &ActiveSet) -> Result<Allocation> {
        check_len("active set", self.buckets.len(), active.len())?;
        self.transition(active);
        let count = self.buckets.iter().filter(|&&b| b == Bucket::Allocated).count();
        let share = if count == 0 { 0.0 } else { 1.0 / count as f64 };
        Ok(Allocation::from_raw(
            self.buckets
                .iter()
                .map(|&b| if b == Bucket::Allocated { share } else { 0.0 })
                .collect(),
        ))
    }

    fn fork(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}
