//! Domain types of the allocation model and the single-step queue dynamics.
//!
//! The resource has unit capacity. Each of the `N` users holds an SLA share
//! `beta(i)`, a backlog `q(i)` and, at every step, an allocation `h(i)`. A
//! step serves `min(h(i), load(i) + q(i))` and carries the rest over.

use crate::error::{check_len, Error, Result};

/// Slack allowed on "sums to at most one" checks.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Default threshold below which a backlog counts as empty.
pub const DEFAULT_EMPTY_TOLERANCE: f64 = 1e-12;

/// Largest admissible truncation parameter for the multiplicative-weight policies.
pub const MAX_EPSILON: f64 = 0.1;

/// Largest admissible step size for the multiplicative-weight policies.
pub const MAX_ETA: f64 = 1.0 / 3.0;

/// Per-user entitlements, as fractions of the unit resource.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaVector {
    beta: Vec<f64>,
}

impl SlaVector {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::Dimension {
                what: "SLA vector",
                expected: 1,
                got: 0,
            });
        }
        if let Some((i, b)) = beta.iter().enumerate().find(|(_, b)| !b.is_finite() || **b < 0.0) {
            return Err(Error::Domain(format!(
                "SLA of user {} must be a finite non-negative number, got {b}",
                i + 1
            )));
        }
        let total: f64 = beta.iter().sum();
        if total > 1.0 + SUM_TOLERANCE {
            return Err(Error::Domain(format!("SLA sum exceeds 1 ({total})")));
        }
        Ok(Self { beta })
    }

    /// Equal shares summing to one.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Self::new(Vec::new());
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.beta
    }

    pub fn total(&self) -> f64 {
        self.beta.iter().sum()
    }

    /// True when every entitlement clears the floor `2 epsilon / N` that the
    /// SLA-satisfaction guarantee of the multiplicative-weight policies needs.
    pub fn theory_applicable(&self, epsilon: f64) -> bool {
        let floor = 2.0 * epsilon / self.len() as f64;
        self.beta.iter().all(|&b| b >= floor)
    }

    /// Indices (0-based) of users below the `2 epsilon / N` floor.
    pub fn below_theory_floor(&self, epsilon: f64) -> Vec<usize> {
        let floor = 2.0 * epsilon / self.len() as f64;
        (0..self.len()).filter(|&i| self.beta[i] < floor).collect()
    }
}

impl std::ops::Index<usize> for SlaVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.beta[i]
    }
}

/// Per-user resource shares for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation(Vec<f64>);

impl Allocation {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        let a = Self(h);
        a.validate()?;
        Ok(a)
    }

    /// Wraps shares produced internally without re-validating them.
    pub(crate) fn from_raw(h: Vec<f64>) -> Self {
        Self(h)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((i, h)) = self.0.iter().enumerate().find(|(_, h)| !h.is_finite() || **h < 0.0) {
            return Err(Error::Invariant(format!(
                "allocation of user {} is {h}, expected a finite non-negative share",
                i + 1
            )));
        }
        let total = self.total();
        if total > 1.0 + SUM_TOLERANCE {
            return Err(Error::Invariant(format!(
                "allocation sums to {total}, exceeding the unit capacity"
            )));
        }
        Ok(())
    }

    /// Checks membership of the truncated simplex: shares sum to one and
    /// each is at least `epsilon / N`.
    pub fn in_truncated_simplex(&self, epsilon: f64) -> bool {
        let floor = epsilon / self.len() as f64;
        (self.total() - 1.0).abs() <= 1e-9 && self.0.iter().all(|&h| h >= floor - 1e-12)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for Allocation {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Per-user backlog, in units of resource-time.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueState(Vec<f64>);

impl QueueState {
    pub fn empty(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn new(q: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = q.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::Domain(format!(
                "backlog of user {} must be finite and non-negative, got {v}",
                i + 1
            )));
        }
        Ok(Self(q))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn two_norm(&self) -> f64 {
        self.0.iter().map(|q| q * q).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<usize> for QueueState {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// The users whose backlog is non-empty at a decision instant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActiveSet(Vec<bool>);

impl ActiveSet {
    pub fn from_flags(flags: Vec<bool>) -> Self {
        Self(flags)
    }

    /// Builds an active set over `n` users from 0-based member indices.
    pub fn from_members(n: usize, members: &[usize]) -> Self {
        let mut flags = vec![false; n];
        for &i in members {
            flags[i] = true;
        }
        Self(flags)
    }

    pub fn none(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn all(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&a| a).count()
    }

    pub fn is_none_active(&self) -> bool {
        !self.0.iter().any(|&a| a)
    }

    /// 0-based indices of active users in increasing order.
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| i)
    }

    pub fn as_flags(&self) -> &[bool] {
        &self.0
    }
}

/// Parameters shared by the multiplicative-weight policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyParams {
    pub epsilon: f64,
    pub eta: f64,
    pub lambda: f64,
    pub empty_tolerance: f64,
    /// False when `lambda` was overridden instead of derived as `epsilon^2 / (8N)`.
    pub canonical_lambda: bool,
}

impl PolicyParams {
    /// Validates `epsilon` in (0, 1/10] and `eta` in (0, 1/3] and derives the boost
    /// increment `lambda = epsilon^2 / (8 N)`.
    pub fn new(epsilon: f64, eta: f64, n: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= MAX_EPSILON) {
            return Err(Error::Domain(format!(
                "epsilon must lie in (0, {MAX_EPSILON}], got {epsilon}"
            )));
        }
        if !(eta > 0.0 && eta <= MAX_ETA) {
            return Err(Error::Domain(format!("eta must lie in (0, 1/3], got {eta}")));
        }
        if n == 0 {
            return Err(Error::Dimension {
                what: "policy parameters",
                expected: 1,
                got: 0,
            });
        }
        Ok(Self {
            epsilon,
            eta,
            lambda: canonical_lambda(epsilon, n),
            empty_tolerance: DEFAULT_EMPTY_TOLERANCE,
            canonical_lambda: true,
        })
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::Domain(format!(
                "lambda must be finite and non-negative, got {lambda}"
            )));
        }
        self.canonical_lambda = lambda == self.lambda;
        self.lambda = lambda;
        Ok(self)
    }

    pub fn with_empty_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::Domain(format!(
                "empty tolerance must be finite and non-negative, got {tol}"
            )));
        }
        self.empty_tolerance = tol;
        Ok(self)
    }
}

pub fn canonical_lambda(epsilon: f64, n: usize) -> f64 {
    epsilon * epsilon / (8.0 * n as f64)
}

/// Applies one step of the queue dynamics: returns the work done by each user
/// and the backlog carried into the next step.
pub fn step(q_before: &QueueState, h: &Allocation, load: &[f64]) -> Result<(Vec<f64>, QueueState)> {
    let n = q_before.len();
    check_len("allocation", n, h.len())?;
    check_len("load vector", n, load.len())?;
    let mut work = Vec::with_capacity(n);
    let mut q_after = Vec::with_capacity(n);
    for i in 0..n {
        let pending = load[i] + q_before[i];
        work.push(h[i].min(pending));
        q_after.push((pending - h[i]).max(0.0));
    }
    Ok((work, QueueState(q_after)))
}

/// Users with backlog strictly above `tol`.
pub fn feedback(q: &QueueState, tol: f64) -> ActiveSet {
    ActiveSet(q.as_slice().iter().map(|&v| v > tol).collect())
}

/// Validates a load vector: correct length, finite, non-negative.
pub fn check_load(load: &[f64], n: usize, t: usize) -> Result<()> {
    check_len("load vector", n, load.len())?;
    if let Some((i, v)) = load.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::Domain(format!(
            "load of user {} at step {t} must be finite and non-negative, got {v}",
            i + 1
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[f64]) -> QueueState {
        QueueState::new(v.to_vec()).unwrap()
    }

    fn h(v: &[f64]) -> Allocation {
        Allocation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn step_partial_service() {
        let (w, next) = step(&q(&[0.0]), &h(&[0.5]), &[1.0]).unwrap();
        assert_eq!(w, vec![0.5]);
        assert_eq!(next.as_slice(), &[0.5]);
    }

    #[test]
    fn step_full_drain() {
        let (w, next) = step(&q(&[0.2]), &h(&[1.0]), &[0.3]).unwrap();
        assert_eq!(w, vec![0.5]);
        assert_eq!(next.as_slice(), &[0.0]);
    }

    #[test]
    fn step_idle_system() {
        let (w, next) = step(&q(&[0.0, 0.0]), &h(&[0.5, 0.5]), &[0.0, 0.0]).unwrap();
        assert_eq!(w, vec![0.0, 0.0]);
        assert_eq!(next.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn step_rejects_mismatched_lengths() {
        let err = step(&q(&[0.0, 0.0]), &h(&[0.5]), &[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
        let err = step(&q(&[0.0]), &h(&[0.5]), &[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn feedback_examples() {
        let a = feedback(&q(&[0.0, 1e-15, 0.3]), 1e-12);
        assert_eq!(a.members().collect::<Vec<_>>(), vec![2]);
        assert!(feedback(&q(&[0.0, 0.0]), 0.5).is_none_active());
        let a = feedback(&q(&[0.1, 0.1]), 0.0);
        assert_eq!(a.members().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn sla_validation() {
        assert!(SlaVector::new(vec![]).is_err());
        assert!(SlaVector::new(vec![0.6, 0.6]).is_err());
        assert!(SlaVector::new(vec![-0.1, 0.5]).is_err());
        let s = SlaVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(s.theory_applicable(0.1));
        let s = SlaVector::new(vec![0.005, 0.3, 0.3, 0.3]).unwrap();
        assert!(!s.theory_applicable(0.1));
        assert_eq!(s.below_theory_floor(0.1), vec![0]);
    }

    #[test]
    fn allocation_validation() {
        assert!(Allocation::new(vec![0.6, 0.6]).is_err());
        assert!(Allocation::new(vec![-0.1, 0.5]).is_err());
        assert!(Allocation::new(vec![f64::NAN]).is_err());
        let a = Allocation::new(vec![0.5, 0.5]).unwrap();
        assert!(a.in_truncated_simplex(0.1));
        let a = Allocation::new(vec![0.01, 0.99]).unwrap();
        assert!(!a.in_truncated_simplex(0.1));
    }

    #[test]
    fn params_derive_lambda() {
        let p = PolicyParams::new(0.1, 1.0 / 3.0, 4).unwrap();
        assert!((p.lambda - 0.01 / 32.0).abs() < 1e-18);
        assert!(p.canonical_lambda);
        let p = p.with_lambda(0.5).unwrap();
        assert!(!p.canonical_lambda);
        assert!(PolicyParams::new(0.2, 0.3, 2).is_err());
        assert!(PolicyParams::new(0.05, 0.4, 2).is_err());
        assert!(PolicyParams::new(0.0, 0.3, 2).is_err());
    }
}
