//! Multiplicative-weight allocation on the truncated simplex.

use super::monitor::{LemmaMonitor, LemmaReport, MonitorMode, UpdateView};
use super::Policy;
use crate::error::{check_len, Error, Result};
use crate::model::{ActiveSet, Allocation, PolicyParams, SlaVector};
use crate::projection::project_truncated_simplex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwVariant {
    /// Users below their SLA get the extra boost.
    Basic,
    /// Users below `(1 - epsilon)` times their SLA share among active users get the extra boost.
    Proportional,
}

/// Multiplicative-weight policy.
///
/// Each step plays the current allocation `h_t`, then folds the step's
/// active set into `h_{t+1}`: active users are boosted by `exp(eta)`, those
/// below threshold by `exp(eta (1 + lambda))`, inactive ones not at all, and
/// the result is projected back onto the truncated simplex.
#[derive(Debug, Clone)]
pub struct MwPolicy {
    h: Vec<f64>,
    sla: SlaVector,
    params: PolicyParams,
    variant: MwVariant,
    monitor: LemmaMonitor,
    growth_preconditions: bool,
    t: usize,
}

impl MwPolicy {
    /// Starts from the uniform allocation.
    pub fn new(sla: SlaVector, params: PolicyParams, variant: MwVariant) -> Result<Self> {
        let n = sla.len();
        let expected = crate::model::canonical_lambda(params.epsilon, n);
        if params.canonical_lambda && params.lambda != expected {
            return Err(Error::Domain(format!(
                "lambda {} was derived for a different user count than {n}",
                params.lambda
            )));
        }
        let growth_preconditions = sla.theory_applicable(params.epsilon) && params.canonical_lambda;
        Ok(Self {
            h: vec![1.0 / n as f64; n],
            sla,
            params,
            variant,
            monitor: LemmaMonitor::default(),
            growth_preconditions,
            t: 0,
        })
    }

    pub fn with_monitor(mut self, mode: MonitorMode) -> Self {
        self.monitor = LemmaMonitor::new(mode);
        self
    }

    /// Replaces the starting allocation, which must lie in the truncated simplex.
    pub fn with_initial(mut self, h: Vec<f64>) -> Result<Self> {
        check_len("initial allocation", self.h.len(), h.len())?;
        let a = Allocation::new(h)?;
        if !a.in_truncated_simplex(self.params.epsilon) {
            return Err(Error::Domain(
                "initial allocation must sum to 1 with every share at least epsilon/N".into(),
            ));
        }
        self.h = a.into_inner();
        Ok(self)
    }

    pub fn variant(&self) -> MwVariant {
        self.variant
    }

    /// The allocation the next call to `decide` will play.
    pub fn current(&self) -> &[f64] {
        &self.h
    }

    /// Users of `active` that receive the extra `lambda` boost.
    pub fn boosted(&self, active: &ActiveSet) -> Vec<bool> {
        let n = self.h.len();
        match self.variant {
            MwVariant::Basic => (0..n).map(|i| active.contains(i) && self.h[i] < self.sla[i]).collect(),
            MwVariant::Proportional => {
                let share: f64 = active.members().map(|i| self.sla[i]).sum();
                if share <= 0.0 {
                    return vec![false; n];
                }
                let scale = (1.0 - self.params.epsilon) / share;
                (0..n)
                    .map(|i| active.contains(i) && self.h[i] < scale * self.sla[i])
                    .collect()
            }
        }
    }

    /// Applies one update with the given active set and returns the new allocation.
    pub fn update(&mut self, active: &ActiveSet) -> Result<&[f64]> {
        check_len("active set", self.h.len(), active.len())?;
        self.t += 1;
        let boosted = self.boosted(active);
        let PolicyParams {
            epsilon, eta, lambda, ..
        } = self.params;
        let grown: Vec<f64> = (0..self.h.len())
            .map(|i| {
                let g = if boosted[i] {
                    1.0 + lambda
                } else if active.contains(i) {
                    1.0
                } else {
                    0.0
                };
                self.h[i] * (eta * g).exp()
            })
            .collect();
        let next = project_truncated_simplex(&grown, epsilon)?.into_vec();
        if self.monitor.mode() != MonitorMode::Off {
            self.monitor.observe(&UpdateView {
                t: self.t,
                before: &self.h,
                after: &next,
                active: active.as_flags(),
                boosted: &boosted,
                proportional: self.variant == MwVariant::Proportional,
                epsilon,
                eta,
                lambda,
                growth_preconditions: self.growth_preconditions,
                canonical: self.params.canonical_lambda,
            })?;
        }
        self.h = next;
        Ok(&self.h)
    }
}

impl Policy for MwPolicy {
    fn name(&self) -> &str {
        match self.variant {
            MwVariant::Basic => "alg1",
            MwVariant::Proportional => "alg2",
        }
    }

    fn n(&self) -> usize {
        self.h.len()
    }

    fn decide(&mut self, active: &ActiveSet) -> Result<Allocation> {
        let played = Allocation::from_raw(self.h.clone());
        self.update(active)?;
        Ok(played)
    }

    fn fork(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }

    fn params(&self) -> Option<PolicyParams> {
        Some(self.params)
    }

    fn lemma_report(&self) -> Option<&LemmaReport> {
        (self.monitor.mode() != MonitorMode::Off).then(|| self.monitor.report())
    }
}
