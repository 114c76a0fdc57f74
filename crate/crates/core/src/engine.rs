//! The feedback, decision, load, update loop.

use crate::error::{Error, Result};
use crate::model::{self, QueueState, SlaVector, DEFAULT_EMPTY_TOLERANCE};
use crate::policies::Policy;
use crate::trace::SimulationTrace;
use crate::workloads::{LoadSource, StepContext};

/// Knobs of a simulation run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub empty_tolerance: f64,
    /// Keep one trace row every `stride` steps.
    pub stride: usize,
    /// Keep every load vector even when rows are thinned.
    pub keep_loads: bool,
    /// Backlog in front of step 1; empty when `None`.
    pub initial_queue: Option<QueueState>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            empty_tolerance: DEFAULT_EMPTY_TOLERANCE,
            stride: 1,
            keep_loads: false,
            initial_queue: None,
        }
    }
}

/// Runs `policy` against `source` for `steps` steps.
///
/// Each step computes the active set from the current backlog, asks the
/// policy for an allocation, then asks the source for the step's load
/// (adaptive sources see the allocation) and applies the queue update.
pub fn run(
    policy: &mut dyn Policy,
    source: &mut dyn LoadSource,
    sla: &SlaVector,
    steps: usize,
    opts: &RunOptions,
) -> Result<SimulationTrace> {
    let n = sla.len();
    if steps == 0 {
        return Err(Error::Config("a run needs at least one step".into()));
    }
    if policy.n() != n {
        return Err(Error::Dimension {
            what: "policy user count",
            expected: n,
            got: policy.n(),
        });
    }
    if source.n() != n {
        return Err(Error::Dimension {
            what: "load source user count",
            expected: n,
            got: source.n(),
        });
    }
    let mut q = opts.initial_queue.clone().unwrap_or_else(|| QueueState::empty(n));
    let mut builder = SimulationTrace::builder(policy.name(), n, q.clone(), opts.stride)?
        .sla(Some(sla.clone()))
        .params(policy.params())
        .keep_loads(opts.keep_loads);

    for t in 1..=steps {
        let active = model::feedback(&q, opts.empty_tolerance);
        let h = policy.decide(&active)?;
        if h.len() != n {
            return Err(Error::Dimension {
                what: "policy allocation",
                expected: n,
                got: h.len(),
            });
        }
        h.validate()
            .map_err(|e| Error::Invariant(format!("{} at step {t}: {e}", policy.name())))?;
        let ctx = StepContext {
            t,
            allocation: &h,
            active: &active,
        };
        let load = source.next_load(&ctx)?.ok_or(Error::SourceExhausted { t })?;
        model::check_load(&load, n, t)?;
        let (work, next) = model::step(&q, &h, &load)?;
        builder.push(&active, h.as_slice(), &work, &next, &load)?;
        q = next;
    }
    Ok(builder.finish())
}
