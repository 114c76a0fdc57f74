//! Adaptive two-user load sequence that forces any deterministic policy
//! with empty/non-empty feedback to accumulate backlog.
//!
//! Every load vector sums to one, so an offline schedule can finish all of
//! it. The run is split into phases. Each phase starts with one queue
//! loaded and the other (the watched one) empty, and ends in the same kind
//! of state with at least 1/4 more total backlog.
//!
//! While both queues stay non-empty the policy sees the same feedback
//! whatever the loads are. The adversary keeps a shadow copy of the policy,
//! feeds it the observed feedback to stay in lock-step, and forks it at the
//! start of each phase to see how the allocation will evolve under "both
//! active". That prediction decides the branch:
//!
//! * if the loaded side's share is predicted to drop to 1/2 at some step,
//!   the loads mirror the allocation until then and put everything on the
//!   loaded side at that step;
//! * otherwise everything goes on the watched side so the loaded queue
//!   drains, and a final balancing step leaves the loaded side with a tiny
//!   remainder that the next step clears while the other side grows.

use super::{LoadSource, SourceMode, StepContext};
use crate::error::{Error, Result};
use crate::model::{self, ActiveSet, Allocation, QueueState, DEFAULT_EMPTY_TOLERANCE};
use crate::policies::Policy;

/// Minimum backlog growth per phase.
pub const PHASE_GROWTH: f64 = 0.25;
const GROWTH_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseBoundary {
    /// 0 for the opening step.
    pub phase: usize,
    /// Last step of the phase.
    pub t: usize,
    pub backlog: f64,
    /// User (0-based) holding the backlog afterwards.
    pub loaded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stage {
    Initial,
    Open {
        loaded: usize,
    },
    /// Mirror the allocation until step `until`, then load the loaded side.
    Echo {
        loaded: usize,
        until: usize,
    },
    /// Everything on the loaded side until the watched queue empties.
    Flood {
        loaded: usize,
    },
    /// Everything on the watched side while the loaded queue drains.
    Drain {
        loaded: usize,
    },
    /// Everything on the watched side until the loaded queue empties.
    Close {
        loaded: usize,
    },
}

pub struct Adversary {
    shadow: Box<dyn Policy>,
    q: QueueState,
    tol: f64,
    stage: Stage,
    boundaries: Vec<PhaseBoundary>,
    last_backlog: f64,
}

impl std::fmt::Debug for Adversary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Adversary")
            .field("policy", &self.shadow.name())
            .field("q", &self.q)
            .field("stage", &self.stage)
            .field("phases", &self.boundaries.len())
            .finish()
    }
}

impl Adversary {
    /// Builds an adversary against `policy`, which must not have been stepped yet.
    pub fn new(policy: &dyn Policy) -> Result<Self> {
        Self::with_tolerance(policy, DEFAULT_EMPTY_TOLERANCE)
    }

    pub fn with_tolerance(policy: &dyn Policy, tol: f64) -> Result<Self> {
        if policy.n() != 2 {
            return Err(Error::Unsupported(format!(
                "the adversary drives exactly 2 users, the policy has {}",
                policy.n()
            )));
        }
        Ok(Self {
            shadow: policy.fork(),
            q: QueueState::empty(2),
            tol,
            stage: Stage::Initial,
            boundaries: Vec::new(),
            last_backlog: 0.0,
        })
    }

    /// Completed phases, including the opening step.
    pub fn boundaries(&self) -> &[PhaseBoundary] {
        &self.boundaries
    }

    /// Backlog the adversary has tracked so far.
    pub fn backlog(&self) -> f64 {
        self.q.total()
    }

    /// First step `t + k` (k >= 1) at which the loaded side's share is
    /// predicted to be at most 1/2, assuming both queues stay non-empty.
    fn predict_echo_end(&self, t: usize, loaded: usize, horizon: usize) -> Result<Option<usize>> {
        let mut fork = self.shadow.fork();
        let both = ActiveSet::all(2);
        for k in 1..=horizon {
            let h = fork.decide(&both)?;
            if h[loaded] <= 0.5 {
                return Ok(Some(t + k));
            }
        }
        Ok(None)
    }

    fn choose(&mut self, t: usize, h: &Allocation) -> Result<[f64; 2]> {
        let mut load = [0.0; 2];
        match self.stage {
            Stage::Initial => {
                let side = if h[0] <= h[1] { 0 } else { 1 };
                load[side] = 1.0;
            }
            Stage::Open { loaded } => {
                let watched = 1 - loaded;
                if h[loaded] <= 0.5 {
                    load[loaded] = 1.0;
                    self.stage = Stage::Flood { loaded };
                } else {
                    let eps = (0.125f64).min((1.0 - h[watched]) / 2.0);
                    load[watched] = h[watched] + eps;
                    load[loaded] = 1.0 - load[watched];
                    let horizon = (2.0 * self.q.total()).floor() as usize + 4;
                    self.stage = match self.predict_echo_end(t, loaded, horizon)? {
                        Some(until) => Stage::Echo { loaded, until },
                        None => Stage::Drain { loaded },
                    };
                }
            }
            Stage::Echo { loaded, until } => {
                let watched = 1 - loaded;
                if t < until {
                    load[watched] = h[watched];
                    load[loaded] = 1.0 - h[watched];
                } else {
                    if h[loaded] > 0.5 {
                        return Err(Error::Invariant(format!(
                            "adversary prediction failed at step {t}: share {} above 1/2",
                            h[loaded]
                        )));
                    }
                    load[loaded] = 1.0;
                    self.stage = Stage::Flood { loaded };
                }
            }
            Stage::Flood { loaded } => load[loaded] = 1.0,
            Stage::Drain { loaded } => {
                let watched = 1 - loaded;
                let ql = self.q[loaded];
                let eps = (0.125f64).min(ql / 2.0);
                if ql <= h[loaded] + eps {
                    load[loaded] = h[loaded] - ql + eps;
                    load[watched] = 1.0 - load[loaded];
                    self.stage = Stage::Close { loaded };
                } else {
                    load[watched] = 1.0;
                }
            }
            Stage::Close { loaded } => load[1 - loaded] = 1.0,
        }
        Ok(load)
    }

    /// Closes a phase if the side that is supposed to empty has emptied.
    fn maybe_close(&mut self, t: usize) -> Result<()> {
        let emptied = match self.stage {
            Stage::Initial => None,
            Stage::Flood { loaded } => Some(1 - loaded),
            Stage::Close { loaded } => Some(loaded),
            _ => return Ok(()),
        };
        if let Some(side) = emptied {
            if self.q[side] > self.tol {
                return Ok(());
            }
        }
        let backlog = self.q.total();
        let phase = self.boundaries.len();
        if backlog < self.last_backlog + PHASE_GROWTH - GROWTH_SLACK {
            return Err(Error::Invariant(format!(
                "adversary phase {phase} ended at step {t} with backlog {backlog}, \
                 less than {} + 1/4",
                self.last_backlog
            )));
        }
        let loaded = if self.q[0] > self.q[1] { 0 } else { 1 };
        if self.q[1 - loaded] > self.tol {
            return Err(Error::Invariant(format!(
                "adversary phase {phase} ended at step {t} with both queues non-empty"
            )));
        }
        self.boundaries.push(PhaseBoundary {
            phase,
            t,
            backlog,
            loaded,
        });
        self.last_backlog = backlog;
        self.stage = Stage::Open { loaded };
        Ok(())
    }
}

impl LoadSource for Adversary {
    fn n(&self) -> usize {
        2
    }

    fn mode(&self) -> SourceMode {
        SourceMode::Adaptive
    }

    fn next_load(&mut self, ctx: &StepContext<'_>) -> Result<Option<Vec<f64>>> {
        let t = ctx.t;
        if ctx.active != &model::feedback(&self.q, self.tol) {
            return Err(Error::Invariant(format!(
                "adversary queue tracking diverged from the simulator at step {t}"
            )));
        }
        let mirrored = self.shadow.decide(ctx.active)?;
        if mirrored.as_slice() != ctx.allocation.as_slice() {
            return Err(Error::Invariant(format!(
                "policy '{}' is not a deterministic function of its feedback (step {t})",
                self.shadow.name()
            )));
        }
        let load = self.choose(t, ctx.allocation)?;
        let (_, next) = model::step(&self.q, ctx.allocation, &load)?;
        self.q = next;
        self.maybe_close(t)?;
        Ok(Some(load.to_vec()))
    }
}
