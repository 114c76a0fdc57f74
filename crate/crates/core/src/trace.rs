//! Columnar storage of a simulation run.

use crate::error::{check_len, Error, Result};
use crate::model::{ActiveSet, PolicyParams, QueueState, SlaVector};
use crate::workloads::LoadMatrix;

/// One retained step of a run, borrowed from the trace.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord<'a> {
    pub t: usize,
    pub active: &'a [bool],
    pub allocation: &'a [f64],
    pub work: &'a [f64],
    pub queue_after: &'a [f64],
    pub load: &'a [f64],
}

/// Per-step record of a run. Rows are kept for `t = 1, 1 + stride, ...`
/// and for the last step; totals and the final queue always cover every
/// step.
#[derive(Debug, Clone)]
pub struct SimulationTrace {
    pub policy: String,
    pub sla: Option<SlaVector>,
    pub params: Option<PolicyParams>,
    pub stride: usize,
    n: usize,
    steps: usize,
    initial_queue: QueueState,
    t: Vec<usize>,
    active: Vec<bool>,
    allocation: Vec<f64>,
    work: Vec<f64>,
    queue_after: Vec<f64>,
    load: Vec<f64>,
    cumulative: Vec<f64>,
    queue_norm: Vec<f64>,
    work_per_user: Vec<f64>,
    load_per_user: Vec<f64>,
    total_work: f64,
    final_queue: QueueState,
    full_loads: Option<Vec<f64>>,
}

impl SimulationTrace {
    pub fn builder(
        policy: impl Into<String>,
        n: usize,
        initial_queue: QueueState,
        stride: usize,
    ) -> Result<TraceBuilder> {
        if stride == 0 {
            return Err(Error::Config("trace stride must be at least 1".into()));
        }
        check_len("initial queue", n, initial_queue.len())?;
        Ok(TraceBuilder {
            trace: SimulationTrace {
                policy: policy.into(),
                sla: None,
                params: None,
                stride,
                n,
                steps: 0,
                final_queue: initial_queue.clone(),
                initial_queue,
                t: Vec::new(),
                active: Vec::new(),
                allocation: Vec::new(),
                work: Vec::new(),
                queue_after: Vec::new(),
                load: Vec::new(),
                cumulative: Vec::new(),
                queue_norm: Vec::new(),
                work_per_user: vec![0.0; n],
                load_per_user: vec![0.0; n],
                total_work: 0.0,
                full_loads: None,
            },
            held: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of simulated steps `T`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// True when every step was retained.
    pub fn is_full(&self) -> bool {
        self.stride == 1
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn record(&self, k: usize) -> StepRecord<'_> {
        let n = self.n;
        let r = k * n..(k + 1) * n;
        StepRecord {
            t: self.t[k],
            active: &self.active[r.clone()],
            allocation: &self.allocation[r.clone()],
            work: &self.work[r.clone()],
            queue_after: &self.queue_after[r.clone()],
            load: &self.load[r],
        }
    }

    pub fn records(&self) -> impl Iterator<Item = StepRecord<'_>> + '_ {
        (0..self.len()).map(|k| self.record(k))
    }

    /// Step indices of the retained rows.
    pub fn step_indices(&self) -> &[usize] {
        &self.t
    }

    /// Total work done up to and including each retained step.
    pub fn cumulative_work(&self) -> &[f64] {
        &self.cumulative
    }

    /// Queue 2-norm after each retained step.
    pub fn queue_norms(&self) -> &[f64] {
        &self.queue_norm
    }

    pub fn initial_queue(&self) -> &QueueState {
        &self.initial_queue
    }

    pub fn final_queue(&self) -> &QueueState {
        &self.final_queue
    }

    pub fn work_per_user(&self) -> &[f64] {
        &self.work_per_user
    }

    pub fn load_per_user(&self) -> &[f64] {
        &self.load_per_user
    }

    /// Summed step by step, so it equals the last cumulative-work value bit for bit.
    pub fn total_work(&self) -> f64 {
        self.total_work
    }

    pub fn total_load(&self) -> f64 {
        self.load_per_user.iter().sum()
    }

    /// Queue in front of step `t` (1-based), which is the queue after
    /// `t - 1`. Needs a full trace.
    pub fn queue_before(&self, t: usize) -> Result<&[f64]> {
        self.require_full("queue lookup")?;
        if t == 0 || t > self.steps {
            return Err(Error::Domain(format!("step {t} outside 1..={}", self.steps)));
        }
        if t == 1 {
            Ok(self.initial_queue.as_slice())
        } else {
            Ok(self.record(t - 2).queue_after)
        }
    }

    /// The load matrix the run consumed, when every load vector was kept.
    pub fn loads(&self) -> Option<LoadMatrix> {
        if let Some(flat) = &self.full_loads {
            return LoadMatrix::from_flat(self.n, flat.clone()).ok();
        }
        if self.is_full() {
            return LoadMatrix::from_flat(self.n, self.load.clone()).ok();
        }
        None
    }

    pub(crate) fn require_full(&self, what: &str) -> Result<()> {
        if !self.is_full() {
            return Err(Error::Unsupported(format!(
                "{what} needs a full trace, this one keeps every {}th step",
                self.stride
            )));
        }
        Ok(())
    }

    /// Checks that total work plus final backlog equals initial backlog plus
    /// total load, up to `rel_tol` relative to the larger side.
    pub fn check_conservation(&self, rel_tol: f64) -> Result<()> {
        let lhs = self.total_work() + self.final_queue.total();
        let rhs = self.total_load() + self.initial_queue.total();
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        if (lhs - rhs).abs() > rel_tol * scale {
            return Err(Error::Invariant(format!(
                "conservation broken: work + backlog = {lhs}, load = {rhs}"
            )));
        }
        Ok(())
    }
}

/// Appends steps to a trace in order.
#[derive(Debug)]
pub struct TraceBuilder {
    trace: SimulationTrace,
    /// Latest step skipped by the stride, kept in case it turns out to be the last.
    held: Option<Row>,
}

#[derive(Debug)]
struct Row {
    t: usize,
    active: Vec<bool>,
    allocation: Vec<f64>,
    work: Vec<f64>,
    queue_after: QueueState,
    load: Vec<f64>,
    cumulative: f64,
}

impl SimulationTrace {
    fn append(&mut self, row: Row) {
        self.t.push(row.t);
        self.active.extend_from_slice(&row.active);
        self.allocation.extend_from_slice(&row.allocation);
        self.work.extend_from_slice(&row.work);
        self.queue_after.extend_from_slice(row.queue_after.as_slice());
        self.load.extend_from_slice(&row.load);
        self.cumulative.push(row.cumulative);
        self.queue_norm.push(row.queue_after.two_norm());
    }
}

impl TraceBuilder {
    pub fn sla(mut self, sla: Option<SlaVector>) -> Self {
        self.trace.sla = sla;
        self
    }

    pub fn params(mut self, params: Option<PolicyParams>) -> Self {
        self.trace.params = params;
        self
    }

    /// Keep every load vector even when rows are thinned.
    pub fn keep_loads(mut self, keep: bool) -> Self {
        self.trace.full_loads = keep.then(Vec::new);
        self
    }

    pub fn push(
        &mut self,
        active: &ActiveSet,
        allocation: &[f64],
        work: &[f64],
        queue_after: &QueueState,
        load: &[f64],
    ) -> Result<()> {
        let tr = &mut self.trace;
        let n = tr.n;
        check_len("trace active set", n, active.len())?;
        check_len("trace allocation", n, allocation.len())?;
        check_len("trace work", n, work.len())?;
        check_len("trace queue", n, queue_after.len())?;
        check_len("trace load", n, load.len())?;
        tr.steps += 1;
        let t = tr.steps;
        for i in 0..n {
            tr.work_per_user[i] += work[i];
            tr.load_per_user[i] += load[i];
            tr.total_work += work[i];
        }
        if let Some(fl) = tr.full_loads.as_mut() {
            fl.extend_from_slice(load);
        }
        let row = Row {
            t,
            active: active.as_flags().to_vec(),
            allocation: allocation.to_vec(),
            work: work.to_vec(),
            queue_after: queue_after.clone(),
            load: load.to_vec(),
            cumulative: tr.total_work,
        };
        if (t - 1) % tr.stride == 0 {
            self.held = None;
            tr.append(row);
        } else {
            self.held = Some(row);
        }
        tr.final_queue = queue_after.clone();
        Ok(())
    }

    pub fn finish(mut self) -> SimulationTrace {
        if let Some(row) = self.held.take() {
            self.trace.append(row);
        }
        self.trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builder(stride: usize) -> TraceBuilder {
        SimulationTrace::builder("test", 2, QueueState::empty(2), stride).unwrap()
    }

    fn push(b: &mut TraceBuilder, w: f64) {
        let q = QueueState::new(vec![1.0, 0.0]).unwrap();
        b.push(&ActiveSet::all(2), &[0.5, 0.5], &[w, 0.0], &q, &[w, 0.0])
            .unwrap();
    }

    #[test]
    fn stride_thins_rows_but_not_totals() {
        let mut b = builder(3);
        for _ in 0..7 {
            push(&mut b, 0.5);
        }
        let tr = b.finish();
        assert_eq!(tr.steps(), 7);
        assert_eq!(tr.step_indices(), &[1, 4, 7]);
        assert_eq!(tr.cumulative_work(), &[0.5, 2.0, 3.5]);
        assert_eq!(tr.total_work(), 3.5);
        let mut b = builder(3);
        for _ in 0..8 {
            push(&mut b, 0.5);
        }
        let tr = b.finish();
        assert_eq!(tr.step_indices(), &[1, 4, 7, 8]);
        assert_eq!(tr.cumulative_work().last(), Some(&tr.total_work()));
        assert!(tr.loads().is_none());
        assert!(tr.queue_before(2).is_err());
    }

    #[test]
    fn full_trace_exposes_loads_and_queues() {
        let mut b = builder(1);
        push(&mut b, 0.25);
        push(&mut b, 0.5);
        let tr = b.finish();
        assert_eq!(tr.queue_before(1).unwrap(), &[0.0, 0.0]);
        assert_eq!(tr.queue_before(2).unwrap(), &[1.0, 0.0]);
        let loads = tr.loads().unwrap();
        assert_eq!(loads.steps(), 2);
        assert_eq!(loads.row(1), &[0.5, 0.0]);
        assert_eq!(tr.record(1).t, 2);
    }

    #[test]
    fn kept_loads_survive_thinning() {
        let mut b = builder(2).keep_loads(true);
        for _ in 0..3 {
            push(&mut b, 1.0);
        }
        let tr = b.finish();
        assert_eq!(tr.loads().unwrap().steps(), 3);
    }

    #[test]
    fn zero_stride_is_rejected() {
        let r = SimulationTrace::builder("x", 1, QueueState::empty(1), 0);
        assert!(r.is_err());
    }
}
