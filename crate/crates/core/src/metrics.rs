//! Post-hoc analysis of simulation traces.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::SlaVector;
use crate::trace::SimulationTrace;
use crate::workloads::LoadMatrix;

/// Longest horizon evaluated window by window with stride 1.
pub const FULL_STRIDE_HORIZON: usize = 20_000;

/// A scalar series indexed by step.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    pub name: String,
    pub t: Vec<usize>,
    pub values: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
}

impl SeriesReport {
    fn new(name: String, t: Vec<usize>, values: Vec<f64>) -> Self {
        Self {
            name,
            t,
            values,
            metadata: BTreeMap::new(),
        }
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.values.is_empty()).then(|| self.values.iter().sum::<f64>() / self.values.len() as f64)
    }
}

fn with_policy(mut r: SeriesReport, trace: &SimulationTrace) -> SeriesReport {
    r.metadata.insert("policy".into(), trace.policy.clone());
    if let Some(p) = trace.params {
        r.metadata.insert("epsilon".into(), p.epsilon.to_string());
        r.metadata.insert("eta".into(), p.eta.to_string());
    }
    r
}

/// Total work done through each retained step.
pub fn cumulative_work(trace: &SimulationTrace) -> SeriesReport {
    let r = SeriesReport::new(
        format!("cumulative_work_{}", trace.policy),
        trace.step_indices().to_vec(),
        trace.cumulative_work().to_vec(),
    );
    with_policy(r, trace)
}

/// `cumulative_work(a) - cumulative_work(b)` step by step.
pub fn work_difference(a: &SimulationTrace, b: &SimulationTrace) -> Result<SeriesReport> {
    if a.n() != b.n() {
        return Err(Error::Dimension {
            what: "work difference user count",
            expected: a.n(),
            got: b.n(),
        });
    }
    if a.steps() != b.steps() || a.stride != b.stride {
        return Err(Error::Dimension {
            what: "work difference horizon",
            expected: a.steps(),
            got: b.steps(),
        });
    }
    let values = a
        .cumulative_work()
        .iter()
        .zip(b.cumulative_work())
        .map(|(x, y)| x - y)
        .collect();
    let mut r = SeriesReport::new(
        format!("work_difference_{}_minus_{}", a.policy, b.policy),
        a.step_indices().to_vec(),
        values,
    );
    r.metadata.insert("a".into(), a.policy.clone());
    r.metadata.insert("b".into(), b.policy.clone());
    Ok(r)
}

/// Euclidean norm of the backlog after each retained step.
pub fn queue_two_norm(trace: &SimulationTrace) -> SeriesReport {
    let r = SeriesReport::new(
        format!("queue_norm_{}", trace.policy),
        trace.step_indices().to_vec(),
        trace.queue_norms().to_vec(),
    );
    with_policy(r, trace)
}

/// Summary of the windowed SLA statistic for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

/// Windowed SLA statistic `r_i(t)`: the work a static-SLA run started from
/// the algorithm's queues at `t` does over `[t, t + tau)`, minus the work
/// the algorithm did over the same window.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaWindowStats {
    pub tau: usize,
    pub stride: usize,
    /// Window starts that were evaluated.
    pub t: Vec<usize>,
    /// `r_i(t)`, row-major over `t`.
    pub values: Vec<f64>,
    pub per_user: Vec<WindowSummary>,
}

impl SlaWindowStats {
    pub fn n(&self) -> usize {
        self.per_user.len()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let n = self.n();
        &self.values[k * n..(k + 1) * n]
    }
}

/// 1 up to 20,000 steps, otherwise `ceil(T / 20,000)`.
pub fn default_window_stride(steps: usize) -> usize {
    if steps <= FULL_STRIDE_HORIZON {
        1
    } else {
        steps.div_ceil(FULL_STRIDE_HORIZON)
    }
}

/// Evaluates `r_i(t)` at `t = 1, 1 + stride, ...` for every window that fits in the horizon.
pub fn sla_window_stats(
    trace: &SimulationTrace,
    loads: &LoadMatrix,
    sla: &SlaVector,
    tau: usize,
    stride: usize,
) -> Result<SlaWindowStats> {
    trace.require_full("the SLA window statistic")?;
    let steps = trace.steps();
    let n = trace.n();
    if loads.steps() != steps || loads.n() != n || sla.len() != n {
        return Err(Error::Dimension {
            what: "SLA window inputs",
            expected: steps * n,
            got: loads.steps() * loads.n(),
        });
    }
    if tau == 0 || tau > steps {
        return Err(Error::Config(format!(
            "window length must lie in 1..={steps}, got {tau}"
        )));
    }
    if stride == 0 {
        return Err(Error::Config("window stride must be at least 1".into()));
    }

    // prefix[t * n + i] = work of user i in steps 1..=t
    let mut prefix = vec![0.0; (steps + 1) * n];
    for (k, rec) in trace.records().enumerate() {
        for i in 0..n {
            prefix[(k + 1) * n + i] = prefix[k * n + i] + rec.work[i];
        }
    }

    let beta = sla.as_slice();
    let mut starts = Vec::new();
    let mut values = Vec::new();
    let mut q = vec![0.0; n];
    let mut start = 1;
    while start + tau - 1 <= steps {
        q.copy_from_slice(trace.queue_before(start)?);
        let mut static_work = vec![0.0; n];
        for s in start..start + tau {
            let load = loads.row(s - 1);
            for i in 0..n {
                let pending = q[i] + load[i];
                let w = beta[i].min(pending);
                static_work[i] += w;
                q[i] = (pending - beta[i]).max(0.0);
            }
        }
        for i in 0..n {
            let alg = prefix[(start + tau - 1) * n + i] - prefix[(start - 1) * n + i];
            values.push(static_work[i] - alg);
        }
        starts.push(start);
        start += stride;
    }

    let count = starts.len() as f64;
    let per_user = (0..n)
        .map(|i| {
            let col = || values.iter().skip(i).step_by(n).copied();
            let mean = col().sum::<f64>() / count;
            let var = col().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
            WindowSummary {
                min: col().fold(f64::INFINITY, f64::min),
                max: col().fold(f64::NEG_INFINITY, f64::max),
                mean,
                std: var.sqrt(),
            }
        })
        .collect();
    Ok(SlaWindowStats {
        tau,
        stride,
        t: starts,
        values,
        per_user,
    })
}

/// Final-backlog comparison of a multiplicative-weight run against the static-SLA run.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueComparison {
    /// `Q_T(i) - Q'_T(i)`.
    pub excess: Vec<f64>,
    /// `beta(i) (s + 2 epsilon T)` with `s = 32 N^2 ln(N/epsilon) / (epsilon^3 eta)`.
    pub bound: Vec<f64>,
    /// Largest excess divided by `sqrt(T) ln T`.
    pub c_fit: f64,
    /// Largest bound divided by `sqrt(T) ln T`.
    pub c_bound: f64,
}

impl QueueComparison {
    pub fn within_bound(&self) -> bool {
        self.excess.iter().zip(&self.bound).all(|(e, b)| e <= b)
    }
}

pub fn queue_comparison(
    alg: &SimulationTrace,
    baseline: &SimulationTrace,
    sla: &SlaVector,
    epsilon: f64,
    eta: f64,
) -> Result<QueueComparison> {
    let n = alg.n();
    if baseline.n() != n || sla.len() != n || baseline.steps() != alg.steps() {
        return Err(Error::Dimension {
            what: "queue comparison inputs",
            expected: n,
            got: baseline.n(),
        });
    }
    let steps = alg.steps() as f64;
    let nf = n as f64;
    let s = 32.0 * nf * nf * (nf / epsilon).ln() / (epsilon.powi(3) * eta);
    let excess: Vec<f64> = (0..n)
        .map(|i| alg.final_queue()[i] - baseline.final_queue()[i])
        .collect();
    let bound: Vec<f64> = (0..n).map(|i| sla[i] * (s + 2.0 * epsilon * steps)).collect();
    let scale = steps.sqrt() * steps.ln().max(f64::MIN_POSITIVE);
    let c_fit = excess.iter().copied().fold(f64::NEG_INFINITY, f64::max) / scale;
    let c_bound = bound.iter().copied().fold(f64::NEG_INFINITY, f64::max) / scale;
    Ok(QueueComparison {
        excess,
        bound,
        c_fit,
        c_bound,
    })
}
