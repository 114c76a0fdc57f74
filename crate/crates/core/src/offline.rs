//! Offline benchmarks over a known load matrix: the closed-form optimum,
//! two work-maximizing greedy schedules and the dual certificate.

use crate::error::{Error, Result};
use crate::model::{self, ActiveSet, QueueState, SlaVector, DEFAULT_EMPTY_TOLERANCE};
use crate::trace::SimulationTrace;
use crate::workloads::LoadMatrix;

/// Tolerance of the dual feasibility checks.
const DUAL_TOLERANCE: f64 = 1e-12;

/// Most work any schedule with per-step capacity `1 - epsilon` can do:
/// the minimum over `t` of (load arrived through `t`) + `(1 - epsilon)(T - t)`.
pub fn offline_optimal_value(loads: &LoadMatrix, epsilon: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Domain(format!(
            "offline optimum needs 0 <= epsilon < 1, got {epsilon}"
        )));
    }
    Ok(optimal_switch(loads, epsilon).1)
}

/// The minimizing switch step together with the optimal value.
pub fn optimal_switch(loads: &LoadMatrix, epsilon: f64) -> (usize, f64) {
    let steps = loads.steps();
    let cap = 1.0 - epsilon;
    let mut best = (0, cap * steps as f64);
    let mut prefix = 0.0;
    for t in 1..=steps {
        prefix += loads.row(t - 1).iter().sum::<f64>();
        let v = prefix + cap * (steps - t) as f64;
        if v < best.1 {
            best = (t, v);
        }
    }
    best
}

fn check_capacity(capacity: f64) -> Result<()> {
    if !(capacity > 0.0 && capacity <= 1.0) {
        return Err(Error::Domain(format!("capacity must lie in (0, 1], got {capacity}")));
    }
    Ok(())
}

/// Runs an offline per-step scheduler. `serve` maps the pending work of a
/// step to the work done in it.
fn schedule(
    name: &str,
    loads: &LoadMatrix,
    sla: Option<&SlaVector>,
    mut serve: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<SimulationTrace> {
    let n = loads.n();
    let mut q = QueueState::empty(n);
    let mut builder = SimulationTrace::builder(name, n, q.clone(), 1)?.sla(sla.cloned());
    let mut pending = vec![0.0; n];
    for t in 0..loads.steps() {
        let active: ActiveSet = model::feedback(&q, DEFAULT_EMPTY_TOLERANCE);
        let load = loads.row(t);
        for i in 0..n {
            pending[i] = q[i] + load[i];
        }
        let work = serve(&pending)?;
        let next = QueueState::new(pending.iter().zip(&work).map(|(p, w)| (p - w).max(0.0)).collect())?;
        // The offline schedule allocates exactly what it serves.
        builder.push(&active, &work, &work, &next, load)?;
        q = next;
    }
    Ok(builder.finish())
}

/// Serves pending work user by user in index order until `capacity` is spent.
pub fn simple_greedy(loads: &LoadMatrix, capacity: f64) -> Result<SimulationTrace> {
    check_capacity(capacity)?;
    schedule("greedy", loads, None, |pending| {
        let mut left = capacity;
        Ok(pending
            .iter()
            .map(|&p| {
                let w = p.min(left);
                left -= w;
                w
            })
            .collect())
    })
}

/// Water-filling in proportion to the SLAs.
///
/// Each step repeatedly looks at the users with remaining demand. If the one
/// with the smallest demand relative to its SLA can be finished within its
/// proportional offer, it is served in full; otherwise the remaining
/// capacity is split over all of them in proportion to their SLAs.
pub fn proportional_greedy(loads: &LoadMatrix, sla: &SlaVector, capacity: f64) -> Result<SimulationTrace> {
    check_capacity(capacity)?;
    if sla.len() != loads.n() {
        return Err(Error::Dimension {
            what: "SLA vector",
            expected: loads.n(),
            got: sla.len(),
        });
    }
    let beta = sla.as_slice().to_vec();
    let name = if capacity == 1.0 { "pg" } else { "restpg" };
    schedule(name, loads, Some(sla), move |pending| {
        let n = pending.len();
        let mut rem = pending.to_vec();
        let mut work = vec![0.0; n];
        let mut left = capacity;
        loop {
            let members: Vec<usize> = (0..n).filter(|&i| rem[i] > 0.0).collect();
            if members.is_empty() || left <= 0.0 {
                break;
            }
            let share: f64 = members.iter().map(|&i| beta[i]).sum();
            if share <= 0.0 {
                return Err(Error::DegenerateSla);
            }
            let ratio = |i: usize| {
                if beta[i] > 0.0 {
                    rem[i] / beta[i]
                } else {
                    f64::INFINITY
                }
            };
            // min_by keeps the first minimum, so ties go to the lowest index
            let star = members
                .iter()
                .copied()
                .min_by(|&a, &b| ratio(a).total_cmp(&ratio(b)))
                .expect("members is non-empty");
            if rem[star] < beta[star] / share * left {
                work[star] += rem[star];
                left -= rem[star];
                rem[star] = 0.0;
            } else {
                for &k in &members {
                    let give = (beta[k] / share * left).min(rem[k]);
                    work[k] += give;
                    rem[k] = (rem[k] - give).max(0.0);
                }
                left = 0.0;
            }
        }
        Ok(work)
    })
}

/// A candidate solution of the dual program, stored row-major over steps.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub gamma: Vec<f64>,
    pub beta_t: Vec<f64>,
    pub epsilon: f64,
    n: usize,
}

impl DualSolution {
    pub fn new(n: usize, gamma: Vec<f64>, beta_t: Vec<f64>, epsilon: f64) -> Result<Self> {
        if gamma.len() != n * beta_t.len() {
            return Err(Error::Dimension {
                what: "dual gamma matrix",
                expected: n * beta_t.len(),
                got: gamma.len(),
            });
        }
        Ok(Self {
            gamma,
            beta_t,
            epsilon,
            n,
        })
    }

    pub fn steps(&self) -> usize {
        self.beta_t.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma_row(&self, t: usize) -> &[f64] {
        &self.gamma[t * self.n..(t + 1) * self.n]
    }

    /// Reports the first violated constraint, scanning steps in order.
    pub fn check_feasible(&self) -> Result<()> {
        let n = self.n;
        for t in 0..self.steps() {
            let b = self.beta_t[t];
            if !(b >= -DUAL_TOLERANCE) {
                return Err(Error::InfeasibleDual(format!(
                    "beta at step {} is {b}, must be non-negative",
                    t + 1
                )));
            }
            let row = self.gamma_row(t);
            for i in 0..n {
                let g = row[i];
                if !(g >= -DUAL_TOLERANCE) {
                    return Err(Error::InfeasibleDual(format!(
                        "gamma at step {}, user {} is {g}, must be non-negative",
                        t + 1,
                        i + 1
                    )));
                }
                if g + b < 1.0 - DUAL_TOLERANCE {
                    return Err(Error::InfeasibleDual(format!(
                        "gamma + beta at step {}, user {} is {}, must be at least 1",
                        t + 1,
                        i + 1,
                        g + b
                    )));
                }
                if t + 1 < self.steps() && g < self.gamma[(t + 1) * n + i] - DUAL_TOLERANCE {
                    return Err(Error::InfeasibleDual(format!(
                        "gamma of user {} increases from step {} to {}",
                        i + 1,
                        t + 1,
                        t + 2
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Objective of a feasible dual solution: `sum L gamma + (1 - epsilon) sum beta_t`.
pub fn dual_value(dual: &DualSolution, loads: &LoadMatrix) -> Result<f64> {
    if dual.steps() != loads.steps() || dual.n() != loads.n() {
        return Err(Error::Dimension {
            what: "dual solution shape",
            expected: loads.steps() * loads.n(),
            got: dual.steps() * dual.n(),
        });
    }
    dual.check_feasible()?;
    let mut total = 0.0;
    for t in 0..loads.steps() {
        total += loads
            .row(t)
            .iter()
            .zip(dual.gamma_row(t))
            .map(|(l, g)| l * g)
            .sum::<f64>();
        total += (1.0 - dual.epsilon) * dual.beta_t[t];
    }
    Ok(total)
}

/// The dual that charges the loads through step `s` and the capacity after it.
pub fn switch_dual(s: usize, steps: usize, n: usize, epsilon: f64) -> Result<DualSolution> {
    if s > steps {
        return Err(Error::Domain(format!("switch step {s} beyond horizon {steps}")));
    }
    let mut gamma = vec![0.0; steps * n];
    gamma[..s * n].fill(1.0);
    let beta_t = (0..steps).map(|t| if t < s { 0.0 } else { 1.0 }).collect();
    DualSolution::new(n, gamma, beta_t, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1(steps: usize) -> LoadMatrix {
        crate::workloads::example1_instance(steps).unwrap()
    }

    #[test]
    fn optimum_examples() {
        let zero = LoadMatrix::zeros(7, 3);
        assert_eq!(offline_optimal_value(&zero, 0.1).unwrap(), 0.0);
        let ones = LoadMatrix::from_rows(vec![vec![1.0]; 10]).unwrap();
        assert_eq!(offline_optimal_value(&ones, 0.0).unwrap(), 10.0);
        assert_eq!(offline_optimal_value(&example1(6), 0.0).unwrap(), 6.0);
        assert!(offline_optimal_value(&ones, 1.0).is_err());
    }

    #[test]
    fn greedy_fills_in_index_order() {
        let l = LoadMatrix::from_rows(vec![vec![0.7, 0.7], vec![0.0, 0.0]]).unwrap();
        let tr = simple_greedy(&l, 1.0).unwrap();
        let r = tr.record(0);
        assert!((r.work[0] - 0.7).abs() < 1e-15 && (r.work[1] - 0.3).abs() < 1e-15);
        assert!((r.queue_after[1] - 0.4).abs() < 1e-15);
        assert_eq!(simple_greedy(&LoadMatrix::zeros(3, 2), 1.0).unwrap().total_work(), 0.0);
    }

    #[test]
    fn pg_examples() {
        let sla = SlaVector::new(vec![0.5, 0.5]).unwrap();
        let l = LoadMatrix::from_rows(vec![vec![2.0, 2.0]]).unwrap();
        assert_eq!(proportional_greedy(&l, &sla, 1.0).unwrap().record(0).work, &[0.5, 0.5]);
        let l = LoadMatrix::from_rows(vec![vec![0.1, 2.0]]).unwrap();
        let w = proportional_greedy(&l, &sla, 1.0).unwrap().record(0).work.to_vec();
        assert!((w[0] - 0.1).abs() < 1e-15 && (w[1] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn pg_ratio_argmin_stays_work_maximal() {
        // User 1 has the smallest demand but a tiny SLA; picking by raw
        // demand would oversubscribe user 2.
        let sla = SlaVector::new(vec![0.01, 0.99]).unwrap();
        let l = LoadMatrix::from_rows(vec![vec![0.3, 0.5]]).unwrap();
        let tr = proportional_greedy(&l, &sla, 1.0).unwrap();
        assert!((tr.total_work() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn pg_rejects_zero_share_demand() {
        let sla = SlaVector::new(vec![0.0, 0.5]).unwrap();
        let l = LoadMatrix::from_rows(vec![vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            proportional_greedy(&l, &sla, 1.0).unwrap_err(),
            Error::DegenerateSla
        ));
    }

    #[test]
    fn pg_on_example1_does_everything() {
        let sla = SlaVector::new(vec![0.5, 0.2, 0.3]).unwrap();
        let tr = proportional_greedy(&example1(6), &sla, 1.0).unwrap();
        assert!((tr.total_work() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn dual_examples() {
        let l = example1(6);
        let total: f64 = (0..6).map(|t| l.row(t).iter().sum::<f64>()).sum();
        let eps = 0.1;
        let all_gamma = DualSolution::new(3, vec![1.0; 18], vec![0.0; 6], eps).unwrap();
        assert!((dual_value(&all_gamma, &l).unwrap() - total).abs() < 1e-12);
        let all_beta = DualSolution::new(3, vec![0.0; 18], vec![1.0; 6], eps).unwrap();
        assert!((dual_value(&all_beta, &l).unwrap() - 0.9 * 6.0).abs() < 1e-12);
        assert!((dual_value(&switch_dual(0, 6, 3, eps).unwrap(), &l).unwrap() - 5.4).abs() < 1e-12);
        assert!((dual_value(&switch_dual(6, 6, 3, eps).unwrap(), &l).unwrap() - total).abs() < 1e-12);
        let (s, v) = optimal_switch(&l, eps);
        let d = dual_value(&switch_dual(s, 6, 3, eps).unwrap(), &l).unwrap();
        assert!((d - v).abs() < 1e-12);
    }

    #[test]
    fn infeasible_dual_names_constraint() {
        let l = LoadMatrix::zeros(2, 1);
        let d = DualSolution::new(1, vec![0.0, 1.0], vec![1.0, 0.0], 0.0).unwrap();
        let err = dual_value(&d, &l).unwrap_err().to_string();
        assert!(err.contains("increases from step 1 to 2"), "{err}");
        let d = DualSolution::new(1, vec![0.5, 0.5], vec![0.0, 0.6], 0.0).unwrap();
        let err = dual_value(&d, &l).unwrap_err().to_string();
        assert!(err.contains("step 1, user 1"), "{err}");
        assert!(switch_dual(3, 2, 1, 0.0).is_err());
    }
}
